//! Dense reference constructions shared by the integration tests. Everything
//! here is built from explicit 2x2 matrices and Kronecker products, without
//! going through the crate's symbolic operator code.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn pauli(label: char) -> CMat {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match label {
        'I' => CMat::from_row_slice(2, 2, &[o, z, z, o]),
        'X' => CMat::from_row_slice(2, 2, &[z, o, o, z]),
        'Y' => CMat::from_row_slice(2, 2, &[z, -i, i, z]),
        'Z' => CMat::from_row_slice(2, 2, &[o, z, z, -o]),
        // creation |1><0| and its adjoint
        'M' => CMat::from_row_slice(2, 2, &[z, z, o, z]),
        'P' => CMat::from_row_slice(2, 2, &[z, o, z, z]),
        _ => panic!("unknown label {label}"),
    }
}

/// Kronecker product with site 1 leftmost (most significant).
pub fn kron_sites(n: usize, factors: &[(usize, char)]) -> CMat {
    let mut out = CMat::from_element(1, 1, c(1.0, 0.0));
    for site in 1..=n {
        let label = factors.iter().find(|(s, _)| *s == site).map_or('I', |(_, l)| *l);
        out = out.kronecker(&pauli(label));
    }
    out
}

/// Dense periodic XX0 Hamiltonian.
pub fn dense_hamiltonian(n: usize, h: f64) -> CMat {
    let dim = 1 << n;
    let mut m = CMat::zeros(dim, dim);
    for j in 1..=n {
        let next = if j == n { 1 } else { j + 1 };
        m -= kron_sites(n, &[(j, 'X'), (next, 'X')]);
        m -= kron_sites(n, &[(j, 'Y'), (next, 'Y')]);
        m -= kron_sites(n, &[(j, 'Z')]) * c(h, 0.0);
    }
    m
}

pub fn sorted_eigenvalues(m: &CMat) -> Vec<f64> {
    let mut e: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

pub mod instances {
    //! Seeded random code/channel pairs on three or four qubits.

    use nalgebra::DVector;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;
    use xx0_qec::pauli::{random_error_family, Axis, LocalOperator, PauliString, StateVector};
    use xx0_qec::qec::{CodeSpace, ErrorChannel};

    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub enum Kind {
        /// Gaussian-random two-dimensional subspace, random family.
        Haar,
        /// `span{|u>, |~u>}` in a rotated basis, random family.
        Complement,
        /// `span{|u>, |~u>}` under a subset of single bit flips.
        BitFlips,
    }

    pub struct Instance {
        pub kind: Kind,
        pub code: CodeSpace,
        pub channel: ErrorChannel,
    }

    fn gaussian(rng: &mut ChaCha8Rng, dim: usize) -> DVector<Complex64> {
        DVector::from_fn(dim, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        })
    }

    fn state(n: usize, v: &DVector<Complex64>) -> StateVector {
        StateVector::from_amplitudes(n, v.iter().copied().collect()).unwrap()
    }

    pub fn generate(seed: u64) -> Instance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = if rng.gen_bool(0.5) { 3 } else { 4 };
        let dim = 1usize << n;
        let kind = match rng.gen_range(0..3) {
            0 => Kind::Haar,
            1 => Kind::Complement,
            _ => Kind::BitFlips,
        };
        let (a, b) = match kind {
            Kind::Haar => {
                let a = gaussian(&mut rng, dim);
                let a = a.unscale(a.norm());
                let b = gaussian(&mut rng, dim);
                let b = &b - &a * a.dotc(&b);
                (a.clone(), b.unscale(b.norm()))
            }
            Kind::Complement | Kind::BitFlips => {
                let u = rng.gen_range(0..dim);
                let ubar = u ^ (dim - 1);
                // random unitary mixing of the two code words
                let theta: f64 = rng.gen_range(0.0..std::f64::consts::PI);
                let phi: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
                let (s, c) = theta.sin_cos();
                let w = Complex64::from_polar(1.0, phi);
                let mut a = DVector::from_element(dim, Complex64::new(0.0, 0.0));
                let mut b = a.clone();
                a[u] = Complex64::new(c, 0.0);
                a[ubar] = w * s;
                b[u] = Complex64::new(-s, 0.0);
                b[ubar] = w * c;
                (a, b)
            }
        };
        let code = CodeSpace::from_vectors(vec![state(n, &a), state(n, &b)]).unwrap();
        let ops = match kind {
            Kind::Haar | Kind::Complement => {
                let k = rng.gen_range(1..=4);
                random_error_family(n, 2, k, rng.gen(), true).unwrap()
            }
            Kind::BitFlips => {
                let mut pool: Vec<LocalOperator> = vec![LocalOperator::identity()];
                for site in 1..=n {
                    pool.push(PauliString::single(site, Axis::X).unwrap().into());
                }
                let k = rng.gen_range(2..=pool.len());
                let picked = rand::seq::index::sample(&mut rng, pool.len(), k);
                let scale = Complex64::new(1.0 / (k as f64).sqrt(), 0.0);
                let mut idx: Vec<usize> = picked.into_iter().collect();
                idx.sort_unstable();
                idx.into_iter().map(|i| pool[i].scaled(scale)).collect()
            }
        };
        Instance {
            kind,
            code,
            channel: ErrorChannel::from_local(n, ops).unwrap(),
        }
    }
}
