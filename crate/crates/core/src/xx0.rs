//! Exact eigenbasis of the periodic XX0 chain
//! `H = -sum_j (X_j X_{j+1} + Y_j Y_{j+1} + h Z_j)`.
//!
//! Eigenvectors are labelled by `m` flipped spins carrying distinct momenta
//! `p` with `exp(i p n) = (-1)^(m+1)`. On an ordered configuration
//! `x_1 < ... < x_m` the eigenvector amplitude is `det[exp(i x_j p_k)]`, so
//! `<{p}|{p}> = n^m` and the eigenvalue is `sum_j eps(p_j) - h n` with
//! `eps(p) = -4 cos p + 2h`.

use std::f64::consts::PI;
use std::io::{self, Write};

use itertools::Itertools;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pauli::{site_mask, PauliError, StateVector, MAX_QUBITS};
use crate::sector::SectorTable;

/// Largest chain for which the whole `2^n` spectrum is enumerated.
pub const DENSE_CAP: usize = 14;

/// Absolute tolerance used to call two energies degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("chain length {0} outside 1..={MAX_QUBITS}")]
    Length(usize),
    #[error("the periodic Hamiltonian needs n >= 2, got {0}")]
    TooShort(usize),
    #[error("n = {n} exceeds the full-spectrum cap {cap}; enumerate single sectors instead")]
    OverCap { n: usize, cap: usize },
    #[error("particle number {m} exceeds chain length {n}")]
    ParticleNumber { m: usize, n: usize },
    #[error("momentum indices must be strictly increasing and below {n}: {indices:?}")]
    Indices { n: usize, indices: Vec<usize> },
    #[error("momentum {p} does not solve exp(i p n) = (-1)^(m+1) for n = {n}, m = {m}")]
    Quantization { p: f64, n: usize, m: usize },
    #[error("momentum set belongs to n = {got}, expected {expected}")]
    ChainMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Register(#[from] PauliError),
}

/// Parity of the particle number; it fixes which momentum grid is allowed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(m: usize) -> Parity {
        if m.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

fn check_length(n: usize) -> Result<(), SolverError> {
    if n == 0 || n > MAX_QUBITS {
        Err(SolverError::Length(n))
    } else {
        Ok(())
    }
}

/// Doubled quantum numbers `2q` of the grid `p = pi * 2q / n`, ascending.
///
/// Odd particle number uses integer `q`, even uses half-integer `q`; the
/// window is `-n < 2q <= n`, i.e. `p` in `(-pi, pi]`.
pub fn doubled_quanta(n: usize, parity: Parity) -> Vec<i64> {
    let n = n as i64;
    let wanted_odd = parity == Parity::Even;
    let mut first = -n + 1;
    if (first.rem_euclid(2) == 1) != wanted_odd {
        first += 1;
    }
    (0..n).map(|j| first + 2 * j).collect()
}

/// The `n` solutions of `exp(i p n) = (-1)^(m+1)` in `(-pi, pi]`, ascending.
pub fn momentum_grid(n: usize, parity: Parity) -> Vec<f64> {
    doubled_quanta(n, parity)
        .into_iter()
        .map(|q2| PI * q2 as f64 / n as f64)
        .collect()
}

/// Spin-wave energy `-4 cos p + 2h`.
#[inline]
pub fn epsilon(p: f64, h: f64) -> f64 {
    -4.0 * p.cos() + 2.0 * h
}

/// A choice of `m` distinct momenta from the grid of parity `m`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentumSet {
    n: usize,
    indices: Vec<usize>,
    momenta: Vec<f64>,
}

impl MomentumSet {
    /// `indices` are positions in the ascending grid `momentum_grid(n, parity(m))`.
    pub fn new(n: usize, indices: Vec<usize>) -> Result<Self, SolverError> {
        check_length(n)?;
        let ordered = indices.windows(2).all(|w| w[0] < w[1]);
        if !ordered || indices.iter().any(|&i| i >= n) {
            return Err(SolverError::Indices { n, indices });
        }
        let grid = momentum_grid(n, Parity::of(indices.len()));
        let momenta = indices.iter().map(|&i| grid[i]).collect();
        Ok(Self { n, indices, momenta })
    }

    /// Matches raw momenta (any order) to grid slots, rejecting values that
    /// violate the quantization condition for `m = momenta.len()`.
    pub fn from_momenta(n: usize, momenta: &[f64]) -> Result<Self, SolverError> {
        check_length(n)?;
        let m = momenta.len();
        if m > n {
            return Err(SolverError::ParticleNumber { m, n });
        }
        let target = if m % 2 == 1 { 1.0 } else { -1.0 };
        let grid = momentum_grid(n, Parity::of(m));
        let mut indices = Vec::with_capacity(m);
        for &p in momenta {
            let phase = Complex64::from_polar(1.0, p * n as f64);
            if (phase - Complex64::new(target, 0.0)).norm() > 1e-12 * n as f64 {
                return Err(SolverError::Quantization { p, n, m });
            }
            // fold into (-pi, pi] then snap to the nearest slot
            let folded = p - 2.0 * PI * ((p + PI) / (2.0 * PI)).ceil() + 2.0 * PI;
            let slot = grid
                .iter()
                .position_min_by(|a, b| (*a - folded).abs().total_cmp(&(*b - folded).abs()))
                .expect("grid is non-empty");
            indices.push(slot);
        }
        indices.sort_unstable();
        Self::new(n, indices)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.indices.len()
    }

    pub fn parity(&self) -> Parity {
        Parity::of(self.m())
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn momenta(&self) -> &[f64] {
        &self.momenta
    }

    /// Doubled quantum numbers `2q` of the occupied slots.
    pub fn doubled_quanta(&self) -> Vec<i64> {
        let all = doubled_quanta(self.n, self.parity());
        self.indices.iter().map(|&i| all[i]).collect()
    }

    pub fn energy(&self, h: f64) -> f64 {
        self.momenta.iter().map(|&p| epsilon(p, h)).fold(0.0, |acc, e| acc + e)
    }
}

/// `chi(x|p) = (1/sqrt(m!)) prod_{a<b} sign(x_b - x_a) det[exp(i x_j p_k)]`.
pub fn wavefunction(xs: &[usize], ps: &MomentumSet) -> Complex64 {
    let m = xs.len();
    assert_eq!(m, ps.m(), "one position per momentum");
    if m == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let mut sign = 1.0;
    for (a, b) in (0..m).tuple_combinations() {
        match xs[b].cmp(&xs[a]) {
            std::cmp::Ordering::Greater => {}
            std::cmp::Ordering::Less => sign = -sign,
            std::cmp::Ordering::Equal => return ZERO,
        }
    }
    let a = DMatrix::from_fn(m, m, |j, k| Complex64::from_polar(1.0, xs[j] as f64 * ps.momenta()[k]));
    let factorial: f64 = (1..=m).map(|k| k as f64).product();
    a.determinant() * sign / factorial.sqrt()
}

/// Ordered-configuration amplitudes `det[exp(i x_j p_k)]` for every set of
/// `m` sites, indexed by register bit mask. Minors are built column by
/// column with a Laplace expansion along the newest column.
fn determinant_amplitudes(n: usize, momenta: &[f64]) -> Vec<Complex64> {
    let dim = 1usize << n;
    // phase[x - 1][k] = exp(i x p_k)
    let phases: Vec<Vec<Complex64>> = (1..=n)
        .map(|x| {
            momenta
                .iter()
                .map(|&p| Complex64::from_polar(1.0, x as f64 * p))
                .collect()
        })
        .collect();
    let mut prev = vec![ZERO; dim];
    prev[0] = Complex64::new(1.0, 0.0);
    for (k, _) in momenta.iter().enumerate() {
        let mut next = vec![ZERO; dim];
        let size = k + 1;
        for mask in masks_with_popcount(n, size) {
            let mut acc = ZERO;
            let mut row = 0usize;
            for x in 1..=n {
                let bit = site_mask(n, x);
                if mask & bit == 0 {
                    continue;
                }
                row += 1;
                let minor = prev[mask ^ bit];
                if minor != ZERO {
                    let term = phases[x - 1][k] * minor;
                    if (row + size).is_multiple_of(2) {
                        acc += term;
                    } else {
                        acc -= term;
                    }
                }
            }
            next[mask] = acc;
        }
        prev = next;
    }
    prev
}

/// All `n`-bit masks with exactly `k` bits set, ascending (Gosper's hack).
fn masks_with_popcount(n: usize, k: usize) -> impl Iterator<Item = usize> {
    let limit = 1usize << n;
    let first = if k == 0 { 0 } else { (1usize << k) - 1 };
    let mut current = Some(first);
    std::iter::from_fn(move || {
        let value = current?;
        if value >= limit || (k == 0 && value != 0) {
            current = None;
            return None;
        }
        current = if k == 0 {
            None
        } else {
            let c = value & value.wrapping_neg();
            let r = value + c;
            Some((((r ^ value) >> 2) / c) | r)
        };
        Some(value)
    })
}

/// One exact eigenstate, labelled by its momenta.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenState {
    momenta: MomentumSet,
    h: f64,
    paper_energy: f64,
    hamiltonian_energy: f64,
}

impl EigenState {
    pub fn momenta(&self) -> &MomentumSet {
        &self.momenta
    }

    pub fn n(&self) -> usize {
        self.momenta.n
    }

    pub fn m(&self) -> usize {
        self.momenta.m()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// `sum_j eps(p_j)`, the energy entering the partition function.
    pub fn paper_energy(&self) -> f64 {
        self.paper_energy
    }

    /// Eigenvalue of `H` itself: `paper_energy - h n`.
    pub fn hamiltonian_energy(&self) -> f64 {
        self.hamiltonian_energy
    }

    /// `<{p}|{p}> = n^m`.
    pub fn norm_sqr(&self) -> f64 {
        (self.n() as f64).powi(self.m() as i32)
    }

    /// Unnormalized eigenvector on the full register.
    pub fn vector(&self) -> StateVector {
        let amps = determinant_amplitudes(self.n(), self.momenta.momenta());
        StateVector::from_amplitudes(self.n(), amps).expect("length checked at construction")
    }

    pub fn normalized_vector(&self) -> StateVector {
        let scale = Complex64::new(1.0 / self.norm_sqr().sqrt(), 0.0);
        self.vector().scaled(scale)
    }

    /// Normalized amplitudes in sector coordinates (`table.configs(m)` order).
    pub fn sector_coords(&self, table: &SectorTable) -> Vec<Complex64> {
        let amps = determinant_amplitudes(self.n(), self.momenta.momenta());
        let scale = 1.0 / self.norm_sqr().sqrt();
        table
            .configs(self.m())
            .iter()
            .map(|&index| amps[index as usize] * scale)
            .collect()
    }

    pub fn record(&self) -> EigenRecord {
        EigenRecord {
            n: self.n(),
            h: self.h,
            m: self.m(),
            momentum_indices: self.momenta.indices.clone(),
            paper_energy: self.paper_energy,
            hamiltonian_energy: self.hamiltonian_energy,
        }
    }
}

/// Serialized form of an [`EigenState`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenRecord {
    pub n: usize,
    pub h: f64,
    pub m: usize,
    pub momentum_indices: Vec<usize>,
    pub paper_energy: f64,
    pub hamiltonian_energy: f64,
}

pub fn build_eigenstate(n: usize, h: f64, ps: &MomentumSet) -> Result<EigenState, SolverError> {
    check_length(n)?;
    if ps.n != n {
        return Err(SolverError::ChainMismatch { expected: n, got: ps.n });
    }
    let paper_energy = ps.energy(h);
    Ok(EigenState {
        momenta: ps.clone(),
        h,
        paper_energy,
        hamiltonian_energy: paper_energy - h * n as f64,
    })
}

/// `H v` evaluated bond by bond; site `n + 1` is site 1.
pub fn hamiltonian_apply(v: &StateVector, n: usize, h: f64) -> Result<StateVector, SolverError> {
    if n < 2 {
        return Err(SolverError::TooShort(n));
    }
    if v.n() != n {
        return Err(SolverError::ChainMismatch {
            expected: n,
            got: v.n(),
        });
    }
    let mut out = StateVector::zeros(n)?;
    let amps = v.amplitudes();
    let target = out.amplitudes_mut();
    for (index, &a) in amps.iter().enumerate() {
        if a == ZERO {
            continue;
        }
        let up = index.count_ones() as f64;
        // -h sum_j Z_j = -h (n - 2 * popcount)
        target[index] += a * (-h * (n as f64 - 2.0 * up));
        for j in 1..=n {
            let next = if j == n { 1 } else { j + 1 };
            let pair = site_mask(n, j) | site_mask(n, next);
            let bits = index & pair;
            // XX + YY = 2 (sigma+ sigma- + sigma- sigma+): hops antiparallel pairs
            if bits != 0 && bits != pair {
                target[index ^ pair] += a * -2.0;
            }
        }
    }
    Ok(out)
}

/// All `C(n, m)` eigenstates with `m` flipped spins, in lexicographic order
/// of their momentum indices.
pub fn sector_spectrum(n: usize, m: usize, h: f64) -> Result<Vec<EigenState>, SolverError> {
    check_length(n)?;
    if m > n {
        return Err(SolverError::ParticleNumber { m, n });
    }
    (0..n)
        .combinations(m)
        .map(|indices| build_eigenstate(n, h, &MomentumSet::new(n, indices)?))
        .collect()
}

/// Every eigenstate, sector by sector (`m = 0..=n`).
pub fn full_spectrum(n: usize, h: f64) -> Result<Vec<EigenState>, SolverError> {
    check_length(n)?;
    if n > DENSE_CAP {
        return Err(SolverError::OverCap { n, cap: DENSE_CAP });
    }
    let mut states = Vec::with_capacity(1 << n);
    for m in 0..=n {
        states.extend(sector_spectrum(n, m, h)?);
    }
    Ok(states)
}

/// The lowest level of `H` together with its degeneracy.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundLevel {
    /// Canonical member: smallest `m`, then lexicographically first indices.
    pub state: EigenState,
    pub degeneracy: u128,
}

pub fn ground_level(n: usize, h: f64) -> Result<GroundLevel, SolverError> {
    check_length(n)?;
    if n < 2 {
        return Err(SolverError::TooShort(n));
    }
    let mut best: Option<(f64, EigenState)> = None;
    let mut candidates: Vec<(f64, u128)> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        let grid = momentum_grid(n, Parity::of(m));
        let eps: Vec<f64> = grid.iter().map(|&p| epsilon(p, h)).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eps[a].total_cmp(&eps[b]).then(a.cmp(&b)));
        let chosen: Vec<usize> = order[..m].to_vec();
        let (indices, degeneracy) = if m == 0 {
            (Vec::new(), 1)
        } else {
            let threshold = eps[chosen[m - 1]];
            let below = (0..n).filter(|&i| eps[i] < threshold - DEGENERACY_TOLERANCE).count();
            let mut tied: Vec<usize> = (0..n)
                .filter(|&i| (eps[i] - threshold).abs() <= DEGENERACY_TOLERANCE)
                .collect();
            tied.sort_unstable();
            let needed = m - below;
            let mut indices: Vec<usize> = (0..n)
                .filter(|&i| eps[i] < threshold - DEGENERACY_TOLERANCE)
                .chain(tied.iter().copied().take(needed))
                .collect();
            indices.sort_unstable();
            (indices, binomial(tied.len(), needed))
        };
        let state = build_eigenstate(n, h, &MomentumSet::new(n, indices)?)?;
        let e = state.hamiltonian_energy;
        candidates.push((e, degeneracy));
        let better = match &best {
            None => true,
            Some((be, _)) => e < be - DEGENERACY_TOLERANCE,
        };
        if better {
            best = Some((e, state));
        }
    }
    let (e0, state) = best.expect("at least the m = 0 sector exists");
    let degeneracy = candidates
        .iter()
        .filter(|(e, _)| (e - e0).abs() <= DEGENERACY_TOLERANCE)
        .map(|(_, d)| d)
        .sum();
    Ok(GroundLevel { state, degeneracy })
}

pub fn ground_state(n: usize, h: f64) -> Result<EigenState, SolverError> {
    Ok(ground_level(n, h)?.state)
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k as u128).fold(1u128, |acc, i| acc * (n as u128 - i) / (i + 1))
}

/// Dumps unnormalized eigenvectors as consecutive little-endian
/// `(re, im)` double pairs, `2^n` amplitudes per state.
pub fn write_vectors_le<W: Write>(states: &[EigenState], mut out: W) -> io::Result<()> {
    for s in states {
        for a in s.vector().amplitudes() {
            out.write_all(&a.re.to_le_bytes())?;
            out.write_all(&a.im.to_le_bytes())?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-14
    }

    #[test]
    fn grids() {
        let g = momentum_grid(4, Parity::Odd);
        let expect = [-PI / 2.0, 0.0, PI / 2.0, PI];
        assert!(g.iter().zip(expect).all(|(a, b)| close(*a, b)));
        let g = momentum_grid(2, Parity::Even);
        assert!(close(g[0], -PI / 2.0) && close(g[1], PI / 2.0));
        let g = momentum_grid(3, Parity::Odd);
        let expect = [-2.0 * PI / 3.0, 0.0, 2.0 * PI / 3.0];
        assert!(g.iter().zip(expect).all(|(a, b)| close(*a, b)));
        for n in 1..9 {
            for parity in [Parity::Even, Parity::Odd] {
                let g = momentum_grid(n, parity);
                assert_eq!(g.len(), n);
                assert!(g.windows(2).all(|w| w[0] < w[1]));
                assert!(g[0] > -PI && g[n - 1] <= PI);
            }
        }
    }

    #[test]
    fn grid_solves_quantization() {
        for n in 1..12 {
            for m in 0..=n {
                let target = if m % 2 == 1 { 1.0 } else { -1.0 };
                for p in momentum_grid(n, Parity::of(m)) {
                    let z = Complex64::from_polar(1.0, p * n as f64);
                    assert!((z - target).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn momentum_set_validation() {
        assert!(MomentumSet::new(4, vec![2, 1]).is_err());
        assert!(MomentumSet::new(4, vec![1, 4]).is_err());
        let ps = MomentumSet::from_momenta(4, &[PI / 2.0, -PI / 2.0]).unwrap_err();
        assert!(matches!(ps, SolverError::Quantization { .. }));
        let ps = MomentumSet::from_momenta(4, &[PI / 4.0, -PI / 4.0]).unwrap();
        assert_eq!(ps.indices(), &[1, 2]);
        // 3 pi is the same solution as pi
        let ps = MomentumSet::from_momenta(4, &[3.0 * PI]).unwrap();
        assert_eq!(ps.indices(), &[3]);
    }

    #[test]
    fn wavefunction_examples() {
        let ps = MomentumSet::new(4, vec![2]).unwrap(); // p = pi/2 on the odd grid
        let chi = wavefunction(&[3], &ps);
        assert!((chi - Complex64::from_polar(1.0, 1.5 * PI)).norm() < 1e-14);

        let ps = MomentumSet::from_momenta(4, &[PI / 4.0, 3.0 * PI / 4.0]).unwrap();
        assert_eq!(wavefunction(&[2, 2], &ps), ZERO);

        // n = 4, xs = (1, 2), ps = (0, pi/2): evaluated with the formula
        // directly on these (non-grid) momenta
        let raw = MomentumSet {
            n: 4,
            indices: vec![0, 1],
            momenta: vec![0.0, PI / 2.0],
        };
        let chi = wavefunction(&[1, 2], &raw);
        let expect = Complex64::new(-1.0, -1.0) / 2f64.sqrt();
        assert!((chi - expect).norm() < 1e-14);
    }

    #[test]
    fn masks_enumerate_binomially() {
        for n in 1..8 {
            for k in 0..=n {
                let masks: Vec<usize> = masks_with_popcount(n, k).collect();
                assert_eq!(masks.len() as u128, binomial(n, k));
                assert!(masks.iter().all(|m| m.count_ones() as usize == k));
                assert!(masks.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn vacuum_and_one_particle() {
        let s = build_eigenstate(5, 0.7, &MomentumSet::new(5, vec![]).unwrap()).unwrap();
        assert_eq!(s.paper_energy(), 0.0);
        assert!(close(s.hamiltonian_energy(), -3.5));
        assert_eq!(s.vector(), StateVector::basis_index(5, 0).unwrap());

        let s = build_eigenstate(5, 0.0, &MomentumSet::new(5, vec![1]).unwrap()).unwrap();
        assert!((s.vector().norm_sqr() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn hamiltonian_needs_two_sites() {
        let v = StateVector::basis_index(1, 0).unwrap();
        assert!(matches!(hamiltonian_apply(&v, 1, 0.0), Err(SolverError::TooShort(1))));
    }

    #[test]
    fn hamiltonian_on_vacuum_and_single_flip() {
        let n = 5;
        let h = 0.3;
        let v = StateVector::basis_index(n, 0).unwrap();
        let out = hamiltonian_apply(&v, n, h).unwrap();
        assert!((out.amplitudes()[0] - Complex64::new(-h * n as f64, 0.0)).norm() < 1e-15);

        // h = 0: flipped spin at site 3 hops to sites 2 and 4 with amplitude -2
        let v = StateVector::basis_index(n, site_mask(n, 3)).unwrap();
        let out = hamiltonian_apply(&v, n, 0.0).unwrap();
        let mut expect = vec![ZERO; 1 << n];
        expect[site_mask(n, 2)] = Complex64::new(-2.0, 0.0);
        expect[site_mask(n, 4)] = Complex64::new(-2.0, 0.0);
        assert_eq!(out.amplitudes(), &expect[..]);
    }

    #[test]
    fn full_spectrum_counts_and_cap() {
        assert_eq!(full_spectrum(6, 0.0).unwrap().len(), 64);
        assert!(matches!(
            full_spectrum(DENSE_CAP + 1, 0.0),
            Err(SolverError::OverCap { .. })
        ));
        // sectors remain available beyond the cap
        assert_eq!(sector_spectrum(DENSE_CAP + 2, 1, 0.0).unwrap().len(), DENSE_CAP + 2);
    }

    #[test]
    fn strong_field_ground_state_is_vacuum() {
        let g = ground_level(6, 2.5).unwrap();
        assert_eq!(g.state.m(), 0);
        assert_eq!(g.degeneracy, 1);
    }

    #[test]
    fn vacuum_energy_decreases_with_field() {
        let energies: Vec<f64> = [-1.0, -0.5, 0.0, 0.5, 1.0]
            .iter()
            .map(|&h| {
                build_eigenstate(6, h, &MomentumSet::new(6, vec![]).unwrap())
                    .unwrap()
                    .hamiltonian_energy()
            })
            .collect();
        assert!(energies.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn record_serializes_expected_fields() {
        let s = build_eigenstate(4, 0.5, &MomentumSet::new(4, vec![0, 3]).unwrap()).unwrap();
        let json = serde_json::to_value(s.record()).unwrap();
        for key in ["n", "h", "m", "momentum_indices", "paper_energy", "hamiltonian_energy"] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn vector_dump_is_little_endian_pairs() {
        let states = full_spectrum(2, 0.0).unwrap();
        let mut buf = Vec::new();
        write_vectors_le(&states, &mut buf).unwrap();
        assert_eq!(buf.len(), 4 * 4 * 16);
        let re = f64::from_le_bytes(buf[0..8].try_into().unwrap());
        assert_eq!(re, 1.0);
    }
}
