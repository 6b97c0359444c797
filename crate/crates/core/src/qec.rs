//! Kraus channels, Knill-Laflamme checks in basis and random-vector form,
//! and recovery-channel synthesis.
//!
//! Code spaces are either dense vector lists (small registers) or the
//! sector-blocked equilibrium bases. Dense `2^n x 2^n` matrices are only
//! formed up to [`DENSE_QEC_CAP`] qubits.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::correlations::{random_span_coefficients, tcf_reports, CorrelationError, TcfOptions, TcfReport};
use crate::equilibrium::{select_equilibrium_subspace, EquilibriumError};
use crate::pauli::{random_error_family, LocalOperator, PauliError, PauliString, StateVector};
use crate::sector::BlockedBasis;
use crate::thermo::ThermoParams;

pub const KL_TOLERANCE: f64 = 1e-8;
pub const COMPLETENESS_TOLERANCE: f64 = 1e-10;
pub const ORTHONORMALITY_TOLERANCE: f64 = 1e-10;
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;
pub const UNITARY_TOLERANCE: f64 = 1e-10;
/// Largest register for which dense operators are built.
pub const DENSE_QEC_CAP: usize = 10;
/// Largest operator support handled by [`check_completeness`].
const SUPPORT_CAP: usize = 12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QecError {
    #[error("channel needs at least one Kraus operator")]
    EmptyChannel,
    #[error("code space needs at least one basis vector")]
    EmptyCode,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("code basis not orthonormal: deviation {0:e}")]
    NotOrthonormal(f64),
    #[error("matrix not Hermitian: deviation {0:e}")]
    NotHermitian(f64),
    #[error("matrix not unitary: deviation {0:e}")]
    NotUnitary(f64),
    #[error("{what} needs dense matrices; n = {n} exceeds {cap}")]
    TooLarge { what: &'static str, n: usize, cap: usize },
    #[error("operator support of {0} sites too large for a dense norm")]
    SupportTooLarge(usize),
    #[error("errors not correctable on this code: max violation {max_violation:e} >= {tolerance:e}")]
    NotCorrectable { max_violation: f64, tolerance: f64 },
    #[error("random-form check needs at least 2 samples, got {0}")]
    Samples(usize),
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
    #[error(transparent)]
    Correlation(#[from] CorrelationError),
}

/// One Kraus element.
#[derive(Clone, Debug, PartialEq)]
pub enum Kraus {
    Local(LocalOperator),
    Dense(DMatrix<Complex64>),
}

impl Kraus {
    pub fn to_dense(&self, n: usize) -> Result<DMatrix<Complex64>, QecError> {
        match self {
            Kraus::Local(op) => Ok(op.to_dense(n)?),
            Kraus::Dense(m) => Ok(m.clone()),
        }
    }

    fn apply(&self, v: &StateVector) -> Result<StateVector, QecError> {
        match self {
            Kraus::Local(op) => Ok(op.apply(v)?),
            Kraus::Dense(m) => {
                let out = m * v.to_column();
                Ok(StateVector::from_amplitudes(v.n(), out.iter().copied().collect())?)
            }
        }
    }
}

/// `{E_a}` acting on `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorChannel {
    n: usize,
    kraus: Vec<Kraus>,
}

impl ErrorChannel {
    pub fn from_local(n: usize, ops: Vec<LocalOperator>) -> Result<Self, QecError> {
        if ops.is_empty() {
            return Err(QecError::EmptyChannel);
        }
        for op in &ops {
            op.check_sites(n)?;
        }
        Ok(Self {
            n,
            kraus: ops.into_iter().map(Kraus::Local).collect(),
        })
    }

    pub fn from_dense(n: usize, mats: Vec<DMatrix<Complex64>>) -> Result<Self, QecError> {
        if mats.is_empty() {
            return Err(QecError::EmptyChannel);
        }
        let dim = 1usize << n;
        for m in &mats {
            if m.shape() != (dim, dim) {
                return Err(QecError::Dimension(format!(
                    "Kraus matrix {:?} on {n} qubits",
                    m.shape()
                )));
            }
        }
        Ok(Self {
            n,
            kraus: mats.into_iter().map(Kraus::Dense).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.kraus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kraus.is_empty()
    }

    pub fn kraus(&self) -> &[Kraus] {
        &self.kraus
    }

    fn dense_all(&self, what: &'static str) -> Result<Vec<DMatrix<Complex64>>, QecError> {
        if self.n > DENSE_QEC_CAP {
            return Err(QecError::TooLarge {
                what,
                n: self.n,
                cap: DENSE_QEC_CAP,
            });
        }
        self.kraus.iter().map(|k| k.to_dense(self.n)).collect()
    }

    /// `E_a^dag E_b`, symbolic when both factors are.
    fn product(&self, a: usize, b: usize) -> Result<Product, QecError> {
        match (&self.kraus[a], &self.kraus[b]) {
            (Kraus::Local(ea), Kraus::Local(eb)) => Ok(Product::Local(ea.adjoint().compose(eb))),
            (ea, eb) => {
                let ea = ea.to_dense(self.n)?;
                let eb = eb.to_dense(self.n)?;
                Ok(Product::Dense(ea.ad_mul(&eb)))
            }
        }
    }
}

enum Product {
    Local(LocalOperator),
    Dense(DMatrix<Complex64>),
}

#[derive(Clone, Debug)]
enum CodeBasis {
    Dense(Vec<StateVector>),
    Sectored(BlockedBasis),
}

/// Orthonormal basis `{psi_j}` of a code space.
#[derive(Clone, Debug)]
pub struct CodeSpace {
    n: usize,
    basis: CodeBasis,
}

impl CodeSpace {
    pub fn from_vectors(vectors: Vec<StateVector>) -> Result<Self, QecError> {
        let Some(first) = vectors.first() else {
            return Err(QecError::EmptyCode);
        };
        let n = first.n();
        if vectors.iter().any(|v| v.n() != n) {
            return Err(QecError::Dimension("code vectors on different registers".into()));
        }
        let mut worst = 0.0f64;
        for (j, u) in vectors.iter().enumerate() {
            for (k, v) in vectors.iter().enumerate().skip(j) {
                let target = if j == k { ONE } else { ZERO };
                worst = worst.max((u.inner(v)? - target).norm());
            }
        }
        if worst > ORTHONORMALITY_TOLERANCE {
            return Err(QecError::NotOrthonormal(worst));
        }
        Ok(Self {
            n,
            basis: CodeBasis::Dense(vectors),
        })
    }

    /// Members of a blocked basis are assumed orthonormal.
    pub fn from_blocked(basis: BlockedBasis) -> Result<Self, QecError> {
        if basis.is_empty() {
            return Err(QecError::EmptyCode);
        }
        Ok(Self {
            n: basis.table().n(),
            basis: CodeBasis::Sectored(basis),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        match &self.basis {
            CodeBasis::Dense(v) => v.len(),
            CodeBasis::Sectored(b) => b.len(),
        }
    }

    pub fn vector(&self, j: usize) -> StateVector {
        match &self.basis {
            CodeBasis::Dense(v) => v[j].clone(),
            CodeBasis::Sectored(b) => b.vector(j),
        }
    }

    /// `sum_j c_j psi_j`.
    pub fn combination(&self, coeffs: &[Complex64]) -> StateVector {
        match &self.basis {
            CodeBasis::Dense(vs) => {
                let mut out = StateVector::zeros(self.n).expect("register size checked");
                for (v, &c) in vs.iter().zip(coeffs) {
                    out.add_scaled(c, v).expect("same register");
                }
                out
            }
            CodeBasis::Sectored(b) => b.combination(coeffs),
        }
    }

    /// `2^n x l` matrix whose columns are the basis vectors.
    pub fn basis_matrix(&self) -> Result<DMatrix<Complex64>, QecError> {
        self.check_dense("basis matrix")?;
        let dim = 1usize << self.n;
        let mut m = DMatrix::from_element(dim, self.dim(), ZERO);
        for j in 0..self.dim() {
            m.column_mut(j).copy_from_slice(self.vector(j).amplitudes());
        }
        Ok(m)
    }

    /// Orthogonal projector `pi` onto the code space.
    pub fn projector(&self) -> Result<DMatrix<Complex64>, QecError> {
        let v = self.basis_matrix()?;
        Ok(&v * v.adjoint())
    }

    fn check_dense(&self, what: &'static str) -> Result<(), QecError> {
        if self.n > DENSE_QEC_CAP {
            return Err(QecError::TooLarge {
                what,
                n: self.n,
                cap: DENSE_QEC_CAP,
            });
        }
        Ok(())
    }

    /// `<psi_j|O|psi_k>` for all pairs.
    fn gram(&self, op: &Product) -> Result<DMatrix<Complex64>, QecError> {
        match (op, &self.basis) {
            (Product::Local(op), CodeBasis::Sectored(b)) => Ok(b.gram(op)),
            (Product::Local(op), CodeBasis::Dense(vs)) => {
                let images = vs.iter().map(|v| op.apply(v)).collect::<Result<Vec<_>, _>>()?;
                let l = vs.len();
                let mut g = DMatrix::from_element(l, l, ZERO);
                for j in 0..l {
                    for k in 0..l {
                        g[(j, k)] = vs[j].inner(&images[k])?;
                    }
                }
                Ok(g)
            }
            (Product::Dense(m), _) => {
                let v = self.basis_matrix()?;
                Ok(v.ad_mul(&(m * &v)))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KLForm {
    /// Constancy of `<psi|E_a^dag E_b|psi>` over unit vectors.
    Qec,
    /// `<psi_j|E_a^dag E_b|psi_k> = c_ab delta_jk` on a basis.
    QecII,
}

impl KLForm {
    pub fn label(self) -> &'static str {
        match self {
            KLForm::Qec => "QEC",
            KLForm::QecII => "QEC_II",
        }
    }
}

/// Two unit vectors of the code space on which `<E_a^dag E_b>` differs.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub a: usize,
    pub b: usize,
    /// Coefficients in the code basis, unit norm.
    pub coeffs: DVector<Complex64>,
    pub reference_coeffs: DVector<Complex64>,
    pub value: Complex64,
    pub reference_value: Complex64,
}

impl Witness {
    pub fn deviation(&self) -> f64 {
        (self.value - self.reference_value).norm()
    }

    pub fn vector(&self, code: &CodeSpace) -> StateVector {
        code.combination(self.coeffs.as_slice())
    }

    pub fn reference_vector(&self, code: &CodeSpace) -> StateVector {
        code.combination(self.reference_coeffs.as_slice())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KLReport {
    pub form: KLForm,
    pub c_matrix: DMatrix<Complex64>,
    pub passed: bool,
    pub max_violation: f64,
    /// Basis form: `|<psi_j|.|psi_j> - c_ab|`; random form: pairs `a == b`.
    pub max_violation_diag: f64,
    /// Basis form: `|<psi_j|.|psi_k>|, j != k`; random form: pairs `a != b`.
    pub max_violation_offdiag: f64,
    pub tolerance: f64,
    pub witness: Option<Witness>,
}

fn unit(dim: usize, j: usize) -> DVector<Complex64> {
    let mut v = DVector::from_element(dim, ZERO);
    v[j] = ONE;
    v
}

fn rayleigh(g: &DMatrix<Complex64>, c: &DVector<Complex64>) -> Complex64 {
    c.dotc(&(g * c)) / c.norm_squared()
}

/// Basis form. `c_ab` is the mean of the diagonal entries.
pub fn kl_check_basis(channel: &ErrorChannel, code: &CodeSpace, tol: f64) -> Result<KLReport, QecError> {
    check_register(channel, code)?;
    let m = channel.len();
    let l = code.dim();
    let mut c = DMatrix::from_element(m, m, ZERO);
    let mut diag_violation = 0.0f64;
    let mut off_violation = 0.0f64;
    // (violation, a, b, gram) of the worst pair
    let mut worst: Option<(f64, usize, usize, DMatrix<Complex64>)> = None;
    for a in 0..m {
        for b in a..m {
            let g = code.gram(&channel.product(a, b)?)?;
            let mean: Complex64 = g.diagonal().iter().sum::<Complex64>() / l as f64;
            c[(a, b)] = mean;
            c[(b, a)] = mean.conj();
            let mut pair = 0.0f64;
            for j in 0..l {
                for k in 0..l {
                    if j == k {
                        let v = (g[(j, j)] - mean).norm();
                        diag_violation = diag_violation.max(v);
                        pair = pair.max(v);
                    } else {
                        let v = g[(j, k)].norm();
                        off_violation = off_violation.max(v);
                        pair = pair.max(v);
                    }
                }
            }
            if worst.as_ref().is_none_or(|w| pair > w.0) {
                worst = Some((pair, a, b, g));
            }
        }
    }
    let max_violation = diag_violation.max(off_violation);
    let passed = max_violation < tol;
    let witness = if passed {
        None
    } else {
        worst.map(|(_, a, b, g)| basis_witness(a, b, &g))
    };
    Ok(KLReport {
        form: KLForm::QecII,
        c_matrix: c,
        passed,
        max_violation,
        max_violation_diag: diag_violation,
        max_violation_offdiag: off_violation,
        tolerance: tol,
        witness,
    })
}

/// Turns the largest basis-form violation of one gram matrix into two unit
/// vectors with different expectation values.
fn basis_witness(a: usize, b: usize, g: &DMatrix<Complex64>) -> Witness {
    let l = g.nrows();
    let mut best_diag = (0.0f64, 0usize, 0usize);
    let mut best_off = (0.0f64, 0usize, 0usize);
    for j in 0..l {
        for k in 0..l {
            if j == k {
                continue;
            }
            let d = (g[(j, j)] - g[(k, k)]).norm();
            if d > best_diag.0 {
                best_diag = (d, j, k);
            }
            let o = g[(j, k)].norm();
            if o > best_off.0 {
                best_off = (o, j, k);
            }
        }
    }
    let (coeffs, reference) = if best_diag.0 >= best_off.0 {
        (unit(l, best_diag.1), unit(l, best_diag.2))
    } else {
        // (psi_j + w psi_k)/sqrt2 against (psi_j - w psi_k)/sqrt2 differ by
        // 2 Re-type cross terms; one of w = 1, i makes them nonzero
        let (_, j, k) = best_off;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let pick = |w: Complex64| {
            let mut plus = DVector::from_element(l, ZERO);
            plus[j] = Complex64::new(s, 0.0);
            plus[k] = w * s;
            let mut minus = plus.clone();
            minus[k] = -w * s;
            (plus, minus)
        };
        let real = pick(ONE);
        let imag = pick(Complex64::new(0.0, 1.0));
        let dr = (rayleigh(g, &real.0) - rayleigh(g, &real.1)).norm();
        let di = (rayleigh(g, &imag.0) - rayleigh(g, &imag.1)).norm();
        if dr >= di {
            real
        } else {
            imag
        }
    };
    Witness {
        a,
        b,
        value: rayleigh(g, &coeffs),
        reference_value: rayleigh(g, &reference),
        coeffs,
        reference_coeffs: reference,
    }
}

/// Random form: `samples` Gaussian unit vectors of the code space, each
/// compared with the first. Expectations are taken on the materialized
/// vectors, not through the basis matrix elements.
pub fn kl_check_random(
    channel: &ErrorChannel,
    code: &CodeSpace,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<KLReport, QecError> {
    check_register(channel, code)?;
    if samples < 2 {
        return Err(QecError::Samples(samples));
    }
    let m = channel.len();
    let coeffs: Vec<DVector<Complex64>> = random_span_coefficients(code.dim(), samples, seed)
        .into_iter()
        .map(|c| {
            let norm = c.norm();
            c.unscale(norm)
        })
        .collect();
    let mut values: Vec<DMatrix<Complex64>> = Vec::with_capacity(samples);
    for c in &coeffs {
        let psi = code.combination(c.as_slice());
        let images = channel
            .kraus
            .iter()
            .map(|k| k.apply(&psi))
            .collect::<Result<Vec<_>, _>>()?;
        let mut vals = DMatrix::from_element(m, m, ZERO);
        for a in 0..m {
            for b in a..m {
                let v = images[a].inner(&images[b])?;
                vals[(a, b)] = v;
                vals[(b, a)] = v.conj();
            }
        }
        values.push(vals);
    }
    let reference = values[0].clone();
    let mut diag_violation = 0.0f64;
    let mut off_violation = 0.0f64;
    let mut worst = (0.0f64, 0usize, 0usize, 0usize);
    for (s, vals) in values.iter().enumerate().skip(1) {
        for a in 0..m {
            for b in a..m {
                let d = (vals[(a, b)] - reference[(a, b)]).norm();
                if a == b {
                    diag_violation = diag_violation.max(d);
                } else {
                    off_violation = off_violation.max(d);
                }
                if d > worst.0 {
                    worst = (d, s, a, b);
                }
            }
        }
    }
    let max_violation = diag_violation.max(off_violation);
    let passed = max_violation < tol;
    let witness = (!passed).then(|| {
        let (_, s, a, b) = worst;
        Witness {
            a,
            b,
            coeffs: coeffs[s].clone(),
            reference_coeffs: coeffs[0].clone(),
            value: values[s][(a, b)],
            reference_value: reference[(a, b)],
        }
    });
    Ok(KLReport {
        form: KLForm::Qec,
        c_matrix: reference,
        passed,
        max_violation,
        max_violation_diag: diag_violation,
        max_violation_offdiag: off_violation,
        tolerance: tol,
        witness,
    })
}

fn check_register(channel: &ErrorChannel, code: &CodeSpace) -> Result<(), QecError> {
    if channel.n() != code.n() {
        return Err(QecError::Dimension(format!(
            "channel on {} qubits, code on {}",
            channel.n(),
            code.n()
        )));
    }
    Ok(())
}

/// `<psi|E_a^dag E_b|psi>` evaluated directly on one vector.
pub fn error_expectations(channel: &ErrorChannel, psi: &StateVector) -> Result<DMatrix<Complex64>, QecError> {
    let images = channel
        .kraus
        .iter()
        .map(|k| k.apply(psi))
        .collect::<Result<Vec<_>, _>>()?;
    let m = channel.len();
    let norm = psi.norm_sqr();
    let mut out = DMatrix::from_element(m, m, ZERO);
    for a in 0..m {
        for b in 0..m {
            out[(a, b)] = images[a].inner(&images[b])? / norm;
        }
    }
    Ok(out)
}

fn hermiticity_defect(c: &DMatrix<Complex64>) -> f64 {
    (c - c.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `(U, d)` with `U c U^dag = diag(d)`.
pub fn diagonalize_error_matrix(c: &DMatrix<Complex64>) -> Result<(DMatrix<Complex64>, Vec<f64>), QecError> {
    if !c.is_square() {
        return Err(QecError::Dimension(format!("error matrix {:?}", c.shape())));
    }
    let defect = hermiticity_defect(c);
    if defect > HERMITIAN_TOLERANCE {
        return Err(QecError::NotHermitian(defect));
    }
    let sym = (c + c.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    Ok((eig.eigenvectors.adjoint(), eig.eigenvalues.iter().copied().collect()))
}

fn unitarity_defect(u: &DMatrix<Complex64>) -> f64 {
    let id = DMatrix::<Complex64>::identity(u.nrows(), u.ncols());
    (u * u.adjoint() - id).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `F_r = sum_a u_ra E_a`.
pub fn transform_channel(channel: &ErrorChannel, u: &DMatrix<Complex64>) -> Result<ErrorChannel, QecError> {
    let m = channel.len();
    if u.shape() != (m, m) {
        return Err(QecError::Dimension(format!(
            "transform {:?} for {m} Kraus operators",
            u.shape()
        )));
    }
    let defect = unitarity_defect(u);
    if defect > UNITARY_TOLERANCE {
        return Err(QecError::NotUnitary(defect));
    }
    let all_local: Option<Vec<LocalOperator>> = channel
        .kraus
        .iter()
        .map(|k| match k {
            Kraus::Local(op) => Some(op.clone()),
            Kraus::Dense(_) => None,
        })
        .collect();
    match all_local {
        Some(ops) => {
            let out = (0..m)
                .map(|r| {
                    let row: Vec<Complex64> = (0..m).map(|a| u[(r, a)]).collect();
                    LocalOperator::linear_combination(&row, &ops)
                })
                .collect();
            ErrorChannel::from_local(channel.n, out)
        }
        None => {
            let mats = channel.dense_all("mixed Kraus transform")?;
            let out = (0..m)
                .map(|r| {
                    mats.iter()
                        .enumerate()
                        .fold(DMatrix::zeros(mats[0].nrows(), mats[0].ncols()), |acc, (a, e)| {
                            acc + e * u[(r, a)]
                        })
                })
                .collect();
            ErrorChannel::from_dense(channel.n, out)
        }
    }
}

/// `S_E(P) = sum_a E_a P E_a^dag`.
pub fn apply_channel(channel: &ErrorChannel, p: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>, QecError> {
    let dim = 1usize << channel.n;
    if p.shape() != (dim, dim) {
        return Err(QecError::Dimension(format!(
            "density matrix {:?} for {} qubits",
            p.shape(),
            channel.n
        )));
    }
    let mats = channel.dense_all("apply_channel")?;
    Ok(mats
        .iter()
        .fold(DMatrix::zeros(dim, dim), |acc, e| acc + e * p * e.adjoint()))
}

/// Operator norm of `sum_a E_a^dag E_a - Id`.
pub fn check_completeness(channel: &ErrorChannel) -> Result<f64, QecError> {
    let all_local: Option<Vec<&LocalOperator>> = channel
        .kraus
        .iter()
        .map(|k| match k {
            Kraus::Local(op) => Some(op),
            Kraus::Dense(_) => None,
        })
        .collect();
    match all_local {
        Some(ops) => {
            let sum = ops.iter().fold(LocalOperator::identity().scaled(-ONE), |acc, op| {
                acc.plus(&op.adjoint().compose(op))
            });
            local_operator_norm(&sum)
        }
        None => {
            let mats = channel.dense_all("check_completeness")?;
            let dim = 1usize << channel.n;
            let sum = mats
                .iter()
                .fold(-DMatrix::<Complex64>::identity(dim, dim), |acc, e| acc + e.ad_mul(e));
            Ok(hermitian_norm(&sum))
        }
    }
}

fn hermitian_norm(m: &DMatrix<Complex64>) -> f64 {
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0f64, |acc, e| acc.max(e.abs()))
}

/// Spectral norm of a Hermitian local operator, computed on its support.
fn local_operator_norm(op: &LocalOperator) -> Result<f64, QecError> {
    let mut sites: Vec<usize> = op
        .terms()
        .iter()
        .flat_map(|t| t.factors().iter().map(|&(s, _)| s))
        .collect();
    sites.sort_unstable();
    sites.dedup();
    if sites.len() > SUPPORT_CAP {
        return Err(QecError::SupportTooLarge(sites.len()));
    }
    let k = sites.len().max(1);
    let compact = op
        .terms()
        .iter()
        .map(|t| {
            let factors = t
                .factors()
                .iter()
                .map(|&(s, axis)| (sites.binary_search(&s).expect("collected above") + 1, axis))
                .collect();
            PauliString::new(t.coeff(), factors)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let dense = LocalOperator::from_terms(compact).to_dense(k)?;
    let sym = (&dense + dense.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(hermitian_norm(&sym))
}

/// Recovery channel for a KL-passing code: `R_r = pi V_r^dag` from the
/// polar parts of `F_r pi`, plus a completion element so that
/// `sum R^dag R = Id`.
pub fn build_recovery(channel: &ErrorChannel, code: &CodeSpace, tol: f64) -> Result<ErrorChannel, QecError> {
    let n = channel.n();
    if n > DENSE_QEC_CAP {
        return Err(QecError::TooLarge {
            what: "build_recovery",
            n,
            cap: DENSE_QEC_CAP,
        });
    }
    let report = kl_check_basis(channel, code, tol)?;
    if !report.passed {
        return Err(QecError::NotCorrectable {
            max_violation: report.max_violation,
            tolerance: tol,
        });
    }
    let (u, d) = diagonalize_error_matrix(&report.c_matrix)?;
    let f = transform_channel(channel, &u)?.dense_all("build_recovery")?;
    let v = code.basis_matrix()?;
    let dim = 1usize << n;
    let mut recovery = Vec::new();
    let mut covered = DMatrix::<Complex64>::zeros(dim, dim);
    for (fr, &dr) in f.iter().zip(&d) {
        if dr <= tol {
            continue;
        }
        // F_r V = W S X^dag; the isometric part Q = W X^dag maps C onto the image
        let a = fr * &v;
        let svd = a.svd(true, true);
        let w = svd.u.expect("requested");
        let x_adj = svd.v_t.expect("requested");
        let q = w * x_adj;
        let r = &v * q.adjoint();
        covered += r.ad_mul(&r);
        recovery.push(r);
    }
    let residual = DMatrix::<Complex64>::identity(dim, dim) - covered;
    let completion = psd_sqrt(&residual);
    if completion.iter().any(|z| z.norm() > tol) {
        recovery.push(completion);
    }
    ErrorChannel::from_dense(n, recovery)
}

/// Square root of a Hermitian matrix with negative eigenvalues clamped to 0.
fn psd_sqrt(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let roots = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| Complex64::new(e.max(0.0).sqrt(), 0.0)));
    &eig.eigenvectors * roots * eig.eigenvectors.adjoint()
}

/// Frobenius norm of `S_R(S_E(P)) - P`.
pub fn round_trip_residual(
    channel: &ErrorChannel,
    recovery: &ErrorChannel,
    p: &DMatrix<Complex64>,
) -> Result<f64, QecError> {
    let out = apply_channel(recovery, &apply_channel(channel, p)?)?;
    Ok((out - p).norm())
}

/// Random density matrix supported on the code space: `V G G^dag V^dag`
/// normalized, with `G` an `l x l` complex Gaussian matrix.
pub fn random_code_density<R: Rng>(code: &CodeSpace, rng: &mut R) -> Result<DMatrix<Complex64>, QecError> {
    let l = code.dim();
    let g = DMatrix::from_fn(l, l, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let inner = &g * g.adjoint();
    let inner = &inner / inner.trace();
    let v = code.basis_matrix()?;
    Ok(&v * inner * v.adjoint())
}

/// Options of the equilibrium sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumQecOptions {
    pub samples: usize,
    pub seed: u64,
    pub kl_tolerance: f64,
    /// Operators for the accompanying correlation reports; may be empty.
    pub tcf_operators: Vec<LocalOperator>,
}

impl Default for EquilibriumQecOptions {
    fn default() -> Self {
        Self {
            samples: 16,
            seed: 0,
            kl_tolerance: KL_TOLERANCE,
            tcf_operators: Vec::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EquilibriumQecReport {
    pub n: usize,
    pub dim: usize,
    /// Single-member code: the criterion holds vacuously.
    pub degenerate: bool,
    pub family: Vec<LocalOperator>,
    pub basis: KLReport,
    pub random: KLReport,
    pub tcf: Vec<TcfReport>,
}

/// Both KL forms on the equilibrium subspace for a random family of `k`
/// Pauli strings of weight `<= t`, rescaled to a trace-preserving channel.
#[allow(clippy::too_many_arguments)]
pub fn qec_on_equilibrium(
    n: usize,
    params: &ThermoParams,
    bins: usize,
    tau: f64,
    t: usize,
    k: usize,
    options: &EquilibriumQecOptions,
) -> Result<EquilibriumQecReport, QecError> {
    let subspace = select_equilibrium_subspace(n, params, bins, tau)?;
    let family = random_error_family(n, t, k, options.seed, true)?;
    let channel = ErrorChannel::from_local(n, family.clone())?;
    let code = CodeSpace::from_blocked(subspace.basis())?;
    let basis = kl_check_basis(&channel, &code, options.kl_tolerance)?;
    let random = kl_check_random(&channel, &code, options.samples, options.seed, options.kl_tolerance)?;
    let tcf = if options.tcf_operators.is_empty() {
        Vec::new()
    } else {
        let tcf_options = TcfOptions {
            samples: options.samples,
            seed: options.seed,
            full_trace: false,
        };
        tcf_reports(&options.tcf_operators, &subspace, &tcf_options)?
    };
    Ok(EquilibriumQecReport {
        n,
        dim: code.dim(),
        degenerate: code.dim() == 1,
        family,
        basis,
        random,
        tcf,
    })
}

/// Fixed codes and channels on three qubits.
pub mod fixtures {
    use super::*;

    /// `span{|000>, |111>}`.
    pub fn repetition_code() -> CodeSpace {
        CodeSpace::from_vectors(vec![
            StateVector::basis_state(3, "000").expect("valid"),
            StateVector::basis_state(3, "111").expect("valid"),
        ])
        .expect("orthonormal")
    }

    /// `{Id, X1, X2, X3} / 2`.
    pub fn bit_flip_channel() -> ErrorChannel {
        let ops = ["0.5 * I", "0.5 * X1", "0.5 * X2", "0.5 * X3"]
            .iter()
            .map(|s| s.parse().expect("valid"))
            .collect();
        ErrorChannel::from_local(3, ops).expect("valid")
    }

    /// `{Id, Z1} / sqrt 2`.
    pub fn phase_flip_channel() -> ErrorChannel {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let ops = vec![
            LocalOperator::identity().scaled(Complex64::new(s, 0.0)),
            LocalOperator::from(PauliString::single(1, crate::pauli::Axis::Z).expect("valid"))
                .scaled(Complex64::new(s, 0.0)),
        ];
        ErrorChannel::from_local(3, ops).expect("valid")
    }
}
