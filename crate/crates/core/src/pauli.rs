//! Qubit registers, Pauli strings and local operators.
//!
//! Basis index `b` of an `n`-qubit register encodes the bit string
//! `b_1 b_2 ... b_n` with site 1 as the most significant bit, so the
//! all-zero (ferromagnetic) state is index 0. `|0>` is the `+1` eigenvector
//! of `Z`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Largest register the crate will materialize.
pub const MAX_QUBITS: usize = 24;

/// Tolerance on `| <v|v> - 1 |` for vectors that claim to be normalized.
pub const NORM_TOLERANCE: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PauliError {
    #[error("qubit count {0} outside 1..={MAX_QUBITS}")]
    QubitCount(usize),
    #[error("bit string has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid bit character {0:?}")]
    InvalidBit(char),
    #[error("site {site} outside 1..={n}")]
    SiteOutOfRange { site: usize, n: usize },
    #[error("site {0} appears twice in one Pauli string")]
    DuplicateSite(usize),
    #[error("register sizes differ: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("cannot parse {0:?}")]
    Parse(String),
    #[error("requested {requested} distinct strings but only {available} have weight <= {weight}")]
    FamilyTooLarge {
        requested: usize,
        available: u128,
        weight: usize,
    },
    #[error("invalid error family parameters: {0}")]
    FamilyParameters(String),
}

fn check_qubits(n: usize) -> Result<(), PauliError> {
    if n == 0 || n > MAX_QUBITS {
        Err(PauliError::QubitCount(n))
    } else {
        Ok(())
    }
}

/// Bit mask of `site` (1-based, site 1 most significant) in an `n`-qubit index.
#[inline]
pub fn site_mask(n: usize, site: usize) -> usize {
    1usize << (n - site)
}

/// Amplitudes of an `n`-qubit state in the computational basis.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn zeros(n: usize) -> Result<Self, PauliError> {
        check_qubits(n)?;
        Ok(Self {
            n,
            amplitudes: vec![ZERO; 1 << n],
        })
    }

    pub fn from_amplitudes(n: usize, amplitudes: Vec<Complex64>) -> Result<Self, PauliError> {
        check_qubits(n)?;
        if amplitudes.len() != 1 << n {
            return Err(PauliError::LengthMismatch {
                expected: 1 << n,
                got: amplitudes.len(),
            });
        }
        Ok(Self { n, amplitudes })
    }

    /// The basis vector `|b_1 ... b_n>` for a string of `'0'`/`'1'` characters.
    pub fn basis_state(n: usize, bits: &str) -> Result<Self, PauliError> {
        check_qubits(n)?;
        let len = bits.chars().count();
        if len != n {
            return Err(PauliError::LengthMismatch { expected: n, got: len });
        }
        let mut index = 0usize;
        for c in bits.chars() {
            index <<= 1;
            match c {
                '0' => {}
                '1' => index |= 1,
                other => return Err(PauliError::InvalidBit(other)),
            }
        }
        Self::basis_index(n, index)
    }

    pub fn basis_index(n: usize, index: usize) -> Result<Self, PauliError> {
        let mut v = Self::zeros(n)?;
        if index >= v.amplitudes.len() {
            return Err(PauliError::LengthMismatch {
                expected: v.amplitudes.len(),
                got: index,
            });
        }
        v.amplitudes[index] = ONE;
        Ok(v)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() < NORM_TOLERANCE
    }

    /// `<self|other>`, antilinear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64, PauliError> {
        if self.n != other.n {
            return Err(PauliError::SizeMismatch(self.n, other.n));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn scaled(&self, c: Complex64) -> StateVector {
        StateVector {
            n: self.n,
            amplitudes: self.amplitudes.iter().map(|a| a * c).collect(),
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, c: Complex64, other: &StateVector) -> Result<(), PauliError> {
        if self.n != other.n {
            return Err(PauliError::SizeMismatch(self.n, other.n));
        }
        for (a, b) in self.amplitudes.iter_mut().zip(&other.amplitudes) {
            *a += c * b;
        }
        Ok(())
    }

    /// Returns `None` for the zero vector.
    pub fn normalized(&self) -> Option<StateVector> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return None;
        }
        Some(self.scaled(Complex64::new(1.0 / norm, 0.0)))
    }

    pub fn to_column(&self) -> nalgebra::DVector<Complex64> {
        nalgebra::DVector::from_column_slice(&self.amplitudes)
    }
}

/// Single-site factor of a Pauli string.
///
/// `Minus` is the creation operator `(X - iY)/2 = |1><0|`; `Plus` is its
/// adjoint `|0><1|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
    Minus,
    Plus,
}

impl Axis {
    pub const ALL: [Axis; 5] = [Axis::X, Axis::Y, Axis::Z, Axis::Minus, Axis::Plus];

    /// Image of the single-qubit basis state `bit`: `(new_bit, amplitude)`,
    /// or `None` when the factor annihilates it.
    #[inline]
    pub fn act(self, bit: bool) -> Option<(bool, Complex64)> {
        match (self, bit) {
            (Axis::X, b) => Some((!b, ONE)),
            (Axis::Y, false) => Some((true, I)),
            (Axis::Y, true) => Some((false, -I)),
            (Axis::Z, false) => Some((false, ONE)),
            (Axis::Z, true) => Some((true, -ONE)),
            (Axis::Minus, false) => Some((true, ONE)),
            (Axis::Minus, true) => None,
            (Axis::Plus, true) => Some((false, ONE)),
            (Axis::Plus, false) => None,
        }
    }

    pub fn adjoint(self) -> Axis {
        match self {
            Axis::Minus => Axis::Plus,
            Axis::Plus => Axis::Minus,
            other => other,
        }
    }

    /// 2x2 matrix `[[<0|A|0>, <0|A|1>], [<1|A|0>, <1|A|1>]]`.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let mut m = [[ZERO; 2]; 2];
        for (col, bit) in [false, true].into_iter().enumerate() {
            if let Some((out, amp)) = self.act(bit) {
                m[out as usize][col] = amp;
            }
        }
        m
    }

    fn symbol(self) -> char {
        match self {
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
            Axis::Minus => 'M',
            Axis::Plus => 'P',
        }
    }

    fn from_symbol(c: char) -> Option<Axis> {
        match c.to_ascii_uppercase() {
            'X' => Some(Axis::X),
            'Y' => Some(Axis::Y),
            'Z' => Some(Axis::Z),
            'M' => Some(Axis::Minus),
            'P' => Some(Axis::Plus),
            _ => None,
        }
    }
}

type Mat2 = [[Complex64; 2]; 2];

fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, entry) in row.iter_mut().enumerate() {
            *entry = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

const IDENTITY2: Mat2 = [[ONE, ZERO], [ZERO, ONE]];

/// Writes a 2x2 matrix as a short list of `(coefficient, factor)` pairs where
/// `None` stands for the identity. Exact single-factor matches are preferred;
/// anything else is expanded in the `I, X, Y, Z` basis.
fn decompose_mat2(m: &Mat2) -> Vec<(Complex64, Option<Axis>)> {
    let candidates: [(Option<Axis>, Mat2); 6] = [
        (None, IDENTITY2),
        (Some(Axis::X), Axis::X.matrix()),
        (Some(Axis::Y), Axis::Y.matrix()),
        (Some(Axis::Z), Axis::Z.matrix()),
        (Some(Axis::Minus), Axis::Minus.matrix()),
        (Some(Axis::Plus), Axis::Plus.matrix()),
    ];
    for (factor, basis) in candidates.iter() {
        // pick the entry of largest modulus in the basis matrix as pivot
        let (pr, pc) = if basis[0][0] != ZERO {
            (0, 0)
        } else if basis[0][1] != ZERO {
            (0, 1)
        } else {
            (1, 0)
        };
        let c = m[pr][pc] / basis[pr][pc];
        let matches = (0..2).all(|r| (0..2).all(|col| m[r][col] == c * basis[r][col]));
        if matches {
            if c == ZERO {
                return Vec::new();
            }
            return vec![(c, *factor)];
        }
    }
    // tr(sigma^a M)/2 for each Pauli basis element
    let half = Complex64::new(0.5, 0.0);
    let ci = (m[0][0] + m[1][1]) * half;
    let cx = (m[0][1] + m[1][0]) * half;
    let cy = (m[1][0] - m[0][1]) * half * I;
    let cz = (m[0][0] - m[1][1]) * half;
    [
        (ci, None),
        (cx, Some(Axis::X)),
        (cy, Some(Axis::Y)),
        (cz, Some(Axis::Z)),
    ]
    .into_iter()
    .filter(|(c, _)| *c != ZERO)
    .collect()
}

/// A scalar times a product of single-site factors on distinct sites.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliString {
    coeff: Complex64,
    factors: Vec<(usize, Axis)>,
}

impl PauliString {
    pub fn identity() -> Self {
        Self {
            coeff: ONE,
            factors: Vec::new(),
        }
    }

    /// Builds a string from `(site, axis)` pairs; sites are 1-based and must
    /// be distinct. Factors are stored sorted by site.
    pub fn new(coeff: Complex64, factors: Vec<(usize, Axis)>) -> Result<Self, PauliError> {
        let mut factors = factors;
        factors.sort_by_key(|&(site, _)| site);
        for w in factors.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(PauliError::DuplicateSite(w[0].0));
            }
        }
        if let Some(&(0, _)) = factors.first() {
            return Err(PauliError::SiteOutOfRange { site: 0, n: 0 });
        }
        Ok(Self { coeff, factors })
    }

    pub fn single(site: usize, axis: Axis) -> Result<Self, PauliError> {
        Self::new(ONE, vec![(site, axis)])
    }

    pub fn coeff(&self) -> Complex64 {
        self.coeff
    }

    pub fn factors(&self) -> &[(usize, Axis)] {
        &self.factors
    }

    pub fn weight(&self) -> usize {
        self.factors.len()
    }

    pub fn max_site(&self) -> usize {
        self.factors.last().map_or(0, |&(s, _)| s)
    }

    pub fn with_coeff(&self, coeff: Complex64) -> Self {
        Self {
            coeff,
            factors: self.factors.clone(),
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        self.with_coeff(self.coeff * c)
    }

    /// True when every factor is one of `X`, `Y`, `Z`.
    pub fn is_hermitian_product(&self) -> bool {
        self.factors
            .iter()
            .all(|(_, a)| matches!(a, Axis::X | Axis::Y | Axis::Z))
    }

    pub fn check_sites(&self, n: usize) -> Result<(), PauliError> {
        match self.factors.last() {
            Some(&(site, _)) if site > n => Err(PauliError::SiteOutOfRange { site, n }),
            _ => Ok(()),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            coeff: self.coeff.conj(),
            factors: self.factors.iter().map(|&(s, a)| (s, a.adjoint())).collect(),
        }
    }

    /// Image of one basis index: `P|b> = amplitude |b'>`, or `None` if the
    /// string annihilates `|b>`. `n` must already be validated.
    #[inline]
    pub fn act_on_index(&self, n: usize, index: usize) -> Option<(usize, Complex64)> {
        let mut out = index;
        let mut amp = self.coeff;
        for &(site, axis) in &self.factors {
            let mask = site_mask(n, site);
            let bit = index & mask != 0;
            let (new_bit, a) = axis.act(bit)?;
            if new_bit != bit {
                out ^= mask;
            }
            amp *= a;
        }
        Some((out, amp))
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector, PauliError> {
        let mut out = StateVector::zeros(v.n)?;
        self.apply_into(v, &mut out)?;
        Ok(out)
    }

    /// `out += P v`.
    pub fn apply_into(&self, v: &StateVector, out: &mut StateVector) -> Result<(), PauliError> {
        self.check_sites(v.n)?;
        if out.n != v.n {
            return Err(PauliError::SizeMismatch(out.n, v.n));
        }
        for (index, amp) in v.amplitudes.iter().enumerate() {
            if *amp == ZERO {
                continue;
            }
            if let Some((target, phase)) = self.act_on_index(v.n, index) {
                out.amplitudes[target] += phase * amp;
            }
        }
        Ok(())
    }

    /// Site-by-site product `self * rhs`. Factors that do not multiply to a
    /// single factor are expanded, so the result can have several terms.
    pub fn compose(&self, rhs: &PauliString) -> LocalOperator {
        let mut sites: Vec<usize> = self.factors.iter().chain(&rhs.factors).map(|&(s, _)| s).collect();
        sites.sort_unstable();
        sites.dedup();

        let mut partial: Vec<(Complex64, Vec<(usize, Axis)>)> = vec![(self.coeff * rhs.coeff, Vec::new())];
        for site in sites {
            let left = self.axis_at(site).map_or(IDENTITY2, Axis::matrix);
            let right = rhs.axis_at(site).map_or(IDENTITY2, Axis::matrix);
            let pieces = decompose_mat2(&mat2_mul(&left, &right));
            let mut next = Vec::with_capacity(partial.len() * pieces.len());
            for (c, factors) in &partial {
                for &(pc, axis) in &pieces {
                    let mut f = factors.clone();
                    if let Some(a) = axis {
                        f.push((site, a));
                    }
                    next.push((c * pc, f));
                }
            }
            partial = next;
        }
        LocalOperator::from_terms(
            partial
                .into_iter()
                .map(|(coeff, factors)| PauliString { coeff, factors })
                .collect(),
        )
    }

    fn axis_at(&self, site: usize) -> Option<Axis> {
        self.factors
            .binary_search_by_key(&site, |&(s, _)| s)
            .ok()
            .map(|i| self.factors[i].1)
    }
}

fn fmt_complex(c: Complex64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if c.im == 0.0 {
        write!(f, "{}", c.re)
    } else if c.im < 0.0 {
        write!(f, "{}-{}i", c.re, -c.im)
    } else {
        write!(f, "{}+{}i", c.re, c.im)
    }
}

fn parse_complex(s: &str) -> Option<Complex64> {
    let s = s.trim();
    if let Ok(re) = s.parse::<f64>() {
        return Some(Complex64::new(re, 0.0));
    }
    let body = s.strip_suffix('i')?;
    if body.is_empty() || body == "+" {
        return Some(I);
    }
    if body == "-" {
        return Some(-I);
    }
    if let Ok(im) = body.parse::<f64>() {
        return Some(Complex64::new(0.0, im));
    }
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'))?;
    let re = body[..split].parse::<f64>().ok()?;
    let im_str = &body[split..];
    let im = match im_str {
        "+" => 1.0,
        "-" => -1.0,
        _ => im_str.parse::<f64>().ok()?,
    };
    Some(Complex64::new(re, im))
}

/// Compact text form `c * X1 Y3 Z7`; the identity is `c * I`.
impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_complex(self.coeff, f)?;
        write!(f, " *")?;
        if self.factors.is_empty() {
            return write!(f, " I");
        }
        for &(site, axis) in &self.factors {
            write!(f, " {}{}", axis.symbol(), site)?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = PauliError;

    /// Accepts `c * X1 Z3`, `X1 Z3` (coefficient 1), `c * I` and `I`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || PauliError::Parse(s.to_string());
        let (coeff, body) = match s.split_once('*') {
            Some((c, rest)) => (parse_complex(c).ok_or_else(err)?, rest),
            None => (ONE, s),
        };
        let mut factors = Vec::new();
        for token in body.split_whitespace() {
            if token.eq_ignore_ascii_case("I") {
                continue;
            }
            let mut chars = token.chars();
            let axis = chars.next().and_then(Axis::from_symbol).ok_or_else(err)?;
            let site: usize = chars.as_str().parse().map_err(|_| err())?;
            if site == 0 {
                return Err(err());
            }
            factors.push((site, axis));
        }
        PauliString::new(coeff, factors)
    }
}

/// Finite sum of Pauli strings. The empty sum is the zero operator.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct LocalOperator {
    terms: Vec<PauliString>,
}

impl LocalOperator {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn identity() -> Self {
        Self::from(PauliString::identity())
    }

    /// Collects terms with identical factor lists and drops exact zeros.
    pub fn from_terms(terms: Vec<PauliString>) -> Self {
        let mut merged: Vec<PauliString> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.iter_mut().find(|m| m.factors == t.factors) {
                Some(m) => m.coeff += t.coeff,
                None => merged.push(t),
            }
        }
        merged.retain(|t| t.coeff != ZERO);
        Self { terms: merged }
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.terms.iter().map(PauliString::weight).max().unwrap_or(0)
    }

    pub fn max_site(&self) -> usize {
        self.terms.iter().map(PauliString::max_site).max().unwrap_or(0)
    }

    pub fn check_sites(&self, n: usize) -> Result<(), PauliError> {
        self.terms.iter().try_for_each(|t| t.check_sites(n))
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector, PauliError> {
        self.check_sites(v.n)?;
        let mut out = StateVector::zeros(v.n)?;
        for t in &self.terms {
            t.apply_into(v, &mut out)?;
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            terms: self.terms.iter().map(PauliString::adjoint).collect(),
        }
    }

    pub fn compose(&self, rhs: &LocalOperator) -> LocalOperator {
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &rhs.terms {
                terms.extend(a.compose(b).terms);
            }
        }
        LocalOperator::from_terms(terms)
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        LocalOperator::from_terms(self.terms.iter().map(|t| t.scaled(c)).collect())
    }

    pub fn plus(&self, other: &LocalOperator) -> Self {
        LocalOperator::from_terms(self.terms.iter().chain(&other.terms).cloned().collect())
    }

    /// `sum_a coeffs[a] * ops[a]`.
    pub fn linear_combination(coeffs: &[Complex64], ops: &[LocalOperator]) -> Self {
        let terms = coeffs
            .iter()
            .zip(ops)
            .flat_map(|(c, op)| op.terms.iter().map(move |t| t.scaled(*c)))
            .collect();
        LocalOperator::from_terms(terms)
    }

    /// Dense `2^n x 2^n` matrix, built column by column from the symbolic action.
    pub fn to_dense(&self, n: usize) -> Result<DMatrix<Complex64>, PauliError> {
        check_qubits(n)?;
        self.check_sites(n)?;
        let dim = 1usize << n;
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        for t in &self.terms {
            for col in 0..dim {
                if let Some((row, amp)) = t.act_on_index(n, col) {
                    m[(row, col)] += amp;
                }
            }
        }
        Ok(m)
    }
}

impl From<PauliString> for LocalOperator {
    fn from(p: PauliString) -> Self {
        LocalOperator::from_terms(vec![p])
    }
}

impl fmt::Display for LocalOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0 * I");
        }
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl FromStr for LocalOperator {
    type Err = PauliError;

    /// Terms separated by `" + "`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let terms = s
            .split(" + ")
            .map(str::parse)
            .collect::<Result<Vec<PauliString>, _>>()?;
        Ok(LocalOperator::from_terms(terms))
    }
}

/// Square `2^n x 2^n` complex matrix acting on an `n`-qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

    pub fn from_matrix(n: usize, entries: DMatrix<Complex64>) -> Result<Self, PauliError> {
        check_qubits(n)?;
        let dim = 1usize << n;
        if entries.nrows() != dim || entries.ncols() != dim {
            return Err(PauliError::LengthMismatch {
                expected: dim,
                got: entries.nrows(),
            });
        }
        Ok(Self { n, entries })
    }

    /// `|v><v| / <v|v>`.
    pub fn pure(v: &StateVector) -> Result<Self, PauliError> {
        let col = v.to_column();
        let norm = v.norm_sqr();
        if norm == 0.0 {
            return Err(PauliError::Parse("zero vector has no density matrix".into()));
        }
        Self::from_matrix(v.n, &col * col.adjoint() / Complex64::new(norm, 0.0))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (&self.entries - self.entries.adjoint()).norm()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() < Self::HERMITIAN_TOLERANCE
    }

    /// Hermitian, unit trace, eigenvalues `>= -1e-10`.
    pub fn is_state(&self) -> bool {
        if !self.is_hermitian() || (self.trace() - ONE).norm() > 1e-12 {
            return false;
        }
        let herm = (&self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().all(|&e| e >= -1e-10)
    }

    pub fn frobenius_distance(&self, other: &DensityMatrix) -> f64 {
        (&self.entries - &other.entries).norm()
    }
}

/// Number of Pauli strings with `X/Y/Z` factors and weight `<= t` on `n` sites.
pub fn count_strings_up_to_weight(n: usize, t: usize) -> u128 {
    (0..=t.min(n))
        .map(|w| binomial(n as u128, w as u128) * 3u128.pow(w as u32))
        .sum()
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Maps a rank in `0..count_strings_up_to_weight(n, t)` to a Pauli string.
/// Ranks are ordered by weight, then by site set (lexicographic), then by
/// axes read as base-3 digits with the lowest site most significant.
fn unrank_string(n: usize, mut rank: u128) -> PauliString {
    let mut w = 0usize;
    loop {
        let block = binomial(n as u128, w as u128) * 3u128.pow(w as u32);
        if rank < block {
            break;
        }
        rank -= block;
        w += 1;
    }
    let axes_count = 3u128.pow(w as u32);
    let mut combo_rank = rank / axes_count;
    let mut axes_rank = rank % axes_count;

    // lexicographic unranking of a w-subset of 1..=n
    let mut sites = Vec::with_capacity(w);
    let mut next = 1usize;
    for remaining in (1..=w).rev() {
        loop {
            let with_next = binomial((n - next) as u128, (remaining - 1) as u128);
            if combo_rank < with_next {
                sites.push(next);
                next += 1;
                break;
            }
            combo_rank -= with_next;
            next += 1;
        }
    }

    let mut axes = vec![Axis::X; w];
    for slot in axes.iter_mut().rev() {
        *slot = [Axis::X, Axis::Y, Axis::Z][(axes_rank % 3) as usize];
        axes_rank /= 3;
    }
    PauliString {
        coeff: ONE,
        factors: sites.into_iter().zip(axes).collect(),
    }
}

/// Draws `k` distinct Pauli strings of weight `<= t` on `n` sites, uniformly
/// without replacement, from a ChaCha stream seeded with `seed`. The family is
/// returned in rank order (identity first when drawn). With `rescale` every
/// string is multiplied by `1/sqrt(k)` so that `sum_a E_a^dag E_a = Id`.
pub fn random_error_family(
    n: usize,
    t: usize,
    k: usize,
    seed: u64,
    rescale: bool,
) -> Result<Vec<LocalOperator>, PauliError> {
    check_qubits(n)?;
    if t > n {
        return Err(PauliError::FamilyParameters(format!(
            "weight {t} exceeds qubit count {n}"
        )));
    }
    if k == 0 {
        return Err(PauliError::FamilyParameters("family size must be >= 1".into()));
    }
    let available = count_strings_up_to_weight(n, t);
    if k as u128 > available {
        return Err(PauliError::FamilyTooLarge {
            requested: k,
            available,
            weight: t,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ranks: Vec<u128> = if available <= usize::MAX as u128 {
        index::sample(&mut rng, available as usize, k)
            .into_iter()
            .map(|r| r as u128)
            .collect()
    } else {
        return Err(PauliError::FamilyParameters("string space too large to index".into()));
    };
    ranks.sort_unstable();
    let scale = if rescale {
        Complex64::new(1.0 / (k as f64).sqrt(), 0.0)
    } else {
        ONE
    };
    Ok(ranks
        .into_iter()
        .map(|r| LocalOperator::from(unrank_string(n, r).scaled(scale)))
        .collect())
}
