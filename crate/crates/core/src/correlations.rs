//! Thermal correlation functions: full trace, trace restricted to the
//! equilibrium subspace, and expectations in single states of that subspace.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::equilibrium::{EquilibriumError, EquilibriumSubspace};
use crate::pauli::{LocalOperator, PauliError, StateVector};
use crate::sector::SectorTable;
use crate::thermo::{log2_sum_exp2, ThermoParams};
use crate::xx0::{full_spectrum, ground_level, SolverError};

/// Random unit vectors drawn per report unless configured otherwise.
pub const DEFAULT_SAMPLES: usize = 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CorrelationError {
    #[error("expectation value of the zero vector")]
    ZeroVector,
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
}

/// `<v|O|v> / <v|v>`.
pub fn state_expectation(op: &LocalOperator, v: &StateVector) -> Result<Complex64, CorrelationError> {
    let norm_sqr = v.norm_sqr();
    if norm_sqr == 0.0 {
        return Err(CorrelationError::ZeroVector);
    }
    Ok(v.inner(&op.apply(v)?)? / norm_sqr)
}

/// The four weight-1 and weight-2 operators used by default in sweeps.
pub fn default_operators() -> Vec<(String, LocalOperator)> {
    ["Z1", "X1 X2", "Y1 Y2", "Z1 Z2"]
        .into_iter()
        .map(|label| {
            let op = label.parse().expect("fixed labels parse");
            (label.to_string(), op)
        })
        .collect()
}

/// `tr(2^(-H/T) O) / Z` for each operator, evaluated in the eigenbasis.
pub fn thermal_correlation_full(
    ops: &[LocalOperator],
    n: usize,
    params: &ThermoParams,
) -> Result<Vec<Complex64>, CorrelationError> {
    for op in ops {
        op.check_sites(n)?;
    }
    let states = full_spectrum(n, params.field())?;
    let t = params.temperature();
    let exps: Vec<f64> = states.iter().map(|s| -s.paper_energy() / t).collect();
    let log2_z = log2_sum_exp2(&exps);
    let table = SectorTable::new(n);
    let mut acc = vec![Complex64::new(0.0, 0.0); ops.len()];
    for (state, x) in states.iter().zip(&exps) {
        let weight = (x - log2_z).exp2();
        if weight == 0.0 {
            continue;
        }
        let m = state.m();
        let coords = state.sector_coords(&table);
        for (a, op) in acc.iter_mut().zip(ops) {
            *a += table.matrix_element(op, m, &coords, m, &coords) * weight;
        }
    }
    Ok(acc)
}

/// `tr_C(2^(-H/T) O) / Z_C`: the thermal average over members only.
pub fn thermal_correlation_restricted(
    ops: &[LocalOperator],
    subspace: &EquilibriumSubspace,
) -> Result<Vec<Complex64>, CorrelationError> {
    for op in ops {
        op.check_sites(subspace.n())?;
    }
    let basis = subspace.basis();
    let diagonals: Vec<Vec<Complex64>> = ops
        .iter()
        .map(|op| basis.gram(op).diagonal().iter().copied().collect())
        .collect();
    let weights = restricted_weights(subspace);
    Ok(diagonals
        .iter()
        .map(|d| d.iter().zip(&weights).map(|(v, w)| v * *w).sum())
        .collect())
}

/// Boltzmann weights of the members normalized to sum to one.
pub fn restricted_weights(subspace: &EquilibriumSubspace) -> Vec<f64> {
    let t = subspace.params().temperature();
    let exps: Vec<f64> = subspace.states().map(|s| -s.paper_energy() / t).collect();
    let log2_zc = log2_sum_exp2(&exps);
    exps.iter().map(|x| (x - log2_zc).exp2()).collect()
}

/// Standard complex Gaussian coefficient vectors, one per sample.
pub fn random_span_coefficients(dim: usize, samples: usize, seed: u64) -> Vec<DVector<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            DVector::from_fn(dim, |_, _| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            })
        })
        .collect()
}

/// Spread statistics of a list of values.
#[derive(Clone, Debug, PartialEq)]
pub struct Spread {
    pub mean: Complex64,
    pub std_dev: f64,
    /// Largest pairwise `|v_i - v_j|`.
    pub max_spread: f64,
}

impl Spread {
    pub fn of(values: &[Complex64]) -> Self {
        let len = values.len().max(1) as f64;
        let mean: Complex64 = values.iter().sum::<Complex64>() / len;
        let var = values.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / len;
        let mut max_spread = 0.0f64;
        for (i, a) in values.iter().enumerate() {
            for b in &values[i + 1..] {
                max_spread = max_spread.max((a - b).norm());
            }
        }
        Self {
            mean,
            std_dev: var.sqrt(),
            max_spread,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TcfOptions {
    pub samples: usize,
    pub seed: u64,
    /// Also evaluate the full thermal trace (costly for large `n`).
    pub full_trace: bool,
}

impl Default for TcfOptions {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            seed: 0,
            full_trace: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TcfReport {
    pub operator: LocalOperator,
    pub n: usize,
    pub params: ThermoParams,
    pub dim: usize,
    pub full_trace_value: Option<Complex64>,
    pub restricted_value: Complex64,
    pub per_state_values: Vec<Complex64>,
    pub members: Spread,
    pub random_values: Vec<Complex64>,
    pub random: Spread,
}

impl TcfReport {
    pub fn mean(&self) -> Complex64 {
        self.members.mean
    }

    pub fn std_dev(&self) -> f64 {
        self.members.std_dev
    }

    pub fn max_spread(&self) -> f64 {
        self.members.max_spread
    }
}

/// One report per operator. The random vectors are shared by all operators.
pub fn tcf_reports(
    ops: &[LocalOperator],
    subspace: &EquilibriumSubspace,
    options: &TcfOptions,
) -> Result<Vec<TcfReport>, CorrelationError> {
    let n = subspace.n();
    for op in ops {
        op.check_sites(n)?;
    }
    let basis = subspace.basis();
    let weights = restricted_weights(subspace);
    let coeffs = random_span_coefficients(basis.len(), options.samples, options.seed);
    let full = if options.full_trace {
        Some(thermal_correlation_full(ops, n, subspace.params())?)
    } else {
        None
    };
    let mut reports = Vec::with_capacity(ops.len());
    for (i, op) in ops.iter().enumerate() {
        let gram = basis.gram(op);
        let per_state: Vec<Complex64> = gram.diagonal().iter().copied().collect();
        let restricted = per_state.iter().zip(&weights).map(|(v, w)| v * *w).sum();
        let random_values: Vec<Complex64> = coeffs.iter().map(|c| rayleigh_quotient(&gram, c)).collect();
        reports.push(TcfReport {
            operator: op.clone(),
            n,
            params: *subspace.params(),
            dim: basis.len(),
            full_trace_value: full.as_ref().map(|f| f[i]),
            restricted_value: restricted,
            members: Spread::of(&per_state),
            per_state_values: per_state,
            random: Spread::of(&random_values),
            random_values,
        });
    }
    Ok(reports)
}

pub fn tcf_report(
    op: &LocalOperator,
    subspace: &EquilibriumSubspace,
    options: &TcfOptions,
) -> Result<TcfReport, CorrelationError> {
    Ok(tcf_reports(std::slice::from_ref(op), subspace, options)?
        .pop()
        .expect("one operator in, one report out"))
}

/// `c^dag G c / c^dag c`.
pub fn rayleigh_quotient(gram: &DMatrix<Complex64>, c: &DVector<Complex64>) -> Complex64 {
    c.dotc(&(gram * c)) / c.norm_squared()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZeroTemperature {
    pub value: Complex64,
    /// Size of the ground level; the value is taken on its canonical member.
    pub degeneracy: u128,
}

/// `<G|O|G>` on the ground state.
pub fn zero_temperature_correlation(op: &LocalOperator, n: usize, h: f64) -> Result<ZeroTemperature, CorrelationError> {
    op.check_sites(n)?;
    let level = ground_level(n, h)?;
    let value = state_expectation(op, &level.state.vector())?;
    Ok(ZeroTemperature {
        value,
        degeneracy: level.degeneracy,
    })
}
