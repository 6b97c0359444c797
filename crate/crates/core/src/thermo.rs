//! Base-2 thermodynamics of the XX0 chain.
//!
//! Everything follows the `Z = tr 2^(-H/T)` convention: Boltzmann weights are
//! powers of two and all logarithms are binary. Finite-`n` partition
//! functions use the spin-wave energy `sum_j eps(p_j)`; the physical
//! Hamiltonian differs by the constant `-h n` (see
//! [`log2_partition_physical`]).

use std::f64::consts::PI;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quad::{integrate, Quadrature, QuadratureError};
use crate::xx0::{doubled_quanta, momentum_grid, MomentumSet, Parity, SolverError, DENSE_CAP};

pub use crate::xx0::epsilon;

/// Absolute tolerance of every momentum integral.
pub const QUADRATURE_TOLERANCE: f64 = 1e-12;
/// Evaluation budget per integral.
pub const QUADRATURE_BUDGET: usize = 1_000_000;
/// Slack allowed on the density bounds `0 <= rho <= 1/(2 pi)`.
pub const PROFILE_TOLERANCE: f64 = 1e-12;

const TWO_PI: f64 = 2.0 * PI;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThermoError {
    #[error("temperature must be positive and finite, got {0}")]
    Temperature(f64),
    #[error("magnetic field must be finite, got {0}")]
    Field(f64),
    #[error("bin count {bins} invalid for n = {n}: need 1 <= bins <= n/4")]
    Bins { bins: usize, n: usize },
    #[error("bin count must be >= 1")]
    NoBins,
    #[error("density {value} in bin {bin} outside [0, 1/(2 pi)]")]
    Density { bin: usize, value: f64 },
    #[error("profiles have {0} and {1} bins")]
    BinMismatch(usize, usize),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Temperature and magnetic field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermoParams {
    temperature: f64,
    field: f64,
}

impl ThermoParams {
    pub fn new(temperature: f64, field: f64) -> Result<Self, ThermoError> {
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(ThermoError::Temperature(temperature));
        }
        if !field.is_finite() {
            return Err(ThermoError::Field(field));
        }
        Ok(Self { temperature, field })
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn field(&self) -> f64 {
        self.field
    }

    /// `eps(p) / T`.
    #[inline]
    pub fn reduced_energy(&self, p: f64) -> f64 {
        epsilon(p, self.field) / self.temperature
    }
}

/// `log2(1 + 2^y)` without overflow.
#[inline]
pub(crate) fn log2_one_plus_exp2(y: f64) -> f64 {
    if y > 0.0 {
        y + (-y).exp2().ln_1p() / std::f64::consts::LN_2
    } else {
        y.exp2().ln_1p() / std::f64::consts::LN_2
    }
}

/// Fermi weight `(1 + 2^(eps/T))^-1`.
#[inline]
pub fn fermi_weight(p: f64, params: &ThermoParams) -> f64 {
    let x = params.reduced_energy(p);
    if x > 0.0 {
        let t = (-x).exp2();
        t / (1.0 + t)
    } else {
        1.0 / (1.0 + x.exp2())
    }
}

/// Binary entropy of the occupation of a mode with reduced energy `x`,
/// written through `-log2(theta) = log2(1 + 2^x)` to stay accurate when
/// `theta` is close to 0 or 1.
#[inline]
fn mode_entropy(x: f64) -> f64 {
    let theta = if x > 0.0 {
        let t = (-x).exp2();
        t / (1.0 + t)
    } else {
        1.0 / (1.0 + x.exp2())
    };
    theta * log2_one_plus_exp2(x) + (1.0 - theta) * log2_one_plus_exp2(-x)
}

/// `H2(u) = -u log2 u - (1-u) log2 (1-u)` with `0 log 0 = 0`.
#[inline]
fn binary_entropy(u: f64) -> f64 {
    let xlogx = |x: f64| if x <= 0.0 { 0.0 } else { x * x.log2() };
    -xlogx(u) - xlogx(1.0 - u)
}

/// `log2 Z_n` summed over all `2^n` eigenstates, `Z_n = sum 2^(-E/T)` with
/// `E = sum_j eps(p_j)`.
pub fn partition_function_exact(n: usize, params: &ThermoParams) -> Result<f64, ThermoError> {
    if n > DENSE_CAP {
        return Err(SolverError::OverCap { n, cap: DENSE_CAP }.into());
    }
    if n == 0 {
        return Err(SolverError::Length(0).into());
    }
    let mut exponents = Vec::with_capacity(1 << n);
    for m in 0..=n {
        let reduced: Vec<f64> = momentum_grid(n, Parity::of(m))
            .into_iter()
            .map(|p| params.reduced_energy(p))
            .collect();
        for combo in (0..n).combinations(m) {
            exponents.push(-combo.iter().map(|&k| reduced[k]).sum::<f64>());
        }
    }
    Ok(log2_sum_exp2(&exponents))
}

/// `log2 sum_i 2^(x_i)`.
pub fn log2_sum_exp2(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp2()).sum::<f64>().log2()
}

/// `log2 tr 2^(-H/T)` for the Hamiltonian itself: the spin-wave partition
/// function times `2^(h n / T)`.
pub fn log2_partition_physical(n: usize, params: &ThermoParams) -> Result<f64, ThermoError> {
    Ok(partition_function_exact(n, params)? + params.field * n as f64 / params.temperature)
}

/// Bulk free energy `(1/2pi) int log2(1 + 2^(-eps/T)) dp` with its error estimate.
pub fn bulk_free_energy(params: &ThermoParams) -> Result<Quadrature, ThermoError> {
    let q = integrate(
        |p| log2_one_plus_exp2(-params.reduced_energy(p)) / TWO_PI,
        -PI,
        PI,
        QUADRATURE_TOLERANCE,
        QUADRATURE_BUDGET,
    )?;
    Ok(q)
}

/// Entropy density `-(1/2pi) int [theta log2 theta + (1-theta) log2(1-theta)] dp`.
pub fn entropy_density(params: &ThermoParams) -> Result<f64, ThermoError> {
    let q = integrate(
        |p| mode_entropy(params.reduced_energy(p)) / TWO_PI,
        -PI,
        PI,
        QUADRATURE_TOLERANCE,
        QUADRATURE_BUDGET,
    )?;
    Ok(q.value)
}

/// Variance of the occupation of a mode, averaged over the zone:
/// `(1/2pi) int theta (1 - theta) dp`.
pub fn occupation_variance(params: &ThermoParams) -> Result<f64, ThermoError> {
    let q = integrate(
        |p| {
            let t = fermi_weight(p, params);
            t * (1.0 - t) / TWO_PI
        },
        -PI,
        PI,
        QUADRATURE_TOLERANCE,
        QUADRATURE_BUDGET,
    )?;
    Ok(q.value)
}

/// Piecewise-constant momentum density on `B` equal bins
/// `(-pi + 2 pi b / B, -pi + 2 pi (b + 1) / B]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    values: Vec<f64>,
}

impl DensityProfile {
    pub fn new(values: Vec<f64>) -> Result<Self, ThermoError> {
        if values.is_empty() {
            return Err(ThermoError::NoBins);
        }
        let ceiling = 1.0 / TWO_PI + PROFILE_TOLERANCE;
        for (bin, &value) in values.iter().enumerate() {
            if !(value >= -PROFILE_TOLERANCE && value <= ceiling) {
                return Err(ThermoError::Density { bin, value });
            }
        }
        Ok(Self { values })
    }

    pub fn bins(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn bin_width(&self) -> f64 {
        TWO_PI / self.bins() as f64
    }

    pub fn edges(&self, bin: usize) -> (f64, f64) {
        bin_edges(self.bins(), bin)
    }

    /// `d = int rho dp`.
    pub fn particle_density(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.bin_width()
    }

    /// `int |rho - other| dp`; equals 1 between the empty and full profiles.
    pub fn l1_distance(&self, other: &DensityProfile) -> Result<f64, ThermoError> {
        if self.bins() != other.bins() {
            return Err(ThermoError::BinMismatch(self.bins(), other.bins()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.bin_width())
    }
}

fn bin_edges(bins: usize, bin: usize) -> (f64, f64) {
    let width = TWO_PI / bins as f64;
    (-PI + width * bin as f64, -PI + width * (bin + 1) as f64)
}

/// `int [(1/2pi) log2(1/2pi) - rho log2 rho - (1/2pi - rho) log2(1/2pi - rho)] dp`
/// for a binned profile; equivalently `(1/2pi) int H2(2 pi rho) dp`.
pub fn entropy_of_profile(rho: &DensityProfile) -> f64 {
    let width = rho.bin_width();
    rho.values
        .iter()
        .map(|&r| binary_entropy((TWO_PI * r).clamp(0.0, 1.0)) / TWO_PI * width)
        .sum()
}

/// `int eps(p) rho(p) dp`, with `eps` integrated exactly on each bin.
pub fn energy_density(rho: &DensityProfile, h: f64) -> f64 {
    (0..rho.bins())
        .map(|b| {
            let (lo, hi) = rho.edges(b);
            let eps_integral = -4.0 * (hi.sin() - lo.sin()) + 2.0 * h * (hi - lo);
            rho.values[b] * eps_integral
        })
        .sum()
}

/// Equilibrium density `theta / 2pi`, averaged over each of `bins` bins.
pub fn equilibrium_rho(params: &ThermoParams, bins: usize) -> Result<DensityProfile, ThermoError> {
    if bins == 0 {
        return Err(ThermoError::NoBins);
    }
    let width = TWO_PI / bins as f64;
    let mut values = Vec::with_capacity(bins);
    for b in 0..bins {
        let (lo, hi) = bin_edges(bins, b);
        // tolerance scales with the bin so tiny bins still converge in one pass
        let tol = QUADRATURE_TOLERANCE * width / TWO_PI;
        let q = integrate(|p| fermi_weight(p, params), lo, hi, tol, QUADRATURE_BUDGET)?;
        values.push((q.value / width / TWO_PI).clamp(0.0, 1.0 / TWO_PI));
    }
    DensityProfile::new(values)
}

/// Bin index of grid momentum `p = pi * q2 / n`, computed in integers so
/// that slots on a bin edge land in the bin that edge closes.
pub fn bin_of_doubled_quantum(n: usize, bins: usize, q2: i64) -> usize {
    let num = bins as i64 * (q2 + n as i64);
    let den = 2 * n as i64;
    ((num + den - 1) / den - 1) as usize
}

/// Occupation counts per bin.
pub fn bin_counts(ps: &MomentumSet, bins: usize) -> Vec<usize> {
    let mut counts = vec![0usize; bins];
    for q2 in ps.doubled_quanta() {
        counts[bin_of_doubled_quantum(ps.n(), bins, q2)] += 1;
    }
    counts
}

/// Grid slots of one parity sector per bin.
pub fn slot_counts(n: usize, parity: Parity, bins: usize) -> Vec<usize> {
    let mut counts = vec![0usize; bins];
    for q2 in doubled_quanta(n, parity) {
        counts[bin_of_doubled_quantum(n, bins, q2)] += 1;
    }
    counts
}

/// Occupied fraction of the grid slots in each bin, divided by `2 pi`.
/// Bins must be wide on the scale of the grid spacing, enforced as
/// `4 * bins <= n`; when `bins` divides `n` this is `count / (n * width)`.
pub fn empirical_density(ps: &MomentumSet, bins: usize) -> Result<DensityProfile, ThermoError> {
    let n = ps.n();
    if bins == 0 || 4 * bins > n {
        return Err(ThermoError::Bins { bins, n });
    }
    let slots = slot_counts(n, ps.parity(), bins);
    let values = bin_counts(ps, bins)
        .into_iter()
        .zip(slots)
        .map(|(c, s)| c as f64 / s as f64 / TWO_PI)
        .collect();
    DensityProfile::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(t: f64, h: f64) -> ThermoParams {
        ThermoParams::new(t, h).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(ThermoParams::new(0.0, 0.0), Err(ThermoError::Temperature(_))));
        assert!(matches!(ThermoParams::new(-1.0, 0.0), Err(ThermoError::Temperature(_))));
        assert!(matches!(ThermoParams::new(1.0, f64::NAN), Err(ThermoError::Field(_))));
    }

    #[test]
    fn dispersion_values() {
        assert_eq!(epsilon(0.0, 0.0), -4.0);
        assert!(epsilon(PI / 2.0, 0.0).abs() < 1e-15);
        assert_eq!(epsilon(0.0, 2.0), 0.0);
    }

    #[test]
    fn fermi_weight_values() {
        // eps = 0 at p = pi/2, h = 0
        assert!((fermi_weight(PI / 2.0, &params(1.0, 0.0)) - 0.5).abs() < 1e-15);
        // eps(pi/2) = 2 at h = 1, T = 1
        assert!((fermi_weight(PI / 2.0, &params(1.0, 1.0)) - 0.2).abs() < 1e-15);
        assert_eq!(fermi_weight(0.0, &params(1e-3, 0.0)), 1.0);
        assert!(fermi_weight(0.0, &params(1e-3, 3.0)) < 1e-300);
    }

    #[test]
    fn partition_function_limits() {
        let lz = partition_function_exact(6, &params(1e9, 0.3)).unwrap();
        assert!((lz - 6.0).abs() < 1e-6);
        assert!(partition_function_exact(DENSE_CAP + 1, &params(1.0, 0.0)).is_err());
        let phys = log2_partition_physical(3, &params(2.0, 0.5)).unwrap();
        let spin = partition_function_exact(3, &params(2.0, 0.5)).unwrap();
        assert!((phys - spin - 0.75).abs() < 1e-14);
    }

    #[test]
    fn bulk_free_energy_limits() {
        let f = bulk_free_energy(&params(1e-3, 2.5)).unwrap();
        assert!(f.value.abs() < 1e-12 && f.abs_error < 1e-10);
        let f = bulk_free_energy(&params(1e8, 0.0)).unwrap();
        assert!((f.value - 1.0).abs() < 1e-7);
    }

    #[test]
    fn entropy_limits() {
        assert!((entropy_density(&params(1e8, 0.0)).unwrap() - 1.0).abs() < 1e-12);
        assert!(entropy_density(&params(1e-2, 2.5)).unwrap().abs() < 1e-12);
    }

    #[test]
    fn profile_entropy_examples() {
        let bins = 8;
        let empty = DensityProfile::new(vec![0.0; bins]).unwrap();
        let full = DensityProfile::new(vec![1.0 / TWO_PI; bins]).unwrap();
        let half = DensityProfile::new(vec![1.0 / (2.0 * TWO_PI); bins]).unwrap();
        assert_eq!(entropy_of_profile(&empty), 0.0);
        assert!(entropy_of_profile(&full).abs() < 1e-15);
        assert!((entropy_of_profile(&half) - 1.0).abs() < 1e-14);
        assert!(DensityProfile::new(vec![0.2]).is_err());
        assert!(DensityProfile::new(vec![-1e-6]).is_err());
        assert!((full.l1_distance(&empty).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn energy_density_examples() {
        let empty = DensityProfile::new(vec![0.0; 4]).unwrap();
        assert_eq!(energy_density(&empty, 1.0), 0.0);
        let full = DensityProfile::new(vec![1.0 / TWO_PI; 4]).unwrap();
        assert!(energy_density(&full, 0.0).abs() < 1e-14);
        assert!((energy_density(&full, 0.5) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn equilibrium_profile_limits() {
        let hot = equilibrium_rho(&params(1e9, 0.0), 6).unwrap();
        for v in hot.values() {
            assert!((v - 1.0 / (2.0 * TWO_PI)).abs() < 1e-9);
        }
        let cold = equilibrium_rho(&params(1e-2, 2.5), 6).unwrap();
        assert!(cold.values().iter().all(|&v| v < 1e-12));
        // particle-hole symmetry at h = 0: rho(p) + rho(pi - p) = 1/2pi.
        // With an even number of bins, bin b mirrors bin (B/2 - 1 - b) mod B.
        let bins = 8;
        let rho = equilibrium_rho(&params(0.7, 0.0), bins).unwrap();
        for b in 0..bins {
            let mirror = (bins / 2 + bins - 1 - b) % bins;
            let sum = rho.values()[b] + rho.values()[mirror];
            assert!((sum - 1.0 / TWO_PI).abs() < 1e-12, "bin {b}");
        }
        assert!(equilibrium_rho(&params(1.0, 0.0), 0).is_err());
    }

    #[test]
    fn empirical_density_examples() {
        let n = 16;
        let bins = 4;
        let all = MomentumSet::new(n, (0..n).collect()).unwrap();
        let rho = empirical_density(&all, bins).unwrap();
        assert!(rho.values().iter().all(|v| (v - 1.0 / TWO_PI).abs() < 1e-14));

        let every_other = MomentumSet::new(n, (0..n).step_by(2).collect()).unwrap();
        let rho = empirical_density(&every_other, bins).unwrap();
        assert!(rho.values().iter().all(|v| (v - 0.5 / TWO_PI).abs() < 1e-14));

        let none = MomentumSet::new(n, vec![]).unwrap();
        assert!(empirical_density(&none, bins)
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 0.0));
        assert!(matches!(empirical_density(&none, 5), Err(ThermoError::Bins { .. })));
    }

    #[test]
    fn unaligned_bins_stay_within_bounds() {
        for n in [13, 14] {
            let full = MomentumSet::new(n, (0..n).collect()).unwrap();
            let rho = empirical_density(&full, 3).unwrap();
            assert!(rho.values().iter().all(|v| (v - 1.0 / TWO_PI).abs() < 1e-14));
        }
        let odd: usize = slot_counts(14, Parity::Odd, 3).iter().sum();
        let even: usize = slot_counts(14, Parity::Even, 3).iter().sum();
        assert_eq!((odd, even), (14, 14));
    }

    #[test]
    fn edge_slots_close_their_bin() {
        // n = 4, odd grid {-pi/2, 0, pi/2, pi}; two bins (-pi, 0] and (0, pi]
        let ps = MomentumSet::new(4, vec![0, 1, 2, 3]).unwrap();
        assert_eq!(bin_counts(&ps, 2), vec![2, 2]);
        let ps = MomentumSet::new(4, vec![1]).unwrap();
        assert_eq!(bin_counts(&ps, 2), vec![1, 0]);
    }
}
