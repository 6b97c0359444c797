//! Finite-`n` subspace of thermodynamic equilibrium.
//!
//! An eigenstate belongs to the subspace when its binned momentum density
//! is within an L1 tolerance of `theta / 2pi`. Both parity sectors are
//! pooled; the half-slot offset between their grids is below bin resolution.

use std::cmp::Ordering;

use serde::Serialize;
use thiserror::Error;

use crate::sector::{BlockedBasis, SectorTable};
use crate::thermo::{
    bulk_free_energy, empirical_density, entropy_density, entropy_of_profile, equilibrium_rho,
    partition_function_exact, DensityProfile, ThermoError, ThermoParams,
};
use crate::xx0::{full_spectrum, EigenState, SolverError, DENSE_CAP};

/// Slack on the tolerance comparison so boundary ties are kept.
pub const TIE_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquilibriumError {
    #[error("no eigenstate within tolerance {tolerance}; smallest score is {min_distance}")]
    Empty { min_distance: f64, tolerance: f64 },
    #[error("tolerance must be a non-negative number, got {0}")]
    Tolerance(f64),
    #[error(transparent)]
    Thermo(#[from] ThermoError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Bin count used when none is given: `floor(n / 4)`, at least 1.
pub fn default_bins(n: usize) -> usize {
    (n / 4).max(1)
}

/// Tolerance used when none is given: `0.15 * sqrt(8 / n)`.
///
/// Shrinking with `n` keeps the selected profiles tightening around the
/// equilibrium density as the chain grows; at `n = 8` it is 0.15.
pub fn default_tolerance(n: usize) -> f64 {
    0.15 * (8.0 / n as f64).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scorer {
    /// `int |rho_emp - theta/2pi| dp` over the bins.
    Profile,
    /// Shortfall of `S(rho_emp) - E / (n T)` below the bulk free energy.
    Variational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Member {
    pub state: EigenState,
    pub score: f64,
}

#[derive(Clone, Debug)]
pub struct EquilibriumSubspace {
    params: ThermoParams,
    n: usize,
    bins: usize,
    tolerance: f64,
    scorer: Scorer,
    members: Vec<Member>,
}

impl EquilibriumSubspace {
    pub fn params(&self) -> &ThermoParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn scorer(&self) -> Scorer {
        self.scorer
    }

    pub fn dim(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn states(&self) -> impl Iterator<Item = &EigenState> {
        self.members.iter().map(|m| &m.state)
    }

    /// Members as normalized sector-blocked vectors, in member order.
    pub fn basis(&self) -> BlockedBasis {
        let table = SectorTable::new(self.n);
        let coords = self.states().map(|s| (s.m(), s.sector_coords(&table))).collect();
        BlockedBasis::new(table, coords)
    }

    /// Total Boltzmann probability carried by the members.
    pub fn boltzmann_mass(&self) -> Result<f64, EquilibriumError> {
        let weights = BoltzmannWeights::new(self.n, &self.params)?;
        Ok(self.states().map(|s| weights.probability(s)).sum())
    }
}

/// `2^(-E/T) / Z` over the full spectrum of one chain.
#[derive(Clone, Copy, Debug)]
pub struct BoltzmannWeights {
    temperature: f64,
    log2_z: f64,
}

impl BoltzmannWeights {
    pub fn new(n: usize, params: &ThermoParams) -> Result<Self, EquilibriumError> {
        Ok(Self {
            temperature: params.temperature(),
            log2_z: partition_function_exact(n, params)?,
        })
    }

    pub fn log2_partition(&self) -> f64 {
        self.log2_z
    }

    pub fn probability(&self, state: &EigenState) -> f64 {
        (-state.paper_energy() / self.temperature - self.log2_z).exp2()
    }
}

/// `n S`, the base-2 logarithm of the asymptotic dimension.
pub fn dimension_estimate(n: usize, params: &ThermoParams) -> Result<f64, EquilibriumError> {
    Ok(n as f64 * entropy_density(params)?)
}

fn validate_tolerance(tolerance: f64) -> Result<(), EquilibriumError> {
    if tolerance.is_nan() || tolerance < 0.0 {
        return Err(EquilibriumError::Tolerance(tolerance));
    }
    Ok(())
}

/// Scores every eigenstate of the chain, in `full_spectrum` order.
pub fn score_spectrum(
    n: usize,
    params: &ThermoParams,
    bins: usize,
    scorer: Scorer,
) -> Result<Vec<Member>, EquilibriumError> {
    if n > DENSE_CAP {
        return Err(SolverError::OverCap { n, cap: DENSE_CAP }.into());
    }
    let states = full_spectrum(n, params.field())?;
    let target = equilibrium_rho(params, bins)?;
    let f_bulk = match scorer {
        Scorer::Variational => bulk_free_energy(params)?.value,
        Scorer::Profile => 0.0,
    };
    let mut scored = Vec::with_capacity(states.len());
    for state in states {
        let rho = empirical_density(state.momenta(), bins)?;
        let score = match scorer {
            Scorer::Profile => rho.l1_distance(&target)?,
            Scorer::Variational => variational_shortfall(&rho, &state, params, f_bulk),
        };
        scored.push(Member { state, score });
    }
    Ok(scored)
}

fn variational_shortfall(rho: &DensityProfile, state: &EigenState, params: &ThermoParams, f_bulk: f64) -> f64 {
    let n = state.n() as f64;
    let functional = entropy_of_profile(rho) - state.paper_energy() / (n * params.temperature());
    f_bulk - functional
}

fn member_order(a: &Member, b: &Member) -> Ordering {
    a.score
        .total_cmp(&b.score)
        .then(a.state.m().cmp(&b.state.m()))
        .then_with(|| a.state.momenta().indices().cmp(b.state.momenta().indices()))
}

/// Keeps the eigenstates scoring at most `tolerance` under `scorer`, sorted
/// by score, then particle number, then momentum indices.
pub fn select_with_scorer(
    n: usize,
    params: &ThermoParams,
    bins: usize,
    tolerance: f64,
    scorer: Scorer,
) -> Result<EquilibriumSubspace, EquilibriumError> {
    validate_tolerance(tolerance)?;
    let scored = score_spectrum(n, params, bins, scorer)?;
    let min_distance = scored.iter().map(|m| m.score).fold(f64::INFINITY, f64::min);
    let mut members: Vec<Member> = scored
        .into_iter()
        .filter(|m| m.score <= tolerance + TIE_SLACK)
        .collect();
    if members.is_empty() {
        return Err(EquilibriumError::Empty {
            min_distance,
            tolerance,
        });
    }
    members.sort_by(member_order);
    Ok(EquilibriumSubspace {
        params: *params,
        n,
        bins,
        tolerance,
        scorer,
        members,
    })
}

/// Profile-scored selection.
pub fn select_equilibrium_subspace(
    n: usize,
    params: &ThermoParams,
    bins: usize,
    tolerance: f64,
) -> Result<EquilibriumSubspace, EquilibriumError> {
    select_with_scorer(n, params, bins, tolerance, Scorer::Profile)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(t: f64, h: f64) -> ThermoParams {
        ThermoParams::new(t, h).unwrap()
    }

    #[test]
    fn defaults() {
        assert_eq!(default_bins(8), 2);
        assert_eq!(default_bins(14), 3);
        assert_eq!(default_bins(3), 1);
        assert!((default_tolerance(8) - 0.15).abs() < 1e-15);
        assert!(default_tolerance(14) < default_tolerance(8));
    }

    #[test]
    fn cold_strong_field_selects_the_vacuum() {
        let sub = select_equilibrium_subspace(4, &params(0.05, 2.5), 1, default_tolerance(4)).unwrap();
        assert_eq!(sub.dim(), 1);
        assert_eq!(sub.members()[0].state.m(), 0);
        let sub = select_equilibrium_subspace(8, &params(0.05, 2.5), 2, 0.5 / 8.0).unwrap();
        assert_eq!(sub.dim(), 1);
    }

    #[test]
    fn infinite_tolerance_keeps_everything() {
        let sub = select_equilibrium_subspace(8, &params(1.0, 0.3), 2, f64::INFINITY).unwrap();
        assert_eq!(sub.dim(), 256);
        assert!((sub.boltzmann_mass().unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn hot_chain_concentrates_at_half_filling() {
        let sub = select_equilibrium_subspace(8, &params(1e6, 0.0), 2, 0.05).unwrap();
        assert!(sub.states().all(|s| s.m() == 4));
        // two particles in each half of the zone
        for s in sub.states() {
            let rho = empirical_density(s.momenta(), 2).unwrap();
            assert!((rho.values()[0] - rho.values()[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_selection_reports_best_score() {
        let err = select_equilibrium_subspace(8, &params(1.0, 0.5), 2, 0.0).unwrap_err();
        match err {
            EquilibriumError::Empty { min_distance, .. } => assert!(min_distance > 0.0),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            select_equilibrium_subspace(8, &params(1.0, 0.0), 3, 1.0),
            Err(EquilibriumError::Thermo(ThermoError::Bins { .. }))
        ));
        assert!(select_equilibrium_subspace(8, &params(1.0, 0.0), 2, f64::NAN).is_err());
    }

    #[test]
    fn boltzmann_weights_limits() {
        let n = 5;
        let hot = BoltzmannWeights::new(n, &params(1e12, 0.7)).unwrap();
        let states = full_spectrum(n, 0.7).unwrap();
        for s in &states {
            assert!((hot.probability(s) - 1.0 / 32.0).abs() < 1e-10);
        }
        let w = BoltzmannWeights::new(n, &params(0.9, 0.7)).unwrap();
        let total: f64 = states.iter().map(|s| w.probability(s)).sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn dimension_estimate_limits() {
        assert!((dimension_estimate(10, &params(1e8, 0.0)).unwrap() - 10.0).abs() < 1e-9);
        assert!(dimension_estimate(10, &params(0.01, 2.5)).unwrap().abs() < 1e-10);
    }

    #[test]
    fn variational_scorer_prefers_the_profile_selection() {
        let p = params(1.0, 0.0);
        let sub = select_with_scorer(8, &p, 2, 0.2, Scorer::Variational).unwrap();
        assert!(sub.dim() >= 1);
        assert_eq!(sub.scorer(), Scorer::Variational);
        let prof = select_equilibrium_subspace(8, &p, 2, 0.15).unwrap();
        let best = &sub.members()[0].state;
        // the variational optimum lies among the profile-selected states
        assert!(prof.states().any(|s| s == best));
    }
}
