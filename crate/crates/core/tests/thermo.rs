mod common;

use std::f64::consts::{LN_2, PI};

use common::*;
use proptest::prelude::*;
use xx0_qec::thermo::*;
use xx0_qec::xx0::full_spectrum;

fn params(t: f64, h: f64) -> ThermoParams {
    ThermoParams::new(t, h).unwrap()
}

#[test]
fn partition_function_matches_dense_spectrum() {
    for &(n, t, h) in &[(2, 1.0, 0.0), (3, 0.7, 0.5), (5, 2.0, 2.5), (6, 1.0, 1.0)] {
        let shifted = dense_hamiltonian(n, h) + CMat::identity(1 << n, 1 << n) * c(h * n as f64, 0.0);
        let exps: Vec<f64> = sorted_eigenvalues(&shifted).iter().map(|e| -e / t).collect();
        let expected = log2_sum_exp2(&exps);
        let got = partition_function_exact(n, &params(t, h)).unwrap();
        assert!((got - expected).abs() < 1e-10, "n={n}: {got} vs {expected}");
    }
}

#[test]
fn partition_function_matches_matrix_power_trace() {
    let (n, t, h) = (2, 1.0, 0.0);
    let shifted = dense_hamiltonian(n, h) + CMat::identity(4, 4) * c(h * n as f64, 0.0);
    let boltzmann = (shifted * c(-LN_2 / t, 0.0)).exp();
    let z = boltzmann.trace().re;
    let got = partition_function_exact(n, &params(t, h)).unwrap();
    assert!((got - z.log2()).abs() < 1e-12);

    // physical Hamiltonian: tr 2^(-H/T)
    let (t, h) = (0.8, 1.3);
    let boltzmann = (dense_hamiltonian(n, h) * c(-LN_2 / t, 0.0)).exp();
    let got = log2_partition_physical(n, &params(t, h)).unwrap();
    assert!((got - boltzmann.trace().re.log2()).abs() < 1e-12);
}

#[test]
fn partition_function_matches_solver_energies() {
    let (n, t, h) = (7, 0.6, 0.4);
    let exps: Vec<f64> = full_spectrum(n, h)
        .unwrap()
        .iter()
        .map(|s| -s.paper_energy() / t)
        .collect();
    let got = partition_function_exact(n, &params(t, h)).unwrap();
    assert!((got - log2_sum_exp2(&exps)).abs() < 1e-12);
}

#[test]
fn log_domain_survives_tiny_temperatures() {
    let lz = partition_function_exact(10, &params(1e-4, 0.0)).unwrap();
    assert!(lz.is_finite() && lz > 0.0);
}

#[test]
fn free_energy_error_shrinks_with_n() {
    for h in [0.0, 1.0] {
        let p = params(1.0, h);
        let f = bulk_free_energy(&p).unwrap();
        assert!(f.abs_error < 1e-10);
        let err = |n: usize| (partition_function_exact(n, &p).unwrap() / n as f64 - f.value).abs();
        assert!(err(12) < err(4), "h={h}: {} vs {}", err(12), err(4));
    }
}

#[test]
fn base_two_convention_is_detectable() {
    let p = params(1.0, 0.0);
    let f2 = bulk_free_energy(&p).unwrap().value;
    let natural = xx0_qec::quad::integrate(
        |q: f64| (1.0 + (4.0 * q.cos()).exp()).ln() / (2.0 * PI),
        -PI,
        PI,
        1e-12,
        1_000_000,
    )
    .unwrap()
    .value;
    assert!((f2 - natural).abs() > 0.1, "{f2} vs {natural}");
}

#[test]
fn entropy_identity_on_grid() {
    // bin averages of a smooth profile carry an O(width^2) error
    let bins = 1 << 20;
    for t in [0.25, 0.5, 1.0, 2.0, 4.0] {
        for h in [0.0, 0.5, 1.0, 2.5] {
            let p = params(t, h);
            let s = entropy_density(&p).unwrap();
            let s_profile = entropy_of_profile(&equilibrium_rho(&p, bins).unwrap());
            assert!((s - s_profile).abs() < 1e-10, "T={t} h={h}: {s} vs {s_profile}");
            assert!((0.0..=1.0).contains(&s));
        }
    }
}

#[test]
fn equilibrium_energy_density_matches_finite_chains() {
    let p = params(1.0, 0.0);
    let e_bulk = energy_density(&equilibrium_rho(&p, 1 << 14).unwrap(), 0.0);
    let gap = |n: usize| {
        let states = full_spectrum(n, 0.0).unwrap();
        let exps: Vec<f64> = states.iter().map(|s| -s.paper_energy()).collect();
        let lz = log2_sum_exp2(&exps);
        let mean: f64 = states
            .iter()
            .map(|s| s.paper_energy() * (-s.paper_energy() - lz).exp2())
            .sum();
        (mean / n as f64 - e_bulk).abs()
    };
    assert!(gap(12) < gap(6));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fermi_weight_in_unit_interval(p in -PI..PI, t in 1e-3f64..1e3, h in -5.0f64..5.0) {
        let w = fermi_weight(p, &params(t, h));
        prop_assert!((0.0..=1.0).contains(&w));
    }

    #[test]
    fn equilibrium_profile_respects_bounds(t in 0.05f64..50.0, h in -3.0f64..3.0, bins in 1usize..40) {
        let rho = equilibrium_rho(&params(t, h), bins).unwrap();
        let d = rho.particle_density();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&d));
        let s = entropy_of_profile(&rho);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&s));
    }

    #[test]
    fn free_energy_decreases_with_field(t in 0.1f64..10.0, h in -3.0f64..3.0) {
        // d f / d h = -(2/T) * density <= 0
        let a = bulk_free_energy(&params(t, h)).unwrap().value;
        let b = bulk_free_energy(&params(t, h + 0.1)).unwrap().value;
        prop_assert!(b <= a + 1e-12);
    }
}
