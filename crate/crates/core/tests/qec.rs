mod common;

use common::instances::generate;
use common::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use xx0_qec::qec::fixtures::{bit_flip_channel, phase_flip_channel, repetition_code};
use xx0_qec::qec::{
    apply_channel, build_recovery, check_completeness, diagonalize_error_matrix, error_expectations, kl_check_basis,
    kl_check_random, random_code_density, round_trip_residual, transform_channel, ErrorChannel, QecError, KL_TOLERANCE,
};

fn random_matrix(rng: &mut ChaCha8Rng, dim: usize) -> CMat {
    DMatrix::from_fn(dim, dim, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

fn random_unitary(rng: &mut ChaCha8Rng, dim: usize) -> CMat {
    random_matrix(rng, dim).qr().q()
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn transform_preserves_the_channel() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for seed in 0..20 {
        let inst = generate(seed);
        let dim = 1 << inst.channel.n();
        let u = random_unitary(&mut rng, inst.channel.len());
        let f = transform_channel(&inst.channel, &u).unwrap();
        for _ in 0..3 {
            let p = random_matrix(&mut rng, dim);
            let d = apply_channel(&f, &p).unwrap() - apply_channel(&inst.channel, &p).unwrap();
            assert!(d.norm() < 1e-10, "seed {seed}: {}", d.norm());
        }
        assert!(check_completeness(&f).unwrap() < 1e-10);
    }
}

#[test]
fn transformed_error_matrix_is_diagonal() {
    for seed in 0..40 {
        let inst = generate(seed);
        let report = kl_check_basis(&inst.channel, &inst.code, KL_TOLERANCE).unwrap();
        if !report.passed {
            continue;
        }
        let (u, d) = diagonalize_error_matrix(&report.c_matrix).unwrap();
        let f = transform_channel(&inst.channel, &u).unwrap();
        let after = kl_check_basis(&f, &inst.code, KL_TOLERANCE).unwrap();
        assert!(after.passed);
        let expected = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(d.len(), d.iter().map(|&x| c(x, 0.0))));
        assert!(max_abs(&(after.c_matrix - expected)) < 1e-10, "seed {seed}");
    }
}

#[test]
fn error_matrices_are_hermitian() {
    for seed in 0..40 {
        let inst = generate(seed);
        for report in [
            kl_check_basis(&inst.channel, &inst.code, KL_TOLERANCE).unwrap(),
            kl_check_random(&inst.channel, &inst.code, 16, seed, KL_TOLERANCE).unwrap(),
        ] {
            let c = &report.c_matrix;
            assert!(max_abs(&(c - c.adjoint())) < 1e-10, "seed {seed} {:?}", report.form);
        }
    }
}

#[test]
fn recovery_round_trip_on_correctable_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    for seed in 0..60 {
        let inst = generate(seed);
        let recovery = match build_recovery(&inst.channel, &inst.code, KL_TOLERANCE) {
            Ok(r) => r,
            Err(QecError::NotCorrectable { .. }) => continue,
            Err(e) => panic!("seed {seed}: {e}"),
        };
        checked += 1;
        assert!(check_completeness(&recovery).unwrap() < 1e-8);
        for _ in 0..10 {
            let p = random_code_density(&inst.code, &mut rng).unwrap();
            let r = round_trip_residual(&inst.channel, &recovery, &p).unwrap();
            assert!(r < 1e-8, "seed {seed}: residual {r}");
        }
    }
    assert!(checked > 0);
}

#[test]
fn fixtures_behave() {
    let code = repetition_code();
    let flips = kl_check_basis(&bit_flip_channel(), &code, KL_TOLERANCE).unwrap();
    assert!(flips.passed);
    let quarter = DMatrix::<Complex64>::identity(4, 4) * c(0.25, 0.0);
    assert!(max_abs(&(flips.c_matrix - quarter)) < 1e-12);
    let phases = kl_check_basis(&phase_flip_channel(), &code, KL_TOLERANCE).unwrap();
    assert!(!phases.passed);
    assert!(matches!(
        build_recovery(&phase_flip_channel(), &code, KL_TOLERANCE),
        Err(QecError::NotCorrectable { .. })
    ));
}

#[test]
fn incomplete_channels_are_measured() {
    let half: ErrorChannel = ErrorChannel::from_local(2, vec!["0.5 * X1".parse().unwrap()]).unwrap();
    assert!((check_completeness(&half).unwrap() - 0.75).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn both_forms_agree(seed in 1000u64..100_000) {
        let inst = generate(seed);
        let basis = kl_check_basis(&inst.channel, &inst.code, KL_TOLERANCE).unwrap();
        let random = kl_check_random(&inst.channel, &inst.code, 16, seed, KL_TOLERANCE).unwrap();
        prop_assert_eq!(basis.passed, random.passed, "{:?}", inst.kind);
        if !random.passed {
            let w = random.witness.as_ref().expect("failing check carries a witness");
            let a = error_expectations(&inst.channel, &w.vector(&inst.code)).unwrap();
            let b = error_expectations(&inst.channel, &w.reference_vector(&inst.code)).unwrap();
            prop_assert!(max_abs(&(a - b)) > KL_TOLERANCE);
        }
    }
}
