//! Property tests for the structural invariants: Gram positivity of the
//! dephasing matrices, channel trace/Hermiticity preservation, conjugation
//! symmetry of the regression conditions, and the principal-value algebra.

use proptest::prelude::*;

use dephase_core::divisibility::psd_verdict;
use dephase_core::pvquad::{pv_exp_diff, pv_one_minus_exp};
use dephase_core::regression::{regression_lhs, regression_rhs, IndexTuple, TimeGrid};
use dephase_core::sampling;
use dephase_core::{apply_channel, commuting_dephasing, Complex64, LevelFunction, SpectralMeasure};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Everything is immutable after construction; the concurrency contract is
/// that all core values can be shared or sent between workers.
#[test]
fn core_types_are_send_and_sync() {
    fn assert_send_sync<T: Send + Sync>() {}
    assert_send_sync::<dephase_core::BlockModel>();
    assert_send_sync::<dephase_core::QuditState>();
    assert_send_sync::<dephase_core::DephasingMatrix>();
    assert_send_sync::<dephase_core::DephasingTrajectory>();
    assert_send_sync::<dephase_core::SpectralMeasure>();
    assert_send_sync::<dephase_core::regression::CommutingModel>();
    assert_send_sync::<dephase_core::regression::RegressionReport>();
    assert_send_sync::<dephase_core::spinboson::GsbSpec>();
    assert_send_sync::<dephase_core::spinboson::FlatWeylModel>();
    assert_send_sync::<dephase_core::spinboson::ModeSet>();
    assert_send_sync::<dephase_core::divisibility::DivisibilityReport>();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dephasing_matrix_is_a_valid_gram_matrix(
        seed in 0u64..10_000,
        t in 0.0f64..4.0,
        d in 2usize..4,
        d_bath in 2usize..5,
    ) {
        let model = sampling::random_block_model(d, d_bath, seed);
        let phi = model.dephasing_matrix(t).unwrap();
        for j in 0..d {
            prop_assert_eq!(phi.entry(j, j), c(1.0, 0.0));
            for l in 0..d {
                prop_assert!(phi.modulus(j, l) <= 1.0 + 1e-12);
                prop_assert!((phi.entry(j, l) - phi.entry(l, j).conj()).norm() < 1e-12);
            }
        }
        let (ok, min_eig) = psd_verdict(phi.matrix(), 1e-10);
        prop_assert!(ok, "min eigenvalue {}", min_eig);
    }

    #[test]
    fn channel_preserves_state_structure(
        seed in 0u64..10_000,
        t in 0.0f64..4.0,
    ) {
        let model = sampling::random_block_model(3, 3, seed);
        let rho = sampling::random_qudit_state(3, seed ^ 0x5a5a);
        let phi = model.dephasing_matrix(t).unwrap();
        // QuditState validation inside apply_channel enforces Hermiticity,
        // positivity, and unit trace
        let out = apply_channel(&phi, &rho).unwrap();
        for j in 0..3 {
            prop_assert!((out.matrix()[(j, j)] - rho.matrix()[(j, j)]).norm() < 1e-14);
        }
        prop_assert!(out.coherence() <= rho.coherence() + 1e-12);
    }

    #[test]
    fn regression_sides_conjugate_together(
        seed in 0u64..10_000,
        t0 in 0.01f64..2.0,
        dt in 0.01f64..2.0,
    ) {
        let model = sampling::random_block_model(2, 3, seed);
        let grid = TimeGrid::new(vec![t0, t0 + dt]).unwrap();
        let tuples = [
            IndexTuple::new(vec![(0, 1), (1, 0)]),
            IndexTuple::new(vec![(0, 0), (0, 1)]),
            IndexTuple::new(vec![(1, 0), (1, 1)]),
        ];
        for tuple in tuples {
            let conj = tuple.conjugate();
            let lhs = regression_lhs(&model, &grid, &tuple).unwrap();
            let lhs_c = regression_lhs(&model, &grid, &conj).unwrap();
            prop_assert!((lhs - lhs_c.conj()).norm() < 1e-12);
            prop_assert!(lhs.norm() <= 1.0 + 1e-10);
            let rhs = regression_rhs(&model, &grid, &tuple).unwrap();
            let rhs_c = regression_rhs(&model, &grid, &conj).unwrap();
            prop_assert!((rhs - rhs_c.conj()).norm() < 1e-12);
            // residual is invariant under conjugation
            prop_assert!(((lhs - rhs).norm() - (lhs_c - rhs_c).norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn commuting_dephasing_reparameterization_invariant(
        t in 0.0f64..5.0,
        shift in -3.0f64..3.0,
        slope0 in -1.0f64..1.0,
        slope1 in -1.0f64..1.0,
    ) {
        let measure = SpectralMeasure::new(vec![(-1.1, 0.3), (0.2, 0.45), (1.7, 0.25)]).unwrap();
        let base = vec![
            LevelFunction::Linear { slope: slope0 },
            LevelFunction::Linear { slope: slope1 },
        ];
        let shifted = vec![
            LevelFunction::Linear { slope: slope0 + shift },
            LevelFunction::Linear { slope: slope1 + shift },
        ];
        let a = commuting_dephasing(&measure, &base, t).unwrap();
        let b = commuting_dephasing(&measure, &shifted, t).unwrap();
        prop_assert!((a.entry(0, 1) - b.entry(0, 1)).norm() < 1e-12);
    }

    #[test]
    fn pv_antisymmetry_and_consistency(a in 0.0f64..20.0, b in 0.0f64..20.0) {
        // antisymmetric under swapping a and b, even under joint sign flip
        let fwd = pv_exp_diff(a, b).unwrap().value;
        let rev = pv_exp_diff(b, a).unwrap().value;
        prop_assert!((fwd + rev).abs() < 1e-12);
        let neg = pv_exp_diff(-a, -b).unwrap().value;
        prop_assert!((fwd - neg).abs() < 1e-12);
        prop_assert!((pv_one_minus_exp(b).value - pv_exp_diff(0.0, b).unwrap().value).abs() < 1e-12);
    }

    #[test]
    fn psd_verdict_scale_invariance(
        seed in 0u64..10_000,
        scale in 1e-6f64..1e6,
        t in 0.1f64..3.0,
    ) {
        let model = sampling::random_block_model(3, 2, seed);
        let phi = model.dephasing_matrix(t).unwrap();
        let scaled = phi.matrix() * c(scale, 0.0);
        let (ok_raw, _) = psd_verdict(phi.matrix(), 1e-10);
        let (ok_scaled, _) = psd_verdict(&scaled, 1e-10);
        prop_assert_eq!(ok_raw, ok_scaled);
    }
}
