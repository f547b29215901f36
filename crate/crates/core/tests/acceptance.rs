//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line. Run with `cargo test -p dephase-core --test acceptance`
//! (add `-- --nocapture` to see the lines for passing criteria).

// the frozen fixture constants are full-precision f64 dumps
#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

use dephase_core::divisibility::{divisibility_report, is_semigroup, DivisibilityOptions};
use dephase_core::linalg::max_abs_diff;
use dephase_core::model::uniform_grid;
use dephase_core::pvquad::pv_quadrature;
use dephase_core::regression::{
    check_hierarchy, enumerate_tuples, intervention_lhs, intervention_lhs_expansion,
    regression_lhs, regression_rhs, CommutingModel, HierarchyOptions, IndexTuple, TimeGrid,
};
use dephase_core::sampling;
use dephase_core::spinboson::{
    dephasing_gsb, gsb_trajectory, halfline_phase_defect, modulus_residual,
    truncated_fock_oracle, FlatWeylModel, FormFactor, GsbSpec, Line, ModeSet,
    QuadratureSettings,
};
use dephase_core::{
    apply_channel, BlockModel, Complex64, DephasingTrajectory, HermitianMatrix, LevelFunction,
    SpectralMeasure,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pass(n: usize, what: &str) {
    println!("[PASS] criterion {n}: {what}");
}

#[test]
fn criterion_1_flat_coupling_semigroup() {
    let spec = GsbSpec::flat_pattern(vec![1.0, 0.0], &[1, -1], 1.0, Line::Full).unwrap();
    let times = uniform_grid(5.0, 50); // 0, 0.1, ..., 5
    let settings = QuadratureSettings::default();
    let traj = gsb_trajectory(&spec, &times, &settings).unwrap();
    for k in 1..traj.len() {
        let t = traj.times()[k];
        let m2 = traj.matrix(k).modulus(0, 1).powi(2);
        let dev = (m2 - (-t).exp()).abs();
        assert!(dev < 1e-9, "t = {t}: | |phi|^2 - e^-t | = {dev:e}");
    }
    let fit = is_semigroup(&traj, 1e-9).unwrap();
    assert!(fit.semigroup, "fit residual {}", fit.residual);
    assert!(
        (fit.gamma[(0, 1)] - 1.0).abs() < 1e-6,
        "gamma_01 = {}",
        fit.gamma[(0, 1)]
    );
    pass(1, "flat coupling gives |phi(t)|^2 = e^-t and a semigroup fit with gamma = 1");
}

#[test]
fn criterion_2_quadrature_golden_values() {
    // int (1 - cos wt)/w^2 dw = pi |t| to relative 1e-6
    for t in [0.1, 1.0, 10.0] {
        let exact = PI * t;
        let r = pv_quadrature(0.0, t, 1.0e4, 1e-6 * exact).unwrap();
        let rel = (r.value - exact).abs() / exact;
        assert!(rel < 1e-6, "t = {t}: relative deviation {rel:e}");
    }
    // five (a, b) pairs per sign branch against -pi (a - b) / +pi (a - b)
    let pairs = [(3.0, 1.0), (2.0, 5.0), (0.5, 0.2), (10.0, 1.0), (7.0, 7.0)];
    for &(a, b) in &pairs {
        let r = pv_quadrature(a, b, 1.0e4, 1e-6).unwrap();
        assert!(
            (r.value - (-PI * (a - b))).abs() < 1e-6,
            "({a},{b}): value {}",
            r.value
        );
        let r = pv_quadrature(-a, -b, 1.0e4, 1e-6).unwrap();
        assert!(
            (r.value - (PI * (-a + b))).abs() < 1e-6,
            "({},{}) negative branch: value {}",
            -a,
            -b,
            r.value
        );
    }
    // pi |b| for five values of b
    for b in [2.0, -2.0, 0.5, 10.0, 1.0] {
        let r = pv_quadrature(0.0, b, 1.0e4, 1e-6).unwrap();
        assert!((r.value - PI * b.abs()).abs() < 1e-6, "b = {b}: value {}", r.value);
    }
    pass(2, "principal-value quadrature reproduces the residue-theorem constants to 1e-6");
}

fn sweep_grids() -> Vec<TimeGrid> {
    // 20 seeded random grids inside [0, 5]: ten with two intervals, ten with
    // three
    let mut grids = sampling::random_grids(2024, 10, 2, 0.05, 2.4);
    grids.extend(sampling::random_grids(2025, 10, 3, 0.05, 1.6));
    grids
}

#[test]
fn criterion_3_full_line_regression_holds() {
    let model = FlatWeylModel::flat_pattern(vec![0.7, -0.3], &[1, -1], 1.0, Line::Full).unwrap();
    let grids = sweep_grids();
    let report = check_hierarchy(&model, 3, &grids, &HierarchyOptions::default()).unwrap();
    assert!(
        report.max_residual < 1e-10,
        "max residual {} over {} conditions",
        report.max_residual,
        report.evaluated
    );
    assert!(report.satisfied);
    pass(3, "flat full-line coupling satisfies the regression hierarchy (Weyl path)");
}

#[test]
fn criterion_4_half_line_weaker_condition() {
    let model = FlatWeylModel::flat_pattern(vec![0.7, -0.3], &[1, -1], 1.0, Line::Half).unwrap();
    let mut worst = 0.0f64;
    for grid in sweep_grids() {
        for tuple in enumerate_tuples(2, grid.intervals()) {
            let res = modulus_residual(&model, &grid, &tuple).unwrap();
            worst = worst.max(res);
        }
    }
    assert!(worst < 1e-8, "max modulus residual {worst:e}");

    let settings = QuadratureSettings { radius: 1.0e4, ..QuadratureSettings::default() };
    let defect = halfline_phase_defect(&model, 1.0, 2.0, &settings).unwrap();
    assert!(defect.abs() > 1e-3, "phase defect {defect}");
    // frozen oracle value: ln 2 / (2 pi)
    assert!(
        (defect - 2.0f64.ln() / (2.0 * PI)).abs() < 1e-4,
        "phase defect {defect} vs ln2/(2 pi)"
    );
    pass(4, "half-line coupling meets the modulus conditions while the phase defect persists");
}

#[test]
fn criterion_5_commuting_no_go() {
    let measure = SpectralMeasure::cauchy_quantile(0.0, 1.0, 100_000).unwrap();
    let h = vec![
        LevelFunction::Linear { slope: 0.5 },
        LevelFunction::Linear { slope: -0.5 },
    ];

    // semigroup check (discretization-limited accuracy)
    let times: Vec<f64> = (0..=12).map(|k| 0.25 * k as f64).collect();
    let traj = DephasingTrajectory::from_measure(&measure, &h, &times).unwrap();
    let fit = is_semigroup(&traj, 1e-3).unwrap();
    assert!(fit.semigroup, "fit residual {}", fit.residual);
    assert!(fit.residual < 1e-3);
    assert!((fit.gamma[(0, 1)] - 1.0).abs() < 1e-3, "gamma {}", fit.gamma[(0, 1)]);

    // regression fails: the echo tuple on the grid (1, 2) has residual
    // 1 - e^{-1}
    let model = CommutingModel::new(measure, &h).unwrap();
    let grid = TimeGrid::new(vec![1.0, 2.0]).unwrap();
    let tuple = IndexTuple::new(vec![(1, 0), (0, 1)]);
    let lhs = regression_lhs(&model, &grid, &tuple).unwrap();
    let rhs = regression_rhs(&model, &grid, &tuple).unwrap();
    let residual = (lhs - rhs).norm();
    let expected = 1.0 - (-1.0f64).exp();
    assert!(
        (residual - expected).abs() < 1e-3,
        "echo residual {residual} vs 1 - 1/e = {expected}"
    );

    let report = check_hierarchy(&model, 2, &[grid], &HierarchyOptions::default()).unwrap();
    assert!(!report.satisfied);
    assert!((report.max_residual - expected).abs() < 1e-3);
    pass(5, "shallow pocket passes the semigroup check yet fails regression by 1 - 1/e");
}

#[test]
fn criterion_6_intervention_equivalence_and_oracle() {
    let mut worst_expansion = 0.0f64;
    let mut worst_oracle = 0.0f64;
    for k in 0..100u64 {
        let d = 2 + (k % 2) as usize;
        let d_bath = 2 + (k % 3) as usize;
        let model = sampling::random_block_model(d, d_bath, 9000 + k);
        let rho = sampling::random_qudit_state(d, 9500 + k);

        let mut r = sampling::rng(10_000 + k);
        for s in 0..20 {
            let m = if k < 10 && s < 5 { 3 } else { 2 };
            let grid = &sampling::random_grids(11_000 + 31 * k + s, 1, m, 0.05, 1.2)[0];
            let steps: Vec<_> = (0..m).map(|_| sampling::random_intervention(d, &mut r)).collect();
            let direct = intervention_lhs(&model, &rho, grid, &steps).unwrap();
            let expanded = intervention_lhs_expansion(&model, &rho, grid, &steps).unwrap();
            worst_expansion = worst_expansion.max((direct - expanded).norm());
        }

        for &t in &[0.4, 1.3] {
            let phi = model.dephasing_matrix(t).unwrap();
            let via_channel = apply_channel(&phi, &rho).unwrap();
            let via_oracle = model.reduced_dynamics_oracle(&rho, t).unwrap();
            worst_oracle =
                worst_oracle.max(max_abs_diff(via_channel.matrix(), via_oracle.matrix()));
        }
    }
    assert!(worst_expansion < 1e-10, "worst expansion deviation {worst_expansion:e}");
    assert!(worst_oracle < 1e-10, "worst channel/oracle deviation {worst_oracle:e}");
    pass(6, "intervention picture matches its tuple expansion; channel matches the oracle");
}

#[test]
fn criterion_7_qubit_divisibility_equivalence() {
    for seed in 0..50u64 {
        let d_bath = 2 + (seed % 3) as usize;
        let model = sampling::random_block_model(2, d_bath, 400 + seed);
        let traj = DephasingTrajectory::from_model(&model, &uniform_grid(2.0, 10)).unwrap();
        let report = divisibility_report(&traj, &DivisibilityOptions::default()).unwrap();
        let monotone = report.monotone.iter().all(|m| m.ok);
        assert_eq!(
            report.cp_divisible, monotone,
            "seed {seed}: PSD verdict {} but monotonicity {}",
            report.cp_divisible, monotone
        );
        assert_eq!(report.cp_divisible, report.p_divisible);
    }
    pass(7, "PSD-propagator and modulus-monotonicity verdicts agree on 50 qubit trajectories");
}

/// d = 3 model found by seeded search and frozen: every |phi_jl| decreases
/// along the grid {0, 0.4, 0.8} yet the (0.4, 0.8) propagator has an
/// eigenvalue around -0.041.
fn psd_gap_fixture() -> BlockModel {
    let h0 = HermitianMatrix::from_rows(
        2,
        &[
            c(-8.02836935982876643e-01, 0.0),
            c(-7.06747759981615542e-01, -4.41548374281104050e-01),
            c(-7.06747759981615542e-01, 4.41548374281104050e-01),
            c(6.56104877556666022e-01, 0.0),
        ],
    )
    .unwrap();
    let h1 = HermitianMatrix::from_rows(
        2,
        &[
            c(-3.94352055458893624e-01, 0.0),
            c(-1.44747864648616664e+00, 8.48054580787409362e-01),
            c(-1.44747864648616664e+00, -8.48054580787409362e-01),
            c(1.41042348401167028e+00, 0.0),
        ],
    )
    .unwrap();
    let h2 = HermitianMatrix::from_rows(
        2,
        &[
            c(-6.57431058506106170e-01, 0.0),
            c(4.43090044976512165e-01, 8.54312166277156448e-01),
            c(4.43090044976512165e-01, -8.54312166277156448e-01),
            c(1.56994913224759891e+00, 0.0),
        ],
    )
    .unwrap();
    let bath = nalgebra::DMatrix::from_row_slice(
        2,
        2,
        &[
            c(4.27251570085944721e-01, 0.0),
            c(3.84956586070369922e-01, 2.65362377445161335e-01),
            c(3.84956586070369922e-01, -2.65362377445161335e-01),
            c(5.72748429914055279e-01, 0.0),
        ],
    );
    BlockModel::new(vec![h0, h1, h2], bath).unwrap()
}

#[test]
fn criterion_8_multilevel_psd_gap() {
    let model = psd_gap_fixture();
    let traj = DephasingTrajectory::from_model(&model, &[0.0, 0.4, 0.8]).unwrap();
    // all moduli non-increasing along the grid, with real margins
    for j in 0..3 {
        for l in (j + 1)..3 {
            let m0 = traj.matrix(0).modulus(j, l);
            let m1 = traj.matrix(1).modulus(j, l);
            let m2 = traj.matrix(2).modulus(j, l);
            assert!(m1 <= m0 + 1e-12 && m2 <= m1 + 1e-12, "pair ({j},{l}): {m0} {m1} {m2}");
        }
    }
    let report = divisibility_report(&traj, &DivisibilityOptions::default()).unwrap();
    assert!(report.monotone.iter().all(|m| m.ok));
    assert!(!report.cp_divisible);
    let v = report.first_violation.expect("violating pair recorded");
    assert_eq!((v.s, v.t), (0.4, 0.8));
    assert!(
        v.min_eigenvalue < -1e-3,
        "propagator min eigenvalue {} not below -1e-3",
        v.min_eigenvalue
    );
    pass(8, "stored d = 3 trajectory: moduli non-increasing, propagator eigenvalue < -1e-3");
}

#[test]
fn criterion_9_truncated_fock_oracle() {
    // single mode against the point-mass closed form
    let modes = ModeSet::single_mode(1.0, vec![c(0.15, 0.0), c(-0.15, 0.0)], 40).unwrap();
    let spec = GsbSpec::new(
        vec![0.0, 0.0],
        vec![
            FormFactor::PointMass { frequency: 1.0, amplitude: c(0.15, 0.0) },
            FormFactor::PointMass { frequency: 1.0, amplitude: c(-0.15, 0.0) },
        ],
    )
    .unwrap();
    let settings = QuadratureSettings::default();
    for k in 0..=40 {
        let t = 0.25 * k as f64;
        let numeric = truncated_fock_oracle(&modes, &[0.0, 0.0], 0, 1, t).unwrap();
        let closed = dephasing_gsb(&spec, 0, 1, t, &settings).unwrap();
        assert!(
            (numeric - closed).norm() < 1e-8,
            "t = {t}: fock {numeric} vs closed {closed}"
        );
    }

    // 64-mode Riemann window reproduces the flat-coupling decay within 5%
    let window = ModeSet::flat_window(&[1, -1], 1.0, 20.0, 64, 16).unwrap();
    for &t in &[0.5, 1.0, 1.5, 2.0] {
        let phi = truncated_fock_oracle(&window, &[0.0, 0.0], 0, 1, t).unwrap();
        let rel = (phi.norm_sqr() - (-t).exp()).abs() / (-t).exp();
        assert!(rel < 0.05, "t = {t}: |phi|^2 = {} vs e^-t, rel {rel}", phi.norm_sqr());
    }
    pass(9, "Fock oracle matches the point-mass closed form and the flat-window decay");
}

#[test]
fn criterion_10_dfs_structure_and_regression() {
    let gamma = 1.0;
    let energies = vec![0.9, 0.4, -0.3, 0.1];
    let spec =
        GsbSpec::flat_pattern(energies.clone(), &[1, 1, -1, -1], gamma, Line::Full).unwrap();
    let settings = QuadratureSettings::default();
    for k in 1..=10 {
        let t = 0.5 * k as f64;
        let intra_a = dephasing_gsb(&spec, 0, 1, t, &settings).unwrap();
        let intra_b = dephasing_gsb(&spec, 2, 3, t, &settings).unwrap();
        assert!((intra_a.norm() - 1.0).abs() < 1e-12, "phi_01 modulus at t = {t}");
        assert!((intra_b.norm() - 1.0).abs() < 1e-12, "phi_23 modulus at t = {t}");
        let inter = dephasing_gsb(&spec, 0, 2, t, &settings).unwrap();
        assert!(
            (inter.norm() - (-gamma * t / 2.0).exp()).abs() < 1e-9,
            "phi_02 modulus at t = {t}"
        );
    }

    // regression sweep through the Weyl path on the d = 4 pattern
    let model = FlatWeylModel::flat_pattern(energies, &[1, 1, -1, -1], gamma, Line::Full).unwrap();
    let mut grids = sampling::random_grids(777, 5, 2, 0.05, 2.4);
    grids.extend(sampling::random_grids(778, 3, 3, 0.05, 1.6));
    let report = check_hierarchy(&model, 3, &grids, &HierarchyOptions::default()).unwrap();
    assert!(
        report.max_residual < 1e-10,
        "DFS sweep max residual {}",
        report.max_residual
    );

    // general real amplitudes (the symmetric-cutoff limit) also satisfy it
    let cutoff_limit =
        FlatWeylModel::new(vec![0.2, -0.5, 0.3], vec![0.3, -0.1, 0.5], Line::Full).unwrap();
    let grids = sampling::random_grids(779, 5, 2, 0.05, 2.4);
    let report =
        check_hierarchy(&cutoff_limit, 2, &grids, &HierarchyOptions::default()).unwrap();
    assert!(
        report.max_residual < 1e-10,
        "cutoff-limit sweep max residual {}",
        report.max_residual
    );
    pass(10, "decoherence-free pairs stay coherent, cross pairs decay, regression holds");
}
