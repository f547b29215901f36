//! Check execution and result persistence.
//!
//! Every check writes one structured JSON result (plus a CSV of rows where
//! there is a series to plot), all atomically: content goes to a temp file
//! that is renamed into place, so a rerun never leaves a torn file. Result
//! contents are deterministic for a fixed scenario and seed; the only
//! nondeterministic field is the manifest wall clock.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use dephase_core::divisibility::{
    blp_check, coherence_monotonicity, divisibility_report, is_semigroup, DivisibilityOptions,
};
use dephase_core::pvquad::{pv_exp_diff, pv_one_minus_exp, pv_quadrature};
use dephase_core::regression::{
    check_hierarchy, check_hierarchy_random, enumerate_tuples, HierarchyOptions, MultiTimeModel,
    RegressionReport,
};
use dephase_core::spinboson::{
    cutoff_dephasing, gsb_trajectory, halfline_phase_defect, modulus_residual, Cutoff,
    FlatWeylModel, FormFactor, GsbSpec, Line, QuadratureSettings,
};
use dephase_core::{DephasingTrajectory, QuditState};

use crate::scenario::{parse_grids, CheckFamily, CheckSpec, ModelBundle, Scenario};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub budget: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub name: String,
    pub scenario_digest: String,
    pub tool_version: String,
    pub seed: u64,
    pub wall_clock_seconds: f64,
    pub checks: Vec<CheckResult>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub kind: String,
    pub passed: bool,
    pub summary: String,
    pub files: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DivisibilityJson {
    pub invertible: bool,
    pub cp_divisible: bool,
    pub p_divisible: bool,
    pub semigroup: bool,
    pub pairs_checked: usize,
    pub first_violation: Option<(f64, f64, f64)>,
    pub monotone: Vec<(usize, usize, bool)>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SemigroupJson {
    pub residual: f64,
    pub semigroup: bool,
    pub rates: Vec<RateRow>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RateRow {
    pub j: usize,
    pub l: usize,
    pub omega: f64,
    pub gamma: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RegressionJson {
    pub enumerated: usize,
    pub evaluated: usize,
    pub max_residual: f64,
    pub max_modulus_residual: f64,
    pub satisfied: bool,
    pub tol: f64,
    pub seed: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BlpJson {
    pub monotone: bool,
    pub violations: Vec<(f64, f64)>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CoherenceJson {
    pub monotone: bool,
    pub first_violation: Option<(f64, f64)>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct HalflineJson {
    pub max_modulus_residual: f64,
    pub modulus_tol: f64,
    pub phase_defect: f64,
    pub min_defect: f64,
    pub t0: f64,
    pub t1: f64,
    pub passed: bool,
    pub seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CutoffJson {
    pub t: f64,
    pub rel_tol: f64,
    pub worst_final_deviation: f64,
    pub passed: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PvSuiteJson {
    pub radius: f64,
    pub tol: f64,
    pub max_deviation: f64,
    pub passed: bool,
}

pub fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> Result<()> {
    let tmp = dir.join(format!("{name}.tmp"));
    let target = dir.join(name);
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, &target).with_context(|| format!("renaming into {}", target.display()))?;
    Ok(())
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(dir, name, &bytes)
}

struct TrajectoryCache {
    traj: Option<DephasingTrajectory>,
}

impl TrajectoryCache {
    fn get(
        &mut self,
        bundle: &ModelBundle,
        scenario: &Scenario,
    ) -> Result<&DephasingTrajectory> {
        if self.traj.is_none() {
            let grid = scenario
                .grid
                .as_ref()
                .ok_or_else(|| anyhow!("this check needs a [grid] section"))?;
            let times = grid.times()?;
            let traj = if let Some(block) = &bundle.block {
                DephasingTrajectory::from_model(block, &times)
            } else if let Some((measure, h)) = &bundle.measure {
                DephasingTrajectory::from_measure(measure, h, &times)
            } else if let Some(gsb) = &bundle.gsb {
                gsb_trajectory(gsb, &times, &QuadratureSettings::default())
            } else {
                bail!("no trajectory source in the model");
            };
            self.traj = Some(traj.map_err(|e| anyhow!("building trajectory: {e}"))?);
        }
        Ok(self.traj.as_ref().expect("just built"))
    }
}

fn phi_series_csv(traj: &DephasingTrajectory) -> String {
    let mut out = String::from("t,j,l,re_phi,im_phi,abs_phi\n");
    let d = traj.dim();
    for k in 0..traj.len() {
        let phi = traj.matrix(k);
        for j in 0..d {
            for l in (j + 1)..d {
                let v = phi.entry(j, l);
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    traj.times()[k],
                    j,
                    l,
                    v.re,
                    v.im,
                    v.norm()
                ));
            }
        }
    }
    out
}

fn regression_csv(report: &RegressionReport) -> String {
    let mut out =
        String::from("grid_index,intervals,tuple,lhs_re,lhs_im,rhs_re,rhs_im,residual,modulus_residual\n");
    for row in &report.rows {
        let tuple: Vec<String> = row
            .tuple
            .pairs()
            .iter()
            .map(|(j, l)| format!("{j}{l}"))
            .collect();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            row.grid_index,
            row.tuple.len(),
            tuple.join("|"),
            row.lhs.re,
            row.lhs.im,
            row.rhs.re,
            row.rhs.im,
            row.residual,
            row.modulus_residual
        ));
    }
    out
}

fn hierarchy_options(tol: Option<f64>, budget: Option<usize>, ov: &Overrides) -> HierarchyOptions {
    let defaults = HierarchyOptions::default();
    HierarchyOptions {
        tol: ov.tol.or(tol).unwrap_or(defaults.tol),
        budget: ov.budget.or(budget).unwrap_or(defaults.budget),
    }
}

fn weyl_limit_model(gsb: &GsbSpec) -> Result<FlatWeylModel> {
    if let Ok(m) = FlatWeylModel::from_spec(gsb) {
        return Ok(m);
    }
    // symmetric-cutoff couplings are checked in their infinite-cutoff limit,
    // where they become flat full-line amplitudes
    let amplitudes = (0..gsb.dim())
        .map(|j| match gsb.coupling(j) {
            FormFactor::FlatCutoff { amplitude, .. } => Ok(*amplitude),
            other => Err(anyhow!(
                "weyl-regression needs flat or flat-cutoff couplings, got {other:?}"
            )),
        })
        .collect::<Result<Vec<_>>>()?;
    FlatWeylModel::new(gsb.energies().to_vec(), amplitudes, Line::Full)
        .map_err(|e| anyhow!("building the cutoff-limit model: {e}"))
}

pub struct RunOutcome {
    pub manifest: RunManifest,
    pub all_passed: bool,
}

pub fn run_scenario(
    scenario: &Scenario,
    out_dir: &Path,
    overrides: &Overrides,
    family: CheckFamily,
) -> Result<RunOutcome> {
    let started = Instant::now();
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let bundle = scenario.model.build()?;
    let seed = overrides.seed.unwrap_or(scenario.seed);
    let mut cache = TrajectoryCache { traj: None };
    let mut results: Vec<CheckResult> = Vec::new();

    let selected: Vec<(usize, &CheckSpec)> = scenario
        .checks
        .iter()
        .enumerate()
        .filter(|(_, c)| family == CheckFamily::All || c.family() == family)
        .collect();

    for (index, check) in selected {
        let prefix = format!("{index:02}_{}", check.name());
        let check_seed = seed.wrapping_add(1 + index as u64);
        let result = run_check(
            check,
            &prefix,
            check_seed,
            scenario,
            &bundle,
            &mut cache,
            out_dir,
            overrides,
        )
        .with_context(|| format!("check {} ({})", index, check.name()))?;
        results.push(result);
    }

    // shared plot-ready series whenever a trajectory was materialized
    if let Some(traj) = &cache.traj {
        write_atomic(out_dir, "phi_series.csv", phi_series_csv(traj).as_bytes())?;
    }

    let all_passed = results.iter().all(|r| r.passed);
    let manifest = RunManifest {
        name: scenario.name.clone(),
        scenario_digest: scenario.digest()?,
        tool_version: TOOL_VERSION.to_string(),
        seed,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        checks: results,
    };
    write_json(out_dir, "manifest.json", &manifest)?;
    Ok(RunOutcome { manifest, all_passed })
}

#[allow(clippy::too_many_arguments)]
fn run_check(
    check: &CheckSpec,
    prefix: &str,
    check_seed: u64,
    scenario: &Scenario,
    bundle: &ModelBundle,
    cache: &mut TrajectoryCache,
    out_dir: &Path,
    ov: &Overrides,
) -> Result<CheckResult> {
    let kind = check.name().to_string();
    match check {
        CheckSpec::Divisibility { tol, all_pairs } => {
            let traj = cache.get(bundle, scenario)?;
            let opts = DivisibilityOptions {
                psd_tol: ov.tol.or(*tol).unwrap_or(1e-10),
                all_pairs: *all_pairs,
                ..Default::default()
            };
            let report = divisibility_report(traj, &opts)
                .map_err(|e| anyhow!("divisibility report: {e}"))?;
            let json = DivisibilityJson {
                invertible: report.invertible,
                cp_divisible: report.cp_divisible,
                p_divisible: report.p_divisible,
                semigroup: report.semigroup,
                pairs_checked: report.pairs_checked,
                first_violation: report
                    .first_violation
                    .map(|v| (v.s, v.t, v.min_eigenvalue)),
                monotone: report.monotone.iter().map(|m| (m.j, m.l, m.ok)).collect(),
            };
            let file = format!("{prefix}.json");
            write_json(out_dir, &file, &json)?;
            Ok(CheckResult {
                name: prefix.to_string(),
                kind,
                passed: report.cp_divisible,
                summary: match report.first_violation {
                    None => format!("CP-divisible on {} pairs", report.pairs_checked),
                    Some(v) => format!(
                        "violation at (s, t) = ({}, {}): min eigenvalue {:.3e}",
                        v.s, v.t, v.min_eigenvalue
                    ),
                },
                files: vec![file],
            })
        }
        CheckSpec::Semigroup { tol } => {
            let traj = cache.get(bundle, scenario)?;
            let tol = ov.tol.or(*tol).unwrap_or(1e-9);
            let fit = is_semigroup(traj, tol).map_err(|e| anyhow!("semigroup fit: {e}"))?;
            let d = traj.dim();
            let mut rates = Vec::new();
            let mut csv = String::from("j,l,omega,gamma\n");
            for j in 0..d {
                for l in (j + 1)..d {
                    rates.push(RateRow {
                        j,
                        l,
                        omega: fit.omega[(j, l)],
                        gamma: fit.gamma[(j, l)],
                    });
                    csv.push_str(&format!(
                        "{},{},{},{}\n",
                        j,
                        l,
                        fit.omega[(j, l)],
                        fit.gamma[(j, l)]
                    ));
                }
            }
            let json =
                SemigroupJson { residual: fit.residual, semigroup: fit.semigroup, rates };
            let jf = format!("{prefix}.json");
            let cf = format!("{prefix}_rates.csv");
            write_json(out_dir, &jf, &json)?;
            write_atomic(out_dir, &cf, csv.as_bytes())?;
            Ok(CheckResult {
                name: prefix.to_string(),
                kind,
                passed: json.semigroup,
                summary: format!("fit residual {:.3e} (tol {tol:.1e})", json.residual),
                files: vec![jf, cf],
            })
        }
        CheckSpec::Blp {} => {
            let traj = cache.get(bundle, scenario)?;
            let d = traj.dim();
            let rho1 = QuditState::maximally_coherent(d);
            let rho2 = QuditState::basis(d, 0);
            let report = blp_check(traj, &rho1, &rho2).map_err(|e| anyhow!("blp: {e}"))?;
            let mut csv = String::from("t,derivative\n");
            for &(t, dv) in &report.derivatives {
                csv.push_str(&format!("{t},{dv}\n"));
            }
            let json = BlpJson { monotone: report.monotone, violations: report.violations };
            let jf = format!("{prefix}.json");
            let cf = format!("{prefix}.csv");
            write_json(out_dir, &jf, &json)?;
            write_atomic(out_dir, &cf, csv.as_bytes())?;
            Ok(CheckResult {
                name: prefix.to_string(),
                kind,
                passed: json.monotone,
                summary: format!("{} positive-derivative violations", json.violations.len()),
                files: vec![jf, cf],
            })
        }
        CheckSpec::Coherence { tol } => {
            let traj = cache.get(bundle, scenario)?;
            let tol = ov.tol.or(*tol).unwrap_or(1e-9);
            let rho = QuditState::maximally_coherent(traj.dim());
            let report = coherence_monotonicity(traj, &rho, tol)
                .map_err(|e| anyhow!("coherence: {e}"))?;
            let mut csv = String::from("t,coherence\n");
            for &(t, cval) in &report.values {
                csv.push_str(&format!("{t},{cval}\n"));
            }
            let json = CoherenceJson {
                monotone: report.monotone,
                first_violation: report.first_violation,
            };
            let jf = format!("{prefix}.json");
            let cf = format!("{prefix}.csv");
            write_json(out_dir, &jf, &json)?;
            write_atomic(out_dir, &cf, csv.as_bytes())?;
            Ok(CheckResult {
                name: prefix.to_string(),
                kind,
                passed: json.monotone,
                summary: match json.first_violation {
                    None => "coherence non-increasing".to_string(),
                    Some((t, inc)) => format!("coherence increased by {inc:.3e} at t = {t}"),
                },
                files: vec![jf, cf],
            })
        }
        CheckSpec::Regression { intervals, grids, random, tol, budget } => {
            let opts = hierarchy_options(*tol, *budget, ov);
            let report = if let Some(block) = &bundle.block {
                run_hierarchy(block, *intervals, grids, random, check_seed, &opts)?
            } else if let Some(commuting) = &bundle.commuting {
                run_hierarchy(commuting, *intervals, grids, random, check_seed, &opts)?
            } else {
                bail!("regression needs a finite or measure model (gsb models use weyl-regression)")
            };
            finish_regression(prefix, kind, &report, out_dir)
        }
        CheckSpec::WeylRegression { intervals, grids, random, tol } => {
            let gsb = bundle
                .gsb
                .as_ref()
                .ok_or_else(|| anyhow!("weyl-regression needs a gsb model"))?;
            let model = weyl_limit_model(gsb)?;
            let opts = hierarchy_options(*tol, None, ov);
            let report = run_hierarchy(&model, *intervals, grids, random, check_seed, &opts)?;
            finish_regression(prefix, kind, &report, out_dir)
        }
        CheckSpec::HalflineRegression { intervals, random, t0, t1, modulus_tol, min_defect } => {
            let gsb = bundle
                .gsb
                .as_ref()
                .ok_or_else(|| anyhow!("halfline-regression needs a gsb model"))?;
            let model = FlatWeylModel::from_spec(gsb)
                .map_err(|e| anyhow!("halfline-regression needs flat half-line couplings: {e}"))?;
            if model.line() != Line::Half {
                bail!("halfline-regression needs flat half-line couplings");
            }
            let modulus_tol = ov.tol.or(*modulus_tol).unwrap_or(1e-8);
            let min_defect = min_defect.unwrap_or(1e-3);
            let mut worst: f64 = 0.0;
            let d = gsb.dim();
            for m in 2..=*intervals {
                let grids = dephase_core::sampling::random_grids(
                    check_seed.wrapping_add(m as u64),
                    random.count,
                    m,
                    random.lo,
                    random.hi,
                );
                for grid in &grids {
                    for tuple in enumerate_tuples(d, m) {
                        worst = worst.max(
                            modulus_residual(&model, grid, &tuple)
                                .map_err(|e| anyhow!("modulus residual: {e}"))?,
                        );
                    }
                }
            }
            let settings =
                QuadratureSettings { radius: 1.0e4, ..QuadratureSettings::default() };
            let defect = halfline_phase_defect(&model, *t0, *t1, &settings)
                .map_err(|e| anyhow!("phase defect: {e}"))?;
            let passed = worst < modulus_tol && defect.abs() > min_defect;
            let json = HalflineJson {
                max_modulus_residual: worst,
                modulus_tol,
                phase_defect: defect,
                min_defect,
                t0: *t0,
                t1: *t1,
                passed,
                seed: check_seed,
            };
            let jf = format!("{prefix}.json");
            write_json(out_dir, &jf, &json)?;
            Ok(CheckResult {
                name: prefix.to_string(),
                kind,
                passed,
                summary: format!(
                    "max modulus residual {worst:.3e}; phase defect {defect:.6}"
                ),
                files: vec![jf],
            })
        }
        CheckSpec::SpinbosonTrajectory {} => {
            if bundle.gsb.is_none() {
                bail!("spinboson-trajectory needs a gsb model");
            }
            let traj = cache.get(bundle, scenario)?;
            let cf = format!("{prefix}.csv");
            write_atomic(out_dir, &cf, phi_series_csv(traj).as_bytes())?;
            Ok(CheckResult {
                name: prefix.to_string(),
                kind,
                passed: true,
                summary: format!(
                    "{} grid points, {} level pairs",
                    traj.len(),
                    traj.dim() * (traj.dim() - 1) / 2
                ),
                files: vec![cf],
            })
        }
        CheckSpec::CutoffLimit { t, cutoffs, rel_tol } => {
            let gsb = bundle
                .gsb
                .as_ref()
                .ok_or_else(|| anyhow!("cutoff-limit needs a gsb model"))?;
            let amplitudes = (0..gsb.dim())
                .map(|j| match gsb.coupling(j) {
                    FormFactor::FlatCutoff { amplitude, .. }
                    | FormFactor::FlatFullLine { amplitude } => Ok(*amplitude),
                    other => Err(anyhow!("cutoff-limit needs flat couplings, got {other:?}")),
                })
                .collect::<Result<Vec<_>>>()?;
            if cutoffs.is_empty() {
                bail!("cutoff-limit needs at least one cutoff");
            }
            let rel_tol = ov.tol.or(*rel_tol).unwrap_or(0.05);
            let settings = QuadratureSettings::default();
            let energies = gsb.energies();
            let d = gsb.dim();
            let mut csv = String::from("cutoff,j,l,modulus,limit_modulus,rel_deviation\n");
            let mut worst_final: f64 = 0.0;
            let mut sorted = cutoffs.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite cutoffs"));
            for (ci, &w) in sorted.iter().enumerate() {
                for j in 0..d {
                    for l in (j + 1)..d {
                        let lim = cutoff_dephasing(
                            energies, &amplitudes, Cutoff::Limit, j, l, *t, &settings,
                        )
                        .map_err(|e| anyhow!("cutoff limit: {e}"))?;
                        let fin = cutoff_dephasing(
                            energies,
                            &amplitudes,
                            Cutoff::Finite(w),
                            j,
                            l,
                            *t,
                            &settings,
                        )
                        .map_err(|e| anyhow!("finite cutoff: {e}"))?;
                        let rel = if lim.norm() > 0.0 {
                            (fin.norm() - lim.norm()).abs() / lim.norm()
                        } else {
                            (fin.norm() - lim.norm()).abs()
                        };
                        csv.push_str(&format!(
                            "{w},{j},{l},{},{},{rel}\n",
                            fin.norm(),
                            lim.norm()
                        ));
                        if ci + 1 == sorted.len() {
                            worst_final = worst_final.max(rel);
                        }
                    }
                }
            }
            let passed = worst_final < rel_tol;
            let json = CutoffJson { t: *t, rel_tol, worst_final_deviation: worst_final, passed };
            let jf = format!("{prefix}.json");
            let cf = format!("{prefix}.csv");
            write_json(out_dir, &jf, &json)?;
            write_atomic(out_dir, &cf, csv.as_bytes())?;
            Ok(CheckResult {
                name: prefix.to_string(),
                kind,
                passed,
                summary: format!(
                    "largest-cutoff deviation {worst_final:.3e} (tol {rel_tol})"
                ),
                files: vec![jf, cf],
            })
        }
        CheckSpec::PvSuite { radius, tol } => {
            let radius = radius.unwrap_or(1.0e4);
            let tol = ov.tol.or(*tol).unwrap_or(1e-6);
            let pairs = [
                (3.0, 1.0),
                (2.0, 5.0),
                (0.5, 0.2),
                (10.0, 1.0),
                (7.0, 7.0),
            ];
            let mut csv = String::from("a,b,analytic,quadrature,estimated_error,deviation\n");
            let mut worst: f64 = 0.0;
            let mut run_one = |a: f64, b: f64, analytic: f64| -> Result<()> {
                let q = pv_quadrature(a, b, radius, tol)
                    .map_err(|e| anyhow!("pv quadrature ({a}, {b}): {e}"))?;
                let dev = (q.value - analytic).abs();
                worst = worst.max(dev);
                csv.push_str(&format!(
                    "{a},{b},{analytic},{},{},{dev}\n",
                    q.value, q.estimated_error
                ));
                Ok(())
            };
            for &(a, b) in &pairs {
                run_one(a, b, pv_exp_diff(a, b).expect("same sign").value)?;
                run_one(-a, -b, pv_exp_diff(-a, -b).expect("same sign").value)?;
            }
            for b in [2.0, -2.0, 0.5, 10.0, 1.0] {
                run_one(0.0, b, pv_one_minus_exp(b).value)?;
            }
            let passed = worst < tol;
            let json = PvSuiteJson { radius, tol, max_deviation: worst, passed };
            let jf = format!("{prefix}.json");
            let cf = format!("{prefix}.csv");
            write_json(out_dir, &jf, &json)?;
            write_atomic(out_dir, &cf, csv.as_bytes())?;
            Ok(CheckResult {
                name: prefix.to_string(),
                kind,
                passed,
                summary: format!("max deviation {worst:.3e} at radius {radius:.1e}"),
                files: vec![jf, cf],
            })
        }
    }
}

fn run_hierarchy<M: MultiTimeModel>(
    model: &M,
    intervals: usize,
    grids: &Option<Vec<Vec<f64>>>,
    random: &Option<crate::scenario::RandomGridsSpec>,
    seed: u64,
    opts: &HierarchyOptions,
) -> Result<RegressionReport> {
    match (grids, random) {
        (Some(g), None) => {
            let parsed = parse_grids(g)?;
            check_hierarchy(model, intervals, &parsed, opts)
                .map_err(|e| anyhow!("hierarchy check: {e}"))
        }
        (None, Some(r)) => {
            check_hierarchy_random(model, intervals, r.count, (r.lo, r.hi), seed, opts)
                .map_err(|e| anyhow!("hierarchy check: {e}"))
        }
        _ => bail!("regression checks take exactly one of `grids` or `random`"),
    }
}

fn finish_regression(
    prefix: &str,
    kind: String,
    report: &RegressionReport,
    out_dir: &Path,
) -> Result<CheckResult> {
    let json = RegressionJson {
        enumerated: report.enumerated,
        evaluated: report.evaluated,
        max_residual: report.max_residual,
        max_modulus_residual: report.max_modulus_residual,
        satisfied: report.satisfied,
        tol: report.tol,
        seed: report.seed,
    };
    let jf = format!("{prefix}.json");
    let cf = format!("{prefix}.csv");
    write_json(out_dir, &jf, &json)?;
    write_atomic(out_dir, &cf, regression_csv(report).as_bytes())?;
    Ok(CheckResult {
        name: prefix.to_string(),
        kind,
        passed: report.satisfied,
        summary: format!(
            "max residual {:.6e} over {} conditions (tol {:.1e})",
            report.max_residual, report.evaluated, report.tol
        ),
        files: vec![jf, cf],
    })
}

#[derive(Debug, Deserialize)]
pub struct ManifestOnDisk {
    pub name: String,
    pub scenario_digest: String,
    pub tool_version: String,
    pub seed: u64,
    pub wall_clock_seconds: f64,
    pub checks: Vec<CheckResult>,
}

pub fn read_manifest(dir: &Path) -> Result<ManifestOnDisk> {
    let path: PathBuf = dir.join("manifest.json");
    let bytes = fs::read(&path)
        .with_context(|| format!("reading manifest at {}", path.display()))?;
    serde_json::from_slice(&bytes).context("manifest is corrupt")
}
