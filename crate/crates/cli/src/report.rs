//! Human-readable rendering of a run directory: summary tables plus the
//! plot-ready residual-versus-depth series derived from the regression rows.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

use crate::run::{
    read_manifest, write_atomic, DivisibilityJson, RegressionJson, SemigroupJson,
};

pub fn render(dir: &Path) -> Result<String> {
    let manifest = read_manifest(dir)?;
    let mut out = String::new();
    out.push_str(&format!("run       : {}\n", manifest.name));
    out.push_str(&format!("digest    : {}\n", manifest.scenario_digest));
    out.push_str(&format!("tool      : dephase {}\n", manifest.tool_version));
    out.push_str(&format!("seed      : {}\n", manifest.seed));
    out.push_str(&format!("wall clock: {:.3} s\n", manifest.wall_clock_seconds));

    if manifest.checks.is_empty() {
        out.push_str("\n(no checks were requested)\n");
        return Ok(out);
    }

    out.push_str("\nchecks\n");
    out.push_str(&format!("  {:<28} {:<8} summary\n", "name", "status"));
    for check in &manifest.checks {
        out.push_str(&format!(
            "  {:<28} {:<8} {}\n",
            check.name,
            if check.passed { "pass" } else { "FAIL" },
            check.summary
        ));
    }

    for check in &manifest.checks {
        match check.kind.as_str() {
            "semigroup" => {
                if let Some(json) = load::<SemigroupJson>(dir, &check.files) {
                    out.push_str(&format!(
                        "\ndephasing rates ({}, residual {:.3e})\n",
                        check.name, json.residual
                    ));
                    out.push_str("  j  l  omega          gamma\n");
                    for r in &json.rates {
                        out.push_str(&format!(
                            "  {}  {}  {:<13.6} {:<13.6}\n",
                            r.j, r.l, r.omega, r.gamma
                        ));
                    }
                }
            }
            "divisibility" => {
                if let Some(json) = load::<DivisibilityJson>(dir, &check.files) {
                    out.push_str(&format!("\ndivisibility ({})\n", check.name));
                    out.push_str(&format!(
                        "  invertible {} | CP-divisible {} | P-divisible {} | semigroup {}\n",
                        json.invertible, json.cp_divisible, json.p_divisible, json.semigroup
                    ));
                    if let Some((s, t, eig)) = json.first_violation {
                        out.push_str(&format!(
                            "  first violation: (s, t) = ({s}, {t}), min eigenvalue {eig:.6e}\n"
                        ));
                    }
                }
            }
            "regression" | "weyl-regression" => {
                if let Some(json) = load::<RegressionJson>(dir, &check.files) {
                    out.push_str(&format!(
                        "\n{} ({}): {} of {} tuples evaluated\n",
                        check.kind, check.name, json.evaluated, json.enumerated
                    ));
                    out.push_str(&format!(
                        "  max residual {:.6e}, max modulus residual {:.6e}{}\n",
                        json.max_residual,
                        json.max_modulus_residual,
                        json.seed.map(|s| format!(", grid seed {s}")).unwrap_or_default()
                    ));
                }
            }
            _ => {}
        }
    }

    // plot-ready: max residual per interval depth, aggregated over the
    // regression row files
    let mut depth_max: Vec<(usize, f64)> = Vec::new();
    for check in &manifest.checks {
        for file in &check.files {
            if !file.ends_with(".csv") || !file.contains("regression") {
                continue;
            }
            let Ok(text) = fs::read_to_string(dir.join(file)) else { continue };
            for line in text.lines().skip(1) {
                let cols: Vec<&str> = line.split(',').collect();
                if cols.len() < 9 {
                    continue;
                }
                let (Ok(m), Ok(res)) = (cols[1].parse::<usize>(), cols[7].parse::<f64>()) else {
                    continue;
                };
                match depth_max.iter_mut().find(|(d, _)| *d == m) {
                    Some(entry) => entry.1 = entry.1.max(res),
                    None => depth_max.push((m, res)),
                }
            }
        }
    }
    if !depth_max.is_empty() {
        depth_max.sort_by_key(|&(m, _)| m);
        let mut csv = String::from("intervals,max_residual\n");
        for (m, res) in &depth_max {
            csv.push_str(&format!("{m},{res}\n"));
        }
        write_atomic(dir, "residual_vs_intervals.csv", csv.as_bytes())
            .context("writing residual_vs_intervals.csv")?;
        out.push_str("\nwrote residual_vs_intervals.csv\n");
    }
    if dir.join("phi_series.csv").exists() {
        out.push_str("phi series available in phi_series.csv\n");
    }
    Ok(out)
}

fn load<T: serde::de::DeserializeOwned>(dir: &Path, files: &[String]) -> Option<T> {
    let json = files.iter().find(|f| f.ends_with(".json"))?;
    let bytes = fs::read(dir.join(json)).ok()?;
    serde_json::from_slice(&bytes).ok()
}
