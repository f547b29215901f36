//! Scenario and model file schemas (TOML), and their conversion into core
//! objects. Parsers reject unknown fields so that typos fail loudly.

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use dephase_core::regression::{CommutingModel, TimeGrid};
use dephase_core::spinboson::{FormFactor, GsbSpec, Line};
use dephase_core::{BlockModel, Complex64, HermitianMatrix, LevelFunction, SpectralMeasure};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub model: ModelSpec,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    pub checks: Vec<CheckSpec>,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let scenario: Scenario = toml::from_str(text).context("failed to parse scenario")?;
        if scenario.checks.is_empty() && scenario.grid.is_none() {
            // manifest-only runs are allowed; nothing to validate further
        }
        Ok(scenario)
    }

    /// Canonical digest of the parsed scenario: stable across formatting,
    /// comments, and re-serialization of the file.
    pub fn digest(&self) -> Result<String> {
        use sha2::{Digest, Sha256};
        let canonical = serde_json::to_vec(self).context("canonicalizing scenario")?;
        let hash = Sha256::digest(&canonical);
        Ok(hash.iter().map(|b| format!("{b:02x}")).collect())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub stop: Option<f64>,
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub times: Option<Vec<f64>>,
}

impl GridSpec {
    pub fn times(&self) -> Result<Vec<f64>> {
        match (&self.times, self.stop, self.steps) {
            (Some(times), None, None) => Ok(times.clone()),
            (None, Some(stop), Some(steps)) => {
                if steps == 0 || stop <= 0.0 {
                    bail!("grid needs stop > 0 and steps > 0");
                }
                Ok(dephase_core::model::uniform_grid(stop, steps))
            }
            _ => bail!("grid takes either `times` or both `stop` and `steps`"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Finite block model: complex entries as [re, im] pairs, row-major.
    Finite {
        d: usize,
        bath_dim: usize,
        blocks: Vec<Vec<Vec<[f64; 2]>>>,
        bath_state: Vec<Vec<[f64; 2]>>,
    },
    /// Spectral measure plus level functions (commuting blocks).
    Measure { measure: MeasureSpec, h_funcs: Vec<LevelFunctionSpec> },
    /// Generalized spin-boson level specification.
    Gsb(GsbModelSpec),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeasureSpec {
    /// Equal-weight quantile atoms of a Cauchy distribution.
    CauchyQuantile { center: f64, gamma: f64, atoms: usize },
    /// Uniform grid on [center - radius, center + radius] with exact cell
    /// masses, renormalized; the truncated tail bounds the accuracy.
    CauchyGrid { center: f64, gamma: f64, atoms: usize, radius: f64 },
    /// Explicit atoms as (location, weight) pairs.
    Atoms { atoms: Vec<[f64; 2]> },
}

impl MeasureSpec {
    pub fn build(&self) -> Result<SpectralMeasure> {
        let m = match self {
            MeasureSpec::CauchyQuantile { center, gamma, atoms } => {
                SpectralMeasure::cauchy_quantile(*center, *gamma, *atoms)
            }
            MeasureSpec::CauchyGrid { center, gamma, atoms, radius } => {
                SpectralMeasure::cauchy_grid(*center, *gamma, *atoms, *radius)
            }
            MeasureSpec::Atoms { atoms } => {
                SpectralMeasure::new(atoms.iter().map(|a| (a[0], a[1])).collect())
            }
        };
        m.map_err(|e| anyhow!("invalid spectral measure: {e}"))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LevelFunctionSpec {
    Linear { slope: f64 },
    SplitPositive,
    SplitNegative,
    Tabulated { nodes: Vec<[f64; 2]> },
}

impl LevelFunctionSpec {
    pub fn build(&self) -> LevelFunction {
        match self {
            LevelFunctionSpec::Linear { slope } => LevelFunction::Linear { slope: *slope },
            LevelFunctionSpec::SplitPositive => LevelFunction::SplitPositive,
            LevelFunctionSpec::SplitNegative => LevelFunction::SplitNegative,
            LevelFunctionSpec::Tabulated { nodes } => LevelFunction::Tabulated {
                nodes: nodes.iter().map(|n| (n[0], n[1])).collect(),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GsbModelSpec {
    pub energies: Vec<f64>,
    /// Shorthand for flat couplings f_j = s_j sqrt(gamma / 8 pi) (full line)
    /// or the half-line equivalent.
    #[serde(default)]
    pub pattern: Option<FlatPatternSpec>,
    /// Explicit per-level form factors, mutually exclusive with `pattern`.
    #[serde(default)]
    pub couplings: Option<Vec<FormFactorSpec>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlatPatternSpec {
    pub signs: Vec<i8>,
    pub gamma: f64,
    pub line: LineSpec,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum LineSpec {
    Full,
    Half,
}

impl From<LineSpec> for Line {
    fn from(l: LineSpec) -> Line {
        match l {
            LineSpec::Full => Line::Full,
            LineSpec::Half => Line::Half,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FormFactorSpec {
    FlatFullLine { amplitude: f64 },
    FlatHalfLine { amplitude: f64 },
    FlatCutoff { amplitude: f64, cutoff: f64 },
    Lorentzian { center: f64, width: f64, amplitude: f64 },
    Gaussian { center: f64, width: f64, amplitude: f64 },
    /// Samples as [w, re, im] triples.
    Tabulated { samples: Vec<[f64; 3]> },
    PointMass { frequency: f64, re: f64, #[serde(default)] im: f64 },
}

impl FormFactorSpec {
    pub fn build(&self) -> FormFactor {
        match self {
            FormFactorSpec::FlatFullLine { amplitude } => {
                FormFactor::FlatFullLine { amplitude: *amplitude }
            }
            FormFactorSpec::FlatHalfLine { amplitude } => {
                FormFactor::FlatHalfLine { amplitude: *amplitude }
            }
            FormFactorSpec::FlatCutoff { amplitude, cutoff } => {
                FormFactor::FlatCutoff { amplitude: *amplitude, cutoff: *cutoff }
            }
            FormFactorSpec::Lorentzian { center, width, amplitude } => FormFactor::Lorentzian {
                center: *center,
                width: *width,
                amplitude: *amplitude,
            },
            FormFactorSpec::Gaussian { center, width, amplitude } => FormFactor::Gaussian {
                center: *center,
                width: *width,
                amplitude: *amplitude,
            },
            FormFactorSpec::Tabulated { samples } => FormFactor::Tabulated {
                samples: samples.iter().map(|s| (s[0], Complex64::new(s[1], s[2]))).collect(),
            },
            FormFactorSpec::PointMass { frequency, re, im } => FormFactor::PointMass {
                frequency: *frequency,
                amplitude: Complex64::new(*re, *im),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomGridsSpec {
    pub count: usize,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CheckSpec {
    Divisibility {
        #[serde(default)]
        tol: Option<f64>,
        #[serde(default)]
        all_pairs: bool,
    },
    Semigroup {
        #[serde(default)]
        tol: Option<f64>,
    },
    Blp {},
    Coherence {
        #[serde(default)]
        tol: Option<f64>,
    },
    /// Brute-force hierarchy check on the finite or commuting model.
    Regression {
        intervals: usize,
        #[serde(default)]
        grids: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        random: Option<RandomGridsSpec>,
        #[serde(default)]
        tol: Option<f64>,
        #[serde(default)]
        budget: Option<usize>,
    },
    /// Closed-form hierarchy check for flat full-line couplings.
    WeylRegression {
        intervals: usize,
        #[serde(default)]
        grids: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        random: Option<RandomGridsSpec>,
        #[serde(default)]
        tol: Option<f64>,
    },
    /// Modulus conditions plus the two-interval phase defect for flat
    /// half-line couplings.
    HalflineRegression {
        intervals: usize,
        random: RandomGridsSpec,
        t0: f64,
        t1: f64,
        #[serde(default)]
        modulus_tol: Option<f64>,
        #[serde(default)]
        min_defect: Option<f64>,
    },
    /// Writes the dephasing trajectory series (requires a grid).
    SpinbosonTrajectory {},
    /// Finite symmetric cutoff against the infinite-cutoff limit.
    CutoffLimit {
        t: f64,
        cutoffs: Vec<f64>,
        #[serde(default)]
        rel_tol: Option<f64>,
    },
    /// Principal-value quadrature against the analytic constants.
    PvSuite {
        #[serde(default)]
        radius: Option<f64>,
        #[serde(default)]
        tol: Option<f64>,
    },
}

impl CheckSpec {
    pub fn name(&self) -> &'static str {
        match self {
            CheckSpec::Divisibility { .. } => "divisibility",
            CheckSpec::Semigroup { .. } => "semigroup",
            CheckSpec::Blp {} => "blp",
            CheckSpec::Coherence { .. } => "coherence",
            CheckSpec::Regression { .. } => "regression",
            CheckSpec::WeylRegression { .. } => "weyl-regression",
            CheckSpec::HalflineRegression { .. } => "halfline-regression",
            CheckSpec::SpinbosonTrajectory {} => "spinboson-trajectory",
            CheckSpec::CutoffLimit { .. } => "cutoff-limit",
            CheckSpec::PvSuite { .. } => "pv-suite",
        }
    }

    /// Family used by the focused subcommands.
    pub fn family(&self) -> CheckFamily {
        match self {
            CheckSpec::Divisibility { .. }
            | CheckSpec::Semigroup { .. }
            | CheckSpec::Blp {}
            | CheckSpec::Coherence { .. } => CheckFamily::Divisibility,
            CheckSpec::Regression { .. }
            | CheckSpec::WeylRegression { .. }
            | CheckSpec::HalflineRegression { .. } => CheckFamily::Regression,
            CheckSpec::SpinbosonTrajectory {} | CheckSpec::CutoffLimit { .. } => {
                CheckFamily::Spinboson
            }
            CheckSpec::PvSuite { .. } => CheckFamily::Pv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckFamily {
    Divisibility,
    Regression,
    Spinboson,
    Pv,
    All,
}

/// The core objects a model spec can provide; checks pick what they need.
pub struct ModelBundle {
    pub block: Option<BlockModel>,
    pub commuting: Option<CommutingModel>,
    pub measure: Option<(SpectralMeasure, Vec<LevelFunction>)>,
    pub gsb: Option<GsbSpec>,
}

impl ModelSpec {
    pub fn build(&self) -> Result<ModelBundle> {
        match self {
            ModelSpec::Finite { d, bath_dim, blocks, bath_state } => {
                if blocks.len() != *d {
                    bail!("expected {d} blocks, found {}", blocks.len());
                }
                let parsed_blocks = blocks
                    .iter()
                    .enumerate()
                    .map(|(j, rows)| {
                        let m = parse_matrix(rows, *bath_dim)
                            .with_context(|| format!("block {j}"))?;
                        HermitianMatrix::new(m).map_err(|e| anyhow!("block {j}: {e}"))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let bath = parse_matrix(bath_state, *bath_dim).context("bath_state")?;
                let model = BlockModel::new(parsed_blocks, bath)
                    .map_err(|e| anyhow!("invalid block model: {e}"))?;
                Ok(ModelBundle { block: Some(model), commuting: None, measure: None, gsb: None })
            }
            ModelSpec::Measure { measure, h_funcs } => {
                let m = measure.build()?;
                let h: Vec<LevelFunction> = h_funcs.iter().map(|s| s.build()).collect();
                if h.len() < 2 {
                    bail!("need at least two level functions");
                }
                let commuting = CommutingModel::new(m.clone(), &h)
                    .map_err(|e| anyhow!("invalid commuting model: {e}"))?;
                Ok(ModelBundle {
                    block: None,
                    commuting: Some(commuting),
                    measure: Some((m, h)),
                    gsb: None,
                })
            }
            ModelSpec::Gsb(spec) => {
                let gsb = match (&spec.pattern, &spec.couplings) {
                    (Some(p), None) => GsbSpec::flat_pattern(
                        spec.energies.clone(),
                        &p.signs,
                        p.gamma,
                        p.line.into(),
                    )
                    .map_err(|e| anyhow!("invalid flat pattern: {e}"))?,
                    (None, Some(ffs)) => GsbSpec::new(
                        spec.energies.clone(),
                        ffs.iter().map(|f| f.build()).collect(),
                    )
                    .map_err(|e| anyhow!("invalid GSB spec: {e}"))?,
                    _ => bail!("gsb model takes exactly one of `pattern` or `couplings`"),
                };
                Ok(ModelBundle { block: None, commuting: None, measure: None, gsb: Some(gsb) })
            }
        }
    }
}

fn parse_matrix(rows: &[Vec<[f64; 2]>], dim: usize) -> Result<dephase_core::CMat> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        bail!("matrix is not {dim} x {dim}");
    }
    let mut m = dephase_core::CMat::zeros(dim, dim);
    for (r, row) in rows.iter().enumerate() {
        for (s, e) in row.iter().enumerate() {
            m[(r, s)] = Complex64::new(e[0], e[1]);
        }
    }
    Ok(m)
}

pub fn parse_grids(raw: &[Vec<f64>]) -> Result<Vec<TimeGrid>> {
    raw.iter()
        .map(|points| TimeGrid::new(points.clone()).map_err(|e| anyhow!("bad grid: {e}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_stable_across_reserialization() {
        let text = r#"
name = "digest-check"
seed = 5

# a comment that must not influence the digest

[model]
kind = "gsb"
energies = [1.0, 0.0]

[model.pattern]
signs = [1, -1]
gamma = 1.0
line = "full"

[[checks]]
kind = "pv-suite"
"#;
        let scenario = Scenario::from_toml(text).unwrap();
        let digest = scenario.digest().unwrap();
        // round-trip through TOML and re-parse: same digest
        let round = toml::to_string(&scenario).unwrap();
        let reparsed = Scenario::from_toml(&round).unwrap();
        assert_eq!(digest, reparsed.digest().unwrap());
        // formatting-only changes do not alter it either
        let reformatted = text.replace("# a comment that must not influence the digest\n", "");
        let alt = Scenario::from_toml(&reformatted).unwrap();
        assert_eq!(digest, alt.digest().unwrap());
    }

    #[test]
    fn model_spec_rejects_bad_dimensions() {
        // only one block for d = 2
        let text = r#"
name = "bad"
checks = []

[model]
kind = "finite"
d = 2
bath_dim = 2
blocks = [
  [[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]],
]
bath_state = [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]
"#;
        let scenario = Scenario::from_toml(text).unwrap();
        assert!(scenario.model.build().is_err());
    }
}
