//! Campaign configuration: one JSON document per run.

use std::path::PathBuf;

use modseq_core::linalg::Matrix;
use modseq_core::nakano::{ExponentSequence, NakanoSpec, SeriesTestConfig};
use modseq_core::spaces::{FiniteNormedSpace, Vector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    /// `(n, norm, residual, defect)` from an iterate campaign.
    Trace,
    /// `(n, alpha, beta)` from an asymptotics campaign.
    AlphaBeta,
    /// `(n, term, log_slope)` from a nakano campaign with `terms`.
    NakanoTerms,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory; the `--out` flag and `MODSEQ_OUT_DIR` take precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub plots: Vec<PlotKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    /// Base name of the output files.
    #[serde(default = "default_name")]
    pub name: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(flatten)]
    pub task: Task,
}

fn default_name() -> String {
    "campaign".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case", deny_unknown_fields)]
pub enum Task {
    Norm {
        space: FiniteNormedSpace,
        vectors: Vec<Vector>,
    },
    Jvn {
        space: FiniteNormedSpace,
        #[serde(default = "default_budget")]
        budget: usize,
    },
    Verify {
        checks: Vec<CheckSpec>,
        #[serde(default = "default_samples")]
        samples: usize,
        /// Overrides every check's default tolerance.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
    Nakano {
        exponents: ExponentSequence,
        c_grid: Vec<f64>,
        #[serde(default)]
        series: SeriesTestConfig,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        terms: Option<TermsSpec>,
        /// Expected overall outcome: `some_converges` or `none_in_grid`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<String>,
    },
    Asymptotics {
        spec: NakanoSpec,
        #[serde(default = "default_horizon")]
        horizon: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tail: Option<TailSpec>,
    },
    Summand {
        space: FiniteNormedSpace,
        #[serde(default = "default_summand_budget")]
        budget: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect_found: Option<bool>,
    },
    Iterate {
        map: MapSpec,
        /// Vector to trace; defaults to `xi0` for the counterexample and to
        /// all-ones otherwise.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x: Option<Vector>,
        #[serde(default = "default_n_max")]
        n_max: usize,
        #[serde(default = "default_iterate_samples")]
        samples: usize,
        #[serde(default = "default_iterate_tol")]
        tolerance: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect_limit_pass: Option<bool>,
    },
}

fn default_budget() -> usize {
    64
}
fn default_samples() -> usize {
    10_000
}
fn default_horizon() -> usize {
    1000
}
fn default_summand_budget() -> usize {
    16
}
fn default_n_max() -> usize {
    50
}
fn default_iterate_samples() -> usize {
    32
}
fn default_iterate_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    ClarksonLower { space: FiniteNormedSpace },
    ClarksonUpper { space: FiniteNormedSpace },
    LpPair {
        space: FiniteNormedSpace,
        x: Vector,
        y: Vector,
        p: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda_grid: Option<Vec<f64>>,
    },
    Beckner {
        p: f64,
        #[serde(default = "default_grid_points")]
        grid_points: usize,
    },
    /// `c` defaults to `sqrt(p - 1)` for `l_p` and Schatten spaces.
    TwoSmooth {
        space: FiniteNormedSpace,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<f64>,
    },
    SchattenInf { d: usize },
    Parallelogram { space: FiniteNormedSpace },
    #[serde(rename = "endpoint_2")]
    Endpoint2 { space: FiniteNormedSpace },
}

fn default_grid_points() -> usize {
    401
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermsSpec {
    pub c: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailSpec {
    pub cutoff: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    /// `E0 -> E0 (+)_2 Euclid(h)`.
    Inclusion { e0: FiniteNormedSpace, h: usize },
    /// `x -> (U x, 0)`.
    Embedding {
        e0: FiniteNormedSpace,
        u: Matrix,
        h: usize,
    },
    /// Identity on `E1`, `xi0` into `H`, on `E0 = E1 (+)_2 R`.
    Counterexample { e1: FiniteNormedSpace, h: usize },
}

/// A configuration problem, phrased so the user can fix the file.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: &str, message: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        message: message.to_string(),
    }
}

fn positive(field: &str, v: usize) -> Result<(), ConfigError> {
    if v == 0 {
        Err(invalid(field, "must be at least 1"))
    } else {
        Ok(())
    }
}

fn space_ok(field: &str, s: &FiniteNormedSpace) -> Result<(), ConfigError> {
    s.validate().map_err(|e| invalid(field, e))
}

impl CampaignConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: CampaignConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Checks every field against the preconditions of the operation it
    /// feeds.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(invalid("name", "must be a non-empty file stem"));
        }
        if let Some(j) = self.jobs {
            positive("jobs", j)?;
        }
        match &self.task {
            Task::Norm { space, vectors } => {
                space_ok("space", space)?;
                if vectors.is_empty() {
                    return Err(invalid("vectors", "list at least one vector"));
                }
                for (i, v) in vectors.iter().enumerate() {
                    if v.dim() != space.dim() {
                        return Err(invalid(
                            &format!("vectors[{i}]"),
                            format!("has {} entries, the space needs {}", v.dim(), space.dim()),
                        ));
                    }
                }
            }
            Task::Jvn { space, budget } => {
                space_ok("space", space)?;
                positive("budget", *budget)?;
            }
            Task::Verify { checks, tolerance, .. } => {
                if checks.is_empty() {
                    return Err(invalid("checks", "list at least one check"));
                }
                if let Some(t) = tolerance {
                    if !(*t >= 0.0 && t.is_finite()) {
                        return Err(invalid("tolerance", "must be a finite nonnegative number"));
                    }
                }
                for (i, c) in checks.iter().enumerate() {
                    c.validate(&format!("checks[{i}]"))?;
                }
            }
            Task::Nakano {
                exponents,
                c_grid,
                series,
                terms,
                expect,
            } => {
                exponents.validate().map_err(|e| invalid("exponents", e))?;
                if c_grid.is_empty() {
                    return Err(invalid("c_grid", "list at least one value"));
                }
                for (i, c) in c_grid.iter().enumerate() {
                    if !(*c > 0.0 && *c < 1.0) {
                        return Err(invalid(&format!("c_grid[{i}]"), "must lie in (0, 1)"));
                    }
                }
                let (lo, hi) = series.window;
                if lo == 0 || hi <= lo {
                    return Err(invalid("series.window", "needs 1 <= start < end"));
                }
                if series.points < 2 {
                    return Err(invalid("series.points", "must be at least 2"));
                }
                if !(series.margin >= 0.0 && series.margin < 1.0) {
                    return Err(invalid("series.margin", "must lie in [0, 1)"));
                }
                if let Some(t) = terms {
                    if !(t.c > 0.0 && t.c < 1.0) {
                        return Err(invalid("terms.c", "must lie in (0, 1)"));
                    }
                    positive("terms.count", t.count)?;
                }
                if let Some(e) = expect {
                    if e != "some_converges" && e != "none_in_grid" {
                        return Err(invalid("expect", "use \"some_converges\" or \"none_in_grid\""));
                    }
                }
            }
            Task::Asymptotics { spec, horizon, tail } => {
                spec.validate().map_err(|e| invalid("spec", e))?;
                positive("horizon", *horizon)?;
                if let Some(t) = tail {
                    positive("tail.cutoff", t.cutoff)?;
                    positive("tail.samples", t.samples)?;
                }
            }
            Task::Summand { space, budget, .. } => {
                space_ok("space", space)?;
                if space.supports_complex() {
                    return Err(invalid("space", "2-summand search needs a real space"));
                }
                positive("budget", *budget)?;
            }
            Task::Iterate {
                map,
                x,
                n_max,
                tolerance,
                ..
            } => {
                let dim = map.validate()?;
                if *n_max < modseq_core::isolab::CAUCHY_LAG {
                    return Err(invalid("n_max", format!("must be at least {}", modseq_core::isolab::CAUCHY_LAG)));
                }
                if let Some(x) = x {
                    if x.dim() != dim {
                        return Err(invalid("x", format!("has {} entries, the domain needs {dim}", x.dim())));
                    }
                }
                if !(*tolerance > 0.0) {
                    return Err(invalid("tolerance", "must be positive"));
                }
            }
        }
        Ok(())
    }
}

impl CheckSpec {
    fn validate(&self, field: &str) -> Result<(), ConfigError> {
        let f = |sub: &str| format!("{field}.{sub}");
        let exponent = |s: &FiniteNormedSpace| match s {
            FiniteNormedSpace::Lp { p, .. } | FiniteNormedSpace::Schatten { p, .. } => Some(*p),
            FiniteNormedSpace::Euclid { .. } => Some(2.0),
            _ => None,
        };
        match self {
            CheckSpec::ClarksonLower { space } => {
                space_ok(&f("space"), space)?;
                match exponent(space) {
                    Some(p) if p > 2.0 && !matches!(space, FiniteNormedSpace::Euclid { .. }) => Ok(()),
                    _ => Err(invalid(&f("space"), "needs an l_p or Schatten space with p > 2")),
                }
            }
            CheckSpec::ClarksonUpper { space } => {
                space_ok(&f("space"), space)?;
                match exponent(space) {
                    Some(p) if (1.0..2.0).contains(&p) && !matches!(space, FiniteNormedSpace::Euclid { .. }) => Ok(()),
                    _ => Err(invalid(&f("space"), "needs an l_p or Schatten space with 1 <= p < 2")),
                }
            }
            CheckSpec::LpPair {
                space,
                x,
                y,
                p,
                lambda_grid,
            } => {
                space_ok(&f("space"), space)?;
                if x.dim() != space.dim() || y.dim() != space.dim() {
                    return Err(invalid(field, "x and y must match the space dimension"));
                }
                if !(*p >= 1.0) {
                    return Err(invalid(&f("p"), "must be at least 1"));
                }
                if let Some(g) = lambda_grid {
                    if g.is_empty() || g.iter().any(|l| !l.is_finite()) {
                        return Err(invalid(&f("lambda_grid"), "needs finite values"));
                    }
                }
                let nx = space.norm(x).map_err(|e| invalid(&f("x"), e))?;
                if (nx - 1.0).abs() > 1e-10 {
                    return Err(invalid(&f("x"), format!("must have norm 1, has {nx}")));
                }
                Ok(())
            }
            CheckSpec::Beckner { p, grid_points } => {
                if !(*p >= 2.0 && p.is_finite()) {
                    return Err(invalid(&f("p"), "must be finite and at least 2"));
                }
                positive(&f("grid_points"), *grid_points)
            }
            CheckSpec::TwoSmooth { space, c } => {
                space_ok(&f("space"), space)?;
                match c {
                    Some(c) if !(*c > 0.0 && c.is_finite()) => Err(invalid(&f("c"), "must be positive")),
                    Some(_) => Ok(()),
                    None => match exponent(space) {
                        Some(p) if p >= 2.0 && p.is_finite() => Ok(()),
                        _ => Err(invalid(&f("c"), "required unless the space is l_p or Schatten with 2 <= p < inf")),
                    },
                }
            }
            CheckSpec::SchattenInf { d } => positive(&f("d"), *d),
            CheckSpec::Parallelogram { space } => space_ok(&f("space"), space),
            CheckSpec::Endpoint2 { space } => {
                space_ok(&f("space"), space)?;
                match exponent(space) {
                    Some(2.0) => Ok(()),
                    _ => Err(invalid(&f("space"), "needs l_2, Euclid or Schatten-2")),
                }
            }
        }
    }
}

impl MapSpec {
    /// Validates and returns the domain dimension.
    fn validate(&self) -> Result<usize, ConfigError> {
        let h_ok = |h: usize| positive("map.h", h);
        match self {
            MapSpec::Inclusion { e0, h } => {
                space_ok("map.e0", e0)?;
                h_ok(*h)?;
                Ok(e0.dim())
            }
            MapSpec::Embedding { e0, u, h } => {
                space_ok("map.e0", e0)?;
                h_ok(*h)?;
                if u.rows() != e0.dim() || u.cols() != e0.dim() {
                    return Err(invalid("map.u", format!("must be {0}x{0}", e0.dim())));
                }
                if u.as_slice().iter().any(|v| !v.is_finite()) {
                    return Err(invalid("map.u", "entries must be finite"));
                }
                Ok(e0.dim())
            }
            MapSpec::Counterexample { e1, h } => {
                space_ok("map.e1", e1)?;
                h_ok(*h)?;
                Ok(e1.dim() + 1)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_verify_campaign() {
        let cfg = CampaignConfig::from_json(
            r#"{"seed": 42, "command": "verify", "samples": 100,
                "checks": [{"check": "clarkson_lower", "space": {"kind": "lp", "p": 3, "d": 5}}]}"#,
        )
        .unwrap();
        assert_eq!(cfg.seed, 42);
        assert!(matches!(cfg.task, Task::Verify { samples: 100, .. }));
    }

    #[test]
    fn rejects_bad_fields() {
        let missing_seed = r#"{"command": "jvn", "space": {"kind": "euclid", "d": 2}}"#;
        assert!(matches!(CampaignConfig::from_json(missing_seed), Err(ConfigError::Parse(_))));

        let bad_p = r#"{"seed": 1, "command": "verify",
            "checks": [{"check": "clarkson_lower", "space": {"kind": "lp", "p": 1.5, "d": 2}}]}"#;
        let err = CampaignConfig::from_json(bad_p).unwrap_err().to_string();
        assert!(err.contains("checks[0].space"), "{err}");

        let unknown = r#"{"seed": 1, "command": "jvn", "space": {"kind": "euclid", "d": 2}, "budgt": 3}"#;
        assert!(CampaignConfig::from_json(unknown).is_err());
    }
}
