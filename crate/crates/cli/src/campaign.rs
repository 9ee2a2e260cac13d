//! Runs a validated campaign and renders its results.

use modseq_core::geomconst::{
    alpha_beta_for_spec, jvn_lower_bound, jvn_upper_bound, tail_parallelogram_defect, AsymptoticsReport,
    JvnEstimate, TailDefectReport,
};
use modseq_core::isolab::{
    build_counterexample_embedding, counterexample_xi0, find_one_dim_two_summand, is_isometric_embedding,
    limit_isometry_check, pt_iterate, range_intersection_dim, sample_vectors, IsometryReport, IterationTrace,
    LimitCheckReport, LinearMap, SummandSearch,
};
use modseq_core::nakano::{nakano_condition_terms, nakano_condition_verdict, GridVerdict, NakanoTerms, NakanoVerdictReport};
use modseq_core::spaces::{FiniteNormedSpace, Vector};
use modseq_core::verify::{self, scalar_grid, ViolationReport};
use modseq_core::Error;
use serde::{Deserialize, Serialize};

use crate::config::{CampaignConfig, CheckSpec, MapSpec, PlotKind, Task};

/// Reports of one campaign; everything here is reproducible from the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Payload {
    Norm {
        norms: Vec<f64>,
    },
    Jvn {
        estimate: JvnEstimate,
        upper_bound: f64,
    },
    Verify {
        reports: Vec<ViolationReport>,
    },
    Nakano {
        verdict: NakanoVerdictReport,
        #[serde(skip_serializing_if = "Option::is_none")]
        terms: Option<NakanoTerms>,
    },
    Asymptotics {
        report: AsymptoticsReport,
        #[serde(skip_serializing_if = "Option::is_none")]
        tail: Option<TailDefectReport>,
    },
    Summand {
        search: SummandSearch,
    },
    Iterate {
        isometry: IsometryReport,
        trace: IterationTrace,
        limit: LimitCheckReport,
        range_intersection_dim: usize,
    },
}

/// One pass/fail line of the summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    /// The threshold `value` was compared with, if any.
    pub bound: Option<f64>,
}

fn outcome(name: impl Into<String>, passed: bool, value: f64, bound: Option<f64>) -> Outcome {
    Outcome {
        name: name.into(),
        passed,
        value,
        bound,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignResult {
    pub config: CampaignConfig,
    pub version: String,
    pub payload: Payload,
    pub summary: Vec<Outcome>,
    pub passed: bool,
    /// Excluded from reproducibility comparisons.
    pub wall_time_s: f64,
}

impl CampaignResult {
    /// The deterministic part of the result, serialized.
    pub fn numerical_payload(&self) -> serde_json::Value {
        serde_json::json!({
            "payload": self.payload,
            "summary": self.summary,
            "passed": self.passed,
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    /// An input the library rejected.
    #[error("invalid input: {0}")]
    Input(Error),
    /// The computation itself failed (non-Cauchy iteration, ambiguous rank,
    /// non-finite modular).
    #[error("numerical failure: {0}")]
    Numerical(Error),
    #[error("series `{0:?}` is not part of this result")]
    MissingSeries(PlotKind),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::NonCauchy { .. } | Error::AmbiguousRank { .. } | Error::NonFiniteModular => RunError::Numerical(e),
            other => RunError::Input(other),
        }
    }
}

/// Runs the campaign on a pool of `jobs` threads (default: all cores).
pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignResult, RunError> {
    let start = std::time::Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.unwrap_or(0))
        .build()
        .map_err(|e| RunError::Input(Error::Precondition(e.to_string())))?;
    let (payload, summary) = pool.install(|| dispatch(config))?;
    Ok(CampaignResult {
        config: config.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        passed: summary.iter().all(|o| o.passed),
        payload,
        summary,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

fn check_name(check: &CheckSpec) -> &'static str {
    match check {
        CheckSpec::ClarksonLower { .. } => "clarkson_lower",
        CheckSpec::ClarksonUpper { .. } => "clarkson_upper",
        CheckSpec::LpPair { .. } => "lp_pair",
        CheckSpec::Beckner { .. } => "beckner",
        CheckSpec::TwoSmooth { .. } => "two_smooth",
        CheckSpec::SchattenInf { .. } => "schatten_inf",
        CheckSpec::Parallelogram { .. } => "parallelogram",
        CheckSpec::Endpoint2 { .. } => "endpoint_2",
    }
}

fn exponent(space: &FiniteNormedSpace) -> Option<f64> {
    match space {
        FiniteNormedSpace::Lp { p, .. } | FiniteNormedSpace::Schatten { p, .. } => Some(*p),
        FiniteNormedSpace::Euclid { .. } => Some(2.0),
        _ => None,
    }
}

fn run_check(spec: &CheckSpec, samples: usize, seed: u64) -> Result<ViolationReport, Error> {
    match spec {
        CheckSpec::ClarksonLower { space } => {
            verify::verify_clarkson_lower(space, exponent(space).unwrap_or(f64::NAN), samples, seed)
        }
        CheckSpec::ClarksonUpper { space } => {
            verify::verify_clarkson_upper(space, exponent(space).unwrap_or(f64::NAN), samples, seed)
        }
        CheckSpec::LpPair {
            space,
            x,
            y,
            p,
            lambda_grid,
        } => {
            let grid = lambda_grid.clone().unwrap_or_else(verify::default_lambda_grid);
            verify::verify_lp_pair(space, x, y, *p, &grid)
        }
        CheckSpec::Beckner { p, grid_points } => {
            let grid = scalar_grid(-2.0, 2.0, *grid_points);
            verify::verify_beckner(*p, Some(&grid))
        }
        CheckSpec::TwoSmooth { space, c } => {
            let c = match c {
                Some(c) => *c,
                None => (exponent(space).unwrap_or(f64::NAN) - 1.0).sqrt(),
            };
            verify::verify_2smooth(space, c, samples, seed)
        }
        CheckSpec::SchattenInf { d } => verify::verify_schatten_inf(*d, samples, seed),
        CheckSpec::Parallelogram { space } => verify::verify_parallelogram(space, samples, seed),
        CheckSpec::Endpoint2 { space } => verify::verify_endpoint_2(space, samples, seed),
    }
}

fn build_map(spec: &MapSpec) -> Result<LinearMap, Error> {
    match spec {
        MapSpec::Inclusion { e0, h } => LinearMap::inclusion(e0, *h),
        MapSpec::Embedding { e0, u, h } => LinearMap::embedding(e0, u, *h),
        MapSpec::Counterexample { e1, h } => build_counterexample_embedding(e1, *h),
    }
}

fn dispatch(config: &CampaignConfig) -> Result<(Payload, Vec<Outcome>), RunError> {
    let seed = config.seed;
    Ok(match &config.task {
        Task::Norm { space, vectors } => {
            let norms = vectors.iter().map(|v| space.norm(v)).collect::<Result<Vec<_>, _>>()?;
            let summary = norms
                .iter()
                .enumerate()
                .map(|(i, &n)| outcome(format!("norm[{i}]"), n.is_finite(), n, None))
                .collect();
            (Payload::Norm { norms }, summary)
        }
        Task::Jvn { space, budget } => {
            let estimate = jvn_lower_bound(space, *budget, seed)?;
            let upper_bound = jvn_upper_bound(space)?;
            let a = estimate.lower_bound;
            let summary = vec![
                outcome("within_[1,2]", (1.0 - 1e-9..=2.0 + 1e-9).contains(&a), a, Some(2.0)),
                outcome("below_upper_bound", a <= upper_bound + 1e-6, a, Some(upper_bound)),
            ];
            (Payload::Jvn { estimate, upper_bound }, summary)
        }
        Task::Verify {
            checks,
            samples,
            tolerance,
        } => {
            let mut reports = Vec::with_capacity(checks.len());
            for c in checks {
                let mut r = run_check(c, *samples, seed)?;
                if let Some(t) = tolerance {
                    r.tolerance = *t;
                    r.verdict = if r.max_violation > *t {
                        verify::Verdict::Violated
                    } else {
                        verify::Verdict::Holds
                    };
                }
                reports.push(r);
            }
            let summary = checks
                .iter()
                .zip(&reports)
                .map(|(c, r)| outcome(check_name(c), r.holds(), r.max_violation, Some(r.tolerance)))
                .collect();
            (Payload::Verify { reports }, summary)
        }
        Task::Nakano {
            exponents,
            c_grid,
            series,
            terms,
            expect,
        } => {
            let verdict = nakano_condition_verdict(exponents, c_grid, series)?;
            let terms = terms
                .as_ref()
                .map(|t| nakano_condition_terms(exponents, t.c, t.count))
                .transpose()?;
            let (label, c) = match verdict.overall {
                GridVerdict::SomeConverges { c } => ("some_converges", c),
                GridVerdict::NoneInGrid => ("none_in_grid", f64::NAN),
            };
            let passed = expect.as_deref().is_none_or(|e| e == label);
            let summary = vec![outcome(format!("overall_{label}"), passed, c, None)];
            (Payload::Nakano { verdict, terms }, summary)
        }
        Task::Asymptotics { spec, horizon, tail } => {
            let report = alpha_beta_for_spec(spec, *horizon)?;
            let nonincreasing = report.beta.windows(2).all(|w| w[1] <= w[0]);
            let mut summary = vec![outcome("beta_nonincreasing", nonincreasing, report.beta[0], None)];
            let tail = tail
                .as_ref()
                .map(|t| tail_parallelogram_defect(spec, t.cutoff, t.samples, seed))
                .transpose()?;
            if let Some(t) = &tail {
                summary.push(outcome(
                    "tail_ratio_within_beta",
                    t.max_ratio <= t.beta + 1e-9,
                    t.max_ratio,
                    Some(t.beta),
                ));
            }
            (Payload::Asymptotics { report, tail }, summary)
        }
        Task::Summand {
            space,
            budget,
            expect_found,
        } => {
            let search = find_one_dim_two_summand(space, *budget, seed)?;
            let found = search.found.is_some();
            let passed = expect_found.is_none_or(|e| e == found);
            let name = if found { "summand_found" } else { "no_summand" };
            let summary = vec![outcome(name, passed, search.floor, None)];
            (Payload::Summand { search }, summary)
        }
        Task::Iterate {
            map,
            x,
            n_max,
            samples,
            tolerance,
            expect_limit_pass,
        } => {
            let t = build_map(map)?;
            let isometry = is_isometric_embedding(&t, *samples, seed, 1e-12)?;
            let x = match (x, map) {
                (Some(x), _) => x.clone(),
                (None, MapSpec::Counterexample { .. }) => counterexample_xi0(&t),
                (None, _) => Vector::real(vec![1.0; t.domain.dim()]),
            };
            let trace = pt_iterate(&t, &x, *n_max)?;
            let limit = limit_isometry_check(&t, &sample_vectors(&t.domain, *samples, seed), *n_max, *tolerance, 8, seed)?;
            let dim = range_intersection_dim(&t, 1e-10)?;
            let defect = trace.telescoping_defects.iter().copied().fold(0.0, f64::max);
            let rise = trace.norms.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
            let mut summary = vec![
                outcome("isometric", isometry.isometric, isometry.max_deviation, Some(1e-12)),
                outcome("telescoping", defect <= 1e-10, defect, Some(1e-10)),
                outcome("norms_nonincreasing", rise <= 1e-12, rise, Some(1e-12)),
            ];
            let failing = limit.samples.iter().filter(|s| !s.passes).count();
            summary.push(outcome(
                "limit_isometry",
                expect_limit_pass.is_none_or(|e| e == limit.all_pass),
                failing as f64,
                None,
            ));
            (
                Payload::Iterate {
                    isometry,
                    trace,
                    limit,
                    range_intersection_dim: dim,
                },
                summary,
            )
        }
    })
}

/// `{:.16e}`: 17 significant digits, `.` as decimal separator.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        String::new()
    }
}

fn to_csv(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Plot-ready CSV for one series of the result.
pub fn emit_plot_data(result: &CampaignResult, kind: PlotKind) -> Result<String, RunError> {
    match (&result.payload, kind) {
        (Payload::Iterate { trace, .. }, PlotKind::Trace) => {
            let rows = (0..trace.norms.len())
                .map(|n| {
                    vec![
                        n.to_string(),
                        fmt_f64(trace.norms[n]),
                        // residual entering step n; none before the first step
                        if n == 0 { String::new() } else { fmt_f64(trace.residuals[n - 1]) },
                        fmt_f64(trace.telescoping_defects[n]),
                    ]
                })
                .collect();
            Ok(to_csv(&["n", "norm", "residual", "defect"], rows))
        }
        (Payload::Asymptotics { report, .. }, PlotKind::AlphaBeta) => {
            let rows = (0..report.n.len())
                .map(|i| vec![report.n[i].to_string(), fmt_f64(report.alpha[i]), fmt_f64(report.beta[i])])
                .collect();
            Ok(to_csv(&["n", "alpha", "beta"], rows))
        }
        (Payload::Nakano { terms: Some(t), .. }, PlotKind::NakanoTerms) => {
            let rows = (0..t.n.len())
                .map(|i| vec![t.n[i].to_string(), fmt_f64(t.terms[i]), fmt_f64(t.log_slopes[i])])
                .collect();
            Ok(to_csv(&["n", "term", "log_slope"], rows))
        }
        _ => Err(RunError::MissingSeries(kind)),
    }
}

/// One row per summary line.
pub fn summary_csv(result: &CampaignResult) -> String {
    let rows = result
        .summary
        .iter()
        .map(|o| {
            vec![
                result.config.name.clone(),
                o.name.clone(),
                o.passed.to_string(),
                fmt_f64(o.value),
                o.bound.map(fmt_f64).unwrap_or_default(),
            ]
        })
        .collect();
    to_csv(&["campaign", "check", "passed", "value", "bound"], rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_has_17_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(f64::NAN), "");
    }

    #[test]
    fn missing_series_is_an_error() {
        let cfg = CampaignConfig::from_json(
            r#"{"seed": 1, "command": "norm", "space": {"kind": "euclid", "d": 2}, "vectors": [[3, 4]]}"#,
        )
        .unwrap();
        let r = run_campaign(&cfg).unwrap();
        assert_eq!(r.payload, Payload::Norm { norms: vec![5.0] });
        assert!(matches!(emit_plot_data(&r, PlotKind::Trace), Err(RunError::MissingSeries(_))));
    }
}
