//! Machine-readable run reports.
//!
//! Every command emits a single [`RunReport`]: a versioned envelope holding
//! the problem name, a flat echo of every hyper-parameter in effect, the
//! result payload, and enough provenance (seed, crate version, timestamp)
//! to replay the run from the report alone. Reports serialize to JSON by
//! default; [`to_csv`] renders the same payload as CSV rows for tabular
//! consumers.

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::certify::CertificationResult;
use crate::solver::{SolveConfig, SolveResult};

/// Version stamped into every report so downstream tooling can detect
/// layout changes.
pub const SCHEMA_VERSION: u32 = 1;

/// Flat echo of every tunable hyper-parameter with its effective value.
///
/// The echo is intentionally denormalized: certify-only runs still carry
/// the search knobs (and vice versa) so one schema covers every command
/// and a report never under-specifies the configuration it ran with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    /// Independent restarts (M).
    pub trials: usize,
    /// Descent iterations per restart (K_max).
    pub steps: usize,
    /// Certification unsoundness budget.
    pub epsilon0: f64,
    /// Share of `epsilon0` spent on tail truncation.
    pub truncation_fraction: f64,
    /// Box-count cap for certification.
    pub max_boxes: usize,
    /// Bisection depth cap for certification.
    pub max_depth: u32,
    /// Master RNG seed.
    pub seed: u64,
    /// Worker threads for trial-level parallelism.
    pub workers: usize,
    /// Loss draws per probability estimate (N).
    pub samples: usize,
    /// Random directions per gradient estimate (|U|).
    pub directions: usize,
    /// Gaussian smoothing radius (sigma).
    pub sigma: f64,
    /// Estimation slack in the acceptance test.
    pub epsilon_w: f64,
    /// Initial step size.
    pub alpha0: f64,
    /// Step-size cap.
    pub alpha_max: f64,
    /// Step decay/growth ratio.
    pub gamma: f64,
    /// Armijo sufficient-decrease constant.
    pub theta: f64,
}

impl From<&SolveConfig> for ConfigEcho {
    fn from(cfg: &SolveConfig) -> Self {
        ConfigEcho {
            trials: cfg.trials,
            steps: cfg.aloe.k_max,
            epsilon0: cfg.certify.epsilon0,
            truncation_fraction: cfg.certify.truncation_fraction,
            max_boxes: cfg.certify.max_boxes,
            max_depth: cfg.certify.max_depth,
            seed: cfg.seed,
            workers: cfg.workers,
            samples: cfg.oracle.n_samples,
            directions: cfg.oracle.n_directions,
            sigma: cfg.oracle.smoothing_radius,
            epsilon_w: cfg.oracle.epsilon_w,
            alpha0: cfg.aloe.alpha0,
            alpha_max: cfg.aloe.alpha_max,
            gamma: cfg.aloe.gamma,
            theta: cfg.aloe.theta,
        }
    }
}

/// Certification payload together with the point it certified.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertifyReport {
    /// The parameter point the bound holds at.
    pub at: Vec<f64>,
    pub result: CertificationResult,
}

/// One row of a benchmark table: the per-instance outcome plus whatever
/// external reference is available (a known optimum, or a Monte Carlo
/// cross-check for instances without a closed form).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchRow {
    pub id: String,
    pub lower_bound: f64,
    pub x_plus: Option<Vec<f64>>,
    pub wall_time_s: f64,
    /// Known optimal value, when the instance has one.
    pub known_value: Option<f64>,
    /// `known_value - lower_bound`, when the former exists.
    pub gap: Option<f64>,
    /// Monte Carlo estimate of the satisfaction probability at `x_plus`.
    pub mc_estimate: Option<f64>,
    /// Half-width of the Monte Carlo confidence interval.
    pub mc_radius: Option<f64>,
    /// Soundness cross-check: `lower_bound <= mc_estimate + mc_radius`.
    pub sound_vs_mc: Option<bool>,
    pub converged: bool,
}

/// The command-specific payload of a report.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReportResult {
    Solve(SolveResult),
    Certify(CertifyReport),
    Bench { suite: String, rows: Vec<BenchRow> },
}

/// Build metadata embedded in each report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub stochsat: String,
}

impl Default for Versions {
    fn default() -> Self {
        Versions {
            stochsat: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// Versioned envelope for one command invocation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    /// Which subcommand produced this report.
    pub command: String,
    /// Problem name, or suite name for benchmark runs.
    pub problem: String,
    pub config: ConfigEcho,
    pub result: ReportResult,
    pub versions: Versions,
    /// RFC 3339 creation time (UTC).
    pub timestamp: String,
}

impl RunReport {
    pub fn new(
        command: &str,
        problem: &str,
        config: ConfigEcho,
        result: ReportResult,
    ) -> Self {
        RunReport {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            problem: problem.to_string(),
            config,
            result,
            versions: Versions::default(),
            timestamp: Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
        }
    }

    /// Pretty JSON rendering (the `--format json` output).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn fmt_point(p: Option<&[f64]>) -> String {
    p.map(|xs| {
        xs.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(";")
    })
    .unwrap_or_default()
}

/// CSV rendering of a report (the `--format csv` output).
///
/// Benchmark reports produce one row per instance under a header mirroring
/// the JSON row fields; solve and certify reports produce a single row of
/// their headline numbers. Vector-valued cells join coordinates with `;`.
pub fn to_csv(report: &RunReport) -> String {
    let mut out = String::new();
    match &report.result {
        ReportResult::Solve(res) => {
            out.push_str(
                "command,problem,lower_bound,x_plus,best_trial,converged_trials,trials,seed,wall_time_s\n",
            );
            let converged = res.per_trial.iter().filter(|t| t.converged).count();
            out.push_str(&format!(
                "solve,{},{},{},{},{},{},{},{}\n",
                report.problem,
                res.lower_bound,
                fmt_point(res.x_plus.as_deref()),
                res.best_trial.map(|t| t.to_string()).unwrap_or_default(),
                converged,
                res.per_trial.len(),
                res.seed,
                res.wall_time_s,
            ));
        }
        ReportResult::Certify(c) => {
            out.push_str(
                "command,problem,at,lower_bound,local_upper_bound,boundary_mass,truncated_budget,fp_slack,converged,boxes_processed\n",
            );
            out.push_str(&format!(
                "certify,{},{},{},{},{},{},{},{},{}\n",
                report.problem,
                fmt_point(Some(&c.at)),
                c.result.lower_bound,
                c.result.local_upper_bound,
                c.result.boundary_mass,
                c.result.truncated_budget,
                c.result.fp_slack,
                c.result.converged,
                c.result.boxes_processed,
            ));
        }
        ReportResult::Bench { rows, .. } => {
            out.push_str(
                "id,lower_bound,x_plus,wall_time_s,known_value,gap,mc_estimate,mc_radius,sound_vs_mc,converged\n",
            );
            for r in rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    r.id,
                    r.lower_bound,
                    fmt_point(r.x_plus.as_deref()),
                    r.wall_time_s,
                    fmt_opt(r.known_value),
                    fmt_opt(r.gap),
                    fmt_opt(r.mc_estimate),
                    fmt_opt(r.mc_radius),
                    r.sound_vs_mc.map(|b| b.to_string()).unwrap_or_default(),
                    r.converged,
                ));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::{certify_lower_bound, CertifyConfig};
    use crate::parse::parse_problem;

    const PHI1: &str = "exists x in [-1, 1];\n\
                        rand y ~ uniform(-1, 1);\n\
                        constraint x^2 + y^2 <= 1 and (y >= 1/2 or y >= 1/2*x + 1/2);\n";

    fn sample_report() -> RunReport {
        let p = parse_problem(PHI1).unwrap();
        let cert = certify_lower_bound(&p, &[0.0], &CertifyConfig::default()).unwrap();
        RunReport::new(
            "certify",
            &p.name,
            ConfigEcho::from(&SolveConfig::default()),
            ReportResult::Certify(CertifyReport {
                at: vec![0.0],
                result: cert,
            }),
        )
    }

    #[test]
    fn json_round_trips_losslessly() {
        let report = sample_report();
        let json = report.to_json();
        let back: RunReport = serde_json::from_str(&json).unwrap();
        let again = serde_json::to_string_pretty(&back).unwrap();
        assert_eq!(json, again);
        assert_eq!(back.schema_version, SCHEMA_VERSION);
        assert_eq!(back.config.seed, report.config.seed);
    }

    #[test]
    fn config_echo_captures_every_knob() {
        let mut cfg = SolveConfig::default();
        cfg.trials = 7;
        cfg.aloe.k_max = 11;
        cfg.aloe.alpha0 = 0.5;
        cfg.aloe.alpha_max = 2.0;
        cfg.aloe.gamma = 0.7;
        cfg.aloe.theta = 0.3;
        cfg.oracle.n_samples = 200;
        cfg.oracle.n_directions = 60;
        cfg.oracle.smoothing_radius = 0.2;
        cfg.oracle.epsilon_w = 0.04;
        cfg.certify.epsilon0 = 0.01;
        cfg.seed = 99;
        cfg.workers = 4;
        let echo = ConfigEcho::from(&cfg);
        assert_eq!(echo.trials, 7);
        assert_eq!(echo.steps, 11);
        assert_eq!(echo.alpha0, 0.5);
        assert_eq!(echo.alpha_max, 2.0);
        assert_eq!(echo.gamma, 0.7);
        assert_eq!(echo.theta, 0.3);
        assert_eq!(echo.samples, 200);
        assert_eq!(echo.directions, 60);
        assert_eq!(echo.sigma, 0.2);
        assert_eq!(echo.epsilon_w, 0.04);
        assert_eq!(echo.epsilon0, 0.01);
        assert_eq!(echo.seed, 99);
        assert_eq!(echo.workers, 4);
        // Serialized form exposes each knob as its own key.
        let v: serde_json::Value = serde_json::to_value(&echo).unwrap();
        for key in [
            "trials", "steps", "epsilon0", "truncation_fraction", "max_boxes",
            "max_depth", "seed", "workers", "samples", "directions", "sigma",
            "epsilon_w", "alpha0", "alpha_max", "gamma", "theta",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }

    #[test]
    fn csv_rendering_has_matching_arity() {
        let report = sample_report();
        let csv = to_csv(&report);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        let header_cols = lines[0].split(',').count();
        assert_eq!(lines[1].split(',').count(), header_cols);

        let bench = RunReport::new(
            "bench",
            "ssmt",
            ConfigEcho::from(&SolveConfig::default()),
            ReportResult::Bench {
                suite: "ssmt".into(),
                rows: vec![BenchRow {
                    id: "phi1".into(),
                    lower_bound: 0.308,
                    x_plus: Some(vec![-0.45]),
                    wall_time_s: 1.5,
                    known_value: Some(0.309),
                    gap: Some(0.001),
                    mc_estimate: None,
                    mc_radius: None,
                    sound_vs_mc: None,
                    converged: true,
                }],
            },
        );
        let csv = to_csv(&bench);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("id,lower_bound,x_plus,wall_time_s,known_value,gap"));
        assert_eq!(
            lines[1].split(',').count(),
            lines[0].split(',').count()
        );
    }

    #[test]
    fn timestamp_is_rfc3339() {
        let report = sample_report();
        assert!(chrono::DateTime::parse_from_rfc3339(&report.timestamp).is_ok());
    }
}
