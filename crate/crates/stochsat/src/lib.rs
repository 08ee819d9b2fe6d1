//! Stochastic constraint solving with certified probability bounds.
//!
//! Given a quantifier-free formula over polynomial inequalities in
//! deterministic parameters `x` and continuous random variables `y`, this
//! crate searches for parameter values maximizing the satisfaction
//! probability and certifies a rigorous lower bound on it:
//!
//! * a derivative-free stochastic descent loop ([`aloe`]) drives `x` toward
//!   high-probability regions using only Monte Carlo loss estimates, and
//! * an interval branch-and-prune pass ([`certify`]) turns the candidate
//!   into a sound probability bound via outward-rounded arithmetic.
//!
//! Problems are built programmatically ([`formula::Problem`], [`bench`]) or
//! parsed from the `.ssc` text format ([`parse`]).

pub mod aloe;
pub mod bench;
pub mod certify;
pub mod dist;
pub mod error;
pub mod formula;
pub mod interval;
pub mod oracle;
pub mod parse;
pub mod poly;
pub mod report;
pub mod solver;

pub use aloe::{aloe_core, aloe_run, AloeParams, AloeStep, AloeTrace};
pub use bench::{
    make_ssmt, make_trajectory, make_trajectory_named, trajectory_instances, ObstacleSpec, SsmtId,
    TrajectoryConfig,
};
pub use certify::{certify_lower_bound, mc_reference, CertificationResult, CertifyConfig};
pub use dist::DistributionSpec;
pub use error::{Error, Result};
pub use formula::{DetVar, Formula, Problem, RandVar, Ternary};
pub use interval::{Interval, IntervalBox};
pub use oracle::{
    epsilon_w_default, estimate_grad, estimate_w, IndicatorLoss, LossEvaluator, OracleConfig,
};
pub use parse::{parse_problem, parse_problem_named, to_dsl};
pub use poly::Polynomial;
pub use report::{
    to_csv, BenchRow, CertifyReport, ConfigEcho, ReportResult, RunReport, Versions,
    SCHEMA_VERSION,
};
pub use solver::{solve, SolveConfig, SolveResult, TrialRecord};
