//! Multi-start driver: repeated descent runs, each followed by
//! certification, keeping the best certified bound.
//!
//! Every trial gets its own counter-derived rng stream, so results are
//! bit-identical for a given seed no matter how many worker threads run
//! the trials, and a longer run extends a shorter one with the same seed
//! (trial `m` draws the same numbers in both).

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::aloe::{aloe_run, AloeParams};
use crate::certify::{certify_lower_bound, CertifyConfig};
use crate::error::{Error, Result};
use crate::formula::Problem;
use crate::oracle::OracleConfig;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    /// Number of independent restarts.
    pub trials: usize,
    pub aloe: AloeParams,
    pub oracle: OracleConfig,
    pub certify: CertifyConfig,
    pub seed: u64,
    /// Worker threads for trial-level parallelism (1 = sequential).
    pub workers: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            trials: 30,
            aloe: AloeParams::default(),
            oracle: OracleConfig::default(),
            certify: CertifyConfig::default(),
            seed: 0,
            workers: 1,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials must be at least 1"));
        }
        if self.workers == 0 {
            return Err(Error::config("workers must be at least 1"));
        }
        self.aloe.validate()?;
        self.oracle.validate()?;
        self.certify.validate()
    }
}

/// One restart: where it started, where descent ended, and what the
/// certifier proved there.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub x0: Vec<f64>,
    pub x_plus: Vec<f64>,
    pub lower_bound: f64,
    /// Whether certification converged within its budget and caps.
    pub converged: bool,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    /// Best certified candidate; absent when no trial certified a
    /// positive bound.
    pub x_plus: Option<Vec<f64>>,
    /// Highest certified lower bound across trials (0 when none).
    pub lower_bound: f64,
    /// Index of the winning trial, if any.
    pub best_trial: Option<usize>,
    pub seed: u64,
    pub wall_time_s: f64,
    pub per_trial: Vec<TrialRecord>,
}

fn run_trial(problem: &Problem, cfg: &SolveConfig, trial: usize) -> Result<TrialRecord> {
    let start = Instant::now();
    // stream 0 is reserved; trial m uses stream m+1 of the seeded cipher
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial as u64 + 1);
    let x0 = problem.sampling_box().sample(&mut rng)?;
    let (x_plus, _trace) = aloe_run(problem, &x0, &cfg.aloe, &cfg.oracle, &mut rng)?;
    let cert = certify_lower_bound(problem, &x_plus, &cfg.certify)?;
    Ok(TrialRecord {
        trial,
        x0,
        x_plus,
        lower_bound: cert.lower_bound,
        converged: cert.converged,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Runs `cfg.trials` descent+certify restarts and keeps the best bound.
/// Ties go to the earliest trial; apart from wall-clock fields the result
/// is a deterministic function of (problem, config, seed).
pub fn solve(problem: &Problem, cfg: &SolveConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let start = Instant::now();
    let per_trial: Vec<TrialRecord> = if cfg.workers == 1 {
        (0..cfg.trials)
            .map(|m| run_trial(problem, cfg, m))
            .collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::config(format!("cannot build worker pool: {e}")))?;
        pool.install(|| {
            use rayon::prelude::*;
            (0..cfg.trials)
                .into_par_iter()
                .map(|m| run_trial(problem, cfg, m))
                .collect::<Result<_>>()
        })?
    };

    // reduction in trial order: strictly-better wins, so the earliest of
    // equal bounds is kept — identical for any worker count
    let mut lower_bound = 0.0f64;
    let mut best_trial = None;
    for rec in &per_trial {
        if rec.lower_bound > lower_bound {
            lower_bound = rec.lower_bound;
            best_trial = Some(rec.trial);
        }
    }
    let x_plus = best_trial.map(|m| per_trial[m].x_plus.clone());
    Ok(SolveResult {
        x_plus,
        lower_bound,
        best_trial,
        seed: cfg.seed,
        wall_time_s: start.elapsed().as_secs_f64(),
        per_trial,
    })
}
