//! Adaptive-step-size stochastic descent on the expected violation loss
//! `W(x) = E_Y[1_{¬phi}(x, Y)]`.
//!
//! Each cycle estimates a smoothed gradient `g_k`, proposes
//! `x_k − α_k·g_k`, and accepts iff the proposal stays in the parameter
//! domain and passes a noise-slackened Armijo test
//!
//! ```text
//! W̃(x_k⁺) ≤ W̃(x_k) − α_k·θ·‖g_k‖² + 2ε_W
//! ```
//!
//! with fresh sample sets for every estimate. Acceptance grows the step
//! size by `1/γ` (capped at `α_max`); rejection shrinks it by `γ` and keeps
//! the iterate. The loop runs exactly `k_max` cycles — no early stopping —
//! and returns the final iterate; callers wanting the best-seen point can
//! recover it from the trace.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::Problem;
use crate::interval::IntervalBox;
use crate::oracle::{estimate_grad, estimate_w, IndicatorLoss, LossEvaluator, OracleConfig};

/// Step-size schedule and acceptance-test parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AloeParams {
    /// Initial step size.
    pub alpha0: f64,
    /// Step-size cap.
    pub alpha_max: f64,
    /// Step decay/growth ratio in (0, 1).
    pub gamma: f64,
    /// Armijo sufficient-decrease constant in (0, 1).
    pub theta: f64,
    /// Oracle noise slack in the acceptance test (2·epsilon_w of headroom);
    /// zero gives plain Armijo and is allowed for noiseless losses.
    pub epsilon_w: f64,
    /// Number of proposal/accept cycles to run.
    pub k_max: usize,
}

impl Default for AloeParams {
    fn default() -> Self {
        AloeParams {
            alpha0: 1.0,
            alpha_max: 4.0,
            gamma: 0.8,
            theta: 0.2,
            epsilon_w: 0.03,
            k_max: 50,
        }
    }
}

impl AloeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha0 > 0.0 && self.alpha0 < self.alpha_max) {
            return Err(Error::config(format!(
                "need 0 < alpha0 < alpha_max, got alpha0 = {}, alpha_max = {}",
                self.alpha0, self.alpha_max
            )));
        }
        if !self.alpha_max.is_finite() {
            return Err(Error::config("alpha_max must be finite"));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::config(format!(
                "gamma must lie in (0, 1), got {}",
                self.gamma
            )));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::config(format!(
                "theta must lie in (0, 1), got {}",
                self.theta
            )));
        }
        if !(self.epsilon_w >= 0.0 && self.epsilon_w.is_finite()) {
            return Err(Error::config(format!(
                "epsilon_w must be nonnegative and finite, got {}",
                self.epsilon_w
            )));
        }
        Ok(())
    }
}

/// One proposal/accept cycle, as recorded in the trace.
#[derive(Clone, Debug, PartialEq)]
pub struct AloeStep {
    pub k: usize,
    /// Iterate at the start of the cycle.
    pub x: Vec<f64>,
    /// Step size used for the proposal.
    pub alpha: f64,
    pub grad_norm: f64,
    pub proposal: Vec<f64>,
    /// Fresh loss estimate at `x`.
    pub w_current: f64,
    /// Fresh loss estimate at the proposal.
    pub w_proposal: f64,
    /// Whether the proposal lies in the parameter domain.
    pub in_domain: bool,
    pub accepted: bool,
}

pub type AloeTrace = Vec<AloeStep>;

/// Descent over an abstract loss on an explicit domain box. Exposed so
/// tests can drive the loop with analytic losses; solver paths use
/// [`aloe_run`].
pub fn aloe_core(
    loss: &dyn LossEvaluator,
    domain: &IntervalBox,
    x0: &[f64],
    params: &AloeParams,
    oracle_cfg: &OracleConfig,
    rng: &mut dyn RngCore,
) -> (Vec<f64>, AloeTrace) {
    assert_eq!(x0.len(), loss.dim(), "x0 dimension mismatch");
    let mut x = x0.to_vec();
    let mut alpha = params.alpha0;
    let mut trace = Vec::with_capacity(params.k_max);
    for k in 0..params.k_max {
        let grad = estimate_grad(loss, &x, oracle_cfg, rng);
        let grad_sq: f64 = grad.iter().map(|g| g * g).sum();
        let proposal: Vec<f64> = x
            .iter()
            .zip(&grad)
            .map(|(xi, gi)| xi - alpha * gi)
            .collect();
        let w_current = estimate_w(loss, &x, oracle_cfg.n_samples, rng);
        let w_proposal = estimate_w(loss, &proposal, oracle_cfg.n_samples, rng);
        let in_domain = domain.contains(&proposal);
        let sufficient_decrease =
            w_proposal <= w_current - alpha * params.theta * grad_sq + 2.0 * params.epsilon_w;
        let accepted = in_domain && sufficient_decrease;
        trace.push(AloeStep {
            k,
            x: x.clone(),
            alpha,
            grad_norm: grad_sq.sqrt(),
            proposal: proposal.clone(),
            w_current,
            w_proposal,
            in_domain,
            accepted,
        });
        if accepted {
            x = proposal;
            alpha = (alpha / params.gamma).min(params.alpha_max);
        } else {
            alpha *= params.gamma;
        }
    }
    (x, trace)
}

/// Runs the descent loop on a problem's violation indicator from `x0`.
/// Errors if `x0` violates the declared domains or a config is invalid.
pub fn aloe_run(
    problem: &Problem,
    x0: &[f64],
    params: &AloeParams,
    oracle_cfg: &OracleConfig,
    rng: &mut dyn RngCore,
) -> Result<(Vec<f64>, AloeTrace)> {
    params.validate()?;
    oracle_cfg.validate()?;
    problem.check_point(x0)?;
    let loss = IndicatorLoss::new(problem);
    let domain = problem.domain_box();
    Ok(aloe_core(&loss, &domain, x0, params, oracle_cfg, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::{certify_lower_bound, CertifyConfig};
    use crate::interval::Interval;
    use crate::parse::parse_problem_named;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const PHI1: &str = "\
exists x in [-1, 1];
rand y ~ uniform(-1, 1);
constraint x^2 + y^2 <= 1 and (y >= 1/2 or y >= 1/2*x + 1/2);
";

    struct SquaredNorm(usize);
    impl LossEvaluator for SquaredNorm {
        fn dim(&self) -> usize {
            self.0
        }
        fn sample_loss(&self, x: &[f64], _rng: &mut dyn RngCore) -> f64 {
            x.iter().map(|v| v * v).sum()
        }
    }

    struct Constant(f64);
    impl LossEvaluator for Constant {
        fn dim(&self) -> usize {
            2
        }
        fn sample_loss(&self, _x: &[f64], _rng: &mut dyn RngCore) -> f64 {
            self.0
        }
    }

    fn square_domain(half: f64) -> IntervalBox {
        IntervalBox::new(vec![
            Interval::new(-half, half).unwrap(),
            Interval::new(-half, half).unwrap(),
        ])
        .unwrap()
    }

    // "noiseless" refers to the loss (deterministic, one sample suffices);
    // the config-level epsilon_w is plumbing and must stay positive — the
    // Armijo slack is AloeParams::epsilon_w
    fn noiseless_cfg(dirs: usize) -> OracleConfig {
        OracleConfig {
            n_samples: 1,
            n_directions: dirs,
            smoothing_radius: 1e-3,
            ..OracleConfig::default()
        }
    }

    #[test]
    fn quadratic_descent_converges() {
        let loss = SquaredNorm(2);
        let params = AloeParams {
            epsilon_w: 0.0,
            ..AloeParams::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let (x, trace) = aloe_core(
            &loss,
            &square_domain(10.0),
            &[5.0, 5.0],
            &params,
            &noiseless_cfg(500),
            &mut rng,
        );
        assert_eq!(trace.len(), 50);
        let norm = (x[0] * x[0] + x[1] * x[1]).sqrt();
        assert!(norm <= 0.1, "final iterate {x:?}, norm {norm}");
    }

    #[test]
    fn constant_loss_is_a_fixed_point_with_growing_step() {
        let loss = Constant(0.4);
        let params = AloeParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x0 = [1.5, -2.0];
        let (x, trace) = aloe_core(
            &loss,
            &square_domain(10.0),
            &x0,
            &params,
            &OracleConfig::default(),
            &mut rng,
        );
        assert_eq!(x, x0.to_vec());
        for step in &trace {
            assert!(step.accepted, "zero gradient always passes with slack");
            assert_eq!(step.grad_norm, 0.0);
            assert_eq!(step.proposal, x0.to_vec());
        }
        // the step ladder saturates: alpha0 / gamma^k capped at alpha_max
        assert_eq!(trace.last().unwrap().alpha, params.alpha_max);
    }

    #[test]
    fn step_size_dynamics_follow_the_schedule() {
        let p = parse_problem_named(PHI1, "phi1").unwrap();
        let params = AloeParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let (_, trace) = aloe_run(&p, &[0.9], &params, &OracleConfig::default(), &mut rng).unwrap();
        assert_eq!(trace.len(), params.k_max);
        let mut saw_accept = false;
        let mut saw_reject = false;
        for pair in trace.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if a.accepted {
                saw_accept = true;
                assert_eq!(b.alpha, (a.alpha / params.gamma).min(params.alpha_max));
                assert_eq!(b.x, a.proposal);
            } else {
                saw_reject = true;
                assert_eq!(b.alpha, params.gamma * a.alpha);
                assert_eq!(b.x, a.x, "rejected step must keep the iterate");
            }
        }
        assert!(saw_accept && saw_reject, "trace should exercise both branches");
        // accepted proposals stay inside the declared domain
        let domain = p.domain_box();
        for step in &trace {
            if step.accepted {
                assert!(domain.contains(&step.proposal));
            }
        }
    }

    #[test]
    fn noiseless_accepted_steps_satisfy_armijo_exactly() {
        let loss = SquaredNorm(2);
        let params = AloeParams {
            epsilon_w: 0.0,
            ..AloeParams::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let (_, trace) = aloe_core(
            &loss,
            &square_domain(10.0),
            &[3.0, -4.0],
            &params,
            &noiseless_cfg(200),
            &mut rng,
        );
        for step in &trace {
            if step.accepted {
                let margin =
                    step.w_current - step.alpha * params.theta * step.grad_norm.powi(2);
                assert!(
                    step.w_proposal <= margin + 1e-12,
                    "k={}: {} > {}",
                    step.k,
                    step.w_proposal,
                    margin
                );
            }
        }
    }

    #[test]
    fn out_of_domain_proposals_are_rejected() {
        // tiny domain, big steps: proposals frequently exit and must be
        // rejected even when the Armijo value test would pass
        let loss = SquaredNorm(2);
        let params = AloeParams {
            alpha0: 3.9,
            epsilon_w: 0.0,
            ..AloeParams::default()
        };
        let domain = square_domain(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let (x, trace) = aloe_core(&loss, &domain, &[0.9, 0.9], &params, &noiseless_cfg(100), &mut rng);
        assert!(domain.contains(&x), "iterate never leaves the domain");
        assert!(
            trace.iter().any(|s| !s.in_domain && !s.accepted),
            "expected at least one out-of-domain rejection"
        );
    }

    #[test]
    fn descent_from_a_bad_start_improves_the_certified_bound() {
        // start in the V = 0 region; descent should carry the iterate into
        // certifiably positive territory in most seeded runs
        let p = parse_problem_named(PHI1, "phi1").unwrap();
        let params = AloeParams::default();
        let oracle_cfg = OracleConfig::default();
        let certify_cfg = CertifyConfig::default();
        let base = certify_lower_bound(&p, &[0.9], &certify_cfg).unwrap();
        let mut not_worse = 0;
        let mut clearly_positive = 0;
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let (x_plus, _) = aloe_run(&p, &[0.9], &params, &oracle_cfg, &mut rng).unwrap();
            let r = certify_lower_bound(&p, &x_plus, &certify_cfg).unwrap();
            if r.lower_bound >= base.lower_bound - 0.02 {
                not_worse += 1;
            }
            if r.lower_bound > 0.05 {
                clearly_positive += 1;
            }
        }
        assert!(not_worse >= 8, "only {not_worse}/10 runs avoided regressing");
        assert!(
            clearly_positive >= 6,
            "only {clearly_positive}/10 runs escaped the zero region"
        );
    }

    #[test]
    fn identical_seeds_give_identical_traces() {
        let p = parse_problem_named(PHI1, "phi1").unwrap();
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(21);
            aloe_run(
                &p,
                &[0.5],
                &AloeParams::default(),
                &OracleConfig::default(),
                &mut rng,
            )
            .unwrap()
        };
        let (xa, ta) = run();
        let (xb, tb) = run();
        assert_eq!(xa, xb);
        assert_eq!(ta, tb);
    }

    #[test]
    fn rejects_bad_starts_and_params() {
        let p = parse_problem_named(PHI1, "phi1").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        assert!(matches!(
            aloe_run(
                &p,
                &[1.5],
                &AloeParams::default(),
                &OracleConfig::default(),
                &mut rng
            ),
            Err(Error::OutsideDomain(_))
        ));
        for bad in [
            AloeParams {
                alpha0: 0.0,
                ..AloeParams::default()
            },
            AloeParams {
                alpha0: 5.0, // above alpha_max
                ..AloeParams::default()
            },
            AloeParams {
                gamma: 1.0,
                ..AloeParams::default()
            },
            AloeParams {
                theta: 0.0,
                ..AloeParams::default()
            },
            AloeParams {
                epsilon_w: -0.1,
                ..AloeParams::default()
            },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn k_max_zero_returns_the_start_point() {
        let p = parse_problem_named(PHI1, "phi1").unwrap();
        let params = AloeParams {
            k_max: 0,
            ..AloeParams::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let (x, trace) =
            aloe_run(&p, &[0.3], &params, &OracleConfig::default(), &mut rng).unwrap();
        assert_eq!(x, vec![0.3]);
        assert!(trace.is_empty());
    }
}
