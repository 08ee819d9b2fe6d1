//! Certified lower bounds on satisfaction probabilities via interval
//! branch and prune.
//!
//! Given a candidate parameter vector `x`, the formula is specialized to a
//! formula over the random variables alone and the probability
//! `V(x) = P_y[phi(x, y)]` is bounded from below by
//!
//! 1. **truncation** — replace unbounded supports with a finite box that
//!    carries all but a set-aside tail budget,
//! 2. **branch and prune** — classify sub-boxes with outward-rounded
//!    interval evaluation (True / False / Unknown) and bisect the Unknown
//!    ones, highest probability mass first, and
//! 3. **mass integration** — sum the masses of boxes proven True.
//!
//! Every box proven True lies inside the satisfying set up to a Lebesgue
//! null set (strict versus non-strict boundaries), so the summed mass minus
//! a floating-point slack is a sound lower bound. When the loop drains the
//! Unknown mass below its share of the budget the bound is also tight:
//! `lower_bound ≥ V(x) − epsilon0`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::{box_mass, truncation_box, truncation_loss, DistributionSpec};
use crate::error::{Error, Result};
use crate::formula::{Problem, Ternary};
use crate::interval::IntervalBox;

/// Per-inner-box mass error allowance: a box mass is a product of CDF
/// differences, and each CDF evaluation is documented accurate to 1e-12
/// (module `dist`). The libm-backed CDFs are in truth accurate to roughly
/// 1e-15, so this fixed allowance dominates the real product error for any
/// dimension count this crate will meet.
const BOX_MASS_ERR: f64 = 2e-12;

/// Allowance per unbounded dimension for tail-quantile inversion error
/// (quantiles are Newton-polished to ~1e-10 in CDF units; see `dist`).
const QUANTILE_ERR: f64 = 1e-9;

/// Budget and resource caps for one certification run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyConfig {
    /// Total unsoundness budget: when converged, the reported bound is
    /// within `epsilon0` of the true probability.
    pub epsilon0: f64,
    /// Share of `epsilon0` spent on tail truncation (the rest limits the
    /// mass of boxes left Unknown).
    pub truncation_fraction: f64,
    /// Hard cap on the number of boxes classified.
    pub max_boxes: usize,
    /// Hard cap on bisection depth; boxes at the cap are frozen and
    /// counted as boundary mass.
    pub max_depth: u32,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig {
            epsilon0: 1e-3,
            truncation_fraction: 0.5,
            max_boxes: 500_000,
            max_depth: 64,
        }
    }
}

impl CertifyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon0 > 0.0 && self.epsilon0 < 1.0) {
            return Err(Error::config(format!(
                "epsilon0 must lie in (0, 1), got {}",
                self.epsilon0
            )));
        }
        if !(self.truncation_fraction > 0.0 && self.truncation_fraction < 1.0) {
            return Err(Error::config(format!(
                "truncation_fraction must lie in (0, 1), got {}",
                self.truncation_fraction
            )));
        }
        if self.max_boxes == 0 {
            return Err(Error::config("max_boxes must be positive"));
        }
        if self.max_depth == 0 {
            return Err(Error::config("max_depth must be positive"));
        }
        Ok(())
    }
}

/// Outcome of a certification run. All masses are probabilities under the
/// joint distribution of the random variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationResult {
    /// Certified: `P_y[phi(x, y)] >= lower_bound`, converged or not.
    pub lower_bound: f64,
    /// `min(1, lower_bound + boundary_mass + truncated_budget + fp_slack)`;
    /// when converged this is also an upper bound on the probability.
    pub local_upper_bound: f64,
    /// Mass of boxes still Unknown at stop (both queued and frozen).
    pub boundary_mass: f64,
    /// Upper bound on the mass discarded by tail truncation (zero when all
    /// supports are bounded).
    pub truncated_budget: f64,
    /// Floating-point slack subtracted from the inner mass sum.
    pub fp_slack: f64,
    /// Raw inner mass before the slack subtraction.
    pub inner_mass: f64,
    /// Mass of boxes proven entirely non-satisfying.
    pub discarded_mass: f64,
    pub inner_count: usize,
    pub boundary_count: usize,
    pub discarded_count: usize,
    /// Total boxes classified (pops from the worklist).
    pub boxes_processed: usize,
    pub max_depth_reached: u32,
    /// True iff the Unknown mass fell below its budget share before any
    /// cap was hit.
    pub converged: bool,
}

/// Worklist entry; ordered by descending mass, ties by insertion order so
/// runs are deterministic.
struct Entry {
    mass: f64,
    seq: u64,
    depth: u32,
    boxy: IntervalBox,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.seq == other.seq
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.mass
            .total_cmp(&other.mass)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Picks the bisection dimension: the largest width times marginal density
/// bound, ties broken by lowest index. Returns None when no dimension has
/// positive width (the box is a point and cannot be split).
fn split_dimension(dists: &[DistributionSpec], b: &IntervalBox) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, d) in dists.iter().enumerate() {
        let iv = b.dim(i);
        let w = iv.width();
        if w <= 0.0 {
            continue;
        }
        let score = w * d.density_sup(&iv);
        match best {
            Some((_, s)) if score <= s => {}
            _ => best = Some((i, score)),
        }
    }
    best.map(|(i, _)| i)
}

/// Computes a certified lower bound on `P_y[phi(x_plus, y)]`.
///
/// Errors when the config is invalid or `x_plus` violates the declared
/// domains; resource-cap exhaustion is not an error — the result is still
/// sound, just flagged `converged = false`.
pub fn certify_lower_bound(
    problem: &Problem,
    x_plus: &[f64],
    cfg: &CertifyConfig,
) -> Result<CertificationResult> {
    cfg.validate()?;
    problem.check_point(x_plus)?;
    let phi = problem.substitute(x_plus)?;
    let dists = problem.dists();

    let tail_budget = cfg.truncation_fraction * cfg.epsilon0;
    let boundary_budget = (1.0 - cfg.truncation_fraction) * cfg.epsilon0;
    let b0 = truncation_box(&dists, tail_budget)?;
    let truncated_budget = truncation_loss(&dists, tail_budget);
    let unbounded_dims = dists
        .iter()
        .filter(|d| d.bounded_support().is_none())
        .count();
    let quantile_slack = 2.0 * unbounded_dims as f64 * QUANTILE_ERR;

    let mut heap = BinaryHeap::new();
    let root_mass = box_mass(&dists, &b0);
    heap.push(Entry {
        mass: root_mass,
        seq: 0,
        depth: 0,
        boxy: b0,
    });
    let mut seq = 1u64;

    // running totals; pending_mass is tracked incrementally for the stop
    // check and recomputed exactly from the heap at the end
    let mut pending_mass = root_mass;
    let mut frozen_mass = 0.0f64;
    let mut frozen_count = 0usize;
    let mut inner_mass = 0.0f64;
    let mut discarded_mass = 0.0f64;
    let mut inner_count = 0usize;
    let mut discarded_count = 0usize;
    let mut boxes_processed = 0usize;
    let mut max_depth_reached = 0u32;
    let mut converged = false;

    loop {
        // shave the stop threshold by the accumulated fp allowances so the
        // epsilon0 guarantee holds for the *true* unresolved mass
        let slack = (heap.len() + frozen_count) as f64 * BOX_MASS_ERR + quantile_slack;
        if pending_mass + frozen_mass <= boundary_budget - slack {
            converged = true;
            break;
        }
        if frozen_mass > boundary_budget - slack {
            break; // unsplittable mass alone exceeds the budget
        }
        if boxes_processed >= cfg.max_boxes {
            break;
        }
        let Some(entry) = heap.pop() else {
            break;
        };
        boxes_processed += 1;
        pending_mass -= entry.mass;
        match phi.eval_box(&entry.boxy) {
            Ternary::True => {
                inner_mass += entry.mass;
                inner_count += 1;
            }
            Ternary::False => {
                discarded_mass += entry.mass;
                discarded_count += 1;
            }
            Ternary::Unknown => {
                let split = if entry.depth >= cfg.max_depth {
                    None
                } else {
                    split_dimension(&dists, &entry.boxy)
                        .and_then(|dim| entry.boxy.bisect(dim).ok())
                };
                match split {
                    Some((left, right)) => {
                        let depth = entry.depth + 1;
                        max_depth_reached = max_depth_reached.max(depth);
                        for child in [left, right] {
                            let mass = box_mass(&dists, &child);
                            pending_mass += mass;
                            heap.push(Entry {
                                mass,
                                seq,
                                depth,
                                boxy: child,
                            });
                            seq += 1;
                        }
                    }
                    None => {
                        frozen_mass += entry.mass;
                        frozen_count += 1;
                    }
                }
            }
        }
    }

    let queued_mass: f64 = heap.iter().map(|e| e.mass).sum();
    let boundary_mass = queued_mass + frozen_mass;
    let boundary_count = heap.len() + frozen_count;
    let fp_slack = inner_count as f64 * BOX_MASS_ERR;
    let lower_bound = (inner_mass - fp_slack).max(0.0);
    let local_upper_bound =
        (lower_bound + boundary_mass + truncated_budget + fp_slack).min(1.0);

    Ok(CertificationResult {
        lower_bound,
        local_upper_bound,
        boundary_mass,
        truncated_budget,
        fp_slack,
        inner_mass,
        discarded_mass,
        inner_count,
        boundary_count,
        discarded_count,
        boxes_processed,
        max_depth_reached,
        converged,
    })
}

/// Plain Monte Carlo estimate of `P_y[phi(x, y)]` with a conservative
/// confidence radius `3·√(p̂(1−p̂)/n + 1/n)`; an independent statistical
/// cross-check for certified bounds.
pub fn mc_reference<R: Rng + ?Sized>(
    problem: &Problem,
    x: &[f64],
    n: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::config("mc_reference requires n >= 1"));
    }
    problem.check_point(x)?;
    let dists = problem.dists();
    let mut y = vec![0.0; dists.len()];
    let mut hits = 0usize;
    for _ in 0..n {
        for (j, d) in dists.iter().enumerate() {
            y[j] = d.sample(rng);
        }
        if problem.eval(x, &y) {
            hits += 1;
        }
    }
    let nf = n as f64;
    let est = hits as f64 / nf;
    let radius = 3.0 * (est * (1.0 - est) / nf + 1.0 / nf).sqrt();
    Ok((est, radius))
}
