//! Programmatic constructors for the bundled benchmark problems: four
//! small SSMT formulas with hand-analyzable optima, and a family of 2D
//! trajectory-planning instances under wind and propulsion uncertainty.
//!
//! The constructors are the source of truth; the `.ssc` files shipped
//! under `problems/` are their rendered form and a test pins the two
//! representations to parse identically.

use serde::{Deserialize, Serialize};

use crate::dist::DistributionSpec;
use crate::error::{Error, Result};
use crate::formula::{DetVar, Formula, Problem, RandVar};
use crate::interval::Interval;
use crate::poly::Polynomial;

/// Identifies one of the four fixed SSMT benchmark problems.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SsmtId {
    Phi1,
    Phi2,
    Phi3,
    Phi4,
}

impl SsmtId {
    pub const ALL: [SsmtId; 4] = [SsmtId::Phi1, SsmtId::Phi2, SsmtId::Phi3, SsmtId::Phi4];

    pub fn name(self) -> &'static str {
        match self {
            SsmtId::Phi1 => "phi1",
            SsmtId::Phi2 => "phi2",
            SsmtId::Phi3 => "phi3",
            SsmtId::Phi4 => "phi4",
        }
    }

    /// Known optimal satisfaction probability, where a closed form exists.
    pub fn known_value(self) -> f64 {
        match self {
            SsmtId::Phi1 => (5.0f64.sqrt() - 1.0) / 4.0,
            SsmtId::Phi2 => 0.8,
            SsmtId::Phi3 => 1.0,
            SsmtId::Phi4 => 23.0 / 32.0,
        }
    }
}

impl std::str::FromStr for SsmtId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phi1" => Ok(SsmtId::Phi1),
            "phi2" => Ok(SsmtId::Phi2),
            "phi3" => Ok(SsmtId::Phi3),
            "phi4" => Ok(SsmtId::Phi4),
            other => Err(Error::config(format!("unknown SSMT problem '{other}'"))),
        }
    }
}

fn det(name: &str, lo: f64, hi: f64) -> DetVar {
    DetVar {
        name: name.into(),
        domain: Interval::new(lo, hi).unwrap(),
        sample: None,
    }
}

fn det_unbounded(name: &str, sample_lo: f64, sample_hi: f64) -> DetVar {
    DetVar {
        name: name.into(),
        domain: Interval::all(),
        sample: Some(Interval::new(sample_lo, sample_hi).unwrap()),
    }
}

fn rand(name: &str, dist: DistributionSpec) -> RandVar {
    RandVar {
        name: name.into(),
        dist,
    }
}

/// Builds one of the four SSMT benchmarks.
pub fn make_ssmt(id: SsmtId) -> Problem {
    match id {
        SsmtId::Phi1 => {
            // exists x in [-1,1], y ~ U(-1,1):
            //   x^2 + y^2 <= 1  and  (y >= 1/2 or y >= x/2 + 1/2)
            let n = 2;
            let x = Polynomial::var(n, 0);
            let y = Polynomial::var(n, 1);
            let one = Polynomial::constant(n, 1.0);
            let half = Polynomial::constant(n, 0.5);
            let circle = one.sub(&x.pow(2)).sub(&y.pow(2));
            let f = Formula::and(vec![
                Formula::atom(circle, false),
                Formula::or(vec![
                    Formula::atom(y.sub(&half), false),
                    Formula::atom(y.sub(&x.scale(0.5)).sub(&half), false),
                ]),
            ]);
            Problem::new(
                "phi1",
                vec![det("x", -1.0, 1.0)],
                vec![rand("y", DistributionSpec::uniform(-1.0, 1.0).unwrap())],
                f,
            )
        }
        SsmtId::Phi2 => {
            // exists x, w in [0,3], y ~ U(0,5), z ~ U(0,4):
            //   (x+y >= z or w+y >= z) and x-y <= z and w-y <= z
            let n = 4;
            let x = Polynomial::var(n, 0);
            let w = Polynomial::var(n, 1);
            let y = Polynomial::var(n, 2);
            let z = Polynomial::var(n, 3);
            let f = Formula::and(vec![
                Formula::or(vec![
                    Formula::atom(x.add(&y).sub(&z), false),
                    Formula::atom(w.add(&y).sub(&z), false),
                ]),
                Formula::atom(z.sub(&x.sub(&y)), false),
                Formula::atom(z.sub(&w.sub(&y)), false),
            ]);
            Problem::new(
                "phi2",
                vec![det("x", 0.0, 3.0), det("w", 0.0, 3.0)],
                vec![
                    rand("y", DistributionSpec::uniform(0.0, 5.0).unwrap()),
                    rand("z", DistributionSpec::uniform(0.0, 4.0).unwrap()),
                ],
                f,
            )
        }
        SsmtId::Phi3 => {
            // exists x in [-1,1], a, b unbounded (sampled in [-5,5]),
            // y ~ N(0,1):
            //   (x^2 <= 1/9 or a^3 + 2b >= 0) and (y > 0 or a^3 + 2b < -1)
            let n = 4;
            let x = Polynomial::var(n, 0);
            let a = Polynomial::var(n, 1);
            let b = Polynomial::var(n, 2);
            let y = Polynomial::var(n, 3);
            let cube = a.pow(3).add(&b.scale(2.0));
            let f = Formula::and(vec![
                Formula::or(vec![
                    Formula::atom(Polynomial::constant(n, 1.0 / 9.0).sub(&x.pow(2)), false),
                    Formula::atom(cube.clone(), false),
                ]),
                Formula::or(vec![
                    Formula::atom(y, true),
                    Formula::atom(Polynomial::constant(n, -1.0).sub(&cube), true),
                ]),
            ]);
            Problem::new(
                "phi3",
                vec![
                    det("x", -1.0, 1.0),
                    det_unbounded("a", -5.0, 5.0),
                    det_unbounded("b", -5.0, 5.0),
                ],
                vec![rand("y", DistributionSpec::normal(0.0, 1.0).unwrap())],
                f,
            )
        }
        SsmtId::Phi4 => {
            // exists x in [-10,10], y ~ U(5,25), z ~ U(-10,10):
            //   (x > 3 or y < 1) and (z > x^2 + 2 or y <= 20)
            //   and (x^2 > 49 or y > 7x) and (x < 6 or y >= z)
            let n = 3;
            let x = Polynomial::var(n, 0);
            let y = Polynomial::var(n, 1);
            let z = Polynomial::var(n, 2);
            let c = |v: f64| Polynomial::constant(n, v);
            let f = Formula::and(vec![
                Formula::or(vec![
                    Formula::atom(x.sub(&c(3.0)), true),
                    Formula::atom(c(1.0).sub(&y), true),
                ]),
                Formula::or(vec![
                    Formula::atom(z.sub(&x.pow(2)).sub(&c(2.0)), true),
                    Formula::atom(c(20.0).sub(&y), false),
                ]),
                Formula::or(vec![
                    Formula::atom(x.pow(2).sub(&c(49.0)), true),
                    Formula::atom(y.sub(&x.scale(7.0)), true),
                ]),
                Formula::or(vec![
                    Formula::atom(c(6.0).sub(&x), true),
                    Formula::atom(y.sub(&z), false),
                ]),
            ]);
            Problem::new(
                "phi4",
                vec![det("x", -10.0, 10.0)],
                vec![
                    rand("y", DistributionSpec::uniform(5.0, 25.0).unwrap()),
                    rand("z", DistributionSpec::uniform(-10.0, 10.0).unwrap()),
                ],
                f,
            )
        }
    }
    .expect("benchmark problems are valid by construction")
}

/// A circular no-go region for the trajectory instances.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstacleSpec {
    pub center: (f64, f64),
    pub radius: f64,
}

impl ObstacleSpec {
    pub fn new(cx: f64, cy: f64, radius: f64) -> Self {
        ObstacleSpec {
            center: (cx, cy),
            radius,
        }
    }
}

/// Shape of one trajectory-planning instance: `steps` waypoints in a
/// square domain, each step bounded by `step_length` scaled by a random
/// efficiency factor, with additive Gaussian position noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    pub steps: usize,
    pub obstacles: Vec<ObstacleSpec>,
    /// Nominal step length `L`.
    pub step_length: f64,
    /// Waypoint coordinates live in `[-domain_halfwidth, domain_halfwidth]`.
    pub domain_halfwidth: f64,
    /// Restarts draw initial waypoints from the smaller window
    /// `[-sample_halfwidth, sample_halfwidth]` (the descent itself may
    /// leave it). Uniform draws over the full domain almost surely give
    /// step lengths beyond `1.2·step_length`, where the reachability
    /// indicator is constantly violated, gradients vanish, and every
    /// restart stalls on the flat plateau; a window of `0.4·step_length`
    /// keeps every sampled step within reach of the efficiency factor's
    /// upper range, so each restart starts on informative ground.
    pub sample_halfwidth: f64,
    /// Standard deviation of the additive position noise. The source
    /// experiments write `N(0, 0.5)` without saying whether 0.5 is the
    /// variance or the standard deviation; we read it as the standard
    /// deviation and keep it configurable so the other reading is one
    /// field away.
    pub noise_std: f64,
}

impl TrajectoryConfig {
    pub fn new(steps: usize, obstacles: Vec<ObstacleSpec>) -> Self {
        TrajectoryConfig {
            steps,
            obstacles,
            step_length: 3.0,
            domain_halfwidth: 12.0,
            sample_halfwidth: 1.2,
            noise_std: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::config("trajectory needs at least one step"));
        }
        if !(self.step_length > 0.0) {
            return Err(Error::config("step_length must be positive"));
        }
        if !(self.domain_halfwidth > 0.0) {
            return Err(Error::config("domain_halfwidth must be positive"));
        }
        if !(self.sample_halfwidth > 0.0) {
            return Err(Error::config("sample_halfwidth must be positive"));
        }
        if self.sample_halfwidth > self.domain_halfwidth {
            return Err(Error::config(
                "sample_halfwidth must not exceed domain_halfwidth",
            ));
        }
        if !(self.noise_std > 0.0) {
            return Err(Error::config("noise_std must be positive"));
        }
        if let Some(o) = self.obstacles.iter().find(|o| !(o.radius > 0.0)) {
            return Err(Error::config(format!(
                "obstacle radius must be positive, got {}",
                o.radius
            )));
        }
        Ok(())
    }
}

/// Builds the trajectory-planning problem for `cfg` under the given name.
///
/// Variables are the waypoint coordinates `px1, py1, …, pxN, pyN` followed
/// by the noise components `w1, w2` (additive, normal) and `w3` (step
/// efficiency, uniform on `[0.8, 1.2]`). The formula is the conjunction,
/// over every step `i` and obstacle `m`, of
///
/// * safety: `(px_i + w1 − ox_m)² + (py_i + w2 − oy_m)² − R_m² ≥ 0`, and
/// * reachability: `(L·w3)² − ‖p_i − p_{i−1}‖² ≥ 0`, with `p_0 = (0,0)`.
///
/// Waypoints carry a sampling override of half-width
/// `cfg.sample_halfwidth` (see [`TrajectoryConfig`]) so restarts begin
/// where the reachability constraint has positive probability.
pub fn make_trajectory_named(name: impl Into<String>, cfg: &TrajectoryConfig) -> Result<Problem> {
    cfg.validate()?;
    let steps = cfg.steps;
    let n = 2 * steps + 3;
    let w1 = Polynomial::var(n, 2 * steps);
    let w2 = Polynomial::var(n, 2 * steps + 1);
    let w3 = Polynomial::var(n, 2 * steps + 2);
    let px = |i: usize| Polynomial::var(n, 2 * (i - 1));
    let py = |i: usize| Polynomial::var(n, 2 * (i - 1) + 1);
    let c = |v: f64| Polynomial::constant(n, v);

    let mut atoms = Vec::with_capacity(steps * (cfg.obstacles.len() + 1));
    for i in 1..=steps {
        for ob in &cfg.obstacles {
            let dx = px(i).add(&w1).sub(&c(ob.center.0));
            let dy = py(i).add(&w2).sub(&c(ob.center.1));
            let clearance = dx.pow(2).add(&dy.pow(2)).sub(&c(ob.radius * ob.radius));
            atoms.push(Formula::atom(clearance, false));
        }
        let (sx, sy) = if i == 1 {
            (px(1), py(1))
        } else {
            (px(i).sub(&px(i - 1)), py(i).sub(&py(i - 1)))
        };
        let reach = w3
            .pow(2)
            .scale(cfg.step_length * cfg.step_length)
            .sub(&sx.pow(2))
            .sub(&sy.pow(2));
        atoms.push(Formula::atom(reach, false));
    }

    let mut det_vars = Vec::with_capacity(2 * steps);
    let waypoint = |name: String| {
        let mut v = det(&name, -cfg.domain_halfwidth, cfg.domain_halfwidth);
        if cfg.sample_halfwidth < cfg.domain_halfwidth {
            v.sample =
                Some(Interval::new(-cfg.sample_halfwidth, cfg.sample_halfwidth).unwrap());
        }
        v
    };
    for i in 1..=steps {
        det_vars.push(waypoint(format!("px{i}")));
        det_vars.push(waypoint(format!("py{i}")));
    }
    let rand_vars = vec![
        rand("w1", DistributionSpec::normal(0.0, cfg.noise_std)?),
        rand("w2", DistributionSpec::normal(0.0, cfg.noise_std)?),
        rand("w3", DistributionSpec::uniform(0.8, 1.2)?),
    ];
    Problem::new(name, det_vars, rand_vars, Formula::and(atoms))
}

/// Builds a trajectory instance named `"trajectory"`.
pub fn make_trajectory(cfg: &TrajectoryConfig) -> Result<Problem> {
    make_trajectory_named("trajectory", cfg)
}

/// The twelve bundled trajectory-planning instances (name, configuration),
/// ordered t1–t12; the `trajectory-full` benchmark suite runs them all.
pub fn trajectory_instances() -> Vec<(String, TrajectoryConfig)> {
    let specs: [(usize, &[(f64, f64, f64)]); 12] = [
        (4, &[(6.0, 2.0, 2.5)]),
        (4, &[(2.0, -2.0, 2.0), (5.0, 5.0, 3.0)]),
        (4, &[(1.0, 1.0, 1.0), (4.0, -4.0, 2.0), (-7.0, 1.0, 1.5)]),
        (
            4,
            &[
                (2.0, -7.0, 2.5),
                (-5.0, -4.0, 2.0),
                (-8.0, 2.0, 2.0),
                (6.0, 3.0, 1.0),
            ],
        ),
        (5, &[(5.0, 5.0, 2.0)]),
        (5, &[(2.0, 3.0, 2.0), (5.0, 4.0, 3.0)]),
        (5, &[(-3.0, 3.0, 2.0), (6.0, 1.0, 2.0), (1.0, -6.0, 2.0)]),
        (
            5,
            &[
                (2.0, 2.0, 3.0),
                (8.0, 3.0, 2.0),
                (5.0, 8.0, 2.5),
                (-2.0, 8.0, 1.5),
            ],
        ),
        (6, &[(5.0, 5.0, 3.0)]),
        (6, &[(3.0, 3.0, 2.0), (6.0, 6.0, 2.5)]),
        (6, &[(8.0, 3.0, 2.0), (-5.0, -6.0, 3.0), (1.0, -2.0, 3.0)]),
        (
            6,
            &[
                (2.0, -8.0, 2.0),
                (-5.0, -3.0, 1.0),
                (-8.0, -3.0, 3.0),
                (4.0, 5.0, 1.5),
            ],
        ),
    ];
    specs
        .iter()
        .enumerate()
        .map(|(idx, (steps, obs))| {
            let obstacles = obs
                .iter()
                .map(|&(cx, cy, r)| ObstacleSpec::new(cx, cy, r))
                .collect();
            (format!("t{}", idx + 1), TrajectoryConfig::new(*steps, obstacles))
        })
        .collect()
}
