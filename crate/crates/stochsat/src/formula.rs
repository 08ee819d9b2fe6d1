//! Quantifier-free constraint formulas over polynomial atoms, and the
//! problem container binding them to variable declarations.
//!
//! Every atom is normalized to `poly >= 0`; a `strict_origin` flag records
//! whether the user wrote a strict inequality. Since the random variables
//! are continuous, `{poly = 0}` carries no probability mass and the flag
//! does not change any satisfaction probability — it matters only when an
//! atom folds to a constant (no randomness involved), where the original
//! strictness decides the truth value.
//!
//! Negation is eliminated structurally: `not` flips atoms to their negated
//! polynomial (with the strictness toggled) and dualizes and/or, so the
//! evaluators only ever see positive formulas.

use crate::dist::DistributionSpec;
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalBox};
use crate::poly::Polynomial;

/// Three-valued verdict of an interval evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ternary {
    True,
    False,
    Unknown,
}

/// `poly >= 0`, with a record of whether the source inequality was strict.
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub poly: Polynomial,
    pub strict_origin: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    /// Builds an atom `poly >= 0` (or `> 0` at the origin if `strict`),
    /// folding constant polynomials to truth leaves. Strictness only
    /// affects the fold when the constant is exactly zero.
    pub fn atom(poly: Polynomial, strict_origin: bool) -> Formula {
        match poly.as_constant() {
            Some(c) => {
                if c > 0.0 || (c == 0.0 && !strict_origin) {
                    Formula::True
                } else {
                    Formula::False
                }
            }
            None => Formula::Atom(Atom {
                poly,
                strict_origin,
            }),
        }
    }

    /// Conjunction with constant absorption.
    pub fn and(children: Vec<Formula>) -> Formula {
        let mut out = Vec::with_capacity(children.len());
        for c in children {
            match c {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(gs) => out.extend(gs),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    /// Disjunction with constant absorption.
    pub fn or(children: Vec<Formula>) -> Formula {
        let mut out = Vec::with_capacity(children.len());
        for c in children {
            match c {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(gs) => out.extend(gs),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    /// Structural negation: atoms flip sign (and strictness), and/or
    /// dualize. No `Not` node survives.
    pub fn negate(&self) -> Formula {
        match self {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Atom(a) => Formula::atom(a.poly.neg(), !a.strict_origin),
            Formula::And(cs) => Formula::or(cs.iter().map(Formula::negate).collect()),
            Formula::Or(cs) => Formula::and(cs.iter().map(Formula::negate).collect()),
        }
    }

    /// Truth value at a point (atoms as `poly(point) >= 0`).
    pub fn eval_point(&self, point: &[f64]) -> bool {
        match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(a) => a.poly.eval_point(point) >= 0.0,
            Formula::And(cs) => cs.iter().all(|c| c.eval_point(point)),
            Formula::Or(cs) => cs.iter().any(|c| c.eval_point(point)),
        }
    }

    /// Sound three-valued verdict over a box: `True` and `False` hold for
    /// every point of the box; `Unknown` makes no claim.
    pub fn eval_box(&self, b: &IntervalBox) -> Ternary {
        match self {
            Formula::True => Ternary::True,
            Formula::False => Ternary::False,
            Formula::Atom(a) => {
                let enc = a.poly.eval_box(b);
                if enc.lo() >= 0.0 {
                    Ternary::True
                } else if enc.hi() < 0.0 {
                    Ternary::False
                } else {
                    Ternary::Unknown
                }
            }
            Formula::And(cs) => {
                let mut verdict = Ternary::True;
                for c in cs {
                    match c.eval_box(b) {
                        Ternary::False => return Ternary::False,
                        Ternary::Unknown => verdict = Ternary::Unknown,
                        Ternary::True => {}
                    }
                }
                verdict
            }
            Formula::Or(cs) => {
                let mut verdict = Ternary::False;
                for c in cs {
                    match c.eval_box(b) {
                        Ternary::True => return Ternary::True,
                        Ternary::Unknown => verdict = Ternary::Unknown,
                        Ternary::False => {}
                    }
                }
                verdict
            }
        }
    }

    /// Substitutes values for the leading variables in every atom; atoms
    /// whose polynomial becomes constant fold to truth leaves and the
    /// connectives absorb them.
    pub fn substitute_prefix(&self, values: &[f64]) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(a) => {
                Formula::atom(a.poly.substitute_prefix(values), a.strict_origin)
            }
            Formula::And(cs) => {
                Formula::and(cs.iter().map(|c| c.substitute_prefix(values)).collect())
            }
            Formula::Or(cs) => {
                Formula::or(cs.iter().map(|c| c.substitute_prefix(values)).collect())
            }
        }
    }

    /// Number of atoms (truth leaves not counted).
    pub fn atom_count(&self) -> usize {
        match self {
            Formula::True | Formula::False => 0,
            Formula::Atom(_) => 1,
            Formula::And(cs) | Formula::Or(cs) => cs.iter().map(Formula::atom_count).sum(),
        }
    }

    pub(crate) fn for_each_atom<'a>(&'a self, f: &mut impl FnMut(&'a Atom)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => f(a),
            Formula::And(cs) | Formula::Or(cs) => {
                for c in cs {
                    c.for_each_atom(f);
                }
            }
        }
    }
}

/// A deterministic (`exists`) parameter: its true domain and an optional
/// finite sampling override used when the domain itself is unbounded.
#[derive(Clone, Debug, PartialEq)]
pub struct DetVar {
    pub name: String,
    pub domain: Interval,
    pub sample: Option<Interval>,
}

impl DetVar {
    /// Interval the multi-start solver draws initial points from.
    pub fn sampling_interval(&self) -> Interval {
        self.sample.unwrap_or(self.domain)
    }
}

/// A random (`rand`) variable and its distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct RandVar {
    pub name: String,
    pub dist: DistributionSpec,
}

/// A stochastic constraint problem: maximize over the deterministic
/// parameters the probability that the formula holds under the random
/// variables. Polynomial variable indices are deterministic variables
/// first, then random variables, each in declaration order.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub name: String,
    pub det_vars: Vec<DetVar>,
    pub rand_vars: Vec<RandVar>,
    pub formula: Formula,
}

impl Problem {
    pub fn new(
        name: impl Into<String>,
        det_vars: Vec<DetVar>,
        rand_vars: Vec<RandVar>,
        formula: Formula,
    ) -> Result<Self> {
        let p = Problem {
            name: name.into(),
            det_vars,
            rand_vars,
            formula,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if self.det_vars.is_empty() {
            return Err(Error::config("problem declares no deterministic variables"));
        }
        if self.rand_vars.is_empty() {
            return Err(Error::config("problem declares no random variables"));
        }
        let mut names: Vec<&str> = self
            .det_vars
            .iter()
            .map(|v| v.name.as_str())
            .chain(self.rand_vars.iter().map(|v| v.name.as_str()))
            .collect();
        names.sort_unstable();
        for w in names.windows(2) {
            if w[0] == w[1] {
                return Err(Error::config(format!("duplicate variable name '{}'", w[0])));
            }
        }
        for v in &self.det_vars {
            match v.sample {
                None => {
                    if !v.domain.is_finite() {
                        return Err(Error::config(format!(
                            "variable '{}' has unbounded domain {} and no sampling override",
                            v.name, v.domain
                        )));
                    }
                }
                Some(s) => {
                    if !s.is_finite() {
                        return Err(Error::config(format!(
                            "sampling override for '{}' must be finite, got {s}",
                            v.name
                        )));
                    }
                    if !v.domain.contains_interval(&s) {
                        return Err(Error::config(format!(
                            "sampling override {s} for '{}' is not contained in its domain {}",
                            v.name, v.domain
                        )));
                    }
                }
            }
        }
        let nvars = self.nvars();
        let mut arity_ok = true;
        self.formula.for_each_atom(&mut |a| {
            arity_ok &= a.poly.nvars() == nvars;
        });
        if !arity_ok {
            return Err(Error::config(
                "formula atom arity does not match the declared variables",
            ));
        }
        Ok(())
    }

    pub fn n_det(&self) -> usize {
        self.det_vars.len()
    }

    pub fn n_rand(&self) -> usize {
        self.rand_vars.len()
    }

    pub fn nvars(&self) -> usize {
        self.det_vars.len() + self.rand_vars.len()
    }

    /// Combined variable names in polynomial index order.
    pub fn var_names(&self) -> Vec<String> {
        self.det_vars
            .iter()
            .map(|v| v.name.clone())
            .chain(self.rand_vars.iter().map(|v| v.name.clone()))
            .collect()
    }

    /// The true parameter domain D (may be unbounded).
    pub fn domain_box(&self) -> IntervalBox {
        IntervalBox::new(self.det_vars.iter().map(|v| v.domain).collect())
            .expect("validated problem has at least one det var")
    }

    /// The finite box initial points are drawn from.
    pub fn sampling_box(&self) -> IntervalBox {
        IntervalBox::new(
            self.det_vars
                .iter()
                .map(DetVar::sampling_interval)
                .collect(),
        )
        .expect("validated problem has at least one det var")
    }

    pub fn dists(&self) -> Vec<DistributionSpec> {
        self.rand_vars.iter().map(|v| v.dist).collect()
    }

    /// Checks that `x` has the right arity and lies in D.
    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_det() {
            return Err(Error::DimensionMismatch {
                expected: self.n_det(),
                got: x.len(),
            });
        }
        for (v, &xi) in self.det_vars.iter().zip(x) {
            if !xi.is_finite() || !v.domain.contains(xi) {
                return Err(Error::OutsideDomain(format!(
                    "{} = {xi} not in {}",
                    v.name, v.domain
                )));
            }
        }
        Ok(())
    }

    /// The formula over the random variables only, with `x` substituted.
    pub fn substitute(&self, x: &[f64]) -> Result<Formula> {
        if x.len() != self.n_det() {
            return Err(Error::DimensionMismatch {
                expected: self.n_det(),
                got: x.len(),
            });
        }
        Ok(self.formula.substitute_prefix(x))
    }

    /// Truth of the constraint at a full assignment (x then y).
    pub fn eval(&self, x: &[f64], y: &[f64]) -> bool {
        debug_assert_eq!(x.len(), self.n_det());
        debug_assert_eq!(y.len(), self.n_rand());
        let mut point = Vec::with_capacity(self.nvars());
        point.extend_from_slice(x);
        point.extend_from_slice(y);
        self.formula.eval_point(&point)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn atom_ge(p: Polynomial) -> Formula {
        Formula::atom(p, false)
    }

    #[test]
    fn constant_atoms_fold_with_strictness() {
        let c = |v: f64| Polynomial::constant(1, v);
        assert_eq!(Formula::atom(c(1.0), false), Formula::True);
        assert_eq!(Formula::atom(c(-1.0), false), Formula::False);
        assert_eq!(Formula::atom(c(0.0), false), Formula::True); // 0 >= 0
        assert_eq!(Formula::atom(c(0.0), true), Formula::False); // 0 > 0
    }

    #[test]
    fn connectives_absorb_constants() {
        let y = Formula::atom(Polynomial::var(1, 0), false);
        assert_eq!(
            Formula::and(vec![Formula::True, y.clone()]),
            y.clone()
        );
        assert_eq!(
            Formula::and(vec![Formula::False, y.clone()]),
            Formula::False
        );
        assert_eq!(Formula::or(vec![Formula::True, y.clone()]), Formula::True);
        assert_eq!(Formula::or(vec![Formula::False, y.clone()]), y);
        assert_eq!(Formula::and(vec![]), Formula::True);
        assert_eq!(Formula::or(vec![]), Formula::False);
    }

    #[test]
    fn negation_flips_atoms_and_dualizes() {
        let y = Polynomial::var(1, 0);
        let f = Formula::and(vec![
            Formula::atom(y.clone(), false),
            Formula::or(vec![
                Formula::atom(y.sub(&Polynomial::constant(1, 1.0)), true),
                Formula::True,
            ]),
        ]);
        // Or(.., True) collapsed, so f = atom(y >= 0)
        assert_eq!(f, Formula::atom(y.clone(), false));
        let n = f.negate();
        match &n {
            Formula::Atom(a) => {
                assert!(a.strict_origin);
                assert_eq!(a.poly, y.neg());
            }
            other => panic!("expected atom, got {other:?}"),
        }
        // double negation restores the original
        assert_eq!(n.negate(), f);
    }

    #[test]
    fn kleene_box_semantics() {
        let y = Polynomial::var(1, 0);
        let pos = atom_ge(y.clone()); // y >= 0
        let neg = atom_ge(y.neg()); // y <= 0
        let b_pos = IntervalBox::new(vec![iv(1.0, 2.0)]).unwrap();
        let b_neg = IntervalBox::new(vec![iv(-2.0, -1.0)]).unwrap();
        let b_span = IntervalBox::new(vec![iv(-1.0, 1.0)]).unwrap();

        assert_eq!(pos.eval_box(&b_pos), Ternary::True);
        assert_eq!(pos.eval_box(&b_neg), Ternary::False);
        assert_eq!(pos.eval_box(&b_span), Ternary::Unknown);

        // strong Kleene: False dominates Unknown in a conjunction
        let f = Formula::And(vec![pos.clone(), neg.clone()]);
        assert_eq!(f.eval_box(&b_pos), Ternary::False);
        assert_eq!(f.eval_box(&b_span), Ternary::Unknown);
        // ... and True dominates Unknown in a disjunction
        let g = Formula::Or(vec![pos.clone(), neg.clone()]);
        assert_eq!(g.eval_box(&b_span), Ternary::Unknown);
        assert_eq!(g.eval_box(&b_pos), Ternary::True);
        assert_eq!(g.eval_box(&b_neg), Ternary::True);

        // boundary endpoint counts as satisfied: y >= 0 on [0, 1] is True
        let b_edge = IntervalBox::new(vec![iv(0.0, 1.0)]).unwrap();
        assert_eq!(pos.eval_box(&b_edge), Ternary::True);
    }

    fn random_formula(rng: &mut ChaCha8Rng, nvars: usize, depth: usize) -> Formula {
        if depth == 0 || rng.random_range(0..3) == 0 {
            let mut p = Polynomial::constant(nvars, rng.random_range(-2.0..2.0));
            for v in 0..nvars {
                let e = rng.random_range(0..3u32);
                if e > 0 {
                    let coef: f64 = rng.random_range(-2.0..2.0);
                    p = p.add(&Polynomial::var(nvars, v).pow(e).scale(coef));
                }
            }
            Formula::atom(p, rng.random())
        } else {
            let kids = (0..rng.random_range(2..4))
                .map(|_| random_formula(rng, nvars, depth - 1))
                .collect();
            if rng.random() {
                Formula::and(kids)
            } else {
                Formula::or(kids)
            }
        }
    }

    /// Box verdicts are sound with respect to point evaluation.
    #[test]
    fn fuzz_box_point_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..5_000 {
            let nvars = rng.random_range(1..3);
            let f = random_formula(&mut rng, nvars, 2);
            let dims: Vec<Interval> = (0..nvars)
                .map(|_| {
                    let a: f64 = rng.random_range(-2.0..2.0);
                    let w: f64 = rng.random_range(0.0..2.0);
                    iv(a, a + w)
                })
                .collect();
            let b = IntervalBox::new(dims).unwrap();
            let verdict = f.eval_box(&b);
            for _ in 0..20 {
                let p = b.sample(&mut rng).unwrap();
                let truth = f.eval_point(&p);
                match verdict {
                    Ternary::True => assert!(truth),
                    Ternary::False => assert!(!truth),
                    Ternary::Unknown => {}
                }
            }
        }
    }

    /// Away from atom boundaries, structural negation complements pointwise
    /// truth.
    #[test]
    fn fuzz_negation_complements_off_boundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..5_000 {
            let nvars = rng.random_range(1..3);
            let f = random_formula(&mut rng, nvars, 2);
            let n = f.negate();
            let p: Vec<f64> = (0..nvars).map(|_| rng.random_range(-3.0..3.0)).collect();
            let mut on_boundary = false;
            f.for_each_atom(&mut |a| {
                if a.poly.eval_point(&p) == 0.0 {
                    on_boundary = true;
                }
            });
            if !on_boundary {
                assert_ne!(f.eval_point(&p), n.eval_point(&p));
            }
        }
    }

    #[test]
    fn substitution_folds_deterministic_atoms() {
        // over (x, y): (x - 1 >= 0) or (y >= 0)
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        let f = Formula::or(vec![
            atom_ge(x.sub(&Polynomial::constant(2, 1.0))),
            atom_ge(y.clone()),
        ]);
        // x = 2 makes the first disjunct true, so the whole formula folds
        assert_eq!(f.substitute_prefix(&[2.0]), Formula::True);
        // x = 0 drops the first disjunct
        let g = f.substitute_prefix(&[0.0]);
        assert_eq!(g.atom_count(), 1);
        assert!(g.eval_point(&[0.5]));
        assert!(!g.eval_point(&[-0.5]));
    }

    #[test]
    fn problem_validation_errors() {
        let p1 = Polynomial::var(2, 1);
        let mk_det = |name: &str, lo: f64, hi: f64| DetVar {
            name: name.into(),
            domain: iv(lo, hi),
            sample: None,
        };
        let rv = RandVar {
            name: "y".into(),
            dist: DistributionSpec::uniform(0.0, 1.0).unwrap(),
        };

        // duplicate names
        let err = Problem::new(
            "t",
            vec![mk_det("y", 0.0, 1.0)],
            vec![rv.clone()],
            atom_ge(p1.clone()),
        )
        .unwrap_err();
        assert!(err.to_string().contains("duplicate"));

        // unbounded domain without sampling override
        let err = Problem::new(
            "t",
            vec![DetVar {
                name: "x".into(),
                domain: Interval::all(),
                sample: None,
            }],
            vec![rv.clone()],
            atom_ge(p1.clone()),
        )
        .unwrap_err();
        assert!(err.to_string().contains("sampling override"));

        // sampling override outside domain
        let err = Problem::new(
            "t",
            vec![DetVar {
                name: "x".into(),
                domain: iv(0.0, 1.0),
                sample: Some(iv(-5.0, 5.0)),
            }],
            vec![rv.clone()],
            atom_ge(p1.clone()),
        )
        .unwrap_err();
        assert!(err.to_string().contains("not contained"));

        // arity mismatch
        let err = Problem::new(
            "t",
            vec![mk_det("x", 0.0, 1.0)],
            vec![rv.clone()],
            atom_ge(Polynomial::var(3, 2)),
        )
        .unwrap_err();
        assert!(err.to_string().contains("arity"));

        // no random variables
        let err = Problem::new("t", vec![mk_det("x", 0.0, 1.0)], vec![], Formula::True)
            .unwrap_err();
        assert!(err.to_string().contains("no random"));
    }

    #[test]
    fn check_point_and_domain_boxes() {
        let p = Problem::new(
            "t",
            vec![
                DetVar {
                    name: "x".into(),
                    domain: iv(-1.0, 1.0),
                    sample: None,
                },
                DetVar {
                    name: "a".into(),
                    domain: Interval::all(),
                    sample: Some(iv(-5.0, 5.0)),
                },
            ],
            vec![RandVar {
                name: "y".into(),
                dist: DistributionSpec::normal(0.0, 1.0).unwrap(),
            }],
            atom_ge(Polynomial::var(3, 2)),
        )
        .unwrap();
        assert!(p.check_point(&[0.0, 100.0]).is_ok()); // a is unbounded
        assert!(matches!(
            p.check_point(&[2.0, 0.0]),
            Err(Error::OutsideDomain(_))
        ));
        assert!(matches!(
            p.check_point(&[0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(p.domain_box().dim(1).hi().is_infinite());
        assert!(p.sampling_box().is_finite());
    }
}
