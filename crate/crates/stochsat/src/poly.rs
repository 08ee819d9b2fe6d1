//! Sparse multivariate polynomials over a fixed variable list.
//!
//! Variables are positional: a problem with n deterministic and m random
//! variables uses indices `0..n` for the parameters and `n..n+m` for the
//! random variables, in declaration order. Terms are kept in a canonical
//! sorted form so that structural equality, printing, and evaluation order
//! are all deterministic.
//!
//! Evaluation — both float and interval — goes through one shared
//! Horner-form tree (nested by variable in declaration order, built lazily
//! and cached). Sharing the tree matters: because the float evaluation
//! performs exactly the same operation sequence as the outward-rounded
//! interval evaluation, every intermediate float value sits inside the
//! corresponding intermediate interval, so point values can never escape an
//! enclosure even on zero-width boxes.

use crate::interval::{Interval, IntervalBox};
use std::sync::OnceLock;

#[derive(Clone, Debug, PartialEq)]
struct Term {
    coeff: f64,
    exps: Vec<u32>,
}

#[derive(Debug)]
enum Horner {
    Leaf(f64),
    /// Powers of `var` in strictly descending order, each with the
    /// sub-polynomial that multiplies it.
    Split { var: usize, parts: Vec<(u32, Horner)> },
}

pub struct Polynomial {
    nvars: usize,
    terms: Vec<Term>,
    horner: OnceLock<Horner>,
}

impl Clone for Polynomial {
    fn clone(&self) -> Self {
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.clone(),
            horner: OnceLock::new(),
        }
    }
}

impl PartialEq for Polynomial {
    fn eq(&self, other: &Self) -> bool {
        self.nvars == other.nvars && self.terms == other.terms
    }
}

impl std::fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Polynomial")
            .field("nvars", &self.nvars)
            .field("terms", &self.terms)
            .finish()
    }
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: Vec::new(),
            horner: OnceLock::new(),
        }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Polynomial::zero(nvars);
        if c != 0.0 {
            p.terms.push(Term {
                coeff: c,
                exps: vec![0; nvars],
            });
        }
        p
    }

    /// The monomial `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars);
        let mut exps = vec![0; nvars];
        exps[i] = 1;
        Polynomial {
            nvars,
            terms: vec![Term { coeff: 1.0, exps }],
            horner: OnceLock::new(),
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Some(c)` if the polynomial is the constant `c`.
    pub fn as_constant(&self) -> Option<f64> {
        match self.terms.len() {
            0 => Some(0.0),
            1 if self.terms[0].exps.iter().all(|&e| e == 0) => Some(self.terms[0].coeff),
            _ => None,
        }
    }

    /// Largest exponent of variable `i` in any term.
    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.iter().map(|t| t.exps[i]).max().unwrap_or(0)
    }

    /// True if any variable with index `>= from` appears.
    pub fn depends_on_suffix(&self, from: usize) -> bool {
        self.terms
            .iter()
            .any(|t| t.exps[from..].iter().any(|&e| e > 0))
    }

    /// Iterates `(coeff, exponents)` in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (f64, &[u32])> {
        self.terms.iter().map(|t| (t.coeff, t.exps.as_slice()))
    }

    fn normalized(nvars: usize, mut terms: Vec<Term>) -> Self {
        terms.sort_by(|a, b| a.exps.cmp(&b.exps));
        let mut out: Vec<Term> = Vec::with_capacity(terms.len());
        for t in terms {
            match out.last_mut() {
                Some(last) if last.exps == t.exps => last.coeff += t.coeff,
                _ => out.push(t),
            }
        }
        out.retain(|t| t.coeff != 0.0);
        Polynomial {
            nvars,
            terms: out,
            horner: OnceLock::new(),
        }
    }

    pub fn add(&self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars);
        let mut terms = self.terms.clone();
        terms.extend(rhs.terms.iter().cloned());
        Polynomial::normalized(self.nvars, terms)
    }

    pub fn neg(&self) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                coeff: -t.coeff,
                exps: t.exps.clone(),
            })
            .collect();
        Polynomial {
            nvars: self.nvars,
            terms,
            horner: OnceLock::new(),
        }
    }

    pub fn sub(&self, rhs: &Polynomial) -> Polynomial {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars);
        let mut terms = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for a in &self.terms {
            for b in &rhs.terms {
                let exps = a
                    .exps
                    .iter()
                    .zip(&b.exps)
                    .map(|(&x, &y)| x.checked_add(y).expect("exponent overflow"))
                    .collect();
                terms.push(Term {
                    coeff: a.coeff * b.coeff,
                    exps,
                });
            }
        }
        Polynomial::normalized(self.nvars, terms)
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        let mut r = Polynomial::constant(self.nvars, 1.0);
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }

    pub fn scale(&self, c: f64) -> Polynomial {
        self.mul(&Polynomial::constant(self.nvars, c))
    }

    /// Substitutes float values for the first `values.len()` variables,
    /// producing a polynomial over the remaining suffix variables.
    /// Coefficient arithmetic is plain f64.
    pub fn substitute_prefix(&self, values: &[f64]) -> Polynomial {
        let n = values.len();
        assert!(n <= self.nvars);
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut c = t.coeff;
                for (i, &v) in values.iter().enumerate() {
                    if t.exps[i] > 0 {
                        c *= Interval::point_pow(v, t.exps[i]);
                    }
                }
                Term {
                    coeff: c,
                    exps: t.exps[n..].to_vec(),
                }
            })
            .collect();
        Polynomial::normalized(self.nvars - n, terms)
    }

    fn horner(&self) -> &Horner {
        self.horner.get_or_init(|| {
            if self.terms.is_empty() {
                Horner::Leaf(0.0)
            } else {
                let refs: Vec<&Term> = self.terms.iter().collect();
                build_horner(&refs, 0, self.nvars)
            }
        })
    }

    /// Float evaluation through the Horner tree.
    pub fn eval_point(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.nvars, "point/polynomial arity mismatch");
        self.horner().eval_point(point)
    }

    /// Outward-rounded interval enclosure of the image of `b`.
    pub fn eval_box(&self, b: &IntervalBox) -> Interval {
        assert_eq!(b.ndim(), self.nvars, "box/polynomial arity mismatch");
        self.horner().eval_box(b)
    }

    /// Renders the polynomial with the given variable names; inverse of the
    /// DSL expression grammar for the canonical term order.
    pub fn format_with(&self, names: &[String]) -> String {
        assert_eq!(names.len(), self.nvars);
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (i, t) in self.terms.iter().enumerate() {
            let neg = t.coeff < 0.0 || (t.coeff == 0.0 && t.coeff.is_sign_negative());
            if i == 0 {
                if neg {
                    s.push('-');
                }
            } else if neg {
                s.push_str(" - ");
            } else {
                s.push_str(" + ");
            }
            let mag = t.coeff.abs();
            let mut factors: Vec<String> = Vec::new();
            if mag != 1.0 || t.exps.iter().all(|&e| e == 0) {
                factors.push(format!("{mag}"));
            }
            for (v, &e) in t.exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(names[v].clone()),
                    _ => factors.push(format!("{}^{}", names[v], e)),
                }
            }
            s.push_str(&factors.join("*"));
        }
        s
    }
}

/// Builds the Horner tree for canonical, non-empty `terms`, recursing on
/// variable indices from `var` upward and skipping unused variables.
fn build_horner(terms: &[&Term], var: usize, nvars: usize) -> Horner {
    debug_assert!(!terms.is_empty());
    // first variable at or after `var` actually used by some term
    let split = (var..nvars).find(|&v| terms.iter().any(|t| t.exps[v] > 0));
    let v = match split {
        Some(v) => v,
        None => {
            // all remaining exponents zero: canonical form guarantees a
            // single term here
            debug_assert_eq!(terms.len(), 1);
            return Horner::Leaf(terms[0].coeff);
        }
    };
    let mut powers: Vec<u32> = terms.iter().map(|t| t.exps[v]).collect();
    powers.sort_unstable_by(|a, b| b.cmp(a));
    powers.dedup();
    let parts = powers
        .into_iter()
        .map(|p| {
            let group: Vec<&Term> = terms.iter().filter(|t| t.exps[v] == p).copied().collect();
            (p, build_horner(&group, v + 1, nvars))
        })
        .collect();
    Horner::Split { var: v, parts }
}

impl Horner {
    fn eval_point(&self, point: &[f64]) -> f64 {
        match self {
            Horner::Leaf(c) => *c,
            Horner::Split { var, parts } => {
                let x = point[*var];
                let mut acc = parts[0].1.eval_point(point);
                let mut prev = parts[0].0;
                for (p, child) in &parts[1..] {
                    acc = acc * Interval::point_pow(x, prev - p) + child.eval_point(point);
                    prev = *p;
                }
                if prev > 0 {
                    acc *= Interval::point_pow(x, prev);
                }
                acc
            }
        }
    }

    fn eval_box(&self, b: &IntervalBox) -> Interval {
        match self {
            Horner::Leaf(c) => Interval::point(*c),
            Horner::Split { var, parts } => {
                let x = b.dim(*var);
                let mut acc = parts[0].1.eval_box(b);
                let mut prev = parts[0].0;
                for (p, child) in &parts[1..] {
                    acc = acc.mul(&x.pow(prev - p)).add(&child.eval_box(b));
                    prev = *p;
                }
                if prev > 0 {
                    acc = acc.mul(&x.pow(prev));
                }
                acc
            }
        }
    }
}
