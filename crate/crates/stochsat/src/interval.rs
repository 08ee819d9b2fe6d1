//! Closed intervals over the extended reals with outward rounding, and
//! axis-aligned boxes built from them.
//!
//! Every arithmetic primitive returns an interval that contains the exact
//! real-number image of its operands. Directed rounding is implemented by
//! nudging a computed endpoint one representable float outward *only when
//! the f64 operation was inexact*: addition uses the TwoSum residual, and
//! multiplication uses an FMA residual. Exact results (e.g. `[0,1]+[2,3]`)
//! therefore keep their endpoints bit-for-bit, which keeps box splits
//! aligned with constraint boundaries at representable numbers.
//!
//! Near the overflow/underflow limits the residual tricks stop being exact,
//! so endpoints with magnitude outside `[4*MIN_POSITIVE, MAX/4]` are nudged
//! unconditionally (conservative, still sound).

use crate::error::{Error, Result};
use rand::Rng;

/// Magnitudes above this are nudged unconditionally (residuals may overflow).
const GUARD_HI: f64 = f64::MAX / 4.0;
/// Multiplication residuals below this may underflow to zero; nudge anyway.
const GUARD_LO: f64 = 4.0 * f64::MIN_POSITIVE;

/// Exact rounding error of `s = fl(a + b)` (Knuth TwoSum, branch-free).
/// Valid only when `a`, `b`, `s` and the intermediates are finite.
#[inline]
fn two_sum_err(a: f64, b: f64, s: f64) -> f64 {
    let a1 = s - b;
    let b1 = s - a1;
    (a - a1) + (b - b1)
}

#[inline]
fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        // -inf is already a sound lower bound; +inf overflow means the true
        // sum exceeds every float below it, so MAX is a sound lower bound.
        return if s == f64::INFINITY { f64::MAX } else { f64::NEG_INFINITY };
    }
    if s.abs() >= GUARD_HI {
        return s.next_down();
    }
    if two_sum_err(a, b, s) < 0.0 {
        s.next_down()
    } else {
        s
    }
}

#[inline]
fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return if s == f64::NEG_INFINITY { f64::MIN } else { f64::INFINITY };
    }
    if s.abs() >= GUARD_HI {
        return s.next_up();
    }
    if two_sum_err(a, b, s) > 0.0 {
        s.next_up()
    } else {
        s
    }
}

/// Directed-rounded product. Adopts the interval convention `0 * x = 0`
/// even for infinite `x`, which is the correct endpoint candidate because a
/// zero endpoint contributes only the point 0 to the product set.
#[inline]
fn mul_down(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if !p.is_finite() {
        return if p == f64::INFINITY { f64::MAX } else { f64::NEG_INFINITY };
    }
    let m = p.abs();
    if m >= GUARD_HI || m <= GUARD_LO {
        return p.next_down();
    }
    if a.mul_add(b, -p) < 0.0 {
        p.next_down()
    } else {
        p
    }
}

#[inline]
fn mul_up(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if !p.is_finite() {
        return if p == f64::NEG_INFINITY { f64::MIN } else { f64::INFINITY };
    }
    let m = p.abs();
    if m >= GUARD_HI || m <= GUARD_LO {
        return p.next_up();
    }
    if a.mul_add(b, -p) > 0.0 {
        p.next_up()
    } else {
        p
    }
}

/// `x^k` rounded down, for `x >= 0`, by chained directed multiplication.
fn pow_mag_down(x: f64, k: u32) -> f64 {
    debug_assert!(x >= 0.0);
    let mut r = x;
    for _ in 1..k {
        r = mul_down(r, x);
    }
    r
}

/// `x^k` rounded up, for `x >= 0`.
fn pow_mag_up(x: f64, k: u32) -> f64 {
    debug_assert!(x >= 0.0);
    let mut r = x;
    for _ in 1..k {
        r = mul_up(r, x);
    }
    r
}

/// A closed, non-empty interval `[lo, hi]`. Endpoints may be infinite but
/// never NaN, and `lo <= hi` always holds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    /// Builds `[lo, hi]`, rejecting NaN endpoints and reversed bounds.
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() {
            return Err(Error::domain("interval endpoint is NaN"));
        }
        if lo > hi {
            return Err(Error::domain(format!(
                "interval endpoints reversed: [{lo}, {hi}]"
            )));
        }
        Ok(Interval { lo, hi })
    }

    /// The degenerate interval `[x, x]`.
    pub fn point(x: f64) -> Self {
        debug_assert!(!x.is_nan());
        Interval { lo: x, hi: x }
    }

    /// The whole extended real line.
    pub fn all() -> Self {
        Interval {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    #[inline]
    fn raw(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "raw interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// `hi - lo`; infinite for unbounded intervals.
    pub fn width(&self) -> f64 {
        if self.lo == self.hi {
            0.0 // avoids inf - inf on degenerate infinite endpoints
        } else {
            self.hi - self.lo
        }
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Midpoint, computed overflow-safely. For degenerate intervals this is
    /// the shared endpoint.
    pub fn midpoint(&self) -> f64 {
        if self.lo == self.hi {
            return self.lo;
        }
        let m = 0.5 * (self.lo + self.hi);
        if m.is_finite() {
            m
        } else {
            self.lo / 2.0 + self.hi / 2.0
        }
    }

    #[inline]
    pub fn add(&self, rhs: &Interval) -> Interval {
        Interval::raw(add_down(self.lo, rhs.lo), add_up(self.hi, rhs.hi))
    }

    /// Negation is exact: `-[a,b] = [-b,-a]` bit-for-bit.
    #[inline]
    pub fn neg(&self) -> Interval {
        Interval::raw(-self.hi, -self.lo)
    }

    #[inline]
    pub fn sub(&self, rhs: &Interval) -> Interval {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &Interval) -> Interval {
        let (a, b) = (self.lo, self.hi);
        let (c, d) = (rhs.lo, rhs.hi);
        let lo = mul_down(a, c)
            .min(mul_down(a, d))
            .min(mul_down(b, c))
            .min(mul_down(b, d));
        let hi = mul_up(a, c)
            .max(mul_up(a, d))
            .max(mul_up(b, c))
            .max(mul_up(b, d));
        Interval::raw(lo, hi)
    }

    /// Integer power with the even-power range tightening: an even power of
    /// a sign-spanning interval starts at exactly 0 rather than at the
    /// product-form lower bound (e.g. `[-2,1]^2 = [0,4]`, not `[-2,4]`).
    pub fn pow(&self, k: u32) -> Interval {
        if k == 0 {
            return Interval::point(1.0);
        }
        if k == 1 {
            return *self;
        }
        let (a, b) = (self.lo, self.hi);
        if k % 2 == 1 {
            // odd powers are monotone; negative bases go through |x|
            let lo = if a >= 0.0 {
                pow_mag_down(a, k)
            } else {
                -pow_mag_up(-a, k)
            };
            let hi = if b >= 0.0 {
                pow_mag_up(b, k)
            } else {
                -pow_mag_down(-b, k)
            };
            Interval::raw(lo, hi)
        } else if a >= 0.0 {
            Interval::raw(pow_mag_down(a, k), pow_mag_up(b, k))
        } else if b <= 0.0 {
            Interval::raw(pow_mag_down(-b, k), pow_mag_up(-a, k))
        } else {
            Interval::raw(0.0, pow_mag_up((-a).max(b), k))
        }
    }

    /// `x^k` for a point operand, evaluated by the same multiplication chain
    /// as the interval power so that float point evaluations stay inside
    /// interval enclosures operation-by-operation.
    pub fn point_pow(x: f64, k: u32) -> f64 {
        if k == 0 {
            return 1.0;
        }
        let mut r = x;
        for _ in 1..k {
            r *= x;
        }
        r
    }

    /// Uniform sample; requires finite endpoints.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        if !self.is_finite() {
            return Err(Error::domain(format!(
                "cannot sample from unbounded interval {self}"
            )));
        }
        if self.lo == self.hi {
            return Ok(self.lo);
        }
        let u: f64 = rng.random();
        Ok((self.lo + u * (self.hi - self.lo)).clamp(self.lo, self.hi))
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// An axis-aligned box: one interval per dimension, at least one dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalBox {
    dims: Vec<Interval>,
}

impl IntervalBox {
    pub fn new(dims: Vec<Interval>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::domain("box must have at least one dimension"));
        }
        Ok(IntervalBox { dims })
    }

    #[inline]
    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    #[inline]
    pub fn dim(&self, i: usize) -> &Interval {
        &self.dims[i]
    }

    pub fn dims(&self) -> &[Interval] {
        &self.dims
    }

    pub fn widths(&self) -> Vec<f64> {
        self.dims.iter().map(Interval::width).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.dims.iter().all(Interval::is_finite)
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        assert_eq!(point.len(), self.dims.len(), "point/box dimension mismatch");
        self.dims.iter().zip(point).all(|(iv, &x)| iv.contains(x))
    }

    /// Splits dimension `dim` at its midpoint. The two children share the
    /// midpoint endpoint bit-for-bit and reuse the outer endpoints, so they
    /// partition the parent with no gap and no overlap.
    pub fn bisect(&self, dim: usize) -> Result<(IntervalBox, IntervalBox)> {
        let iv = &self.dims[dim];
        if !iv.is_finite() {
            return Err(Error::domain(format!(
                "cannot bisect unbounded dimension {dim}: {iv}"
            )));
        }
        let m = iv.midpoint();
        if !(m > iv.lo && m < iv.hi) {
            return Err(Error::domain(format!(
                "dimension {dim} too narrow to bisect: {iv}"
            )));
        }
        let mut left = self.clone();
        let mut right = self.clone();
        left.dims[dim] = Interval::raw(iv.lo, m);
        right.dims[dim] = Interval::raw(m, iv.hi);
        Ok((left, right))
    }

    /// Uniform sample from the box; requires all dimensions finite.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        self.dims.iter().map(|iv| iv.sample(rng)).collect()
    }
}

impl std::fmt::Display for IntervalBox {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[")?;
        for (i, iv) in self.dims.iter().enumerate() {
            if i > 0 {
                write!(f, " x ")?;
            }
            write!(f, "{iv}")?;
        }
        write!(f, "]")
    }
}
