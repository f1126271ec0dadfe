//! Outward-rounded real intervals and rectangular complex intervals.

pub mod round;

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use round::*;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntervalError {
    #[error("division by an interval containing zero")]
    DivisionByIntervalContainingZero,
    #[error("invalid interval endpoints [{0}, {1}]")]
    InvalidEndpoints(f64, f64),
}

/// A closed real interval `[lo, hi]` with binary64 endpoints.
#[derive(Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ScalarInterval {
    lo: f64,
    hi: f64,
}

impl fmt::Debug for ScalarInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl ScalarInterval {
    pub const ZERO: Self = Self { lo: 0.0, hi: 0.0 };
    pub const ONE: Self = Self { lo: 1.0, hi: 1.0 };
    /// The unit parameter interval `[0, 1]`.
    pub const UNIT: Self = Self { lo: 0.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(IntervalError::InvalidEndpoints(lo, hi));
        }
        Ok(Self { lo, hi })
    }

    /// Builds `[lo, hi]`; callers guarantee the ordering.
    #[inline]
    pub(crate) fn raw(lo: f64, hi: f64) -> Self {
        debug_assert!(!(lo > hi), "inverted interval [{lo}, {hi}]");
        Self { lo, hi }
    }

    #[inline]
    pub const fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    /// `[x - eps, x + eps]` rounded outward.
    pub fn inflate(x: f64, eps: f64) -> Self {
        Self::raw(sub_down(x, eps.abs()), add_up(x, eps.abs()))
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn mid(&self) -> f64 {
        if self.lo == self.hi {
            self.lo
        } else {
            0.5 * self.lo + 0.5 * self.hi
        }
    }

    /// Upper bound of the radius around [`Self::mid`].
    pub fn rad(&self) -> f64 {
        let m = self.mid();
        sub_up(self.hi, m).max(sub_up(m, self.lo))
    }

    pub fn width(&self) -> f64 {
        sub_up(self.hi, self.lo)
    }

    /// `sup |x|`.
    #[inline]
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// `inf |x|`.
    #[inline]
    pub fn mig(&self) -> f64 {
        if self.lo > 0.0 {
            self.lo
        } else if self.hi < 0.0 {
            -self.hi
        } else {
            0.0
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0.0 && 0.0 <= self.hi
    }

    pub fn subset_of(&self, other: &Self) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn hull(&self, other: &Self) -> Self {
        Self::raw(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    pub fn abs(&self) -> Self {
        Self::raw(self.mig(), self.mag())
    }

    pub fn sqr(&self) -> Self {
        let lo = self.mig();
        let hi = self.mag();
        Self::raw(mul_down(lo, lo), mul_up(hi, hi))
    }

    /// Integer power; even powers are nonnegative.
    pub fn pow_int(&self, p: u32) -> Self {
        match p {
            0 => Self::ONE,
            1 => *self,
            _ if p.is_multiple_of(2) => {
                let (lo, hi) = (self.mig(), self.mag());
                Self::raw(powi_down(lo, p), powi_up(hi, p))
            }
            _ => {
                // Odd powers are monotone.
                let down = |x: f64| {
                    if x >= 0.0 {
                        powi_down(x, p)
                    } else {
                        -powi_up(-x, p)
                    }
                };
                let up = |x: f64| {
                    if x >= 0.0 {
                        powi_up(x, p)
                    } else {
                        -powi_down(-x, p)
                    }
                };
                Self::raw(down(self.lo), up(self.hi))
            }
        }
    }

    pub fn sqrt(&self) -> Self {
        Self::raw(sqrt_down(self.lo.max(0.0)), sqrt_up(self.hi.max(0.0)))
    }

    pub fn recip(&self) -> Result<Self, IntervalError> {
        Self::ONE.div(self)
    }

    pub fn div(&self, b: &Self) -> Result<Self, IntervalError> {
        if b.contains_zero() {
            return Err(IntervalError::DivisionByIntervalContainingZero);
        }
        let a = self;
        let cands = [(a.lo, b.lo), (a.lo, b.hi), (a.hi, b.lo), (a.hi, b.hi)];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (x, y) in cands {
            lo = lo.min(div_down(x, y));
            hi = hi.max(div_up(x, y));
        }
        Ok(Self::raw(lo, hi))
    }

    /// Multiplication by an exact real.
    #[inline]
    pub fn scale(&self, c: f64) -> Self {
        if c >= 0.0 {
            Self::raw(mul_down(self.lo, c), mul_up(self.hi, c))
        } else {
            Self::raw(mul_down(self.hi, c), mul_up(self.lo, c))
        }
    }

    pub fn max(&self, other: &Self) -> Self {
        Self::raw(self.lo.max(other.lo), self.hi.max(other.hi))
    }

    /// True when every element is strictly negative.
    pub fn is_negative(&self) -> bool {
        self.hi < 0.0
    }

    pub fn is_positive(&self) -> bool {
        self.lo > 0.0
    }
}

impl Add for ScalarInterval {
    type Output = Self;
    #[inline]
    fn add(self, b: Self) -> Self {
        Self::raw(add_down(self.lo, b.lo), add_up(self.hi, b.hi))
    }
}

impl Sub for ScalarInterval {
    type Output = Self;
    #[inline]
    fn sub(self, b: Self) -> Self {
        Self::raw(sub_down(self.lo, b.hi), sub_up(self.hi, b.lo))
    }
}

impl Neg for ScalarInterval {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::raw(-self.hi, -self.lo)
    }
}

impl Mul for ScalarInterval {
    type Output = Self;
    #[inline]
    fn mul(self, b: Self) -> Self {
        let a = self;
        if a.lo == a.hi && b.lo == b.hi {
            return Self::raw(mul_down(a.lo, b.lo), mul_up(a.lo, b.lo));
        }
        if a.lo >= 0.0 && b.lo >= 0.0 {
            return Self::raw(mul_down(a.lo, b.lo), mul_up(a.hi, b.hi));
        }
        // General case: pick the extreme plain products, then round those two.
        let c = [(a.lo, b.lo), (a.lo, b.hi), (a.hi, b.lo), (a.hi, b.hi)];
        let p = c.map(|(x, y)| x * y);
        let (mut imin, mut imax) = (0, 0);
        for i in 1..4 {
            if p[i] < p[imin] {
                imin = i;
            }
            if p[i] > p[imax] {
                imax = i;
            }
        }
        // Near-ties may flip under rounding, so take both directed values of ties.
        let mut lo = mul_down(c[imin].0, c[imin].1);
        let mut hi = mul_up(c[imax].0, c[imax].1);
        for (i, &(x, y)) in c.iter().enumerate() {
            if i != imin && p[i] == p[imin] {
                lo = lo.min(mul_down(x, y));
            }
            if i != imax && p[i] == p[imax] {
                hi = hi.max(mul_up(x, y));
            }
        }
        Self::raw(lo, hi)
    }
}

impl AddAssign for ScalarInterval {
    fn add_assign(&mut self, b: Self) {
        *self = *self + b;
    }
}

impl SubAssign for ScalarInterval {
    fn sub_assign(&mut self, b: Self) {
        *self = *self - b;
    }
}

/// Axis-aligned rectangle `re + i im` in the complex plane.
#[derive(Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ComplexInterval {
    pub re: ScalarInterval,
    pub im: ScalarInterval,
}

impl fmt::Debug for ComplexInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} + i{:?}", self.re, self.im)
    }
}

impl ComplexInterval {
    pub const ZERO: Self = Self { re: ScalarInterval::ZERO, im: ScalarInterval::ZERO };
    pub const ONE: Self = Self { re: ScalarInterval::ONE, im: ScalarInterval::ZERO };
    pub const I: Self = Self { re: ScalarInterval::ZERO, im: ScalarInterval::ONE };

    #[inline]
    pub const fn new(re: ScalarInterval, im: ScalarInterval) -> Self {
        Self { re, im }
    }

    #[inline]
    pub const fn point(z: Complex64) -> Self {
        Self { re: ScalarInterval::point(z.re), im: ScalarInterval::point(z.im) }
    }

    #[inline]
    pub const fn real(x: ScalarInterval) -> Self {
        Self { re: x, im: ScalarInterval::ZERO }
    }

    pub fn inflate(z: Complex64, eps: f64) -> Self {
        Self { re: ScalarInterval::inflate(z.re, eps), im: ScalarInterval::inflate(z.im, eps) }
    }

    pub fn mid(&self) -> Complex64 {
        Complex64::new(self.re.mid(), self.im.mid())
    }

    #[inline]
    pub fn conj(&self) -> Self {
        Self { re: self.re, im: -self.im }
    }

    /// Multiplication by `i`, exact.
    #[inline]
    pub fn mul_i(&self) -> Self {
        Self { re: -self.im, im: self.re }
    }

    #[inline]
    pub fn scale(&self, c: f64) -> Self {
        Self { re: self.re.scale(c), im: self.im.scale(c) }
    }

    pub fn scale_interval(&self, c: ScalarInterval) -> Self {
        Self { re: self.re * c, im: self.im * c }
    }

    /// Upper bound on `sup |w|` over the rectangle (attained at a corner).
    #[inline]
    pub fn magnitude_upper(&self) -> f64 {
        hypot_up(self.re.mag(), self.im.mag())
    }

    /// Lower bound on the distance from 0 to the rectangle.
    #[inline]
    pub fn magnitude_lower(&self) -> f64 {
        hypot_down(self.re.mig(), self.im.mig())
    }

    /// Enclosure of `|z|^2` as a real interval.
    pub fn norm_sqr(&self) -> ScalarInterval {
        self.re.sqr() + self.im.sqr()
    }

    pub fn div(&self, b: &Self) -> Result<Self, IntervalError> {
        if b.magnitude_lower() <= 0.0 {
            return Err(IntervalError::DivisionByIntervalContainingZero);
        }
        let d = b.norm_sqr();
        let num = *self * b.conj();
        Ok(Self { re: num.re.div(&d)?, im: num.im.div(&d)? })
    }

    pub fn recip(&self) -> Result<Self, IntervalError> {
        Self::ONE.div(self)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.re.contains(z.re) && self.im.contains(z.im)
    }

    pub fn subset_of(&self, other: &Self) -> bool {
        self.re.subset_of(&other.re) && self.im.subset_of(&other.im)
    }

    pub fn hull(&self, other: &Self) -> Self {
        Self { re: self.re.hull(&other.re), im: self.im.hull(&other.im) }
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    /// Upper bound of the half-widths, used to convert to midpoint-radius form.
    pub fn rad(&self) -> (f64, f64) {
        (self.re.rad(), self.im.rad())
    }
}

impl Add for ComplexInterval {
    type Output = Self;
    #[inline]
    fn add(self, b: Self) -> Self {
        Self { re: self.re + b.re, im: self.im + b.im }
    }
}

impl Sub for ComplexInterval {
    type Output = Self;
    #[inline]
    fn sub(self, b: Self) -> Self {
        Self { re: self.re - b.re, im: self.im - b.im }
    }
}

impl Neg for ComplexInterval {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self { re: -self.re, im: -self.im }
    }
}

impl Mul for ComplexInterval {
    type Output = Self;
    #[inline]
    fn mul(self, b: Self) -> Self {
        Self {
            re: self.re * b.re - self.im * b.im,
            im: self.re * b.im + self.im * b.re,
        }
    }
}

impl AddAssign for ComplexInterval {
    #[inline]
    fn add_assign(&mut self, b: Self) {
        *self = *self + b;
    }
}

impl SubAssign for ComplexInterval {
    fn sub_assign(&mut self, b: Self) {
        *self = *self - b;
    }
}

impl From<ScalarInterval> for ComplexInterval {
    fn from(x: ScalarInterval) -> Self {
        Self::real(x)
    }
}

impl From<Complex64> for ComplexInterval {
    fn from(z: Complex64) -> Self {
        Self::point(z)
    }
}
