//! Coefficient arithmetic shared by float, interval and jet evaluations.
//!
//! The system map and its derivatives are written once against [`Coef`] and
//! instantiated for `Complex64` (continuation), [`ComplexInterval`]
//! (validation) and [`Jet`] (polynomial dependence on the segment parameter).

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::interval::{ComplexInterval, ScalarInterval};

pub trait Coef:
    Copy
    + Send
    + Sync
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    fn zero() -> Self;
    fn from_c64(z: Complex64) -> Self;
    fn conj(&self) -> Self;
    /// Multiplication by `i`.
    fn mul_i(&self) -> Self;
    /// Multiplication by an exactly representable real.
    fn scale(&self, c: f64) -> Self;
    /// Exact zero test, used only to skip work.
    fn is_zero(&self) -> bool;

    fn one() -> Self {
        Self::from_c64(Complex64::new(1.0, 0.0))
    }

    fn real(x: f64) -> Self {
        Self::from_c64(Complex64::new(x, 0.0))
    }
}

/// Upper bound on the modulus (rigorous for intervals, plain for floats).
pub trait Magnitude {
    fn mag_up(&self) -> f64;
}

impl Coef for Complex64 {
    #[inline]
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    #[inline]
    fn from_c64(z: Complex64) -> Self {
        z
    }
    #[inline]
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    #[inline]
    fn mul_i(&self) -> Self {
        Complex64::new(-self.im, self.re)
    }
    #[inline]
    fn scale(&self, c: f64) -> Self {
        self * c
    }
    #[inline]
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
}

impl Magnitude for Complex64 {
    fn mag_up(&self) -> f64 {
        self.norm()
    }
}

impl Coef for ComplexInterval {
    #[inline]
    fn zero() -> Self {
        ComplexInterval::ZERO
    }
    #[inline]
    fn from_c64(z: Complex64) -> Self {
        ComplexInterval::point(z)
    }
    #[inline]
    fn conj(&self) -> Self {
        ComplexInterval::conj(self)
    }
    #[inline]
    fn mul_i(&self) -> Self {
        ComplexInterval::mul_i(self)
    }
    #[inline]
    fn scale(&self, c: f64) -> Self {
        ComplexInterval::scale(self, c)
    }
    #[inline]
    fn is_zero(&self) -> bool {
        *self == ComplexInterval::ZERO
    }
}

impl Magnitude for ComplexInterval {
    #[inline]
    fn mag_up(&self) -> f64 {
        self.magnitude_upper()
    }
}

/// Number of stored Taylor coefficients; the system map is quartic.
pub const JET_LEN: usize = 5;

/// Polynomial in the segment parameter `s` with interval coefficients,
/// truncated at degree four (exact for every product the system forms).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet(pub [ComplexInterval; JET_LEN]);

impl Jet {
    pub fn constant(c: ComplexInterval) -> Self {
        let mut v = [ComplexInterval::ZERO; JET_LEN];
        v[0] = c;
        Jet(v)
    }

    /// `c0 + s * c1`.
    pub fn affine(c0: ComplexInterval, c1: ComplexInterval) -> Self {
        let mut v = [ComplexInterval::ZERO; JET_LEN];
        v[0] = c0;
        v[1] = c1;
        Jet(v)
    }

    pub fn coeff(&self, i: usize) -> ComplexInterval {
        self.0[i]
    }

    /// Enclosure of the value at a parameter (point or interval).
    pub fn eval(&self, s: ScalarInterval) -> ComplexInterval {
        let mut acc = self.0[JET_LEN - 1];
        for i in (0..JET_LEN - 1).rev() {
            acc = acc.scale_interval(s) + self.0[i];
        }
        acc
    }
}

impl Add for Jet {
    type Output = Self;
    fn add(self, b: Self) -> Self {
        let mut v = self.0;
        for (x, y) in v.iter_mut().zip(b.0) {
            *x += y;
        }
        Jet(v)
    }
}

impl Sub for Jet {
    type Output = Self;
    fn sub(self, b: Self) -> Self {
        let mut v = self.0;
        for (x, y) in v.iter_mut().zip(b.0) {
            *x -= y;
        }
        Jet(v)
    }
}

impl Neg for Jet {
    type Output = Self;
    fn neg(self) -> Self {
        Jet(self.0.map(|c| -c))
    }
}

impl Mul for Jet {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        let deg = |j: &Jet| j.0.iter().rposition(|c| *c != ComplexInterval::ZERO);
        let (da, db) = match (deg(&self), deg(&b)) {
            (Some(x), Some(y)) => (x, y),
            _ => return Jet::zero(),
        };
        assert!(da + db < JET_LEN, "jet product exceeds degree {}", JET_LEN - 1);
        let mut v = [ComplexInterval::ZERO; JET_LEN];
        for i in 0..=da {
            if self.0[i] == ComplexInterval::ZERO {
                continue;
            }
            for j in 0..=db {
                v[i + j] += self.0[i] * b.0[j];
            }
        }
        Jet(v)
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, b: Self) {
        *self = *self + b;
    }
}

impl SubAssign for Jet {
    fn sub_assign(&mut self, b: Self) {
        *self = *self - b;
    }
}

impl Coef for Jet {
    fn zero() -> Self {
        Jet([ComplexInterval::ZERO; JET_LEN])
    }
    fn from_c64(z: Complex64) -> Self {
        Jet::constant(ComplexInterval::point(z))
    }
    fn conj(&self) -> Self {
        Jet(self.0.map(|c| c.conj()))
    }
    fn mul_i(&self) -> Self {
        Jet(self.0.map(|c| c.mul_i()))
    }
    fn scale(&self, c: f64) -> Self {
        Jet(self.0.map(|x| x.scale(c)))
    }
    fn is_zero(&self) -> bool {
        self.0.iter().all(|c| *c == ComplexInterval::ZERO)
    }
}
