//! Directed rounding without touching the FPU rounding mode.
//!
//! Each operation is performed once in round-to-nearest, the exact rounding
//! error is recovered with an error-free transform, and the result is nudged
//! one ulp only when the error points the wrong way. Exact results stay exact.
//! Outside the range where the transforms are exact we widen unconditionally.

/// Products below this magnitude may have an unrepresentable error term.
const TINY: f64 = 1.0e-280;
/// Operands above this magnitude may overflow in the Veltkamp split.
const HUGE: f64 = 1.0e290;
const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1

#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn split(a: f64) -> (f64, f64) {
    let c = SPLITTER * a;
    let hi = c - (c - a);
    (hi, a - hi)
}

/// Dekker product: `a * b == p + e` exactly when no under/overflow occurs.
#[inline]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let e = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    (p, e)
}

#[inline]
fn safe_product_range(a: f64, b: f64, p: f64) -> bool {
    p.is_finite() && p.abs() > TINY && a.abs() < HUGE && b.abs() < HUGE
}

#[inline]
pub fn add_down(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    if !s.is_finite() {
        return if s == f64::INFINITY && a.is_finite() && b.is_finite() { f64::MAX } else { s };
    }
    if e < 0.0 {
        s.next_down()
    } else {
        s
    }
}

#[inline]
pub fn add_up(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    if !s.is_finite() {
        return if s == f64::NEG_INFINITY && a.is_finite() && b.is_finite() { f64::MIN } else { s };
    }
    if e > 0.0 {
        s.next_up()
    } else {
        s
    }
}

#[inline]
pub fn sub_down(a: f64, b: f64) -> f64 {
    add_down(a, -b)
}

#[inline]
pub fn sub_up(a: f64, b: f64) -> f64 {
    add_up(a, -b)
}

#[inline]
pub fn mul_down(a: f64, b: f64) -> f64 {
    let p = a * b;
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    if !safe_product_range(a, b, p) {
        return if p.is_nan() { p } else { p.next_down() };
    }
    let (_, e) = two_prod(a, b);
    if e < 0.0 {
        p.next_down()
    } else {
        p
    }
}

#[inline]
pub fn mul_up(a: f64, b: f64) -> f64 {
    let p = a * b;
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    if !safe_product_range(a, b, p) {
        return if p.is_nan() { p } else { p.next_up() };
    }
    let (_, e) = two_prod(a, b);
    if e > 0.0 {
        p.next_up()
    } else {
        p
    }
}

/// Sign of `a/b - q` for `q = fl(a/b)`, or `None` outside the exact range.
#[inline]
fn div_residual_sign(a: f64, b: f64, q: f64) -> Option<f64> {
    if !q.is_finite() || q == 0.0 || q.abs() < TINY || q.abs() > HUGE || b.abs() > HUGE || b.abs() < TINY {
        return None;
    }
    let (p, e) = two_prod(q, b);
    // a - q*b is representable, so this evaluates it exactly.
    let r = (a - p) - e;
    Some(if b > 0.0 { r } else { -r })
}

#[inline]
pub fn div_down(a: f64, b: f64) -> f64 {
    let q = a / b;
    if a == 0.0 && b != 0.0 {
        return 0.0;
    }
    match div_residual_sign(a, b, q) {
        Some(r) if r >= 0.0 => q,
        Some(_) => q.next_down(),
        None => q.next_down(),
    }
}

#[inline]
pub fn div_up(a: f64, b: f64) -> f64 {
    let q = a / b;
    if a == 0.0 && b != 0.0 {
        return 0.0;
    }
    match div_residual_sign(a, b, q) {
        Some(r) if r <= 0.0 => q,
        Some(_) => q.next_up(),
        None => q.next_up(),
    }
}

#[inline]
pub fn sqrt_down(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let s = x.sqrt();
    if !(TINY..=HUGE).contains(&x) {
        return s.next_down().max(0.0);
    }
    let (p, e) = two_prod(s, s);
    // x - s^2, exact for the same reason as in division.
    let r = (x - p) - e;
    if r < 0.0 {
        s.next_down()
    } else {
        s
    }
}

#[inline]
pub fn sqrt_up(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let s = x.sqrt();
    if !(TINY..=HUGE).contains(&x) {
        return s.next_up();
    }
    let (p, e) = two_prod(s, s);
    let r = (x - p) - e;
    if r > 0.0 {
        s.next_up()
    } else {
        s
    }
}

/// Upper bound for `sqrt(a^2 + b^2)` with `a, b >= 0`.
#[inline]
pub fn hypot_up(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return b;
    }
    if b == 0.0 {
        return a;
    }
    sqrt_up(add_up(mul_up(a, a), mul_up(b, b)))
}

/// Lower bound for `sqrt(a^2 + b^2)` with `a, b >= 0`.
#[inline]
pub fn hypot_down(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return b;
    }
    if b == 0.0 {
        return a;
    }
    sqrt_down(add_down(mul_down(a, a), mul_down(b, b)))
}

/// Upper bound of a sum of nonnegative terms accumulated left to right.
pub fn sum_up<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    terms.into_iter().fold(0.0, add_up)
}

/// Upper bound of `x^p` for `x >= 0`.
pub fn powi_up(x: f64, p: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..p {
        acc = mul_up(acc, x);
    }
    acc
}

/// Lower bound of `x^p` for `x >= 0`.
pub fn powi_down(x: f64, p: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..p {
        acc = mul_down(acc, x);
    }
    acc
}
