//! Columns of DH, the approximate derivative A† and its inverse A.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::coef::Coef;
use crate::interval::ComplexInterval;
use crate::operators::{materialize, CMat, ColumnMap, DiagonalTail, EventuallyDiagonalOperator, FiniteBlockOperator, TailEntry};
use crate::par::Execution;
use crate::sequence::{Truncation, XIndex, XVector};
use crate::tail::{DiagonalDenominator, RationalDiagonalSymbol, TailSpace};

use super::{dh_apply, self_anchor_correction, AnchorPoint};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SystemError {
    #[error("finite part of A† is numerically singular")]
    Singular,
}

/// Columns DH(x)e_c with frozen anchors, built entry by entry.
pub struct JacobianColumns<T: Coef> {
    pub x: XVector<T>,
    pub anc: AnchorPoint<T>,
    scalar_cols: [XVector<T>; 3],
}

impl<T: Coef> JacobianColumns<T> {
    pub fn new(x: &XVector<T>, anc: &AnchorPoint<T>) -> Self {
        let unit = |i: usize| {
            let mut w = XVector::zeros(Truncation::new(0, 0));
            w.set_scalar(i, T::one());
            dh_apply(x, anc, &w)
        };
        Self { x: x.clone(), anc: anc.clone(), scalar_cols: [unit(0), unit(1), unit(2)] }
    }

    /// Entries of DH(x)e_col at the rows of `rows`.
    pub fn entries(&self, col: XIndex, rows: Truncation) -> Vec<T> {
        let mut v = vec![T::zero(); rows.dim()];
        let mut put = |idx: XIndex, c: T| {
            if rows.contains(idx) {
                v[rows.pos(idx)] += c;
            }
        };
        let x = &self.x;
        let (l1, l2) = (x.lambda1, x.lambda2);
        let xh = &self.anc.xhat;
        match col {
            XIndex::Scalar(i) => {
                for idx in rows.indices() {
                    put(idx, self.scalar_cols[i].get(idx));
                }
            }
            XIndex::Y(kc) => {
                put(XIndex::Scalar(0), self.anc.q.y.get(kc));
                put(XIndex::Y(0), xh.y.get(kc).mul_i().scale(kc as f64));
                if kc != 0 {
                    let k2 = (kc * kc) as f64;
                    put(XIndex::Y(kc), l2.scale(k2 * k2) - T::real(k2));
                }
                // −2iK(y * e_kc)
                for (dk, yc) in x.y.iter() {
                    let k = kc + dk;
                    if k != 0 && !yc.is_zero() {
                        put(XIndex::Y(k), -yc.mul_i().scale(2.0 * k as f64));
                    }
                }
                // −2iλ₁K(E e_kc * z)
                for (j, dk, zc) in x.z.iter() {
                    let k = kc + dk;
                    if k != 0 && !zc.is_zero() {
                        put(XIndex::Z(j, k), -(l1 * zc).mul_i().scale(2.0 * k as f64));
                    }
                }
            }
            XIndex::Z(jc, kc) => {
                put(XIndex::Scalar(0), self.anc.q.z.get(jc, kc));
                let h = xh.z.get(jc, kc);
                put(XIndex::Scalar(1), h.conj().scale((jc * jc) as f64));
                put(XIndex::Scalar(2), h.mul_i().scale(jc as f64));
                let mut g3 = self.anc.xhat.a * h;
                if jc == 0 {
                    g3 += xh.y.get(kc);
                }
                put(XIndex::Z(0, 0), g3.mul_i().scale(kc as f64));
                if (jc, kc) != (0, 0) {
                    let k2 = (kc * kc) as f64;
                    put(XIndex::Z(jc, kc), T::one().mul_i().scale(jc as f64) + (l1 * l2).scale(k2 * k2) - l1.scale(k2));
                }
                // −2iλ₁K(Ey * e)
                for (dk, yc) in x.y.iter() {
                    let k = kc + dk;
                    if k != 0 && !yc.is_zero() {
                        put(XIndex::Z(jc, k), -(l1 * yc).mul_i().scale(2.0 * k as f64));
                    }
                }
                // −2iλ₁aK(z * e)
                let la = l1 * x.a;
                if !la.is_zero() {
                    for (dj, dk, zc) in x.z.iter() {
                        let k = kc + dk;
                        if k != 0 && !zc.is_zero() {
                            put(XIndex::Z(jc + dj, k), -(la * zc).mul_i().scale(2.0 * k as f64));
                        }
                    }
                }
            }
        }
        v
    }

    /// Truncation holding the full image of `col`.
    fn image_support(&self, col: XIndex) -> Truncation {
        let s = self.x.support().max(&self.anc.xhat.support());
        let base = s.double().max(&self.anc.q.support());
        match col {
            XIndex::Scalar(_) => base,
            XIndex::Y(k) => base.max(&Truncation::new(s.m, s.n + k.unsigned_abs() as usize)),
            XIndex::Z(j, k) => base.max(&Truncation::new(s.m + j.unsigned_abs() as usize, s.n + k.unsigned_abs() as usize)),
        }
    }
}

impl ColumnMap for JacobianColumns<ComplexInterval> {
    fn column(&self, col: XIndex) -> XVector<ComplexInterval> {
        let t = self.image_support(col);
        XVector::from_slice(t, &self.entries(col, t))
    }

    fn column_into(&self, col: XIndex, rows: Truncation) -> Vec<ComplexInterval> {
        self.entries(col, rows)
    }
}

/// Π_rows DH(x) Π_cols in interval arithmetic.
pub fn jacobian_finite(
    x: &XVector<ComplexInterval>,
    anc: &AnchorPoint<ComplexInterval>,
    rows: Truncation,
    cols: Truncation,
    exec: Execution,
) -> FiniteBlockOperator {
    materialize(&JacobianColumns::new(x, anc), rows, cols, exec)
}

/// Dense float Jacobian on `t`. With `self_anchored`, the anchors track x
/// and the derivative includes their variation (Newton on the holomorphic
/// self-anchored system).
pub fn jacobian_c64(x: &XVector<Complex64>, q: &XVector<Complex64>, c: Complex64, t: Truncation, self_anchored: bool) -> DMatrix<Complex64> {
    let anc = AnchorPoint { xhat: x.clone(), q: q.clone(), c };
    let cols = JacobianColumns::new(x, &anc);
    let mut m = DMatrix::zeros(t.dim(), t.dim());
    for (ci, idx) in t.indices().enumerate() {
        let mut v = cols.entries(idx, t);
        if self_anchored {
            let mut w = XVector::zeros(Truncation::new(0, 0).max(&idx_trunc(idx)));
            w.set(idx, Complex64::new(1.0, 0.0));
            let [g1, g2, g3, g4] = self_anchor_correction(x, &w);
            v[1] += g1;
            v[2] += g4;
            v[t.pos(XIndex::Y(0))] += g2;
            v[t.pos(XIndex::Z(0, 0))] += g3;
        }
        for (r, e) in v.into_iter().enumerate() {
            m[(r, ci)] = e;
        }
    }
    m
}

fn idx_trunc(idx: XIndex) -> Truncation {
    match idx {
        XIndex::Scalar(_) => Truncation::new(0, 0),
        XIndex::Y(k) => Truncation::new(0, k.unsigned_abs() as usize),
        XIndex::Z(j, k) => Truncation::new(j.unsigned_abs() as usize, k.unsigned_abs() as usize),
    }
}

/// A† = Π^{(K)} DH(x̂) Π^{(K)} with the diagonal linear parts P₁, P₂ as tails.
pub fn build_a_dagger(anc: &AnchorPoint<ComplexInterval>, t: Truncation, exec: Execution) -> EventuallyDiagonalOperator {
    let finite = jacobian_finite(&anc.xhat, anc, t, t, exec);
    let x = &anc.xhat;
    let tail = DiagonalTail {
        threshold: t,
        y: TailEntry::Poly(DiagonalDenominator::p1(x.lambda2)),
        z: TailEntry::Poly(DiagonalDenominator::p2(x.lambda1, x.lambda2)),
    };
    EventuallyDiagonalOperator::new(finite, tail)
}

/// Â = (A + P conj(A) P)/2 with P the index reflection; Â commutes with the
/// conjugation x ↦ x*. The result is exactly symmetric in floating point.
pub fn symmetrize_matrix(m: &DMatrix<Complex64>, t: Truncation) -> DMatrix<Complex64> {
    let p: Vec<usize> = t.indices().map(|i| t.pos(i.reflect())).collect();
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| (m[(i, j)] + m[(p[i], p[j])].conj()) * 0.5)
}

/// A = (A†_F)^{-1} (numerical, symmetrized) with tails 1/P₁, 1/P₂. Also
/// returns the 1-norm condition estimate ‖A†_F‖₁‖A_F‖₁.
pub fn build_a(a_dagger: &EventuallyDiagonalOperator) -> Result<(EventuallyDiagonalOperator, f64), SystemError> {
    let t = a_dagger.center();
    let mid = a_dagger.finite.mat.to_c64();
    let inv = mid.clone().try_inverse().ok_or(SystemError::Singular)?;
    if inv.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(SystemError::Singular);
    }
    let inv = symmetrize_matrix(&inv, t);
    let cond = norm1(&mid) * norm1(&inv);
    let (TailEntry::Poly(p1), TailEntry::Poly(p2)) = (a_dagger.tail.y, a_dagger.tail.z) else {
        unreachable!("A† tails are polynomial")
    };
    let tail = DiagonalTail {
        threshold: t,
        y: TailEntry::Rational(RationalDiagonalSymbol::recip(p1, t, TailSpace::Y)),
        z: TailEntry::Rational(RationalDiagonalSymbol::recip(p2, t, TailSpace::Z)),
    };
    Ok((EventuallyDiagonalOperator::new(FiniteBlockOperator::new(t, t, CMat::from_c64(&inv)), tail), cond))
}

fn norm1(m: &DMatrix<Complex64>) -> f64 {
    (0..m.ncols()).map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}
