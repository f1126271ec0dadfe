//! Second and third derivatives of H in K^p-factored block form.
//!
//! Every nonzero block of D²H(x)[w,·] and D³H(x)[u,u,·] is K^p times an
//! operator of one of three shapes: a column vector (acting on a scalar
//! coordinate), a multiple of the identity, or a convolution. Bounds on A
//! times these blocks then factor as ‖A K^p‖ · ‖block‖.

use crate::coef::{Coef, Magnitude};
use crate::interval::round::{add_up, mul_up};
use crate::operators::BlockNormMatrix;
use crate::sequence::{conv2d, embed_ell, Seq1D, Seq2D, Weights, XVector};

use super::{kpow1, kpow2};

/// Powers of K carried by the blocks, by slot.
pub const DERIV_POWERS: [u32; 3] = [1, 2, 4];

/// Blocks indexed `[p][m]` with p a slot of [`DERIV_POWERS`] and m the
/// scalar column (λ₁, λ₂, a).
#[derive(Clone, Debug, PartialEq)]
pub struct DerivBlocks<T> {
    pub y_from_scalar: [[Seq1D<T>; 3]; 3],
    pub y_from_y_mult: [T; 3],
    pub y_from_y_conv: [Seq1D<T>; 3],
    pub z_from_scalar: [[Seq2D<T>; 3]; 3],
    /// Acts as u * E r.
    pub z_from_y_conv: [Seq2D<T>; 3],
    pub z_from_z_mult: [T; 3],
    pub z_from_z_conv: [Seq2D<T>; 3],
}

impl<T: Coef> DerivBlocks<T> {
    pub fn zeros() -> Self {
        Self {
            y_from_scalar: std::array::from_fn(|_| std::array::from_fn(|_| Seq1D::zeros(0))),
            y_from_y_mult: [T::zero(); 3],
            y_from_y_conv: std::array::from_fn(|_| Seq1D::zeros(0)),
            z_from_scalar: std::array::from_fn(|_| std::array::from_fn(|_| Seq2D::zeros(0, 0))),
            z_from_y_conv: std::array::from_fn(|_| Seq2D::zeros(0, 0)),
            z_from_z_mult: [T::zero(); 3],
            z_from_z_conv: std::array::from_fn(|_| Seq2D::zeros(0, 0)),
        }
    }

    /// The bilinear (or trilinear) form applied to the last argument c.
    pub fn apply(&self, c: &XVector<T>) -> XVector<T> {
        let scal = [c.lambda1, c.lambda2, c.a];
        let ec = embed_ell(&c.y);
        let mut y = Seq1D::zeros(0);
        let mut z = Seq2D::zeros(0, 0);
        for (slot, &p) in DERIV_POWERS.iter().enumerate() {
            let mut ys = c.y.mul_scalar(self.y_from_y_mult[slot]).add(&crate::sequence::conv1d(&self.y_from_y_conv[slot], &c.y));
            let mut zs = c.z
                .mul_scalar(self.z_from_z_mult[slot])
                .add(&conv2d(&self.z_from_z_conv[slot], &c.z))
                .add(&conv2d(&self.z_from_y_conv[slot], &ec));
            for m in 0..3 {
                ys = ys.add(&self.y_from_scalar[slot][m].mul_scalar(scal[m]));
                zs = zs.add(&self.z_from_scalar[slot][m].mul_scalar(scal[m]));
            }
            y = y.add(&kpow1(&ys, p));
            z = z.add(&kpow2(&zs, p));
        }
        XVector { lambda1: T::zero(), lambda2: T::zero(), a: T::zero(), y, z }
    }
}

impl<T: Coef + Magnitude> DerivBlocks<T> {
    /// Block-norm bounds of the K^p-stripped operators, one matrix per slot.
    /// Row 0 (scalar equations) is always zero.
    pub fn norms(&self, w: &Weights) -> [BlockNormMatrix; 3] {
        std::array::from_fn(|slot| {
            let mut b = BlockNormMatrix::ZERO;
            b.0[1][0] = self.y_from_scalar[slot].iter().fold(0.0, |a, u| add_up(a, u.norm(w)));
            b.0[1][1] = add_up(self.y_from_y_mult[slot].mag_up(), self.y_from_y_conv[slot].norm(w));
            b.0[2][0] = self.z_from_scalar[slot].iter().fold(0.0, |a, u| add_up(a, u.norm(w)));
            b.0[2][1] = self.z_from_y_conv[slot].norm(w);
            b.0[2][2] = add_up(self.z_from_z_mult[slot].mag_up(), self.z_from_z_conv[slot].norm(w));
            b
        })
    }
}

fn minus_i2<T: Coef>(u: &Seq2D<T>) -> Seq2D<T> {
    u.map(|c| -c.mul_i())
}

fn minus_i1<T: Coef>(u: &Seq1D<T>) -> Seq1D<T> {
    u.map(|c| -c.mul_i())
}

/// D²H(x)[w, ·]. H is quadratic in the G and E rows' unknowns only through
/// fixed anchors, so only the F rows contribute.
pub fn d2h_blocks<T: Coef>(x: &XVector<T>, w: &XVector<T>) -> DerivBlocks<T> {
    let (l1, l2, a) = (x.lambda1, x.lambda2, x.a);
    let (b1, b2, b) = (w.lambda1, w.lambda2, w.a);
    let (y, z, r, s) = (&x.y, &x.z, &w.y, &w.z);
    let ey = embed_ell(y);
    let er = embed_ell(r);
    let zz = conv2d(z, z);
    let zs = conv2d(s, z);
    let mut d = DerivBlocks::zeros();
    // F₁ rows.
    d.y_from_scalar[2][1] = r.clone();
    d.y_from_y_mult[2] = b2;
    d.y_from_y_conv[0] = minus_i1(&r.scale(2.0));
    // F₂ rows, scalar columns.
    d.z_from_scalar[2][0] = z.mul_scalar(b2).add(&s.mul_scalar(l2));
    d.z_from_scalar[2][1] = z.mul_scalar(b1).add(&s.mul_scalar(l1));
    d.z_from_scalar[1][0] = s.scale(-1.0);
    let c1 = conv2d(&er, z)
        .scale(2.0)
        .add(&conv2d(s, &ey).scale(2.0))
        .add(&zz.mul_scalar(b))
        .add(&zs.mul_scalar(a).scale(2.0));
    d.z_from_scalar[0][0] = minus_i2(&c1);
    d.z_from_scalar[0][2] = minus_i2(&zz.mul_scalar(b1).add(&zs.mul_scalar(l1).scale(2.0)));
    // F₂ rows, sequence columns.
    d.z_from_y_conv[0] = minus_i2(&s.mul_scalar(l1).add(&z.mul_scalar(b1)).scale(2.0));
    d.z_from_z_mult[2] = b1 * l2 + l1 * b2;
    d.z_from_z_mult[1] = -b1;
    let cz = ey
        .mul_scalar(b1)
        .add(&er.mul_scalar(l1))
        .add(&z.mul_scalar(a * b1))
        .add(&z.mul_scalar(l1 * b))
        .add(&s.mul_scalar(l1 * a));
    d.z_from_z_conv[0] = minus_i2(&cz.scale(2.0));
    d
}

/// D³H(x)[u, u, ·]; only the cubic and quartic terms of F₂ contribute.
pub fn d3h_blocks<T: Coef>(x: &XVector<T>, u: &XVector<T>) -> DerivBlocks<T> {
    let (l1, a, z) = (x.lambda1, x.a, &x.z);
    let (d1, d2, da) = (u.lambda1, u.lambda2, u.a);
    let (dy, dz) = (&u.y, &u.z);
    let edy = embed_ell(dy);
    let dzdz = conv2d(dz, dz);
    let zdz = conv2d(dz, z);
    let mut d = DerivBlocks::zeros();
    d.z_from_scalar[2][0] = dz.mul_scalar(d2).scale(2.0);
    d.z_from_scalar[2][1] = dz.mul_scalar(d1).scale(2.0);
    d.z_from_z_mult[2] = (d1 * d2).scale(2.0);
    let c1 = conv2d(&edy, dz).scale(4.0).add(&dzdz.mul_scalar(a).scale(2.0)).add(&zdz.mul_scalar(da).scale(4.0));
    d.z_from_scalar[0][0] = minus_i2(&c1);
    d.z_from_scalar[0][2] = minus_i2(&dzdz.mul_scalar(l1).scale(2.0).add(&zdz.mul_scalar(d1).scale(4.0)));
    d.z_from_y_conv[0] = minus_i2(&dz.mul_scalar(d1).scale(4.0));
    let cz = edy.mul_scalar(d1).add(&dz.mul_scalar(l1 * da + d1 * a)).add(&z.mul_scalar(d1 * da));
    d.z_from_z_conv[0] = minus_i2(&cz.scale(4.0));
    d
}

/// Analytic bounds D^p_{nm} on D²H(x)[w,·] over ‖w‖ ≤ 1 and over all x
/// with component norms at most (l1, l2, aa, yn, zn). Returned per slot of
/// [`DERIV_POWERS`].
pub fn d2h_sup_bounds(l1: f64, l2: f64, aa: f64, yn: f64, zn: f64) -> [BlockNormMatrix; 3] {
    let a = |x: f64, y: f64| add_up(x, y);
    let m = |x: f64, y: f64| mul_up(x, y);
    let mut k1 = BlockNormMatrix::ZERO;
    let mut k2 = BlockNormMatrix::ZERO;
    let mut k4 = BlockNormMatrix::ZERO;
    k4.0[1][0] = 1.0;
    k4.0[1][1] = 1.0;
    k1.0[1][1] = 2.0;
    k4.0[2][0] = a(a(m(2.0, zn), l1), l2);
    k2.0[2][0] = 1.0;
    let zz = m(zn, zn);
    k1.0[2][0] = a(a(a(m(2.0, yn), m(2.0, zn)), m(2.0, zz)), a(m(m(2.0, aa), zn), m(m(2.0, l1), zn)));
    k1.0[2][1] = m(2.0, a(l1, zn));
    k4.0[2][2] = a(l1, l2);
    k2.0[2][2] = 1.0;
    k1.0[2][2] = m(2.0, a(a(yn, l1), a(m(aa, zn), m(l1, a(zn, aa)))));
    [k1, k2, k4]
}
