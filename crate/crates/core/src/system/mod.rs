//! The Kuramoto–Sivashinsky Hopf blow-up system.
//!
//! Unknowns x = (λ₁, λ₂, a, y, z). The map is
//!
//! ```text
//! F₁ = λ₂K⁴y − K²y − iK(y*y)
//! F₂ = iJz + λ₁λ₂K⁴z − λ₁K²z − λ₁iK(2E y*z + a z*z)
//! G₁ = ⟨J²conj(ẑ), z⟩ − 1     G₂ = ⟨iKŷ, y⟩
//! G₃ = ⟨iK(Eŷ + âẑ), z⟩       G₄ = ⟨iJẑ, z⟩
//! E  = ⟨x, q⟩ − c
//! ```
//!
//! Since (F₁)₀ and (F₂)₀₀ vanish identically, the residual is stored in the
//! shape of X with the scalar equations re-homed: slots (λ₁, λ₂, a) hold
//! (E, G₁, G₄), slot y₀ holds G₂ and slot z₀₀ holds G₃.

mod derivs;
mod jacobian;

pub use derivs::{d2h_blocks, d2h_sup_bounds, d3h_blocks, DerivBlocks, DERIV_POWERS};
pub use jacobian::{build_a, build_a_dagger, jacobian_c64, jacobian_finite, symmetrize_matrix, JacobianColumns, SystemError};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coef::{Coef, Jet};
use crate::interval::{ComplexInterval, ScalarInterval};
use crate::sequence::{conv1d, conv2d, embed_ell, Seq1D, Seq2D, XVector};

/// Which scalar equation occupies each re-homed slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowRole {
    Continuation,
    Amplitude,
    TimePhase,
    SpacePhaseY,
    SpacePhaseZ,
    F1(i64),
    F2(i64, i64),
}

pub fn row_role(idx: crate::sequence::XIndex) -> RowRole {
    use crate::sequence::XIndex;
    match idx {
        XIndex::Scalar(0) => RowRole::Continuation,
        XIndex::Scalar(1) => RowRole::Amplitude,
        XIndex::Scalar(_) => RowRole::TimePhase,
        XIndex::Y(0) => RowRole::SpacePhaseY,
        XIndex::Y(k) => RowRole::F1(k),
        XIndex::Z(0, 0) => RowRole::SpacePhaseZ,
        XIndex::Z(j, k) => RowRole::F2(j, k),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContinuationMode {
    PseudoArclength,
    #[default]
    ParameterInA,
}

/// Anchors entering H at one parameter value: x̂ (phase and amplitude
/// conditions) and the continuation covector q with offset c.
#[derive(Clone, Debug, PartialEq)]
pub struct AnchorPoint<T = ComplexInterval> {
    pub xhat: XVector<T>,
    pub q: XVector<T>,
    pub c: T,
}

impl<T: Coef> AnchorPoint<T> {
    pub fn map<U: Coef>(&self, f: impl Fn(T) -> U + Copy) -> AnchorPoint<U> {
        AnchorPoint { xhat: self.xhat.map(f), q: self.q.map(f), c: f(self.c) }
    }
}

/// The covector (0,0,1,0,0) of parameter continuation in a.
pub fn q_parameter_in_a<T: Coef>(t: crate::sequence::Truncation) -> XVector<T> {
    let mut q = XVector::zeros(t);
    q.a = T::one();
    q
}

/// Anchors at both ends of a segment.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemAnchors {
    pub xhat0: XVector<Complex64>,
    pub xhat1: XVector<Complex64>,
    pub q0: XVector<Complex64>,
    pub q1: XVector<Complex64>,
    pub c0: Complex64,
    pub c1: Complex64,
    pub mode: ContinuationMode,
}

impl ProblemAnchors {
    pub fn endpoint(&self, sigma: usize) -> AnchorPoint<ComplexInterval> {
        let (x, q, c) = if sigma == 0 { (&self.xhat0, &self.q0, self.c0) } else { (&self.xhat1, &self.q1, self.c1) };
        AnchorPoint { xhat: x.map(ComplexInterval::point), q: q.map(ComplexInterval::point), c: ComplexInterval::point(c) }
    }

    /// Anchors as affine jets in s.
    pub fn jet(&self) -> AnchorPoint<Jet> {
        let aff = |a: Complex64, b: Complex64| {
            Jet::affine(ComplexInterval::point(a), ComplexInterval::point(b) - ComplexInterval::point(a))
        };
        let xv = |a: &XVector<Complex64>, b: &XVector<Complex64>| affine_vec(a, b, aff);
        AnchorPoint { xhat: xv(&self.xhat0, &self.xhat1), q: xv(&self.q0, &self.q1), c: aff(self.c0, self.c1) }
    }

    /// Anchors with s ranging over an interval (coefficientwise hull of the
    /// affine interpolation).
    pub fn over(&self, s: ScalarInterval) -> AnchorPoint<ComplexInterval> {
        self.jet().map(move |j: Jet| j.eval(s))
    }

    /// x_Δ = x̂₁ − x̂₀ in interval arithmetic.
    pub fn delta(&self) -> XVector<ComplexInterval> {
        self.xhat1.map(ComplexInterval::point).sub(&self.xhat0.map(ComplexInterval::point))
    }

    pub fn q_delta(&self) -> XVector<ComplexInterval> {
        self.q1.map(ComplexInterval::point).sub(&self.q0.map(ComplexInterval::point))
    }
}

impl AnchorPoint<Jet> {
    pub fn map_jet<U: Coef>(&self, f: impl Fn(Jet) -> U + Copy) -> AnchorPoint<U> {
        AnchorPoint { xhat: self.xhat.map(f), q: self.q.map(f), c: f(self.c) }
    }
}

fn affine_vec<T: Coef>(a: &XVector<Complex64>, b: &XVector<Complex64>, f: impl Fn(Complex64, Complex64) -> T) -> XVector<T> {
    let t = a.support().max(&b.support());
    let (a, b) = (a.resized(t), b.resized(t));
    XVector {
        lambda1: f(a.lambda1, b.lambda1),
        lambda2: f(a.lambda2, b.lambda2),
        a: f(a.a, b.a),
        y: Seq1D::from_fn(t.n, |k| f(a.y.get(k), b.y.get(k))),
        z: Seq2D::from_fn(t.m, t.n, |j, k| f(a.z.get(j, k), b.z.get(j, k))),
    }
}

/// Multiply coefficient k of a 1D sequence by k^p (p ∈ {1,2,4}).
pub fn kpow1<T: Coef>(u: &Seq1D<T>, p: u32) -> Seq1D<T> {
    u.map_indexed(|k, c| c.scale((k as f64).powi(p as i32)))
}

pub fn kpow2<T: Coef>(u: &Seq2D<T>, p: u32) -> Seq2D<T> {
    u.map_indexed(|_, k, c| c.scale((k as f64).powi(p as i32)))
}

/// −iK applied to a 2D sequence.
pub(crate) fn minus_ik2<T: Coef>(u: &Seq2D<T>) -> Seq2D<T> {
    u.map_indexed(|_, k, c| -c.mul_i().scale(k as f64))
}

pub(crate) fn minus_ik1<T: Coef>(u: &Seq1D<T>) -> Seq1D<T> {
    u.map_indexed(|k, c| -c.mul_i().scale(k as f64))
}

/// F₁(λ₂, y) = λ₂K⁴y − K²y − iK(y*y).
pub fn eval_f1<T: Coef>(lambda2: T, y: &Seq1D<T>) -> Seq1D<T> {
    let yy = conv1d(y, y);
    let lin = y.map_indexed(|k, c| {
        let k2 = (k * k) as f64;
        lambda2 * c.scale(k2 * k2) - c.scale(k2)
    });
    lin.add(&minus_ik1(&yy))
}

/// F₂(x) = iJz + λ₁λ₂K⁴z − λ₁K²z − λ₁iK(2E y*z + a z*z).
pub fn eval_f2<T: Coef>(x: &XVector<T>) -> Seq2D<T> {
    let (l1, l2) = (x.lambda1, x.lambda2);
    let l12 = l1 * l2;
    let lin = x.z.map_indexed(|j, k, c| {
        let k2 = (k * k) as f64;
        c.mul_i().scale(j as f64) + l12 * c.scale(k2 * k2) - l1 * c.scale(k2)
    });
    let eyz = conv2d(&embed_ell(&x.y), &x.z).scale(2.0);
    let zz = conv2d(&x.z, &x.z).mul_scalar(x.a);
    let nl = minus_ik2(&eyz.add(&zz)).mul_scalar(l1);
    lin.add(&nl)
}

/// (G₁, G₂, G₃, G₄) with anchors x̂.
pub fn eval_g<T: Coef>(x: &XVector<T>, anc: &AnchorPoint<T>) -> [T; 4] {
    let zh = &anc.xhat.z;
    let yh = &anc.xhat.y;
    let ah = anc.xhat.a;
    let mut g1 = -T::one();
    let mut g3 = T::zero();
    let mut g4 = T::zero();
    for (j, k, zc) in x.z.iter() {
        if zc.is_zero() {
            continue;
        }
        let h = zh.get(j, k);
        g1 += h.conj().scale((j * j) as f64) * zc;
        g4 += h.mul_i().scale(j as f64) * zc;
        let mut v = ah * h;
        if j == 0 {
            v += yh.get(k);
        }
        g3 += v.mul_i().scale(k as f64) * zc;
    }
    let mut g2 = T::zero();
    for (k, yc) in x.y.iter() {
        g2 += yh.get(k).mul_i().scale(k as f64) * yc;
    }
    [g1, g2, g3, g4]
}

/// E = ⟨x, q⟩ − c.
pub fn eval_e<T: Coef>(x: &XVector<T>, anc: &AnchorPoint<T>) -> T {
    x.inner(&anc.q) - anc.c
}

/// H(x) in the re-homed layout; support is that of F₂ (twice the input).
pub fn eval_h<T: Coef>(x: &XVector<T>, anc: &AnchorPoint<T>) -> XVector<T> {
    let f1 = eval_f1(x.lambda2, &x.y);
    let f2 = eval_f2(x);
    let [g1, g2, g3, g4] = eval_g(x, anc);
    let n = f1.n().max(f2.n());
    let mut out = XVector { lambda1: eval_e(x, anc), lambda2: g1, a: g4, y: f1.resized(n), z: f2.resized(f2.m(), n) };
    out.y.set(0, g2);
    out.z.set(0, 0, g3);
    out
}

/// H_s(x) with anchors interpolated at s (point or interval).
pub fn eval_hs(x: &XVector<ComplexInterval>, s: ScalarInterval, anchors: &ProblemAnchors) -> XVector<ComplexInterval> {
    eval_h(x, &anchors.over(s))
}

/// DH(x)w with fixed anchors.
pub fn dh_apply<T: Coef>(x: &XVector<T>, anc: &AnchorPoint<T>, w: &XVector<T>) -> XVector<T> {
    let (l1, l2, a) = (x.lambda1, x.lambda2, x.a);
    let (b1, b2, b) = (w.lambda1, w.lambda2, w.a);
    // F1: β₂K⁴y + (λ₂K⁴ − K²)r − 2iK(y*r)
    let yr = conv1d(&w.y, &x.y).scale(2.0);
    let mut f1 = kpow1(&x.y, 4).mul_scalar(b2).add(&w.y.map_indexed(|k, c| {
        let k2 = (k * k) as f64;
        l2 * c.scale(k2 * k2) - c.scale(k2)
    }));
    f1 = f1.add(&minus_ik1(&yr));
    // F2
    let ey = embed_ell(&x.y);
    let er = embed_ell(&w.y);
    let lin_s = w.z.map_indexed(|j, k, c| {
        let k2 = (k * k) as f64;
        c.mul_i().scale(j as f64) + (l1 * l2) * c.scale(k2 * k2) - l1 * c.scale(k2)
    });
    let lin_z = x.z.map_indexed(|_, k, c| {
        let k2 = (k * k) as f64;
        (b1 * l2 + l1 * b2) * c.scale(k2 * k2) - b1 * c.scale(k2)
    });
    let zz = conv2d(&x.z, &x.z);
    let n0 = conv2d(&ey, &x.z).scale(2.0).add(&zz.mul_scalar(a));
    let zs = conv2d(&w.z, &x.z);
    let n1 = conv2d(&er, &x.z)
        .scale(2.0)
        .add(&conv2d(&w.z, &ey).scale(2.0))
        .add(&zz.mul_scalar(b))
        .add(&zs.mul_scalar(a).scale(2.0));
    let nl = minus_ik2(&n0.mul_scalar(b1).add(&n1.mul_scalar(l1)));
    let f2 = lin_s.add(&lin_z).add(&nl);
    let g = eval_g_linear(w, anc);
    let n = f1.n().max(f2.n());
    let mut out = XVector { lambda1: w.inner(&anc.q), lambda2: g[0], a: g[3], y: f1.resized(n), z: f2.resized(f2.m(), n) };
    out.y.set(0, g[1]);
    out.z.set(0, 0, g[2]);
    out
}

/// Linear parts of G (the G's without the constant −1).
fn eval_g_linear<T: Coef>(w: &XVector<T>, anc: &AnchorPoint<T>) -> [T; 4] {
    let mut g = eval_g(w, anc);
    g[0] += T::one();
    g
}

/// H with every anchor set to x itself (holomorphic form on S(X)):
/// G₁ = Σ j² z_{−j,−k} z_{jk} − 1 and so on. Used by the Newton solver.
pub fn eval_h_self<T: Coef>(x: &XVector<T>, q: &XVector<T>, c: T) -> XVector<T> {
    let anc = AnchorPoint { xhat: x.clone(), q: q.clone(), c };
    let mut h = eval_h(x, &anc);
    let [g1, g2, g3, g4] = self_anchored_g(x);
    h.lambda2 = g1;
    h.a = g4;
    h.y.set(0, g2);
    h.z.set(0, 0, g3);
    h
}

fn self_anchored_g<T: Coef>(x: &XVector<T>) -> [T; 4] {
    let mut g1 = -T::one();
    let (mut g3, mut g4) = (T::zero(), T::zero());
    for (j, k, zc) in x.z.iter() {
        g1 += x.z.get(-j, -k).scale((j * j) as f64) * zc;
        g4 += (zc * zc).mul_i().scale(j as f64);
        let mut v = x.a * zc;
        if j == 0 {
            v += x.y.get(k);
        }
        g3 += (v * zc).mul_i().scale(k as f64);
    }
    let g2 = x.y.iter().fold(T::zero(), |acc, (k, c)| acc + (c * c).mul_i().scale(k as f64));
    [g1, g2, g3, g4]
}

/// Derivative of the anchors' contribution in [`eval_h_self`], i.e. the
/// extra terms beyond DH with frozen anchors.
pub fn self_anchor_correction<T: Coef>(x: &XVector<T>, w: &XVector<T>) -> [T; 4] {
    let (mut g1, mut g3, mut g4) = (T::zero(), T::zero(), T::zero());
    for (j, k, s) in w.z.iter() {
        if s.is_zero() {
            continue;
        }
        let z = x.z.get(j, k);
        g1 += x.z.get(-j, -k).scale((j * j) as f64) * s;
        g4 += (z * s).mul_i().scale(j as f64);
        g3 += (x.a * s * z).mul_i().scale(k as f64);
    }
    for (j, k, z) in x.z.iter() {
        let mut v = w.a * z;
        if j == 0 {
            v += w.y.get(k);
        }
        g3 += (v * z).mul_i().scale(k as f64);
    }
    let g2 = w.y.iter().fold(T::zero(), |acc, (k, r)| acc + (x.y.get(k) * r).mul_i().scale(k as f64));
    [g1, g2, g3, g4]
}
