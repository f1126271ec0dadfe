//! Y, Z₀, Z₁ and Z₂ for a single anchor and for a segment.
//!
//! Operators are kept in block-norm form until the very end: every bound is
//! assembled as a [`BlockNormMatrix`] and reduced with the row-sum operator
//! norm of X once.

use nalgebra::DMatrix;

use crate::interval::round::{add_up, mul_up};
use crate::interval::{ComplexInterval, ScalarInterval};
use crate::operators::cmat::{abs_max, abs_mul};
use crate::operators::{block_norms, ed_apply, BlockNormMatrix, CMat, EventuallyDiagonalOperator};
use crate::sequence::{embed_ell, Seq1D, Seq2D, Truncation, Weights, XIndex, XVector};
use crate::system::{
    build_a, build_a_dagger, d2h_blocks, d2h_sup_bounds, d3h_blocks, eval_h, AnchorPoint, JacobianColumns, ProblemAnchors, DERIV_POWERS,
};
use crate::tail::{kpow_up, tail_norm_bound_with, DiagonalDenominator, RationalDiagonalSymbol, ScanRadii, TailSpace};

use super::{ValidationConfig, ValidationError};

/// Everything computed once per anchor point.
#[derive(Clone, Debug)]
pub struct Endpoint {
    pub t: Truncation,
    pub anc: AnchorPoint<ComplexInterval>,
    pub a_dagger: EventuallyDiagonalOperator,
    pub a: EventuallyDiagonalOperator,
    /// 1-norm condition estimate of A†_F.
    pub cond: f64,
    /// Entrywise |A^F|.
    pub a_abs: DMatrix<f64>,
    /// P₁ and P₂ at the anchor.
    pub dens: [DiagonalDenominator; 2],
    /// sup |k^p / P| over the y and z tails, per slot of [`DERIV_POWERS`].
    pub tail_kp: [[f64; 3]; 2],
    /// sup |k / P₂| over |j| ≤ M, |k| > N only, the part of the z tail
    /// reached by convolutions with K-supported kernels that keep j.
    pub z_ktail: f64,
    pub scan: ScanRadii,
}

fn space(i: usize) -> TailSpace {
    if i == 0 {
        TailSpace::Y
    } else {
        TailSpace::Z
    }
}

impl Endpoint {
    pub fn new(anc: AnchorPoint<ComplexInterval>, t: Truncation, cfg: &ValidationConfig) -> Result<Self, ValidationError> {
        let fits = |s: Truncation| s.m <= t.m && s.n <= t.n;
        if !fits(anc.xhat.support()) || !fits(anc.q.support()) {
            return Err(ValidationError::Support);
        }
        let exec = cfg.exec;
        let scan = cfg.scan.unwrap_or_else(|| ScanRadii::default_for(t));
        let a_dagger = build_a_dagger(&anc, t, exec);
        let (a, cond) = build_a(&a_dagger)?;
        let x = &anc.xhat;
        let dens = [DiagonalDenominator::p1(x.lambda2), DiagonalDenominator::p2(x.lambda1, x.lambda2)];
        let mut tail_kp = [[0.0; 3]; 2];
        for (i, den) in dens.iter().enumerate() {
            for (slot, &p) in DERIV_POWERS.iter().enumerate() {
                let sym = RationalDiagonalSymbol::monomial(ComplexInterval::ONE, p as usize, *den, t, space(i));
                tail_kp[i][slot] = tail_norm_bound_with(&sym, scan, exec)?;
            }
        }
        // |P₂| ≥ |Re P₂|, and on |k| > N the real part is the y-type symbol.
        let re = |c: ComplexInterval| ComplexInterval::real(c.re);
        let p2 = dens[1];
        let den_re = DiagonalDenominator { ij: false, alpha: re(p2.alpha), beta: re(p2.beta), gamma: re(p2.gamma) };
        let z_ktail = tail_norm_bound_with(&RationalDiagonalSymbol::monomial(ComplexInterval::ONE, 1, den_re, t, TailSpace::Y), scan, exec)?;
        let a_abs = a.finite.mat.abs_upper();
        Ok(Self { t, anc, a_dagger, a, cond, a_abs, dens, tail_kp, z_ktail, scan })
    }

    /// Block norms of A K^p for each slot of [`DERIV_POWERS`].
    pub fn akp(&self, w: &Weights, cfg: &ValidationConfig) -> [BlockNormMatrix; 3] {
        akp_norms(&self.a_abs, self.t, &self.tail_kp, w, cfg)
    }
}

/// Block norms of A K^p from |A^F| and the tail suprema; the tail only
/// touches the diagonal blocks, on columns disjoint from the finite part.
pub fn akp_norms(abs: &DMatrix<f64>, t: Truncation, tails: &[[f64; 3]; 2], w: &Weights, cfg: &ValidationConfig) -> [BlockNormMatrix; 3] {
    std::array::from_fn(|slot| {
        let p = DERIV_POWERS[slot];
        let scale: Vec<f64> = t
            .indices()
            .map(|idx| match idx {
                XIndex::Y(k) | XIndex::Z(_, k) => kpow_up(k.unsigned_abs(), p),
                XIndex::Scalar(_) => 0.0,
            })
            .collect();
        let m = DMatrix::from_fn(abs.nrows(), abs.ncols(), |i, j| mul_up(abs[(i, j)], scale[j]));
        let mut b = block_norms(&m, t, t, w, cfg.exec);
        b.0[1][1] = b.0[1][1].max(tails[0][slot]);
        b.0[2][2] = b.0[2][2].max(tails[1][slot]);
        b
    })
}

/// Σ_p ‖A K^p‖ · D^p as a block bound.
pub fn contract(akp: &[BlockNormMatrix; 3], d: &[BlockNormMatrix; 3]) -> BlockNormMatrix {
    (0..3).fold(BlockNormMatrix::ZERO, |acc, s| acc.add(&akp[s].mul(&d[s])))
}

fn max3(a: &[BlockNormMatrix; 3], b: &[BlockNormMatrix; 3]) -> [BlockNormMatrix; 3] {
    std::array::from_fn(|s| a[s].max(&b[s]))
}

/// Coefficientwise moduli as real point intervals.
pub fn abs_vec(x: &XVector<ComplexInterval>) -> XVector<ComplexInterval> {
    x.map(|c| ComplexInterval::real(ScalarInterval::point(c.magnitude_upper())))
}

fn abs_seq1(u: &Seq1D<ComplexInterval>) -> Seq1D<ComplexInterval> {
    u.map(|c| ComplexInterval::real(ScalarInterval::point(c.magnitude_upper())))
}

fn abs_seq2(u: &Seq2D<ComplexInterval>) -> Seq2D<ComplexInterval> {
    u.map(|c| ComplexInterval::real(ScalarInterval::point(c.magnitude_upper())))
}

fn up(c: ComplexInterval) -> f64 {
    c.magnitude_upper()
}

/// Entrywise max of two modulus vectors.
pub fn max_abs_vec(a: &XVector<ComplexInterval>, b: &XVector<ComplexInterval>) -> XVector<ComplexInterval> {
    let t = a.support().max(&b.support());
    let (a, b) = (a.resized(t), b.resized(t));
    let mut out = XVector::zeros(t);
    for idx in t.indices() {
        let v = up(a.get(idx)).max(up(b.get(idx)));
        out.set(idx, ComplexInterval::real(ScalarInterval::point(v)));
    }
    out
}

/// ‖A H(x̂)‖: H(x̂) has support 2K, so A H(x̂) is a finite computation.
pub fn y_single(ep: &Endpoint, w: &Weights) -> Result<f64, ValidationError> {
    let h = eval_h(&ep.anc.xhat, &ep.anc);
    Ok(ed_apply(&ep.a, &h)?.norm(w))
}

/// Π_K − A^F A†^F; the tails are exact inverses and contribute nothing.
pub fn z0_matrix(ep: &Endpoint, cfg: &ValidationConfig) -> CMat {
    ep.a.finite.mat.mul_with(&ep.a_dagger.finite.mat, cfg.exec).identity_minus()
}

pub fn z0_single(ep: &Endpoint, w: &Weights, cfg: &ValidationConfig) -> f64 {
    block_norms(&z0_matrix(ep, cfg).abs_upper(), ep.t, ep.t, w, cfg.exec).op_norm_bound()
}

/// Entrywise data of A(DH(x̂) − A†) at one anchor.
#[derive(Clone, Debug)]
pub struct Z1Parts {
    pub t: Truncation,
    /// |A^F Π_K DH(x̂) Π_{2K∖K}|, rows K and columns 2K.
    pub finite: DMatrix<f64>,
    /// Moduli of A^I Π_∞ DH(x̂) e_m for the scalar columns.
    pub scalar_cols: [XVector<ComplexInterval>; 3],
    /// Moduli of the kernels of the tail convolutions 2ŷ, 2λ̂₁ẑ, 2λ̂₁(Eŷ + âẑ).
    pub k22: Seq1D<ComplexInterval>,
    pub k32: Seq2D<ComplexInterval>,
    pub k33: Seq2D<ComplexInterval>,
    /// sup|k/P₁| over the y tail, sup|k/P₂| over the z tail and over its
    /// |k| > N part.
    pub tail: [f64; 3],
}

pub fn z1_parts(ep: &Endpoint, cfg: &ValidationConfig) -> Result<Z1Parts, ValidationError> {
    let t = ep.t;
    let x = &ep.anc.xhat;
    let cols = JacobianColumns::new(x, &ep.anc);
    let t2 = t.double();
    let columns = cfg.exec.map_range(t2.dim(), |c| {
        let idx = t2.index(c);
        if t.contains(idx) {
            vec![ComplexInterval::ZERO; t.dim()]
        } else {
            cols.entries(idx, t)
        }
    });
    let v = CMat::from_columns(t.dim(), columns);
    let finite = ep.a.finite.mat.mul_with(&v, cfg.exec).abs_upper();
    let mut scalar_cols: [XVector<ComplexInterval>; 3] = std::array::from_fn(|_| XVector::zeros(Truncation::new(0, 0)));
    for (m, out) in scalar_cols.iter_mut().enumerate() {
        let col = crate::operators::ColumnMap::column(&cols, XIndex::Scalar(m)).tail_project(t);
        *out = abs_vec(&ed_apply(&ep.a, &col)?.tail_project(t));
    }
    let l1 = x.lambda1;
    let two = ComplexInterval::real(ScalarInterval::point(2.0));
    let k22 = abs_seq1(&x.y.scale(2.0));
    let k32 = abs_seq2(&x.z.mul_scalar(two * l1));
    let k33 = abs_seq2(&embed_ell(&x.y).add(&x.z.mul_scalar(x.a)).mul_scalar(two * l1));
    Ok(Z1Parts { t, finite, scalar_cols, k22, k32, k33, tail: [ep.tail_kp[0][0], ep.tail_kp[1][0], ep.z_ktail.min(ep.tail_kp[1][0])] })
}

impl Z1Parts {
    pub fn norms(&self, w: &Weights, cfg: &ValidationConfig) -> BlockNormMatrix {
        let mut b = block_norms(&self.finite, self.t, self.t.double(), w, cfg.exec);
        for v in &self.scalar_cols {
            b.0[1][0] = add_up(b.0[1][0], v.y.norm(w));
            b.0[2][0] = add_up(b.0[2][0], v.z.norm(w));
        }
        b.0[1][1] = add_up(b.0[1][1], mul_up(self.tail[0], self.k22.norm(w)));
        // E(c)*ẑ keeps |j| ≤ M, so only the |k| > N part of the tail is hit.
        b.0[2][1] = add_up(b.0[2][1], mul_up(self.tail[2], self.k32.norm(w)));
        b.0[2][2] = add_up(b.0[2][2], mul_up(self.tail[1], self.k33.norm(w)));
        b
    }

    /// Entrywise maximum of two endpoint computations.
    pub fn max(&self, o: &Self) -> Self {
        let mx1 = |a: &Seq1D<ComplexInterval>, b: &Seq1D<ComplexInterval>| {
            let n = a.n().max(b.n());
            Seq1D::from_fn(n, |k| ComplexInterval::real(ScalarInterval::point(up(a.get(k)).max(up(b.get(k))))))
        };
        let mx2 = |a: &Seq2D<ComplexInterval>, b: &Seq2D<ComplexInterval>| {
            let (m, n) = (a.m().max(b.m()), a.n().max(b.n()));
            Seq2D::from_fn(m, n, |j, k| ComplexInterval::real(ScalarInterval::point(up(a.get(j, k)).max(up(b.get(j, k))))))
        };
        Self {
            t: self.t,
            finite: abs_max(&self.finite, &o.finite),
            scalar_cols: std::array::from_fn(|m| max_abs_vec(&self.scalar_cols[m], &o.scalar_cols[m])),
            k22: mx1(&self.k22, &o.k22),
            k32: mx2(&self.k32, &o.k32),
            k33: mx2(&self.k33, &o.k33),
            tail: std::array::from_fn(|i| self.tail[i].max(o.tail[i])),
        }
    }
}

pub fn z1_single(ep: &Endpoint, w: &Weights, cfg: &ValidationConfig) -> Result<f64, ValidationError> {
    Ok(z1_parts(ep, cfg)?.norms(w, cfg).op_norm_bound())
}

/// Component magnitudes (|λ₁|, |λ₂|, |a|, ‖y‖, ‖z‖) of x̂.
pub fn magnitudes(x: &XVector<ComplexInterval>, w: &Weights) -> [f64; 5] {
    [up(x.lambda1), up(x.lambda2), up(x.a), x.y.norm(w), x.z.norm(w)]
}

/// D²H bounds over the ball of radius R around points with the given
/// component magnitudes.
pub fn d2h_ball(mags: [f64; 5], r: f64) -> [BlockNormMatrix; 3] {
    let m = mags.map(|v| add_up(v, r));
    d2h_sup_bounds(m[0], m[1], m[2], m[3], m[4])
}

pub fn z2_single(ep: &Endpoint, w: &Weights, cfg: &ValidationConfig) -> f64 {
    let d = d2h_ball(magnitudes(&ep.anc.xhat, w), cfg.r_max);
    contract(&ep.akp(w, cfg), &d).op_norm_bound()
}

/// The four bounds at one anchor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds {
    pub y: f64,
    pub z0: f64,
    pub z1: f64,
    pub z2: f64,
}

pub fn single_bounds(ep: &Endpoint, cfg: &ValidationConfig) -> Result<Bounds, ValidationError> {
    let w = &cfg.weights;
    Ok(Bounds { y: y_single(ep, w)?, z0: z0_single(ep, w, cfg), z1: z1_single(ep, w, cfg)?, z2: z2_single(ep, w, cfg) })
}

/// `(P_a − P_b) / den` as a rational symbol; the `iJ` terms cancel.
fn difference_over(pa: &DiagonalDenominator, pb: &DiagonalDenominator, den: DiagonalDenominator, t: Truncation, sp: TailSpace) -> RationalDiagonalSymbol {
    let mut num = [ComplexInterval::ZERO; 5];
    num[4] = pa.alpha - pb.alpha;
    num[2] = pa.beta - pb.beta;
    num[0] = pa.gamma - pb.gamma;
    RationalDiagonalSymbol::new(num, den, t, sp)
}

/// Data shared by the segment bounds.
pub struct SegmentData<'a> {
    pub anchors: &'a ProblemAnchors,
    pub e0: &'a Endpoint,
    pub e1: &'a Endpoint,
    /// Coefficientwise hull of x̂_s over s ∈ [0,1].
    pub x_s: XVector<ComplexInterval>,
    pub x_delta: XVector<ComplexInterval>,
    /// A_Δ^F = A₁^F − A₀^F.
    pub a_delta: CMat,
    /// sup |(P₀ − P₁)/P₁| and sup |(P₀ − P₁)/P₀| on the y and z tails.
    pub ratio_over_p1: [f64; 2],
    pub ratio_over_p0: [f64; 2],
}

impl<'a> SegmentData<'a> {
    pub fn new(anchors: &'a ProblemAnchors, e0: &'a Endpoint, e1: &'a Endpoint, cfg: &ValidationConfig) -> Result<Self, ValidationError> {
        if e0.t != e1.t {
            return Err(ValidationError::Support);
        }
        let t = e0.t;
        let mut r1 = [0.0; 2];
        let mut r0 = [0.0; 2];
        for i in 0..2 {
            let (p0, p1) = (&e0.dens[i], &e1.dens[i]);
            r1[i] = tail_norm_bound_with(&difference_over(p0, p1, *p1, t, space(i)), e0.scan, cfg.exec)?;
            r0[i] = tail_norm_bound_with(&difference_over(p0, p1, *p0, t, space(i)), e0.scan, cfg.exec)?;
        }
        Ok(Self {
            anchors,
            e0,
            e1,
            x_s: anchors.over(ScalarInterval::UNIT).xhat,
            x_delta: anchors.delta(),
            a_delta: e1.a.finite.mat.sub(&e0.a.finite.mat),
            ratio_over_p1: r1,
            ratio_over_p0: r0,
        })
    }

    fn t(&self) -> Truncation {
        self.e0.t
    }

    /// Block bounds of A_Δ A†_Δ. The tail is −(P₁−P₀)²/(P₀P₁), bounded as
    /// the product of two order-four fractions.
    pub fn a_delta_a_dagger_delta(&self, w: &Weights, cfg: &ValidationConfig) -> BlockNormMatrix {
        let ad = self.e1.a_dagger.finite.mat.sub(&self.e0.a_dagger.finite.mat);
        let prod = self.a_delta.mul_with(&ad, cfg.exec);
        let mut b = block_norms(&prod.abs_upper(), self.t(), self.t(), w, cfg.exec);
        b.0[1][1] = b.0[1][1].max(mul_up(self.ratio_over_p0[0], self.ratio_over_p1[0]));
        b.0[2][2] = b.0[2][2].max(mul_up(self.ratio_over_p0[1], self.ratio_over_p1[1]));
        b
    }
}

/// Entrywise bound max{|f(0)|,|f(1)|} + sup|f″|/8 of a C² family on [0,1].
pub fn s_bound(f0: f64, f1: f64, f2_sup: f64) -> f64 {
    add_up(f0.abs().max(f1.abs()), f2_sup.abs() / 8.0 * (1.0 + f64::EPSILON))
}

/// sup_s ‖A_s H_s(x̂_s)‖. H_s(x̂_s) is a polynomial of degree at most four
/// in s; with A_s affine the product has degree five.
pub fn y_segment(seg: &SegmentData<'_>, w: &Weights) -> Result<f64, ValidationError> {
    let jet = seg.anchors.jet();
    let hj = eval_h(&jet.xhat, &jet);
    let h: Vec<XVector<ComplexInterval>> = (0..crate::coef::JET_LEN).map(|i| hj.map(|c| c.coeff(i))).collect();
    let a0 = &seg.e0.a;
    let a1 = &seg.e1.a;
    let mut curv: Option<XVector<ComplexInterval>> = None;
    for i in 2..=crate::coef::JET_LEN {
        let mut g = if i < h.len() { ed_apply(a0, &h[i])? } else { XVector::zeros(Truncation::new(0, 0)) };
        let prev = &h[i - 1];
        let ad = ed_apply(a1, prev)?.sub(&ed_apply(a0, prev)?);
        g = resize_add(&g, &ad);
        let term = abs_vec(&g).scale((i * (i - 1)) as f64);
        curv = Some(match curv {
            None => term,
            Some(c) => resize_add(&c, &term),
        });
    }
    let y0 = abs_vec(&ed_apply(a0, &eval_h(&seg.e0.anc.xhat, &seg.e0.anc))?);
    let y1 = abs_vec(&ed_apply(a1, &eval_h(&seg.e1.anc.xhat, &seg.e1.anc))?);
    let ends = max_abs_vec(&y0, &y1);
    let curv = curv.expect("jet has curvature terms").scale(0.125);
    Ok(resize_add(&ends, &curv).norm(w))
}

fn resize_add(a: &XVector<ComplexInterval>, b: &XVector<ComplexInterval>) -> XVector<ComplexInterval> {
    let t = a.support().max(&b.support());
    a.resized(t).add(&b.resized(t))
}

/// sup_s ‖I − A_s A†_s‖ and the block bounds of A_Δ A†_Δ (reused by Z₁).
pub fn z0_segment(seg: &SegmentData<'_>, w: &Weights, cfg: &ValidationConfig) -> (f64, BlockNormMatrix) {
    let t = seg.t();
    let m0 = z0_matrix(seg.e0, cfg).abs_upper();
    let m1 = z0_matrix(seg.e1, cfg).abs_upper();
    let ends = block_norms(&abs_max(&m0, &m1), t, t, w, cfg.exec);
    let dd = seg.a_delta_a_dagger_delta(w, cfg);
    (ends.add(&dd.scale(0.25)).op_norm_bound(), dd)
}

/// Rows of the anchor functionals re-homed into X.
fn functional_rows(t: Truncation) -> [usize; 5] {
    [t.pos(XIndex::Scalar(0)), t.pos(XIndex::Scalar(1)), t.pos(XIndex::Scalar(2)), t.pos(XIndex::Y(0)), t.pos(XIndex::Z(0, 0))]
}

/// Moduli of ∂_s of the anchored rows of DH_s(x̂_s) (the E, G₁, G₄, G₂, G₃
/// functionals), as a 5 × dim matrix over s ∈ [0,1].
fn anchor_derivative(seg: &SegmentData<'_>) -> DMatrix<f64> {
    let t = seg.t();
    let qd = seg.anchors.q_delta();
    let xd = &seg.x_delta;
    let xs = &seg.x_s;
    let mut m = DMatrix::zeros(5, t.dim());
    for (c, idx) in t.indices().enumerate() {
        m[(0, c)] = up(qd.get(idx));
        match idx {
            XIndex::Y(k) => m[(3, c)] = mul_up(k.unsigned_abs() as f64, up(xd.y.get(k))),
            XIndex::Z(j, k) => {
                let zd = xd.z.get(j, k);
                m[(1, c)] = mul_up((j * j) as f64, up(zd));
                m[(2, c)] = mul_up(j.unsigned_abs() as f64, up(zd));
                let mut v = xd.a * xs.z.get(j, k) + xs.a * zd;
                if j == 0 {
                    v += xd.y.get(k);
                }
                m[(4, c)] = mul_up(k.unsigned_abs() as f64, up(v));
            }
            XIndex::Scalar(_) => {}
        }
    }
    m
}

/// Moduli of ∂²_s of the anchored rows: only G₃ is quadratic in s.
fn anchor_second_derivative(seg: &SegmentData<'_>) -> DMatrix<f64> {
    let t = seg.t();
    let xd = &seg.x_delta;
    let mut m = DMatrix::zeros(5, t.dim());
    let two_a = up(xd.a.scale(2.0));
    for (c, idx) in t.indices().enumerate() {
        if let XIndex::Z(j, k) = idx {
            m[(4, c)] = mul_up(k.unsigned_abs() as f64, mul_up(two_a, up(xd.z.get(j, k))));
        }
    }
    m
}

/// Columns `cols` of |M|.
fn select_columns(m: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), cols.len(), |i, j| m[(i, cols[j])])
}

/// sup_s ‖A_s(A†_s − DH_s(x̂_s))‖ from the endpoint values and the second
/// derivative 2A_Δ A†_Δ − 2A_Δ ∂_s DH − A_s ∂²_s DH.
pub fn z1_segment(seg: &SegmentData<'_>, p0: &Z1Parts, p1: &Z1Parts, dd: &BlockNormMatrix, w: &Weights, cfg: &ValidationConfig) -> BlockNormMatrix {
    let t = seg.t();
    let ends = p0.max(p1).norms(w, cfg);
    let rows = functional_rows(t);
    // 2 A_Δ ∂_s DH
    let ad_abs = seg.a_delta.abs_upper();
    let tails_delta: [[f64; 3]; 2] = std::array::from_fn(|i| std::array::from_fn(|s| mul_up(seg.e0.tail_kp[i][s], seg.ratio_over_p1[i])));
    let akp_delta = akp_norms(&ad_abs, t, &tails_delta, w, cfg);
    let e1 = d2h_blocks(&seg.x_s, &seg.x_delta).norms(w);
    let phi1 = abs_mul(&select_columns(&ad_abs, &rows), &anchor_derivative(seg));
    let term2 = contract(&akp_delta, &e1).add(&block_norms(&phi1, t, t, w, cfg.exec));
    // A_s ∂²_s DH
    let akp_max = max3(&seg.e0.akp(w, cfg), &seg.e1.akp(w, cfg));
    let e2 = d3h_blocks(&seg.x_s, &seg.x_delta).norms(w);
    let amax = abs_max(&seg.e0.a_abs, &seg.e1.a_abs);
    let phi2 = abs_mul(&select_columns(&amax, &rows), &anchor_second_derivative(seg));
    let term3 = contract(&akp_max, &e2).add(&block_norms(&phi2, t, t, w, cfg.exec));
    let curv = dd.scale(2.0).add(&term2.scale(2.0)).add(&term3);
    ends.add(&curv.scale(0.125))
}

/// Z₂ by convexity: A_s between A₀ and A₁, x̂_s within the larger of the
/// endpoint magnitudes.
pub fn z2_segment(seg: &SegmentData<'_>, w: &Weights, cfg: &ValidationConfig) -> f64 {
    let m0 = magnitudes(&seg.e0.anc.xhat, w);
    let m1 = magnitudes(&seg.e1.anc.xhat, w);
    let mags: [f64; 5] = std::array::from_fn(|i| m0[i].max(m1[i]));
    let d = d2h_ball(mags, cfg.r_max);
    let akp = max3(&seg.e0.akp(w, cfg), &seg.e1.akp(w, cfg));
    contract(&akp, &d).op_norm_bound()
}

/// The four bounds over a segment. Also returns the endpoint Z₁ data so
/// callers can reuse them.
pub fn segment_bounds(seg: &SegmentData<'_>, p0: &Z1Parts, p1: &Z1Parts, cfg: &ValidationConfig) -> Result<Bounds, ValidationError> {
    let w = &cfg.weights;
    let y = y_segment(seg, w)?;
    let (z0, dd) = z0_segment(seg, w, cfg);
    let z1 = z1_segment(seg, p0, p1, &dd, w, cfg).op_norm_bound();
    let z2 = z2_segment(seg, w, cfg);
    Ok(Bounds { y, z0, z1, z2 })
}

/// Tails of A_s never vanish: (1−s)P₁ + sP₀ lies in the coefficient hull.
pub fn tails_nonvanishing(e0: &Endpoint, e1: &Endpoint) -> bool {
    denominators_nonvanishing(&e0.dens, &e1.dens, e0.t)
}

pub fn denominators_nonvanishing(d0: &[DiagonalDenominator; 2], d1: &[DiagonalDenominator; 2], t: Truncation) -> bool {
    (0..2).all(|i| crate::tail::verify_denominator_nonvanishing(&RationalDiagonalSymbol::recip(d0[i].hull(&d1[i]), t, space(i))))
}
