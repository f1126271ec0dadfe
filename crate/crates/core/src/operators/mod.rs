//! Linear operators on X = ℂ³ × ℓ¹_{ν₂} × ℓ¹_{ν₁,ν₂} in 3×3 block form.
//!
//! Block (i,j) maps component j to component i. Finite operators are dense
//! [`CMat`]s in the storage order of [`Truncation`]; eventually diagonal
//! operators add a diagonal tail acting beyond the center dimension.

pub mod cmat;

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cmat::CMat;

use crate::coef::Coef;
use crate::interval::round::{add_up, mul_up};
use crate::interval::ComplexInterval;
use crate::par::Execution;
use crate::sequence::{Seq1D, Seq2D, Truncation, Weights, XIndex, XVector};
use crate::tail::{tail_norm_bound_with, DiagonalDenominator, RationalDiagonalSymbol, ScanRadii, TailError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error(transparent)]
    Tail(#[from] TailError),
    #[error("tail is unbounded (polynomial growth)")]
    UnboundedTail,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Upper bounds ‖B_ij‖ for the nine blocks.
#[derive(Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BlockNormMatrix(pub [[f64; 3]; 3]);

impl fmt::Debug for BlockNormMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.0 {
            writeln!(f, "[{:.3e} {:.3e} {:.3e}]", r[0], r[1], r[2])?;
        }
        Ok(())
    }
}

impl BlockNormMatrix {
    pub const ZERO: Self = Self([[0.0; 3]; 3]);

    pub fn diag(d: [f64; 3]) -> Self {
        let mut m = Self::ZERO;
        for (i, v) in d.into_iter().enumerate() {
            m.0[i][i] = v;
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    /// Bound on the induced norm of X with the max-product norm: the largest
    /// block-row sum.
    pub fn op_norm_bound(&self) -> f64 {
        self.0.iter().map(|r| add_up(add_up(r[0], r[1]), r[2])).fold(0.0, f64::max)
    }

    pub fn max(&self, o: &Self) -> Self {
        let mut m = *self;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = m.0[i][j].max(o.0[i][j]);
            }
        }
        m
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut m = *self;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = add_up(m.0[i][j], o.0[i][j]);
            }
        }
        m
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut m = *self;
        for r in m.0.iter_mut() {
            for v in r.iter_mut() {
                *v = mul_up(*v, c);
            }
        }
        m
    }

    /// Component-norm bound of a product: ‖(AB)_ij‖ ≤ Σ_n ‖A_in‖‖B_nj‖.
    pub fn mul(&self, o: &Self) -> Self {
        let mut m = Self::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = (0..3).fold(0.0, |acc, n| add_up(acc, mul_up(self.0[i][n], o.0[n][j])));
            }
        }
        m
    }
}

/// Per-column contributions, reduced in column order afterwards.
struct ColumnSums {
    scalars: [f64; 3],
    y: f64,
    z: f64,
}

/// Weight exponents of a column: (|j|, |k|), zero for scalars.
fn col_exponents(idx: XIndex) -> (i64, i64) {
    match idx {
        XIndex::Scalar(_) => (0, 0),
        XIndex::Y(k) => (0, k.abs()),
        XIndex::Z(j, k) => (j.abs(), k.abs()),
    }
}

/// Block norms of a finite matrix given entrywise modulus bounds `abs`, with
/// rows laid out by `rows` and columns by `cols`.
///
/// Column sums are formed with the weight ratios ν^{|row|−|col|} directly,
/// so diagonal entries carry weight exactly one.
pub fn block_norms(abs: &DMatrix<f64>, rows: Truncation, cols: Truncation, w: &Weights, exec: Execution) -> BlockNormMatrix {
    assert_eq!(abs.nrows(), rows.dim());
    assert_eq!(abs.ncols(), cols.dim());
    let span = rows.max(&cols);
    let t = w.tables(span.m, span.n);
    let y_rows = rows.block_range(1);
    let z_rows = rows.block_range(2);
    let sums = exec.map_range(cols.dim(), |c| {
        let (cj, ck) = col_exponents(cols.index(c));
        let col = abs.column(c);
        let mut s = ColumnSums { scalars: [col[0], col[1], col[2]], y: 0.0, z: 0.0 };
        for r in y_rows.clone() {
            let v = col[r];
            if v != 0.0 {
                if let XIndex::Y(k) = rows.index(r) {
                    s.y = add_up(s.y, mul_up(t.ratio12(-cj, k.abs() - ck), v));
                }
            }
        }
        for r in z_rows.clone() {
            let v = col[r];
            if v != 0.0 {
                if let XIndex::Z(j, k) = rows.index(r) {
                    s.z = add_up(s.z, mul_up(t.ratio12(j.abs() - cj, k.abs() - ck), v));
                }
            }
        }
        s
    });
    let mut b = BlockNormMatrix::ZERO;
    let mut row_sums = [0.0f64; 3];
    for (c, s) in sums.into_iter().enumerate() {
        let idx = cols.index(c);
        let sc = s.scalars.iter().fold(0.0f64, |a, v| a.max(*v));
        match idx {
            XIndex::Scalar(_) => {
                for (acc, v) in row_sums.iter_mut().zip(s.scalars) {
                    *acc = add_up(*acc, v);
                }
                b.0[1][0] = add_up(b.0[1][0], s.y);
                b.0[2][0] = add_up(b.0[2][0], s.z);
            }
            XIndex::Y(k) => {
                b.0[0][1] = b.0[0][1].max(mul_up(t.inv2(k), sc));
                b.0[1][1] = b.0[1][1].max(s.y);
                b.0[2][1] = b.0[2][1].max(s.z);
            }
            XIndex::Z(j, k) => {
                b.0[0][2] = b.0[0][2].max(mul_up(t.inv12(j, k), sc));
                b.0[1][2] = b.0[1][2].max(s.y);
                b.0[2][2] = b.0[2][2].max(s.z);
            }
        }
    }
    b.0[0][0] = row_sums.iter().fold(0.0f64, |a, v| a.max(*v));
    b
}

/// Norm of a single block (i,j), 0-based.
pub fn block_norm(abs: &DMatrix<f64>, rows: Truncation, cols: Truncation, w: &Weights, i: usize, j: usize) -> f64 {
    block_norms(abs, rows, cols, w, Execution::Sequential).get(i, j)
}

/// Operator norm of convolution by `u` on ℓ¹_{ν₂}: exactly ‖u‖.
pub fn conv_operator_norm1<T: Coef + crate::coef::Magnitude>(u: &Seq1D<T>, w: &Weights) -> f64 {
    u.norm(w)
}

/// Operator norm of convolution by `u` on ℓ¹_{ν₁,ν₂}: exactly ‖u‖.
pub fn conv_operator_norm2<T: Coef + crate::coef::Magnitude>(u: &Seq2D<T>, w: &Weights) -> f64 {
    u.norm(w)
}

/// Dense operator from `cols`-supported to `rows`-supported vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteBlockOperator {
    pub rows: Truncation,
    pub cols: Truncation,
    pub mat: CMat,
}

impl FiniteBlockOperator {
    pub fn new(rows: Truncation, cols: Truncation, mat: CMat) -> Self {
        assert_eq!(mat.nrows(), rows.dim());
        assert_eq!(mat.ncols(), cols.dim());
        Self { rows, cols, mat }
    }

    pub fn zeros(rows: Truncation, cols: Truncation) -> Self {
        Self::new(rows, cols, CMat::zeros(rows.dim(), cols.dim()))
    }

    /// The projection Π^{(K)} as a square matrix.
    pub fn projection(t: Truncation) -> Self {
        Self::new(t, t, CMat::identity(t.dim()))
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn block_norms(&self, w: &Weights, exec: Execution) -> BlockNormMatrix {
        block_norms(&self.mat.abs_upper(), self.rows, self.cols, w, exec)
    }

    pub fn op_norm_bound(&self, w: &Weights) -> f64 {
        self.block_norms(w, Execution::default()).op_norm_bound()
    }

    /// Π_rows A Π_cols x.
    pub fn apply(&self, x: &XVector<ComplexInterval>) -> XVector<ComplexInterval> {
        let v = x.to_vec(self.cols);
        XVector::from_slice(self.rows, &self.mat.mul_vec(&v))
    }

    pub fn mul(&self, o: &Self, exec: Execution) -> Result<Self, OperatorError> {
        if self.cols != o.rows {
            return Err(OperatorError::Dimension(format!("{:?} vs {:?}", self.cols, o.rows)));
        }
        Ok(Self::new(self.rows, o.cols, self.mat.mul_with(&o.mat, exec)))
    }

    pub fn sub(&self, o: &Self) -> Result<Self, OperatorError> {
        if self.rows != o.rows || self.cols != o.cols {
            return Err(OperatorError::Dimension("shape mismatch in difference".into()));
        }
        Ok(Self::new(self.rows, self.cols, self.mat.sub(&o.mat)))
    }

    /// Re-index onto larger truncations, padding with zeros.
    pub fn embed(&self, rows: Truncation, cols: Truncation) -> Self {
        let mut re = DMatrix::zeros(rows.dim(), cols.dim());
        let mut im = DMatrix::zeros(rows.dim(), cols.dim());
        let mut rad = self.mat.rad.as_ref().map(|_| DMatrix::zeros(rows.dim(), cols.dim()));
        let rmap: Vec<usize> = self.rows.indices().map(|i| rows.pos(i)).collect();
        for (c, ci) in self.cols.indices().enumerate() {
            let cc = cols.pos(ci);
            for (r, &rr) in rmap.iter().enumerate() {
                re[(rr, cc)] = self.mat.re[(r, c)];
                im[(rr, cc)] = self.mat.im[(r, c)];
                if let Some(rm) = rad.as_mut() {
                    rm[(rr, cc)] = self.mat.radius(r, c);
                }
            }
        }
        Self::new(rows, cols, CMat { re, im, rad })
    }
}

/// A linear map described by its action on unit vectors.
pub trait ColumnMap: Sync {
    /// Image of the unit vector at `col`.
    fn column(&self, col: XIndex) -> XVector<ComplexInterval>;

    /// Rows of the image at `col` in the storage order of `rows`.
    fn column_into(&self, col: XIndex, rows: Truncation) -> Vec<ComplexInterval> {
        self.column(col).to_vec(rows)
    }
}

/// Dense matrix of Π_rows B restricted to the columns of `cols`.
pub fn materialize(op: &dyn ColumnMap, rows: Truncation, cols: Truncation, exec: Execution) -> FiniteBlockOperator {
    let columns = exec.map_range(cols.dim(), |c| op.column_into(cols.index(c), rows));
    FiniteBlockOperator::new(rows, cols, CMat::from_columns(rows.dim(), columns))
}

/// Product of a finite operator with a K̃-diagonal operator: center
/// dimensions (K₁, K₂ + K̃).
pub fn compose_finite_banded(a: &FiniteBlockOperator, b: &dyn ColumnMap, bandwidth: Truncation, exec: Execution) -> FiniteBlockOperator {
    let cols = a.cols.add(&bandwidth);
    let bm = materialize(b, a.cols, cols, exec);
    FiniteBlockOperator::new(a.rows, cols, a.mat.mul_with(&bm.mat, exec))
}

/// Convolution by `u` on the z component.
pub struct Conv2dMap {
    pub u: Seq2D<ComplexInterval>,
}

impl ColumnMap for Conv2dMap {
    fn column(&self, col: XIndex) -> XVector<ComplexInterval> {
        let t = self.u.trunc();
        match col {
            XIndex::Z(j, k) => {
                let (m, n) = (t.m + j.unsigned_abs() as usize, t.n + k.unsigned_abs() as usize);
                let mut x = XVector::zeros(Truncation::new(m, n));
                x.z = Seq2D::from_fn(m, n, |a, b| self.u.get(a - j, b - k));
                x
            }
            _ => XVector::zeros(Truncation::new(0, 0)),
        }
    }
}

/// Convolution by `u` on the y component.
pub struct Conv1dMap {
    pub u: Seq1D<ComplexInterval>,
}

impl ColumnMap for Conv1dMap {
    fn column(&self, col: XIndex) -> XVector<ComplexInterval> {
        match col {
            XIndex::Y(k) => {
                let n = self.u.n() + k.unsigned_abs() as usize;
                let mut x = XVector::zeros(Truncation::new(0, n));
                x.y = Seq1D::from_fn(n, |b| self.u.get(b - k));
                x
            }
            _ => XVector::zeros(Truncation::new(0, 0)),
        }
    }
}

/// Diagonal action on one tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TailEntry {
    Zero,
    Identity,
    /// Entry equal to the denominator itself (unbounded, as in A†).
    Poly(DiagonalDenominator),
    Rational(RationalDiagonalSymbol),
}

impl TailEntry {
    pub fn entry(&self, j: i64, k: i64) -> Result<ComplexInterval, TailError> {
        match self {
            TailEntry::Zero => Ok(ComplexInterval::ZERO),
            TailEntry::Identity => Ok(ComplexInterval::ONE),
            TailEntry::Poly(d) => Ok(d.eval(j, k)),
            TailEntry::Rational(s) => s.entry(j, k),
        }
    }

    pub fn norm_bound(&self, scan: ScanRadii, exec: Execution) -> Result<f64, OperatorError> {
        match self {
            TailEntry::Zero => Ok(0.0),
            TailEntry::Identity => Ok(1.0),
            TailEntry::Poly(_) => Err(OperatorError::UnboundedTail),
            TailEntry::Rational(s) => Ok(tail_norm_bound_with(s, scan, exec)?),
        }
    }
}

/// Diagonal tails for y (|k| > N) and z ((j,k) ∉ F[K]).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagonalTail {
    pub threshold: Truncation,
    pub y: TailEntry,
    pub z: TailEntry,
}

/// A = A^F Π^{(K)} + A^I Π^{(∞)}.
#[derive(Clone, Debug, PartialEq)]
pub struct EventuallyDiagonalOperator {
    pub finite: FiniteBlockOperator,
    pub tail: DiagonalTail,
}

impl EventuallyDiagonalOperator {
    pub fn new(finite: FiniteBlockOperator, tail: DiagonalTail) -> Self {
        assert!(finite.is_square(), "finite part must be square");
        assert_eq!(finite.rows, tail.threshold, "tail threshold must equal the center dimension");
        Self { finite, tail }
    }

    pub fn center(&self) -> Truncation {
        self.finite.rows
    }

    /// Component-norm bound, combining finite and tail parts by maximum on
    /// the diagonal blocks (they act on disjoint columns).
    pub fn block_norms(&self, w: &Weights, scan: ScanRadii, exec: Execution) -> Result<BlockNormMatrix, OperatorError> {
        let mut b = self.finite.block_norms(w, exec);
        b.0[1][1] = b.0[1][1].max(self.tail.y.norm_bound(scan, exec)?);
        b.0[2][2] = b.0[2][2].max(self.tail.z.norm_bound(scan, exec)?);
        Ok(b)
    }
}

/// Apply an eventually diagonal operator; the result is supported in
/// max(K, K′) for K′-supported input.
pub fn ed_apply(a: &EventuallyDiagonalOperator, x: &XVector<ComplexInterval>) -> Result<XVector<ComplexInterval>, OperatorError> {
    let k = a.center();
    let out_t = k.max(&x.support());
    let mut out = a.finite.apply(x).resized(out_t);
    for (kk, c) in x.y.iter() {
        if !k.contains_y(kk) && !c.is_zero() {
            out.y.set(kk, a.tail.y.entry(0, kk)? * c);
        }
    }
    for (j, kk, c) in x.z.iter() {
        if !k.contains_z(j, kk) && !c.is_zero() {
            out.z.set(j, kk, a.tail.z.entry(j, kk)? * c);
        }
    }
    Ok(out)
}
