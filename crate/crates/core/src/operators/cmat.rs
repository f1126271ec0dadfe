//! Dense complex matrices in midpoint-radius form with rigorous products.
//!
//! Entry (i,j) stands for the closed disc of radius `rad[(i,j)]` around
//! `re[(i,j)] + i·im[(i,j)]`. Products use ordinary floating-point gemm on
//! the midpoints and add an a-posteriori bound for rounding and radii, so
//! large products keep BLAS-like speed.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::interval::round::{add_up, hypot_up, mul_up};
use crate::interval::{ComplexInterval, ScalarInterval};
use crate::par::Execution;

const U: f64 = f64::EPSILON / 2.0;
/// Column chunk width for parallel products. Fixed so both execution paths
/// perform identical floating-point operations.
const CHUNK: usize = 96;

/// γ_n = n·u / (1 − n·u), rounded up.
pub fn gamma(n: usize) -> f64 {
    let nu = (n as f64) * U;
    assert!(nu < 0.01, "inner dimension too large for the rounding model");
    (nu / (1.0 - nu)) * (1.0 + 4.0 * U)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    pub re: DMatrix<f64>,
    pub im: DMatrix<f64>,
    /// Disc radii; `None` means every entry is exact.
    pub rad: Option<DMatrix<f64>>,
}

impl CMat {
    pub fn zeros(r: usize, c: usize) -> Self {
        Self { re: DMatrix::zeros(r, c), im: DMatrix::zeros(r, c), rad: None }
    }

    pub fn identity(n: usize) -> Self {
        Self { re: DMatrix::identity(n, n), im: DMatrix::zeros(n, n), rad: None }
    }

    pub fn nrows(&self) -> usize {
        self.re.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.re.ncols()
    }

    pub fn from_c64(m: &DMatrix<Complex64>) -> Self {
        Self { re: m.map(|z| z.re), im: m.map(|z| z.im), rad: None }
    }

    pub fn to_c64(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.nrows(), self.ncols(), |i, j| Complex64::new(self.re[(i, j)], self.im[(i, j)]))
    }

    /// Disc enclosure of an interval matrix given entrywise.
    pub fn from_fn_interval(r: usize, c: usize, f: impl Fn(usize, usize) -> ComplexInterval) -> Self {
        let mut m = Self::zeros(r, c);
        let mut rad = DMatrix::zeros(r, c);
        let mut any = false;
        for j in 0..c {
            for i in 0..r {
                let z = f(i, j);
                m.set(i, j, z, &mut rad, &mut any);
            }
        }
        if any {
            m.rad = Some(rad);
        }
        m
    }

    fn set(&mut self, i: usize, j: usize, z: ComplexInterval, rad: &mut DMatrix<f64>, any: &mut bool) {
        let mid = z.mid();
        self.re[(i, j)] = mid.re;
        self.im[(i, j)] = mid.im;
        let (rr, ri) = z.rad();
        let r = hypot_up(rr, ri);
        if r > 0.0 {
            rad[(i, j)] = r;
            *any = true;
        }
    }

    /// Build from columns of interval entries (column-major producer).
    pub fn from_columns(r: usize, cols: Vec<Vec<ComplexInterval>>) -> Self {
        let c = cols.len();
        let mut m = Self::zeros(r, c);
        let mut rad = DMatrix::zeros(r, c);
        let mut any = false;
        for (j, col) in cols.into_iter().enumerate() {
            assert_eq!(col.len(), r);
            for (i, z) in col.into_iter().enumerate() {
                m.set(i, j, z, &mut rad, &mut any);
            }
        }
        if any {
            m.rad = Some(rad);
        }
        m
    }

    pub fn radius(&self, i: usize, j: usize) -> f64 {
        self.rad.as_ref().map_or(0.0, |r| r[(i, j)])
    }

    pub fn mid(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.re[(i, j)], self.im[(i, j)])
    }

    /// Rectangle enclosing the disc at (i,j).
    pub fn get(&self, i: usize, j: usize) -> ComplexInterval {
        let r = self.radius(i, j);
        let c = |x: f64| if r == 0.0 { ScalarInterval::point(x) } else { ScalarInterval::inflate(x, r) };
        ComplexInterval::new(c(self.re[(i, j)]), c(self.im[(i, j)]))
    }

    /// Entrywise upper bounds on |entry|.
    pub fn abs_upper(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.nrows(), self.ncols(), |i, j| {
            add_up(hypot_up(self.re[(i, j)].abs(), self.im[(i, j)].abs()), self.radius(i, j))
        })
    }

    /// Entrywise `|re| + |im|`, an upper bound on the midpoint modulus up to
    /// one rounding (absorbed by the callers' error factors).
    fn abs1(&self) -> DMatrix<f64> {
        self.re.zip_map(&self.im, |a, b| a.abs() + b.abs())
    }

    pub fn columns(&self, range: std::ops::Range<usize>) -> Self {
        let n = range.len();
        Self {
            re: self.re.columns(range.start, n).into_owned(),
            im: self.im.columns(range.start, n).into_owned(),
            rad: self.rad.as_ref().map(|r| r.columns(range.start, n).into_owned()),
        }
    }

    pub fn rows(&self, range: std::ops::Range<usize>) -> Self {
        let n = range.len();
        Self {
            re: self.re.rows(range.start, n).into_owned(),
            im: self.im.rows(range.start, n).into_owned(),
            rad: self.rad.as_ref().map(|r| r.rows(range.start, n).into_owned()),
        }
    }

    /// Rigorous enclosure of `self · b`.
    pub fn mul(&self, b: &Self) -> Self {
        self.mul_with(b, Execution::Sequential)
    }

    /// Rigorous product, chunked over the columns of `b`.
    pub fn mul_with(&self, b: &Self, exec: Execution) -> Self {
        assert_eq!(self.ncols(), b.nrows(), "dimension mismatch in product");
        let nc = b.ncols();
        let chunks: Vec<_> = (0..nc).step_by(CHUNK).map(|s| s..(s + CHUNK).min(nc)).collect();
        let a_abs = self.abs1();
        let parts = exec.map_slice(&chunks, |r| self.mul_block(&a_abs, &b.columns(r.clone())));
        let mut out = Self::zeros(self.nrows(), nc);
        let mut rad = DMatrix::zeros(self.nrows(), nc);
        for (r, p) in chunks.iter().zip(parts) {
            out.re.columns_mut(r.start, r.len()).copy_from(&p.re);
            out.im.columns_mut(r.start, r.len()).copy_from(&p.im);
            rad.columns_mut(r.start, r.len()).copy_from(p.rad.as_ref().unwrap());
        }
        out.rad = Some(rad);
        out
    }

    fn mul_block(&self, a_abs: &DMatrix<f64>, b: &Self) -> Self {
        let p = self.ncols();
        let re = &self.re * &b.re - &self.im * &b.im;
        let im = &self.re * &b.im + &self.im * &b.re;
        let b_abs = b.abs1();
        // |Amid||Bmid|, with relative error γ_p from the gemm itself
        let g1 = a_abs * &b_abs;
        // |Amid| Brad + Arad (|Bmid| + Brad)
        let mut g2 = DMatrix::zeros(re.nrows(), re.ncols());
        if let Some(br) = &b.rad {
            g2 += a_abs * br;
        }
        if let Some(ar) = &self.rad {
            let mut bb = b_abs.clone();
            if let Some(br) = &b.rad {
                bb += br;
            }
            g2 += ar * bb;
        }
        let gp = gamma(p + 4);
        let inv = 1.0 / (1.0 - gp) * (1.0 + 4.0 * U);
        // Underflow can only occur where some product pair is nonzero.
        let floor = (p as f64 + 1.0) * 4.0 * f64::MIN_POSITIVE;
        let row_nz: Vec<bool> = (0..self.nrows()).map(|i| self.row_nonzero(i)).collect();
        let mut rad = DMatrix::zeros(re.nrows(), re.ncols());
        for j in 0..re.ncols() {
            let col_nz = b.col_nonzero(j);
            for i in 0..re.nrows() {
                let t = mul_up(add_up(mul_up(2.0 * gp, g1[(i, j)]), g2[(i, j)]), inv);
                let t = add_up(t, mul_up(2.0 * U, re[(i, j)].abs() + im[(i, j)].abs()));
                rad[(i, j)] = if col_nz && row_nz[i] { add_up(t, floor) } else { t };
            }
        }
        Self { re, im, rad: Some(rad) }
    }

    fn row_nonzero(&self, i: usize) -> bool {
        (0..self.ncols()).any(|j| self.re[(i, j)] != 0.0 || self.im[(i, j)] != 0.0 || self.radius(i, j) != 0.0)
    }

    fn col_nonzero(&self, j: usize) -> bool {
        (0..self.nrows()).any(|i| self.re[(i, j)] != 0.0 || self.im[(i, j)] != 0.0 || self.radius(i, j) != 0.0)
    }

    /// Rigorous entrywise sum or difference.
    fn combine(&self, b: &Self, sign: f64) -> Self {
        let re = &self.re + &b.re * sign;
        let im = &self.im + &b.im * sign;
        let rad = DMatrix::from_fn(re.nrows(), re.ncols(), |i, j| {
            let r = add_up(self.radius(i, j), b.radius(i, j));
            add_up(r, mul_up(2.0 * U, re[(i, j)].abs() + im[(i, j)].abs()))
        });
        Self { re, im, rad: Some(rad) }
    }

    pub fn add(&self, b: &Self) -> Self {
        self.combine(b, 1.0)
    }

    pub fn sub(&self, b: &Self) -> Self {
        self.combine(b, -1.0)
    }

    /// `I − self` for a square matrix.
    pub fn identity_minus(&self) -> Self {
        Self::identity(self.nrows()).sub(self)
    }

    /// Rigorous `self · x` for an interval vector.
    pub fn mul_vec(&self, x: &[ComplexInterval]) -> Vec<ComplexInterval> {
        let b = Self::from_columns(x.len(), vec![x.to_vec()]);
        let p = self.mul(&b);
        (0..self.nrows()).map(|i| p.get(i, 0)).collect()
    }
}

/// Entrywise `max(|a|, |b|)` of two bound matrices.
pub fn abs_max(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.zip_map(b, f64::max)
}

/// Upward-rounded entrywise sum of nonnegative matrices.
pub fn abs_add(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.zip_map(b, add_up)
}

/// Upward-rounded product of nonnegative matrices.
pub fn abs_mul(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let g = a * b;
    let inv = (1.0 + gamma(a.ncols() + 2)) * (1.0 + 4.0 * U);
    let floor = (a.ncols() as f64 + 1.0) * 4.0 * f64::MIN_POSITIVE;
    g.map(|x| add_up(mul_up(x, inv), floor))
}
