//! Weighted ℓ¹ sequence spaces over ℤ and ℤ² and the product space
//! X = ℂ³ × ℓ¹_{ν₂} × ℓ¹_{ν₁,ν₂}.

pub mod io;

pub use io::{SeqJson, XVectorJson};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coef::{Coef, Magnitude};
use crate::interval::round::{add_up, div_up, mul_up, powi_down, powi_up};
use crate::interval::{ComplexInterval, ScalarInterval};

/// Geometric weights: ν₁ for the time index j, ν₂ for the space index k.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub nu1: f64,
    pub nu2: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self { nu1: 1.05, nu2: 1.05 }
    }
}

impl Weights {
    pub fn new(nu1: f64, nu2: f64) -> Self {
        assert!(nu1 >= 1.0 && nu2 >= 1.0, "weights must be at least 1");
        Self { nu1, nu2 }
    }

    /// Upward-rounded tables of ν^{|i|} and ν^{-|i|} up to the given radii.
    pub fn tables(&self, m: usize, n: usize) -> WeightTables {
        let up = |nu: f64, r: usize| (0..=r).map(|i| powi_up(nu, i as u32)).collect::<Vec<_>>();
        let inv = |nu: f64, r: usize| (0..=r).map(|i| div_up(1.0, powi_down(nu, i as u32))).collect::<Vec<_>>();
        WeightTables { up1: up(self.nu1, m), up2: up(self.nu2, n), inv1: inv(self.nu1, m), inv2: inv(self.nu2, n) }
    }
}

/// Precomputed weight powers, all rounded upward.
#[derive(Clone, Debug)]
pub struct WeightTables {
    up1: Vec<f64>,
    up2: Vec<f64>,
    inv1: Vec<f64>,
    inv2: Vec<f64>,
}

impl WeightTables {
    #[inline]
    pub fn w1(&self, j: i64) -> f64 {
        self.up1[j.unsigned_abs() as usize]
    }
    #[inline]
    pub fn w2(&self, k: i64) -> f64 {
        self.up2[k.unsigned_abs() as usize]
    }
    #[inline]
    pub fn w12(&self, j: i64, k: i64) -> f64 {
        mul_up(self.w1(j), self.w2(k))
    }
    #[inline]
    pub fn inv2(&self, k: i64) -> f64 {
        self.inv2[k.unsigned_abs() as usize]
    }
    /// Upper bound on ν₁^{d}, d possibly negative.
    #[inline]
    pub fn ratio1(&self, d: i64) -> f64 {
        if d >= 0 {
            self.up1[d as usize]
        } else {
            self.inv1[(-d) as usize]
        }
    }
    #[inline]
    pub fn ratio2(&self, d: i64) -> f64 {
        if d >= 0 {
            self.up2[d as usize]
        } else {
            self.inv2[(-d) as usize]
        }
    }
    /// Upper bound on ν₁^{dj} ν₂^{dk}.
    #[inline]
    pub fn ratio12(&self, dj: i64, dk: i64) -> f64 {
        let (a, b) = (self.ratio1(dj), self.ratio2(dk));
        if a == 1.0 {
            b
        } else if b == 1.0 {
            a
        } else {
            mul_up(a, b)
        }
    }
    #[inline]
    pub fn inv12(&self, j: i64, k: i64) -> f64 {
        mul_up(self.inv1[j.unsigned_abs() as usize], self.inv2(k))
    }
}

/// Truncation K = (M, N): time modes |j| ≤ M, space modes |k| ≤ N.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Truncation {
    pub m: usize,
    pub n: usize,
}

/// Position of a coordinate of X.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum XIndex {
    Scalar(usize),
    Y(i64),
    Z(i64, i64),
}

impl XIndex {
    /// Index of the conjugate-reflected coordinate.
    pub fn reflect(self) -> Self {
        match self {
            XIndex::Scalar(i) => XIndex::Scalar(i),
            XIndex::Y(k) => XIndex::Y(-k),
            XIndex::Z(j, k) => XIndex::Z(-j, -k),
        }
    }

    pub fn block(self) -> usize {
        match self {
            XIndex::Scalar(_) => 0,
            XIndex::Y(_) => 1,
            XIndex::Z(..) => 2,
        }
    }
}

impl Truncation {
    pub const fn new(m: usize, n: usize) -> Self {
        Self { m, n }
    }

    pub fn double(&self) -> Self {
        Self { m: 2 * self.m, n: 2 * self.n }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { m: self.m + o.m, n: self.n + o.n }
    }

    pub fn max(&self, o: &Self) -> Self {
        Self { m: self.m.max(o.m), n: self.n.max(o.n) }
    }

    pub fn y_len(&self) -> usize {
        2 * self.n + 1
    }

    pub fn z_len(&self) -> usize {
        (2 * self.m + 1) * (2 * self.n + 1)
    }

    /// Dimension of the truncated space: 3 + (2N+1) + (2M+1)(2N+1).
    pub fn dim(&self) -> usize {
        3 + self.y_len() + self.z_len()
    }

    pub fn y_offset(&self) -> usize {
        3
    }

    pub fn z_offset(&self) -> usize {
        3 + self.y_len()
    }

    /// Row/column range of block `b` (0 = scalars, 1 = y, 2 = z).
    pub fn block_range(&self, b: usize) -> std::ops::Range<usize> {
        match b {
            0 => 0..3,
            1 => 3..self.z_offset(),
            _ => self.z_offset()..self.dim(),
        }
    }

    pub fn contains_y(&self, k: i64) -> bool {
        k.unsigned_abs() as usize <= self.n
    }

    pub fn contains_z(&self, j: i64, k: i64) -> bool {
        j.unsigned_abs() as usize <= self.m && k.unsigned_abs() as usize <= self.n
    }

    pub fn contains(&self, idx: XIndex) -> bool {
        match idx {
            XIndex::Scalar(_) => true,
            XIndex::Y(k) => self.contains_y(k),
            XIndex::Z(j, k) => self.contains_z(j, k),
        }
    }

    #[inline]
    pub fn y_pos(&self, k: i64) -> usize {
        3 + (k + self.n as i64) as usize
    }

    #[inline]
    pub fn z_pos(&self, j: i64, k: i64) -> usize {
        self.z_offset() + ((j + self.m as i64) as usize) * self.y_len() + (k + self.n as i64) as usize
    }

    pub fn pos(&self, idx: XIndex) -> usize {
        match idx {
            XIndex::Scalar(i) => i,
            XIndex::Y(k) => self.y_pos(k),
            XIndex::Z(j, k) => self.z_pos(j, k),
        }
    }

    pub fn index(&self, pos: usize) -> XIndex {
        if pos < 3 {
            XIndex::Scalar(pos)
        } else if pos < self.z_offset() {
            XIndex::Y(pos as i64 - 3 - self.n as i64)
        } else {
            let r = pos - self.z_offset();
            let w = self.y_len();
            XIndex::Z((r / w) as i64 - self.m as i64, (r % w) as i64 - self.n as i64)
        }
    }

    /// All indices in storage order.
    pub fn indices(&self) -> impl Iterator<Item = XIndex> + '_ {
        (0..self.dim()).map(move |p| self.index(p))
    }
}

/// Finitely supported sequence over ℤ, stored densely on |k| ≤ N.
#[derive(Clone, Debug, PartialEq)]
pub struct Seq1D<T = ComplexInterval> {
    n: usize,
    data: Vec<T>,
}

/// Finitely supported sequence over ℤ², stored densely on |j| ≤ M, |k| ≤ N.
#[derive(Clone, Debug, PartialEq)]
pub struct Seq2D<T = ComplexInterval> {
    m: usize,
    n: usize,
    data: Vec<T>,
}

impl<T: Coef> Seq1D<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); 2 * n + 1] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(i64) -> T) -> Self {
        let data = (-(n as i64)..=n as i64).map(&mut f).collect();
        Self { n, data }
    }

    pub fn delta(n: usize, k: i64, c: T) -> Self {
        let mut s = Self::zeros(n.max(k.unsigned_abs() as usize));
        s.set(k, c);
        s
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, k: i64) -> T {
        if k.unsigned_abs() as usize > self.n {
            T::zero()
        } else {
            self.data[(k + self.n as i64) as usize]
        }
    }

    #[inline]
    pub fn set(&mut self, k: i64, c: T) {
        assert!(k.unsigned_abs() as usize <= self.n, "index {k} outside support {}", self.n);
        self.data[(k + self.n as i64) as usize] = c;
    }

    pub fn coeffs(&self) -> &[T] {
        &self.data
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, T)> + '_ {
        let n = self.n as i64;
        self.data.iter().enumerate().map(move |(i, c)| (i as i64 - n, *c))
    }

    /// Copy onto support radius `n`, dropping or zero-padding modes.
    pub fn resized(&self, n: usize) -> Self {
        Self::from_fn(n, |k| self.get(k))
    }

    pub fn map<U: Coef>(&self, f: impl Fn(T) -> U) -> Seq1D<U> {
        Seq1D { n: self.n, data: self.data.iter().map(|c| f(*c)).collect() }
    }

    pub fn map_indexed(&self, f: impl Fn(i64, T) -> T) -> Self {
        Self::from_fn(self.n, |k| f(k, self.get(k)))
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::from_fn(self.n.max(o.n), |k| self.get(k) + o.get(k))
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::from_fn(self.n.max(o.n), |k| self.get(k) - o.get(k))
    }

    pub fn mul_scalar(&self, c: T) -> Self {
        self.map(|x| c * x)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|x| x.scale(c))
    }

    /// Index-reversing conjugation u*_k = conj(u_{-k}).
    pub fn conjugate(&self) -> Self {
        Self::from_fn(self.n, |k| self.get(-k).conj())
    }

    pub fn is_symmetric(&self) -> bool {
        self.iter().all(|(k, c)| c == self.get(-k).conj())
    }

    pub fn project(&self, n: usize) -> Self {
        Self::from_fn(self.n, |k| if k.unsigned_abs() as usize <= n { self.get(k) } else { T::zero() })
    }

    pub fn tail_project(&self, n: usize) -> Self {
        Self::from_fn(self.n, |k| if k.unsigned_abs() as usize > n { self.get(k) } else { T::zero() })
    }

    /// Bilinear pairing Σ u_k w_k (no conjugation).
    pub fn inner(&self, w: &Self) -> T {
        let n = self.n.min(w.n) as i64;
        let mut acc = T::zero();
        for k in -n..=n {
            acc += self.get(k) * w.get(k);
        }
        acc
    }
}

impl<T: Coef> Seq2D<T> {
    pub fn zeros(m: usize, n: usize) -> Self {
        Self { m, n, data: vec![T::zero(); (2 * m + 1) * (2 * n + 1)] }
    }

    pub fn from_fn(m: usize, n: usize, mut f: impl FnMut(i64, i64) -> T) -> Self {
        let mut data = Vec::with_capacity((2 * m + 1) * (2 * n + 1));
        for j in -(m as i64)..=m as i64 {
            for k in -(n as i64)..=n as i64 {
                data.push(f(j, k));
            }
        }
        Self { m, n, data }
    }

    pub fn delta(m: usize, n: usize, j: i64, k: i64, c: T) -> Self {
        let mut s = Self::zeros(m.max(j.unsigned_abs() as usize), n.max(k.unsigned_abs() as usize));
        s.set(j, k, c);
        s
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn trunc(&self) -> Truncation {
        Truncation::new(self.m, self.n)
    }

    #[inline]
    fn pos(&self, j: i64, k: i64) -> usize {
        ((j + self.m as i64) as usize) * (2 * self.n + 1) + (k + self.n as i64) as usize
    }

    #[inline]
    pub fn get(&self, j: i64, k: i64) -> T {
        if j.unsigned_abs() as usize > self.m || k.unsigned_abs() as usize > self.n {
            T::zero()
        } else {
            self.data[self.pos(j, k)]
        }
    }

    #[inline]
    pub fn set(&mut self, j: i64, k: i64, c: T) {
        assert!(
            j.unsigned_abs() as usize <= self.m && k.unsigned_abs() as usize <= self.n,
            "index ({j},{k}) outside support ({},{})",
            self.m,
            self.n
        );
        let p = self.pos(j, k);
        self.data[p] = c;
    }

    pub fn coeffs(&self) -> &[T] {
        &self.data
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, i64, T)> + '_ {
        let (m, n, w) = (self.m as i64, self.n as i64, 2 * self.n + 1);
        self.data.iter().enumerate().map(move |(p, c)| ((p / w) as i64 - m, (p % w) as i64 - n, *c))
    }

    pub fn row(&self, j: i64) -> Seq1D<T> {
        Seq1D::from_fn(self.n, |k| self.get(j, k))
    }

    pub fn resized(&self, m: usize, n: usize) -> Self {
        Self::from_fn(m, n, |j, k| self.get(j, k))
    }

    pub fn map<U: Coef>(&self, f: impl Fn(T) -> U) -> Seq2D<U> {
        Seq2D { m: self.m, n: self.n, data: self.data.iter().map(|c| f(*c)).collect() }
    }

    pub fn map_indexed(&self, f: impl Fn(i64, i64, T) -> T) -> Self {
        Self::from_fn(self.m, self.n, |j, k| f(j, k, self.get(j, k)))
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::from_fn(self.m.max(o.m), self.n.max(o.n), |j, k| self.get(j, k) + o.get(j, k))
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::from_fn(self.m.max(o.m), self.n.max(o.n), |j, k| self.get(j, k) - o.get(j, k))
    }

    pub fn mul_scalar(&self, c: T) -> Self {
        self.map(|x| c * x)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|x| x.scale(c))
    }

    pub fn conjugate(&self) -> Self {
        Self::from_fn(self.m, self.n, |j, k| self.get(-j, -k).conj())
    }

    pub fn is_symmetric(&self) -> bool {
        self.iter().all(|(j, k, c)| c == self.get(-j, -k).conj())
    }

    pub fn project(&self, t: Truncation) -> Self {
        Self::from_fn(self.m, self.n, |j, k| if t.contains_z(j, k) { self.get(j, k) } else { T::zero() })
    }

    pub fn tail_project(&self, t: Truncation) -> Self {
        Self::from_fn(self.m, self.n, |j, k| if t.contains_z(j, k) { T::zero() } else { self.get(j, k) })
    }

    pub fn inner(&self, w: &Self) -> T {
        let (m, n) = (self.m.min(w.m) as i64, self.n.min(w.n) as i64);
        let mut acc = T::zero();
        for j in -m..=m {
            for k in -n..=n {
                acc += self.get(j, k) * w.get(j, k);
            }
        }
        acc
    }
}

/// Embedding E_ℓ: (E_ℓ y)_{jk} = δ_{j0} y_k.
pub fn embed_ell<T: Coef>(y: &Seq1D<T>) -> Seq2D<T> {
    Seq2D::from_fn(0, y.n(), |_, k| y.get(k))
}

/// Cauchy product on ℤ; the support radii add.
pub fn conv1d<T: Coef>(u: &Seq1D<T>, v: &Seq1D<T>) -> Seq1D<T> {
    let n = u.n() + v.n();
    let mut out = Seq1D::zeros(n);
    let (un, vn) = (u.n() as i64, v.n() as i64);
    for k1 in -un..=un {
        let a = u.get(k1);
        if a.is_zero() {
            continue;
        }
        for k2 in -vn..=vn {
            let b = v.get(k2);
            let p = (k1 + k2 + n as i64) as usize;
            out.data[p] += a * b;
        }
    }
    out
}

/// Cauchy product on ℤ², summed in a fixed order for reproducibility.
pub fn conv2d<T: Coef>(u: &Seq2D<T>, v: &Seq2D<T>) -> Seq2D<T> {
    let (m, n) = (u.m() + v.m(), u.n() + v.n());
    let mut out = Seq2D::zeros(m, n);
    let w = 2 * n + 1;
    for (j1, k1, a) in u.iter() {
        if a.is_zero() {
            continue;
        }
        for (j2, k2, b) in v.iter() {
            if b.is_zero() {
                continue;
            }
            let p = ((j1 + j2 + m as i64) as usize) * w + (k1 + k2 + n as i64) as usize;
            out.data[p] += a * b;
        }
    }
    out
}

impl<T: Coef + Magnitude> Seq1D<T> {
    /// Upper bound on Σ ν₂^{|k|} |u_k|.
    pub fn norm(&self, w: &Weights) -> f64 {
        let t = w.tables(0, self.n);
        self.norm_with(&t)
    }

    pub fn norm_with(&self, t: &WeightTables) -> f64 {
        self.iter().fold(0.0, |acc, (k, c)| add_up(acc, mul_up(t.w2(k), c.mag_up())))
    }

    /// Largest coefficient modulus.
    pub fn sup_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, c| acc.max(c.mag_up()))
    }
}

impl<T: Coef + Magnitude> Seq2D<T> {
    /// Upper bound on Σ ν₁^{|j|} ν₂^{|k|} |u_{jk}|.
    pub fn norm(&self, w: &Weights) -> f64 {
        let t = w.tables(self.m, self.n);
        self.norm_with(&t)
    }

    pub fn norm_with(&self, t: &WeightTables) -> f64 {
        self.iter().fold(0.0, |acc, (j, k, c)| add_up(acc, mul_up(t.w12(j, k), c.mag_up())))
    }
}

/// Upper bound on ‖u‖ for a 1D sequence (free-function form).
pub fn norm1d<T: Coef + Magnitude>(u: &Seq1D<T>, w: &Weights) -> f64 {
    u.norm(w)
}

pub fn norm2d<T: Coef + Magnitude>(u: &Seq2D<T>, w: &Weights) -> f64 {
    u.norm(w)
}

/// Coefficientwise modulus bounds, as a real-valued point sequence.
pub fn abs_seq2<T: Coef + Magnitude>(u: &Seq2D<T>) -> Seq2D<ComplexInterval> {
    u.map(|c| ComplexInterval::real(ScalarInterval::point(c.mag_up())))
}

/// Element (λ₁, λ₂, a, y, z) of X.
#[derive(Clone, Debug, PartialEq)]
pub struct XVector<T = ComplexInterval> {
    pub lambda1: T,
    pub lambda2: T,
    pub a: T,
    pub y: Seq1D<T>,
    pub z: Seq2D<T>,
}

impl<T: Coef> XVector<T> {
    pub fn zeros(t: Truncation) -> Self {
        Self { lambda1: T::zero(), lambda2: T::zero(), a: T::zero(), y: Seq1D::zeros(t.n), z: Seq2D::zeros(t.m, t.n) }
    }

    pub fn scalar(&self, i: usize) -> T {
        match i {
            0 => self.lambda1,
            1 => self.lambda2,
            2 => self.a,
            _ => panic!("scalar slot {i} out of range"),
        }
    }

    pub fn set_scalar(&mut self, i: usize, c: T) {
        match i {
            0 => self.lambda1 = c,
            1 => self.lambda2 = c,
            2 => self.a = c,
            _ => panic!("scalar slot {i} out of range"),
        }
    }

    pub fn get(&self, idx: XIndex) -> T {
        match idx {
            XIndex::Scalar(i) => self.scalar(i),
            XIndex::Y(k) => self.y.get(k),
            XIndex::Z(j, k) => self.z.get(j, k),
        }
    }

    pub fn set(&mut self, idx: XIndex, c: T) {
        match idx {
            XIndex::Scalar(i) => self.set_scalar(i, c),
            XIndex::Y(k) => self.y.set(k, c),
            XIndex::Z(j, k) => self.z.set(j, k, c),
        }
    }

    /// Smallest truncation holding the stored support.
    pub fn support(&self) -> Truncation {
        Truncation::new(self.z.m(), self.y.n().max(self.z.n()))
    }

    pub fn resized(&self, t: Truncation) -> Self {
        Self {
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            a: self.a,
            y: self.y.resized(t.n),
            z: self.z.resized(t.m, t.n),
        }
    }

    pub fn map<U: Coef>(&self, f: impl Fn(T) -> U) -> XVector<U> {
        XVector { lambda1: f(self.lambda1), lambda2: f(self.lambda2), a: f(self.a), y: self.y.map(&f), z: self.z.map(&f) }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            lambda1: self.lambda1 + o.lambda1,
            lambda2: self.lambda2 + o.lambda2,
            a: self.a + o.a,
            y: self.y.add(&o.y),
            z: self.z.add(&o.z),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self {
            lambda1: self.lambda1 - o.lambda1,
            lambda2: self.lambda2 - o.lambda2,
            a: self.a - o.a,
            y: self.y.sub(&o.y),
            z: self.z.sub(&o.z),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|x| x.scale(c))
    }

    pub fn mul_scalar(&self, c: T) -> Self {
        self.map(|x| c * x)
    }

    /// x* with y*_k = conj(y_{-k}), z*_{jk} = conj(z_{-j,-k}).
    pub fn conjugate(&self) -> Self {
        Self {
            lambda1: self.lambda1.conj(),
            lambda2: self.lambda2.conj(),
            a: self.a.conj(),
            y: self.y.conjugate(),
            z: self.z.conjugate(),
        }
    }

    /// (x + x*)/2.
    pub fn symmetrize(&self) -> Self {
        self.add(&self.conjugate()).scale(0.5)
    }

    pub fn is_symmetric(&self) -> bool {
        self.lambda1 == self.lambda1.conj()
            && self.lambda2 == self.lambda2.conj()
            && self.a == self.a.conj()
            && self.y.is_symmetric()
            && self.z.is_symmetric()
    }

    pub fn project(&self, t: Truncation) -> Self {
        Self { y: self.y.project(t.n), z: self.z.project(t), ..self.clone() }
    }

    pub fn tail_project(&self, t: Truncation) -> Self {
        Self { lambda1: T::zero(), lambda2: T::zero(), a: T::zero(), y: self.y.tail_project(t.n), z: self.z.tail_project(t) }
    }

    /// λ₁β₁ + λ₂β₂ + ab + ⟨y,r⟩ + ⟨z,s⟩, bilinear.
    pub fn inner(&self, w: &Self) -> T {
        self.lambda1 * w.lambda1 + self.lambda2 * w.lambda2 + self.a * w.a + self.y.inner(&w.y) + self.z.inner(&w.z)
    }

    /// Flatten in the storage order of `t` (modes outside `t` are dropped).
    pub fn to_vec(&self, t: Truncation) -> Vec<T> {
        t.indices().map(|i| self.get(i)).collect()
    }

    pub fn from_slice(t: Truncation, v: &[T]) -> Self {
        assert_eq!(v.len(), t.dim());
        let mut x = Self::zeros(t);
        for (p, c) in v.iter().enumerate() {
            x.set(t.index(p), *c);
        }
        x
    }
}

impl<T: Coef + Magnitude> XVector<T> {
    /// (max{|λ₁|,|λ₂|,|a|}, ‖y‖, ‖z‖) as upper bounds.
    pub fn component_norm(&self, w: &Weights) -> (f64, f64, f64) {
        let s = self.lambda1.mag_up().max(self.lambda2.mag_up()).max(self.a.mag_up());
        (s, self.y.norm(w), self.z.norm(w))
    }

    /// Product norm max{|λ₁|,|λ₂|,|a|,‖y‖,‖z‖}.
    pub fn norm(&self, w: &Weights) -> f64 {
        let (s, y, z) = self.component_norm(w);
        s.max(y).max(z)
    }
}

pub fn component_norm<T: Coef + Magnitude>(x: &XVector<T>, w: &Weights) -> (f64, f64, f64) {
    x.component_norm(w)
}

pub fn inner<T: Coef>(x: &XVector<T>, w: &XVector<T>) -> T {
    x.inner(w)
}

pub fn project<T: Coef>(x: &XVector<T>, t: Truncation) -> XVector<T> {
    x.project(t)
}

pub fn tail_project<T: Coef>(x: &XVector<T>, t: Truncation) -> XVector<T> {
    x.tail_project(t)
}

pub fn conjugate<T: Coef>(x: &XVector<T>) -> XVector<T> {
    x.conjugate()
}

pub fn symmetrize<T: Coef>(x: &XVector<T>) -> XVector<T> {
    x.symmetrize()
}

/// Thin interval enclosure of a float vector.
pub fn to_interval(x: &XVector<Complex64>) -> XVector<ComplexInterval> {
    x.map(ComplexInterval::point)
}

/// Midpoints of an interval vector.
pub fn midpoint(x: &XVector<ComplexInterval>) -> XVector<Complex64> {
    XVector {
        lambda1: x.lambda1.mid(),
        lambda2: x.lambda2.mid(),
        a: x.a.mid(),
        y: Seq1D::from_fn(x.y.n(), |k| x.y.get(k).mid()),
        z: Seq2D::from_fn(x.z.m(), x.z.n(), |j, k| x.z.get(j, k).mid()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn delta_norm() {
        let u = Seq1D::delta(3, 2, ComplexInterval::ONE);
        let n = u.norm(&Weights::new(1.1, 1.1));
        assert!((n - 1.21).abs() < 1e-15 && n >= 1.1 * 1.1);
        assert_eq!(Seq1D::<ComplexInterval>::zeros(4).norm(&Weights::default()), 0.0);
    }

    #[test]
    fn deltas_convolve_to_delta() {
        let a = Seq1D::delta(1, 1, c(1.0, 0.0));
        let b = Seq1D::delta(2, 2, c(1.0, 0.0));
        let p = conv1d(&a, &b);
        assert_eq!(p.n(), 3);
        assert_eq!(p.get(3), c(1.0, 0.0));
        assert_eq!(p.iter().filter(|(_, v)| *v != c(0.0, 0.0)).count(), 1);
        let zero = Seq1D::<Complex64>::zeros(2);
        assert!(conv1d(&a, &zero).iter().all(|(_, v)| v == c(0.0, 0.0)));
    }

    #[test]
    fn embedding() {
        let y = Seq1D::delta(2, 1, c(1.0, 0.0));
        let e = embed_ell(&y);
        assert_eq!(e.get(0, 1), c(1.0, 0.0));
        assert_eq!(e.m(), 0);
    }

    #[test]
    fn layout_round_trip() {
        let t = Truncation::new(2, 3);
        assert_eq!(t.dim(), 3 + 7 + 35);
        for p in 0..t.dim() {
            assert_eq!(t.pos(t.index(p)), p);
        }
        assert_eq!(t.index(t.y_pos(0)), XIndex::Y(0));
        assert_eq!(t.index(t.z_pos(-2, 3)), XIndex::Z(-2, 3));
    }

    #[test]
    fn conjugation_is_involution() {
        let mut x = XVector::<Complex64>::zeros(Truncation::new(1, 2));
        x.lambda1 = c(0.3, 0.1);
        x.y.set(1, c(1.0, 2.0));
        x.z.set(1, -2, c(-0.5, 0.25));
        assert_eq!(x.conjugate().conjugate(), x);
        assert!(!x.is_symmetric());
        assert!(x.symmetrize().is_symmetric());
    }

    #[test]
    fn real_even_sequence_is_symmetric() {
        let y = Seq1D::from_fn(3, |k| c(1.0 / (1.0 + (k * k) as f64), 0.0));
        assert!(y.is_symmetric());
    }

    #[test]
    fn inner_of_deltas() {
        let t = Truncation::new(1, 1);
        let mut x = XVector::<Complex64>::zeros(t);
        x.z.set(0, 1, c(1.0, 0.0));
        assert_eq!(x.inner(&x), c(1.0, 0.0));
        assert_eq!(x.inner(&XVector::zeros(t)), c(0.0, 0.0));
    }

    #[test]
    fn projection_complement() {
        let x = XVector::<Complex64> {
            lambda1: c(1.0, 0.0),
            lambda2: c(2.0, 0.0),
            a: c(0.0, 0.0),
            y: Seq1D::from_fn(4, |k| c(k as f64, 1.0)),
            z: Seq2D::from_fn(2, 4, |j, k| c(j as f64, k as f64)),
        };
        let t = Truncation::new(1, 2);
        let s = x.project(t).add(&x.tail_project(t));
        assert_eq!(s, x);
        let small = x.project(t).resized(t);
        assert_eq!(small.project(t), small);
        assert!(small.tail_project(t).y.iter().all(|(_, v)| v == c(0.0, 0.0)));
    }
}
