//! The odd steady branch bifurcating from u = 0, followed by pseudo-arclength
//! in (ε, λ₂, y) so that folds in the amplitude ε are passed.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::sequence::Seq1D;

use super::{dense_newton, find_hopf_crossing, null_vector, ContinuationError, NewtonOptions};

type C = Complex64;

/// One point of the steady branch.
#[derive(Clone, Debug, PartialEq)]
pub struct SteadyPoint {
    pub amplitude: f64,
    pub lambda2: f64,
    pub y: Seq1D<C>,
}

impl SteadyPoint {
    fn to_ext(&self) -> DVector<C> {
        let n = self.y.n();
        let mut u = DVector::zeros(2 * n + 3);
        u[0] = C::new(self.amplitude, 0.0);
        u[1] = C::new(self.lambda2, 0.0);
        for (k, c) in self.y.iter() {
            u[2 + (k + n as i64) as usize] = c;
        }
        u
    }

    fn from_ext(n: usize, u: &DVector<C>) -> Self {
        Self { amplitude: u[0].re, lambda2: u[1].re, y: Seq1D::from_fn(n, |k| u[2 + (k + n as i64) as usize]) }
    }
}

/// A computed steady branch: points, arclength and unit tangents in the
/// extended unknowns (ε, λ₂, y).
#[derive(Clone, Debug, PartialEq)]
pub struct SteadyBranch {
    pub mode: i64,
    pub points: Vec<SteadyPoint>,
    pub s: Vec<f64>,
    pub tangents: Vec<DVector<C>>,
}

/// Steady problem in unknowns (λ₂, y): F₁ rows, the phase condition
/// Σ ik y_k² = 0 at k = 0 and the amplitude condition i(y_m − y_{−m}) = ε.
pub fn steady_system(n: usize, mode: i64, eps: f64, u: &DVector<C>) -> (DVector<C>, DMatrix<C>) {
    let dim = 2 * n + 2;
    let l2 = u[0];
    let y = Seq1D::from_fn(n, |k| u[1 + (k + n as i64) as usize]);
    let f1 = crate::system::eval_f1(l2, &y);
    let mut r = DVector::zeros(dim);
    let mut j = DMatrix::zeros(dim, dim);
    let col = |k: i64| 1 + (k + n as i64) as usize;
    r[0] = C::new(0.0, 1.0) * (y.get(mode) - y.get(-mode)) - C::new(eps, 0.0);
    j[(0, col(mode))] = C::new(0.0, 1.0);
    j[(0, col(-mode))] = C::new(0.0, -1.0);
    for k in -(n as i64)..=(n as i64) {
        let row = col(k);
        if k == 0 {
            r[row] = y.iter().fold(C::new(0.0, 0.0), |acc, (l, c)| acc + C::new(0.0, l as f64) * c * c);
            for l in -(n as i64)..=(n as i64) {
                j[(row, col(l))] = C::new(0.0, 2.0 * l as f64) * y.get(l);
            }
            continue;
        }
        r[row] = f1.get(k);
        let kf = k as f64;
        j[(row, 0)] = y.get(k) * kf.powi(4);
        for l in -(n as i64)..=(n as i64) {
            let mut e = C::new(0.0, -2.0 * kf) * y.get(k - l);
            if l == k {
                e += l2 * kf.powi(4) - kf * kf;
            }
            j[(row, col(l))] = e;
        }
    }
    (r, j)
}

/// The same equations with ε as a leading unknown.
fn steady_ext(n: usize, mode: i64, u: &DVector<C>) -> (DVector<C>, DMatrix<C>) {
    let inner = u.rows(1, 2 * n + 2).into_owned();
    let (r, j) = steady_system(n, mode, u[0].re, &inner);
    let mut j = j.insert_column(0, C::new(0.0, 0.0));
    j[(0, 0)] = C::new(-1.0, 0.0);
    (r, j)
}

/// Keep λ₂ real and y a real function.
pub fn symmetrize_steady(n: usize, u: &mut DVector<C>) {
    u[0] = C::new(u[0].re, 0.0);
    let y = Seq1D::from_fn(n, |k| u[1 + (k + n as i64) as usize]);
    let s = y.add(&y.conjugate()).scale(0.5);
    for (k, c) in s.iter() {
        u[1 + (k + n as i64) as usize] = c;
    }
}

fn symmetrize_ext(n: usize, u: &mut DVector<C>) {
    u[0] = C::new(u[0].re, 0.0);
    let mut tail = u.rows(1, 2 * n + 2).into_owned();
    symmetrize_steady(n, &mut tail);
    u.rows_mut(1, 2 * n + 2).copy_from(&tail);
}

/// Solve the steady problem at fixed amplitude ε from a guess.
pub fn steady_solve(n: usize, mode: i64, eps: f64, guess: &SteadyPoint, opts: NewtonOptions) -> Result<SteadyPoint, ContinuationError> {
    let u0 = guess.to_ext().rows(1, 2 * n + 2).into_owned();
    let rep = dense_newton(u0, |u| steady_system(n, mode, eps, u), |u| symmetrize_steady(n, u), opts)?;
    let y = Seq1D::from_fn(n, |k| rep.x[1 + (k + n as i64) as usize]);
    Ok(SteadyPoint { amplitude: eps, lambda2: rep.x[0].re, y })
}

/// Unit tangent of the extended system at `u`, real-structured and with
/// positive overlap with `prev` (or increasing ε when there is none).
fn steady_tangent(n: usize, mode: i64, u: &DVector<C>, prev: Option<&DVector<C>>) -> Result<DVector<C>, ContinuationError> {
    let (_, j) = steady_ext(n, mode, u);
    let (v, _) = null_vector(&j, 0x57ead)?;
    let sym = |w: DVector<C>| {
        let mut w = w;
        // Symmetrize the real structure of (ε, λ₂, y) as a whole.
        let mut t = w.rows(1, 2 * n + 2).into_owned();
        symmetrize_steady(n, &mut t);
        w[0] = C::new(w[0].re, 0.0);
        w.rows_mut(1, 2 * n + 2).copy_from(&t);
        w
    };
    let s1 = sym(v.clone());
    let s2 = sym(v * C::new(0.0, 1.0));
    let mut t = if s1.norm() >= s2.norm() { s1 } else { s2 };
    let nt = t.norm();
    t /= C::new(nt, 0.0);
    let sign = match prev {
        Some(p) => p.dotc(&t).re,
        None => t[0].re,
    };
    if sign < 0.0 {
        t = -t;
    }
    Ok(t)
}

/// Corrector on the hyperplane ⟨t, u − base⟩ = ds through the predictor.
fn arclength_correct(n: usize, mode: i64, base: &DVector<C>, t: &DVector<C>, ds: f64, opts: NewtonOptions) -> Result<DVector<C>, ContinuationError> {
    let dim = 2 * n + 3;
    let pred = base + t * C::new(ds, 0.0);
    let f = |u: &DVector<C>| {
        let (r, j) = steady_ext(n, mode, u);
        let r = r.insert_row(dim - 1, t.dotc(&(u - base)) - C::new(ds, 0.0));
        let mut j = j.insert_row(dim - 1, C::new(0.0, 0.0));
        for c in 0..dim {
            j[(dim - 1, c)] = t[c].conj();
        }
        (r, j)
    };
    Ok(dense_newton(pred, f, |u| symmetrize_ext(n, u), opts)?.x)
}

/// Branch of steady states bifurcating from u = 0 in Fourier mode `mode`
/// at λ₂ = 1/mode², followed in arclength with steps up to `h_max` until
/// λ₂ drops below `lambda2_min`.
pub fn steady_branch(n: usize, mode: i64, lambda2_min: f64, h_max: f64, opts: NewtonOptions) -> Result<SteadyBranch, ContinuationError> {
    if mode <= 0 || mode as usize > n {
        return Err(ContinuationError::Config(format!("mode {mode} outside truncation {n}")));
    }
    let eps = h_max;
    let mut y = Seq1D::zeros(n);
    y.set(mode, C::new(0.0, -eps / 2.0));
    y.set(-mode, C::new(0.0, eps / 2.0));
    let guess = SteadyPoint { amplitude: eps, lambda2: 1.0 / (mode * mode) as f64, y };
    let p0 = steady_solve(n, mode, eps, &guess, opts)?;
    let mut u = p0.to_ext();
    let mut t = steady_tangent(n, mode, &u, None)?;
    let mut br = SteadyBranch { mode, points: vec![p0], s: vec![0.0], tangents: vec![t.clone()] };
    let mut h = h_max;
    const MAX_POINTS: usize = 5000;
    while br.points.last().unwrap().lambda2 > lambda2_min {
        if br.points.len() >= MAX_POINTS {
            return Err(ContinuationError::StepFailure(br.points.last().unwrap().amplitude));
        }
        match arclength_correct(n, mode, &u, &t, h, opts) {
            Ok(u1) => {
                let t1 = steady_tangent(n, mode, &u1, Some(&t))?;
                let s1 = br.s.last().unwrap() + (&u1 - &u).norm();
                br.points.push(SteadyPoint::from_ext(n, &u1));
                br.s.push(s1);
                br.tangents.push(t1.clone());
                u = u1;
                t = t1;
                h = (h * 1.5).min(h_max);
            }
            Err(e) => {
                h /= 2.0;
                if h < h_max * 1e-4 {
                    return Err(e);
                }
            }
        }
    }
    Ok(br)
}

impl SteadyBranch {
    /// The steady state at arclength `s`, corrected from the nearest
    /// computed point below it.
    pub fn at(&self, s: f64, opts: NewtonOptions) -> Result<SteadyPoint, ContinuationError> {
        let i = self.s.partition_point(|&v| v <= s).saturating_sub(1);
        let ds = s - self.s[i];
        if ds == 0.0 {
            return Ok(self.points[i].clone());
        }
        let n = self.points[i].y.n();
        let u = arclength_correct(n, self.mode, &self.points[i].to_ext(), &self.tangents[i], ds, opts)?;
        Ok(SteadyPoint::from_ext(n, &u))
    }
}

/// Linearization of the steady equation −D_yF₁ = −(λ₂K⁴ − K² − 2iK C(y)),
/// the generator of the linearized time evolution.
pub fn steady_linearization(lambda2: f64, y: &Seq1D<C>) -> DMatrix<C> {
    let n = y.n() as i64;
    let dim = y.n() * 2 + 1;
    DMatrix::from_fn(dim, dim, |r, c| {
        let (k, l) = (r as i64 - n, c as i64 - n);
        let kf = k as f64;
        let mut e = C::new(0.0, -2.0 * kf) * y.get(k - l);
        if k == l {
            e += C::new(lambda2 * kf.powi(4) - kf * kf, 0.0);
        }
        -e
    })
}

/// The Hopf point on a steady branch, with the steady state there.
#[derive(Clone, Debug, PartialEq)]
pub struct SteadyHopf {
    pub steady: SteadyPoint,
    pub omega: f64,
    pub eigenvector: Seq1D<C>,
}

/// Detect the first Hopf point on a computed steady branch, bisecting in
/// arclength.
pub fn steady_hopf(branch: &SteadyBranch, opts: NewtonOptions) -> Result<SteadyHopf, ContinuationError> {
    let n = branch.points.first().ok_or(ContinuationError::NoCrossing)?.y.n();
    let hc = find_hopf_crossing(&branch.s, |s| branch.at(s, opts).map(|p| steady_linearization(p.lambda2, &p.y)), 1e-12)?;
    let steady = branch.at(hc.param, opts)?;
    let ev = Seq1D::from_fn(n, |k| hc.eigenvector[(k + n as i64) as usize]);
    Ok(SteadyHopf { steady, omega: hc.omega, eigenvector: ev })
}
