//! Floating-point continuation: Newton solves on the truncated system,
//! tangents, the steady branch, Hopf detection and branch stepping.
//!
//! Nothing here is rigorous; the validator re-checks every anchor.

mod export;
mod steady;

pub use export::{read_run_json, write_anchor_json, write_branch_csv, write_run_json, ExportError, RunJson, SegmentJson};
pub use steady::{steady_branch, steady_hopf, steady_linearization, steady_solve, steady_system, symmetrize_steady, SteadyBranch, SteadyHopf, SteadyPoint};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sequence::{Seq2D, Truncation, Weights, XVector};
use crate::system::{eval_h, eval_h_self, jacobian_c64, q_parameter_in_a, AnchorPoint, ContinuationMode, ProblemAnchors};

type C = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContinuationError {
    #[error("Newton did not converge in {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("singular Jacobian")]
    SingularJacobian,
    #[error("no eigenvalue crossing found in the parameter range")]
    NoCrossing,
    #[error("step failed below the minimum step size at a = {0}")]
    StepFailure(f64),
    #[error("invalid continuation request: {0}")]
    Config(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-11, max_iter: 30 }
    }
}

/// Outcome of a converged Newton solve.
#[derive(Clone, Debug, PartialEq)]
pub struct NewtonReport<V> {
    pub x: V,
    pub residual: f64,
    pub iterations: usize,
    /// Residual after each iteration (starting with the initial guess).
    pub history: Vec<f64>,
}

fn sup(v: &DVector<C>) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Dense Newton iteration `u ← u − J(u)⁻¹F(u)`, with `post` applied after
/// each update (symmetrization). Converges when ‖F‖_∞ ≤ tol.
pub fn dense_newton(
    u0: DVector<C>,
    f: impl Fn(&DVector<C>) -> (DVector<C>, DMatrix<C>),
    post: impl Fn(&mut DVector<C>),
    opts: NewtonOptions,
) -> Result<NewtonReport<DVector<C>>, ContinuationError> {
    let mut u = u0;
    let mut history = Vec::new();
    for it in 0..=opts.max_iter {
        let (r, j) = f(&u);
        let res = sup(&r);
        history.push(res);
        if !res.is_finite() {
            return Err(ContinuationError::NoConvergence { iterations: it, residual: res });
        }
        if res <= opts.tol {
            return Ok(NewtonReport { x: u, residual: res, iterations: it, history });
        }
        if it == opts.max_iter {
            return Err(ContinuationError::NoConvergence { iterations: it, residual: res });
        }
        let du = j.lu().solve(&r).ok_or(ContinuationError::SingularJacobian)?;
        u -= du;
        post(&mut u);
    }
    unreachable!()
}

/// How the phase and amplitude conditions are anchored during a solve.
#[derive(Clone, Debug, PartialEq)]
pub enum Anchoring {
    /// Anchors track the iterate (the usual way to produce x̂).
    SelfAnchored { q: XVector<C>, c: C },
    /// Fixed anchors, as in H_s.
    Fixed(AnchorPoint<C>),
}

/// Solve the truncated system H(x) = 0 on `t` by Newton's method.
pub fn newton_solve(x0: &XVector<C>, anchoring: &Anchoring, t: Truncation, opts: NewtonOptions) -> Result<NewtonReport<XVector<C>>, ContinuationError> {
    let f = |u: &DVector<C>| {
        let x = XVector::from_slice(t, u.as_slice());
        let (h, jac) = match anchoring {
            Anchoring::SelfAnchored { q, c } => (eval_h_self(&x, q, *c), jacobian_c64(&x, q, *c, t, true)),
            Anchoring::Fixed(anc) => {
                let cols = crate::system::JacobianColumns::new(&x, anc);
                let mut m = DMatrix::zeros(t.dim(), t.dim());
                for (ci, idx) in t.indices().enumerate() {
                    for (r, e) in cols.entries(idx, t).into_iter().enumerate() {
                        m[(r, ci)] = e;
                    }
                }
                (eval_h(&x, anc), m)
            }
        };
        (DVector::from_vec(h.to_vec(t)), jac)
    };
    let post = |u: &mut DVector<C>| {
        let x = XVector::from_slice(t, u.as_slice()).symmetrize();
        u.copy_from_slice(&x.to_vec(t));
    };
    let u0 = DVector::from_vec(x0.resized(t).symmetrize().to_vec(t));
    let rep = dense_newton(u0, f, post, opts)?;
    Ok(NewtonReport { x: XVector::from_slice(t, rep.x.as_slice()), residual: rep.residual, iterations: rep.iterations, history: rep.history })
}

/// Null direction of an (n−1)×n matrix via two bordered solves with random
/// rows. Returns the direction and whether the two solves agree (a proxy
/// for a one-dimensional kernel).
pub fn null_vector(jr: &DMatrix<C>, seed: u64) -> Result<(DVector<C>, bool), ContinuationError> {
    let n = jr.ncols();
    assert_eq!(jr.nrows() + 1, n);
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let solve = |rng: &mut rand::rngs::StdRng| {
        let mut s = jr.clone().insert_row(n - 1, C::new(0.0, 0.0));
        for j in 0..n {
            s[(n - 1, j)] = C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        let mut e = DVector::zeros(n);
        e[n - 1] = C::new(1.0, 0.0);
        let v = s.lu().solve(&e).ok_or(ContinuationError::SingularJacobian)?;
        let nv = v.norm();
        if !nv.is_finite() || nv == 0.0 {
            return Err(ContinuationError::SingularJacobian);
        }
        Ok(v / C::new(nv, 0.0))
    };
    let v1 = solve(&mut rng)?;
    let v2 = solve(&mut rng)?;
    // |⟨v1, v2⟩| = 1 iff the directions coincide.
    let overlap = v1.dotc(&v2).norm();
    Ok((v1, (overlap - 1.0).abs() < 1e-6))
}

/// Unit tangent at `x`: kernel of the truncated DH^{x}(x) without the
/// continuation row, symmetrized and oriented so that its a-component is
/// nonnegative.
pub fn kernel_tangent(x: &XVector<C>, t: Truncation, w: &Weights) -> Result<(XVector<C>, bool), ContinuationError> {
    let q = XVector::zeros(t);
    let jac = jacobian_c64(x, &q, C::new(0.0, 0.0), t, false);
    let jr = jac.remove_row(0);
    let (v, one_dim) = null_vector(&jr, 0x5eed)?;
    let v = XVector::from_slice(t, v.as_slice());
    let s1 = v.symmetrize();
    let s2 = v.map(|c| c * C::new(0.0, 1.0)).symmetrize();
    let n1 = s1.norm(w);
    let n2 = s2.norm(w);
    let (mut s, n) = if n1 >= n2 { (s1, n1) } else { (s2, n2) };
    s = s.scale(1.0 / n);
    if s.a.re < 0.0 {
        s = s.scale(-1.0);
    }
    Ok((s, one_dim))
}

/// A crossing of a complex-conjugate pair through the imaginary axis.
#[derive(Clone, Debug, PartialEq)]
pub struct HopfCrossing {
    pub param: f64,
    pub omega: f64,
    pub eigenvector: DVector<C>,
}

fn eigenvalues(m: &DMatrix<C>) -> Vec<C> {
    let schur = m.clone().schur();
    let (_, t) = schur.unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Largest real part among eigenvalues with |Im| > `im_tol`, and the
/// eigenvalue attaining it (positive imaginary part).
pub fn oscillatory_abscissa(m: &DMatrix<C>, im_tol: f64) -> Option<(f64, C)> {
    eigenvalues(m)
        .into_iter()
        .filter(|z| z.im > im_tol)
        .map(|z| (z.re, z))
        .max_by(|a, b| a.0.total_cmp(&b.0))
}

/// Eigenvector for a simple eigenvalue by inverse iteration.
pub fn eigenvector(m: &DMatrix<C>, mu: C) -> Result<DVector<C>, ContinuationError> {
    let n = m.nrows();
    let shift = mu + C::new(1e-10 * (1.0 + mu.norm()), 0.0);
    let lu = (m - DMatrix::identity(n, n) * shift).lu();
    let mut v = DVector::from_element(n, C::new(1.0, 0.3));
    for _ in 0..4 {
        v = lu.solve(&v).ok_or(ContinuationError::SingularJacobian)?;
        let nv = v.norm();
        v /= C::new(nv, 0.0);
    }
    Ok(v)
}

/// Locate where the oscillatory abscissa of `matrix(p)` changes sign on the
/// sorted grid `params`, refined by bisection to `tol` in p.
pub fn find_hopf_crossing(
    params: &[f64],
    matrix: impl Fn(f64) -> Result<DMatrix<C>, ContinuationError>,
    tol: f64,
) -> Result<HopfCrossing, ContinuationError> {
    // Structural zero eigenvalues pick up imaginary noise proportional to
    // the largest entry (the k⁴ diagonal), so the cut-off is relative.
    let im_tol = |m: &DMatrix<C>| 1e-6 * m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let g = |p: f64| -> Result<f64, ContinuationError> {
        let m = matrix(p)?;
        Ok(oscillatory_abscissa(&m, im_tol(&m)).map_or(f64::NEG_INFINITY, |v| v.0))
    };
    let mut prev: Option<(f64, f64)> = None;
    let mut bracket = None;
    for &p in params {
        let gp = g(p)?;
        if let Some((p0, g0)) = prev {
            if (g0 < 0.0) != (gp < 0.0) && g0.is_finite() && gp.is_finite() {
                bracket = Some((p0, g0, p, gp));
                break;
            }
        }
        prev = Some((p, gp));
    }
    let (mut lo, mut glo, mut hi, _) = bracket.ok_or(ContinuationError::NoCrossing)?;
    for _ in 0..200 {
        if (hi - lo).abs() <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let gm = g(mid)?;
        if (gm < 0.0) == (glo < 0.0) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    let p = 0.5 * (lo + hi);
    let m = matrix(p)?;
    let (_, mu) = oscillatory_abscissa(&m, im_tol(&m)).ok_or(ContinuationError::NoCrossing)?;
    Ok(HopfCrossing { param: p, omega: mu.im, eigenvector: eigenvector(&m, mu)? })
}

/// Blow-up initial guess at a = 0: ẑ_{1,·} = φ, ẑ_{−1,·} = φ*, scaled so
/// that ⟨J²conj(ẑ), ẑ⟩ = 1 and rotated so that ⟨iJẑ, ẑ⟩ = 0; λ₁ = 1/ω.
pub fn initial_hopf_guess(hopf: &SteadyHopf, t: Truncation) -> XVector<C> {
    let phi = hopf.eigenvector.resized(t.n);
    let s: C = phi.iter().map(|(_, c)| c * c).sum();
    let rot = C::from_polar(1.0, -0.5 * s.arg());
    let nrm: f64 = phi.iter().map(|(_, c)| c.norm_sqr()).sum::<f64>() * 2.0;
    let phi = phi.mul_scalar(rot / nrm.sqrt());
    let mut z = Seq2D::zeros(t.m, t.n);
    for (k, c) in phi.iter() {
        z.set(1, k, c);
        z.set(-1, -k, c.conj());
    }
    XVector { lambda1: C::new(1.0 / hopf.omega, 0.0), lambda2: C::new(hopf.steady.lambda2, 0.0), a: C::new(0.0, 0.0), y: hopf.steady.y.resized(t.n), z }
}

/// One validated-to-be segment: consecutive anchors and their continuation
/// equations.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchSegment {
    pub xhat0: XVector<C>,
    pub xhat1: XVector<C>,
    pub q0: XVector<C>,
    pub q1: XVector<C>,
    pub c0: C,
    pub c1: C,
    pub residual0: f64,
    pub residual1: f64,
    pub step: f64,
}

impl BranchSegment {
    pub fn anchors(&self, mode: ContinuationMode) -> ProblemAnchors {
        ProblemAnchors {
            xhat0: self.xhat0.clone(),
            xhat1: self.xhat1.clone(),
            q0: self.q0.clone(),
            q1: self.q1.clone(),
            c0: self.c0,
            c1: self.c1,
            mode,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BranchRun {
    pub mode: ContinuationMode,
    pub truncation: Truncation,
    pub segments: Vec<BranchSegment>,
}

impl BranchRun {
    /// Segment indices whose endpoint amplitudes have opposite signs.
    pub fn hopf_crossings(&self) -> Vec<usize> {
        self.segments.iter().enumerate().filter(|(_, s)| s.xhat0.a.re * s.xhat1.a.re < 0.0).map(|(i, _)| i).collect()
    }
}

/// Parameters of a branch run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepConfig {
    pub a_from: f64,
    pub a_to: f64,
    pub a_step: f64,
    pub mode: ContinuationMode,
    pub newton: NewtonOptions,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self { a_from: -0.025, a_to: 0.025, a_step: 0.01, mode: ContinuationMode::ParameterInA, newton: NewtonOptions::default() }
    }
}

/// Solve at a = target in parameter mode, subdividing from `from` if the
/// direct solve fails.
fn solve_at_a(from: &XVector<C>, target: f64, t: Truncation, opts: NewtonOptions, depth: u32) -> Result<NewtonReport<XVector<C>>, ContinuationError> {
    let q = q_parameter_in_a(t);
    let anch = Anchoring::SelfAnchored { q, c: C::new(target, 0.0) };
    let mut guess = from.clone();
    guess.a = C::new(target, 0.0);
    match newton_solve(&guess, &anch, t, opts) {
        Ok(r) => Ok(r),
        Err(e) if depth == 0 => Err(e),
        Err(_) => {
            let mid = 0.5 * (from.a.re + target);
            let m = solve_at_a(from, mid, t, opts, depth - 1)?;
            solve_at_a(&m.x, target, t, opts, depth - 1).map_err(|_| ContinuationError::StepFailure(target))
        }
    }
}

/// The a-grid a_from, a_from + step, …, a_to.
pub fn a_grid(cfg: &StepConfig) -> Result<Vec<f64>, ContinuationError> {
    if !(cfg.a_step > 0.0) || !(cfg.a_to > cfg.a_from) {
        return Err(ContinuationError::Config("need a_from < a_to and a_step > 0".into()));
    }
    let n = ((cfg.a_to - cfg.a_from) / cfg.a_step).round() as usize;
    let grid: Vec<f64> = (0..=n).map(|i| cfg.a_from + i as f64 * cfg.a_step).collect();
    if grid.windows(2).any(|w| w[0] == w[1]) {
        return Err(ContinuationError::Config("consecutive anchors coincide".into()));
    }
    Ok(grid)
}

/// Continue from the a = 0 solution `x0` across [a_from, a_to].
pub fn step_branch(x0: &XVector<C>, t: Truncation, cfg: &StepConfig, w: &Weights) -> Result<BranchRun, ContinuationError> {
    let grid = a_grid(cfg)?;
    let opts = cfg.newton;
    // March outward from a = 0 so every solve starts near a known solution.
    let mut sols: Vec<Option<NewtonReport<XVector<C>>>> = vec![None; grid.len()];
    let split = grid.partition_point(|&a| a < 0.0);
    let mut prev = x0.clone();
    for i in (0..split).rev() {
        let r = solve_at_a(&prev, grid[i], t, opts, 6)?;
        prev = r.x.clone();
        sols[i] = Some(r);
    }
    prev = x0.clone();
    for i in split..grid.len() {
        let r = solve_at_a(&prev, grid[i], t, opts, 6)?;
        prev = r.x.clone();
        sols[i] = Some(r);
    }
    let sols: Vec<NewtonReport<XVector<C>>> = sols.into_iter().map(|s| s.expect("all grid points solved")).collect();
    match cfg.mode {
        ContinuationMode::ParameterInA => {
            let q = q_parameter_in_a::<C>(t);
            let segments = sols
                .windows(2)
                .map(|p| BranchSegment {
                    xhat0: p[0].x.clone(),
                    xhat1: p[1].x.clone(),
                    q0: q.clone(),
                    q1: q.clone(),
                    c0: p[0].x.a,
                    c1: p[1].x.a,
                    residual0: p[0].residual,
                    residual1: p[1].residual,
                    step: cfg.a_step,
                })
                .collect();
            Ok(BranchRun { mode: cfg.mode, truncation: t, segments })
        }
        ContinuationMode::PseudoArclength => pseudo_arclength(&sols[0].x, t, cfg, w, grid.len() - 1),
    }
}

/// Predictor–corrector stepping along the tangent, starting at `x0`.
fn pseudo_arclength(x0: &XVector<C>, t: Truncation, cfg: &StepConfig, w: &Weights, n_seg: usize) -> Result<BranchRun, ContinuationError> {
    let mut x = x0.clone();
    let (mut v, _) = kernel_tangent(&x, t, w)?;
    let mut c = x.inner(&v);
    let mut res = 0.0;
    let mut segments = Vec::with_capacity(n_seg);
    let mut h = cfg.a_step;
    while segments.len() < n_seg {
        let pred = x.add(&v.scale(h));
        let cn = pred.inner(&v);
        let anch = Anchoring::SelfAnchored { q: v.clone(), c: cn };
        match newton_solve(&pred, &anch, t, cfg.newton) {
            Ok(r) => {
                let (mut v1, _) = kernel_tangent(&r.x, t, w)?;
                if v1.inner(&v).re < 0.0 {
                    v1 = v1.scale(-1.0);
                }
                let c1 = r.x.inner(&v1);
                segments.push(BranchSegment {
                    xhat0: x.clone(),
                    xhat1: r.x.clone(),
                    q0: v.clone(),
                    q1: v1.clone(),
                    c0: c,
                    c1,
                    residual0: res,
                    residual1: r.residual,
                    step: h,
                });
                x = r.x;
                v = v1;
                c = c1;
                res = r.residual;
            }
            Err(_) => {
                h /= 2.0;
                if h < cfg.a_step * 1e-3 {
                    return Err(ContinuationError::StepFailure(x.a.re));
                }
            }
        }
    }
    Ok(BranchRun { mode: ContinuationMode::PseudoArclength, truncation: t, segments })
}

/// Everything up to the first blow-up solution: steady branch, Hopf point,
/// initial guess and its Newton refinement at a = 0.
#[derive(Clone, Debug)]
pub struct HopfSeed {
    pub hopf: SteadyHopf,
    pub x0: XVector<C>,
    pub residual: f64,
}

/// Mode of the steady branch carrying the Hopf point.
pub const STEADY_MODE: i64 = 2;
/// Lower end of the λ₂ sweep.
pub const LAMBDA2_MIN: f64 = 0.12;

/// Largest arclength step on the steady branch.
pub const STEADY_STEP: f64 = 0.05;

pub fn compute_steady(n: usize, opts: NewtonOptions) -> Result<SteadyBranch, ContinuationError> {
    steady_branch(n, STEADY_MODE, LAMBDA2_MIN, STEADY_STEP, opts)
}

pub fn hopf_seed(t: Truncation, opts: NewtonOptions) -> Result<HopfSeed, ContinuationError> {
    hopf_seed_on(&compute_steady(t.n, opts)?, t, opts)
}

/// Hopf seed from an already computed steady branch with `N = t.n`.
pub fn hopf_seed_on(branch: &SteadyBranch, t: Truncation, opts: NewtonOptions) -> Result<HopfSeed, ContinuationError> {
    let hopf = steady_hopf(branch, opts)?;
    let guess = initial_hopf_guess(&hopf, t);
    let anch = Anchoring::SelfAnchored { q: q_parameter_in_a(t), c: C::new(0.0, 0.0) };
    let rep = newton_solve(&guess, &anch, t, opts)?;
    Ok(HopfSeed { hopf, x0: rep.x, residual: rep.residual })
}

#[cfg(test)]
mod tests;
