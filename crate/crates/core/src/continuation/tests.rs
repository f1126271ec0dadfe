use super::*;
use crate::sequence::Seq1D;

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

#[test]
fn linear_slot_converges_in_one_step() {
    // On N = 2 the mode-2 state is an exact root with λ₂ = 1/4; λ₂ enters linearly.
    let eps = 0.3;
    let mut y = Seq1D::zeros(2);
    y.set(2, C::new(0.0, -eps / 2.0));
    y.set(-2, C::new(0.0, eps / 2.0));
    let guess = SteadyPoint { amplitude: eps, lambda2: 0.3, y };
    let mut u0 = DVector::zeros(6);
    u0[0] = c(guess.lambda2);
    for k in -2i64..=2 {
        u0[(k + 3) as usize] = guess.y.get(k);
    }
    let rep = dense_newton(u0, |u| steady_system(2, 2, eps, u), |u| symmetrize_steady(2, u), NewtonOptions::default()).unwrap();
    assert_eq!(rep.iterations, 1);
    assert!((rep.x[0].re - 0.25).abs() < 1e-15);
}

#[test]
fn newton_converges_quadratically() {
    let branch = steady_branch(8, 2, 0.2, 0.05, NewtonOptions::default()).unwrap();
    let p = branch.points.last().unwrap();
    let mut guess = p.clone();
    guess.lambda2 += 0.01;
    guess.y = guess.y.map_indexed(|k, v| v + C::new(0.0, 0.01 * (k as f64).signum()));
    let mut u0 = DVector::zeros(18);
    u0[0] = c(guess.lambda2);
    for k in -8i64..=8 {
        u0[(k + 9) as usize] = guess.y.get(k);
    }
    let opts = NewtonOptions { tol: 1e-14, max_iter: 30 };
    let rep = dense_newton(u0, |u| steady_system(8, 2, p.amplitude, u), |u| symmetrize_steady(8, u), opts).unwrap();
    let h = &rep.history;
    // Residuals square (up to a constant) once in the basin.
    let mut checked = 0;
    for w in h.windows(2) {
        if w[0] < 1e-2 && w[1] > 1e-13 {
            assert!(w[1] <= 50.0 * w[0] * w[0], "{h:?}");
            checked += 1;
        }
    }
    assert!(checked >= 1, "{h:?}");
}

#[test]
fn divergent_start_is_reported() {
    let guess = SteadyPoint { amplitude: 50.0, lambda2: -3.0, y: Seq1D::from_fn(6, |k| C::new(0.0, 40.0 * k as f64)) };
    let r = steady_solve(6, 2, 50.0, &guess, NewtonOptions { tol: 1e-12, max_iter: 4 });
    assert!(matches!(r, Err(ContinuationError::NoConvergence { .. }) | Err(ContinuationError::SingularJacobian)));
}

#[test]
fn null_vector_of_zero_column() {
    let n = 5;
    let mut m = DMatrix::<C>::from_fn(n - 1, n, |i, j| c(((i * 7 + j * 3) % 5) as f64 + if i == j { 4.0 } else { 0.0 }));
    for i in 0..n - 1 {
        m[(i, 2)] = c(0.0);
    }
    // Make the remaining square part nonsingular.
    let (v, one_dim) = null_vector(&m, 3).unwrap();
    assert!(one_dim);
    for j in 0..n {
        if j != 2 {
            assert!(v[j].norm() < 1e-12);
        }
    }
    assert!((v[2].norm() - 1.0).abs() < 1e-12);
}

#[test]
fn planted_crossing_is_recovered() {
    let omega = 2.5;
    let matrix = |p: f64| -> Result<DMatrix<C>, ContinuationError> {
        let mut m = DMatrix::<C>::zeros(4, 4);
        m[(0, 0)] = c(p - 0.3);
        m[(0, 1)] = c(-omega);
        m[(1, 0)] = c(omega);
        m[(1, 1)] = c(p - 0.3);
        m[(2, 2)] = c(-1.0);
        m[(3, 3)] = c(-2.0 - p);
        Ok(m)
    };
    let params: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
    let hc = find_hopf_crossing(&params, matrix, 1e-13).unwrap();
    assert!((hc.omega - omega).abs() < 1e-8);
    assert!((hc.param - 0.3).abs() < 1e-10);
    let none = find_hopf_crossing(&params[..2], matrix, 1e-13);
    assert_eq!(none.unwrap_err(), ContinuationError::NoCrossing);
}

#[test]
fn small_pipeline_crosses_once() {
    let t = Truncation::new(3, 8);
    let w = Weights::default();
    let seed = hopf_seed(t, NewtonOptions::default()).unwrap();
    let x0 = &seed.x0;
    assert!(x0.is_symmetric());
    let g1: C = x0.z.iter().map(|(j, k, v)| v * x0.z.get(j, k).conj() * (j * j) as f64).sum();
    assert!((g1 - c(1.0)).norm() < 1e-10);
    let run = step_branch(x0, t, &StepConfig::default(), &w).unwrap();
    assert_eq!(run.segments.len(), 5);
    assert_eq!(run.hopf_crossings(), vec![2]);
    for s in run.segments.windows(2) {
        assert_eq!(s[0].xhat1, s[1].xhat0);
    }
    for s in &run.segments {
        assert_eq!(s.c0, s.xhat0.a);
        assert_ne!(s.xhat0.a, s.xhat1.a);
        assert!(s.xhat0.is_symmetric() && s.xhat1.is_symmetric());
    }
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("run.json");
    write_run_json(&run, &w, &p).unwrap();
    assert_eq!(read_run_json(&p).unwrap().to_run().unwrap(), run);
    write_branch_csv(&run, &w, &dir.path().join("b.csv")).unwrap();
}

#[test]
fn tangent_is_symmetric_unit_and_in_kernel() {
    let t = Truncation::new(2, 6);
    let w = Weights::default();
    let seed = hopf_seed(t, NewtonOptions::default()).unwrap();
    let mut x = seed.x0.clone();
    // Move off a = 0 where the branch is regular in a.
    let r = newton_solve(&{ x.a = c(0.01); x }, &Anchoring::SelfAnchored { q: q_parameter_in_a(t), c: c(0.01) }, t, NewtonOptions::default()).unwrap();
    let (v, one_dim) = kernel_tangent(&r.x, t, &w).unwrap();
    assert!(one_dim);
    assert!(v.is_symmetric());
    assert!((v.norm(&w) - 1.0).abs() < 1e-12);
    let jac = jacobian_c64(&r.x, &XVector::zeros(t), c(0.0), t, false);
    let dv = &jac * DVector::from_vec(v.to_vec(t));
    assert!(dv.iter().skip(1).all(|z| z.norm() < 1e-8));
}
