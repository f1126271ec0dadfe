use std::sync::OnceLock;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};

use super::bounds::*;
use super::spot::{random_direction, SPOT_PAD};
use super::*;
use crate::continuation::{hopf_seed, step_branch, BranchRun, NewtonOptions, StepConfig};
use crate::operators::ed_apply;
use crate::sequence::{midpoint, XVector};
use crate::system::{dh_apply, eval_h};
use crate::tail::DiagonalDenominator;

type C = Complex64;

const T: Truncation = Truncation::new(3, 8);

/// Two short segments around the Hopf point at a small truncation.
fn fixture() -> &'static BranchRun {
    static RUN: OnceLock<BranchRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let seed = hopf_seed(T, NewtonOptions::default()).unwrap();
        let cfg = StepConfig { a_from: -0.005, a_to: 0.005, a_step: 0.005, ..Default::default() };
        step_branch(&seed.x0, T, &cfg, &Weights::default()).unwrap()
    })
}

fn cfg() -> ValidationConfig {
    ValidationConfig { exec: Execution::Sequential, ..Default::default() }
}

fn endpoint(sigma: usize) -> Endpoint {
    let anchors = fixture().segments[0].anchors(ContinuationMode::ParameterInA);
    Endpoint::new(anchors.endpoint(sigma), T, &cfg()).unwrap()
}

fn pt(x: &XVector<C>) -> XVector<ComplexInterval> {
    x.map(ComplexInterval::point)
}

fn norm(x: &XVector<ComplexInterval>) -> f64 {
    midpoint(x).norm(&Weights::default())
}

#[test]
fn radii_worked_example() {
    let s = solve_radii(0.01, 0.3, 0.2, 1.0, 1.0);
    assert!(s.validated);
    let r = s.r_star.unwrap();
    let [lo, hi] = s.negativity.unwrap();
    assert!(lo <= r && r < hi && hi <= 0.48);
    assert!(radii_poly(0.01, 0.5, 1.0, ScalarInterval::point(r)).hi() < 0.0);
    assert!(radii_poly(0.01, 0.5, 1.0, ScalarInterval::point(0.05)).hi() < 0.0);
}

#[test]
fn radii_without_negativity_region_fails() {
    let s = solve_radii(1.0, 0.5, 0.49, 1.0, 1.0);
    assert!(!s.validated && s.r_star.is_none());
    assert!(!solve_radii(1e-6, 0.6, 0.4, 1.0, 1.0).validated);
    assert!(!solve_radii(f64::NAN, 0.1, 0.1, 1.0, 1.0).validated);
}

#[test]
fn radius_above_cap_fails() {
    let s = solve_radii(0.01, 0.3, 0.2, 1.0, 1e-3);
    assert!(!s.validated);
    assert!(s.failure.unwrap().contains("exceeds R"));
    // A lower root below R is capped at R.
    let s = solve_radii(1e-6, 0.3, 0.2, 0.0, 1e-4);
    assert!(s.validated && s.r_star.unwrap() <= 1e-4);
    let s = solve_radii(0.0, 0.1, 0.1, 10.0, 1e-4);
    assert!(s.validated && s.r_star.unwrap() == 0.5e-4);
}

#[test]
fn s_bound_is_tight_for_parabola() {
    // f(s) = s(1 − s): f(0) = f(1) = 0, f″ = −2, max 1/4.
    let b = s_bound(0.0, 0.0, 2.0);
    assert!((b - 0.25).abs() < 1e-15 && b >= 0.25);
    assert_eq!(s_bound(0.3, -0.7, 0.0), 0.7);
}

#[test]
fn s_bound_dominates_random_quadratics() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(5);
    for _ in 0..200 {
        let (a, b, c): (f64, f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let f = |s: f64| a + b * s + c * s * s;
        let grid = (0..=1000).map(|i| f(i as f64 / 1000.0).abs()).fold(0.0, f64::max);
        assert!(s_bound(f(0.0), f(1.0), 2.0 * c) >= grid);
    }
}

#[test]
fn single_y_is_the_norm_of_the_full_residual() {
    let ep = endpoint(0);
    let w = Weights::default();
    let h = eval_h(&ep.anc.xhat, &ep.anc);
    let ah = ed_apply(&ep.a, &h).unwrap();
    assert!(ah.support().m <= 2 * T.m && ah.support().n <= 2 * T.n);
    let y = y_single(&ep, &w).unwrap();
    assert_eq!(y, ah.norm(&w));
    assert!(y.is_finite() && y > 0.0);
}

#[test]
fn z0_is_rounding_sized() {
    let ep = endpoint(0);
    assert!(z0_single(&ep, &Weights::default(), &cfg()) < 1e-9);
}

#[test]
fn single_bounds_dominate_samples() {
    let ep = endpoint(0);
    let c = cfg();
    let w = Weights::default();
    let b = single_bounds(&ep, &c).unwrap();
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let big = T.add(&SPOT_PAD);
    let x = &ep.anc.xhat;
    for _ in 0..100 {
        let v = pt(&random_direction(&mut rng, big, &c));
        let adv = ed_apply(&ep.a_dagger, &v).unwrap();
        let z0 = v.sub(&ed_apply(&ep.a, &adv).unwrap());
        assert!(norm(&z0) <= b.z0 * 1.01 + 1e-12, "Z0");
        let bv = adv.sub(&dh_apply(x, &ep.anc, &v));
        let z1 = ed_apply(&ep.a, &bv).unwrap();
        assert!(norm(&z1) <= b.z1 * 1.000001, "Z1 {} > {}", norm(&z1), b.z1);
        // ‖A(DH(x̂ + rb) − DH(x̂))c‖ ≤ Z₂ r for r ≤ R.
        let r = c.r_max * rng.random_range(0.1..1.0);
        let xb = x.add(&pt(&random_direction(&mut rng, big, &c)).scale(r));
        let d = dh_apply(&xb, &ep.anc, &v).sub(&dh_apply(x, &ep.anc, &v));
        let z2 = ed_apply(&ep.a, &d).unwrap();
        assert!(norm(&z2) <= b.z2 * r, "Z2");
    }
    assert_eq!(w, c.weights);
}

#[test]
fn z2_is_monotone_in_the_radius() {
    let ep = endpoint(0);
    let w = Weights::default();
    let small = z2_single(&ep, &w, &ValidationConfig { r_max: 1e-5, ..cfg() });
    let large = z2_single(&ep, &w, &ValidationConfig { r_max: 1e-3, ..cfg() });
    assert!(small < large);
}

#[test]
fn degenerate_segment_matches_single() {
    let c = cfg();
    let mut seg = fixture().segments[0].clone();
    seg.xhat1 = seg.xhat0.clone();
    seg.q1 = seg.q0.clone();
    seg.c1 = seg.c0;
    let anchors = seg.anchors(ContinuationMode::ParameterInA);
    let c0 = EndpointCache::new(&anchors, 0, T, &c).unwrap();
    let c1 = EndpointCache::new(&anchors, 1, T, &c).unwrap();
    let sd = SegmentData::new(&anchors, &c0.ep, &c1.ep, &c).unwrap();
    let b = segment_bounds(&sd, &c0.z1, &c1.z1, &c).unwrap();
    let s = single_bounds(&c0.ep, &c).unwrap();
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-10 * b.abs().max(1e-300) + 1e-13;
    assert!(close(b.y, s.y), "Y {} vs {}", b.y, s.y);
    assert!(close(b.z0, s.z0), "Z0 {} vs {}", b.z0, s.z0);
    assert!(close(b.z1, s.z1), "Z1 {} vs {}", b.z1, s.z1);
    assert!(close(b.z2, s.z2), "Z2 {} vs {}", b.z2, s.z2);
}

#[test]
fn segment_bounds_dominate_grid_samples() {
    let c = cfg();
    let run = fixture();
    let anchors = run.segments[0].anchors(run.mode);
    let c0 = EndpointCache::new(&anchors, 0, T, &c).unwrap();
    let c1 = EndpointCache::new(&anchors, 1, T, &c).unwrap();
    let sd = SegmentData::new(&anchors, &c0.ep, &c1.ep, &c).unwrap();
    let b = segment_bounds(&sd, &c0.z1, &c1.z1, &c).unwrap();
    let apply_as = |s: f64, v: &XVector<ComplexInterval>| {
        let a0 = ed_apply(&c0.ep.a, v).unwrap();
        let a1 = ed_apply(&c1.ep.a, v).unwrap();
        a0.scale(1.0 - s).add(&a1.scale(s))
    };
    let apply_ad = |s: f64, v: &XVector<ComplexInterval>| {
        let a0 = ed_apply(&c0.ep.a_dagger, v).unwrap();
        let a1 = ed_apply(&c1.ep.a_dagger, v).unwrap();
        a0.scale(1.0 - s).add(&a1.scale(s))
    };
    let mut rng = rand::rngs::StdRng::seed_from_u64(9);
    let big = T.add(&SPOT_PAD);
    for i in 0..=100 {
        let s = i as f64 / 100.0;
        let anc = anchors.over(ScalarInterval::point(s));
        let h = eval_h(&anc.xhat, &anc);
        assert!(norm(&apply_as(s, &h)) <= b.y * 1.000001, "Y at s = {s}");
        let v = pt(&random_direction(&mut rng, big, &c));
        let ad = apply_ad(s, &v);
        assert!(norm(&v.sub(&apply_as(s, &ad))) <= b.z0 * 1.01 + 1e-12, "Z0 at s = {s}");
        let bv = ad.sub(&dh_apply(&anc.xhat, &anc, &v));
        assert!(norm(&apply_as(s, &bv)) <= b.z1 * 1.000001, "Z1 at s = {s}");
    }
}

#[test]
fn only_sign_changes_in_parameter_mode_are_crossings() {
    let c = cfg();
    let run = fixture();
    let anchors = run.segments[0].anchors(run.mode);
    let c0 = EndpointCache::new(&anchors, 0, T, &c).unwrap();
    let c1 = EndpointCache::new(&anchors, 1, T, &c).unwrap();
    let cert = validate_segment_with(&anchors, &c0, &c1, &c, Some(0));
    assert!(!cert.hopf_crossing || cert.validated);
    // â₀ = −0.005 and â₁ = 0: the product is not strictly negative.
    assert!(!cert.hopf_crossing);
    let mut pa = anchors.clone();
    pa.mode = ContinuationMode::PseudoArclength;
    assert!(!validate_segment_with(&pa, &c0, &c1, &c, Some(0)).hopf_crossing);
    assert!(cert.recheck());
}

#[test]
fn vanishing_tail_is_not_injective() {
    let p = |l2: f64| {
        let l = ComplexInterval::point(C::new(l2, 0.0));
        [DiagonalDenominator::p1(l), DiagonalDenominator::p2(ComplexInterval::point(C::new(0.3, 0.0)), l)]
    };
    assert!(denominators_nonvanishing(&p(0.13), &p(0.14), T));
    // λ₂k² = 1 at k = 10 > N for λ₂ = 0.01, inside the hull [0.009, 0.011].
    assert!(!denominators_nonvanishing(&p(0.009), &p(0.011), T));
}

#[test]
fn certificate_round_trips_through_json() {
    let run = fixture();
    let certs = validate_run(run, &ValidationConfig { echo: serde_json::json!({"m": 3}), ..cfg() }, |_, _| {});
    assert_eq!(certs.len(), run.segments.len());
    for c in &certs {
        assert!(c.recheck());
        let s = serde_json::to_string(c).unwrap();
        assert!(s.contains("\"Z2\"") && s.contains("\"negativity_interval\""));
        let back: Certificate = serde_json::from_str(&s).unwrap();
        assert_eq!(&back, c);
    }
    assert_eq!(certs[0].config_echo["m"], 3);
}

#[test]
fn longest_chain_counts_consecutive_validations() {
    let mut c = validate_single(&fixture().segments[0].anchors(ContinuationMode::ParameterInA).endpoint(0).map(|v| v.mid()), ContinuationMode::ParameterInA, T, &cfg());
    let mut mk = |v: bool| {
        c.validated = v;
        c.clone()
    };
    let certs = vec![mk(true), mk(false), mk(true), mk(true), mk(true), mk(false)];
    assert_eq!(longest_validated_chain(&certs), 2..5);
    assert_eq!(longest_validated_chain(&[]), 0..0);
}
