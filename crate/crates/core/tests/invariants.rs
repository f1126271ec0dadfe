//! Property tests for the invariants the validator relies on.

mod common;

use proptest::prelude::*;

use kshopf::config::RunConfig;
use kshopf::interval::ScalarInterval;
use kshopf::sequence::{Truncation, XVector};
use kshopf::system::{eval_h, AnchorPoint};
use kshopf::validator::bounds::s_bound;
use kshopf::validator::{radii_poly, solve_radii};

use common::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn interval_ops_contain_exact_results(seed in any::<u64>()) {
        let (_, fail) = interval_containment(200, seed);
        prop_assert!(fail.is_none(), "{:?}", fail);
    }

    #[test]
    fn convolution_is_submultiplicative(seed in any::<u64>()) {
        prop_assert!(banach_algebra(5, seed).is_ok());
    }

    #[test]
    fn block_norms_match_brute_force_and_dominate(seed in any::<u64>()) {
        let r = norm_fidelity(4, 20, seed);
        prop_assert!(r.is_ok(), "{:?}", r);
    }

    #[test]
    fn tail_bound_dominates_scan(seed in any::<u64>()) {
        let r = tail_soundness(1, 20_000, seed);
        prop_assert!(r.is_ok(), "{:?}", r);
    }

    #[test]
    fn s_bound_dominates_quadratics(a in -1.0..1.0f64, b in -1.0..1.0f64, c in -1.0..1.0f64, extra in 0.0..1.0f64) {
        let f = |s: f64| a + b * s + c * s * s;
        let grid = (0..=1000).map(|k| f(k as f64 / 1000.0).abs()).fold(0.0, f64::max);
        // Any upper bound on |f''| is admissible.
        prop_assert!(s_bound(f(0.0), f(1.0), 2.0 * c.abs() + extra) >= grid);
    }

    #[test]
    fn radii_solution_is_certified(y in 0.0..1e-4f64, z0 in 0.0..1e-3f64, z1 in 0.0..0.99f64, z2 in 0.0..1e4f64) {
        let r_max = 1e-4;
        let sol = solve_radii(y, z0, z1, z2, r_max);
        if sol.validated {
            let r = sol.r_star.unwrap();
            prop_assert!(r > 0.0 && r <= r_max);
            prop_assert!(radii_poly(y, z0 + z1, z2, ScalarInterval::point(r)).hi() < 0.0);
        } else {
            // Rejections must be genuine: p is not negative on a grid in (0, R].
            let z = z0 + z1;
            let neg = (1..=1000).map(|k| r_max * k as f64 / 1000.0).find(|r| y + (z - 1.0) * r + z2 * r * r < -1e-14 * (1.0 + y));
            prop_assert!(neg.is_none() || z >= 1.0, "rejected although p({:?}) < 0", neg);
        }
    }

    #[test]
    fn h_preserves_symmetry(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = Truncation::new(2, 4);
        let x = random_x(&mut r, t, 0.5);
        let anc = AnchorPoint { xhat: random_x(&mut r, t, 0.5), q: random_x(&mut r, t, 0.5), c: C::new(random_c(&mut r, 1.0).re, 0.0) };
        let h = eval_h(&x, &anc);
        let defect = h.sub(&h.symmetrize());
        let scale = h.to_vec(h.support()).iter().map(|v| v.norm()).fold(1.0, f64::max);
        prop_assert!(max_entry(&defect) <= 1e-12 * scale);
    }

    #[test]
    fn config_round_trips(m in 1usize..20, n in 1usize..30, nu in 1.0..1.5f64, r in 1e-8..1e-2f64, step in 1e-4..1e-2f64) {
        let mut c = RunConfig::default();
        c.truncation.m = m;
        c.truncation.n = n;
        c.weights.nu1 = nu;
        c.weights.nu2 = nu;
        c.validation.r_max = r;
        c.continuation.a_step = step;
        prop_assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
    }
}

fn max_entry(x: &XVector<C>) -> f64 {
    x.to_vec(x.support()).iter().map(|v| v.norm()).fold(0.0, f64::max)
}
