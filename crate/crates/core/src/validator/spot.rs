//! Sampled contraction check on a validated ball. Floating point only; a
//! smoke test of the bounds, not part of the proof.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::interval::ComplexInterval;
use crate::operators::ed_apply;
use crate::sequence::{midpoint, Truncation, XVector};
use crate::system::{eval_h, AnchorPoint, ProblemAnchors};

use super::bounds::Endpoint;
use super::{Certificate, ValidationConfig, ValidationError};

type C = Complex64;

/// Extra modes beyond K for the sampled directions.
pub const SPOT_PAD: Truncation = Truncation::new(2, 4);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpotReport {
    pub samples: usize,
    /// Largest sampled ‖T(x) − T(x′)‖ / ‖x − x′‖.
    pub max_ratio: f64,
    /// Z₀ + Z₁ + Z₂r* from the certificate.
    pub bound: f64,
    pub passed: bool,
}

/// Random symmetric direction of unit norm with geometric decay, supported
/// in `t`.
pub fn random_direction(rng: &mut impl Rng, t: Truncation, cfg: &ValidationConfig) -> XVector<C> {
    let mut x = XVector::<C>::zeros(t);
    let mut r = |s: f64| C::new(rng.random_range(-1.0..1.0) * s, rng.random_range(-1.0..1.0) * s);
    x.lambda1 = r(1.0);
    x.lambda2 = r(1.0);
    x.a = r(1.0);
    for k in -(t.n as i64)..=(t.n as i64) {
        x.y.set(k, r(0.7f64.powi(k.abs() as i32)));
    }
    for j in -(t.m as i64)..=(t.m as i64) {
        for k in -(t.n as i64)..=(t.n as i64) {
            x.z.set(j, k, r(0.7f64.powi((j.abs() + k.abs()) as i32)));
        }
    }
    let x = x.symmetrize();
    let n = x.norm(&cfg.weights);
    x.scale(1.0 / n)
}

/// A_s v = (1 − s)A₀v + sA₁v at the midpoint.
fn apply_as(e0: &Endpoint, e1: &Endpoint, s: f64, v: &XVector<C>) -> Result<XVector<C>, ValidationError> {
    let vi = v.map(ComplexInterval::point);
    let a0 = midpoint(&ed_apply(&e0.a, &vi)?);
    let a1 = midpoint(&ed_apply(&e1.a, &vi)?);
    let t = a0.support().max(&a1.support());
    Ok(a0.resized(t).scale(1.0 - s).add(&a1.resized(t).scale(s)))
}

fn anchors_at(anchors: &ProblemAnchors, s: f64) -> AnchorPoint<C> {
    let lerp = |a: &XVector<C>, b: &XVector<C>| a.scale(1.0 - s).add(&b.scale(s));
    AnchorPoint { xhat: lerp(&anchors.xhat0, &anchors.xhat1), q: lerp(&anchors.q0, &anchors.q1), c: anchors.c0 * (1.0 - s) + anchors.c1 * s }
}

/// Sample pairs x, x′ in the ball of radius r*/2 around x̂_s and compare the
/// Lipschitz ratio of T_s with the certified contraction constant.
pub fn spot_check(anchors: &ProblemAnchors, t: Truncation, cert: &Certificate, cfg: &ValidationConfig, samples: usize, seed: u64) -> Result<SpotReport, ValidationError> {
    let bound = cert.contraction().ok_or(ValidationError::Support)?;
    let r = cert.r_star.unwrap_or(0.0) / 2.0;
    let e0 = Endpoint::new(anchors.endpoint(0), t, cfg)?;
    let e1 = Endpoint::new(anchors.endpoint(1), t, cfg)?;
    let big = t.add(&SPOT_PAD);
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut max_ratio = 0.0f64;
    let w = &cfg.weights;
    for _ in 0..samples {
        let s: f64 = if cert.mode == super::CertificateMode::Single { 0.0 } else { rng.random_range(0.0..=1.0) };
        let anc = anchors_at(anchors, s);
        let b = random_direction(&mut rng, big, cfg);
        let b2 = random_direction(&mut rng, big, cfg);
        let x = anc.xhat.resized(big).add(&b.scale(r));
        let x2 = anc.xhat.resized(big).add(&b2.scale(r));
        let dh = eval_h(&x, &anc).sub(&eval_h(&x2, &anc));
        let delta = x.sub(&x2);
        let adh = apply_as(&e0, &e1, s, &dh)?;
        let tt = delta.support().max(&adh.support());
        let diff = delta.resized(tt).sub(&adh.resized(tt));
        max_ratio = max_ratio.max(diff.norm(w) / delta.norm(w));
    }
    Ok(SpotReport { samples, max_ratio, bound, passed: max_ratio <= bound })
}
