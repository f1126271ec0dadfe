//! Rigorous bounds, radii polynomials and certificates.
//!
//! A certificate is issued per anchor point (`single`) or per segment of
//! the branch (`segment`). All bounds are upper bounds in outward-rounded
//! arithmetic; the radii polynomial is re-evaluated in interval arithmetic
//! at the chosen radius.

pub mod bounds;
pub mod spot;
#[cfg(test)]
mod tests;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::continuation::{BranchRun, BranchSegment};
use crate::interval::round::{add_down, add_up, div_down, div_up, mul_down, mul_up, sqrt_down, sqrt_up, sub_down, sub_up};
use crate::interval::{ComplexInterval, ScalarInterval};
use crate::operators::OperatorError;
use crate::par::Execution;
use crate::sequence::{Truncation, Weights};
use crate::system::{AnchorPoint, ContinuationMode, ProblemAnchors, SystemError};
use crate::tail::{ScanRadii, TailError};

use bounds::{single_bounds, tails_nonvanishing, z1_parts, Bounds, Endpoint, SegmentData, Z1Parts};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidationError {
    #[error("anchors are not supported in the truncation")]
    Support,
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Tail(#[from] TailError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// Condition estimates above this are recorded as warnings.
pub const COND_WARN: f64 = 1e12;

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationConfig {
    /// A-priori radius R.
    pub r_max: f64,
    pub weights: Weights,
    /// Tail scan extent; defaults to [`ScanRadii::default_for`].
    pub scan: Option<ScanRadii>,
    pub exec: Execution,
    /// Copied verbatim into every certificate.
    pub echo: serde_json::Value,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self { r_max: 1e-4, weights: Weights::default(), scan: None, exec: Execution::default(), echo: serde_json::Value::Null }
    }
}

/// Outcome of the radii polynomial p(r) = Y + (Z₀ + Z₁ − 1)r + Z₂r².
#[derive(Clone, Debug, PartialEq)]
pub struct RadiiSolution {
    pub validated: bool,
    pub r_star: Option<f64>,
    /// Outer enclosure of the negativity interval.
    pub negativity: Option<[f64; 2]>,
    pub failure: Option<String>,
}

/// p(r) in interval arithmetic.
pub fn radii_poly(y: f64, z: f64, z2: f64, r: ScalarInterval) -> ScalarInterval {
    let p = ScalarInterval::point;
    p(y) + (p(z) - ScalarInterval::ONE) * r + p(z2) * r.sqr()
}

pub fn solve_radii(y: f64, z0: f64, z1: f64, z2: f64, r_max: f64) -> RadiiSolution {
    let fail = |msg: String, neg: Option<[f64; 2]>| RadiiSolution { validated: false, r_star: None, negativity: neg, failure: Some(msg) };
    if ![y, z0, z1, z2, r_max].iter().all(|v| v.is_finite() && *v >= 0.0) {
        return fail("bounds are not finite".into(), None);
    }
    let z = add_up(z0, z1);
    if z >= 1.0 {
        return fail(format!("Z0 + Z1 = {z:.6e} >= 1"), None);
    }
    // Outer and inner enclosures of the roots of p.
    let (b_lo, b_hi) = (sub_down(1.0, z), sub_up(1.0, z));
    let four_yz = mul_up(4.0, mul_up(y, z2));
    let disc_lo = sub_down(mul_down(b_lo, b_lo), four_yz);
    let disc_hi = sub_up(mul_up(b_hi, b_hi), mul_down(4.0, mul_down(y, z2)));
    if disc_lo < 0.0 {
        return fail(format!("no negativity region (discriminant {disc_lo:.3e})"), None);
    }
    let (s_lo, s_hi) = (sqrt_down(disc_lo), sqrt_up(disc_hi));
    // Stable forms: lo = 2Y / (b + √disc), hi = (b + √disc) / (2Z₂).
    let lo_out = div_up(2.0 * y, add_down(b_lo, s_lo));
    let lo_in = div_down(2.0 * y, add_up(b_hi, s_hi));
    let (hi_in, hi_out) = if z2 == 0.0 {
        (f64::MAX, f64::MAX)
    } else {
        (div_down(add_down(b_lo, s_lo), 2.0 * z2), div_up(add_up(b_hi, s_hi), 2.0 * z2))
    };
    let neg = Some([lo_in, hi_out]);
    let mut r = if y == 0.0 {
        0.5 * hi_in.min(r_max)
    } else if lo_out * 1.01 < hi_in {
        lo_out * 1.01
    } else {
        0.5 * (lo_out + hi_in)
    };
    if r > r_max {
        if lo_out < r_max {
            r = r_max;
        } else {
            return fail(format!("r* = {r:.6e} exceeds R = {r_max:.3e}"), neg);
        }
    }
    let p = radii_poly(y, z, z2, ScalarInterval::point(r));
    if !(p.hi() < 0.0) || r <= 0.0 {
        return fail(format!("p(r*) not verified negative at r* = {r:.6e}"), neg);
    }
    RadiiSolution { validated: true, r_star: Some(r), negativity: neg, failure: None }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertificateMode {
    Single,
    Segment,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// 1-norm condition estimates of A†_F at the anchors.
    pub condition: Vec<f64>,
    /// Real parts of â at the anchors.
    pub amplitudes: Vec<f64>,
    pub scan_m: usize,
    pub scan_n: usize,
    pub m: usize,
    pub n: usize,
    pub segment: Option<usize>,
    pub remark: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub mode: CertificateMode,
    pub continuation: ContinuationMode,
    #[serde(rename = "Y")]
    pub y: f64,
    #[serde(rename = "Z0")]
    pub z0: f64,
    #[serde(rename = "Z1")]
    pub z1: f64,
    #[serde(rename = "Z2")]
    pub z2: f64,
    #[serde(rename = "R")]
    pub r_max: f64,
    pub r_star: Option<f64>,
    pub negativity_interval: Option<[f64; 2]>,
    pub validated: bool,
    pub hopf_crossing: bool,
    pub injective: bool,
    pub stage_failures: Vec<String>,
    pub diagnostics: Diagnostics,
    pub config_echo: serde_json::Value,
}

impl Certificate {
    /// Re-evaluates p(r*) in interval arithmetic.
    pub fn recheck(&self) -> bool {
        match self.r_star {
            Some(r) if self.validated => r <= self.r_max && radii_poly(self.y, add_up(self.z0, self.z1), self.z2, ScalarInterval::point(r)).hi() < 0.0,
            _ => !self.validated,
        }
    }

    /// Bound on ‖DT‖ over the validated ball.
    pub fn contraction(&self) -> Option<f64> {
        self.r_star.map(|r| add_up(add_up(self.z0, self.z1), mul_up(self.z2, r)))
    }

    fn failed(mode: CertificateMode, cont: ContinuationMode, cfg: &ValidationConfig, stage: String, diag: Diagnostics) -> Self {
        Self {
            mode,
            continuation: cont,
            y: f64::MAX,
            z0: f64::MAX,
            z1: f64::MAX,
            z2: f64::MAX,
            r_max: cfg.r_max,
            r_star: None,
            negativity_interval: None,
            validated: false,
            hopf_crossing: false,
            injective: false,
            stage_failures: vec![stage],
            diagnostics: diag,
            config_echo: cfg.echo.clone(),
        }
    }
}

fn remark(mode: ContinuationMode) -> String {
    match mode {
        ContinuationMode::ParameterInA => "parameter continuation in a: a'(s) != 0 holds by construction".into(),
        ContinuationMode::PseudoArclength => "pseudo-arclength continuation: a'(s) != 0 is not established".into(),
    }
}

fn base_diag(t: Truncation, scan: ScanRadii, mode: ContinuationMode, seg: Option<usize>) -> Diagnostics {
    Diagnostics { scan_m: scan.m, scan_n: scan.n, m: t.m, n: t.n, segment: seg, remark: remark(mode), ..Default::default() }
}

fn finish(mode: CertificateMode, cont: ContinuationMode, b: Bounds, injective: bool, tails_ok: bool, crossing: bool, cfg: &ValidationConfig, diag: Diagnostics) -> Certificate {
    let sol = solve_radii(b.y, b.z0, b.z1, b.z2, cfg.r_max);
    let mut stage = Vec::new();
    if let Some(f) = sol.failure {
        stage.push(format!("radii: {f}"));
    }
    if !tails_ok {
        stage.push("injectivity: tail denominator may vanish".into());
    }
    if b.z0 >= 1.0 {
        stage.push("injectivity: Z0 >= 1".into());
    }
    for c in &diag.condition {
        if *c > COND_WARN {
            stage.push(format!("warning: condition estimate {c:.3e}"));
        }
    }
    let hopf = sol.validated && injective && cont == ContinuationMode::ParameterInA && crossing;
    Certificate {
        mode,
        continuation: cont,
        y: b.y,
        z0: b.z0,
        z1: b.z1,
        z2: b.z2,
        r_max: cfg.r_max,
        r_star: sol.r_star,
        negativity_interval: sol.negativity,
        validated: sol.validated && injective,
        hopf_crossing: hopf,
        injective,
        stage_failures: stage,
        diagnostics: diag,
        config_echo: cfg.echo.clone(),
    }
}

/// Validate one anchor point.
pub fn validate_single(anc: &AnchorPoint<Complex64>, mode: ContinuationMode, t: Truncation, cfg: &ValidationConfig) -> Certificate {
    let scan = cfg.scan.unwrap_or_else(|| ScanRadii::default_for(t));
    let mut diag = base_diag(t, scan, mode, None);
    diag.amplitudes = vec![anc.xhat.a.re];
    let run = || -> Result<(Bounds, Endpoint), ValidationError> {
        let ep = Endpoint::new(anc.map(ComplexInterval::point), t, cfg)?;
        Ok((single_bounds(&ep, cfg)?, ep))
    };
    match run() {
        Ok((b, ep)) => {
            diag.condition = vec![ep.cond];
            let tails = tails_nonvanishing(&ep, &ep);
            let inj = tails && b.z0 < 1.0;
            finish(CertificateMode::Single, mode, b, inj, tails, false, cfg, diag)
        }
        Err(e) => Certificate::failed(CertificateMode::Single, mode, cfg, format!("bounds: {e}"), diag),
    }
}

/// Endpoint data carried between consecutive segments.
pub struct EndpointCache {
    pub ep: Endpoint,
    pub z1: Z1Parts,
}

impl EndpointCache {
    pub fn new(anchors: &ProblemAnchors, sigma: usize, t: Truncation, cfg: &ValidationConfig) -> Result<Self, ValidationError> {
        let ep = Endpoint::new(anchors.endpoint(sigma), t, cfg)?;
        let z1 = z1_parts(&ep, cfg)?;
        Ok(Self { ep, z1 })
    }
}

fn amplitude_sign_change(a0: f64, a1: f64) -> bool {
    (ScalarInterval::point(a0) * ScalarInterval::point(a1)).is_negative()
}

/// Segment validation with precomputed endpoint data.
pub fn validate_segment_with(
    anchors: &ProblemAnchors,
    c0: &EndpointCache,
    c1: &EndpointCache,
    cfg: &ValidationConfig,
    index: Option<usize>,
) -> Certificate {
    let t = c0.ep.t;
    let mode = anchors.mode;
    let mut diag = base_diag(t, c0.ep.scan, mode, index);
    diag.amplitudes = vec![anchors.xhat0.a.re, anchors.xhat1.a.re];
    diag.condition = vec![c0.ep.cond, c1.ep.cond];
    let run = || -> Result<Bounds, ValidationError> {
        let seg = SegmentData::new(anchors, &c0.ep, &c1.ep, cfg)?;
        bounds::segment_bounds(&seg, &c0.z1, &c1.z1, cfg)
    };
    match run() {
        Ok(b) => {
            let tails = tails_nonvanishing(&c0.ep, &c1.ep);
            let inj = tails && b.z0 < 1.0;
            let crossing = amplitude_sign_change(anchors.xhat0.a.re, anchors.xhat1.a.re);
            finish(CertificateMode::Segment, mode, b, inj, tails, crossing, cfg, diag)
        }
        Err(e) => Certificate::failed(CertificateMode::Segment, mode, cfg, format!("bounds: {e}"), diag),
    }
}

pub fn validate_segment(seg: &BranchSegment, mode: ContinuationMode, t: Truncation, cfg: &ValidationConfig) -> Certificate {
    let anchors = seg.anchors(mode);
    let scan = cfg.scan.unwrap_or_else(|| ScanRadii::default_for(t));
    let caches = EndpointCache::new(&anchors, 0, t, cfg).and_then(|c0| Ok((c0, EndpointCache::new(&anchors, 1, t, cfg)?)));
    match caches {
        Ok((c0, c1)) => validate_segment_with(&anchors, &c0, &c1, cfg, None),
        Err(e) => Certificate::failed(CertificateMode::Segment, mode, cfg, format!("endpoint: {e}"), base_diag(t, scan, mode, None)),
    }
}

/// Validate every segment of a run in order, reusing the shared endpoint
/// between neighbours. `progress` is called after each certificate.
pub fn validate_run(run: &BranchRun, cfg: &ValidationConfig, mut progress: impl FnMut(usize, &Certificate)) -> Vec<Certificate> {
    let t = run.truncation;
    let scan = cfg.scan.unwrap_or_else(|| ScanRadii::default_for(t));
    let mut out = Vec::with_capacity(run.segments.len());
    let mut prev: Option<EndpointCache> = None;
    for (i, seg) in run.segments.iter().enumerate() {
        let anchors = seg.anchors(run.mode);
        // Neighbouring segments share an anchor only if the stored data agree.
        let reuse = i > 0 && run.segments[i - 1].xhat1 == seg.xhat0 && run.segments[i - 1].q1 == seg.q0 && run.segments[i - 1].c1 == seg.c0;
        let c0 = match prev.take().filter(|_| reuse) {
            Some(c) => Ok(c),
            None => EndpointCache::new(&anchors, 0, t, cfg),
        };
        let c1 = EndpointCache::new(&anchors, 1, t, cfg);
        let cert = match (&c0, &c1) {
            (Ok(a), Ok(b)) => validate_segment_with(&anchors, a, b, cfg, Some(i)),
            (Err(e), _) | (_, Err(e)) => {
                Certificate::failed(CertificateMode::Segment, run.mode, cfg, format!("endpoint: {e}"), base_diag(t, scan, run.mode, Some(i)))
            }
        };
        progress(i, &cert);
        out.push(cert);
        prev = c1.ok();
    }
    out
}

/// Longest run of consecutive validated segments, as a half-open range.
pub fn longest_validated_chain(certs: &[Certificate]) -> std::ops::Range<usize> {
    let mut best = 0..0;
    let mut start = 0;
    for (i, c) in certs.iter().enumerate() {
        if !c.validated {
            start = i + 1;
        } else if i + 1 - start > best.len() {
            best = start..i + 1;
        }
    }
    best
}
