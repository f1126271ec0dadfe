//! Run configuration: a TOML file with sections, overridable from the
//! command line, echoed into every certificate.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::continuation::{a_grid, NewtonOptions, StepConfig, LAMBDA2_MIN, STEADY_STEP};
use crate::par::Execution;
use crate::sequence::{Truncation, Weights};
use crate::system::ContinuationMode;
use crate::tail::ScanRadii;
use crate::validator::ValidationConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TruncationSection {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
}

impl Default for TruncationSection {
    fn default() -> Self {
        Self { m: 10, n: 16 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeightsSection {
    pub nu1: f64,
    pub nu2: f64,
}

impl Default for WeightsSection {
    fn default() -> Self {
        Self { nu1: 1.05, nu2: 1.05 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SteadySection {
    /// Lower end of the λ₂ sweep along the steady branch.
    pub lambda2_min: f64,
    /// Largest arclength step on the steady branch.
    pub max_step: f64,
}

impl Default for SteadySection {
    fn default() -> Self {
        Self { lambda2_min: LAMBDA2_MIN, max_step: STEADY_STEP }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContinuationSection {
    pub mode: ContinuationMode,
    pub a_from: f64,
    pub a_to: f64,
    pub a_step: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
}

impl Default for ContinuationSection {
    fn default() -> Self {
        let n = NewtonOptions::default();
        Self { mode: ContinuationMode::ParameterInA, a_from: -0.0125, a_to: 0.0125, a_step: 0.005, newton_tol: n.tol, newton_max_iter: n.max_iter }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidationSection {
    #[serde(rename = "R")]
    pub r_max: f64,
    /// Tail scan radii; 0 selects the default for the truncation.
    pub scan_m: usize,
    pub scan_n: usize,
    /// Sampled contraction checks per certificate (0 disables).
    pub spot_samples: usize,
}

impl Default for ValidationSection {
    fn default() -> Self {
        Self { r_max: 1e-4, scan_m: 0, scan_n: 0, spot_samples: 0 }
    }
}

/// Fallback configurations tried in order when the configured one does not
/// validate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchSection {
    pub enabled: bool,
    pub truncations: Vec<[usize; 2]>,
    pub nu: Vec<f64>,
    /// Step halvings tried per configuration. Each halving also halves the
    /// a-range, so the segment count is unchanged.
    pub refine: usize,
}

impl Default for SearchSection {
    fn default() -> Self {
        Self { enabled: true, truncations: vec![[10, 16], [12, 20], [14, 22], [16, 24]], nu: vec![1.05, 1.02, 1.1], refine: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub out: PathBuf,
    /// Worker threads; 0 uses every core.
    pub threads: usize,
    pub seed: u64,
    pub sequential: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        Self { out: PathBuf::from("out"), threads: 0, seed: 0, sequential: false }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub truncation: TruncationSection,
    pub weights: WeightsSection,
    pub steady: SteadySection,
    pub continuation: ContinuationSection,
    pub validation: ValidationSection,
    pub search: SearchSection,
    pub run: RunSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_owned(), source })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        let t = &self.truncation;
        if t.m < 1 || t.n < 1 {
            return bad(format!("truncation M={}, N={} must be at least 1", t.m, t.n));
        }
        let w = &self.weights;
        if !(w.nu1 >= 1.0 && w.nu2 >= 1.0) {
            return bad(format!("weights nu1={}, nu2={} must be at least 1", w.nu1, w.nu2));
        }
        let r = self.validation.r_max;
        if !(r > 0.0 && r.is_finite()) {
            return bad(format!("R = {r} must be positive"));
        }
        let s = &self.steady;
        if !(s.lambda2_min > 0.0 && s.max_step > 0.0) {
            return bad("steady sweep needs lambda2_min > 0 and max_step > 0".into());
        }
        let c = &self.continuation;
        if !(c.newton_tol > 0.0) || c.newton_max_iter == 0 {
            return bad("Newton needs newton_tol > 0 and newton_max_iter > 0".into());
        }
        a_grid(&self.step_config()).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let sr = &self.search;
        if sr.truncations.iter().any(|[m, n]| *m < 1 || *n < 1) || sr.nu.iter().any(|v| !(*v >= 1.0)) {
            return bad("search candidates need M, N >= 1 and nu >= 1".into());
        }
        Ok(())
    }

    pub fn truncation(&self) -> Truncation {
        Truncation::new(self.truncation.m, self.truncation.n)
    }

    pub fn weights(&self) -> Weights {
        Weights::new(self.weights.nu1, self.weights.nu2)
    }

    pub fn newton(&self) -> NewtonOptions {
        NewtonOptions { tol: self.continuation.newton_tol, max_iter: self.continuation.newton_max_iter }
    }

    pub fn step_config(&self) -> StepConfig {
        let c = &self.continuation;
        StepConfig { a_from: c.a_from, a_to: c.a_to, a_step: c.a_step, mode: c.mode, newton: self.newton() }
    }

    pub fn segment_count(&self) -> usize {
        a_grid(&self.step_config()).map_or(0, |g| g.len() - 1)
    }

    pub fn exec(&self) -> Execution {
        if self.run.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }

    pub fn validation_config(&self) -> ValidationConfig {
        let v = &self.validation;
        let scan = (v.scan_m > 0 && v.scan_n > 0).then_some(ScanRadii { m: v.scan_m, n: v.scan_n });
        ValidationConfig {
            r_max: v.r_max,
            weights: self.weights(),
            scan,
            exec: self.exec(),
            echo: serde_json::to_value(self).expect("config serializes"),
        }
    }

    /// The same run with the a-step and a-range scaled by 2^-halvings.
    pub fn refined(&self, halvings: usize) -> RunConfig {
        let f = 0.5f64.powi(halvings as i32);
        let mut c = self.clone();
        c.continuation.a_from *= f;
        c.continuation.a_to *= f;
        c.continuation.a_step *= f;
        c
    }

    /// Candidate configurations: this one first, then the search grid.
    pub fn candidates(&self) -> Vec<RunConfig> {
        let mut out = vec![self.clone()];
        if !self.search.enabled {
            return out;
        }
        for [m, n] in &self.search.truncations {
            for nu in &self.search.nu {
                let mut c = self.clone();
                c.truncation = TruncationSection { m: *m, n: *n };
                c.weights = WeightsSection { nu1: *nu, nu2: *nu };
                if !out.iter().any(|o| o.truncation == c.truncation && o.weights == c.weights) {
                    out.push(c);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = RunConfig::default();
        c.validate().unwrap();
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
        assert_eq!(c.segment_count(), 5);
    }

    #[test]
    fn partial_file_fills_defaults() {
        let c = RunConfig::from_toml("[truncation]\nM = 12\nN = 20\n[validation]\nR = 2e-4\n").unwrap();
        assert_eq!((c.truncation.m, c.truncation.n), (12, 20));
        assert_eq!(c.validation.r_max, 2e-4);
        assert_eq!(c.weights, WeightsSection::default());
    }

    #[test]
    fn malformed_and_invalid_rejected() {
        assert!(matches!(RunConfig::from_toml("[truncation\nM = 1"), Err(ConfigError::Parse(_))));
        assert!(matches!(RunConfig::from_toml("[truncation]\nK = 3\n"), Err(ConfigError::Parse(_))));
        let mut c = RunConfig::default();
        c.weights.nu1 = 0.9;
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.validation.r_max = 0.0;
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.truncation.m = 0;
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.continuation.a_to = c.continuation.a_from;
        assert!(c.validate().is_err());
    }

    #[test]
    fn candidates_start_with_configured_and_skip_duplicates() {
        let c = RunConfig::default();
        let cands = c.candidates();
        assert_eq!(cands[0], c);
        assert_eq!(cands.len(), 12);
        let mut off = c.clone();
        off.search.enabled = false;
        assert_eq!(off.candidates().len(), 1);
    }

    #[test]
    fn refinement_keeps_segment_count() {
        let c = RunConfig::default();
        let r = c.refined(2);
        assert_eq!(r.segment_count(), c.segment_count());
        assert_eq!(r.continuation.a_step, c.continuation.a_step / 4.0);
    }

    #[test]
    fn echo_contains_resolved_values() {
        let v = RunConfig::default().validation_config();
        assert_eq!(v.echo["truncation"]["M"], 10);
        assert_eq!(v.echo["validation"]["R"], 1e-4);
    }
}
