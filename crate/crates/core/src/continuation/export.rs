//! Branch export: CSV summary and JSON anchor dumps.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{BranchRun, BranchSegment};
use crate::sequence::io::{SeqJsonError, XVectorJson};
use crate::sequence::{Truncation, Weights, XVector};
use crate::system::ContinuationMode;

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Seq(#[from] SeqJsonError),
}

#[derive(Serialize)]
struct CsvRow {
    segment: usize,
    s_endpoint: u8,
    lambda1: f64,
    lambda2: f64,
    a: f64,
    norm_y: f64,
    norm_z: f64,
}

/// One row per segment endpoint: (segment, s-endpoint, λ₁, λ₂, a, ‖y‖, ‖z‖).
pub fn write_branch_csv(run: &BranchRun, w: &Weights, path: &Path) -> Result<(), ExportError> {
    let mut wr = csv::Writer::from_path(path)?;
    for (i, seg) in run.segments.iter().enumerate() {
        for (s, x) in [(0u8, &seg.xhat0), (1, &seg.xhat1)] {
            wr.serialize(CsvRow {
                segment: i,
                s_endpoint: s,
                lambda1: x.lambda1.re,
                lambda2: x.lambda2.re,
                a: x.a.re,
                norm_y: x.y.norm(w),
                norm_z: x.z.norm(w),
            })?;
        }
    }
    wr.flush()?;
    Ok(())
}

pub fn write_anchor_json(x: &XVector<Complex64>, w: &Weights, path: &Path) -> Result<(), ExportError> {
    fs::write(path, serde_json::to_string_pretty(&XVectorJson::from_x(x, w))?)?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentJson {
    pub xhat0: XVectorJson,
    pub xhat1: XVectorJson,
    pub q0: XVectorJson,
    pub q1: XVectorJson,
    pub c0: [f64; 2],
    pub c1: [f64; 2],
    pub residual0: f64,
    pub residual1: f64,
    pub step: f64,
}

/// Complete run in a form that reloads bitwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunJson {
    pub mode: ContinuationMode,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub nu1: f64,
    pub nu2: f64,
    pub segments: Vec<SegmentJson>,
}

impl RunJson {
    pub fn from_run(run: &BranchRun, w: &Weights) -> Self {
        let c = |z: Complex64| [z.re, z.im];
        let segments = run
            .segments
            .iter()
            .map(|s| SegmentJson {
                xhat0: XVectorJson::from_x(&s.xhat0, w),
                xhat1: XVectorJson::from_x(&s.xhat1, w),
                q0: XVectorJson::from_x(&s.q0, w),
                q1: XVectorJson::from_x(&s.q1, w),
                c0: c(s.c0),
                c1: c(s.c1),
                residual0: s.residual0,
                residual1: s.residual1,
                step: s.step,
            })
            .collect();
        Self { mode: run.mode, m: run.truncation.m, n: run.truncation.n, nu1: w.nu1, nu2: w.nu2, segments }
    }

    pub fn to_run(&self) -> Result<BranchRun, SeqJsonError> {
        let t = Truncation::new(self.m, self.n);
        let c = |v: [f64; 2]| Complex64::new(v[0], v[1]);
        let x = |j: &XVectorJson| -> Result<XVector<Complex64>, SeqJsonError> { Ok(j.to_x()?.resized(t)) };
        let segments = self
            .segments
            .iter()
            .map(|s| {
                Ok(BranchSegment {
                    xhat0: x(&s.xhat0)?,
                    xhat1: x(&s.xhat1)?,
                    q0: x(&s.q0)?,
                    q1: x(&s.q1)?,
                    c0: c(s.c0),
                    c1: c(s.c1),
                    residual0: s.residual0,
                    residual1: s.residual1,
                    step: s.step,
                })
            })
            .collect::<Result<_, SeqJsonError>>()?;
        Ok(BranchRun { mode: self.mode, truncation: t, segments })
    }

    pub fn weights(&self) -> Weights {
        Weights { nu1: self.nu1, nu2: self.nu2 }
    }
}

pub fn write_run_json(run: &BranchRun, w: &Weights, path: &Path) -> Result<(), ExportError> {
    fs::write(path, serde_json::to_string(&RunJson::from_run(run, w))?)?;
    Ok(())
}

pub fn read_run_json(path: &Path) -> Result<RunJson, ExportError> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}
