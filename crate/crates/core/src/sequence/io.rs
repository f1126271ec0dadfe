//! JSON form of sequences: midpoints only, inflated by `eps` on load.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Seq1D, Seq2D, Truncation, Weights, XVector};
use crate::interval::ComplexInterval;

/// `{M, N, nu1, nu2, re[][], im[][]}`; a 1D sequence is stored with `M = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeqJson {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub nu1: f64,
    pub nu2: f64,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

#[derive(Debug, thiserror::Error)]
pub enum SeqJsonError {
    #[error("array shape does not match M={m}, N={n}")]
    Shape { m: usize, n: usize },
    #[error("non-finite coefficient")]
    NonFinite,
}

impl SeqJson {
    pub fn from_seq2(z: &Seq2D<Complex64>, w: &Weights) -> Self {
        let rows = |f: fn(&Complex64) -> f64| {
            (-(z.m() as i64)..=z.m() as i64)
                .map(|j| (-(z.n() as i64)..=z.n() as i64).map(|k| f(&z.get(j, k))).collect())
                .collect()
        };
        Self { m: z.m(), n: z.n(), nu1: w.nu1, nu2: w.nu2, re: rows(|c| c.re), im: rows(|c| c.im) }
    }

    pub fn from_seq1(y: &Seq1D<Complex64>, w: &Weights) -> Self {
        Self::from_seq2(&super::embed_ell(y), w)
    }

    fn check(&self) -> Result<(), SeqJsonError> {
        let shape_ok = |a: &Vec<Vec<f64>>| a.len() == 2 * self.m + 1 && a.iter().all(|r| r.len() == 2 * self.n + 1);
        if !shape_ok(&self.re) || !shape_ok(&self.im) {
            return Err(SeqJsonError::Shape { m: self.m, n: self.n });
        }
        if self.re.iter().chain(&self.im).flatten().any(|v| !v.is_finite()) {
            return Err(SeqJsonError::NonFinite);
        }
        Ok(())
    }

    pub fn to_seq2(&self) -> Result<Seq2D<Complex64>, SeqJsonError> {
        self.check()?;
        let (m, n) = (self.m as i64, self.n as i64);
        Ok(Seq2D::from_fn(self.m, self.n, |j, k| {
            Complex64::new(self.re[(j + m) as usize][(k + n) as usize], self.im[(j + m) as usize][(k + n) as usize])
        }))
    }

    pub fn to_seq1(&self) -> Result<Seq1D<Complex64>, SeqJsonError> {
        let z = self.to_seq2()?;
        Ok(z.row(0))
    }

    /// Interval coefficients: each midpoint widened by `eps` in both parts.
    pub fn to_interval_seq2(&self, eps: f64) -> Result<Seq2D<ComplexInterval>, SeqJsonError> {
        Ok(self.to_seq2()?.map(|c| ComplexInterval::inflate(c, eps)))
    }

    pub fn weights(&self) -> Weights {
        Weights { nu1: self.nu1, nu2: self.nu2 }
    }
}

/// Anchor dump: scalars, both sequences, and an optional continuation covector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XVectorJson {
    pub lambda1: [f64; 2],
    pub lambda2: [f64; 2],
    pub a: [f64; 2],
    pub y: SeqJson,
    pub z: SeqJson,
}

impl XVectorJson {
    pub fn from_x(x: &XVector<Complex64>, w: &Weights) -> Self {
        let c = |z: Complex64| [z.re, z.im];
        Self {
            lambda1: c(x.lambda1),
            lambda2: c(x.lambda2),
            a: c(x.a),
            y: SeqJson::from_seq1(&x.y, w),
            z: SeqJson::from_seq2(&x.z, w),
        }
    }

    pub fn to_x(&self) -> Result<XVector<Complex64>, SeqJsonError> {
        let c = |v: [f64; 2]| Complex64::new(v[0], v[1]);
        let x = XVector { lambda1: c(self.lambda1), lambda2: c(self.lambda2), a: c(self.a), y: self.y.to_seq1()?, z: self.z.to_seq2()? };
        Ok(x.resized(Truncation::new(self.z.m, self.y.n.max(self.z.n))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let w = Weights::new(1.05, 1.1);
        let z = Seq2D::from_fn(2, 3, |j, k| Complex64::new(j as f64 * 0.5, k as f64 / 3.0));
        let js = SeqJson::from_seq2(&z, &w);
        let text = serde_json::to_string(&js).unwrap();
        let back: SeqJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_seq2().unwrap(), z);
        assert_eq!(back.weights(), w);
        let iv = back.to_interval_seq2(1e-12).unwrap();
        assert!(iv.iter().all(|(j, k, c)| c.contains(z.get(j, k))));
    }

    #[test]
    fn bad_shape_rejected() {
        let js = SeqJson { m: 1, n: 1, nu1: 1.0, nu2: 1.0, re: vec![vec![0.0; 3]; 2], im: vec![vec![0.0; 3]; 3] };
        assert!(js.to_seq2().is_err());
    }
}
