//! Norm bounds for diagonal tail operators with rational entries
//! `n(k) / (e·iJ + αK⁴ + βK² + γ)`.
//!
//! A diagonal operator leaves the ℓ¹ weights invariant, so its norm is the
//! supremum of the entry moduli over the tail. That supremum is bounded by an
//! exhaustive interval scan of a finite box followed by an analytic bound on
//! the two unbounded remainders: large |k| (quartic domination) and, for the
//! `iJ` denominators, large |j| with moderate |k|.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interval::round::{add_up, div_up, mul_up, powi_down, powi_up, sub_down};
use crate::interval::{ComplexInterval, ScalarInterval};
use crate::par::Execution;
use crate::sequence::Truncation;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TailError {
    #[error("tail denominator may vanish near index ({j}, {k})")]
    DenominatorMayVanish { j: i64, k: i64 },
    #[error("leading term does not dominate beyond |k| = {k0}; increase the scan radius")]
    NonDominantDenominator { k0: u64 },
    #[error("numerator degree {num} exceeds denominator degree {den}")]
    NumeratorTooLarge { num: usize, den: usize },
}

/// Which tail the symbol acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailSpace {
    /// |k| > N in ℓ¹_{ν₂}.
    Y,
    /// (j,k) outside F[(M,N)] in ℓ¹_{ν₁,ν₂}.
    Z,
}

/// `e·iJ + αK⁴ + βK² + γ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagonalDenominator {
    pub ij: bool,
    pub alpha: ComplexInterval,
    pub beta: ComplexInterval,
    pub gamma: ComplexInterval,
}

impl DiagonalDenominator {
    pub const ONE: Self = Self { ij: false, alpha: ComplexInterval::ZERO, beta: ComplexInterval::ZERO, gamma: ComplexInterval::ONE };

    /// P₁ = λ₂K⁴ − K².
    pub fn p1(lambda2: ComplexInterval) -> Self {
        Self { ij: false, alpha: lambda2, beta: -ComplexInterval::ONE, gamma: ComplexInterval::ZERO }
    }

    /// P₂ = iJ + λ₁λ₂K⁴ − λ₁K².
    pub fn p2(lambda1: ComplexInterval, lambda2: ComplexInterval) -> Self {
        Self { ij: true, alpha: lambda1 * lambda2, beta: -lambda1, gamma: ComplexInterval::ZERO }
    }

    /// `αk⁴ + βk² + γ` without the `iJ` term.
    pub fn poly(&self, k: i64) -> ComplexInterval {
        let k2 = ScalarInterval::point(k as f64).sqr();
        let k4 = k2.sqr();
        self.alpha.scale_interval(k4) + self.beta.scale_interval(k2) + self.gamma
    }

    pub fn eval(&self, j: i64, k: i64) -> ComplexInterval {
        let p = self.poly(k);
        if self.ij {
            p + ComplexInterval::new(ScalarInterval::ZERO, ScalarInterval::point(j as f64))
        } else {
            p
        }
    }

    /// Highest power of K with a possibly nonzero coefficient.
    pub fn degree(&self) -> usize {
        if !self.alpha.is_zero_exact() {
            4
        } else if !self.beta.is_zero_exact() {
            2
        } else {
            0
        }
    }

    fn lead(&self) -> ComplexInterval {
        match self.degree() {
            4 => self.alpha,
            2 => self.beta,
            _ => self.gamma,
        }
    }

    /// Coefficients of the powers below the leading one, as (power, coef).
    fn lower_terms(&self) -> Vec<(usize, ComplexInterval)> {
        let d = self.degree();
        [(2, self.beta), (0, self.gamma)].into_iter().filter(|(p, _)| *p < d).collect()
    }

    /// Hull over two denominators of the same shape (used for s ∈ [0,1]).
    pub fn hull(&self, o: &Self) -> Self {
        assert_eq!(self.ij, o.ij, "cannot hull denominators of different shape");
        Self { ij: self.ij, alpha: self.alpha.hull(&o.alpha), beta: self.beta.hull(&o.beta), gamma: self.gamma.hull(&o.gamma) }
    }
}

trait ExactZero {
    fn is_zero_exact(&self) -> bool;
}

impl ExactZero for ComplexInterval {
    fn is_zero_exact(&self) -> bool {
        *self == ComplexInterval::ZERO
    }
}

/// Diagonal symbol `Σ_p c_p K^p / D(J,K)` acting beyond `threshold`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RationalDiagonalSymbol {
    /// Coefficients of K⁰..K⁴ (signed powers of k).
    pub num: [ComplexInterval; 5],
    pub den: DiagonalDenominator,
    pub threshold: Truncation,
    pub space: TailSpace,
}

/// Extent of the exhaustive scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanRadii {
    pub m: usize,
    pub n: usize,
}

impl ScanRadii {
    /// max(4·M, 128) and max(4·N, 128).
    pub fn default_for(t: Truncation) -> Self {
        Self { m: (4 * t.m).max(128), n: (4 * t.n).max(128) }
    }
}

impl RationalDiagonalSymbol {
    pub fn new(num: [ComplexInterval; 5], den: DiagonalDenominator, threshold: Truncation, space: TailSpace) -> Self {
        Self { num, den, threshold, space }
    }

    /// `1 / D`.
    pub fn recip(den: DiagonalDenominator, threshold: Truncation, space: TailSpace) -> Self {
        let mut num = [ComplexInterval::ZERO; 5];
        num[0] = ComplexInterval::ONE;
        Self { num, den, threshold, space }
    }

    /// `c·K^p / D`.
    pub fn monomial(c: ComplexInterval, p: usize, den: DiagonalDenominator, threshold: Truncation, space: TailSpace) -> Self {
        let mut num = [ComplexInterval::ZERO; 5];
        num[p] = c;
        Self { num, den, threshold, space }
    }

    /// Multiply the numerator by K^p.
    pub fn times_k(&self, p: usize) -> Self {
        let mut num = [ComplexInterval::ZERO; 5];
        for (i, c) in self.num.iter().enumerate() {
            if !c.is_zero_exact() {
                assert!(i + p < 5, "numerator degree above 4");
                num[i + p] = *c;
            }
        }
        Self { num, ..*self }
    }

    pub fn num_degree(&self) -> usize {
        self.num.iter().rposition(|c| !c.is_zero_exact()).unwrap_or(0)
    }

    pub fn in_tail(&self, j: i64, k: i64) -> bool {
        match self.space {
            TailSpace::Y => !self.threshold.contains_y(k),
            TailSpace::Z => !self.threshold.contains_z(j, k),
        }
    }

    pub fn numerator(&self, k: i64) -> ComplexInterval {
        let kk = ScalarInterval::point(k as f64);
        let mut acc = ComplexInterval::ZERO;
        for (p, c) in self.num.iter().enumerate() {
            if !c.is_zero_exact() {
                acc += c.scale_interval(kk.pow_int(p as u32));
            }
        }
        acc
    }

    /// Enclosure of the diagonal entry at (j,k); `j` is ignored on the y tail.
    pub fn entry(&self, j: i64, k: i64) -> Result<ComplexInterval, TailError> {
        let d = self.den.eval(j, k);
        if d.magnitude_lower() <= 0.0 {
            return Err(TailError::DenominatorMayVanish { j, k });
        }
        self.numerator(k).div(&d).map_err(|_| TailError::DenominatorMayVanish { j, k })
    }

    /// Upper bound on |entry(j,k)|.
    fn entry_mag(&self, j: i64, k: i64) -> Result<f64, TailError> {
        let d = self.den.eval(j, k).magnitude_lower();
        if d <= 0.0 {
            return Err(TailError::DenominatorMayVanish { j, k });
        }
        Ok(div_up(self.numerator(k).magnitude_upper(), d))
    }

    /// Sign-dominance test on the real part of the denominator. Applies when
    /// the `iJ` term is absent or vanishes (j = 0).
    fn sign_dominant(&self, j: i64, k: i64) -> bool {
        if self.den.ij && j != 0 {
            return true;
        }
        let lead = self.den.lead().re;
        let re = self.den.poly(k).re;
        (lead.is_positive() && re.is_positive()) || (lead.is_negative() && re.is_negative())
    }

    fn check_index(&self, j: i64, k: i64) -> Result<f64, TailError> {
        if !self.sign_dominant(j, k) {
            return Err(TailError::DenominatorMayVanish { j, k });
        }
        self.entry_mag(j, k)
    }

    /// Bound over |k| ≥ k0 (all j): numerator and denominator divided by k^d.
    fn large_k_bound(&self, k0: u64) -> Result<f64, TailError> {
        let d = self.den.degree();
        let nd = self.num_degree();
        if nd > d {
            return Err(TailError::NumeratorTooLarge { num: nd, den: d });
        }
        let k0f = k0 as f64;
        // Σ |c_p| k0^{p-d}
        let mut num = 0.0;
        for (p, c) in self.num.iter().enumerate() {
            if !c.is_zero_exact() {
                num = add_up(num, div_up(c.magnitude_upper(), powi_down(k0f, (d - p) as u32)));
            }
        }
        let (lead, lower) = if self.den.ij {
            let re = |c: ComplexInterval| ComplexInterval::real(c.re);
            (self.den.lead().re.mig(), self.den.lower_terms().into_iter().map(|(p, c)| (p, re(c))).collect::<Vec<_>>())
        } else {
            (self.den.lead().magnitude_lower(), self.den.lower_terms())
        };
        let mut slack = 0.0;
        for (p, c) in lower {
            slack = add_up(slack, div_up(c.magnitude_upper(), powi_down(k0f, (d - p) as u32)));
        }
        let den = sub_down(lead, slack);
        if den <= 0.0 {
            return Err(TailError::NonDominantDenominator { k0 });
        }
        Ok(div_up(num, den))
    }

    /// Bound over |j| ≥ j0, |k| ≤ n_scan for `iJ` denominators.
    fn large_j_bound(&self, j0: u64, n_scan: usize, exec: Execution) -> Result<f64, TailError> {
        let vals = exec.map_range(2 * n_scan + 1, |i| {
            let k = i as i64 - n_scan as i64;
            let r = self.den.poly(k);
            let from_j = sub_down(j0 as f64, r.im.mag());
            let low = r.re.mig().max(from_j);
            if low <= 0.0 {
                return Err(TailError::DenominatorMayVanish { j: j0 as i64, k });
            }
            Ok(div_up(self.numerator(k).magnitude_upper(), low))
        });
        vals.into_iter().try_fold(0.0f64, |acc, v| v.map(|x| acc.max(x)))
    }

    fn scan(&self, scan: ScanRadii, exec: Execution) -> Result<f64, TailError> {
        let t = self.threshold;
        let n_s = scan.n.max(t.n) as i64;
        match (self.space, self.den.ij) {
            (TailSpace::Y, _) => {
                let ks: Vec<i64> = (t.n as i64 + 1..=n_s).flat_map(|k| [k, -k]).collect();
                let vals = exec.map_slice(&ks, |&k| self.check_index(0, k));
                vals.into_iter().try_fold(0.0f64, |acc, v| v.map(|x| acc.max(x)))
            }
            (TailSpace::Z, false) => {
                // Entries do not depend on j, and every k occurs with |j| > M.
                let ks: Vec<i64> = (-n_s..=n_s).collect();
                let j = t.m as i64 + 1;
                let vals = exec.map_slice(&ks, |&k| self.check_index(j, k));
                vals.into_iter().try_fold(0.0f64, |acc, v| v.map(|x| acc.max(x)))
            }
            (TailSpace::Z, true) => {
                let m_s = scan.m.max(t.m) as i64;
                let rows = exec.map_range((2 * m_s + 1) as usize, |i| {
                    let j = i as i64 - m_s;
                    let mut best = 0.0f64;
                    for k in -n_s..=n_s {
                        if t.contains_z(j, k) {
                            continue;
                        }
                        best = best.max(self.check_index(j, k)?);
                    }
                    Ok(best)
                });
                rows.into_iter().try_fold(0.0f64, |acc, v| v.map(|x| acc.max(x)))
            }
        }
    }
}

/// Upper bound on sup over tail indices of |entry|, i.e. on the norm of the
/// diagonal tail operator.
pub fn tail_norm_bound(sym: &RationalDiagonalSymbol) -> Result<f64, TailError> {
    tail_norm_bound_with(sym, ScanRadii::default_for(sym.threshold), Execution::default())
}

pub fn tail_norm_bound_with(sym: &RationalDiagonalSymbol, scan: ScanRadii, exec: Execution) -> Result<f64, TailError> {
    if sym.num.iter().all(|c| c.is_zero_exact()) {
        return Ok(0.0);
    }
    let n_s = scan.n.max(sym.threshold.n);
    let mut bound = sym.scan(scan, exec)?;
    bound = bound.max(sym.large_k_bound(n_s as u64 + 1)?);
    if sym.space == TailSpace::Z && sym.den.ij {
        let m_s = scan.m.max(sym.threshold.m);
        bound = bound.max(sym.large_j_bound(m_s as u64 + 1, n_s, exec)?);
    }
    Ok(bound)
}

/// True iff the denominator is provably bounded away from zero on the whole
/// tail (scan plus both remainder regions).
pub fn verify_denominator_nonvanishing(sym: &RationalDiagonalSymbol) -> bool {
    let probe = RationalDiagonalSymbol::recip(sym.den, sym.threshold, sym.space);
    tail_norm_bound(&probe).is_ok()
}

/// Lower bound on `k^p` for `k ≥ 0`, exposed for callers building sup bounds.
pub fn kpow_down(k: u64, p: u32) -> f64 {
    powi_down(k as f64, p)
}

/// Upper bound on `k^p` for `k ≥ 0`.
pub fn kpow_up(k: u64, p: u32) -> f64 {
    powi_up(k as f64, p)
}

/// Upper bound on `|c|·x` for nonnegative `x`.
pub fn mag_times(c: ComplexInterval, x: f64) -> f64 {
    mul_up(c.magnitude_upper(), x)
}
