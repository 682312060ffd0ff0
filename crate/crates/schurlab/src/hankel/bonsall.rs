//! Finite-window versions of the two Bonsall-type trace-class tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::C64;
use crate::symbolkit::iterated_derivative;
use crate::verdict::{dyadic_sums, TailPolicy, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BonsallMode {
    /// Σ |a_{n-1} - a_n| n log n < ∞ for a sequence tending to 0.
    Weighted,
    /// Nonnegative, decreasing, convex real sequences: S₁ iff Σ a_n < ∞.
    Monotone,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BonsallReport {
    pub satisfied: bool,
    /// Partial sum of the tested series over the window.
    pub statistic: f64,
    /// MONOTONE: whether 𝔡₁^m a ≥ 0 for m = 0, 1, 2 on the window.
    pub hypotheses_hold: bool,
    pub tail: Verdict,
}

pub fn bonsall_test(a: &[C64], mode: BonsallMode, k: usize) -> Result<BonsallReport> {
    let tail_policy = TailPolicy::default().with_negligible(1e-12);
    match mode {
        BonsallMode::Weighted => {
            if a.len() < k + 1 {
                return Err(Error::TailUndefined { index: k, len: a.len() });
            }
            let mut terms = vec![0.0; k + 1];
            for n in 2..=k {
                let nf = n as f64;
                terms[n] = (a[n - 1] - a[n]).norm() * nf * nf.ln();
            }
            let statistic = terms.iter().sum();
            let tail = tail_policy.classify(&dyadic_sums(&terms));
            let vanishing = a[k].norm() <= 1e-3 * a.iter().take(k + 1).map(|z| z.norm()).fold(0.0, f64::max) || a[k].norm() < 1e-12;
            Ok(BonsallReport {
                satisfied: tail == Verdict::Convergent && vanishing,
                statistic,
                hypotheses_hold: vanishing,
                tail,
            })
        }
        BonsallMode::Monotone => {
            if a.iter().any(|z| z.im != 0.0) {
                return Err(Error::NotReal);
            }
            if a.len() < k + 2 {
                return Err(Error::TailUndefined { index: k + 1, len: a.len() });
            }
            let re: Vec<f64> = a[..k + 2].iter().map(|z| z.re).collect();
            let scale = re.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let slack = 1e-14 * scale;
            let hypotheses_hold = (0..=2).all(|m| {
                let d = iterated_derivative(&re, 1, m);
                d.iter().take(k + 1 - m.min(k)).all(|&v| v >= -slack)
            });
            let terms: Vec<f64> = re[..=k].to_vec();
            let statistic = terms.iter().sum();
            let tail = tail_policy.classify(&dyadic_sums(&terms));
            Ok(BonsallReport {
                satisfied: hypotheses_hold && tail == Verdict::Convergent,
                statistic,
                hypotheses_hold,
                tail,
            })
        }
    }
}
