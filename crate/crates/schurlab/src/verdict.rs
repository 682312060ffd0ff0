//! Finite-data convergence policy shared by the S₁ estimator, the Besov
//! block sums, and the Bonsall tail statistics.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Convergent,
    Divergent,
    Undecided,
}

impl Verdict {
    pub fn is_decided(self) -> bool {
        self != Verdict::Undecided
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Convergent => "CONVERGENT",
            Verdict::Divergent => "DIVERGENT",
            Verdict::Undecided => "UNDECIDED",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Thresholds applied to a sequence of nonnegative dyadic summands
/// (increments of partial sums over doubling windows).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPolicy {
    /// Summands below this are treated as already converged.
    pub negligible: f64,
    /// Successive summand ratios at or below this count as geometric decay.
    pub decay_ratio: f64,
    /// Successive summand ratios at or above this count as non-decay.
    pub stall_ratio: f64,
    /// Number of trailing summands inspected.
    pub window: usize,
}

impl Default for TailPolicy {
    fn default() -> Self {
        TailPolicy { negligible: 1e-9, decay_ratio: 0.85, stall_ratio: 0.97, window: 3 }
    }
}

impl TailPolicy {
    pub fn with_negligible(mut self, negligible: f64) -> Self {
        self.negligible = negligible;
        self
    }

    /// Classifies the trailing behaviour of dyadic summands.
    ///
    /// Summands in `terms` are expected to be nonnegative contributions
    /// of consecutive doubling windows to a series.
    pub fn classify(&self, terms: &[f64]) -> Verdict {
        if terms.len() < self.window.max(2) {
            return Verdict::Undecided;
        }
        let tail = &terms[terms.len() - self.window..];
        if tail.iter().all(|t| t.abs() <= self.negligible) {
            return Verdict::Convergent;
        }
        let last = *tail.last().unwrap();
        if last.abs() <= self.negligible {
            // Vanishing after earlier mass; the partial sums have settled.
            return Verdict::Convergent;
        }
        let ratios: Vec<f64> = tail
            .windows(2)
            .map(|w| if w[0].abs() > 0.0 { w[1].abs() / w[0].abs() } else { f64::INFINITY })
            .collect();
        if ratios.iter().all(|&r| r <= self.decay_ratio) {
            Verdict::Convergent
        } else if ratios.iter().all(|&r| r >= self.stall_ratio) {
            Verdict::Divergent
        } else {
            Verdict::Undecided
        }
    }

    /// Ratio of the last two summands, when defined.
    pub fn last_ratio(terms: &[f64]) -> Option<f64> {
        if terms.len() < 2 {
            return None;
        }
        let a = terms[terms.len() - 2].abs();
        let b = terms[terms.len() - 1].abs();
        (a > 0.0).then(|| b / a)
    }
}

/// Sums `values[i]` over dyadic windows [2^k, 2^{k+1}) (window 0 is {0}).
pub fn dyadic_sums(values: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    if values.is_empty() {
        return out;
    }
    out.push(values[0]);
    let mut lo = 1usize;
    while lo < values.len() {
        let hi = (2 * lo).min(values.len());
        if hi < 2 * lo {
            break;
        }
        out.push(values[lo..hi].iter().sum());
        lo = hi;
    }
    out
}
