use std::fmt;

use super::MomentSequence;
use crate::error::{Error, Result};

/// Tail-window minimum of r_n that counts as a positive radius.
pub const RATIO_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeterminacyVerdict {
    /// The series Σ m_n xⁿ/n! has a positive radius on the available window:
    /// the moments determine the measure.
    CriterionSatisfied,
    /// The sufficient criterion is not met on this prefix. Says nothing about
    /// indeterminacy.
    Inconclusive,
}

impl fmt::Display for DeterminacyVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DeterminacyVerdict::CriterionSatisfied => "criterion_satisfied",
            DeterminacyVerdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeterminacyReport {
    /// (n, |n!/m_n|^{1/n}) for every n ≥ 1 with m_n ≠ 0.
    pub ratios: Vec<(usize, f64)>,
    /// Minimum over the last `window` entries of `ratios`.
    pub window_min: f64,
    pub verdict: DeterminacyVerdict,
}

impl DeterminacyReport {
    pub fn ratio(&self, n: usize) -> Option<f64> {
        self.ratios.iter().find(|(k, _)| *k == n).map(|(_, r)| *r)
    }
}

/// Cauchy-radius diagnostic r_n = |n!/m_n|^{1/n}. Zero moments are skipped.
pub fn determinacy_radius(seq: &MomentSequence, window: usize) -> Result<DeterminacyReport> {
    let order = seq.order();
    if order < 4 {
        return Err(Error::InsufficientMoments {
            needed: 4,
            available: order,
        });
    }
    if window == 0 {
        return Err(Error::Invalid("window must be positive".into()));
    }
    let mut ln_factorial = 0.0;
    let mut ratios = Vec::new();
    for (n, &m) in seq.values().iter().enumerate().skip(1) {
        ln_factorial += (n as f64).ln();
        if m == 0.0 {
            continue;
        }
        let r = ((ln_factorial - m.abs().ln()) / n as f64).exp();
        ratios.push((n, r));
    }
    if ratios.is_empty() {
        return Err(Error::InvalidSequence(
            "all moments beyond m_0 are zero; no ratio to inspect".into(),
        ));
    }
    let start = ratios.len().saturating_sub(window);
    let window_min = ratios[start..]
        .iter()
        .map(|(_, r)| *r)
        .fold(f64::INFINITY, f64::min);
    let verdict = if window_min > RATIO_THRESHOLD {
        DeterminacyVerdict::CriterionSatisfied
    } else {
        DeterminacyVerdict::Inconclusive
    };
    Ok(DeterminacyReport {
        ratios,
        window_min,
        verdict,
    })
}
