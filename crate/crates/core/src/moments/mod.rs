//! Moment sequences, the moment functional, Hankel positivity on a support
//! set, one-step extensions and the Cauchy-radius determinacy diagnostic.

mod determinacy;
mod extension;
mod feasibility;
mod polynomial;

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub use determinacy::{determinacy_radius, DeterminacyReport, DeterminacyVerdict, RATIO_THRESHOLD};
pub use extension::{extension_interval, ExtensionInterval};
pub use feasibility::{
    brute_force_nonneg_oracle, check_s0_nonneg, replay_certificate, BlockKind, BlockSummary,
    FeasibilityStatus, FeasibilityVerdict, OracleConfig, OracleVerdict, SupportSet, DEFAULT_TOL,
};
pub use polynomial::Polynomial;

/// Beyond this order Hankel blocks are too ill-conditioned to trust in f64.
pub const CONDITIONING_LIMIT: usize = 30;

/// A finite prefix (m₀, …, m_N) of a real moment sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence {
    values: Vec<f64>,
}

impl MomentSequence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSequence("sequence is empty".into()));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidSequence(format!("m_{i} = {v} is not finite")));
        }
        if values[0] <= 0.0 {
            return Err(Error::InvalidSequence(format!(
                "m_0 = {} must be positive",
                values[0]
            )));
        }
        Ok(Self { values })
    }

    /// Highest available order N.
    pub fn order(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mass(&self) -> f64 {
        self.values[0]
    }

    pub fn get(&self, n: usize) -> Option<f64> {
        self.values.get(n).copied()
    }

    /// Appends m_{N+1}.
    pub fn extended(&self, next: f64) -> Result<Self> {
        let mut values = self.values.clone();
        values.push(next);
        Self::new(values)
    }

    pub fn truncated(&self, order: usize) -> Result<Self> {
        if order > self.order() {
            return Err(Error::InsufficientMoments {
                needed: order,
                available: self.order(),
            });
        }
        Self::new(self.values[..=order].to_vec())
    }

    /// Moments of the measure pushed forward by u ↦ u − c.
    pub fn translated(&self, c: f64) -> Vec<f64> {
        translate_moments(&self.values, c)
    }
}

impl fmt::Display for MomentSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

/// m'_k = Σ_j C(k, j) (−c)^{k−j} m_j.
pub(crate) fn translate_moments(m: &[f64], c: f64) -> Vec<f64> {
    if c == 0.0 {
        return m.to_vec();
    }
    let mut binom = vec![1.0f64];
    let mut out = Vec::with_capacity(m.len());
    for k in 0..m.len() {
        if k > 0 {
            let mut next = vec![1.0; k + 1];
            for j in 1..k {
                next[j] = binom[j - 1] + binom[j];
            }
            binom = next;
        }
        let s: f64 = (0..=k)
            .map(|j| binom[j] * (-c).powi((k - j) as i32) * m[j])
            .sum();
        out.push(s);
    }
    out
}

/// μ(P) = Σ x_n m_n.
pub fn moment_functional(seq: &MomentSequence, p: &Polynomial) -> Result<f64> {
    let Some(degree) = p.degree() else {
        return Ok(0.0);
    };
    if degree > seq.order() {
        return Err(Error::DegreeOverflow {
            degree,
            available: seq.order(),
        });
    }
    Ok(p.coeffs().iter().zip(seq.values()).map(|(x, m)| x * m).sum())
}

/// Symmetric matrix with (i, j) entry m_{i+j+shift}.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelMatrix {
    pub shift: usize,
    pub matrix: DMatrix<f64>,
}

impl HankelMatrix {
    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigen(&self.matrix).0
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.determinant()
    }
}

pub fn hankel(seq: &MomentSequence, shift: usize, size: usize) -> Result<HankelMatrix> {
    if size == 0 {
        return Err(Error::Invalid("Hankel size must be positive".into()));
    }
    let needed = 2 * (size - 1) + shift;
    if needed > seq.order() {
        return Err(Error::InsufficientMoments {
            needed,
            available: seq.order(),
        });
    }
    let m = seq.values();
    Ok(HankelMatrix {
        shift,
        matrix: DMatrix::from_fn(size, size, |i, j| m[i + j + shift]),
    })
}

/// Smallest eigenvalue, its unit eigenvector and the spectral norm.
pub(crate) fn min_eigen(b: &DMatrix<f64>) -> (f64, Vec<f64>, f64) {
    let eig = b.clone().symmetric_eigen();
    let (k, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty block");
    let norm = eig.eigenvalues.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    (lambda, eig.eigenvectors.column(k).iter().copied().collect(), norm)
}

/// |u|^n ≤ ε·u^{2r}.
pub fn tail_dominated(u: f64, n: u32, r: u32, eps: f64) -> bool {
    u.abs().powi(n as i32) <= eps * u.powi(2 * r as i32)
}

/// Smallest integer K with 1/K ≤ ε; for 2r − n − 1 ≥ 1 every |u| ≥ K
/// satisfies [`tail_dominated`].
pub fn domination_radius(eps: f64) -> f64 {
    (1.0 / eps).ceil().max(1.0)
}
