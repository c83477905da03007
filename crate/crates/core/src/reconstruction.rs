//! Atomic representing measures from a feasible moment sequence.
//!
//! The Hankel matrix is factored as H = RᵀR; the recurrence coefficients of
//! the monic orthogonal polynomials follow from the entries of R, and the
//! eigenpairs of the resulting Jacobi matrix give the Gauss quadrature, which
//! reproduces m₀ … m_{2n−1} with n nodes.

use crate::error::{Error, Result};
use crate::measure::{Atom, MeasureRep};
use crate::moments::{check_s0_nonneg, FeasibilityStatus, MomentSequence, SupportSet, CONDITIONING_LIMIT, DEFAULT_TOL};
use crate::tridiag::{max_residual, norm, symmetric_tridiagonal_eigen};

/// Relative Cholesky pivot below which the Hankel matrix is treated as flat.
pub const FLAT_PIVOT_TOL: f64 = 1e-13;

/// Nodes this close to S₀ are clamped onto it; farther ones are an error.
pub const NODE_CLAMP_TOL: f64 = 1e-8;

/// Default relative tolerance of the moment round-trip check.
pub const MOMENT_MATCH_TOL: f64 = 1e-9;

/// Recurrence p_{k+1}(u) = (u − α_k) p_k(u) − β_k p_{k−1}(u) of the monic
/// orthogonal polynomials; the Jacobi matrix has diagonal α and
/// off-diagonal √β.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiMatrix {
    pub alpha: Vec<f64>,
    /// β₁ … β_{n−1}, all positive.
    pub beta: Vec<f64>,
    /// m₀
    pub mass: f64,
}

impl JacobiMatrix {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>, mass: f64) -> Result<Self> {
        if alpha.is_empty() || beta.len() + 1 != alpha.len() {
            return Err(Error::Invalid(format!(
                "Jacobi matrix needs n ≥ 1 diagonal and n − 1 off-diagonal entries, got {} and {}",
                alpha.len(),
                beta.len()
            )));
        }
        if beta.iter().any(|b| !(*b > 0.0)) {
            return Err(Error::Invalid("recurrence coefficients β must be positive".into()));
        }
        if !(mass > 0.0) {
            return Err(Error::Invalid("mass must be positive".into()));
        }
        Ok(Self { alpha, beta, mass })
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }
}

/// Recurrence coefficients of the orthogonal polynomials of `seq`.
///
/// Returns ⌊(N+1)/2⌋ rows, or fewer when a Cholesky pivot vanishes (the
/// sequence is flat and its measure has that many atoms).
pub fn jacobi_from_moments(seq: &MomentSequence) -> Result<JacobiMatrix> {
    let order = seq.order();
    if order < 1 {
        return Err(Error::InsufficientMoments {
            needed: 1,
            available: order,
        });
    }
    if order > CONDITIONING_LIMIT {
        log::warn!("moment order {order} > {CONDITIONING_LIMIT}: recurrence coefficients lose accuracy");
    }
    let m = seq.values();
    let n = order.div_ceil(2);
    // upper-triangular factor, rows 0..n, columns 0..=n
    let mut r = vec![vec![0.0; n + 1]; n];
    let mut rows = n;
    for i in 0..n {
        let hii = m[2 * i];
        let s = hii - (0..i).map(|k| r[k][i] * r[k][i]).sum::<f64>();
        let scale = hii.abs().max(m[0] * f64::EPSILON);
        if s <= FLAT_PIVOT_TOL * scale {
            if s < -FLAT_PIVOT_TOL * scale {
                return Err(Error::Indefinite {
                    block: format!("hankel {}x{}", i + 1, i + 1),
                    row: i,
                    pivot: s,
                });
            }
            rows = i;
            break;
        }
        r[i][i] = s.sqrt();
        for j in i + 1..=n {
            let hij = m[i + j];
            r[i][j] = (hij - (0..i).map(|k| r[k][i] * r[k][j]).sum::<f64>()) / r[i][i];
        }
    }
    if rows == 0 {
        return Err(Error::Indefinite {
            block: "hankel 1x1".into(),
            row: 0,
            pivot: m[0],
        });
    }
    let alpha = (0..rows)
        .map(|j| {
            let prev = if j == 0 { 0.0 } else { r[j - 1][j] / r[j - 1][j - 1] };
            r[j][j + 1] / r[j][j] - prev
        })
        .collect();
    let beta = (1..rows)
        .map(|j| {
            let q = r[j][j] / r[j - 1][j - 1];
            q * q
        })
        .collect();
    JacobiMatrix::new(alpha, beta, m[0])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    /// Strictly increasing.
    pub nodes: Vec<f64>,
    /// Positive, summing to m₀.
    pub weights: Vec<f64>,
}

impl Quadrature {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Σ w_i x_i^k.
    pub fn moment(&self, k: usize) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * x.powi(k as i32))
            .sum()
    }

    fn abs_moment(&self, k: usize) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * x.abs().powi(k as i32))
            .sum()
    }

    pub fn to_measure(&self) -> Result<MeasureRep> {
        MeasureRep::atomic(
            self.nodes
                .iter()
                .zip(&self.weights)
                .map(|(&x, &w)| Atom::scalar(x, w))
                .collect(),
        )
    }
}

/// Golub–Welsch on the leading n×n section of `jacobi`.
pub fn gauss_quadrature(jacobi: &JacobiMatrix, n: usize) -> Result<Quadrature> {
    if n == 0 || n > jacobi.len() {
        return Err(Error::Invalid(format!(
            "quadrature size {n} outside 1..={}",
            jacobi.len()
        )));
    }
    let diag = &jacobi.alpha[..n];
    let off: Vec<f64> = jacobi.beta[..n - 1].iter().map(|b| b.sqrt()).collect();
    let eig = symmetric_tridiagonal_eigen(diag, &off)?;
    let residual = max_residual(diag, &off, &eig);
    let bound = 1e-12 * norm(diag, &off).max(f64::MIN_POSITIVE);
    if residual > bound {
        return Err(Error::Residual { residual, bound });
    }
    let weights: Vec<f64> = eig.vectors.iter().map(|v| jacobi.mass * v[0] * v[0]).collect();
    Ok(Quadrature {
        nodes: eig.values,
        weights,
    })
}

/// One row of the verification block: target vs achieved moment.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentCheck {
    pub order: usize,
    pub target: f64,
    pub achieved: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub measure: MeasureRep,
    pub quadrature: Quadrature,
    /// Indices of nodes that were clamped onto S₀.
    pub clamped: Vec<usize>,
    pub checks: Vec<MomentCheck>,
}

impl Reconstruction {
    pub fn max_rel_error(&self) -> f64 {
        self.checks.iter().map(|c| c.rel_error).fold(0.0, f64::max)
    }
}

/// Builds the Gauss quadrature measure of `seq`, checks that its nodes lie in
/// `s0` and that it reproduces the moments it is exact for (relative `tol`).
pub fn representing_measure(seq: &MomentSequence, s0: SupportSet, tol: f64) -> Result<Reconstruction> {
    let verdict = check_s0_nonneg(seq, s0, DEFAULT_TOL)?;
    if verdict.status != FeasibilityStatus::Feasible {
        let worst = verdict
            .blocks
            .iter()
            .min_by(|a, b| a.scaled_min_eigen().total_cmp(&b.scaled_min_eigen()))
            .expect("blocks");
        return Err(Error::Infeasible {
            support: s0.to_string(),
            block: worst.kind.name().into(),
            min_eigen: worst.min_eigen,
        });
    }
    let jacobi = jacobi_from_moments(seq)?;
    let full = seq.order().div_ceil(2);
    let mut quad = gauss_quadrature(&jacobi, jacobi.len())?;

    let mut clamped = Vec::new();
    for (i, x) in quad.nodes.iter_mut().enumerate() {
        let d = s0.distance(*x);
        if d == 0.0 {
            continue;
        }
        if d <= NODE_CLAMP_TOL * x.abs().max(1.0) {
            *x = s0.clamp(*x);
            clamped.push(i);
        } else {
            return Err(Error::NodeOutsideSupport {
                node: *x,
                support: s0.to_string(),
                distance: d,
            });
        }
    }
    merge_coincident(&mut quad);

    // a flat sequence has a unique measure, which must match every order
    let top = if jacobi.len() < full { seq.order() } else { 2 * jacobi.len() - 1 };
    let mut checks = Vec::with_capacity(top + 1);
    for k in 0..=top {
        let target = seq.values()[k];
        let achieved = quad.moment(k);
        let denom = target.abs().max(quad.abs_moment(k)).max(f64::MIN_POSITIVE);
        checks.push(MomentCheck {
            order: k,
            target,
            achieved,
            rel_error: (achieved - target).abs() / denom,
        });
    }
    if let Some(worst) = checks
        .iter()
        .filter(|c| c.rel_error > tol)
        .max_by(|a, b| a.rel_error.total_cmp(&b.rel_error))
    {
        return Err(Error::MomentMismatch {
            order: worst.order,
            rel_error: worst.rel_error,
            tol,
        });
    }
    Ok(Reconstruction {
        measure: quad.to_measure()?,
        quadrature: quad,
        clamped,
        checks,
    })
}

fn merge_coincident(q: &mut Quadrature) {
    let mut nodes: Vec<f64> = Vec::with_capacity(q.nodes.len());
    let mut weights: Vec<f64> = Vec::with_capacity(q.nodes.len());
    for (&x, &w) in q.nodes.iter().zip(&q.weights) {
        match nodes.last() {
            Some(&last) if last == x => *weights.last_mut().expect("paired") += w,
            _ => {
                nodes.push(x);
                weights.push(w);
            }
        }
    }
    q.nodes = nodes;
    q.weights = weights;
}
