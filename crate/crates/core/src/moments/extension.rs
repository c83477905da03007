//! One-step positive extension: the admissible values of m_{N+1}.
//!
//! Extending the sequence by t only touches the bottom-right corner of each
//! localized block at order N + 1, so every block contributes a half-line
//! σ·t ≥ s − c₀ whose threshold s is the Schur complement bᵀA⁻¹b of the
//! leading block. On the boundary of the moment cone (some block singular)
//! the representing measure is unique and the only admissible value is the
//! one forced by the kernel polynomial of the singular block.

use nalgebra::DMatrix;

use super::feasibility::{assess, BlockKind, FeasibilityStatus, SupportSet};
use super::{min_eigen, translate_moments, MomentSequence};
use crate::error::{Error, Result};

/// Closed interval [c1, c2] of admissible next moments; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtensionInterval {
    /// The order N + 1 being extended.
    pub order: usize,
    pub c1: f64,
    pub c2: f64,
    pub degenerate: bool,
}

impl ExtensionInterval {
    pub fn width(&self) -> f64 {
        self.c2 - self.c1
    }

    /// Signed distance to the nearest endpoint (negative outside).
    pub fn margin(&self, t: f64) -> f64 {
        (t - self.c1).min(self.c2 - t)
    }

    pub fn contains(&self, t: f64, tol: f64) -> bool {
        let slack = |x: f64| tol * x.abs().max(1.0);
        t >= self.c1 - slack(self.c1) && t <= self.c2 + slack(self.c2)
    }
}

pub fn extension_interval(seq: &MomentSequence, s0: SupportSet, tol: f64) -> Result<ExtensionInterval> {
    let verdict = assess(seq, s0, tol);
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
    let order = seq.order();
    let next = order + 1;

    if verdict.on_boundary {
        for block in verdict.blocks.iter().filter(|b| b.scaled_min_eigen() <= tol) {
            if let Some(t) = flat_value(seq, block.kind, tol) {
                // + 0.0 turns −0 into 0
                let t = t + 0.0;
                return Ok(ExtensionInterval {
                    order: next,
                    c1: t,
                    c2: t,
                    degenerate: true,
                });
            }
        }
        log::warn!("boundary sequence without a usable kernel relation; using Schur bounds");
    }

    let mut c1 = f64::NEG_INFINITY;
    let mut c2 = f64::INFINITY;
    let mut base = seq.values().to_vec();
    base.push(0.0);
    for kind in s0.blocks(next) {
        let n = kind.size(next);
        if kind.degree() + 2 * (n - 1) != next {
            continue;
        }
        let sigma = *kind.localizer_w().coeffs().last().expect("non-zero localizer");
        let b0 = kind.matrix(&base, next);
        let threshold = corner_threshold(&b0, sigma, tol);
        if sigma > 0.0 {
            c1 = c1.max(threshold);
        } else {
            c2 = c2.min(threshold);
        }
    }
    if c1 > c2 {
        // both ends pinched within rounding
        let mid = 0.5 * (c1 + c2);
        c1 = mid;
        c2 = mid;
    }
    let degenerate = c1.is_finite() && c2 - c1 <= tol * c1.abs().max(1.0);
    Ok(ExtensionInterval {
        order: next,
        c1,
        c2,
        degenerate,
    })
}

/// Value of t at which B₀ + σ·t·e_n e_nᵀ leaves the PSD cone.
fn corner_threshold(b0: &DMatrix<f64>, sigma: f64, tol: f64) -> f64 {
    let n = b0.nrows();
    let c0 = b0[(n - 1, n - 1)];
    if n == 1 {
        return -c0 / sigma;
    }
    let a = b0.view((0, 0), (n - 1, n - 1)).into_owned();
    let b = b0.view((0, n - 1), (n - 1, 1)).into_owned();
    if let Some(chol) = a.clone().cholesky() {
        let x = chol.solve(&b);
        let s = b.dot(&x);
        return (s - c0) / sigma;
    }
    // flat leading block: pseudo-inverse Schur complement, then bisection
    // on the minimum eigenvalue to pin the boundary
    let eig = a.symmetric_eigen();
    let scale = eig.eigenvalues.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let cut = tol * scale;
    let mut s = 0.0;
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > cut {
            let proj = eig.eigenvectors.column(k).dot(&b);
            s += proj * proj / lambda;
        }
    }
    let guess = (s - c0) / sigma;
    bisect_boundary(b0, sigma, guess, tol)
}

fn bisect_boundary(b0: &DMatrix<f64>, sigma: f64, guess: f64, tol: f64) -> f64 {
    let n = b0.nrows();
    let ok = |t: f64| {
        let mut m = b0.clone();
        m[(n - 1, n - 1)] += sigma * t;
        let (lambda, _, norm) = min_eigen(&m);
        lambda >= -tol * norm.max(1.0)
    };
    let mut step = guess.abs().max(1.0) * 1e-8;
    let mut inside = guess;
    let mut outside = guess;
    let mut found = false;
    for _ in 0..80 {
        if ok(inside) {
            found = true;
            break;
        }
        inside = guess + sigma.signum() * step;
        step *= 2.0;
    }
    if !found {
        return guess;
    }
    step = guess.abs().max(1.0) * 1e-8;
    for _ in 0..80 {
        outside = inside - sigma.signum() * step;
        if !ok(outside) {
            break;
        }
        step *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if ok(mid) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

/// The next moment forced by a singular block: with P the kernel polynomial
/// of its smallest singular leading section, L·P vanishes on the support of
/// the (unique) representing measure, so μ(L·P·w^s) = 0 for every s.
fn flat_value(seq: &MomentSequence, kind: BlockKind, tol: f64) -> Option<f64> {
    let order = seq.order();
    let next = order + 1;
    let b = kind.matrix(seq.values(), order);
    let scale = min_eigen(&b).2.max(1.0);
    let shift = kind.translation();
    let loc = kind.localizer_w();
    for k in 1..=b.nrows() {
        let section = b.view((0, 0), (k, k)).into_owned();
        let (lambda, v, _) = min_eigen(&section);
        if lambda > tol * scale {
            continue;
        }
        let lead = v[k - 1];
        if lead.abs() < 1e-8 {
            return None;
        }
        let p = super::Polynomial::new(v);
        let r = &loc * &p;
        let deg_r = r.degree()?;
        if deg_r > next {
            return None;
        }
        let s = next - deg_r;
        let m = translate_moments(seq.values(), shift);
        // Σ_j r_j m'_{j+s} = 0, solved for m'_{N+1}
        let rc = r.coeffs();
        let partial: f64 = (0..deg_r).map(|j| rc[j] * m[j + s]).sum();
        let top = -partial / rc[deg_r];
        let mut mt = m;
        mt.push(top);
        // back to the original variable: m_{N+1} = Σ_j C(N+1, j) c^{N+1−j} m'_j
        return Some(translate_moments(&mt, -shift)[next]);
    }
    None
}
