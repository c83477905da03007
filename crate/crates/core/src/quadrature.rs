//! Gauss–Legendre rules and composite integration used for density parts
//! of a [`MeasureRep`](crate::MeasureRep).

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::tridiag::symmetric_tridiagonal_eigen;

/// Nodes per subinterval. Exact for polynomials of degree ≤ 39.
pub const RULE_ORDER: usize = 20;

/// Relative agreement between successive refinements of a composite rule.
pub const REFINE_TOL: f64 = 1e-13;

const MAX_REFINEMENTS: usize = 14;

/// Gauss–Legendre nodes and weights on [−1, 1].
#[derive(Debug, Clone)]
pub struct LegendreRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LegendreRule {
    /// Golub–Welsch: eigenpairs of the Legendre Jacobi matrix.
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::Invalid("quadrature order must be positive".into()));
        }
        let diag = vec![0.0; order];
        let off: Vec<f64> = (1..order)
            .map(|k| {
                let k = k as f64;
                k / (4.0 * k * k - 1.0).sqrt()
            })
            .collect();
        let eig = symmetric_tridiagonal_eigen(&diag, &off)?;
        let weights = eig.vectors.iter().map(|v| 2.0 * v[0] * v[0]).collect();
        Ok(Self {
            nodes: eig.values,
            weights,
        })
    }

    /// Integral of `f` over `[a, b]` with a single application of the rule.
    pub fn apply<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

pub fn default_rule() -> &'static LegendreRule {
    static RULE: OnceLock<LegendreRule> = OnceLock::new();
    RULE.get_or_init(|| LegendreRule::new(RULE_ORDER).expect("Legendre rule of fixed order"))
}

/// Composite rule over `pieces` equal subintervals. Returns (integral, integral of |f|).
pub fn composite<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, pieces: usize) -> (f64, f64) {
    let rule = default_rule();
    let width = (b - a) / pieces as f64;
    let mut total = 0.0;
    let mut total_abs = 0.0;
    for k in 0..pieces {
        let lo = a + width * k as f64;
        let hi = if k + 1 == pieces { b } else { lo + width };
        total += rule.apply(f, lo, hi);
        total_abs += rule.apply(&|x| f(x).abs(), lo, hi);
    }
    (total, total_abs)
}

/// Composite integration on a finite interval, doubling the subinterval count
/// until two successive estimates agree to [`REFINE_TOL`] relative to ∫|f|.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, base_pieces: usize) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::NotIntegrable(format!(
            "finite interval required, got [{a}, {b}]"
        )));
    }
    if b <= a {
        return Ok(0.0);
    }
    let mut pieces = base_pieces.max(1);
    let (mut prev, _) = composite(f, a, b, pieces);
    check_finite(prev, a, b)?;
    for _ in 0..MAX_REFINEMENTS {
        pieces *= 2;
        let (next, abs) = composite(f, a, b, pieces);
        check_finite(next, a, b)?;
        if (next - prev).abs() <= REFINE_TOL * abs.max(f64::MIN_POSITIVE) {
            return Ok(next);
        }
        prev = next;
    }
    log::warn!("composite quadrature on [{a}, {b}] stopped at {pieces} subintervals");
    Ok(prev)
}

fn check_finite(v: f64, a: f64, b: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NotIntegrable(format!(
            "integrand produced {v} on [{a}, {b}]"
        )))
    }
}
