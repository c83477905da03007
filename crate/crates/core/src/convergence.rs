//! Characteristic functions of atomic measures, the Taylor remainder bound
//! with absolute moments, Markov tightness, and method-of-moments
//! convergence of measure families.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measure::{spectrum_report, Atom, MeasureRep, MultiIndex};
use crate::moments::{determinacy_radius, DeterminacyReport, MomentSequence};

/// Absolute slack allowed in the Taylor remainder inequality.
pub const TAYLOR_SLACK: f64 = 1e-12;

/// Highest moment order fed to the limit's determinacy diagnostic.
pub const DETERMINACY_ORDER: usize = 20;

/// Tail window for that diagnostic.
pub const DETERMINACY_WINDOW: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct CharFnSample {
    pub t: f64,
    pub value: Complex64,
    /// ψ^{(j)}(t) for j = 0 … max_deriv.
    pub derivatives: Vec<Complex64>,
    /// μ_j = ∫|u|^j dρ for j = 0 … max_deriv + 1.
    pub absolute_moments: Vec<f64>,
}

fn scalar_atoms(m: &MeasureRep) -> Result<Vec<Atom>> {
    if m.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: m.dim(),
        });
    }
    if !m.is_atomic() {
        return Err(Error::NotAtomic);
    }
    m.atoms()
}

/// ψ(t) = Σ w e^{itx} with derivatives ψ^{(j)}(t) = Σ w (ix)^j e^{itx}.
pub fn char_fn(m: &MeasureRep, t: f64, max_deriv: usize) -> Result<CharFnSample> {
    let atoms = scalar_atoms(m)?;
    let mut derivatives = vec![Complex64::new(0.0, 0.0); max_deriv + 1];
    let mut absolute_moments = vec![0.0; max_deriv + 2];
    for a in &atoms {
        let x = a.position[0];
        let phase = Complex64::from_polar(a.weight, t * x);
        let ix = Complex64::new(0.0, x);
        let mut term = phase;
        for d in derivatives.iter_mut() {
            *d += term;
            term *= ix;
        }
        let mut p = a.weight;
        for mu in absolute_moments.iter_mut() {
            *mu += p;
            p *= x.abs();
        }
    }
    Ok(CharFnSample {
        t,
        value: derivatives[0],
        derivatives,
        absolute_moments,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorCheck {
    /// |ψ(t+h) − Σ_{j≤n} h^j/j! ψ^{(j)}(t)|
    pub remainder: f64,
    /// |h|^{n+1}/(n+1)! · μ_{n+1}
    pub bound: f64,
    /// bound + TAYLOR_SLACK − remainder
    pub slack: f64,
    pub holds: bool,
}

pub fn taylor_remainder_check(m: &MeasureRep, t: f64, h: f64, n: usize) -> Result<TaylorCheck> {
    let at_t = char_fn(m, t, n)?;
    let at_th = char_fn(m, t + h, 0)?;
    let mut poly = Complex64::new(0.0, 0.0);
    let mut coef = 1.0;
    for (j, d) in at_t.derivatives.iter().enumerate() {
        if j > 0 {
            coef *= h / j as f64;
        }
        poly += d * coef;
    }
    let remainder = (at_th.value - poly).norm();
    let bound = (coef * h / (n + 1) as f64).abs() * at_t.absolute_moments[n + 1];
    let slack = bound + TAYLOR_SLACK - remainder;
    Ok(TaylorCheck {
        remainder,
        bound,
        slack,
        holds: slack >= 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tightness {
    /// P(|X| ≥ k)
    pub probability: f64,
    /// m₂ / k²
    pub bound: f64,
    pub holds: bool,
}

/// Markov: P(|X| ≥ k) ≤ m₂/k².
pub fn tightness_bound(m: &MeasureRep, k: f64) -> Result<Tightness> {
    if !(k > 0.0) {
        return Err(Error::Invalid(format!("tightness level k = {k} must be positive")));
    }
    let mass = m.total_mass()?;
    let inside = m.cdf_strict(&[k])? - crate::measure::cdf(m, &[-k])?;
    let probability = (mass - inside).max(0.0);
    let bound = m.moment(&MultiIndex::scalar(2))? / (k * k);
    Ok(Tightness {
        probability,
        bound,
        holds: probability <= bound * (1.0 + 1e-12) + 1e-15,
    })
}

type Generator = Arc<dyn Fn(u64) -> Result<MeasureRep> + Send + Sync>;

/// Measures X_k indexed by k ≥ 1 together with their candidate limit X_∞.
#[derive(Clone)]
pub struct MeasureFamily {
    label: String,
    generator: Generator,
    limit: MeasureRep,
}

impl fmt::Debug for MeasureFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MeasureFamily")
            .field("label", &self.label)
            .field("limit", &self.limit)
            .finish()
    }
}

impl MeasureFamily {
    pub fn new<G>(label: impl Into<String>, limit: MeasureRep, generator: G) -> Self
    where
        G: Fn(u64) -> Result<MeasureRep> + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            generator: Arc::new(generator),
            limit,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn limit(&self) -> &MeasureRep {
        &self.limit
    }

    /// X_k, checked for unit mass.
    pub fn member(&self, k: u64) -> Result<MeasureRep> {
        let m = (self.generator)(k)?;
        check_unit_mass(&m, &format!("{} at k = {k}", self.label))?;
        Ok(m)
    }
}

fn check_unit_mass(m: &MeasureRep, what: &str) -> Result<()> {
    let mass = m.total_mass()?;
    if (mass - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidMeasure(format!("{what} has mass {mass}, expected 1")));
    }
    if m.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: m.dim(),
        });
    }
    Ok(())
}

/// |m_n^{(k)} − m_n^{(∞)}| for n = 1 … orders, one row per k.
#[derive(Debug, Clone, PartialEq)]
pub struct GapTable {
    pub ks: Vec<u64>,
    pub orders: usize,
    pub limit_moments: Vec<f64>,
    /// `gaps[i][n − 1]` is the gap at order n for `ks[i]`.
    pub gaps: Vec<Vec<f64>>,
}

impl GapTable {
    /// Gap divided by max(1, |m_n^{(∞)}|).
    pub fn relative(&self, row: usize, order: usize) -> f64 {
        self.gaps[row][order - 1] / self.limit_moments[order].abs().max(1.0)
    }

    pub fn max_gap(&self, row: usize) -> f64 {
        self.gaps[row].iter().copied().fold(0.0, f64::max)
    }
}

pub fn moment_convergence(fam: &MeasureFamily, orders: usize, ks: &[u64]) -> Result<GapTable> {
    check_unit_mass(&fam.limit, "limit")?;
    let limit_moments = fam.limit.moments_1d(orders)?;
    let gaps = ks
        .par_iter()
        .map(|&k| {
            let mk = fam.member(k)?.moments_1d(orders)?;
            Ok((1..=orders).map(|n| (mk[n] - limit_moments[n]).abs()).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(GapTable {
        ks: ks.to_vec(),
        orders,
        limit_moments,
        gaps,
    })
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub grid: Vec<f64>,
    pub moments: GapTable,
    /// sup over the grid of |F_k(x) − F_∞(x)|, aligned with `moments.ks`.
    pub sup_distance: Vec<f64>,
    /// `None` when the limit has no non-zero moment beyond m₀ (a point mass
    /// at the origin, trivially determinate).
    pub determinacy: Option<DeterminacyReport>,
}

/// Compares cdfs on `grid`, which must avoid every atom of the limit.
pub fn weak_convergence_check(
    fam: &MeasureFamily,
    grid: &[f64],
    ks: &[u64],
    orders: usize,
) -> Result<ConvergenceReport> {
    check_unit_mass(&fam.limit, "limit")?;
    let atoms = spectrum_report(&fam.limit).point_spectrum;
    let offending: Vec<f64> = grid
        .iter()
        .copied()
        .filter(|x| atoms.iter().any(|a| a[0] == *x))
        .collect();
    if !offending.is_empty() {
        return Err(Error::GridHitsAtom(offending));
    }
    let moments = moment_convergence(fam, orders, ks)?;
    let limit_cdf = grid
        .iter()
        .map(|&x| crate::measure::cdf(&fam.limit, &[x]))
        .collect::<Result<Vec<f64>>>()?;
    let sup_distance = ks
        .par_iter()
        .map(|&k| {
            let m = fam.member(k)?;
            grid.iter().zip(&limit_cdf).try_fold(0.0f64, |acc, (&x, f)| {
                Ok(acc.max((crate::measure::cdf(&m, &[x])? - f).abs()))
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    let limit_seq = MomentSequence::new(fam.limit.moments_1d(DETERMINACY_ORDER)?)?;
    let determinacy = match determinacy_radius(&limit_seq, DETERMINACY_WINDOW) {
        Ok(r) => Some(r),
        Err(Error::InvalidSequence(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(ConvergenceReport {
        grid: grid.to_vec(),
        moments,
        sup_distance,
        determinacy,
    })
}

/// Points j + 1/2 for j = lo … hi − 1.
pub fn half_integer_grid(lo: i64, hi: i64) -> Vec<f64> {
    (lo..hi).map(|j| j as f64 + 0.5).collect()
}
