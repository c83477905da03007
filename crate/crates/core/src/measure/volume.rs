use std::fmt;
use std::sync::Arc;

use super::{cdf, MeasureRep};
use crate::error::{Error, Result};

type Eval = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A function F: ℝ^d → ℝ that is only known through evaluation.
#[derive(Clone)]
pub struct DistributionFunction {
    dim: usize,
    eval: Eval,
}

impl fmt::Debug for DistributionFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DistributionFunction").field("dim", &self.dim).finish()
    }
}

impl DistributionFunction {
    pub fn new<F>(dim: usize, eval: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        assert!(dim > 0, "distribution function needs dimension ≥ 1");
        Self {
            dim,
            eval: Arc::new(eval),
        }
    }

    /// F(x) = Π F_i(x_i).
    pub fn product(factors: Vec<Arc<dyn Fn(f64) -> f64 + Send + Sync>>) -> Self {
        let dim = factors.len();
        Self::new(dim, move |x| factors.iter().zip(x).map(|(f, &xi)| f(xi)).product())
    }

    /// The cdf of a measure. Quadrature failures evaluate to NaN, which
    /// [`f_volume`] reports as a non-finite corner.
    pub fn from_measure(m: MeasureRep) -> Self {
        let dim = m.dim();
        Self::new(dim, move |x| cdf(&m, x).unwrap_or(f64::NAN))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }
}

/// The half-open box (a, b] ⊂ ℝ^d.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxRegion {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl BoxRegion {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                got: b.len(),
            });
        }
        if a.is_empty() {
            return Err(Error::InvalidBox("box needs dimension ≥ 1".into()));
        }
        if let Some(i) = (0..a.len()).find(|&i| a[i].is_nan() || b[i].is_nan() || a[i] > b[i]) {
            return Err(Error::InvalidBox(format!(
                "axis {i}: need a ≤ b, got a = {}, b = {}",
                a[i], b[i]
            )));
        }
        Ok(Self { a, b })
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![a], vec![b])
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn is_bounded(&self) -> bool {
        self.a.iter().chain(&self.b).all(|x| x.is_finite())
    }

    /// The corner set E(a, b) as (corner, sign) pairs: bit i of ε selects
    /// a_i over b_i, and the sign is (−1)^{s(ε)} with s(ε) the number of set bits.
    pub fn corners(&self) -> impl Iterator<Item = (Vec<f64>, f64)> + '_ {
        let d = self.dim();
        (0u64..1 << d).map(move |eps| {
            let corner = (0..d)
                .map(|i| if eps >> i & 1 == 1 { self.a[i] } else { self.b[i] })
                .collect();
            let sign = if eps.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            (corner, sign)
        })
    }

    /// Splits along `axis` at `at`, which must lie in [a_axis, b_axis].
    pub fn split(&self, axis: usize, at: f64) -> Result<(Self, Self)> {
        if axis >= self.dim() || !(self.a[axis] <= at && at <= self.b[axis]) {
            return Err(Error::InvalidBox(format!("cannot split axis {axis} at {at}")));
        }
        let mut left = self.clone();
        let mut right = self.clone();
        left.b[axis] = at;
        right.a[axis] = at;
        Ok((left, right))
    }
}

/// ΔF(a, b) = Σ_ε (−1)^{s(ε)} F(b + ε∗(a − b)).
pub fn f_volume(f: &DistributionFunction, bx: &BoxRegion) -> Result<f64> {
    if bx.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: bx.dim(),
        });
    }
    if bx.a == bx.b {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (corner, sign) in bx.corners() {
        if let Some(x) = corner.iter().find(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("box corner {corner:?}"),
                value: *x,
            });
        }
        let v = f.eval(&corner);
        if !v.is_finite() {
            return Err(Error::NonFinite {
                context: format!("F at corner {corner:?}"),
                value: v,
            });
        }
        total += sign * v;
    }
    Ok(total)
}

/// Step sizes of the right-continuity probe.
pub const RIGHT_CONTINUITY_STEPS: [f64; 7] = [1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9];

/// Outcome of [`is_df`]. Failures are data, not errors.
#[derive(Debug, Clone)]
pub struct DfReport {
    pub min_box_volume: f64,
    /// Grid cell attaining the minimum volume when it is below −tol.
    pub negative_box: Option<BoxRegion>,
    /// Largest residual jump F(x + h_min) − F(x) beyond the linear decay allowance.
    pub right_continuity_gap: f64,
    pub right_continuity_witness: Option<Vec<f64>>,
    /// `None` when no total mass was supplied.
    pub limits_ok: Option<bool>,
    pub passed: bool,
}

/// Validates that `f` behaves like a distribution function on `grid`
/// (sorted coordinates per axis).
///
/// * every cell between adjacent grid points has volume ≥ −tol;
/// * F(x + h) − F(x) decays as h shrinks along [`RIGHT_CONTINUITY_STEPS`]
///   (a residual above tol plus the linear decay from the largest step fails);
/// * with `total_mass = Some(m0)`: F ≈ 0 when any coordinate sits at its grid
///   minimum (others at their maxima) and F ≈ m0 at the top corner.
pub fn is_df(f: &DistributionFunction, grid: &[Vec<f64>], tol: f64, total_mass: Option<f64>) -> DfReport {
    let d = f.dim();
    let usable = grid.len() == d
        && grid.iter().all(|axis| !axis.is_empty() && axis.windows(2).all(|w| w[0] <= w[1]));
    if !usable {
        return DfReport {
            min_box_volume: f64::NAN,
            negative_box: None,
            right_continuity_gap: f64::NAN,
            right_continuity_witness: None,
            limits_ok: None,
            passed: false,
        };
    }

    let mut min_vol = f64::INFINITY;
    let mut negative_box = None;
    let cells: Vec<usize> = grid.iter().map(|axis| axis.len().saturating_sub(1)).collect();
    if cells.iter().all(|&c| c > 0) {
        for_each_index(&cells, |idx| {
            let a: Vec<f64> = idx.iter().enumerate().map(|(i, &k)| grid[i][k]).collect();
            let b: Vec<f64> = idx.iter().enumerate().map(|(i, &k)| grid[i][k + 1]).collect();
            let Ok(bx) = BoxRegion::new(a, b) else { return };
            let vol = f_volume(f, &bx).unwrap_or(f64::NEG_INFINITY);
            if vol < min_vol {
                min_vol = vol;
                if vol < -tol {
                    negative_box = Some(bx);
                }
            }
        });
    } else {
        min_vol = 0.0;
    }

    let h_max = RIGHT_CONTINUITY_STEPS[0];
    let h_min = RIGHT_CONTINUITY_STEPS[RIGHT_CONTINUITY_STEPS.len() - 1];
    let mut rc_gap: f64 = 0.0;
    let mut rc_witness = None;
    let points: Vec<usize> = grid.iter().map(Vec::len).collect();
    for_each_index(&points, |idx| {
        let x: Vec<f64> = idx.iter().enumerate().map(|(i, &k)| grid[i][k]).collect();
        let fx = f.eval(&x);
        let shifted = |h: f64| {
            let y: Vec<f64> = x.iter().map(|v| v + h).collect();
            f.eval(&y) - fx
        };
        let coarse = shifted(h_max).abs();
        let fine = shifted(h_min).abs();
        let excess = fine - (h_min / h_max) * coarse;
        if !excess.is_finite() || excess > tol && excess > rc_gap {
            rc_gap = if excess.is_finite() { excess } else { f64::INFINITY };
            rc_witness = Some(x.clone());
        }
    });

    let limits_ok = total_mass.map(|m0| {
        let top: Vec<f64> = grid.iter().map(|axis| axis[axis.len() - 1]).collect();
        let low_ok = (0..d).all(|i| {
            let mut x = top.clone();
            x[i] = grid[i][0];
            f.eval(&x).abs() <= tol
        });
        low_ok && (f.eval(&top) - m0).abs() <= tol
    });

    let passed = negative_box.is_none()
        && min_vol >= -tol
        && rc_witness.is_none()
        && limits_ok.unwrap_or(true);
    DfReport {
        min_box_volume: min_vol,
        negative_box,
        right_continuity_gap: rc_gap,
        right_continuity_witness: rc_witness,
        limits_ok,
        passed,
    }
}

fn for_each_index<F: FnMut(&[usize])>(extents: &[usize], mut f: F) {
    if extents.contains(&0) {
        return;
    }
    let mut idx = vec![0usize; extents.len()];
    loop {
        f(&idx);
        let mut axis = 0;
        loop {
            if axis == extents.len() {
                return;
            }
            idx[axis] += 1;
            if idx[axis] < extents[axis] {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }
}
