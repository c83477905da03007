use super::{BoxRegion, MeasureRep};
use crate::error::{Error, Result};

/// Closed box [lo, hi] ⊂ ℝ^d; a point when lo == hi. Bounds may be infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ClosedBox {
    pub fn point(x: Vec<f64>) -> Self {
        Self { lo: x.clone(), hi: x }
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.lo.iter().zip(&self.hi).zip(x).all(|((l, h), v)| l <= v && v <= h)
    }

    fn contains_box(&self, other: &ClosedBox) -> bool {
        self.contains(&other.lo) && self.contains(&other.hi)
    }

    fn cartesian(&self, other: &ClosedBox) -> ClosedBox {
        let mut lo = self.lo.clone();
        lo.extend_from_slice(&other.lo);
        let mut hi = self.hi.clone();
        hi.extend_from_slice(&other.hi);
        ClosedBox { lo, hi }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    /// Atoms of the measure.
    pub point_spectrum: Vec<Vec<f64>>,
    /// Atoms together with the closures of the declared density supports.
    pub spectrum: Vec<ClosedBox>,
    /// `spectrum` with redundant pieces removed and overlapping intervals merged.
    pub support: Vec<ClosedBox>,
}

impl SpectrumReport {
    pub fn support_contains(&self, x: &[f64]) -> bool {
        self.support.iter().any(|b| b.contains(x))
    }
}

pub fn spectrum_report(m: &MeasureRep) -> SpectrumReport {
    let (point_spectrum, spectrum) = parts(m);
    let support = normalize(&spectrum);
    SpectrumReport {
        point_spectrum,
        spectrum,
        support,
    }
}

fn parts(m: &MeasureRep) -> (Vec<Vec<f64>>, Vec<ClosedBox>) {
    match m {
        MeasureRep::Atomic(atoms) => {
            let ps: Vec<Vec<f64>> = atoms.iter().map(|a| a.position.clone()).collect();
            let spec = ps.iter().cloned().map(ClosedBox::point).collect();
            (ps, spec)
        }
        MeasureRep::Density(d) => {
            let (lo, hi) = d.support();
            (vec![], vec![ClosedBox {
                lo: vec![lo],
                hi: vec![hi],
            }])
        }
        MeasureRep::Mixture(components) => {
            let mut ps = Vec::new();
            let mut spec = Vec::new();
            for (_, c) in components {
                let (p, s) = parts(c);
                for x in p {
                    if !ps.contains(&x) {
                        ps.push(x);
                    }
                }
                spec.extend(s);
            }
            (ps, spec)
        }
        MeasureRep::Product(factors) => {
            let mut ps: Vec<Vec<f64>> = vec![vec![]];
            let mut spec = vec![ClosedBox {
                lo: vec![],
                hi: vec![],
            }];
            for f in factors {
                let (p, s) = parts(f);
                ps = ps
                    .iter()
                    .flat_map(|a| {
                        p.iter().map(move |b| {
                            let mut v = a.clone();
                            v.extend_from_slice(b);
                            v
                        })
                    })
                    .collect();
                spec = spec
                    .iter()
                    .flat_map(|a| s.iter().map(move |b| a.cartesian(b)))
                    .collect();
            }
            (ps, spec)
        }
    }
}

fn normalize(spectrum: &[ClosedBox]) -> Vec<ClosedBox> {
    let one_d = spectrum.first().is_some_and(|b| b.lo.len() == 1);
    if one_d {
        let mut iv: Vec<(f64, f64)> = spectrum.iter().map(|b| (b.lo[0], b.hi[0])).collect();
        iv.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (lo, hi) in iv {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        return merged
            .into_iter()
            .map(|(lo, hi)| ClosedBox {
                lo: vec![lo],
                hi: vec![hi],
            })
            .collect();
    }
    let mut out: Vec<ClosedBox> = Vec::new();
    for (i, b) in spectrum.iter().enumerate() {
        let redundant = spectrum.iter().enumerate().any(|(j, other)| {
            j != i && other.contains_box(b) && (other != b || j < i)
        });
        if !redundant {
            out.push(b.clone());
        }
    }
    out
}

/// True iff every corner c of the bounded box carries boundary mass
/// m(∂(−∞, c]) ≤ tol. Purely atomic measures are checked exactly.
pub fn is_f_continuous_interval(m: &MeasureRep, bx: &BoxRegion, tol: f64) -> Result<bool> {
    if !bx.is_bounded() {
        return Err(Error::InvalidBox("F-continuity requires a bounded box".into()));
    }
    if bx.dim() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            got: bx.dim(),
        });
    }
    let tol = if m.is_atomic() { 0.0 } else { tol };
    for (corner, _) in bx.corners() {
        if m.boundary_mass(&corner)? > tol {
            return Ok(false);
        }
    }
    Ok(true)
}
