//! Finite measures on ℝ^d and the quantities built from them: distribution
//! functions, box volumes, spectra, F-continuity and moments.
//!
//! All boxes are half-open `(a, b]` and every cdf is right-closed, so that the
//! volume of a box under `F_m` is exactly `m((a, b])`.

mod builtins;
mod spectrum;
mod volume;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature;

pub use builtins::{binomial, dirac, lognormal, normal, poisson, uniform, POISSON_TAIL_MASS};
pub use spectrum::{is_f_continuous_interval, spectrum_report, ClosedBox, SpectrumReport};
pub use volume::{f_volume, is_df, BoxRegion, DfReport, DistributionFunction};

/// Relative size of the neglected tail when integrating densities with
/// unbounded support.
pub const TAIL_EPS: f64 = 1e-12;

/// A point mass.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub position: Vec<f64>,
    pub weight: f64,
}

impl Atom {
    pub fn new(position: Vec<f64>, weight: f64) -> Self {
        Self { position, weight }
    }

    pub fn scalar(x: f64, weight: f64) -> Self {
        Self::new(vec![x], weight)
    }
}

type Pdf = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A one-dimensional absolutely continuous measure.
///
/// `support` is the declared closed support `[lo, hi]` (either end may be
/// infinite). `core` is a finite window holding the bulk of the mass; for
/// unbounded supports the integrator starts there and walks outwards in
/// geometrically growing shells.
#[derive(Clone)]
pub struct Density {
    label: String,
    lo: f64,
    hi: f64,
    core: (f64, f64),
    pdf: Pdf,
    pieces: usize,
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Density")
            .field("label", &self.label)
            .field("support", &(self.lo, self.hi))
            .field("core", &self.core)
            .field("pieces", &self.pieces)
            .finish()
    }
}

impl Density {
    /// `pieces` is the base number of composite subintervals; it is refined
    /// automatically until successive estimates agree.
    pub fn new<F>(label: impl Into<String>, lo: f64, hi: f64, pieces: usize, pdf: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let label = label.into();
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::InvalidMeasure(format!(
                "{label}: support [{lo}, {hi}] must satisfy lo < hi"
            )));
        }
        if pieces == 0 {
            return Err(Error::InvalidMeasure(format!(
                "{label}: quadrature subinterval count must be positive"
            )));
        }
        let core = (
            if lo.is_finite() { lo } else { hi.min(0.0) - 1.0 },
            if hi.is_finite() { hi } else { lo.max(0.0) + 1.0 },
        );
        Ok(Self {
            label,
            lo,
            hi,
            core,
            pdf: Arc::new(pdf),
            pieces,
        })
    }

    /// Sets the finite window where the mass concentrates.
    pub fn with_core(mut self, a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidMeasure(format!(
                "{}: core window [{a}, {b}] must be finite and ordered",
                self.label
            )));
        }
        self.core = (a.max(self.lo), b.min(self.hi));
        if self.core.0 >= self.core.1 {
            return Err(Error::InvalidMeasure(format!(
                "{}: core window misses the support",
                self.label
            )));
        }
        Ok(self)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x < self.lo || x > self.hi {
            0.0
        } else {
            (self.pdf)(x)
        }
    }

    /// ∫ g(u) f(u) du over `[lo, min(hi, upper)]`.
    pub fn integrate<G: Fn(f64) -> f64>(&self, g: G, upper: f64) -> Result<f64> {
        let a = self.lo;
        let b = self.hi.min(upper);
        if b <= a {
            return Ok(0.0);
        }
        let h = |u: f64| {
            let p = self.pdf(u);
            if p == 0.0 {
                0.0
            } else {
                g(u) * p
            }
        };
        let habs = |u: f64| h(u).abs();
        let body_lo = if a.is_finite() { a } else { self.core.0.min(b) };
        let body_hi = if b.is_finite() { b } else { self.core.1.max(body_lo) };
        let mut total = quadrature::integrate(&h, body_lo, body_hi, self.pieces)?;
        let mut scale = quadrature::integrate(&habs, body_lo, body_hi, self.pieces)?;
        let width = (body_hi - body_lo).max(1.0);
        if a == f64::NEG_INFINITY {
            let (v, s) = self.tail(&h, &habs, body_lo, -1.0, width, scale)?;
            total += v;
            scale += s;
        }
        if b == f64::INFINITY {
            let (v, _) = self.tail(&h, &habs, body_hi, 1.0, width, scale)?;
            total += v;
        }
        Ok(total)
    }

    /// Walks outwards from `start` in doubling shells until two consecutive
    /// shells are negligible. The walk never passes |u| = 1/TAIL_EPS: beyond
    /// that radius |u|^n ≤ ε·u^{2r} whenever 2r − n − 1 ≥ 1, so the remaining
    /// tail is at most ε times a higher even moment.
    fn tail<H, A>(&self, h: &H, habs: &A, start: f64, dir: f64, width: f64, scale: f64) -> Result<(f64, f64)>
    where
        H: Fn(f64) -> f64,
        A: Fn(f64) -> f64,
    {
        let cap = 1.0 / TAIL_EPS;
        let mut edge = start;
        let mut step = width;
        let mut sum = 0.0;
        let mut sum_abs = 0.0;
        let mut quiet = 0;
        loop {
            let next = edge + dir * step;
            let (lo, hi) = if dir < 0.0 { (next, edge) } else { (edge, next) };
            let shell = quadrature::integrate(h, lo, hi, self.pieces)?;
            let shell_abs = quadrature::integrate(habs, lo, hi, self.pieces)?;
            sum += shell;
            sum_abs += shell_abs;
            if shell_abs <= TAIL_EPS * (scale + sum_abs) || shell_abs == 0.0 {
                quiet += 1;
                if quiet >= 2 {
                    return Ok((sum, sum_abs));
                }
            } else {
                quiet = 0;
            }
            edge = next;
            step *= 2.0;
            if edge.abs() >= cap {
                return Err(Error::NotIntegrable(format!(
                    "{}: tail contribution not negligible at |u| = {:e}",
                    self.label,
                    edge.abs()
                )));
            }
        }
    }
}

/// A finite measure on ℝ^d.
#[derive(Debug, Clone)]
pub enum MeasureRep {
    Atomic(Vec<Atom>),
    Density(Density),
    Mixture(Vec<(f64, MeasureRep)>),
    /// Product of measures on consecutive coordinate blocks.
    Product(Vec<MeasureRep>),
}

impl MeasureRep {
    pub fn atomic(atoms: Vec<Atom>) -> Result<Self> {
        let Some(first) = atoms.first() else {
            return Err(Error::InvalidMeasure("atomic measure needs at least one atom".into()));
        };
        let d = first.position.len();
        if d == 0 {
            return Err(Error::InvalidMeasure("atom positions must have dimension ≥ 1".into()));
        }
        for (i, atom) in atoms.iter().enumerate() {
            if atom.position.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: atom.position.len(),
                });
            }
            if !(atom.weight.is_finite() && atom.weight > 0.0) {
                return Err(Error::InvalidMeasure(format!(
                    "atom {i} has weight {}; weights must be positive and finite",
                    atom.weight
                )));
            }
            if atom.position.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidMeasure(format!("atom {i} has a non-finite position")));
            }
            if atoms[..i].iter().any(|other| other.position == atom.position) {
                return Err(Error::InvalidMeasure(format!(
                    "duplicate atom position {:?}",
                    atom.position
                )));
            }
        }
        Ok(MeasureRep::Atomic(atoms))
    }

    /// One-dimensional atomic measure from `(position, weight)` pairs.
    pub fn atomic_1d(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::atomic(pairs.iter().map(|&(x, w)| Atom::scalar(x, w)).collect())
    }

    pub fn mixture(components: Vec<(f64, MeasureRep)>) -> Result<Self> {
        let Some((_, first)) = components.first() else {
            return Err(Error::InvalidMeasure("mixture needs at least one component".into()));
        };
        let d = first.dim();
        for (c, m) in &components {
            if !(c.is_finite() && *c > 0.0) {
                return Err(Error::InvalidMeasure(format!(
                    "mixture coefficient {c} must be positive"
                )));
            }
            if m.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: m.dim(),
                });
            }
        }
        Ok(MeasureRep::Mixture(components))
    }

    pub fn product(factors: Vec<MeasureRep>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidMeasure("product needs at least one factor".into()));
        }
        Ok(MeasureRep::Product(factors))
    }

    pub fn dim(&self) -> usize {
        match self {
            MeasureRep::Atomic(atoms) => atoms[0].position.len(),
            MeasureRep::Density(_) => 1,
            MeasureRep::Mixture(parts) => parts[0].1.dim(),
            MeasureRep::Product(factors) => factors.iter().map(MeasureRep::dim).sum(),
        }
    }

    pub fn is_atomic(&self) -> bool {
        match self {
            MeasureRep::Atomic(_) => true,
            MeasureRep::Density(_) => false,
            MeasureRep::Mixture(parts) => parts.iter().all(|(_, m)| m.is_atomic()),
            MeasureRep::Product(factors) => factors.iter().all(MeasureRep::is_atomic),
        }
    }

    /// Flattens an atomic-valued mixture or product into a list of atoms,
    /// merging coincident positions.
    pub fn atoms(&self) -> Result<Vec<Atom>> {
        let raw = match self {
            MeasureRep::Atomic(atoms) => return Ok(atoms.clone()),
            MeasureRep::Density(_) => return Err(Error::NotAtomic),
            MeasureRep::Mixture(parts) => {
                let mut out = Vec::new();
                for (c, m) in parts {
                    out.extend(m.atoms()?.into_iter().map(|a| Atom::new(a.position, c * a.weight)));
                }
                out
            }
            MeasureRep::Product(factors) => {
                let mut out = vec![Atom::new(vec![], 1.0)];
                for f in factors {
                    let atoms = f.atoms()?;
                    out = out
                        .iter()
                        .flat_map(|p| {
                            atoms.iter().map(move |q| {
                                let mut pos = p.position.clone();
                                pos.extend_from_slice(&q.position);
                                Atom::new(pos, p.weight * q.weight)
                            })
                        })
                        .collect();
                }
                out
            }
        };
        let mut merged: Vec<Atom> = Vec::with_capacity(raw.len());
        for a in raw {
            match merged.iter_mut().find(|m| m.position == a.position) {
                Some(m) => m.weight += a.weight,
                None => merged.push(a),
            }
        }
        Ok(merged)
    }

    pub fn total_mass(&self) -> Result<f64> {
        match self {
            MeasureRep::Atomic(atoms) => Ok(atoms.iter().map(|a| a.weight).sum()),
            MeasureRep::Density(d) => d.integrate(|_| 1.0, f64::INFINITY),
            MeasureRep::Mixture(parts) => parts.iter().map(|(c, m)| Ok(c * m.total_mass()?)).sum(),
            MeasureRep::Product(factors) => factors.iter().map(MeasureRep::total_mass).product(),
        }
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                got,
            })
        } else {
            Ok(())
        }
    }

    /// Mass of the closed orthant (−∞, x] (or the open one when `strict`).
    fn orthant(&self, x: &[f64], strict: bool) -> Result<f64> {
        match self {
            MeasureRep::Atomic(atoms) => Ok(atoms
                .iter()
                .filter(|a| {
                    a.position
                        .iter()
                        .zip(x)
                        .all(|(p, q)| if strict { p < q } else { p <= q })
                })
                .map(|a| a.weight)
                .sum()),
            MeasureRep::Density(d) => d.integrate(|_| 1.0, x[0]),
            MeasureRep::Mixture(parts) => parts
                .iter()
                .map(|(c, m)| Ok(c * m.orthant(x, strict)?))
                .sum(),
            MeasureRep::Product(factors) => {
                let mut offset = 0;
                let mut prod = 1.0;
                for f in factors {
                    let k = f.dim();
                    prod *= f.orthant(&x[offset..offset + k], strict)?;
                    offset += k;
                }
                Ok(prod)
            }
        }
    }

    /// m((−∞, x)), the left limit of the cdf.
    pub fn cdf_strict(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x.len())?;
        self.orthant(x, true)
    }

    /// Mass of ∂(−∞, c] = (−∞, c] \ (−∞, c).
    pub fn boundary_mass(&self, c: &[f64]) -> Result<f64> {
        self.check_dim(c.len())?;
        match self {
            MeasureRep::Density(_) => Ok(0.0),
            MeasureRep::Mixture(parts) => parts
                .iter()
                .map(|(w, m)| Ok(w * m.boundary_mass(c)?))
                .sum(),
            _ => Ok((self.orthant(c, false)? - self.orthant(c, true)?).max(0.0)),
        }
    }

    pub fn moment(&self, alpha: &MultiIndex) -> Result<f64> {
        self.check_dim(alpha.dim())?;
        let powers = &alpha.0;
        match self {
            MeasureRep::Atomic(atoms) => Ok(atoms
                .iter()
                .map(|a| {
                    a.weight
                        * a.position
                            .iter()
                            .zip(powers)
                            .map(|(x, &k)| x.powi(k as i32))
                            .product::<f64>()
                })
                .sum()),
            MeasureRep::Density(d) => {
                let k = powers[0] as i32;
                d.integrate(|u| u.powi(k), f64::INFINITY)
            }
            MeasureRep::Mixture(parts) => parts.iter().map(|(c, m)| Ok(c * m.moment(alpha)?)).sum(),
            MeasureRep::Product(factors) => {
                let mut offset = 0;
                let mut prod = 1.0;
                for f in factors {
                    let k = f.dim();
                    prod *= f.moment(&MultiIndex(powers[offset..offset + k].to_vec()))?;
                    offset += k;
                }
                Ok(prod)
            }
        }
    }

    /// Raw moments m₀…m_order of a one-dimensional measure.
    pub fn moments_1d(&self, order: usize) -> Result<Vec<f64>> {
        self.check_dim(1)?;
        (0..=order).map(|n| self.moment(&MultiIndex(vec![n]))).collect()
    }
}

/// Exponent vector α of a monomial u^α.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn scalar(n: usize) -> Self {
        Self(vec![n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// |α| = α₁ + … + α_d.
    pub fn level(&self) -> usize {
        self.0.iter().sum()
    }
}

/// F_m(x) = m((−∞, x]).
pub fn cdf(m: &MeasureRep, x: &[f64]) -> Result<f64> {
    m.check_dim(x.len())?;
    if let Some(bad) = x.iter().find(|v| v.is_nan()) {
        return Err(Error::NonFinite {
            context: "cdf argument".into(),
            value: *bad,
        });
    }
    m.orthant(x, false)
}

/// μ_α = ∫ u^α dm(u).
pub fn moment(m: &MeasureRep, alpha: &MultiIndex) -> Result<f64> {
    m.moment(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_dirac_half_uniform() -> MeasureRep {
        MeasureRep::mixture(vec![(0.5, dirac(0.0)), (0.5, uniform(0.0, 1.0).unwrap())]).unwrap()
    }

    #[test]
    fn dirac_cdf_is_right_closed() {
        let m = dirac(0.0);
        assert_eq!(cdf(&m, &[-0.5]).unwrap(), 0.0);
        assert_eq!(cdf(&m, &[0.0]).unwrap(), 1.0);
    }

    #[test]
    fn uniform_cdf() {
        let m = uniform(0.0, 1.0).unwrap();
        assert!((cdf(&m, &[0.3]).unwrap() - 0.3).abs() < 1e-14);
        assert_eq!(cdf(&m, &[-1.0]).unwrap(), 0.0);
        assert!((cdf(&m, &[7.0]).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn mixture_cdf() {
        let m = half_dirac_half_uniform();
        assert!((cdf(&m, &[0.0]).unwrap() - 0.5).abs() < 1e-14);
        assert!((cdf(&m, &[0.5]).unwrap() - 0.75).abs() < 1e-14);
    }

    #[test]
    fn dirac_moments() {
        let m = dirac(1.5);
        for n in 0..8 {
            assert_eq!(moment(&m, &MultiIndex::scalar(n)).unwrap(), 1.5f64.powi(n as i32));
        }
    }

    #[test]
    fn uniform_moments_match_analytic_integral() {
        let m = uniform(0.0, 1.0).unwrap();
        for n in 0..30 {
            let got = moment(&m, &MultiIndex::scalar(n)).unwrap();
            let want = 1.0 / (n as f64 + 1.0);
            assert!((got - want).abs() <= 1e-12 * want, "n={n}");
        }
    }

    #[test]
    fn product_uniform_moment() {
        let u = uniform(0.0, 1.0).unwrap();
        let m = MeasureRep::product(vec![u.clone(), u]).unwrap();
        let got = moment(&m, &MultiIndex(vec![1, 2])).unwrap();
        assert!((got - 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn normal_moments_through_unbounded_tails() {
        let m = normal(0.0, 1.0).unwrap();
        let want = [1.0, 0.0, 1.0, 0.0, 3.0, 0.0, 15.0, 0.0, 105.0];
        for (n, w) in want.iter().enumerate() {
            let got = moment(&m, &MultiIndex::scalar(n)).unwrap();
            assert!((got - w).abs() <= 1e-10 * w.max(1.0), "n={n}: {got}");
        }
    }

    #[test]
    fn heavy_tail_is_not_integrable() {
        let cauchy = Density::new("cauchy", f64::NEG_INFINITY, f64::INFINITY, 4, |x| {
            1.0 / (std::f64::consts::PI * (1.0 + x * x))
        })
        .unwrap();
        let m = MeasureRep::Density(cauchy);
        assert!(matches!(
            moment(&m, &MultiIndex::scalar(2)),
            Err(Error::NotIntegrable(_))
        ));
    }

    #[test]
    fn zeroth_moment_is_total_mass_for_atoms() {
        let m = MeasureRep::atomic_1d(&[(0.1, 0.25), (-3.0, 0.5), (2.0, 1.25)]).unwrap();
        assert_eq!(moment(&m, &MultiIndex::scalar(0)).unwrap(), m.total_mass().unwrap());
    }

    #[test]
    fn invalid_measures_rejected() {
        assert!(MeasureRep::atomic_1d(&[(0.0, -1.0)]).is_err());
        assert!(MeasureRep::atomic_1d(&[(0.0, 1.0), (0.0, 1.0)]).is_err());
        assert!(MeasureRep::atomic(vec![]).is_err());
        assert!(MeasureRep::mixture(vec![(0.0, dirac(0.0))]).is_err());
        let two_d = MeasureRep::atomic(vec![Atom::new(vec![0.0, 0.0], 1.0)]).unwrap();
        assert!(MeasureRep::mixture(vec![(1.0, dirac(0.0)), (1.0, two_d)]).is_err());
        assert!(uniform(1.0, 0.0).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        assert!(cdf(&dirac(0.0), &[0.0, 1.0]).is_err());
        assert!(moment(&dirac(0.0), &MultiIndex(vec![1, 1])).is_err());
    }

    #[test]
    fn atoms_of_product_and_mixture() {
        let coin = MeasureRep::atomic_1d(&[(0.0, 0.5), (1.0, 0.5)]).unwrap();
        let p = MeasureRep::product(vec![coin.clone(), coin]).unwrap();
        let atoms = p.atoms().unwrap();
        assert_eq!(atoms.len(), 4);
        assert!(atoms.iter().all(|a| a.weight == 0.25));
        let mix = MeasureRep::mixture(vec![(0.5, dirac(1.0)), (0.5, dirac(1.0))]).unwrap();
        assert_eq!(mix.atoms().unwrap(), vec![Atom::scalar(1.0, 1.0)]);
        assert!(half_dirac_half_uniform().atoms().is_err());
    }
}
