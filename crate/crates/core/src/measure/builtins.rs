use std::f64::consts::PI;

use super::{Atom, Density, MeasureRep};
use crate::error::{Error, Result};

/// Poisson measures are truncated where the neglected tail drops below this;
/// the tail is folded into the last atom.
pub const POISSON_TAIL_MASS: f64 = 1e-12;

pub fn dirac(c: f64) -> MeasureRep {
    MeasureRep::Atomic(vec![Atom::scalar(c, 1.0)])
}

pub fn uniform(a: f64, b: f64) -> Result<MeasureRep> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidMeasure(format!("uniform({a}, {b}) requires a < b")));
    }
    let h = 1.0 / (b - a);
    Ok(MeasureRep::Density(Density::new(format!("uniform({a},{b})"), a, b, 1, move |_| h)?))
}

pub fn normal(mu: f64, sigma: f64) -> Result<MeasureRep> {
    if !(mu.is_finite() && sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidMeasure(format!("normal({mu}, {sigma}) requires sigma > 0")));
    }
    let c = 1.0 / (sigma * (2.0 * PI).sqrt());
    let d = Density::new(
        format!("normal({mu},{sigma})"),
        f64::NEG_INFINITY,
        f64::INFINITY,
        8,
        move |x| {
            let z = (x - mu) / sigma;
            c * (-0.5 * z * z).exp()
        },
    )?
    .with_core(mu - 10.0 * sigma, mu + 10.0 * sigma)?;
    Ok(MeasureRep::Density(d))
}

/// Law of e^{σZ} with Z standard normal.
pub fn lognormal(sigma: f64) -> Result<MeasureRep> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidMeasure(format!("lognormal({sigma}) requires sigma > 0")));
    }
    let c = 1.0 / (sigma * (2.0 * PI).sqrt());
    let d = Density::new(format!("lognormal({sigma})"), 0.0, f64::INFINITY, 16, move |x| {
        if x <= 0.0 {
            0.0
        } else {
            let z = x.ln() / sigma;
            c * (-0.5 * z * z).exp() / x
        }
    })?
    .with_core(0.0, (4.0 * sigma).exp())?;
    Ok(MeasureRep::Density(d))
}

pub fn binomial(k: u64, p: f64) -> Result<MeasureRep> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidMeasure(format!("binomial({k}, {p}) requires p in [0, 1]")));
    }
    if p == 0.0 || p == 1.0 || k == 0 {
        return Ok(dirac(if p == 1.0 { k as f64 } else { 0.0 }));
    }
    let odds = p / (1.0 - p);
    let mut pmf = (k as f64 * (1.0 - p).ln()).exp();
    let mut atoms = Vec::with_capacity(k as usize + 1);
    for j in 0..=k {
        if pmf > 0.0 {
            atoms.push(Atom::scalar(j as f64, pmf));
        }
        pmf *= (k - j) as f64 / (j + 1) as f64 * odds;
    }
    MeasureRep::atomic(atoms)
}

/// Smallest truncation point whose neglected Poisson tail is below
/// [`POISSON_TAIL_MASS`].
pub fn poisson_truncation(lambda: f64) -> usize {
    let mut n = 0usize;
    loop {
        if poisson_tail(lambda, n + 1) < POISSON_TAIL_MASS {
            return n;
        }
        n += 1;
    }
}

fn poisson_pmf(lambda: f64, j: usize) -> f64 {
    let lg: f64 = (1..=j).map(|i| (i as f64).ln()).sum();
    (j as f64 * lambda.ln() - lambda - lg).exp()
}

/// P(X ≥ n).
fn poisson_tail(lambda: f64, n: usize) -> f64 {
    let mut term = poisson_pmf(lambda, n);
    let mut sum = 0.0;
    let mut j = n;
    while term > 0.0 && (term > 1e-300 || (j as f64) < lambda) {
        sum += term;
        j += 1;
        term *= lambda / j as f64;
    }
    sum
}

/// Poisson(λ) on {0,…,N}; the mass of {N+1, N+2, …} is folded into N.
/// `truncation = None` picks N by [`poisson_truncation`].
pub fn poisson(lambda: f64, truncation: Option<usize>) -> Result<MeasureRep> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidMeasure(format!("poisson({lambda}) requires lambda > 0")));
    }
    let n = truncation.unwrap_or_else(|| poisson_truncation(lambda));
    let mut atoms: Vec<Atom> = (0..n)
        .map(|j| Atom::scalar(j as f64, poisson_pmf(lambda, j)))
        .filter(|a| a.weight > 0.0)
        .collect();
    atoms.push(Atom::scalar(n as f64, poisson_tail(lambda, n)));
    MeasureRep::atomic(atoms)
}
