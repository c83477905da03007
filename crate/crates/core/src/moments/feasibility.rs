//! S₀-non-negativity of the moment functional, realized through positive
//! semidefiniteness of localized Hankel blocks.
//!
//! A polynomial of degree ≤ N that is non-negative on S₀ is a sum of terms
//! L·Q² with L drawn from a short list of localizers:
//!
//! | S₀          | localizers                                      |
//! |-------------|-------------------------------------------------|
//! | ℝ           | 1                                               |
//! | [c, ∞)      | 1, (u − c)                                      |
//! | [a, b]      | 1, (u − a)(b − u); for odd N also u − a, b − u  |
//!
//! so μ ≥ 0 on that cone iff every block B_L with entries μ(L·u^{i+j}) is PSD.
//! The half-line block is built from the moments of the translated measure
//! (entries m'_{i+j+1} with m' the moments of u − c), which is congruent to
//! the localizer form.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{min_eigen, moment_functional, translate_moments, MomentSequence, Polynomial, CONDITIONING_LIMIT};
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;

/// Blocks whose scaled minimum eigenvalue falls in [−MARGINAL_BAND·tol, −tol)
/// are reported as marginal rather than infeasible.
const MARGINAL_BAND: f64 = 10.0;

/// The closed set S₀ carrying the measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SupportSet {
    WholeLine,
    /// [left, ∞)
    HalfLine(f64),
    /// [a, b] with a < b
    Segment(f64, f64),
}

impl SupportSet {
    pub fn half_line(left: f64) -> Result<Self> {
        if !left.is_finite() {
            return Err(Error::Invalid(format!("half-line origin {left} must be finite")));
        }
        Ok(SupportSet::HalfLine(left))
    }

    pub fn segment(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::Invalid(format!("segment [{a}, {b}] needs finite a < b")));
        }
        Ok(SupportSet::Segment(a, b))
    }

    /// Distance from x to the set (0 inside).
    pub fn distance(&self, x: f64) -> f64 {
        match *self {
            SupportSet::WholeLine => 0.0,
            SupportSet::HalfLine(c) => (c - x).max(0.0),
            SupportSet::Segment(a, b) => (a - x).max(x - b).max(0.0),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.distance(x) == 0.0
    }

    pub fn clamp(&self, x: f64) -> f64 {
        match *self {
            SupportSet::WholeLine => x,
            SupportSet::HalfLine(c) => x.max(c),
            SupportSet::Segment(a, b) => x.clamp(a, b),
        }
    }

    pub(crate) fn blocks(&self, order: usize) -> Vec<BlockKind> {
        let mut kinds = vec![BlockKind::Hankel];
        match *self {
            SupportSet::WholeLine => {}
            SupportSet::HalfLine(c) => kinds.push(BlockKind::HalfLine(c)),
            SupportSet::Segment(a, b) => {
                kinds.push(BlockKind::Segment(a, b));
                if order % 2 == 1 {
                    kinds.push(BlockKind::LowerFace(a));
                    kinds.push(BlockKind::UpperFace(b));
                }
            }
        }
        kinds.retain(|k| k.degree() <= order);
        kinds
    }
}

impl fmt::Display for SupportSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SupportSet::WholeLine => write!(f, "line"),
            SupportSet::HalfLine(c) => write!(f, "halfline:{c}"),
            SupportSet::Segment(a, b) => write!(f, "segment:{a},{b}"),
        }
    }
}

impl FromStr for SupportSet {
    type Err = Error;

    /// `line`, `halfline:c` or `segment:a,b`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Invalid(format!("unrecognized support set `{s}`"));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        if s == "line" {
            return Ok(SupportSet::WholeLine);
        }
        if let Some(rest) = s.strip_prefix("halfline:") {
            return SupportSet::half_line(num(rest)?);
        }
        if let Some(rest) = s.strip_prefix("segment:") {
            let (a, b) = rest.split_once(',').ok_or_else(bad)?;
            return SupportSet::segment(num(a)?, num(b)?);
        }
        Err(bad())
    }
}

/// Which localized Hankel block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlockKind {
    /// m_{i+j}
    Hankel,
    /// m'_{i+j+1} for the moments m' of u − c
    HalfLine(f64),
    /// (a+b)m_{i+j+1} − ab·m_{i+j} − m_{i+j+2}
    Segment(f64, f64),
    /// m_{i+j+1} − a·m_{i+j}
    LowerFace(f64),
    /// b·m_{i+j} − m_{i+j+1}
    UpperFace(f64),
}

impl BlockKind {
    /// Translation t applied to the moments before localizing.
    pub(crate) fn translation(&self) -> f64 {
        match *self {
            BlockKind::HalfLine(c) => c,
            _ => 0.0,
        }
    }

    /// Localizer in the translated variable w = u − t.
    pub(crate) fn localizer_w(&self) -> Polynomial {
        match *self {
            BlockKind::Hankel => Polynomial::constant(1.0),
            BlockKind::HalfLine(_) => Polynomial::new(vec![0.0, 1.0]),
            BlockKind::Segment(a, b) => Polynomial::new(vec![-a * b, a + b, -1.0]),
            BlockKind::LowerFace(a) => Polynomial::new(vec![-a, 1.0]),
            BlockKind::UpperFace(b) => Polynomial::new(vec![b, -1.0]),
        }
    }

    /// Localizer as a polynomial in u.
    pub fn localizer(&self) -> Polynomial {
        self.localizer_w().shifted(self.translation())
    }

    /// Degree of the localizer; the `shift` column of block reports.
    pub fn degree(&self) -> usize {
        self.localizer_w().degree().unwrap_or(0)
    }

    pub fn name(&self) -> &'static str {
        match self {
            BlockKind::Hankel => "hankel",
            BlockKind::HalfLine(_) => "halfline",
            BlockKind::Segment(_, _) => "segment",
            BlockKind::LowerFace(_) => "lower",
            BlockKind::UpperFace(_) => "upper",
        }
    }

    pub(crate) fn size(&self, order: usize) -> usize {
        (order - self.degree()) / 2 + 1
    }

    /// The block over moments m₀…m_order (`moments.len() > order`).
    pub(crate) fn matrix(&self, moments: &[f64], order: usize) -> DMatrix<f64> {
        let m = translate_moments(&moments[..=order], self.translation());
        let loc = self.localizer_w();
        let n = self.size(order);
        DMatrix::from_fn(n, n, |i, j| {
            loc.coeffs()
                .iter()
                .enumerate()
                .map(|(k, c)| c * m[i + j + k])
                .sum()
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockSummary {
    pub kind: BlockKind,
    pub shift: usize,
    pub size: usize,
    pub min_eigen: f64,
    /// Spectral norm of the block.
    pub norm: f64,
}

impl BlockSummary {
    /// Minimum eigenvalue relative to max(1, ‖B‖).
    pub fn scaled_min_eigen(&self) -> f64 {
        self.min_eigen / self.norm.max(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeasibilityStatus {
    Feasible,
    Infeasible,
    /// Violation smaller than the noise band just outside the tolerance.
    Marginal,
}

impl fmt::Display for FeasibilityStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeasibilityStatus::Feasible => "feasible",
            FeasibilityStatus::Infeasible => "infeasible",
            FeasibilityStatus::Marginal => "marginal",
        })
    }
}

#[derive(Debug, Clone)]
pub struct FeasibilityVerdict {
    pub status: FeasibilityStatus,
    /// Q from the most violated block; L·Q² ≥ 0 on S₀ yet μ(L·Q²) < 0.
    pub witness: Option<Polynomial>,
    /// L for the witness block (in u).
    pub localizer: Option<Polynomial>,
    pub blocks: Vec<BlockSummary>,
    /// Some block has scaled minimum eigenvalue ≤ tol: the sequence sits on
    /// the boundary of the moment cone (flat / singular case).
    pub on_boundary: bool,
    pub conditioning_warning: bool,
}

impl FeasibilityVerdict {
    /// L·Q², non-negative on S₀ by construction.
    pub fn certificate(&self) -> Option<Polynomial> {
        match (&self.witness, &self.localizer) {
            (Some(q), Some(l)) => Some(l * &q.square()),
            _ => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.status == FeasibilityStatus::Feasible
    }
}

/// Decides whether μ is non-negative on polynomials (degree ≤ N) that are
/// non-negative on `s0`. A block passes when λ_min ≥ −tol·max(1, ‖B‖).
pub fn check_s0_nonneg(seq: &MomentSequence, s0: SupportSet, tol: f64) -> Result<FeasibilityVerdict> {
    let order = seq.order();
    if order < 2 {
        return Err(Error::InsufficientMoments {
            needed: 2,
            available: order,
        });
    }
    Ok(assess(seq, s0, tol))
}

/// [`check_s0_nonneg`] without the minimum-order requirement.
pub(crate) fn assess(seq: &MomentSequence, s0: SupportSet, tol: f64) -> FeasibilityVerdict {
    let order = seq.order();
    let conditioning_warning = order > CONDITIONING_LIMIT;
    if conditioning_warning {
        log::warn!("moment order {order} > {CONDITIONING_LIMIT}: Hankel blocks are badly conditioned");
    }
    let mut blocks = Vec::new();
    let mut worst: Option<(f64, BlockKind, Vec<f64>)> = None;
    for kind in s0.blocks(order) {
        let b = kind.matrix(seq.values(), order);
        let (lambda, v, norm) = min_eigen(&b);
        let summary = BlockSummary {
            kind,
            shift: kind.degree(),
            size: b.nrows(),
            min_eigen: lambda,
            norm,
        };
        let scaled = summary.scaled_min_eigen();
        if worst.as_ref().is_none_or(|(w, _, _)| scaled < *w) {
            worst = Some((scaled, kind, v));
        }
        blocks.push(summary);
    }
    let (worst_scaled, kind, v) = worst.expect("at least the Hankel block");
    let status = if worst_scaled >= -tol {
        FeasibilityStatus::Feasible
    } else if worst_scaled >= -MARGINAL_BAND * tol {
        FeasibilityStatus::Marginal
    } else {
        FeasibilityStatus::Infeasible
    };
    let (witness, localizer) = if status == FeasibilityStatus::Feasible {
        (None, None)
    } else {
        let q = Polynomial::new(v).shifted(kind.translation());
        (Some(q), Some(kind.localizer()))
    };
    FeasibilityVerdict {
        status,
        witness,
        localizer,
        on_boundary: blocks.iter().any(|b| b.scaled_min_eigen() <= tol),
        blocks,
        conditioning_warning,
    }
}

#[derive(Debug, Clone)]
pub struct OracleConfig {
    pub max_degree: usize,
    pub trials: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            max_degree: 8,
            trials: 200,
            tol: DEFAULT_TOL,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleVerdict {
    Pass { checked: usize },
    Violation { polynomial: Polynomial, value: f64 },
}

impl OracleVerdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, OracleVerdict::Pass { .. })
    }
}

/// μ(P) compared against −tol·max(1, Σ|x_n m_n|).
pub fn replay_certificate(seq: &MomentSequence, p: &Polynomial, tol: f64) -> Result<(f64, bool)> {
    let value = moment_functional(seq, p)?;
    let scale: f64 = p
        .coeffs()
        .iter()
        .zip(seq.values())
        .map(|(x, m)| (x * m).abs())
        .sum();
    Ok((value, value >= -tol * scale.max(1.0)))
}

/// Samples polynomials that are non-negative on `s0` by construction
/// (Q², and the localized forms L·Q²) and checks μ(P) ≥ −tol on each.
/// `candidates` are replayed first and must themselves be non-negative on
/// `s0` (e.g. a certificate returned by [`check_s0_nonneg`]).
pub fn brute_force_nonneg_oracle(
    seq: &MomentSequence,
    s0: SupportSet,
    config: &OracleConfig,
    candidates: &[Polynomial],
) -> Result<OracleVerdict> {
    if config.max_degree > seq.order() {
        return Err(Error::InsufficientMoments {
            needed: config.max_degree,
            available: seq.order(),
        });
    }
    for p in candidates {
        let (value, ok) = replay_certificate(seq, p, config.tol)?;
        if !ok {
            return Ok(OracleVerdict::Violation {
                polynomial: p.clone(),
                value,
            });
        }
    }
    let localizers: Vec<Polynomial> = s0
        .blocks(config.max_degree)
        .into_iter()
        .chain(match s0 {
            // the odd-degree faces are valid localizers on a segment at any degree
            SupportSet::Segment(a, b) if config.max_degree.is_multiple_of(2) => {
                vec![BlockKind::LowerFace(a), BlockKind::UpperFace(b)]
            }
            _ => vec![],
        })
        .filter(|k| k.degree() <= config.max_degree)
        .map(|k| k.localizer())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for _ in 0..config.trials {
        let loc = &localizers[rng.gen_range(0..localizers.len())];
        let room = config.max_degree - loc.degree().unwrap_or(0);
        let q_degree = rng.gen_range(0..=room / 2);
        let q = Polynomial::new((0..=q_degree).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let p = loc * &q.square();
        if p.is_zero() {
            continue;
        }
        let (value, ok) = replay_certificate(seq, &p, config.tol)?;
        if !ok {
            return Ok(OracleVerdict::Violation { polynomial: p, value });
        }
    }
    Ok(OracleVerdict::Pass {
        checked: candidates.len() + config.trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(v: &[f64]) -> MomentSequence {
        MomentSequence::new(v.to_vec()).unwrap()
    }

    fn uniform_moments(n: usize) -> MomentSequence {
        seq(&(0..=n).map(|k| 1.0 / (k as f64 + 1.0)).collect::<Vec<_>>())
    }

    #[test]
    fn uniform_is_feasible_on_unit_segment() {
        let v = check_s0_nonneg(&uniform_moments(8), SupportSet::Segment(0.0, 1.0), DEFAULT_TOL).unwrap();
        assert_eq!(v.status, FeasibilityStatus::Feasible);
        assert_eq!(v.blocks.len(), 2);
        assert!(v.blocks.iter().all(|b| b.min_eigen > 0.0));
        assert!(!v.on_boundary);
    }

    #[test]
    fn indefinite_sequence_gives_witness() {
        let s = seq(&[1.0, 0.0, 1.0, 0.0, 0.5]);
        let h = super::super::hankel(&s, 0, 3).unwrap();
        assert!((h.determinant() + 0.5).abs() < 1e-14);
        let v = check_s0_nonneg(&s, SupportSet::WholeLine, DEFAULT_TOL).unwrap();
        assert_eq!(v.status, FeasibilityStatus::Infeasible);
        let cert = v.certificate().unwrap();
        assert!(moment_functional(&s, &cert).unwrap() < 0.0);
        let q = v.witness.as_ref().unwrap();
        assert!((moment_functional(&s, &q.square()).unwrap() - v.blocks[0].min_eigen).abs() < 1e-12);
    }

    #[test]
    fn normal_is_not_stieltjes() {
        let s = seq(&[1.0, 0.0, 1.0, 0.0, 3.0]);
        let v = check_s0_nonneg(&s, SupportSet::HalfLine(0.0), DEFAULT_TOL).unwrap();
        assert_eq!(v.status, FeasibilityStatus::Infeasible);
        let shifted = &v.blocks[1];
        assert_eq!(shifted.size, 2);
        assert!((shifted.min_eigen + 1.0).abs() < 1e-12);
        // L·Q² = u·Q² is non-negative on [0, ∞) and has negative moment
        let cert = v.certificate().unwrap();
        for u in [0.0, 0.3, 1.0, 7.0] {
            assert!(cert.eval(u) >= -1e-12);
        }
        assert!(moment_functional(&s, &cert).unwrap() < 0.0);
    }

    #[test]
    fn half_line_translation() {
        // δ₂ lives on [1, ∞) but not on [3, ∞)
        let s = seq(&[1.0, 2.0, 4.0, 8.0, 16.0]);
        let ok = check_s0_nonneg(&s, SupportSet::HalfLine(1.0), DEFAULT_TOL).unwrap();
        assert!(ok.is_feasible());
        let bad = check_s0_nonneg(&s, SupportSet::HalfLine(3.0), DEFAULT_TOL).unwrap();
        assert_eq!(bad.status, FeasibilityStatus::Infeasible);
        let cert = bad.certificate().unwrap();
        assert!(cert.eval(3.0).abs() < 1e-12 && cert.eval(5.0) >= 0.0);
    }

    #[test]
    fn odd_order_segment_uses_faces() {
        // δ₂ on [0, 1] with N = 3: four blocks, both faces included
        let s = seq(&[1.0, 2.0, 4.0, 8.0]);
        let v = check_s0_nonneg(&s, SupportSet::Segment(0.0, 1.0), DEFAULT_TOL).unwrap();
        assert_eq!(v.blocks.len(), 4);
        assert_eq!(v.status, FeasibilityStatus::Infeasible);
    }

    #[test]
    fn needs_order_two() {
        assert!(check_s0_nonneg(&seq(&[1.0, 0.0]), SupportSet::WholeLine, DEFAULT_TOL).is_err());
    }

    #[test]
    fn oracle_passes_for_uniform() {
        let cfg = OracleConfig {
            max_degree: 8,
            trials: 200,
            tol: DEFAULT_TOL,
            seed: 7,
        };
        let v = brute_force_nonneg_oracle(&uniform_moments(8), SupportSet::Segment(0.0, 1.0), &cfg, &[]).unwrap();
        assert_eq!(v, OracleVerdict::Pass { checked: 200 });
    }

    #[test]
    fn oracle_replays_witness() {
        let s = seq(&[1.0, 0.0, 1.0, 0.0, 0.5]);
        let v = check_s0_nonneg(&s, SupportSet::WholeLine, DEFAULT_TOL).unwrap();
        let cfg = OracleConfig {
            max_degree: 4,
            trials: 0,
            ..OracleConfig::default()
        };
        let out = brute_force_nonneg_oracle(&s, SupportSet::WholeLine, &cfg, &[v.certificate().unwrap()]).unwrap();
        assert!(matches!(out, OracleVerdict::Violation { value, .. } if value < 0.0));
    }

    #[test]
    fn constant_polynomial_is_mass() {
        let s = seq(&[2.5, 0.0, 1.0]);
        let (value, ok) = replay_certificate(&s, &Polynomial::constant(1.0), DEFAULT_TOL).unwrap();
        assert_eq!(value, 2.5);
        assert!(ok);
    }

    #[test]
    fn support_set_parsing() {
        assert_eq!("line".parse::<SupportSet>().unwrap(), SupportSet::WholeLine);
        assert_eq!("halfline:-1.5".parse::<SupportSet>().unwrap(), SupportSet::HalfLine(-1.5));
        assert_eq!("segment:0,1".parse::<SupportSet>().unwrap(), SupportSet::Segment(0.0, 1.0));
        assert!("segment:1,0".parse::<SupportSet>().is_err());
        assert!("plane".parse::<SupportSet>().is_err());
        let s = SupportSet::Segment(0.0, 1.0);
        assert_eq!(s.to_string().parse::<SupportSet>().unwrap(), s);
    }
}
