use std::sync::Arc;

use momentlab::measure::{binomial, dirac, normal, uniform};
use momentlab::moments::{domination_radius, tail_dominated, DEFAULT_TOL};
use momentlab::{
    brute_force_nonneg_oracle, cdf, char_fn, check_s0_nonneg, extension_interval, f_volume, gauss_quadrature,
    hankel, jacobi_from_moments, moment_functional, representing_measure, tightness_bound, BoxRegion,
    DistributionFunction, FeasibilityStatus, MeasureRep, MomentSequence, MultiIndex, OracleConfig, Polynomial,
    SupportSet,
};
use proptest::prelude::*;

fn atoms_strategy(max: usize, lo: f64, hi: f64) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((lo..hi, 0.05f64..1.0), 1..=max).prop_map(|mut v| {
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v.dedup_by(|a, b| a.0 == b.0);
        let total: f64 = v.iter().map(|p| p.1).sum();
        v.into_iter().map(|(x, w)| (x, w / total)).collect()
    })
}

/// Atoms at least `gap` apart: distinct grid slots of width `gap`, jittered
/// within the first half of each slot.
fn separated_atoms(max: usize, lo: f64, hi: f64, gap: f64) -> impl Strategy<Value = Vec<(f64, f64)>> {
    let slots = ((hi - lo) / gap) as usize;
    (1..=max)
        .prop_flat_map(move |k| {
            (
                prop::sample::subsequence((0..slots).collect::<Vec<_>>(), k),
                prop::collection::vec((0.0f64..0.5, 0.05f64..1.0), k),
            )
        })
        .prop_map(move |(idx, jw)| {
            let total: f64 = jw.iter().map(|p| p.1).sum();
            idx.into_iter()
                .zip(jw)
                .map(|(i, (j, w))| (lo + gap * (i as f64 + j), w / total))
                .collect()
        })
}

fn moments_of(atoms: &[(f64, f64)], n: usize) -> MomentSequence {
    MomentSequence::new(
        (0..=n)
            .map(|k| atoms.iter().map(|(x, w)| w * x.powi(k as i32)).sum())
            .collect(),
    )
    .unwrap()
}

fn logistic(s: f64) -> Arc<dyn Fn(f64) -> f64 + Send + Sync> {
    Arc::new(move |x: f64| 1.0 / (1.0 + (-x / s).exp()))
}

fn box_strategy(d: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    prop::collection::vec((-3.0f64..3.0, 0.0f64..3.0), d)
        .prop_map(|v| v.into_iter().map(|(a, len)| (a, a + len)).unzip())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn split_additivity((a, b) in box_strategy(3), axis in 0usize..3, frac in 0.0f64..=1.0,
                        scales in prop::collection::vec(0.3f64..2.0, 3)) {
        let f = DistributionFunction::product(scales.iter().map(|s| logistic(*s)).collect());
        let bx = BoxRegion::new(a.clone(), b.clone()).unwrap();
        let at = a[axis] + frac * (b[axis] - a[axis]);
        let (lo, hi) = bx.split(axis, at).unwrap();
        let whole = f_volume(&f, &bx).unwrap();
        let parts = f_volume(&f, &lo).unwrap() + f_volume(&f, &hi).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-12);
    }

    #[test]
    fn product_factorization((a, b) in box_strategy(2), s1 in 0.3f64..2.0, s2 in 0.3f64..2.0) {
        let (f1, f2) = (logistic(s1), logistic(s2));
        let f = DistributionFunction::product(vec![f1.clone(), f2.clone()]);
        let bx = BoxRegion::new(a.clone(), b.clone()).unwrap();
        let expect = (f1(b[0]) - f1(a[0])) * (f2(b[1]) - f2(a[1]));
        prop_assert!((f_volume(&f, &bx).unwrap() - expect).abs() <= 1e-12);
    }

    #[test]
    fn degenerate_box_has_zero_volume(a in prop::collection::vec(-3.0f64..3.0, 1..4)) {
        let d = a.len();
        let f = DistributionFunction::product((0..d).map(|_| logistic(1.0)).collect());
        let bx = BoxRegion::new(a.clone(), a).unwrap();
        prop_assert_eq!(f_volume(&f, &bx).unwrap(), 0.0);
    }

    #[test]
    fn one_dimensional_volume_is_cdf_increment(atoms in atoms_strategy(5, -2.0, 2.0), a in -3.0f64..3.0, len in 0.0f64..3.0) {
        let m = MeasureRep::mixture(vec![
            (0.5, MeasureRep::atomic_1d(&atoms).unwrap()),
            (0.5, uniform(-1.0, 1.0).unwrap()),
        ]).unwrap();
        let b = a + len;
        let f = DistributionFunction::from_measure(m.clone());
        let vol = f_volume(&f, &BoxRegion::interval(a, b).unwrap()).unwrap();
        prop_assert!((vol - (cdf(&m, &[b]).unwrap() - cdf(&m, &[a]).unwrap())).abs() <= 1e-12);
    }

    #[test]
    fn zeroth_moment_is_mass(atoms in atoms_strategy(6, -5.0, 5.0)) {
        let m = MeasureRep::atomic_1d(&atoms).unwrap();
        prop_assert_eq!(m.moment(&MultiIndex::scalar(0)).unwrap(), m.total_mass().unwrap());
    }

    #[test]
    fn functional_is_linear(atoms in atoms_strategy(5, -2.0, 2.0),
                            p in prop::collection::vec(-1.0f64..1.0, 1..8),
                            q in prop::collection::vec(-1.0f64..1.0, 1..8),
                            a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let s = moments_of(&atoms, 8);
        let (p, q) = (Polynomial::new(p), Polynomial::new(q));
        let combo = &p.scale(a) + &q.scale(b);
        let lhs = moment_functional(&s, &combo).unwrap();
        let rhs = a * moment_functional(&s, &p).unwrap() + b * moment_functional(&s, &q).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn quadratic_form_identity(atoms in atoms_strategy(5, -2.0, 2.0), q in prop::collection::vec(-1.0f64..1.0, 1..=5)) {
        let s = moments_of(&atoms, 8);
        let poly = Polynomial::new(q.clone());
        let h = hankel(&s, 0, q.len()).unwrap();
        let v = nalgebra::DVector::from_vec(q);
        let form = (v.transpose() * &h.matrix * &v)[(0, 0)];
        let mu = moment_functional(&s, &poly.square()).unwrap();
        prop_assert!((mu - form).abs() <= 1e-10 * form.abs().max(1.0));
    }

    #[test]
    fn genuine_measures_are_feasible(atoms in atoms_strategy(5, -2.0, 2.0), pad in 0.0f64..1.0) {
        let s = moments_of(&atoms, 10);
        let lo = atoms[0].0;
        let hi = atoms[atoms.len() - 1].0;
        for s0 in [SupportSet::WholeLine, SupportSet::HalfLine(lo - pad), SupportSet::Segment(lo - pad, hi + pad + 0.01)] {
            let v = check_s0_nonneg(&s, s0, DEFAULT_TOL).unwrap();
            prop_assert_eq!(v.status, FeasibilityStatus::Feasible, "{}", s0);
            let oracle = brute_force_nonneg_oracle(&s, s0, &OracleConfig::default(), &[]).unwrap();
            prop_assert!(oracle.is_pass());
        }
    }

    #[test]
    fn witnesses_replay(atoms in atoms_strategy(5, 0.0, 2.0), seed in 0u64..1000) {
        // a positive measure on [0, 2] pushed onto the left half-line is infeasible there
        let s = moments_of(&atoms.iter().map(|(x, w)| (x + 1.0, *w)).collect::<Vec<_>>(), 6);
        let s0 = SupportSet::Segment(-1.0, 0.5);
        let v = check_s0_nonneg(&s, s0, DEFAULT_TOL).unwrap();
        prop_assert_eq!(v.status, FeasibilityStatus::Infeasible);
        let cert = v.certificate().unwrap();
        let cfg = OracleConfig { max_degree: 6, seed, ..OracleConfig::default() };
        let oracle = brute_force_nonneg_oracle(&s, s0, &cfg, &[cert]).unwrap();
        prop_assert!(!oracle.is_pass());
    }

    #[test]
    fn true_next_moment_is_admissible(atoms in separated_atoms(6, -2.0, 2.0, 0.2), n in 2usize..9) {
        let full = moments_of(&atoms, n + 1);
        let s = full.truncated(n).unwrap();
        let lo = atoms[0].0;
        for s0 in [SupportSet::WholeLine, SupportSet::HalfLine(lo - 0.25)] {
            let iv = extension_interval(&s, s0, DEFAULT_TOL).unwrap();
            let t = full.values()[n + 1];
            prop_assert!(iv.contains(t, 1e-10), "{} not in [{}, {}] on {}", t, iv.c1, iv.c2, s0);
        }
    }

    #[test]
    fn tail_domination(eps in 0.001f64..1.0, n in 0u32..6, extra in 1u32..4, scale in 1.0f64..50.0) {
        // 2r − n − 1 ≥ 1
        let r = (n + 1 + extra).div_ceil(2);
        prop_assume!(2 * r >= n + 2);
        let k = domination_radius(eps);
        for u in [k, -k, k * scale, -k * scale] {
            prop_assert!(tail_dominated(u, n, r, eps));
        }
    }

    #[test]
    fn quadrature_is_exact(atoms in separated_atoms(10, -1.0, 1.0, 0.2), n in 2usize..=20) {
        let s = moments_of(&atoms, n);
        let j = jacobi_from_moments(&s).unwrap();
        let q = gauss_quadrature(&j, j.len()).unwrap();
        let exact_to = (2 * q.len() - 1).min(n);
        for k in 0..=exact_to {
            let target = s.values()[k];
            let scale: f64 = atoms.iter().map(|(x, w)| w * x.abs().powi(k as i32)).sum();
            prop_assert!((q.moment(k) - target).abs() <= 1e-9 * scale.max(target.abs()), "order {}", k);
        }
        prop_assert!(q.weights.iter().all(|w| *w > 0.0));
        prop_assert!((q.weights.iter().sum::<f64>() - s.mass()).abs() <= 1e-12);
        prop_assert!(q.nodes.windows(2).all(|w| w[1] > w[0]));
        let (lo, hi) = (atoms[0].0, atoms[atoms.len() - 1].0);
        prop_assert!(q.nodes.iter().all(|x| *x >= lo - 1e-8 && *x <= hi + 1e-8));
    }

    #[test]
    fn reconstruction_round_trip(atoms in separated_atoms(6, -1.5, 1.5, 0.2), n in 3usize..=11) {
        let s = moments_of(&atoms, n);
        let rec = representing_measure(&s, SupportSet::WholeLine, 1e-9).unwrap();
        let j1 = jacobi_from_moments(&s).unwrap();
        let again = MomentSequence::new(rec.measure.moments_1d(n).unwrap()).unwrap();
        let j2 = jacobi_from_moments(&again).unwrap();
        prop_assert_eq!(j1.len(), j2.len());
        for (a, b) in j1.alpha.iter().zip(&j2.alpha) {
            prop_assert!((a - b).abs() <= 1e-8);
        }
        for (a, b) in j1.beta.iter().zip(&j2.beta) {
            prop_assert!((a - b).abs() <= 1e-8);
        }
    }

    #[test]
    fn char_fn_is_bounded_by_mass(atoms in atoms_strategy(8, -5.0, 5.0), t in -20.0f64..20.0, mass in 0.1f64..3.0) {
        let scaled: Vec<(f64, f64)> = atoms.iter().map(|(x, w)| (*x, w * mass)).collect();
        let m = MeasureRep::atomic_1d(&scaled).unwrap();
        let psi = char_fn(&m, t, 2).unwrap();
        prop_assert!(psi.value.norm() <= mass * (1.0 + 1e-12));
        prop_assert!((psi.absolute_moments[2] - m.moment(&MultiIndex::scalar(2)).unwrap()).abs() <= 1e-12 * mass * 25.0);
    }

    #[test]
    fn markov_holds(atoms in atoms_strategy(8, -5.0, 5.0), k in 0.01f64..10.0) {
        let m = MeasureRep::atomic_1d(&atoms).unwrap();
        prop_assert!(tightness_bound(&m, k).unwrap().holds);
        prop_assert!(tightness_bound(&binomial(10, 0.3).unwrap(), k).unwrap().holds);
        prop_assert!(tightness_bound(&dirac(k), k).unwrap().holds);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cdf_is_monotone_with_limits(atoms in atoms_strategy(5, -2.0, 2.0)) {
        let m = MeasureRep::mixture(vec![
            (0.5, MeasureRep::atomic_1d(&atoms).unwrap()),
            (0.5, normal(0.0, 1.0).unwrap()),
        ]).unwrap();
        let grid: Vec<f64> = (0..=100).map(|i| -20.0 + 0.4 * i as f64).collect();
        let values: Vec<f64> = grid.iter().map(|x| cdf(&m, &[*x]).unwrap()).collect();
        prop_assert!(values.windows(2).all(|w| w[1] >= w[0] - 1e-15));
        prop_assert!(values[0].abs() <= 1e-12);
        prop_assert!((values[100] - 1.0).abs() <= 1e-12);
        // right-continuity at each atom
        for (x, _) in &atoms {
            let at = cdf(&m, &[*x]).unwrap();
            let right = cdf(&m, &[*x + 1e-12]).unwrap();
            prop_assert!((right - at).abs() <= 1e-10);
        }
    }
}
