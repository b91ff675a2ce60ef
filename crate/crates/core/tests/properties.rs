use std::collections::BTreeMap;

use demoivre::dist::{convolve_power_exact, convolve_power_lattice, EXACT_ATOM_BUDGET};
use demoivre::pipeline::verify_variance_accounting;
use demoivre::rational::{ratio, to_f64};
use demoivre::{convolve_power, decompose, recompose, FiniteDist, Mode, Rational, SumLaw};
use num_traits::Zero;
use proptest::prelude::*;

/// Up to `max_atoms` distinct values `v / den` with integer weights.
fn dist(max_atoms: usize, den: i64) -> impl Strategy<Value = FiniteDist> {
    prop::collection::btree_map(-6i64..=6, 1i64..=9, 1..=max_atoms).prop_map(move |m| to_dist(&m, den))
}

fn to_dist(m: &BTreeMap<i64, i64>, den: i64) -> FiniteDist {
    let total: i64 = m.values().sum();
    FiniteDist::new(m.iter().map(|(&v, &w)| (ratio(v, den), ratio(w, total)))).unwrap()
}

/// Same as [`dist`] but shifted to mean zero, with at least two atoms.
fn centered(max_atoms: usize) -> impl Strategy<Value = FiniteDist> {
    prop::collection::btree_map(-10i64..=10, 1i64..=20, 2..=max_atoms).prop_map(|m| {
        let d = to_dist(&m, 1);
        let mean = d.mean();
        FiniteDist::new(d.atoms().iter().map(|a| (&a.value - &mean, a.prob.clone()))).unwrap()
    })
}

fn brute_mean(d: &FiniteDist) -> Rational {
    d.atoms().iter().fold(Rational::zero(), |acc, a| acc + &a.value * &a.prob)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn convolution_is_commutative_and_associative(a in dist(4, 1), b in dist(4, 2), c in dist(3, 3)) {
        prop_assert_eq!(a.convolve(&b), b.convolve(&a));
        prop_assert_eq!(a.convolve(&b).convolve(&c), a.convolve(&b.convolve(&c)));
    }

    #[test]
    fn moments_add(a in dist(4, 1), b in dist(4, 3)) {
        let s = a.convolve(&b);
        prop_assert_eq!(brute_mean(&s), brute_mean(&a) + brute_mean(&b));
        prop_assert_eq!(s.variance(), a.variance() + b.variance());
    }

    #[test]
    fn power_is_repeated_convolution(d in dist(4, 2), n in 1u64..=8) {
        let mut acc = d.clone();
        for _ in 1..n {
            acc = acc.convolve(&d);
        }
        prop_assert_eq!(convolve_power_exact(&d, n, EXACT_ATOM_BUDGET).unwrap(), acc);
    }

    #[test]
    fn lattice_matches_exact(d in dist(4, 1), n in 1u64..=64) {
        let exact = convolve_power_exact(&d, n, EXACT_ATOM_BUDGET).unwrap();
        let lattice = convolve_power_lattice(&d, n).unwrap();
        for a in exact.atoms() {
            prop_assert!((lattice.prob_at(&a.value) - to_f64(&a.prob)).abs() <= 1e-12);
        }
        prop_assert!((lattice.total_mass() - 1.0).abs() <= 1e-12);
        for x in [-2.0, -0.5, 0.0, 0.3, 1.7] {
            prop_assert!((lattice.cdf_scaled(n, x) - exact.cdf_scaled(n, x)).abs() <= 1e-12);
        }
    }

    #[test]
    fn cdf_is_monotone(d in dist(5, 3), n in 1u64..=12, xs in prop::collection::vec(-5.0f64..5.0, 2..20)) {
        let law = convolve_power(&d, n, Mode::Exact).unwrap();
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        let values: Vec<f64> = xs.iter().map(|&x| law.cdf_scaled(n, x)).collect();
        prop_assert!(values.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(values.iter().all(|v| (0.0..=1.0).contains(v)));
        if let SumLaw::Exact(e) = &law {
            let atoms = e.atoms();
            let mut running = Rational::zero();
            for a in atoms {
                running += &a.prob;
                prop_assert_eq!(e.cdf(&a.value), running.clone());
            }
        }
    }

    #[test]
    fn text_and_json_round_trip(d in dist(6, 7)) {
        let text = d.to_string();
        prop_assert_eq!(text.parse::<FiniteDist>().unwrap(), d.clone());
        let json = serde_json::to_string(&d).unwrap();
        prop_assert_eq!(serde_json::from_str::<FiniteDist>(&json).unwrap(), d);
    }

    #[test]
    fn mixture_json_round_trips(d in centered(6)) {
        let m = decompose(&d).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        prop_assert_eq!(serde_json::from_str::<demoivre::Mixture>(&json).unwrap(), m);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn decomposition_is_exact(d in centered(8)) {
        let m = decompose(&d).unwrap();
        prop_assert!(m.len() <= d.len());
        let total: Rational = m.weights().sum();
        prop_assert_eq!(total, ratio(1, 1));
        for c in m.components() {
            prop_assert!(c.dist.mean().is_zero());
        }
        prop_assert_eq!(recompose(&m), d.clone());
        prop_assert_eq!(verify_variance_accounting(&m), d.second_moment());
    }
}
