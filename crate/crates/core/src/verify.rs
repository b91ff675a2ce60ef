//! A quick self-check of the whole library at reduced scale.
//!
//! Each check mirrors one of the properties the acceptance tests establish
//! at full size. The point is a fast smoke test from the command line, not a
//! replacement for `cargo test`.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::approx::{self, ChebyshevCheckConfig, ContinuousSource};
use crate::decompose::{decompose, recompose, Component, Mixture, TwoValued};
use crate::dist::{FiniteDist, Mode};
use crate::error::Result;
use crate::normal;
use crate::pipeline::{self, CltExperiment};
use crate::rational::{self, ratio, Rational};
use crate::rng::{child_rng, seeded_rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn from_result(name: &str, r: Result<(bool, String)>) -> Self {
        match r {
            Ok((pass, detail)) => CheckOutcome { name: name.to_string(), pass, detail },
            Err(e) => CheckOutcome { name: name.to_string(), pass: false, detail: format!("error: {e}") },
        }
    }
}

/// A random mean-zero law on `atoms` distinct points: integer support in
/// `[-10, 10]` with integer weights, shifted by its mean.
pub fn random_centered_dist<R: Rng + ?Sized>(rng: &mut R, atoms: usize) -> FiniteDist {
    assert!((2..=21).contains(&atoms));
    let mut support = BTreeSet::new();
    while support.len() < atoms {
        support.insert(rng.gen_range(-10i64..=10));
    }
    let weights: Vec<i64> = support.iter().map(|_| rng.gen_range(1i64..=20)).collect();
    let total: i64 = weights.iter().sum();
    let raw: Vec<(Rational, Rational)> =
        support.iter().zip(&weights).map(|(&v, &w)| (rational::int(v), ratio(w, total))).collect();
    let mean: Rational = raw.iter().map(|(v, p)| v * p).sum();
    FiniteDist::new(raw.into_iter().map(|(v, p)| (v - &mean, p))).expect("valid by construction")
}

/// Runs every check with `seed` and returns one outcome per check.
pub fn run_suite(seed: u64) -> Vec<CheckOutcome> {
    vec![
        CheckOutcome::from_result("decomposition", check_decomposition(seed)),
        CheckOutcome::from_result("normal-cdf", check_phi()),
        CheckOutcome::from_result("dml-kolmogorov", check_dml()),
        CheckOutcome::from_result("stirling", check_stirling()),
        CheckOutcome::from_result("clt-table", check_clt()),
        CheckOutcome::from_result("mixture-paths", check_paths(seed)),
        CheckOutcome::from_result("theta-lln", check_lln(seed)),
        CheckOutcome::from_result("quantizer", check_quantizer()),
        CheckOutcome::from_result("chebyshev", check_chebyshev(seed)),
    ]
}

fn check_decomposition(seed: u64) -> Result<(bool, String)> {
    let mut rng = seeded_rng(seed);
    let cases = 200;
    for i in 0..cases {
        let atoms = rng.gen_range(3..=8);
        let d = random_centered_dist(&mut rng, atoms);
        let m = decompose(&d)?;
        if recompose(&m) != d || pipeline::verify_variance_accounting(&m) != d.second_moment() {
            return Ok((false, format!("case {i}: {d}")));
        }
    }
    Ok((true, format!("{cases} random laws recomposed exactly")))
}

fn check_phi() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for i in -12..=12 {
        let x = i as f64 * 0.5;
        worst = worst.max((normal::phi(x) - normal::phi_oracle(x, 1e-14)?).abs());
    }
    Ok((worst <= 1e-12, format!("max |phi - quadrature| = {worst:.3e}")))
}

fn check_dml() -> Result<(bool, String)> {
    let rows = normal::kolmogorov_rows(&ratio(3, 10), &[16, 64, 256, 1024])?;
    let stats: Vec<f64> = rows.iter().map(|r| r.statistic).collect();
    let decreasing = stats.windows(2).all(|w| w[1] < w[0]);
    Ok((decreasing, format!("d_K at p = 3/10: {stats:.4?}")))
}

fn check_stirling() -> Result<(bool, String)> {
    let r100 = normal::stirling_ratio(100);
    let ladder: Vec<f64> = (0..=10).map(|k| normal::stirling_ratio(1 << k)).collect();
    let ok = (1.00080..=1.00087).contains(&r100) && ladder.windows(2).all(|w| w[1] < w[0]);
    Ok((ok, format!("ratio(100) = {r100:.6}")))
}

fn check_clt() -> Result<(bool, String)> {
    let d = FiniteDist::uniform([-1, 0, 1].map(rational::int))?;
    let e = CltExperiment::standardized(&d, vec![16, 64, 256], pipeline::default_grid(), Mode::LatticeFloat)?;
    let stats: Vec<f64> = pipeline::run_clt_table(&e)?.iter().map(|r| r.statistic).collect();
    Ok((stats.windows(2).all(|w| w[1] < w[0]), format!("sup error: {stats:.4?}")))
}

fn check_paths(seed: u64) -> Result<(bool, String)> {
    let mut rng = seeded_rng(seed ^ 0x5eed);
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        let atoms = rng.gen_range(3..=5);
        let d = random_centered_dist(&mut rng, atoms);
        let m = decompose(&d)?;
        let n = rng.gen_range(4..=24);
        let x = rng.gen_range(-1.5..1.5) * rational::to_f64(&d.variance()).sqrt();
        let ensemble = pipeline::path_ensemble(&m, n, x, 100, child_rng(seed, i).gen())?;
        let exact = pipeline::unconditional_cdf(&m, n, x)?;
        let slack = 3.0 * ensemble.std_err + 1e-12;
        worst = worst.max((ensemble.mean - exact).abs() / slack);
    }
    Ok((worst <= 1.0, format!("worst gap / (3 SE) = {worst:.3}")))
}

fn check_lln(seed: u64) -> Result<(bool, String)> {
    let m = Mixture::new(vec![
        Component { weight: ratio(2, 3), dist: TwoValued::balanced(rational::int(1), rational::int(1))? },
        Component { weight: ratio(1, 3), dist: TwoValued::balanced(rational::int(2), rational::int(2))? },
    ])?;
    let report = pipeline::verify_theta_lln(&m, 100_000, seed)?;
    // Four standard errors: a single seed gets no majority vote here.
    Ok((report.max_abs_freq_err <= 0.006, format!("max |freq - weight| = {:.5}", report.max_abs_freq_err)))
}

fn check_quantizer() -> Result<(bool, String)> {
    let src = ContinuousSource::standard_uniform();
    let q = approx::quantize(&src, 0.01)?;
    let quad = approx::quadrature_eta(&src, &q, 1e-12)?;
    let tol = Rational::new(BigInt::one(), BigInt::from(10u64.pow(12)));
    let moments_ok = q.simple.mean().abs() <= tol && (q.simple.variance() - Rational::one()).abs() <= tol;
    let ok = q.eta_achieved <= 0.01 && quad <= 0.01 + 1e-10 && moments_ok;
    Ok((ok, format!("K = {}, eta = {:.6} (quadrature {:.6})", q.cells, q.eta_achieved, quad)))
}

fn check_chebyshev(seed: u64) -> Result<(bool, String)> {
    let cfg = ChebyshevCheckConfig::new(0.5, 0.04, 100, 2000, seed)?;
    let r = approx::chebyshev_check(&ContinuousSource::standard_uniform(), &cfg)?;
    Ok((r.pass && r.cdf_pass, format!("P(|S-T| > 0.5) = {} vs bound {}", r.empirical, r.bound)))
}
