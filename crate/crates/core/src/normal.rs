//! The standard normal CDF, exact binomial laws, Stirling's ratio and the
//! Kolmogorov distance between a standardized binomial and the normal.

use std::f64::consts::PI;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;
use crate::rational::{self, Rational};
use crate::summation::Neumaier;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// `|x|` below which [`phi`] uses the power series; the continued fraction
/// takes over above it.
pub const SERIES_LIMIT: f64 = 5.0;

/// Depth of the backward-evaluated tail continued fraction.
const TAIL_CF_DEPTH: u32 = 120;

/// Lower cut-off of the quadrature oracle. The omitted tail is below 1e-32.
pub const ORACLE_LOWER: f64 = -12.0;

/// Standard normal density.
pub fn density(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF, accurate to about 1e-16 absolute.
///
/// For `|x| < 5` this is `1/2 + density(x) * Σ x^(2k+1) / (2k+1)!!`, a series
/// of positive terms. Beyond that the upper tail comes from the Laplace
/// continued fraction `density(x) / (x + 1/(x + 2/(x + 3/(x + ...))))`.
pub fn phi(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.abs() < SERIES_LIMIT {
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        let mut k = 1.0;
        while term.abs() > 1e-17 * sum.abs() {
            term *= x2 / (2.0 * k + 1.0);
            sum += term;
            k += 1.0;
        }
        0.5 + density(x) * sum
    } else if x < 0.0 {
        upper_tail(-x)
    } else {
        1.0 - upper_tail(x)
    }
}

/// `P(Z > x)` for `x >= SERIES_LIMIT`.
fn upper_tail(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 0.0;
    }
    let mut t = x;
    for k in (1..=TAIL_CF_DEPTH).rev() {
        t = x + k as f64 / t;
    }
    density(x) / t
}

/// `P(Z <= x)` by adaptive Simpson quadrature of the density over
/// `[-12, x]`, to absolute tolerance `tol`.
///
/// Independent of [`phi`]; used to check it.
pub fn phi_oracle(x: f64, tol: f64) -> Result<f64> {
    if tol.is_nan() || tol < 1e-15 {
        return Err(Error::invalid("tol", format!("{tol:e} is below 1e-15")));
    }
    if !x.is_finite() {
        return Err(Error::invalid("x", "must be finite"));
    }
    if x <= ORACLE_LOWER {
        return Ok(0.0);
    }
    quad::adaptive_simpson(density, ORACLE_LOWER, x, tol)
}

/// Binomial(`n`, `p`) with `n >= 1` and rational `0 < p < 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinomialSpec {
    n: u64,
    p: Rational,
}

impl BinomialSpec {
    pub fn new(n: u64, p: Rational) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n", "must be at least 1"));
        }
        if !(p.is_positive() && p < Rational::one()) {
            return Err(Error::invalid("p", format!("{p} is not in (0, 1)")));
        }
        Ok(BinomialSpec { n, p })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn p(&self) -> &Rational {
        &self.p
    }

    /// `np`.
    pub fn mean(&self) -> f64 {
        self.n as f64 * rational::to_f64(&self.p)
    }

    /// `sqrt(np(1 - p))`.
    pub fn sd(&self) -> f64 {
        let var = Rational::from_integer(BigInt::from(self.n)) * &self.p * (Rational::one() - &self.p);
        rational::to_f64(&var).sqrt()
    }

    /// All `n + 1` terms over a common denominator: writing `p = a / b`,
    /// term `k` is `C(n, k) a^k (b - a)^(n - k)` and the denominator is `b^n`.
    fn numerators(&self) -> (Vec<BigUint>, BigUint) {
        let a = self.p.numer().magnitude().clone();
        let b = self.p.denom().magnitude().clone();
        let q = &b - &a;
        let n = self.n;
        let mut terms = Vec::with_capacity(n as usize + 1);
        let mut term = num_traits::pow(q.clone(), n as usize);
        terms.push(term.clone());
        for k in 0..n {
            // C(n, k+1) a^(k+1) q^(n-k-1) = term_k (n - k) a / ((k + 1) q), exactly.
            term = term * BigUint::from(n - k) * &a / (BigUint::from(k + 1) * &q);
            terms.push(term.clone());
        }
        (terms, num_traits::pow(b, n as usize))
    }

    fn check_k(&self, k: i64) -> Result<()> {
        if k < 0 || k as u64 > self.n {
            return Err(Error::KOutOfRange { k, n: self.n });
        }
        Ok(())
    }

    /// Exact `P(B = k)`.
    pub fn pmf(&self, k: i64) -> Result<Rational> {
        self.check_k(k)?;
        let k = k as u64;
        let c = num_integer::binomial(BigInt::from(self.n), BigInt::from(k));
        let q = Rational::one() - &self.p;
        Ok(Rational::from_integer(c)
            * num_traits::pow(self.p.clone(), k as usize)
            * num_traits::pow(q, (self.n - k) as usize))
    }

    /// Exact `P(B <= k)`.
    pub fn cdf(&self, k: i64) -> Result<Rational> {
        self.check_k(k)?;
        let (terms, den) = self.numerators();
        let num: BigUint = terms[..=k as usize].iter().sum();
        Ok(Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// `P(B <= k)` for every `k = 0..=n`, each computed exactly and then
    /// rounded to `f64`.
    pub fn cdf_table(&self) -> Vec<f64> {
        let (terms, den) = self.numerators();
        let mut acc = BigUint::zero();
        terms
            .iter()
            .map(|t| {
                acc += t;
                rational::big_ratio_to_f64(&acc, &den)
            })
            .collect()
    }
}

/// Exact `P(B = k)`.
pub fn binom_pmf(spec: &BinomialSpec, k: i64) -> Result<Rational> {
    spec.pmf(k)
}

/// Exact `P(B <= k)`.
pub fn binom_cdf(spec: &BinomialSpec, k: i64) -> Result<Rational> {
    spec.cdf(k)
}

/// `n! / (sqrt(2 pi n) (n / e)^n)`, evaluated in log space.
pub fn stirling_ratio(n: u64) -> f64 {
    assert!(n >= 1, "stirling_ratio needs n >= 1");
    let log_factorial = (2..=n).map(|k| (k as f64).ln()).collect::<Neumaier>().total();
    let nf = n as f64;
    let log_approx = 0.5 * (2.0 * PI * nf).ln() + nf * nf.ln() - nf;
    (log_factorial - log_approx).exp()
}

/// Kolmogorov distance `sup_x |P((B - np)/sqrt(np(1-p)) <= x) - Φ(x)|`.
///
/// The standardized binomial CDF is a step function and Φ is continuous and
/// increasing, so the supremum is attained at a jump `z_k`, approached either
/// from the right (value `F(k)`) or from the left (value `F(k - 1)`). Both
/// gaps are checked at every jump; `F(-1) = 0` covers `x < z_0`.
pub fn dml_kolmogorov(spec: &BinomialSpec) -> f64 {
    let cdf = spec.cdf_table();
    let (mean, sd) = (spec.mean(), spec.sd());
    let mut prev = 0.0;
    let mut sup: f64 = 0.0;
    for (k, &f) in cdf.iter().enumerate() {
        let g = phi((k as f64 - mean) / sd);
        sup = sup.max((f - g).abs()).max((prev - g).abs());
        prev = f;
    }
    sup
}

pub const LABEL_KOLMOGOROV: &str = "d_K";
pub const LABEL_STIRLING: &str = "stirling_ratio";
pub const LABEL_SUP_CDF_ERR: &str = "sup_cdf_err";

/// One `(n, statistic)` entry of a convergence table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: u64,
    pub statistic: f64,
    pub label: String,
}

impl ConvergenceRow {
    pub fn new(n: u64, statistic: f64, label: &str) -> Self {
        debug_assert!(statistic.is_finite());
        ConvergenceRow { n, statistic, label: label.to_string() }
    }
}

/// A row of the de Moivre-Laplace table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmlRow {
    pub n: u64,
    pub p: String,
    pub d_k: f64,
    pub stirling_ratio: f64,
}

/// Kolmogorov distance and Stirling ratio for each `n`, in input order.
pub fn dml_table(p: &Rational, n_list: &[u64]) -> Result<Vec<DmlRow>> {
    let specs = n_list.iter().map(|&n| BinomialSpec::new(n, p.clone())).collect::<Result<Vec<_>>>()?;
    Ok(specs
        .par_iter()
        .map(|spec| DmlRow {
            n: spec.n,
            p: p.to_string(),
            d_k: dml_kolmogorov(spec),
            stirling_ratio: stirling_ratio(spec.n),
        })
        .collect())
}

/// `d_K` rows for a list of `n`.
pub fn kolmogorov_rows(p: &Rational, n_list: &[u64]) -> Result<Vec<ConvergenceRow>> {
    Ok(dml_table(p, n_list)?.into_iter().map(|r| ConvergenceRow::new(r.n, r.d_k, LABEL_KOLMOGOROV)).collect())
}

/// Stirling ratio rows for a list of `n`.
pub fn stirling_rows(n_list: &[u64]) -> Vec<ConvergenceRow> {
    n_list.iter().map(|&n| ConvergenceRow::new(n, stirling_ratio(n), LABEL_STIRLING)).collect()
}
