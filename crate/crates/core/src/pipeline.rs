//! End-to-end numerical checks of the CLT for simple distributions.
//!
//! - [`run_clt_table`]: sup over an `x` grid of `|P(S_n <= x) - Φ(x)|`, where
//!   `S_n` is the normalized `n`-fold sum computed by convolution.
//! - [`verify_variance_accounting`]: `Σ w_i E[Y_i^2]` for a decomposition.
//! - [`verify_theta_lln`]: empirical frequencies of the mixture selector.
//! - [`run_mixture_path_cdf`]: the exact CDF of the sum conditional on one
//!   sampled selector path. Its average over paths is the unconditional CDF.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decompose::{recompose, Mixture, MixtureSampler, TwoValued};
use crate::dist::{self, convolve_power, FiniteDist, Mode, Threshold, EXACT_ATOM_BUDGET};
use crate::error::{Error, Result};
use crate::normal::{phi, ConvergenceRow, LABEL_SUP_CDF_ERR};
use crate::rational::{self, Rational};
use crate::rng::{child_seed, seeded_rng};

/// How far the variance of a standardized input may sit from 1. Standardizing
/// with an irrational standard deviation leaves a residual near 1e-60.
pub const VARIANCE_RESIDUAL: f64 = 1e-40;

/// A CLT convergence experiment on a mean-zero, variance-one distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct CltExperiment {
    dist: FiniteDist,
    n_list: Vec<u64>,
    x_grid: Vec<f64>,
    mode: Mode,
}

impl CltExperiment {
    pub fn new(dist: FiniteDist, n_list: Vec<u64>, x_grid: Vec<f64>, mode: Mode) -> Result<Self> {
        let mean = dist.mean();
        if !mean.is_zero() {
            return Err(Error::NonZeroMean { mean });
        }
        let residual = (dist.variance() - Rational::one()).abs();
        if residual > Rational::from_float(VARIANCE_RESIDUAL).expect("finite") {
            return Err(Error::invalid("dist", format!("variance is {} (expected 1)", dist.variance())));
        }
        check_n_list(&n_list)?;
        if x_grid.is_empty() || x_grid.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("x_grid", "must be a non-empty list of finite numbers"));
        }
        Ok(CltExperiment { dist, n_list, x_grid, mode })
    }

    /// Standardizes `dist` first.
    pub fn standardized(dist: &FiniteDist, n_list: Vec<u64>, x_grid: Vec<f64>, mode: Mode) -> Result<Self> {
        Self::new(dist.standardize()?, n_list, x_grid, mode)
    }

    pub fn dist(&self) -> &FiniteDist {
        &self.dist
    }

    pub fn n_list(&self) -> &[u64] {
        &self.n_list
    }

    pub fn x_grid(&self) -> &[f64] {
        &self.x_grid
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }
}

/// Nonempty, at least 1, strictly increasing.
pub fn check_n_list(n_list: &[u64]) -> Result<()> {
    if n_list.is_empty() {
        return Err(Error::invalid("n_list", "must not be empty"));
    }
    if n_list[0] == 0 {
        return Err(Error::invalid("n_list", "entries must be at least 1"));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("n_list", "must be strictly increasing"));
    }
    Ok(())
}

/// 161 points, `-4, -3.95, ..., 4`.
pub fn default_grid() -> Vec<f64> {
    (0..=160).map(|i| -4.0 + 0.05 * i as f64).collect()
}

/// Parses `lo:hi:step` into `lo, lo + step, ...` up to `hi` inclusive.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Parse { input: spec.to_string(), reason: format!("{s:?} is not a finite number") })
    };
    let [lo, hi, step] = parts[..] else {
        return Err(Error::Parse { input: spec.to_string(), reason: "expected lo:hi:step".into() });
    };
    let (lo, hi, step) = (parse(lo)?, parse(hi)?, parse(step)?);
    if step <= 0.0 {
        return Err(Error::invalid("grid", "step must be positive"));
    }
    if hi < lo {
        return Err(Error::invalid("grid", "hi must not be below lo"));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| lo + step * i as f64).collect())
}

/// For each `n`: `sup_x |P(S_n <= x) - Φ(x)|` over the experiment's grid.
///
/// Rows are computed in parallel and returned in `n_list` order.
pub fn run_clt_table(e: &CltExperiment) -> Result<Vec<ConvergenceRow>> {
    e.n_list
        .par_iter()
        .map(|&n| {
            let law = convolve_power(&e.dist, n, e.mode)?;
            let cdf = law.scaled_cdf_evaluator(n);
            let sup = e.x_grid.iter().map(|&x| (cdf.eval(x) - phi(x)).abs()).fold(0.0, f64::max);
            Ok(ConvergenceRow::new(n, sup, LABEL_SUP_CDF_ERR))
        })
        .collect()
}

/// `Σ w_i E[Y_i^2]`: exactly 1 when `m` decomposes a variance-one input.
pub fn verify_variance_accounting(m: &Mixture) -> Rational {
    m.weighted_second_moment()
}

/// Empirical selector frequencies against the mixture weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaFrequencyReport {
    pub m: usize,
    pub n: u64,
    pub seed: u64,
    pub weights: Vec<String>,
    pub counts: Vec<u64>,
    pub max_abs_freq_err: f64,
}

/// One CSV row of the frequency check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlnRow {
    pub component: usize,
    pub weight: String,
    pub emp_freq: f64,
    pub abs_err: f64,
}

impl ThetaFrequencyReport {
    pub fn rows(&self) -> Vec<LlnRow> {
        self.weights
            .iter()
            .zip(&self.counts)
            .enumerate()
            .map(|(i, (w, &c))| {
                let emp_freq = c as f64 / self.n as f64;
                let weight = rational::to_f64(&rational::parse_rational(w).expect("rendered rational"));
                LlnRow { component: i, weight: w.clone(), emp_freq, abs_err: (emp_freq - weight).abs() }
            })
            .collect()
    }
}

/// Draws `θ_1..θ_n` by the mixture weights and tallies them.
pub fn verify_theta_lln(m: &Mixture, n: u64, seed: u64) -> Result<ThetaFrequencyReport> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    let counts = theta_counts(&m.sampler(), m.len(), n, seed);
    let max_abs_freq_err =
        m.weights().zip(&counts).map(|(w, &c)| (c as f64 / n as f64 - rational::to_f64(w)).abs()).fold(0.0, f64::max);
    Ok(ThetaFrequencyReport {
        m: m.len(),
        n,
        seed,
        weights: m.weights().map(|w| w.to_string()).collect(),
        counts,
        max_abs_freq_err,
    })
}

fn theta_counts(sampler: &MixtureSampler, m: usize, n: u64, seed: u64) -> Vec<u64> {
    let mut rng = seeded_rng(seed);
    let mut counts = vec![0u64; m];
    for _ in 0..n {
        counts[sampler.sample_theta(&mut rng)] += 1;
    }
    counts
}

/// Per-component counts of one selector path of length `n`.
pub fn sample_path_counts(m: &Mixture, n: u64, seed: u64) -> Vec<u64> {
    theta_counts(&m.sampler(), m.len(), n, seed)
}

/// Exact law of `k` independent draws of `y`, summed: the support is
/// `j a - (k - j) b` for `j = 0..=k` with binomial weights.
pub fn grouped_sum_law(y: &TwoValued, k: u64) -> FiniteDist {
    if y.is_degenerate() || k == 0 {
        return FiniteDist::point(Rational::zero());
    }
    let (a, b) = (y.pos(), y.neg());
    let p = y.prob_pos();
    let q = y.prob_neg();
    let atoms = (0..=k).map(|j| {
        let value = a * Rational::from_integer(BigInt::from(j)) - b * Rational::from_integer(BigInt::from(k - j));
        let c = num_integer::binomial(BigInt::from(k), BigInt::from(j));
        let prob = Rational::from_integer(c)
            * num_traits::pow(p.clone(), j as usize)
            * num_traits::pow(q.clone(), (k - j) as usize);
        (value, prob)
    });
    FiniteDist::new(atoms).expect("binomial law is valid")
}

/// `P(Σ_k Y_{k, i_k} <= x sqrt(n))` for a fixed path summarized by its
/// per-component `counts` (`n = Σ counts`). Exact up to the final rounding.
pub fn path_cdf(m: &Mixture, counts: &[u64], x: f64) -> Result<f64> {
    if counts.len() != m.len() {
        return Err(Error::invalid("counts", format!("{} entries for {} components", counts.len(), m.len())));
    }
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return Err(Error::invalid("counts", "path is empty"));
    }
    let t = match dist::scaled_threshold(n, x) {
        Threshold::Nan => return Ok(f64::NAN),
        Threshold::BelowAll => return Ok(0.0),
        Threshold::AboveAll => return Ok(1.0),
        Threshold::At(t) => t,
    };
    let groups: Vec<(&TwoValued, u64)> = m
        .components()
        .iter()
        .zip(counts)
        .filter(|(c, &k)| k > 0 && !c.dist.is_degenerate())
        .map(|(c, &k)| (&c.dist, k))
        .collect();
    if groups.is_empty() {
        return Ok(if t.is_negative() { 0.0 } else { 1.0 });
    }
    match IntLattice::from_groups(&groups)? {
        Some(lattice) => Ok(lattice.cdf(&t)),
        None => {
            let projected = groups.iter().fold(1u128, |acc, (_, k)| acc.saturating_mul(*k as u128 + 1));
            if projected > EXACT_ATOM_BUDGET {
                return Err(Error::ExactBudgetExceeded { projected, budget: EXACT_ATOM_BUDGET });
            }
            let law = groups
                .iter()
                .map(|(y, k)| grouped_sum_law(y, *k))
                .reduce(|acc, g| acc.convolve(&g))
                .expect("non-empty");
            Ok(rational::to_f64(&law.cdf(&t)))
        }
    }
}

/// Exact law on `offset + i * step` with integer masses over one common
/// denominator. Avoids per-operation gcds in the path convolutions.
struct IntLattice {
    offset: Rational,
    step: Rational,
    masses: Vec<BigUint>,
    denominator: BigUint,
}

impl IntLattice {
    /// `None` when the lattice would exceed the atom budget.
    fn from_groups(groups: &[(&TwoValued, u64)]) -> Result<Option<Self>> {
        let step = groups.iter().fold(Rational::zero(), |g, (y, _)| rational::gcd(&g, &(y.pos() + y.neg())));
        let offset: Rational = groups.iter().map(|(y, k)| -(y.neg() * Rational::from_integer(BigInt::from(*k)))).sum();
        let mut spans = Vec::with_capacity(groups.len());
        let mut cells: u128 = 1;
        for (y, k) in groups {
            let span = ((y.pos() + y.neg()) / &step).to_integer().to_u128().unwrap_or(u128::MAX);
            cells = cells.saturating_add(span.saturating_mul(*k as u128));
            spans.push(span as usize);
        }
        if cells > EXACT_ATOM_BUDGET {
            return Ok(None);
        }

        let mut masses = vec![BigUint::one()];
        let mut denominator = BigUint::one();
        for ((y, k), span) in groups.iter().zip(spans) {
            let (num, den) = binomial_numerators(y.prob_pos(), *k);
            let mut next = vec![BigUint::zero(); masses.len() + span * *k as usize];
            for (i, mass) in masses.iter().enumerate().filter(|(_, m)| !m.is_zero()) {
                for (j, w) in num.iter().enumerate() {
                    next[i + j * span] += mass * w;
                }
            }
            masses = next;
            denominator *= den;
        }
        Ok(Some(IntLattice { offset, step, masses, denominator }))
    }

    fn cdf(&self, t: &Rational) -> f64 {
        let idx = ((t - &self.offset) / &self.step).floor().to_integer();
        if idx.is_negative() {
            return 0.0;
        }
        let idx = idx.to_usize().map_or(self.masses.len() - 1, |i| i.min(self.masses.len() - 1));
        let num: BigUint = self.masses[..=idx].iter().sum();
        rational::big_ratio_to_f64(&num, &self.denominator)
    }
}

/// `C(k, j) r^j (s - r)^(k - j)` for `j = 0..=k`, and `s^k`, where `p = r / s`.
fn binomial_numerators(p: &Rational, k: u64) -> (Vec<BigUint>, BigUint) {
    let r = p.numer().magnitude().clone();
    let s = p.denom().magnitude().clone();
    let q = &s - &r;
    let mut out = Vec::with_capacity(k as usize + 1);
    let mut term = num_traits::pow(q.clone(), k as usize);
    out.push(term.clone());
    for j in 0..k {
        term = term * BigUint::from(k - j) * &r / (BigUint::from(j + 1) * &q);
        out.push(term.clone());
    }
    (out, num_traits::pow(s, k as usize))
}

/// Samples one selector path of length `n` from `seed` and returns the exact
/// conditional CDF of the normalized sum at `x` given that path.
pub fn run_mixture_path_cdf(m: &Mixture, n: u64, x: f64, seed: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    path_cdf(m, &sample_path_counts(m, n, seed), x)
}

/// Exact unconditional `P(S_n <= x)` for the recomposed mixture.
pub fn unconditional_cdf(m: &Mixture, n: u64, x: f64) -> Result<f64> {
    Ok(convolve_power(&recompose(m), n, Mode::Exact)?.cdf_scaled(n, x))
}

/// Summary of [`run_mixture_path_cdf`] over many independent paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEnsemble {
    pub values: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation of the per-path values.
    pub std_dev: f64,
    /// `std_dev / sqrt(paths)`.
    pub std_err: f64,
}

/// Runs `paths` independent paths; path `i` uses `child_seed(seed, i)`.
pub fn path_ensemble(m: &Mixture, n: u64, x: f64, paths: usize, seed: u64) -> Result<PathEnsemble> {
    if paths < 2 {
        return Err(Error::invalid("paths", "need at least 2"));
    }
    let values = (0..paths as u64)
        .into_par_iter()
        .map(|i| run_mixture_path_cdf(m, n, x, child_seed(seed, i)))
        .collect::<Result<Vec<f64>>>()?;
    let k = paths as f64;
    let mean = values.iter().sum::<f64>() / k;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    let std_dev = var.sqrt();
    Ok(PathEnsemble { values, mean, std_dev, std_err: std_dev / k.sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::decompose;
    use crate::normal::BinomialSpec;
    use crate::rational::{int, ratio};

    fn d(s: &str) -> FiniteDist {
        s.parse().unwrap()
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("-2:2:1").unwrap(), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_eq!(parse_grid("-4:4:0.05").unwrap().len(), 161);
        assert_eq!(default_grid().len(), 161);
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("a:1:1").is_err());
    }

    #[test]
    fn experiment_validation() {
        let r = FiniteDist::rademacher();
        assert!(CltExperiment::new(r.clone(), vec![], vec![0.0], Mode::Exact).is_err());
        assert!(CltExperiment::new(r.clone(), vec![4, 4], vec![0.0], Mode::Exact).is_err());
        assert!(CltExperiment::new(r.clone(), vec![1], vec![f64::NAN], Mode::Exact).is_err());
        assert!(CltExperiment::new(d("-1:1/3,0:1/3,1:1/3"), vec![1], vec![0.0], Mode::Exact).is_err());
        assert!(
            CltExperiment::new(FiniteDist::bernoulli(ratio(1, 2)).unwrap(), vec![1], vec![0.0], Mode::Exact).is_err()
        );
        assert!(CltExperiment::standardized(&d("-1:1/3,0:1/3,1:1/3"), vec![1], vec![0.0], Mode::Exact).is_ok());
    }

    #[test]
    fn rademacher_single_draw_three_points() {
        let e = CltExperiment::new(FiniteDist::rademacher(), vec![1], vec![-2.0, 0.0, 2.0], Mode::Exact).unwrap();
        let rows = run_clt_table(&e).unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].statistic - phi(-2.0)).abs() < 1e-15);
        assert!((rows[0].statistic - 0.02275).abs() < 1e-5);
    }

    #[test]
    fn rademacher_at_zero_matches_binomial() {
        // The sum of n Rademacher draws is 2B - n with B ~ Binomial(n, 1/2).
        for n in [2u64, 8, 32] {
            let spec = BinomialSpec::new(n, ratio(1, 2)).unwrap();
            let oracle = rational::to_f64(&spec.cdf((n / 2) as i64).unwrap());
            let e = CltExperiment::new(FiniteDist::rademacher(), vec![n], vec![0.0], Mode::LatticeFloat).unwrap();
            let row = &run_clt_table(&e).unwrap()[0];
            assert!((row.statistic - (oracle - 0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn variance_accounting_examples() {
        let s = d("-1:1/3,0:1/3,1:1/3").standardize().unwrap();
        assert_eq!(verify_variance_accounting(&decompose(&s).unwrap()), s.variance());
        assert!(verify_variance_accounting(&decompose(&FiniteDist::rademacher()).unwrap()).is_one());
        assert!(verify_variance_accounting(&decompose(&FiniteDist::point(int(0))).unwrap()).is_zero());
    }

    #[test]
    fn lln_single_component_is_exact() {
        let m = decompose(&FiniteDist::rademacher()).unwrap();
        for n in [1, 10, 1000] {
            let r = verify_theta_lln(&m, n, 3).unwrap();
            assert_eq!(r.max_abs_freq_err, 0.0);
            assert_eq!(r.counts, vec![n]);
        }
        assert!(verify_theta_lln(&m, 0, 3).is_err());
    }

    #[test]
    fn lln_report_rows() {
        let m = decompose(&d("-1:1/3,0:1/3,1:1/3")).unwrap();
        let r = verify_theta_lln(&m, 10_000, 5).unwrap();
        assert_eq!(r.counts.iter().sum::<u64>(), 10_000);
        let rows = r.rows();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].weight, "1/3");
        let max = rows.iter().map(|r| r.abs_err).fold(0.0, f64::max);
        assert_eq!(max, r.max_abs_freq_err);
    }

    #[test]
    fn grouped_sums_match_repeated_convolution() {
        let ys = [
            TwoValued::balanced(int(1), int(1)).unwrap(),
            TwoValued::balanced(int(2), int(1)).unwrap(),
            TwoValued::balanced(ratio(1, 3), ratio(5, 2)).unwrap(),
        ];
        for y in &ys {
            let mut acc = FiniteDist::point(int(0));
            for k in 1..=10 {
                acc = acc.convolve(&y.law());
                assert_eq!(grouped_sum_law(y, k), acc);
            }
        }
        assert_eq!(grouped_sum_law(&TwoValued::zero(), 5), FiniteDist::point(int(0)));
    }

    #[test]
    fn single_component_path_equals_unconditional() {
        let m = decompose(&FiniteDist::rademacher()).unwrap();
        for (n, x) in [(1, 0.0), (7, 0.3), (16, -0.5), (33, 1.2)] {
            let path = run_mixture_path_cdf(&m, n, x, 9).unwrap();
            assert_eq!(path, unconditional_cdf(&m, n, x).unwrap());
        }
        assert_eq!(run_mixture_path_cdf(&m, 1, 50.0, 0).unwrap(), 1.0);
    }

    #[test]
    fn path_cdf_matches_direct_convolution() {
        let m = decompose(&d("-2:1/4,-1/3:1/4,1/2:1/4,11/6:1/4")).unwrap();
        let counts: Vec<u64> = (0..m.len() as u64).map(|i| 3 + i).collect();
        let n: u64 = counts.iter().sum();
        let groups: Vec<FiniteDist> =
            m.components().iter().zip(&counts).map(|(c, &k)| grouped_sum_law(&c.dist, k)).collect();
        let law = groups.iter().skip(1).fold(groups[0].clone(), |acc, g| acc.convolve(g));
        for x in [-1.0, -0.2, 0.0, 0.4, 1.5] {
            let direct = law.cdf_scaled(n, x);
            assert!((path_cdf(&m, &counts, x).unwrap() - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn path_average_tracks_unconditional() {
        let m = decompose(&d("-3:1/5,0:1/5,1:3/5")).unwrap();
        let (n, x) = (12, 0.25);
        let ens = path_ensemble(&m, n, x, 200, 77).unwrap();
        let exact = unconditional_cdf(&m, n, x).unwrap();
        assert!((ens.mean - exact).abs() <= 3.0 * ens.std_err, "{} vs {exact} (se {})", ens.mean, ens.std_err);
    }
}
