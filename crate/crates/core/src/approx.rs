//! Simple approximations of finite-variance distributions.
//!
//! [`quantize`] replaces a standardized source `X` by `Y = E[X | cell]` on `K`
//! equal-probability cells. `K` doubles until `E[(X - Y)^2] <= eta / 2`. An
//! affine correction then makes `Y` exactly mean 0 and variance 1, and the
//! final `E[(X - Y)^2] <= eta` is re-checked.
//!
//! Cell conditional means and variances come from closed forms for each source
//! family, so the integrated error is a sum of per-cell variances with no
//! cancellation. [`quadrature_eta`] recomputes the same quantity by adaptive
//! quadrature against the density as an independent check.
//!
//! [`chebyshev_check`] couples `X` and `Y` through one uniform draw and
//! measures how often the normalized sums differ by more than `delta`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::distributions::Open01;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::FiniteDist;
use crate::error::{Error, Result};
use crate::normal::phi;
use crate::quad;
use crate::rational::{self, Rational};
use crate::rng::child_rng;
use crate::summation::{sum, Neumaier};

/// Largest cell count [`quantize`] will try.
pub const MAX_CELLS: usize = 1 << 20;

/// Tail mass dropped by [`quadrature_eta`] on unbounded sources.
const QUADRATURE_TAIL: f64 = 1e-18;

/// Catalog of source laws, each with a closed-form inverse CDF.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    /// Uniform on `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
    /// `E - 1/rate` for `E ~ Exponential(rate)`.
    ExponentialCentered { rate: f64 },
    /// Laplace with location `loc` and scale `scale`.
    Laplace { loc: f64, scale: f64 },
    /// `hi` with probability `p_hi`, else `lo`, plus independent uniform noise
    /// on `[-noise, noise]`. `noise = 0` is a plain two-point law.
    TwoPointPlusNoise { lo: f64, hi: f64, p_hi: f64, noise: f64 },
}

/// A source distribution together with its mean and standard deviation.
///
/// Everything the quantizer sees is standardized: `(X - mean) / sd`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuousSource {
    family: Family,
}

/// Conditional mean and variance of the standardized source on one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellStats {
    pub mean: f64,
    pub var: f64,
}

impl ContinuousSource {
    pub fn new(family: Family) -> Result<Self> {
        let ok = match family {
            Family::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && lo < hi,
            Family::ExponentialCentered { rate } => rate.is_finite() && rate > 0.0,
            Family::Laplace { loc, scale } => loc.is_finite() && scale.is_finite() && scale > 0.0,
            Family::TwoPointPlusNoise { lo, hi, p_hi, noise } => {
                lo.is_finite() && hi.is_finite() && p_hi > 0.0 && p_hi < 1.0 && noise >= 0.0 && hi - lo > 2.0 * noise
            }
        };
        if !ok {
            return Err(Error::invalid("family", format!("bad parameters {family:?}")));
        }
        Ok(ContinuousSource { family })
    }

    /// Uniform on `[-sqrt 3, sqrt 3]`: already mean 0, variance 1.
    pub fn standard_uniform() -> Self {
        let r = 3f64.sqrt();
        ContinuousSource { family: Family::Uniform { lo: -r, hi: r } }
    }

    pub fn exponential() -> Self {
        ContinuousSource { family: Family::ExponentialCentered { rate: 1.0 } }
    }

    pub fn laplace() -> Self {
        ContinuousSource { family: Family::Laplace { loc: 0.0, scale: 1.0 } }
    }

    /// `±1` with equal probability.
    pub fn rademacher() -> Self {
        ContinuousSource { family: Family::TwoPointPlusNoise { lo: -1.0, hi: 1.0, p_hi: 0.5, noise: 0.0 } }
    }

    /// `±1` with equal probability plus uniform noise on `[-1/2, 1/2]`.
    pub fn rademacher_plus_noise() -> Self {
        ContinuousSource { family: Family::TwoPointPlusNoise { lo: -1.0, hi: 1.0, p_hi: 0.5, noise: 0.5 } }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn mean(&self) -> f64 {
        match self.family {
            Family::Uniform { lo, hi } => 0.5 * (lo + hi),
            Family::ExponentialCentered { .. } => 0.0,
            Family::Laplace { loc, .. } => loc,
            Family::TwoPointPlusNoise { lo, hi, p_hi, .. } => p_hi * hi + (1.0 - p_hi) * lo,
        }
    }

    pub fn variance(&self) -> f64 {
        match self.family {
            Family::Uniform { lo, hi } => (hi - lo).powi(2) / 12.0,
            Family::ExponentialCentered { rate } => 1.0 / (rate * rate),
            Family::Laplace { scale, .. } => 2.0 * scale * scale,
            Family::TwoPointPlusNoise { lo, hi, p_hi, noise } => {
                p_hi * (1.0 - p_hi) * (hi - lo).powi(2) + noise * noise / 3.0
            }
        }
    }

    pub fn sd(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Inverse CDF on the original scale, for `u` in `(0, 1)`.
    pub fn inv_cdf(&self, u: f64) -> f64 {
        match self.family {
            Family::Uniform { lo, hi } => lo + (hi - lo) * u,
            Family::ExponentialCentered { rate } => -(-u).ln_1p() / rate - 1.0 / rate,
            Family::Laplace { loc, scale } => {
                if u < 0.5 {
                    loc + scale * (2.0 * u).ln()
                } else {
                    loc - scale * (2.0 * (1.0 - u)).ln()
                }
            }
            Family::TwoPointPlusNoise { lo, hi, p_hi, noise } => {
                let p_lo = 1.0 - p_hi;
                if u < p_lo {
                    lo - noise + 2.0 * noise * u / p_lo
                } else {
                    hi - noise + 2.0 * noise * (u - p_lo) / p_hi
                }
            }
        }
    }

    /// The level-`1 - tail` quantile, accurate even where `1 - tail` rounds
    /// to 1.
    pub fn upper_quantile(&self, tail: f64) -> f64 {
        match self.family {
            Family::Uniform { .. } | Family::TwoPointPlusNoise { .. } => self.inv_cdf(1.0 - tail),
            Family::ExponentialCentered { rate } => -tail.ln() / rate - 1.0 / rate,
            Family::Laplace { loc, scale } => loc - scale * (2.0 * tail).ln(),
        }
    }

    /// `(x - mean) / sd`.
    pub fn standardize(&self, x: f64) -> f64 {
        (x - self.mean()) / self.sd()
    }

    /// Inverse CDF of the standardized source.
    pub fn std_inv_cdf(&self, u: f64) -> f64 {
        self.standardize(self.inv_cdf(u))
    }

    /// Density on the original scale; `None` for a plain two-point law.
    pub fn density(&self, x: f64) -> Option<f64> {
        Some(match self.family {
            Family::Uniform { lo, hi } => {
                if (lo..=hi).contains(&x) {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            Family::ExponentialCentered { rate } => {
                let e = x + 1.0 / rate;
                if e < 0.0 {
                    0.0
                } else {
                    rate * (-rate * e).exp()
                }
            }
            Family::Laplace { loc, scale } => (-(x - loc).abs() / scale).exp() / (2.0 * scale),
            Family::TwoPointPlusNoise { lo, hi, p_hi, noise } => {
                if noise == 0.0 {
                    return None;
                }
                let box_density = |c: f64| if (x - c).abs() <= noise { 1.0 / (2.0 * noise) } else { 0.0 };
                (1.0 - p_hi) * box_density(lo) + p_hi * box_density(hi)
            }
        })
    }

    /// The atoms `(P(X < value), standardized value)` when the source is a
    /// plain two-point law.
    fn two_point_atoms(&self) -> Option<[(f64, f64); 2]> {
        match self.family {
            Family::TwoPointPlusNoise { lo, hi, p_hi, noise: 0.0 } => {
                Some([(0.0, self.standardize(lo)), (1.0 - p_hi, self.standardize(hi))])
            }
            _ => None,
        }
    }

    /// Conditional mean and variance of the standardized source given
    /// `U in [u0, u1]`, where `X = inv_cdf(U)`.
    pub fn cell_stats(&self, u0: f64, u1: f64) -> CellStats {
        let raw = self.raw_cell_stats(u0, u1);
        let sd = self.sd();
        CellStats { mean: (raw.mean - self.mean()) / sd, var: raw.var / (sd * sd) }
    }

    fn raw_cell_stats(&self, u0: f64, u1: f64) -> CellStats {
        match self.family {
            Family::Uniform { lo, hi } => uniform_piece(lo, hi - lo, u0, u1),
            Family::ExponentialCentered { rate } => {
                let s = exponential_piece(rate, u0, u1);
                CellStats { mean: s.mean - 1.0 / rate, var: s.var }
            }
            Family::Laplace { loc, scale } => {
                let mut pieces = Vec::with_capacity(2);
                if u0 < 0.5 {
                    // Left half: X = loc - E with E exponential at level 1 - 2u.
                    let hi = u1.min(0.5);
                    let s = exponential_piece(1.0 / scale, 1.0 - 2.0 * hi, 1.0 - 2.0 * u0);
                    pieces.push((hi - u0, CellStats { mean: loc - s.mean, var: s.var }));
                }
                if u1 > 0.5 {
                    let lo = u0.max(0.5);
                    let s = exponential_piece(1.0 / scale, 2.0 * lo - 1.0, 2.0 * u1 - 1.0);
                    pieces.push((u1 - lo, CellStats { mean: loc + s.mean, var: s.var }));
                }
                combine(&pieces)
            }
            Family::TwoPointPlusNoise { lo, hi, p_hi, noise } => {
                let p_lo = 1.0 - p_hi;
                let mut pieces = Vec::with_capacity(2);
                if u0 < p_lo {
                    let top = u1.min(p_lo);
                    pieces.push((top - u0, uniform_piece(lo - noise, 2.0 * noise / p_lo, u0, top)));
                }
                if u1 > p_lo {
                    let bottom = u0.max(p_lo);
                    let shift = hi - noise - 2.0 * noise * p_lo / p_hi;
                    pieces.push((u1 - bottom, uniform_piece(shift, 2.0 * noise / p_hi, bottom, u1)));
                }
                combine(&pieces)
            }
        }
    }
}

impl fmt::Display for ContinuousSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Uniform { lo, hi } => write!(f, "uniform[{lo}, {hi}]"),
            Family::ExponentialCentered { rate } => write!(f, "exp(rate {rate}) centred"),
            Family::Laplace { loc, scale } => write!(f, "laplace(loc {loc}, scale {scale})"),
            Family::TwoPointPlusNoise { lo, hi, p_hi, noise } => {
                write!(f, "two-point({lo}, {hi}; p_hi {p_hi}) + uniform noise ±{noise}")
            }
        }
    }
}

impl FromStr for ContinuousSource {
    type Err = Error;

    /// `uniform`, `exp`, `laplace`, `two-point` or `two-point-noise`, each in
    /// its standard parametrization.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::standard_uniform()),
            "exp" | "exponential" => Ok(Self::exponential()),
            "laplace" => Ok(Self::laplace()),
            "two-point" => Ok(Self::rademacher()),
            "two-point-noise" => Ok(Self::rademacher_plus_noise()),
            other => Err(Error::Parse {
                input: other.to_string(),
                reason: "expected uniform, exp, laplace, two-point or two-point-noise".into(),
            }),
        }
    }
}

/// `x = base + slope * u` on `[u0, u1]`.
fn uniform_piece(base: f64, slope: f64, u0: f64, u1: f64) -> CellStats {
    let width = slope * (u1 - u0);
    CellStats { mean: base + slope * 0.5 * (u0 + u1), var: width * width / 12.0 }
}

/// Exponential(`rate`) conditioned on its quantile level lying in `[v0, v1]`.
///
/// Memorylessness reduces this to an exponential truncated to `[0, L]` and
/// shifted to the lower quantile.
fn exponential_piece(rate: f64, v0: f64, v1: f64) -> CellStats {
    let start = -(-v0).ln_1p() / rate;
    if v1 >= 1.0 {
        return CellStats { mean: start + 1.0 / rate, var: 1.0 / (rate * rate) };
    }
    // t = rate * L = ln((1 - v0) / (1 - v1))
    let t = (-v0).ln_1p() - (-v1).ln_1p();
    let (m, v) = if t < 1e-2 {
        let t2 = t * t;
        (t / 2.0 - t2 / 12.0 + t2 * t2 / 720.0, t2 / 12.0 - t2 * t2 / 240.0 + t2 * t2 * t2 / 6048.0)
    } else {
        let em1 = t.exp_m1();
        (1.0 - t / em1, 1.0 - t * t * (em1 + 1.0) / (em1 * em1))
    };
    CellStats { mean: start + m / rate, var: v / (rate * rate) }
}

/// Mean and variance of a mixture of pieces weighted by probability mass.
fn combine(pieces: &[(f64, CellStats)]) -> CellStats {
    let total: f64 = pieces.iter().map(|(w, _)| w).sum();
    let mean = pieces.iter().map(|(w, s)| w * s.mean).sum::<f64>() / total;
    let var = pieces.iter().map(|(w, s)| w * (s.var + (s.mean - mean).powi(2))).sum::<f64>() / total;
    CellStats { mean, var }
}

/// Output of [`quantize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizerResult {
    /// The simple approximation `Y` as an exact distribution.
    pub simple: FiniteDist,
    /// `E[(X - Y)^2]` for the final, corrected `Y`.
    pub eta_achieved: f64,
    pub eta_requested: f64,
    /// Number of cells.
    pub cells: usize,
    /// Interior cell boundaries on the standardized scale.
    pub boundaries: Vec<f64>,
    /// Cell edges on the probability scale, `0 = u_0 < ... < u_K = 1`.
    pub u_edges: Vec<f64>,
    /// Corrected value of `Y` on each cell.
    pub values: Vec<f64>,
    /// `(K, E[(X - E[X | cell])^2])` for every `K` tried.
    pub schedule: Vec<(usize, f64)>,
}

impl QuantizerResult {
    /// Index of the cell containing probability level `u`.
    pub fn cell_of(&self, u: f64) -> usize {
        let inner = &self.u_edges[1..self.u_edges.len() - 1];
        inner.partition_point(|&e| e <= u)
    }

    /// `Y` for the outcome at probability level `u`.
    pub fn value_for_u(&self, u: f64) -> f64 {
        self.values[self.cell_of(u)]
    }
}

/// Builds a simple, mean-zero, variance-one `Y` with `E[(X - Y)^2] <= eta`
/// for the standardized source `X`.
pub fn quantize(src: &ContinuousSource, eta: f64) -> Result<QuantizerResult> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::invalid("eta", format!("{eta} is not a positive number")));
    }
    if let Some(atoms) = src.two_point_atoms() {
        // Already simple: Y = X.
        let values: Vec<f64> = atoms.iter().map(|a| a.1).collect();
        let u_edges = vec![0.0, atoms[1].0, 1.0];
        return Ok(QuantizerResult {
            simple: snap(&values, &[1.0 - atoms[1].0, atoms[1].0])?,
            eta_achieved: 0.0,
            eta_requested: eta,
            cells: 2,
            boundaries: vec![0.5 * (values[0] + values[1])],
            u_edges,
            values,
            schedule: vec![(2, 0.0)],
        });
    }

    let mut schedule = Vec::new();
    let mut k = 1usize;
    loop {
        let u_edges: Vec<f64> = (0..=k).map(|j| j as f64 / k as f64).collect();
        let stats: Vec<CellStats> = u_edges.windows(2).map(|w| src.cell_stats(w[0], w[1])).collect();
        let w = 1.0 / k as f64;
        let integrated = sum(stats.iter().map(|s| w * s.var));
        schedule.push((k, integrated));
        if integrated <= eta / 2.0 {
            let mean = sum(stats.iter().map(|s| w * s.mean));
            let var = sum(stats.iter().map(|s| w * (s.mean - mean).powi(2)));
            let sd = var.sqrt();
            let values: Vec<f64> = stats.iter().map(|s| (s.mean - mean) / sd).collect();
            let eta_achieved = sum(stats.iter().zip(&values).map(|(s, v)| w * (s.var + (s.mean - v).powi(2))));
            if eta_achieved <= eta {
                let boundaries = u_edges[1..k].iter().map(|&u| src.std_inv_cdf(u)).collect();
                return Ok(QuantizerResult {
                    simple: snap(&values, &vec![w; k])?,
                    eta_achieved,
                    eta_requested: eta,
                    cells: k,
                    boundaries,
                    u_edges,
                    values,
                    schedule,
                });
            }
        }
        k *= 2;
        if k > MAX_CELLS {
            return Err(Error::EtaTooSmallForBudget { eta, max_cells: MAX_CELLS });
        }
    }
}

/// Exact distribution with the given `f64` values and masses. Masses are
/// `1/K` or complementary pairs and so are summed exactly as rationals.
fn snap(values: &[f64], masses: &[f64]) -> Result<FiniteDist> {
    let mut map: BTreeMap<Rational, Rational> = BTreeMap::new();
    let k = masses.len();
    let equal = masses.iter().all(|&m| m == masses[0]);
    for (i, (&v, &m)) in values.iter().zip(masses).enumerate() {
        let value = rational::from_f64(v).ok_or_else(|| Error::invalid("values", "non-finite cell value"))?;
        let mass = if equal {
            Rational::new(BigInt::one(), BigInt::from(k))
        } else if i + 1 < k {
            rational::from_f64(m).expect("finite")
        } else {
            Rational::one() - masses[..i].iter().map(|&m| rational::from_f64(m).expect("finite")).sum::<Rational>()
        };
        *map.entry(value).or_insert_with(Rational::zero) += mass;
    }
    FiniteDist::new(map)
}

/// `E[(X - Y)^2]` by adaptive quadrature against the source density, cell
/// by cell on the original scale. Unbounded tails are cut where the omitted
/// mass is `1e-18`. Each cell gets `tol / K` of the budget, but never less
/// than `1e-13`.
pub fn quadrature_eta(src: &ContinuousSource, q: &QuantizerResult, tol: f64) -> Result<f64> {
    if src.density(src.mean()).is_none() && src.two_point_atoms().is_some() {
        return Err(Error::invalid("source", "no density"));
    }
    let (mean, sd) = (src.mean(), src.sd());
    let lower = src.inv_cdf(QUADRATURE_TAIL);
    let upper = src.upper_quantile(QUADRATURE_TAIL);
    let cells = q.cells;
    let per_cell_tol = (tol / cells as f64).max(1e-13);
    let mut total = Neumaier::default();
    for j in 0..cells {
        let a = if j == 0 { lower } else { src.inv_cdf(q.u_edges[j]) };
        let b = if j + 1 == cells { upper } else { src.inv_cdf(q.u_edges[j + 1]) };
        let y = q.values[j];
        let f = |x: f64| {
            let d = (x - mean) / sd - y;
            d * d * src.density(x).unwrap_or(0.0)
        };
        total.add(quad::adaptive_simpson(f, a, b, per_cell_tol)?);
    }
    Ok(total.total())
}

/// A coupled draw `(X, Y)`: one uniform level drives both.
pub fn coupled_sample<R: Rng + ?Sized>(src: &ContinuousSource, q: &QuantizerResult, rng: &mut R) -> (f64, f64) {
    coupled_pair(src, q, rng.sample(Open01))
}

/// The coupled pair at probability level `u`.
pub fn coupled_pair(src: &ContinuousSource, q: &QuantizerResult, u: f64) -> (f64, f64) {
    (src.std_inv_cdf(u), q.value_for_u(u))
}

/// Parameters of [`chebyshev_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevCheckConfig {
    pub delta: f64,
    pub epsilon: f64,
    pub n: u64,
    pub samples: u64,
    pub seed: u64,
    /// Where `P(S_n <= x)` and `P(T_n <= x)` are compared.
    pub x: f64,
}

impl ChebyshevCheckConfig {
    pub fn new(delta: f64, epsilon: f64, n: u64, samples: u64, seed: u64) -> Result<Self> {
        let cfg = ChebyshevCheckConfig { delta, epsilon, n, samples, seed, x: 0.0 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_x(mut self, x: f64) -> Self {
        self.x = x;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::invalid("delta", "must be positive"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::invalid("epsilon", "must be in (0, 1)"));
        }
        if self.n == 0 {
            return Err(Error::invalid("n", "must be at least 1"));
        }
        if self.samples == 0 {
            return Err(Error::invalid("samples", "must be at least 1"));
        }
        if !self.x.is_finite() {
            return Err(Error::invalid("x", "must be finite"));
        }
        Ok(())
    }

    /// `eta = delta^2 * epsilon`, which makes the Chebyshev bound equal
    /// `epsilon`.
    pub fn eta(&self) -> f64 {
        self.delta * self.delta * self.epsilon
    }
}

/// Result of [`chebyshev_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevReport {
    pub config: ChebyshevCheckConfig,
    pub eta: f64,
    pub eta_achieved: f64,
    pub cells: usize,
    /// `eta / delta^2`.
    pub bound: f64,
    /// Fraction of replications with `|S_n - T_n| > delta`.
    pub empirical: f64,
    /// `3 sqrt(epsilon (1 - epsilon) / samples)`.
    pub mc_band: f64,
    pub pass: bool,
    pub cdf_s: f64,
    pub cdf_t: f64,
    pub phi_x: f64,
    /// `|P(S_n <= x) - P(T_n <= x)|`, estimated.
    pub cdf_gap: f64,
    /// `2 epsilon` plus three standard errors of both estimates.
    pub cdf_gap_bound: f64,
    pub cdf_pass: bool,
}

/// Monte Carlo check of `P(|S_n - T_n| > delta) <= eta / delta^2`, where
/// `S_n` and `T_n` are the normalized sums of `n` coupled draws of `X` and `Y`.
///
/// Replication `r` uses `child_seed(seed, r)`.
pub fn chebyshev_check(src: &ContinuousSource, cfg: &ChebyshevCheckConfig) -> Result<ChebyshevReport> {
    cfg.validate()?;
    let eta = cfg.eta();
    let q = quantize(src, eta)?;
    let root_n = (cfg.n as f64).sqrt();
    let (far, s_below, t_below) = (0..cfg.samples)
        .into_par_iter()
        .map(|r| {
            let mut rng = child_rng(cfg.seed, r);
            let (mut sx, mut sy) = (0.0, 0.0);
            for _ in 0..cfg.n {
                let (x, y) = coupled_sample(src, &q, &mut rng);
                sx += x;
                sy += y;
            }
            let (s, t) = (sx / root_n, sy / root_n);
            ((s - t).abs() > cfg.delta, s <= cfg.x, t <= cfg.x)
        })
        .map(|(a, b, c)| (a as u64, b as u64, c as u64))
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));

    let samples = cfg.samples as f64;
    let empirical = far as f64 / samples;
    let bound = eta / (cfg.delta * cfg.delta);
    let mc_band = 3.0 * (cfg.epsilon * (1.0 - cfg.epsilon) / samples).sqrt();
    let (cdf_s, cdf_t) = (s_below as f64 / samples, t_below as f64 / samples);
    let cdf_gap = (cdf_s - cdf_t).abs();
    let se = |p: f64| (p * (1.0 - p) / samples).sqrt();
    let cdf_gap_bound = 2.0 * cfg.epsilon + 3.0 * (se(cdf_s) + se(cdf_t));
    Ok(ChebyshevReport {
        config: *cfg,
        eta,
        eta_achieved: q.eta_achieved,
        cells: q.cells,
        bound,
        empirical,
        mc_band,
        pass: empirical <= bound + mc_band,
        cdf_s,
        cdf_t,
        phi_x: phi(cfg.x),
        cdf_gap,
        cdf_gap_bound,
        cdf_pass: cdf_gap <= cdf_gap_bound,
    })
}
