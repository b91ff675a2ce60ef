//! Finite-support distributions.
//!
//! [`FiniteDist`] keeps values and probabilities as exact rationals.
//! [`LatticeDist`] keeps values exact (an arithmetic progression
//! `offset + k * step`) but stores probabilities as `f64`, which is what makes
//! `n`-fold sums with `n` in the thousands affordable.
//!
//! Sums are always represented unscaled. [`SumLaw::cdf_scaled`] answers
//! `P(X_1 + ... + X_n <= x * sqrt(n))` without ever building the irrational
//! atoms of the scaled sum.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::summation::{add_compensated, Neumaier};

/// Largest atom count exact-mode `n`-fold convolution will attempt.
pub const EXACT_ATOM_BUDGET: u128 = 2_000_000;

/// Largest lattice (number of `f64` cells) lattice-float mode will allocate.
pub const LATTICE_CELL_BUDGET: u128 = 50_000_000;

/// Total-mass tolerance for [`LatticeDist`].
pub const LATTICE_MASS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub value: Rational,
    pub prob: Rational,
}

/// A probability distribution with finitely many atoms, all exact.
///
/// Atoms are strictly increasing by value and carry positive probabilities
/// summing to exactly one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "DistJson", into = "DistJson")]
pub struct FiniteDist {
    atoms: Vec<Atom>,
}

impl FiniteDist {
    /// Validates and sorts a list of `(value, probability)` pairs.
    pub fn new(atoms: impl IntoIterator<Item = (Rational, Rational)>) -> Result<Self> {
        let mut atoms: Vec<Atom> = atoms.into_iter().map(|(value, prob)| Atom { value, prob }).collect();
        if atoms.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(a) = atoms.iter().find(|a| !a.prob.is_positive()) {
            return Err(Error::NonPositiveProb { value: a.value.clone(), prob: a.prob.clone() });
        }
        atoms.sort_by(|x, y| x.value.cmp(&y.value));
        if let Some(w) = atoms.windows(2).find(|w| w[0].value == w[1].value) {
            return Err(Error::DuplicateValue { value: w[0].value.clone() });
        }
        let sum: Rational = atoms.iter().map(|a| &a.prob).sum();
        if !sum.is_one() {
            return Err(Error::SumNotOne { sum });
        }
        Ok(FiniteDist { atoms })
    }

    /// Builds from a value -> mass map, dropping zero masses. The caller
    /// guarantees the masses are non-negative and sum to one.
    pub(crate) fn from_map(map: BTreeMap<Rational, Rational>) -> Self {
        let atoms: Vec<Atom> =
            map.into_iter().filter(|(_, p)| !p.is_zero()).map(|(value, prob)| Atom { value, prob }).collect();
        debug_assert!(!atoms.is_empty());
        debug_assert!(atoms.iter().map(|a| &a.prob).sum::<Rational>().is_one());
        FiniteDist { atoms }
    }

    /// The point mass at `v`.
    pub fn point(v: Rational) -> Self {
        FiniteDist { atoms: vec![Atom { value: v, prob: Rational::one() }] }
    }

    /// Fair `±1` coin.
    pub fn rademacher() -> Self {
        let half = rational::ratio(1, 2);
        FiniteDist {
            atoms: vec![
                Atom { value: rational::int(-1), prob: half.clone() },
                Atom { value: rational::int(1), prob: half },
            ],
        }
    }

    /// Mass `p` at 1 and `1 - p` at 0, for `0 < p < 1`.
    pub fn bernoulli(p: Rational) -> Result<Self> {
        if !(p.is_positive() && p < Rational::one()) {
            return Err(Error::invalid("p", format!("{p} is not in (0, 1)")));
        }
        Self::new([(rational::int(0), Rational::one() - &p), (rational::int(1), p)])
    }

    /// Equal mass on each of the given (distinct) values.
    pub fn uniform(values: impl IntoIterator<Item = Rational>) -> Result<Self> {
        let values: Vec<Rational> = values.into_iter().collect();
        let p = Rational::new(BigInt::one(), BigInt::from(values.len().max(1)));
        Self::new(values.into_iter().map(|v| (v, p.clone())))
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    /// Always false: a distribution has at least one atom.
    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `P(X = v)`.
    pub fn prob(&self, v: &Rational) -> Rational {
        match self.atoms.binary_search_by(|a| a.value.cmp(v)) {
            Ok(i) => self.atoms[i].prob.clone(),
            Err(_) => Rational::zero(),
        }
    }

    pub fn min_value(&self) -> &Rational {
        &self.atoms[0].value
    }

    pub fn max_value(&self) -> &Rational {
        &self.atoms[self.atoms.len() - 1].value
    }

    pub fn mean(&self) -> Rational {
        self.atoms.iter().map(|a| &a.value * &a.prob).sum()
    }

    /// `E[X^2]`.
    pub fn second_moment(&self) -> Rational {
        self.atoms.iter().map(|a| &a.value * &a.value * &a.prob).sum()
    }

    pub fn variance(&self) -> Rational {
        let m = self.mean();
        self.second_moment() - &m * &m
    }

    /// The affine image `(X - mean) / sd`.
    ///
    /// When the standard deviation is irrational it is replaced by a rational
    /// approximant with [`rational::SQRT_DIGITS`] digits: the mean of the
    /// result is still exactly zero and the variance is `1 - O(1e-60)`.
    pub fn standardize(&self) -> Result<Self> {
        let var = self.variance();
        if var.is_zero() {
            return Err(Error::ZeroVariance);
        }
        let mu = self.mean();
        let sd = rational::sqrt(&var);
        let atoms = self.atoms.iter().map(|a| Atom { value: (&a.value - &mu) / &sd, prob: a.prob.clone() }).collect();
        Ok(FiniteDist { atoms })
    }

    /// Law of `X + Y` for independent `X ~ self`, `Y ~ other`.
    pub fn convolve(&self, other: &FiniteDist) -> FiniteDist {
        let mut map: BTreeMap<Rational, Rational> = BTreeMap::new();
        for a in &self.atoms {
            for b in &other.atoms {
                *map.entry(&a.value + &b.value).or_insert_with(Rational::zero) += &a.prob * &b.prob;
            }
        }
        FiniteDist::from_map(map)
    }

    /// Index of the largest atom `<= t`, if any.
    pub fn index_at_or_below(&self, t: &Rational) -> Option<usize> {
        match self.atoms.binary_search_by(|a| a.value.cmp(t)) {
            Ok(i) => Some(i),
            Err(0) => None,
            Err(i) => Some(i - 1),
        }
    }

    /// Exact `P(X <= t)`.
    pub fn cdf(&self, t: &Rational) -> Rational {
        match self.index_at_or_below(t) {
            None => Rational::zero(),
            Some(i) => self.atoms[..=i].iter().map(|a| &a.prob).sum(),
        }
    }

    /// `P(X <= x * sqrt(n))`, treating `self` as the law of an unscaled
    /// `n`-fold sum. See [`scaled_threshold`] for the boundary rule.
    pub fn cdf_scaled(&self, n: u64, x: f64) -> f64 {
        match scaled_threshold(n, x) {
            Threshold::Nan => f64::NAN,
            Threshold::BelowAll => 0.0,
            Threshold::AboveAll => 1.0,
            Threshold::At(t) => rational::to_f64(&self.cdf(&t)),
        }
    }

    /// Coarsest lattice containing every atom: `(min value, step, positions)`.
    ///
    /// The step is the rational gcd of all offsets from the smallest atom
    /// (1 for a point mass).
    pub fn lattice(&self) -> (Rational, Rational, Vec<BigInt>) {
        let min = self.min_value().clone();
        let step = self.atoms.iter().skip(1).fold(Rational::zero(), |g, a| rational::gcd(&g, &(&a.value - &min)));
        let step = if step.is_zero() { Rational::one() } else { step };
        let positions = self.atoms.iter().map(|a| ((&a.value - &min) / &step).to_integer()).collect();
        (min, step, positions)
    }

    /// Renders the `value:prob,value:prob,...` text form.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for FiniteDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}:{}", a.value, a.prob)?;
        }
        Ok(())
    }
}

impl FromStr for FiniteDist {
    type Err = Error;

    /// Parses `-1:1/3,0:1/3,1:1/3`.
    fn from_str(s: &str) -> Result<Self> {
        let mut atoms = Vec::new();
        for part in s.split(',') {
            let (v, p) = part.split_once(':').ok_or_else(|| Error::Parse {
                input: part.trim().to_string(),
                reason: "expected value:prob".to_string(),
            })?;
            atoms.push((rational::parse_rational(v)?, rational::parse_rational(p)?));
        }
        FiniteDist::new(atoms)
    }
}

#[derive(Serialize, Deserialize)]
struct AtomJson {
    v: String,
    p: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistJson {
    atoms: Vec<AtomJson>,
}

impl From<FiniteDist> for DistJson {
    fn from(d: FiniteDist) -> Self {
        DistJson {
            atoms: d.atoms.into_iter().map(|a| AtomJson { v: a.value.to_string(), p: a.prob.to_string() }).collect(),
        }
    }
}

impl TryFrom<DistJson> for FiniteDist {
    type Error = Error;

    fn try_from(j: DistJson) -> Result<Self> {
        let atoms = j
            .atoms
            .iter()
            .map(|a| Ok((rational::parse_rational(&a.v)?, rational::parse_rational(&a.p)?)))
            .collect::<Result<Vec<_>>>()?;
        FiniteDist::new(atoms)
    }
}

/// Where the scaled comparison point `x * sqrt(n)` lands.
#[derive(Debug, Clone, PartialEq)]
pub enum Threshold {
    Nan,
    BelowAll,
    AboveAll,
    /// Include every atom `<=` this exact value.
    At(Rational),
}

/// Converts `x` to the unscaled threshold `x * sqrt(n)`.
///
/// `sqrt(n)` and the product are computed in `f64`; the result is then moved
/// up by one ulp so that an atom lying exactly on the boundary is counted
/// despite rounding. The returned threshold is exact, so every later
/// comparison against atoms is exact.
pub fn scaled_threshold(n: u64, x: f64) -> Threshold {
    if x.is_nan() {
        return Threshold::Nan;
    }
    if x == f64::NEG_INFINITY {
        return Threshold::BelowAll;
    }
    let t = (x * (n as f64).sqrt()).next_up();
    if !t.is_finite() {
        return if t > 0.0 { Threshold::AboveAll } else { Threshold::BelowAll };
    }
    Threshold::At(rational::from_f64(t).expect("finite"))
}

/// A distribution on `offset + k * step`, `k = 0..len`, with `f64` masses.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeDist {
    offset: Rational,
    step: Rational,
    probs: Vec<f64>,
}

impl LatticeDist {
    pub fn new(offset: Rational, step: Rational, probs: Vec<f64>) -> Result<Self> {
        if !step.is_positive() {
            return Err(Error::invalid("step", format!("{step} is not positive")));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::invalid("probs", format!("mass {p} is not a finite non-negative number")));
        }
        let d = LatticeDist { offset, step, probs };
        let mass = d.total_mass();
        if (mass - 1.0).abs() > LATTICE_MASS_TOL {
            return Err(Error::invalid("probs", format!("total mass {mass} is not within {LATTICE_MASS_TOL:e} of 1")));
        }
        Ok(d)
    }

    /// Embeds an exact distribution on its coarsest lattice.
    pub fn from_finite(d: &FiniteDist) -> Result<Self> {
        let (offset, step, positions) = d.lattice();
        let width = positions.last().expect("non-empty").to_u128().unwrap_or(u128::MAX);
        if width >= LATTICE_CELL_BUDGET {
            return Err(Error::LatticeBudgetExceeded { cells: width.saturating_add(1), budget: LATTICE_CELL_BUDGET });
        }
        let mut probs = vec![0.0; width as usize + 1];
        for (a, k) in d.atoms().iter().zip(&positions) {
            probs[k.to_usize().expect("bounded")] = rational::to_f64(&a.prob);
        }
        Ok(LatticeDist { offset, step, probs })
    }

    pub fn offset(&self) -> &Rational {
        &self.offset
    }

    pub fn step(&self) -> &Rational {
        &self.step
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Exact value of cell `k`.
    pub fn value(&self, k: usize) -> Rational {
        &self.offset + &self.step * Rational::from_integer(BigInt::from(k))
    }

    /// Mass at `v`; zero off the lattice.
    pub fn prob_at(&self, v: &Rational) -> f64 {
        let k = (v - &self.offset) / &self.step;
        if !k.is_integer() || k.is_negative() {
            return 0.0;
        }
        k.to_integer().to_usize().and_then(|k| self.probs.get(k).copied()).unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().copied().collect::<Neumaier>().total()
    }

    pub fn mean(&self) -> f64 {
        let off = rational::to_f64(&self.offset);
        let step = rational::to_f64(&self.step);
        self.probs.iter().enumerate().map(|(k, p)| p * (off + step * k as f64)).collect::<Neumaier>().total()
    }

    /// Index of the largest cell `<= t`, if any (the cell may carry zero mass).
    pub fn index_at_or_below(&self, t: &Rational) -> Option<usize> {
        let k = ((t - &self.offset) / &self.step).floor().to_integer();
        if k.is_negative() {
            return None;
        }
        Some(k.to_usize().map_or(self.probs.len() - 1, |k| k.min(self.probs.len() - 1)))
    }

    /// `P(X <= t)` with compensated summation.
    pub fn cdf(&self, t: &Rational) -> f64 {
        match self.index_at_or_below(t) {
            None => 0.0,
            Some(k) => self.probs[..=k].iter().copied().collect::<Neumaier>().total(),
        }
    }

    /// Running sums of the masses: entry `k` is `P(X <= value(k))`.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut acc = Neumaier::default();
        self.probs
            .iter()
            .map(|&p| {
                acc.add(p);
                acc.total()
            })
            .collect()
    }

    pub fn cdf_scaled(&self, n: u64, x: f64) -> f64 {
        match scaled_threshold(n, x) {
            Threshold::Nan => f64::NAN,
            Threshold::BelowAll => 0.0,
            Threshold::AboveAll => 1.0,
            Threshold::At(t) => self.cdf(&t),
        }
    }
}

/// How an `n`-fold convolution is carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Exact rational probabilities.
    Exact,
    /// Exact lattice values, `f64` probabilities.
    LatticeFloat,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "lattice" | "lattice-float" => Ok(Mode::LatticeFloat),
            other => Err(Error::Parse { input: other.to_string(), reason: "expected exact or lattice-float".into() }),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::LatticeFloat => "lattice-float",
        })
    }
}

/// The law of an unscaled `n`-fold sum in either representation.
#[derive(Debug, Clone, PartialEq)]
pub enum SumLaw {
    Exact(FiniteDist),
    Lattice(LatticeDist),
}

impl SumLaw {
    /// `P(S_n <= x)` where `S_n` is this sum divided by `sqrt(n)`.
    pub fn cdf_scaled(&self, n: u64, x: f64) -> f64 {
        match self {
            SumLaw::Exact(d) => d.cdf_scaled(n, x),
            SumLaw::Lattice(d) => d.cdf_scaled(n, x),
        }
    }

    /// A reusable evaluator for many `x` at fixed `n`.
    pub fn scaled_cdf_evaluator(&self, n: u64) -> ScaledCdf<'_> {
        let cumulative = match self {
            SumLaw::Exact(d) => {
                let mut acc = Rational::zero();
                d.atoms()
                    .iter()
                    .map(|a| {
                        acc += &a.prob;
                        rational::to_f64(&acc)
                    })
                    .collect()
            }
            SumLaw::Lattice(d) => d.cumulative(),
        };
        ScaledCdf { law: self, n, cumulative }
    }
}

/// Precomputed running sums for repeated [`SumLaw::cdf_scaled`] queries.
pub struct ScaledCdf<'a> {
    law: &'a SumLaw,
    n: u64,
    cumulative: Vec<f64>,
}

impl ScaledCdf<'_> {
    pub fn eval(&self, x: f64) -> f64 {
        let t = match scaled_threshold(self.n, x) {
            Threshold::Nan => return f64::NAN,
            Threshold::BelowAll => return 0.0,
            Threshold::AboveAll => return 1.0,
            Threshold::At(t) => t,
        };
        let idx = match self.law {
            SumLaw::Exact(d) => d.index_at_or_below(&t),
            SumLaw::Lattice(d) => d.index_at_or_below(&t),
        };
        idx.map_or(0.0, |k| self.cumulative[k])
    }
}

/// Law of `X_1 + ... + X_n` for i.i.d. `X_i ~ d`, with the default exact
/// budget.
pub fn convolve_power(d: &FiniteDist, n: u64, mode: Mode) -> Result<SumLaw> {
    match mode {
        Mode::Exact => convolve_power_exact(d, n, EXACT_ATOM_BUDGET).map(SumLaw::Exact),
        Mode::LatticeFloat => convolve_power_lattice(d, n).map(SumLaw::Lattice),
    }
}

fn require_positive(n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    Ok(())
}

/// Upper bound on the atom count of the `n`-fold sum: the smaller of the
/// number of multisets of size `n` over the atoms and the number of lattice
/// points the sum can reach.
pub fn projected_atoms(d: &FiniteDist, n: u64) -> u128 {
    let m = d.len() as u128;
    let n = n as u128;
    let mut multisets: u128 = 1;
    for i in 1..m {
        multisets = match multisets.checked_mul(n + i) {
            Some(v) => v / i,
            None => u128::MAX,
        };
        if multisets == u128::MAX {
            break;
        }
    }
    let (_, _, positions) = d.lattice();
    let width = positions.last().and_then(|w| w.to_u128()).unwrap_or(u128::MAX);
    let lattice = width.checked_mul(n).and_then(|v| v.checked_add(1)).unwrap_or(u128::MAX);
    multisets.min(lattice)
}

/// Exact `n`-fold convolution by repeated [`FiniteDist::convolve`].
pub fn convolve_power_exact(d: &FiniteDist, n: u64, budget: u128) -> Result<FiniteDist> {
    require_positive(n)?;
    let projected = projected_atoms(d, n);
    if projected > budget {
        return Err(Error::ExactBudgetExceeded { projected, budget });
    }
    let mut acc = d.clone();
    for _ in 1..n {
        acc = acc.convolve(d);
    }
    Ok(acc)
}

/// `n`-fold convolution on the coarsest common lattice with `f64` masses.
///
/// Each step is a dense convolution against the (sparse) one-draw kernel with
/// compensated accumulation in every output cell.
pub fn convolve_power_lattice(d: &FiniteDist, n: u64) -> Result<LatticeDist> {
    require_positive(n)?;
    let base = LatticeDist::from_finite(d)?;
    let width = base.len() as u128 - 1;
    let cells = width.saturating_mul(n as u128).saturating_add(1);
    if cells > LATTICE_CELL_BUDGET {
        return Err(Error::LatticeBudgetExceeded { cells, budget: LATTICE_CELL_BUDGET });
    }
    let kernel: Vec<(usize, f64)> =
        base.probs.iter().enumerate().filter(|(_, p)| **p > 0.0).map(|(k, p)| (k, *p)).collect();
    let width = width as usize;

    let mut cur = base.probs.clone();
    let mut sum = Vec::with_capacity(cells as usize);
    let mut comp = Vec::with_capacity(cells as usize);
    for _ in 1..n {
        let len = cur.len() + width;
        sum.clear();
        sum.resize(len, 0.0);
        comp.clear();
        comp.resize(len, 0.0);
        for &(j, q) in &kernel {
            let (s, c) = (&mut sum[j..j + cur.len()], &mut comp[j..j + cur.len()]);
            for ((s, c), &p) in s.iter_mut().zip(c.iter_mut()).zip(&cur) {
                add_compensated(s, c, p * q);
            }
        }
        cur.clear();
        cur.extend(sum.iter().zip(&comp).map(|(s, c)| s + c));
    }
    let offset = &base.offset * Rational::from_integer(BigInt::from(n));
    LatticeDist::new(offset, base.step, cur)
}
