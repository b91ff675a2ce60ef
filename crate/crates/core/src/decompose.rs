//! Decomposition of a simple mean-zero distribution into a finite mixture of
//! two-valued mean-zero distributions.
//!
//! The construction is greedy and exact. Any mass at zero becomes its own
//! degenerate component. After that, each step pairs the smallest positive
//! atom `a` with the smallest negative atom `-b`. If `a P(a) <= b P(-b)`, atom
//! `a` is used up whole and just enough of `-b` (`a P(a) / b`) is taken to
//! balance it. Otherwise the roles swap. Every step removes at least one atom,
//! so there are never more components than atoms.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::FiniteDist;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// A mean-zero law on `{a, -b}` with `a, b >= 0`.
///
/// `a = b = 0` is the degenerate component, the point mass at zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TwoValued {
    pos: Rational,
    neg: Rational,
    prob_pos: Rational,
}

impl TwoValued {
    /// Mass `prob_pos` at `pos` and `1 - prob_pos` at `-neg`.
    ///
    /// Requires `pos, neg > 0`, `0 < prob_pos < 1` and
    /// `pos * prob_pos = neg * (1 - prob_pos)`.
    pub fn new(pos: Rational, neg: Rational, prob_pos: Rational) -> Result<Self> {
        if !pos.is_positive() {
            return Err(Error::invalid("a", format!("{pos} is not positive")));
        }
        if !neg.is_positive() {
            return Err(Error::invalid("b", format!("{neg} is not positive")));
        }
        if !(prob_pos.is_positive() && prob_pos < Rational::one()) {
            return Err(Error::invalid("p_pos", format!("{prob_pos} is not in (0, 1)")));
        }
        let mean = &pos * &prob_pos - &neg * (Rational::one() - &prob_pos);
        if !mean.is_zero() {
            return Err(Error::NonZeroMean { mean });
        }
        Ok(TwoValued { pos, neg, prob_pos })
    }

    /// `a`, `b` given; `prob_pos = b / (a + b)` is the only mean-zero choice.
    pub fn balanced(pos: Rational, neg: Rational) -> Result<Self> {
        let prob_pos = &neg / (&pos + &neg);
        Self::new(pos, neg, prob_pos)
    }

    /// The point mass at zero.
    pub fn zero() -> Self {
        TwoValued { pos: Rational::zero(), neg: Rational::zero(), prob_pos: Rational::one() }
    }

    pub fn is_degenerate(&self) -> bool {
        self.pos.is_zero() && self.neg.is_zero()
    }

    pub fn pos(&self) -> &Rational {
        &self.pos
    }

    pub fn neg(&self) -> &Rational {
        &self.neg
    }

    pub fn prob_pos(&self) -> &Rational {
        &self.prob_pos
    }

    pub fn prob_neg(&self) -> Rational {
        Rational::one() - &self.prob_pos
    }

    pub fn mean(&self) -> Rational {
        &self.pos * &self.prob_pos - &self.neg * self.prob_neg()
    }

    /// `E[Y^2] = a^2 P(a) + b^2 P(-b)`.
    pub fn second_moment(&self) -> Rational {
        &self.pos * &self.pos * &self.prob_pos + &self.neg * &self.neg * self.prob_neg()
    }

    pub fn law(&self) -> FiniteDist {
        if self.is_degenerate() {
            return FiniteDist::point(Rational::zero());
        }
        FiniteDist::new([(-self.neg.clone(), self.prob_neg()), (self.pos.clone(), self.prob_pos.clone())])
            .expect("valid two-valued law")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Component {
    pub weight: Rational,
    pub dist: TwoValued,
}

/// Positive weights summing to one over two-valued components.
///
/// Sampling a mixture means drawing the component index `θ` by weight and then
/// drawing from component `θ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "MixtureJson", into = "MixtureJson")]
pub struct Mixture {
    components: Vec<Component>,
}

impl Mixture {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(c) = components.iter().find(|c| !c.weight.is_positive()) {
            return Err(Error::invalid("w", format!("component weight {} is not positive", c.weight)));
        }
        let sum: Rational = components.iter().map(|c| &c.weight).sum();
        if !sum.is_one() {
            return Err(Error::SumNotOne { sum });
        }
        Ok(Mixture { components })
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn weights(&self) -> impl Iterator<Item = &Rational> {
        self.components.iter().map(|c| &c.weight)
    }

    /// `Σ w_i E[Y_i^2]`.
    pub fn weighted_second_moment(&self) -> Rational {
        self.components.iter().map(|c| &c.weight * c.dist.second_moment()).sum()
    }

    pub fn sampler(&self) -> MixtureSampler {
        MixtureSampler::new(self)
    }
}

/// Decomposes a mean-zero [`FiniteDist`] into a [`Mixture`] of two-valued
/// mean-zero components whose recomposition is exactly `d`.
pub fn decompose(d: &FiniteDist) -> Result<Mixture> {
    let mean = d.mean();
    if !mean.is_zero() {
        return Err(Error::NonZeroMean { mean });
    }
    let mut components = Vec::new();
    // Residual masses are absolute (not renormalized), so they are the
    // component weights directly.
    let mut pos: Vec<(Rational, Rational)> = Vec::new();
    let mut neg: Vec<(Rational, Rational)> = Vec::new();
    for atom in d.atoms() {
        if atom.value.is_zero() {
            components.push(Component { weight: atom.prob.clone(), dist: TwoValued::zero() });
        } else if atom.value.is_positive() {
            pos.push((atom.value.clone(), atom.prob.clone()));
        } else {
            neg.push((-atom.value.clone(), atom.prob.clone()));
        }
    }
    // Smallest magnitudes last so they can be popped.
    pos.reverse();

    let atom_count = d.len();
    let mut steps = 0;
    while let (Some((a, pa)), Some((b, pb))) = (pos.last().cloned(), neg.last().cloned()) {
        steps += 1;
        assert!(steps <= atom_count, "decomposition did not shrink the residual");
        let moment_pos = &a * &pa;
        let moment_neg = &b * &pb;
        let (weight, prob_pos) = if moment_pos <= moment_neg {
            // All of `a`, part of `-b`.
            let taken = &moment_pos / &b;
            pos.pop();
            if taken == pb {
                neg.pop();
            } else {
                neg.last_mut().expect("present").1 -= &taken;
            }
            let w = &pa + taken;
            let p = &pa / &w;
            (w, p)
        } else {
            // All of `-b`, part of `a`.
            let taken = &moment_neg / &a;
            neg.pop();
            pos.last_mut().expect("present").1 -= &taken;
            let w = &pb + &taken;
            let p = taken / &w;
            (w, p)
        };
        let dist = TwoValued::new(a, b, prob_pos).expect("balanced by construction");
        components.push(Component { weight, dist });
    }
    // Mean zero forces both sides to run out together.
    debug_assert!(pos.is_empty() && neg.is_empty());
    Ok(Mixture { components })
}

/// The exact law `Σ w_i law(Y_i)`.
pub fn recompose(m: &Mixture) -> FiniteDist {
    let mut map: BTreeMap<Rational, Rational> = BTreeMap::new();
    for c in &m.components {
        for atom in c.dist.law().atoms() {
            *map.entry(atom.value.clone()).or_insert_with(Rational::zero) += &c.weight * &atom.prob;
        }
    }
    FiniteDist::from_map(map)
}

/// One draw from the mixture: `θ` by weight, then the `θ`-th component.
pub fn sample_mixture<R: Rng + ?Sized>(m: &Mixture, rng: &mut R) -> Rational {
    let sampler = m.sampler();
    let (i, positive) = sampler.sample(rng);
    let y = &m.components[i].dist;
    if y.is_degenerate() {
        Rational::zero()
    } else if positive {
        y.pos.clone()
    } else {
        -y.neg.clone()
    }
}

/// `f64` cumulative tables for repeated sampling from one mixture.
#[derive(Debug, Clone)]
pub struct MixtureSampler {
    cumulative: Vec<f64>,
    prob_pos: Vec<f64>,
}

impl MixtureSampler {
    pub fn new(m: &Mixture) -> Self {
        let mut acc = Rational::zero();
        let cumulative = m
            .components
            .iter()
            .map(|c| {
                acc += &c.weight;
                rational::to_f64(&acc)
            })
            .collect();
        let prob_pos = m.components.iter().map(|c| rational::to_f64(&c.dist.prob_pos)).collect();
        MixtureSampler { cumulative, prob_pos }
    }

    /// Draws the component index `θ`.
    pub fn sample_theta<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        self.cumulative.partition_point(|&c| c <= u).min(self.cumulative.len() - 1)
    }

    /// Draws `θ` and the side of component `θ` (true for `+a`).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, bool) {
        let i = self.sample_theta(rng);
        let positive = rng.gen::<f64>() < self.prob_pos[i];
        (i, positive)
    }
}

#[derive(Serialize, Deserialize)]
struct ComponentJson {
    w: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    zero: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p_pos: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MixtureJson {
    components: Vec<ComponentJson>,
}

impl From<Mixture> for MixtureJson {
    fn from(m: Mixture) -> Self {
        let components = m
            .components
            .into_iter()
            .map(|c| {
                let w = c.weight.to_string();
                if c.dist.is_degenerate() {
                    ComponentJson { w, zero: Some(true), a: None, b: None, p_pos: None }
                } else {
                    ComponentJson {
                        w,
                        zero: None,
                        a: Some(c.dist.pos.to_string()),
                        b: Some(c.dist.neg.to_string()),
                        p_pos: Some(c.dist.prob_pos.to_string()),
                    }
                }
            })
            .collect();
        MixtureJson { components }
    }
}

impl TryFrom<MixtureJson> for Mixture {
    type Error = Error;

    fn try_from(j: MixtureJson) -> Result<Self> {
        let field = |v: &Option<String>, name: &'static str| {
            v.as_deref().ok_or_else(|| Error::invalid(name, "missing")).and_then(rational::parse_rational)
        };
        let components = j
            .components
            .iter()
            .map(|c| {
                let weight = rational::parse_rational(&c.w)?;
                let dist = if c.zero == Some(true) {
                    TwoValued::zero()
                } else {
                    TwoValued::new(field(&c.a, "a")?, field(&c.b, "b")?, field(&c.p_pos, "p_pos")?)?
                };
                Ok(Component { weight, dist })
            })
            .collect::<Result<Vec<_>>>()?;
        Mixture::new(components)
    }
}
