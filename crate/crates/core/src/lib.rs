#![allow(clippy::result_large_err)]

pub mod approx;
pub mod decompose;
pub mod dist;
pub mod error;
pub mod normal;
pub mod pipeline;
pub mod quad;
pub mod rational;
pub mod rng;
mod summation;
pub mod verify;

pub use decompose::{decompose, recompose, Mixture, TwoValued};
pub use dist::{convolve_power, FiniteDist, LatticeDist, Mode, SumLaw};
pub use error::{Error, Result};
pub use rational::Rational;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/distributions.md")]
    mod distributions {}
    #[doc = include_str!("../../../book/src/mixtures.md")]
    mod mixtures {}
    #[doc = include_str!("../../../book/src/normal.md")]
    mod normal {}
    #[doc = include_str!("../../../book/src/clt-tables.md")]
    mod clt_tables {}
    #[doc = include_str!("../../../book/src/approximation.md")]
    mod approximation {}
    #[doc = include_str!("../../../book/src/reproducibility.md")]
    mod reproducibility {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
