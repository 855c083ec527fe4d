//! Spectral analysis of the overlapping-cycles shuffle.
//!
//! A deck of `n` cards is shuffled by moving either the `n`th or the
//! `(n−k)`th card to the top, each with probability one half. This crate
//! studies the Markov chain followed by a single card:
//!
//! * [`chain`]: transition structure, distribution evolution and the
//!   characteristic function `g(λ) = (2λ^{n−k} − 1)(2λ − 1)^k − 1`,
//! * [`gamma`]: the Diophantine functional `γ(n,k)` that predicts the
//!   spectral gap, with exact integer residues and a continued-fraction
//!   shortcut,
//! * [`spectra`]: seeded Newton refinement, an Aberth–Ehrlich oracle and the
//!   numeric spectral gap,
//! * [`analysis`]: closed-form predictors near rationals, k-sweeps and bound
//!   checks,
//! * [`mixsim`]: exact and Monte Carlo mixing of one card or the whole deck,
//! * [`cli`]: the command-line front end.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix it to `f64`, which is what the CLI uses.

// `!(x >= y)` is used on purpose so that NaN takes the failure branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod chain;
pub mod cli;
mod cmath;
pub mod error;
pub mod gamma;
pub mod mixsim;
pub mod report;
mod scalar;
pub mod spectra;

pub use chain::ShuffleParams;
pub use error::{Error, Result};
pub use scalar::Real;

pub type DistVector = chain::DistVector<f64>;
pub type GammaTerm = gamma::GammaTerm<f64>;
pub type GammaMin = gamma::GammaMin<f64>;
pub type PolarEigen = spectra::PolarEigen<f64>;
pub type Spectrum = spectra::Spectrum<f64>;
pub type GapResult = spectra::GapResult<f64>;

pub type DistVector32 = chain::DistVector<f32>;
pub type GammaMin32 = gamma::GammaMin<f32>;
pub type PolarEigen32 = spectra::PolarEigen<f32>;
pub type Spectrum32 = spectra::Spectrum<f32>;
