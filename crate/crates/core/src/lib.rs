// SPDX-License-Identifier: MIT OR Apache-2.0
//! Marginal diagnostics for count time series observed with gaps.
//!
//! The crate covers two stationary count processes, the Poisson INAR(1)
//! model and the binomial AR(1) model, together with a binary Markov
//! observation mask. On top of the simulators it provides:
//!
//! - factorial moment estimators that only read observed positions,
//! - closed-form and series-based asymptotic variance and bias for the
//!   Poisson dispersion, binomial dispersion and skewness indices,
//! - dependence estimators for the gappy series (ACF, PACF, mask
//!   persistence),
//! - hypothesis tests that combine all of the above.
//!
//! All asymptotics assume the count process is strongly mixing and the
//! mask is independent of the counts (missing completely at random).

// `!(x > 0.0)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod diagnostics;
pub mod error;
pub mod missingness;
pub mod model;
pub mod moments;

pub use error::{Error, Result};
pub use model::{Bar1, CountSeries, MissingSpec, ModelSpec, PoiInar1, Seed};
