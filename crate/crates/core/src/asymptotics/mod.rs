// SPDX-License-Identifier: MIT OR Apache-2.0
//! Closed-form and series-based asymptotics for the masked moment estimators
//! and the indices built from them.
//!
//! The formulas rest on a central limit theorem for strongly mixing count
//! processes observed through an independent stationary mask. That mixing
//! condition is assumed, not checked.
//!
//! Two routes are provided for each index. The general route feeds any
//! [`MomentOracle`](crate::moments::MomentOracle) and [`MaskLaw`] through the
//! delta method. The Markov route evaluates the compact expressions in
//! terms of [`kappa`] for the two shipped model families under a Markov mask.

mod covariance;
mod indices;
mod lagsum;

pub use covariance::{
    clt_sigma, clt_sigma_general, clt_sigma_matrix, kappa, sigma_binomial_markov, sigma_poisson_markov,
    sigma_star, CovarianceRequest,
};
pub use indices::{
    bin_dispersion_asym_general, bin_dispersion_asym_markov, markov_asymptotics, poi_dispersion_asym_general,
    poi_dispersion_asym_markov, raw_poi_dispersion_asym, skew_asym_binomial_markov, skew_asym_general,
    skew_asym_poisson_markov, IndexAsymptotics, IndexKind,
};
pub use lagsum::{
    mask_autocovariance_sum, weighted_lag_sum, LagTerm, MaskLaw, SeriesControl, SumStrategy, MIN_TAU,
};
