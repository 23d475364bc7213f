// SPDX-License-Identifier: MIT OR Apache-2.0
//! Mask estimators and serial dependence of a partially observed series.
//!
//! Autocovariances only use pairs in which both points are observed
//! (Dunsmuir–Robinson). Critical bands for the autocorrelations are scaled by
//! the realized fraction of observed pairs at each lag.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{domain, Error, Result};
use crate::model::CountSeries;

/// Two-sided standard normal quantile z_{1 - alpha/2}.
pub fn normal_quantile_two_sided(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("test level must lie in (0, 1), got {alpha}"));
    }
    Ok(Normal::standard().inverse_cdf(1.0 - alpha / 2.0))
}

/// Fraction of observed positions.
pub fn estimate_tau(mask: &[bool]) -> Result<f64> {
    if mask.is_empty() {
        return Err(Error::Degenerate("empty mask".into()));
    }
    Ok(mask.iter().filter(|&&o| o).count() as f64 / mask.len() as f64)
}

/// Lag-1 autocorrelation of the mask.
///
/// The lag-1 cross product is averaged over its T-1 pairs and the variance
/// over all T points, so a perfectly alternating mask gives exactly -1.
/// Negative values are returned as is; callers decide how to treat them.
pub fn estimate_r(mask: &[bool]) -> Result<f64> {
    if mask.len() < 2 {
        return Err(Error::Degenerate("mask needs at least two positions".into()));
    }
    let t = mask.len() as f64;
    let mean = estimate_tau(mask)?;
    if mean == 0.0 || mean == 1.0 {
        return Err(Error::Degenerate("constant mask: dependence undefined, set r = 0 explicitly".into()));
    }
    let dev = |o: bool| f64::from(u8::from(o)) - mean;
    let c0 = mask.iter().map(|&o| dev(o) * dev(o)).sum::<f64>() / t;
    let c1 = mask.windows(2).map(|w| dev(w[0]) * dev(w[1])).sum::<f64>() / (t - 1.0);
    Ok(c1 / c0)
}

/// Realized lagged mask product (1/T) sum_t O_t O_{t+l}.
pub fn mask_lag_fraction(mask: &[bool], l: usize) -> f64 {
    if l >= mask.len() {
        return 0.0;
    }
    let pairs = mask.iter().zip(&mask[l..]).filter(|(&a, &b)| a && b).count();
    pairs as f64 / mask.len() as f64
}

fn observed_mean(series: &CountSeries) -> Result<f64> {
    let n = series.n_observed();
    if n == 0 {
        return Err(Error::Degenerate("every position is masked".into()));
    }
    Ok(series.observed().map(|x| x as f64).sum::<f64>() / n as f64)
}

fn cross_sum(series: &CountSeries, l: usize, mean: f64) -> (f64, usize) {
    let v = series.values();
    let m = series.mask();
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for t in 0..series.len() - l {
        if m[t] && m[t + l] {
            sum += (v[t] as f64 - mean) * (v[t + l] as f64 - mean);
            pairs += 1;
        }
    }
    (sum, pairs)
}

/// Mean-corrected autocovariance over jointly observed pairs, divided by T.
pub fn dr_autocovariance(series: &CountSeries, l: usize) -> Result<f64> {
    if l >= series.len() {
        return domain(format!("lag {l} must be below the series length {}", series.len()));
    }
    let mean = observed_mean(series)?;
    Ok(cross_sum(series, l, mean).0 / series.len() as f64)
}

/// How lagged cross products are scaled before forming the ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcfNormalization {
    /// Each lag is rescaled by the number of jointly observed pairs relative
    /// to the complete-data count (T - l). Equals the textbook biased ACF
    /// when nothing is missing, and stays consistent when values are missing.
    #[default]
    PairAdjusted,
    /// Plain ratio of the 1/T autocovariances. Under missingness this is
    /// attenuated by roughly tau(l)/tau at lag l.
    Literal,
}

/// Sample autocorrelations of a gappy series, lags 0..=L.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfEstimate {
    pub rho_hat: Vec<f64>,
    /// Realized (1/T) sum O_t O_{t+l} per lag.
    pub tau_lag: Vec<f64>,
    pub t: usize,
}

impl AcfEstimate {
    pub fn max_lag(&self) -> usize {
        self.rho_hat.len() - 1
    }
}

pub fn dr_acf(series: &CountSeries, max_lag: usize) -> Result<AcfEstimate> {
    dr_acf_with(series, max_lag, AcfNormalization::default())
}

pub fn dr_acf_with(series: &CountSeries, max_lag: usize, norm: AcfNormalization) -> Result<AcfEstimate> {
    let t = series.len();
    if max_lag >= t {
        return domain(format!("maximum lag {max_lag} must be below the series length {t}"));
    }
    let mean = observed_mean(series)?;
    let n_obs = series.n_observed();
    let (s0, _) = cross_sum(series, 0, mean);
    if s0 <= 0.0 {
        return Err(Error::Degenerate("observed values have zero variance".into()));
    }
    let mut rho_hat = Vec::with_capacity(max_lag + 1);
    let mut tau_lag = Vec::with_capacity(max_lag + 1);
    for l in 0..=max_lag {
        let (sl, pairs) = cross_sum(series, l, mean);
        tau_lag.push(pairs as f64 / t as f64);
        let r = match norm {
            AcfNormalization::Literal => sl / s0,
            AcfNormalization::PairAdjusted if pairs == 0 => f64::NAN,
            AcfNormalization::PairAdjusted => {
                let num = (n_obs as f64) * ((t - l) as f64);
                let den = (t as f64) * (pairs as f64);
                sl / s0 * (num / den)
            }
        };
        rho_hat.push(r);
    }
    Ok(AcfEstimate { rho_hat, tau_lag, t })
}

/// Partial autocorrelations phi_11, ..., phi_LL from rho(1), ..., rho(L).
pub fn durbin_levinson_pacf(acf: &[f64]) -> Result<Vec<f64>> {
    if acf.is_empty() {
        return domain("need at least one autocorrelation");
    }
    let lags = acf.len();
    let mut pacf = Vec::with_capacity(lags);
    let mut phi: Vec<f64> = Vec::with_capacity(lags);
    let mut v = 1.0;
    for k in 1..=lags {
        let num = acf[k - 1] - (0..k - 1).map(|j| phi[j] * acf[k - 2 - j]).sum::<f64>();
        let phi_kk = num / v;
        if !phi_kk.is_finite() || phi_kk.abs() >= 1.0 {
            return Err(Error::Numerical(format!(
                "partial autocorrelation {phi_kk} at lag {k}: Toeplitz system is singular"
            )));
        }
        let prev = phi.clone();
        for j in 0..k - 1 {
            phi[j] = prev[j] - phi_kk * prev[k - 2 - j];
        }
        phi.push(phi_kk);
        v *= 1.0 - phi_kk * phi_kk;
        pacf.push(phi_kk);
    }
    Ok(pacf)
}

/// Half-widths z_{1-alpha/2} / sqrt(T tau(l)) for each entry of `tau_lag`.
pub fn acf_critical_band(tau_lag: &[f64], t: usize, alpha: f64) -> Result<Vec<f64>> {
    let z = normal_quantile_two_sided(alpha)?;
    tau_lag
        .iter()
        .enumerate()
        .map(|(i, &tl)| {
            if tl > 0.0 {
                Ok(z / (t as f64 * tl).sqrt())
            } else {
                Err(Error::Degenerate(format!("no jointly observed pairs at entry {i}; band undefined")))
            }
        })
        .collect()
}
