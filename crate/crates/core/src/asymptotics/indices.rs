// SPDX-License-Identifier: MIT OR Apache-2.0
//! Asymptotic variance and bias of the dispersion and skewness indices.
//!
//! Every variance and bias returned here already carries the 1/T factor.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::missingness::normal_quantile_two_sided;
use crate::model::{MissingSpec, ModelSpec};
use crate::moments::MomentOracle;

use super::covariance::{check_markov, clt_sigma_matrix, kappa};
use super::lagsum::{weighted_lag_sum, MaskLaw, SeriesControl};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexKind {
    /// mu_(2)/mu - mu + 1, equal to 1 under a Poisson marginal.
    PoiDispersion,
    /// Variance over binomial variance, equal to 1 under a binomial marginal.
    BinDispersion,
    /// mu_(3)/(mu_(2) mu) with a Poisson null.
    SkewPoi,
    /// mu_(3)/(mu_(2) mu) with a binomial null.
    SkewBin,
}

impl IndexKind {
    pub const ALL: [IndexKind; 4] =
        [IndexKind::PoiDispersion, IndexKind::BinDispersion, IndexKind::SkewPoi, IndexKind::SkewBin];

    pub fn name(&self) -> &'static str {
        match self {
            IndexKind::PoiDispersion => "poi_dispersion",
            IndexKind::BinDispersion => "bin_dispersion",
            IndexKind::SkewPoi => "skew_poi",
            IndexKind::SkewBin => "skew_bin",
        }
    }

    pub fn is_binomial(&self) -> bool {
        matches!(self, IndexKind::BinDispersion | IndexKind::SkewBin)
    }

    pub fn is_skewness(&self) -> bool {
        matches!(self, IndexKind::SkewPoi | IndexKind::SkewBin)
    }
}

impl std::str::FromStr for IndexKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        IndexKind::ALL
            .into_iter()
            .find(|k| k.name() == s.replace('-', "_"))
            .ok_or_else(|| format!("unknown index kind '{s}'"))
    }
}

impl std::fmt::Display for IndexKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Null value, variance and bias of one index at sample size `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexAsymptotics {
    pub kind: IndexKind,
    pub null_value: f64,
    pub variance: f64,
    pub bias: f64,
    pub t: u64,
}

impl IndexAsymptotics {
    pub fn sd(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Approximate expectation of the estimated index.
    pub fn mean(&self) -> f64 {
        self.null_value + self.bias
    }

    pub fn scaled_variance(&self) -> f64 {
        self.variance * self.t as f64
    }

    pub fn scaled_bias(&self) -> f64 {
        self.bias * self.t as f64
    }

    /// null + bias -/+ z_{1-alpha/2} sd.
    pub fn critical_values(&self, alpha: f64) -> Result<(f64, f64)> {
        let z = normal_quantile_two_sided(alpha)?;
        let centre = self.mean();
        let half = z * self.sd();
        Ok((centre - half, centre + half))
    }
}

fn check_t(t: u64) -> Result<f64> {
    if t == 0 {
        return domain("sample size T must be at least 1");
    }
    Ok(t as f64)
}

fn check_binomial(n: u64, pi: f64) -> Result<()> {
    if n < 2 || !(pi > 0.0 && pi < 1.0) {
        return domain(format!("need n >= 2 and pi in (0, 1), got n = {n}, pi = {pi}"));
    }
    Ok(())
}

fn check_mean(mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu.is_finite()) {
        return domain(format!("index undefined for mean {mu}"));
    }
    Ok(())
}

/// Poisson dispersion index for any count model given through its moments.
pub fn poi_dispersion_asym_general(
    oracle: &dyn MomentOracle,
    law: &MaskLaw,
    t: u64,
    control: &SeriesControl,
) -> Result<IndexAsymptotics> {
    let tf = check_t(t)?;
    let tau = law.tau();
    let (mu, m2, m3, m4) = (oracle.moment(1), oracle.moment(2), oracle.moment(3), oracle.moment(4));
    check_mean(mu)?;
    let a = m2 / mu + mu;
    let var_lags =
        weighted_lag_sum(law, oracle, &[(a * a, 1, 1), (-a, 2, 1), (-a, 1, 2), (1.0, 2, 2)], control)?;
    let var_head = a * a * (m2 + mu) - 2.0 * a * (m3 + 2.0 * m2) + m4 + 4.0 * m3 + 2.0 * m2 - mu.powi(4);
    let variance = (var_head + 2.0 / tau * var_lags) / (tf * tau * mu * mu);

    let bias_lags =
        weighted_lag_sum(law, oracle, &[(m2, 1, 1), (-mu / 2.0, 2, 1), (-mu / 2.0, 1, 2)], control)?;
    let bias_head = m2 * m2 - mu * (m2 + m3);
    let bias = (bias_head + 2.0 / tau * bias_lags) / (tf * tau * mu.powi(3));
    Ok(IndexAsymptotics { kind: IndexKind::PoiDispersion, null_value: m2 / mu - mu + 1.0, variance, bias, t })
}

/// Poisson INAR(1) with Markov mask: variance 2 kappa(2)/T, bias -kappa(1)/T.
pub fn poi_dispersion_asym_markov(mu: f64, rho: f64, tau: f64, r: f64, t: u64) -> Result<IndexAsymptotics> {
    let tf = check_t(t)?;
    check_mean(mu)?;
    check_markov(tau, r, rho)?;
    Ok(IndexAsymptotics {
        kind: IndexKind::PoiDispersion,
        null_value: 1.0,
        variance: 2.0 * kappa(2, tau, r, rho)? / tf,
        bias: -kappa(1, tau, r, rho)? / tf,
        t,
    })
}

/// Binomial dispersion index for any count model on {0, ..., n}.
pub fn bin_dispersion_asym_general(
    n: u64,
    oracle: &dyn MomentOracle,
    law: &MaskLaw,
    t: u64,
    control: &SeriesControl,
) -> Result<IndexAsymptotics> {
    let tf = check_t(t)?;
    let tau = law.tau();
    let nf = n as f64;
    let (mu, m2, m3, m4) = (oracle.moment(1), oracle.moment(2), oracle.moment(3), oracle.moment(4));
    check_mean(mu)?;
    if !(mu < nf) {
        return domain(format!("binomial dispersion undefined for mean {mu} with n = {n}"));
    }
    let e = mu * (nf - mu);
    let b = mu * mu * (1.0 - nf) - nf * m2 + 2.0 * mu * m2;
    let g = mu.powi(3) * (1.0 - nf) + nf * nf * m2 + 3.0 * mu * m2 * (mu - nf);
    let c = 2.0 * mu - nf;

    let var_lags = weighted_lag_sum(
        law,
        oracle,
        &[(b * b, 1, 1), (e * b, 2, 1), (e * b, 1, 2), (e * e, 2, 2)],
        control,
    )?;
    let var_head = b * b * (m2 + mu - mu * mu)
        + 2.0 * e * b * (m3 + 2.0 * m2 - mu * m2)
        + e * e * (m4 + 4.0 * m3 + 2.0 * m2 - m2 * m2);
    let variance = nf * nf * (var_head + 2.0 / tau * var_lags) / (tf * tau * e.powi(4));

    let bias_lags = weighted_lag_sum(law, oracle, &[(2.0 * g, 1, 1), (e * c, 2, 1), (e * c, 1, 2)], control)?;
    let bias_head = g * (m2 + mu - mu * mu) + e * c * (m3 + 2.0 * m2 - mu * m2);
    let bias = nf * (bias_head + bias_lags / tau) / (tf * tau * e.powi(3));
    Ok(IndexAsymptotics {
        kind: IndexKind::BinDispersion,
        null_value: (m2 + mu - mu * mu) / (mu * (1.0 - mu / nf)),
        variance,
        bias,
        t,
    })
}

/// BAR(1) with Markov mask: the Poisson closed form scaled by (1 - 1/n).
pub fn bin_dispersion_asym_markov(
    n: u64,
    pi: f64,
    rho: f64,
    tau: f64,
    r: f64,
    t: u64,
) -> Result<IndexAsymptotics> {
    let tf = check_t(t)?;
    check_binomial(n, pi)?;
    check_markov(tau, r, rho)?;
    let shrink = 1.0 - 1.0 / n as f64;
    Ok(IndexAsymptotics {
        kind: IndexKind::BinDispersion,
        null_value: 1.0,
        variance: 2.0 * shrink * kappa(2, tau, r, rho)? / tf,
        bias: -shrink * kappa(1, tau, r, rho)? / tf,
        t,
    })
}

/// Skewness index via the delta method on the 3x3 covariance matrix.
///
/// `kind` selects the label (`SkewPoi` or `SkewBin`); the null value is the
/// model's own mu_(3)/(mu_(2) mu).
pub fn skew_asym_general(
    kind: IndexKind,
    oracle: &dyn MomentOracle,
    law: &MaskLaw,
    t: u64,
    control: &SeriesControl,
) -> Result<IndexAsymptotics> {
    if !kind.is_skewness() {
        return domain(format!("{kind} is not a skewness index"));
    }
    let tf = check_t(t)?;
    let (mu, m2, m3) = (oracle.moment(1), oracle.moment(2), oracle.moment(3));
    check_mean(mu)?;
    if !(m2 > 0.0) {
        return domain("skewness index undefined when the second factorial moment is zero");
    }
    let s = clt_sigma_matrix(oracle, law, control)?;
    let f = 1.0 / (m2 * mu);
    let d = [-f * m3 / mu, -f * m3 / m2, f];
    let h = [
        [2.0 * m3 / (mu * mu), m3 / (mu * m2), -1.0 / mu],
        [m3 / (mu * m2), 2.0 * m3 / (m2 * m2), -1.0 / m2],
        [-1.0 / mu, -1.0 / m2, 0.0],
    ];
    let mut variance = 0.0;
    let mut bias = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            variance += d[i] * d[j] * s[i][j];
            bias += 0.5 * f * h[i][j] * s[i][j];
        }
    }
    Ok(IndexAsymptotics { kind, null_value: m3 / (m2 * mu), variance: variance / tf, bias: bias / tf, t })
}

pub fn skew_asym_poisson_markov(mu: f64, rho: f64, tau: f64, r: f64, t: u64) -> Result<IndexAsymptotics> {
    let tf = check_t(t)?;
    check_mean(mu)?;
    check_markov(tau, r, rho)?;
    let (k1, k2, k3) = (kappa(1, tau, r, rho)?, kappa(2, tau, r, rho)?, kappa(3, tau, r, rho)?);
    Ok(IndexAsymptotics {
        kind: IndexKind::SkewPoi,
        null_value: 1.0,
        variance: (8.0 * mu * k2 + 6.0 * k3) / (tf * mu.powi(3)),
        bias: -2.0 * (mu * k1 + 2.0 * k2) / (tf * mu * mu),
        t,
    })
}

pub fn skew_asym_binomial_markov(
    n: u64,
    pi: f64,
    rho: f64,
    tau: f64,
    r: f64,
    t: u64,
) -> Result<IndexAsymptotics> {
    let tf = check_t(t)?;
    check_binomial(n, pi)?;
    check_markov(tau, r, rho)?;
    let nf = n as f64;
    let mu = nf * pi;
    let (k1, k2, k3) = (kappa(1, tau, r, rho)?, kappa(2, tau, r, rho)?, kappa(3, tau, r, rho)?);
    let lead_v = (nf - 2.0) * (nf - mu).powi(3) / ((nf - 1.0) * nf.powi(3));
    let variance = lead_v / (tf * mu.powi(3)) * ((nf - 2.0) / (nf - mu) * 8.0 * mu * k2 + 6.0 * k3);
    let lead_b = (nf - 2.0) * (nf - mu).powi(2) / ((nf - 1.0) * nf * nf);
    let bias = -lead_b * 2.0 / (tf * mu * mu) * ((nf - 1.0) / (nf - mu) * mu * k1 + 2.0 * k2);
    Ok(IndexAsymptotics { kind: IndexKind::SkewBin, null_value: 1.0 - 2.0 / nf, variance, bias, t })
}

/// Poisson dispersion through raw moments E[X^k] instead of factorial ones.
/// `raw` must report raw moments and raw mixed moments.
pub fn raw_poi_dispersion_asym(
    raw: &dyn MomentOracle,
    law: &MaskLaw,
    t: u64,
    control: &SeriesControl,
) -> Result<IndexAsymptotics> {
    let tf = check_t(t)?;
    let tau = law.tau();
    let (mu, m2, m3, m4) = (raw.moment(1), raw.moment(2), raw.moment(3), raw.moment(4));
    check_mean(mu)?;
    let a = m2 / (mu * mu) + 1.0;
    let var_head = a * a * (m2 - mu * mu) - 2.0 / mu * a * (m3 - mu * m2) + (m4 - m2 * m2) / (mu * mu);
    let var_lags = weighted_lag_sum(
        law,
        raw,
        &[(a * a, 1, 1), (1.0 / (mu * mu), 2, 2), (-a / mu, 2, 1), (-a / mu, 1, 2)],
        control,
    )?;
    let variance = (var_head + 2.0 / tau * var_lags) / (tf * tau);
    let bias_lags = weighted_lag_sum(law, raw, &[(m2, 1, 1), (-mu / 2.0, 2, 1), (-mu / 2.0, 1, 2)], control)?;
    let bias = (m2 * m2 - m3 * mu + 2.0 / tau * bias_lags) / (tf * tau * mu.powi(3));
    Ok(IndexAsymptotics {
        kind: IndexKind::PoiDispersion,
        // raw second moment over the mean, minus the mean: variance-to-mean ratio
        null_value: m2 / mu - mu,
        variance,
        bias,
        t,
    })
}

/// Markov closed form for `kind` under `model`, evaluated at the mask `missing`.
pub fn markov_asymptotics(
    kind: IndexKind,
    model: &ModelSpec,
    missing: &MissingSpec,
    t: u64,
) -> Result<IndexAsymptotics> {
    let (tau, r) = (missing.tau, missing.r);
    match (kind, model) {
        (IndexKind::PoiDispersion, ModelSpec::PoiInar1(p)) => {
            poi_dispersion_asym_markov(p.mu, p.rho, tau, r, t)
        }
        (IndexKind::SkewPoi, ModelSpec::PoiInar1(p)) => skew_asym_poisson_markov(p.mu, p.rho, tau, r, t),
        (IndexKind::BinDispersion, ModelSpec::Bar1(b)) => {
            bin_dispersion_asym_markov(b.n, b.pi, b.rho, tau, r, t)
        }
        (IndexKind::SkewBin, ModelSpec::Bar1(b)) => skew_asym_binomial_markov(b.n, b.pi, b.rho, tau, r, t),
        (kind, model) => domain(format!("index {kind} has no closed form under {model:?}")),
    }
}
