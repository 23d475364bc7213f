// SPDX-License-Identifier: MIT OR Apache-2.0
//! Asymptotic covariances of the masked factorial-moment estimators.

use crate::error::{domain, Error, Result};
use crate::moments::{falling_factorial_f64, MomentOracle};

use super::lagsum::{mask_autocovariance_sum, weighted_lag_sum, MaskLaw, SeriesControl, MIN_TAU};

/// Inputs for one entry of the limiting covariance matrix of
/// sqrt(T) (muhat_(i) - mu_(i)).
pub struct CovarianceRequest<'a> {
    pub i: u32,
    pub j: u32,
    pub oracle: &'a dyn MomentOracle,
    pub law: &'a MaskLaw,
    pub control: SeriesControl,
}

/// Kernel shared by every Markov closed form:
///
/// kappa(s) = (1/tau)(1 + r rho^s)/(1 - r rho^s) + 2(1 - r) rho^s / ((1 - r rho^s)(1 - rho^s)).
pub fn kappa(s: u32, tau: f64, r: f64, rho: f64) -> Result<f64> {
    check_markov(tau, r, rho)?;
    if s == 0 {
        return domain("kappa is defined for s >= 1");
    }
    let q = rho.powi(s as i32);
    let rq = r * q;
    if rq >= 1.0 || q >= 1.0 {
        return Err(Error::Numerical(format!("kappa({s}) has a pole at r = {r}, rho = {rho}")));
    }
    Ok((1.0 + rq) / (1.0 - rq) / tau + 2.0 * (1.0 - r) * q / ((1.0 - rq) * (1.0 - q)))
}

pub(crate) fn check_markov(tau: f64, r: f64, rho: f64) -> Result<()> {
    if !(MIN_TAU..=1.0).contains(&tau) {
        return domain(format!("tau must lie in [{MIN_TAU}, 1], got {tau}"));
    }
    if !(0.0..1.0).contains(&r) {
        return domain(format!("r must lie in [0, 1), got {r}"));
    }
    if !(0.0..1.0).contains(&rho) {
        return domain(format!("rho must lie in [0, 1), got {rho}"));
    }
    Ok(())
}

fn check_orders(i: u32, j: u32, oracle: &dyn MomentOracle) -> Result<()> {
    if i == 0 || j == 0 || i.max(j) > oracle.max_order() {
        return Err(Error::UnsupportedOrder(i, j));
    }
    Ok(())
}

/// sigma_ij = (1/tau)(mu_(i,j)(0) - mu_(i) mu_(j))
///          + (1/tau^2) sum_h tau(h) (centered_(j,i)(h) + centered_(i,j)(h)).
pub fn clt_sigma_general(req: &CovarianceRequest<'_>) -> Result<f64> {
    clt_sigma(req.i, req.j, req.oracle, req.law, &req.control)
}

pub fn clt_sigma(
    i: u32,
    j: u32,
    oracle: &dyn MomentOracle,
    law: &MaskLaw,
    control: &SeriesControl,
) -> Result<f64> {
    check_orders(i, j, oracle)?;
    let tau = law.tau();
    let lag0 = oracle.lag0(i, j)? - oracle.moment(i) * oracle.moment(j);
    let lags = weighted_lag_sum(law, oracle, &[(1.0, j, i), (1.0, i, j)], control)?;
    Ok(lag0 / tau + lags / (tau * tau))
}

/// Symmetric 3x3 covariance matrix for orders 1..=3.
pub fn clt_sigma_matrix(
    oracle: &dyn MomentOracle,
    law: &MaskLaw,
    control: &SeriesControl,
) -> Result<[[f64; 3]; 3]> {
    let mut m = [[0.0; 3]; 3];
    for i in 1..=3u32 {
        for j in i..=3u32 {
            let v = clt_sigma(i, j, oracle, law, control)?;
            m[i as usize - 1][j as usize - 1] = v;
            m[j as usize - 1][i as usize - 1] = v;
        }
    }
    Ok(m)
}

/// Covariance of the unnormalized pair (mean of O_t, mean of O_t (X_t)_(j)),
/// with index 0 standing for the mask mean itself.
pub fn sigma_star(
    i: u32,
    j: u32,
    oracle: &dyn MomentOracle,
    law: &MaskLaw,
    control: &SeriesControl,
) -> Result<f64> {
    let tau = law.tau();
    let s00 = tau * (1.0 - tau) + 2.0 * mask_autocovariance_sum(law, control)?;
    let (a, b) = (i.min(j), i.max(j));
    if b > oracle.max_order() {
        return Err(Error::UnsupportedOrder(i, j));
    }
    match (a, b) {
        (0, 0) => Ok(s00),
        (0, b) => Ok(s00 * oracle.moment(b)),
        (a, b) => {
            let (ma, mb) = (oracle.moment(a), oracle.moment(b));
            let lag0 = oracle.lag0(a, b)? - ma * mb;
            let lags = weighted_lag_sum(law, oracle, &[(1.0, b, a), (1.0, a, b)], control)?;
            Ok(tau * lag0 + s00 * ma * mb + lags)
        }
    }
}

fn ordered(i: u32, j: u32) -> Result<(u32, u32)> {
    let (a, b) = (i.min(j), i.max(j));
    if a == 0 || b > 3 {
        return Err(Error::UnsupportedOrder(i, j));
    }
    Ok((a, b))
}

/// Closed-form covariances for a Poisson INAR(1) process under a Markov mask.
pub fn sigma_poisson_markov(i: u32, j: u32, mu: f64, rho: f64, tau: f64, r: f64) -> Result<f64> {
    let (a, b) = ordered(i, j)?;
    if !(mu > 0.0) {
        return domain(format!("Poisson mean must be positive, got {mu}"));
    }
    let k1 = kappa(1, tau, r, rho)?;
    let s11 = mu * k1;
    let s22 = || -> Result<f64> { Ok(4.0 * mu * mu * s11 + 2.0 * mu * mu * kappa(2, tau, r, rho)?) };
    Ok(match (a, b) {
        (1, 1) => s11,
        (1, 2) => 2.0 * mu * s11,
        (1, 3) => 3.0 * mu * mu * s11,
        (2, 2) => s22()?,
        (2, 3) => 3.0 * mu * s22()? - 6.0 * mu.powi(3) * s11,
        (3, 3) => {
            9.0 * mu * mu * s22()? - 27.0 * mu.powi(4) * s11 + 6.0 * mu.powi(3) * kappa(3, tau, r, rho)?
        }
        _ => unreachable!("orders checked above"),
    })
}

/// Closed-form covariances for a BAR(1) process under a Markov mask.
pub fn sigma_binomial_markov(i: u32, j: u32, n: u64, pi: f64, rho: f64, tau: f64, r: f64) -> Result<f64> {
    let (a, b) = ordered(i, j)?;
    if n < 2 || !(pi > 0.0 && pi < 1.0) {
        return domain(format!("binomial parameters need n >= 2 and pi in (0, 1), got n = {n}, pi = {pi}"));
    }
    let nf = n as f64;
    let q = 1.0 - pi;
    let s11 = nf * pi * q * kappa(1, tau, r, rho)?;
    let s22 = || -> Result<f64> {
        Ok(4.0 * (nf - 1.0).powi(2) * pi * pi * s11
            + 2.0 * falling_factorial_f64(n, 2) * q * q * pi * pi * kappa(2, tau, r, rho)?)
    };
    Ok(match (a, b) {
        (1, 1) => s11,
        (1, 2) => 2.0 * (nf - 1.0) * pi * s11,
        (1, 3) => 3.0 * (nf - 1.0) * (nf - 2.0) * pi * pi * s11,
        (2, 2) => s22()?,
        (2, 3) => 3.0 * (nf - 2.0) * pi * s22()? - 6.0 * (nf - 1.0).powi(2) * (nf - 2.0) * pi.powi(3) * s11,
        (3, 3) => {
            9.0 * (nf - 2.0).powi(2) * pi * pi * s22()?
                - 27.0 * (nf - 1.0).powi(2) * (nf - 2.0).powi(2) * pi.powi(4) * s11
                + 6.0 * falling_factorial_f64(n, 3) * q.powi(3) * pi.powi(3) * kappa(3, tau, r, rho)?
        }
        _ => unreachable!("orders checked above"),
    })
}
