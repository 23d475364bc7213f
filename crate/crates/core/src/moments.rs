// SPDX-License-Identifier: MIT OR Apache-2.0
//! Factorial moments: sample estimators under a mask, closed forms for the
//! two model families, and the moment-oracle interface used by the
//! asymptotics.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::{powu, CountSeries};

/// x(x-1)...(x-k+1), with x_(0) = 1 and 0 once k > x.
///
/// Panics if the product does not fit in 128 bits.
pub fn falling_factorial(x: u64, k: u32) -> u128 {
    if k as u64 > x {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k as u64 {
        acc = acc.checked_mul((x - i) as u128).expect("falling factorial overflows u128");
    }
    acc
}

/// Falling factorial as a float. Exact while the value fits in 128 bits,
/// continued in floating point beyond that.
pub fn falling_factorial_f64(x: u64, k: u32) -> f64 {
    if k as u64 > x {
        return 0.0;
    }
    let mut acc: u128 = 1;
    for i in 0..k as u64 {
        match acc.checked_mul((x - i) as u128) {
            Some(v) => acc = v,
            None => {
                return (i..k as u64).fold(acc as f64, |a, j| a * (x - j) as f64);
            }
        }
    }
    acc as f64
}

/// Binomial coefficient C(n, k) as a float.
pub fn binomial_coefficient(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        match acc.checked_mul((n - i) as u128) {
            Some(v) => acc = v / (i as u128 + 1),
            None => {
                return (i..k).fold(acc as f64, |a, j| a * (n - j) as f64 / (j + 1) as f64);
            }
        }
    }
    acc as f64
}

/// Stirling number of the second kind S(n, k).
pub fn stirling2(n: u32, k: u32) -> u64 {
    if n == 0 && k == 0 {
        return 1;
    }
    if n == 0 || k == 0 || k > n {
        return 0;
    }
    let mut row = vec![0u64; k as usize + 1];
    row[0] = 1;
    for i in 1..=n as usize {
        for j in (1..=k.min(i as u32) as usize).rev() {
            row[j] = j as u64 * row[j] + row[j - 1];
        }
        row[0] = 0;
    }
    row[k as usize]
}

/// Sample factorial moments of the observed positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub m: u32,
    /// `muhat[k - 1]` holds the k-th factorial moment estimate.
    pub muhat: Vec<f64>,
    pub n_observed: usize,
    pub tauhat: f64,
}

impl MomentSummary {
    pub fn mean(&self) -> f64 {
        self.muhat[0]
    }

    /// k-th factorial moment estimate, k in 1..=m.
    pub fn factorial(&self, k: u32) -> f64 {
        self.muhat[k as usize - 1]
    }
}

/// Sum of O_t (X_t)_(k) over the series, divided by the number of observed points.
pub fn sample_factorial_moments(series: &CountSeries, m: u32) -> Result<MomentSummary> {
    if m == 0 {
        return domain("maximum moment order must be at least 1");
    }
    let mut sums = vec![0.0f64; m as usize];
    let mut n_observed = 0usize;
    for x in series.observed() {
        n_observed += 1;
        let xf = x as f64;
        let mut ff = 1.0;
        for (k, s) in sums.iter_mut().enumerate() {
            ff *= xf - k as f64;
            if ff == 0.0 {
                break;
            }
            *s += ff;
        }
    }
    if n_observed == 0 {
        return Err(Error::Degenerate("every position is masked".into()));
    }
    let denom = n_observed as f64;
    Ok(MomentSummary {
        m,
        muhat: sums.into_iter().map(|s| s / denom).collect(),
        n_observed,
        tauhat: denom / series.len() as f64,
    })
}

pub fn poisson_factorial_moment(mu: f64, k: u32) -> f64 {
    mu.powi(k as i32)
}

/// n_(k) pi^k, zero for k > n.
pub fn binomial_factorial_moment(n: u64, pi: f64, k: u32) -> f64 {
    if k as u64 > n {
        return 0.0;
    }
    falling_factorial_f64(n, k) * pi.powi(k as i32)
}

/// Coefficients `c_i` (i = 1, 2, ...) of the centered Poisson INAR(1) mixed
/// moment, written as a polynomial in rho^h.
fn bpoi_coefficients(mu: f64, k: u32, s: u32) -> Vec<f64> {
    let base = mu.powi((k + s) as i32);
    (1..=k.min(s))
        .map(|i| {
            binomial_coefficient(k as u64, i as u64)
                * binomial_coefficient(s as u64, i as u64)
                * falling_factorial_f64(i as u64, i)
                * base
                / mu.powi(i as i32)
        })
        .collect()
}

/// E[(X_t)_(k) (X_{t-h})_(s)] for a Poisson INAR(1) process, `h >= 1`.
pub fn bpoi_mixed_factorial(mu: f64, rho: f64, h: u64, k: u32, s: u32) -> f64 {
    let q = powu(rho, h);
    let head = mu.powi((k + s) as i32);
    head + eval_expansion(&bpoi_coefficients(mu, k, s), q)
}

/// Hypergeometric weights C(k,i) C(n-k, s-i) / C(n,s) for i = 0..=min(k,s).
fn hypergeometric_weights(n: u64, k: u32, s: u32) -> Vec<f64> {
    let cns = binomial_coefficient(n, s as u64);
    (0..=k.min(s))
        .map(|i| {
            if (s - i) as u64 > n - k as u64 {
                0.0
            } else {
                binomial_coefficient(k as u64, i as u64) * binomial_coefficient(n - k as u64, (s - i) as u64)
                    / cns
            }
        })
        .collect()
}

/// Coefficients of rho^{jh}, j >= 1, of the centered BAR(1) mixed moment.
fn bbin_coefficients(n: u64, pi: f64, k: u32, s: u32) -> Vec<f64> {
    if k as u64 > n || s as u64 > n {
        return Vec::new();
    }
    let head = binomial_factorial_moment(n, pi, k) * binomial_factorial_moment(n, pi, s);
    let c = (1.0 - pi) / pi;
    let w = hypergeometric_weights(n, k, s);
    (1..=k.min(s) as usize)
        .map(|j| {
            let inner: f64 = (j..w.len()).map(|i| w[i] * binomial_coefficient(i as u64, j as u64)).sum();
            head * inner * c.powi(j as i32)
        })
        .collect()
}

/// E[(X_t)_(k) (X_{t-h})_(s)] for a BAR(1) process, `h >= 1`, `k, s <= n`.
pub fn bbin_mixed_factorial(n: u64, pi: f64, rho: f64, h: u64, k: u32, s: u32) -> f64 {
    if k as u64 > n || s as u64 > n {
        return 0.0;
    }
    let q = powu(rho, h);
    let head = binomial_factorial_moment(n, pi, k) * binomial_factorial_moment(n, pi, s);
    let c = (1.0 - pi) / pi;
    let sum: f64 = hypergeometric_weights(n, k, s)
        .iter()
        .enumerate()
        .map(|(i, w)| w * (1.0 + c * q).powi(i as i32))
        .sum();
    head * sum
}

fn eval_expansion(coeffs: &[f64], q: f64) -> f64 {
    // Horner in q, without the constant term.
    coeffs.iter().rev().fold(0.0, |acc, c| (acc + c) * q)
}

/// Lag-zero mixed factorial moment E[(X)_(k) (X)_(s)] from univariate
/// factorial moments `fact[0..6]` = mu_(1), ..., mu_(6).
///
/// Supports the order pairs needed up to third moments, in either order.
pub fn lag0_mixed_factorial(fact: &[f64], k: u32, s: u32) -> Result<f64> {
    let m = |j: usize| -> Result<f64> {
        if j == 0 {
            return Ok(1.0);
        }
        fact.get(j - 1)
            .copied()
            .ok_or_else(|| Error::Domain(format!("factorial moment of order {j} not supplied")))
    };
    let (a, b) = (k.min(s), k.max(s));
    match (a, b) {
        (0, b) => m(b as usize),
        (1, 1) => Ok(m(2)? + m(1)?),
        (1, 2) => Ok(m(3)? + 2.0 * m(2)?),
        (2, 2) => Ok(m(4)? + 4.0 * m(3)? + 2.0 * m(2)?),
        (1, 3) => Ok(m(4)? + 3.0 * m(3)?),
        (2, 3) => Ok(m(5)? + 6.0 * m(4)? + 6.0 * m(3)?),
        (3, 3) => Ok(m(6)? + 9.0 * m(5)? + 18.0 * m(4)? + 6.0 * m(3)?),
        _ => Err(Error::UnsupportedOrder(k, s)),
    }
}

/// Raw moments mu_j = sum_k S(j,k) mu_(k) for j = 1..=fact.len().
pub fn raw_from_factorial(fact: &[f64]) -> Vec<f64> {
    (1..=fact.len() as u32)
        .map(|j| (1..=j).map(|k| stirling2(j, k) as f64 * fact[k as usize - 1]).sum())
        .collect()
}

/// Moment information for a stationary count process, as consumed by the
/// asymptotic formulas.
///
/// `moment(k)` and `mixed(k, s, h)` may be factorial or raw moments; the
/// covariance formulas have the same shape for both.
pub trait MomentOracle: Send + Sync {
    /// Highest single-variable order available.
    fn max_order(&self) -> u32;

    fn moment(&self, k: u32) -> f64;

    /// E[Y_k(X_t) Y_s(X_t)].
    fn lag0(&self, k: u32, s: u32) -> Result<f64>;

    /// E[Y_k(X_t) Y_s(X_{t-h})] for h >= 1.
    fn mixed(&self, k: u32, s: u32, h: u64) -> f64;

    /// Centered mixed moment as a polynomial in `decay()^h` without
    /// constant term, when one is available.
    fn centered_expansion(&self, _k: u32, _s: u32) -> Option<Vec<f64>> {
        None
    }

    /// Geometric decay rate of the centered mixed moments in h.
    fn decay(&self) -> f64;

    /// mixed(k, s, h) - moment(k) moment(s).
    fn centered(&self, k: u32, s: u32, h: u64) -> f64 {
        match self.centered_expansion(k, s) {
            Some(c) => eval_expansion(&c, powu(self.decay(), h)),
            None => self.mixed(k, s, h) - self.moment(k) * self.moment(s),
        }
    }
}

/// Factorial moments of the Poisson INAR(1) model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonInar1Moments {
    pub mu: f64,
    pub rho: f64,
}

impl PoissonInar1Moments {
    pub fn new(mu: f64, rho: f64) -> Self {
        Self { mu, rho }
    }
}

impl MomentOracle for PoissonInar1Moments {
    fn max_order(&self) -> u32 {
        6
    }

    fn moment(&self, k: u32) -> f64 {
        poisson_factorial_moment(self.mu, k)
    }

    fn lag0(&self, k: u32, s: u32) -> Result<f64> {
        let fact: Vec<f64> = (1..=6).map(|j| self.moment(j)).collect();
        lag0_mixed_factorial(&fact, k, s)
    }

    fn mixed(&self, k: u32, s: u32, h: u64) -> f64 {
        bpoi_mixed_factorial(self.mu, self.rho, h, k, s)
    }

    fn centered_expansion(&self, k: u32, s: u32) -> Option<Vec<f64>> {
        Some(bpoi_coefficients(self.mu, k, s))
    }

    fn decay(&self) -> f64 {
        self.rho
    }
}

/// Factorial moments of the BAR(1) model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bar1Moments {
    pub n: u64,
    pub pi: f64,
    pub rho: f64,
}

impl Bar1Moments {
    pub fn new(n: u64, pi: f64, rho: f64) -> Self {
        Self { n, pi, rho }
    }
}

impl MomentOracle for Bar1Moments {
    fn max_order(&self) -> u32 {
        6
    }

    fn moment(&self, k: u32) -> f64 {
        binomial_factorial_moment(self.n, self.pi, k)
    }

    fn lag0(&self, k: u32, s: u32) -> Result<f64> {
        let fact: Vec<f64> = (1..=6).map(|j| self.moment(j)).collect();
        lag0_mixed_factorial(&fact, k, s)
    }

    fn mixed(&self, k: u32, s: u32, h: u64) -> f64 {
        bbin_mixed_factorial(self.n, self.pi, self.rho, h, k, s)
    }

    fn centered_expansion(&self, k: u32, s: u32) -> Option<Vec<f64>> {
        Some(bbin_coefficients(self.n, self.pi, k, s))
    }

    fn decay(&self) -> f64 {
        self.rho
    }
}

/// Raw-moment view of a factorial-moment oracle, via Stirling numbers.
pub struct RawMoments<O> {
    inner: O,
}

impl<O: MomentOracle> RawMoments<O> {
    pub fn new(inner: O) -> Self {
        Self { inner }
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: MomentOracle> MomentOracle for RawMoments<O> {
    fn max_order(&self) -> u32 {
        self.inner.max_order()
    }

    fn moment(&self, k: u32) -> f64 {
        (1..=k).map(|a| stirling2(k, a) as f64 * self.inner.moment(a)).sum::<f64>()
            + if k == 0 { 1.0 } else { 0.0 }
    }

    fn lag0(&self, k: u32, s: u32) -> Result<f64> {
        if k + s > self.inner.max_order() {
            return Err(Error::UnsupportedOrder(k, s));
        }
        Ok(self.moment(k + s))
    }

    fn mixed(&self, k: u32, s: u32, h: u64) -> f64 {
        let mut acc = 0.0;
        for a in 1..=k {
            for b in 1..=s {
                acc += (stirling2(k, a) * stirling2(s, b)) as f64 * self.inner.mixed(a, b, h);
            }
        }
        acc
    }

    fn centered_expansion(&self, k: u32, s: u32) -> Option<Vec<f64>> {
        let mut out: Vec<f64> = Vec::new();
        for a in 1..=k {
            for b in 1..=s {
                let w = (stirling2(k, a) * stirling2(s, b)) as f64;
                let c = self.inner.centered_expansion(a, b)?;
                if out.len() < c.len() {
                    out.resize(c.len(), 0.0);
                }
                for (o, ci) in out.iter_mut().zip(&c) {
                    *o += w * ci;
                }
            }
        }
        Some(out)
    }

    fn decay(&self) -> f64 {
        self.inner.decay()
    }

    fn centered(&self, k: u32, s: u32, h: u64) -> f64 {
        let mut acc = 0.0;
        for a in 1..=k {
            for b in 1..=s {
                acc += (stirling2(k, a) * stirling2(s, b)) as f64 * self.inner.centered(a, b, h);
            }
        }
        acc
    }
}
