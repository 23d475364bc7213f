// SPDX-License-Identifier: MIT OR Apache-2.0
//! Domain types and exact-stationary simulators.
//!
//! Both count processes and the observation mask start from their
//! stationary law, so no burn-in is needed and every prefix of a
//! simulated path is itself stationary.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Below this count, thinning is done trial by trial. It is exact either way.
const SMALL_THINNING: u64 = 24;

/// Counts paired with a binary observation mask.
///
/// Positions with `mask[t] == false` hold a sentinel that no estimator
/// reads. [`apply_mask`] writes 0 there, but any value is allowed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountSeries {
    values: Vec<u64>,
    mask: Vec<bool>,
}

impl CountSeries {
    pub fn new(values: Vec<u64>, mask: Vec<bool>) -> Result<Self> {
        if values.len() != mask.len() {
            return Err(Error::LengthMismatch { values: values.len(), mask: mask.len() });
        }
        if values.is_empty() {
            return Err(Error::Degenerate("series of length zero".into()));
        }
        Ok(Self { values, mask })
    }

    pub fn fully_observed(values: Vec<u64>) -> Result<Self> {
        let mask = vec![true; values.len()];
        Self::new(values, mask)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Raw value slice, sentinels included.
    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn n_observed(&self) -> usize {
        self.mask.iter().filter(|&&o| o).count()
    }

    pub fn is_fully_observed(&self) -> bool {
        self.mask.iter().all(|&o| o)
    }

    /// Value at `t` if observed.
    pub fn get(&self, t: usize) -> Option<u64> {
        self.mask[t].then(|| self.values[t])
    }

    /// Observed values in time order.
    pub fn observed(&self) -> impl Iterator<Item = u64> + '_ {
        self.values.iter().zip(&self.mask).filter_map(|(&x, &o)| o.then_some(x))
    }

    /// Drops the hidden positions and returns the shorter, fully observed series.
    pub fn compact(&self) -> Result<Self> {
        let kept: Vec<u64> = self.observed().collect();
        if kept.is_empty() {
            return Err(Error::Degenerate("no observed values".into()));
        }
        Self::fully_observed(kept)
    }
}

/// Poisson INAR(1) parameters: marginal mean `mu` and lag-1 autocorrelation `rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoiInar1 {
    pub mu: f64,
    pub rho: f64,
}

impl PoiInar1 {
    pub fn new(mu: f64, rho: f64) -> Result<Self> {
        let spec = Self { mu, rho };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return domain(format!("Poisson mean must be positive, got {}", self.mu));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return domain(format!("INAR(1) rho must lie in [0, 1), got {}", self.rho));
        }
        Ok(())
    }

    /// Innovation mean mu * (1 - rho).
    pub fn innovation_mean(&self) -> f64 {
        self.mu * (1.0 - self.rho)
    }
}

/// Binomial AR(1) parameters on `{0, ..., n}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bar1 {
    pub n: u64,
    pub pi: f64,
    pub rho: f64,
}

impl Bar1 {
    pub fn new(n: u64, pi: f64, rho: f64) -> Result<Self> {
        let spec = Self { n, pi, rho };
        spec.validate()?;
        Ok(spec)
    }

    /// Open interval of admissible autocorrelations for this `pi`.
    pub fn rho_bounds(pi: f64) -> (f64, f64) {
        let lower = (-pi / (1.0 - pi)).max(-(1.0 - pi) / pi);
        (lower, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return domain(format!("BAR(1) upper bound n must be at least 2, got {}", self.n));
        }
        if !(self.pi > 0.0 && self.pi < 1.0) {
            return domain(format!("BAR(1) pi must lie in (0, 1), got {}", self.pi));
        }
        let (lo, hi) = Self::rho_bounds(self.pi);
        if !(self.rho > lo) {
            return domain(format!(
                "BAR(1) rho = {} violates the lower bound max(-pi/(1-pi), -(1-pi)/pi) = {lo}",
                self.rho
            ));
        }
        if !(self.rho < hi) {
            return domain(format!("BAR(1) rho = {} violates the upper bound 1", self.rho));
        }
        Ok(())
    }

    /// Thinning probabilities `(alpha, beta)` with beta = pi(1 - rho), alpha = beta + rho.
    pub fn thinning_probs(&self) -> (f64, f64) {
        let beta = self.pi * (1.0 - self.rho);
        (beta + self.rho, beta)
    }

    pub fn mean(&self) -> f64 {
        self.n as f64 * self.pi
    }
}

/// Null model for a count series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelSpec {
    PoiInar1(PoiInar1),
    Bar1(Bar1),
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::PoiInar1(p) => p.validate(),
            ModelSpec::Bar1(b) => b.validate(),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            ModelSpec::PoiInar1(p) => p.mu,
            ModelSpec::Bar1(b) => b.mean(),
        }
    }

    pub fn rho(&self) -> f64 {
        match self {
            ModelSpec::PoiInar1(p) => p.rho,
            ModelSpec::Bar1(b) => b.rho,
        }
    }

    /// Upper bound of the support, if bounded.
    pub fn upper_bound(&self) -> Option<u64> {
        match self {
            ModelSpec::PoiInar1(_) => None,
            ModelSpec::Bar1(b) => Some(b.n),
        }
    }
}

/// Stationary binary Markov observation process.
///
/// `tau` is the probability of observing a value, `r` the lag-1
/// autocorrelation of the mask. `r = 0` gives an i.i.d. mask.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MissingSpec {
    pub tau: f64,
    pub r: f64,
}

impl MissingSpec {
    pub fn new(tau: f64, r: f64) -> Result<Self> {
        let spec = Self { tau, r };
        spec.validate()?;
        Ok(spec)
    }

    pub fn complete() -> Self {
        Self { tau: 1.0, r: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return domain(format!("observation probability tau must lie in (0, 1], got {}", self.tau));
        }
        if !(0.0..1.0).contains(&self.r) {
            return domain(format!("mask autocorrelation r must lie in [0, 1), got {}", self.r));
        }
        Ok(())
    }

    /// E[O_t O_{t-h}] = tau^2 + tau(1 - tau) r^h.
    pub fn lagged_product(&self, h: u64) -> f64 {
        let tau = self.tau;
        if h == 0 {
            return tau;
        }
        tau * tau + tau * (1.0 - tau) * powu(self.r, h)
    }

    /// Autocovariance of the mask at lag `h >= 1`.
    pub fn mask_autocovariance(&self, h: u64) -> f64 {
        self.tau * (1.0 - self.tau) * powu(self.r, h)
    }

    /// Transition probabilities `(P(1 | 1), P(1 | 0))`.
    pub fn transition_probs(&self) -> (f64, f64) {
        let tau = self.tau;
        (tau + (1.0 - tau) * self.r, tau * (1.0 - self.r))
    }
}

pub(crate) fn powu(x: f64, h: u64) -> f64 {
    if h <= i32::MAX as u64 {
        x.powi(h as i32)
    } else {
        x.powf(h as f64)
    }
}

/// Reproducible random stream: a master seed plus a stream index.
///
/// Distinct stream indices give statistically independent ChaCha streams
/// under the same master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub master: u64,
    pub stream: u64,
}

impl Seed {
    pub fn new(master: u64, stream: u64) -> Self {
        Self { master, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.stream);
        rng
    }
}

/// Draws from Bin(x, p), i.e. the binomial thinning p∘x.
pub fn binomial_thinning<R: Rng + ?Sized>(x: u64, p: f64, rng: &mut R) -> Result<u64> {
    if !(0.0..=1.0).contains(&p) {
        return domain(format!("thinning probability must lie in [0, 1], got {p}"));
    }
    Ok(thin(x, p, rng))
}

fn thin<R: Rng + ?Sized>(x: u64, p: f64, rng: &mut R) -> u64 {
    if x == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return x;
    }
    if x <= SMALL_THINNING {
        (0..x).filter(|_| rng.random::<f64>() < p).count() as u64
    } else {
        Binomial::new(x, p).expect("probability checked above").sample(rng)
    }
}

/// Fully observed Poisson INAR(1) path of length `t`.
pub fn simulate_poi_inar1(spec: &PoiInar1, t: usize, seed: Seed) -> Result<CountSeries> {
    let mut rng = seed.rng();
    let values = simulate_poi_inar1_with(spec, t, &mut rng)?;
    CountSeries::fully_observed(values)
}

pub fn simulate_poi_inar1_with<R: Rng + ?Sized>(spec: &PoiInar1, t: usize, rng: &mut R) -> Result<Vec<u64>> {
    spec.validate()?;
    if t == 0 {
        return domain("series length must be at least 1");
    }
    let marginal = Poisson::new(spec.mu).map_err(|e| Error::Domain(e.to_string()))?;
    let innovation = Poisson::new(spec.innovation_mean()).map_err(|e| Error::Domain(e.to_string()))?;
    let mut out = Vec::with_capacity(t);
    let mut x = marginal.sample(rng) as u64;
    out.push(x);
    for _ in 1..t {
        x = thin(x, spec.rho, rng) + innovation.sample(rng) as u64;
        out.push(x);
    }
    Ok(out)
}

/// Fully observed BAR(1) path of length `t`.
pub fn simulate_bar1(spec: &Bar1, t: usize, seed: Seed) -> Result<CountSeries> {
    let mut rng = seed.rng();
    let values = simulate_bar1_with(spec, t, &mut rng)?;
    CountSeries::fully_observed(values)
}

pub fn simulate_bar1_with<R: Rng + ?Sized>(spec: &Bar1, t: usize, rng: &mut R) -> Result<Vec<u64>> {
    spec.validate()?;
    if t == 0 {
        return domain("series length must be at least 1");
    }
    let (alpha, beta) = spec.thinning_probs();
    let n = spec.n;
    let mut out = Vec::with_capacity(t);
    let mut x = thin(n, spec.pi, rng);
    out.push(x);
    for _ in 1..t {
        x = thin(x, alpha, rng) + thin(n - x, beta, rng);
        out.push(x);
    }
    Ok(out)
}

/// Simulates either model.
pub fn simulate_model_with<R: Rng + ?Sized>(model: &ModelSpec, t: usize, rng: &mut R) -> Result<Vec<u64>> {
    match model {
        ModelSpec::PoiInar1(p) => simulate_poi_inar1_with(p, t, rng),
        ModelSpec::Bar1(b) => simulate_bar1_with(b, t, rng),
    }
}

/// Stationary Markov observation mask of length `t`.
pub fn simulate_markov_mask(spec: &MissingSpec, t: usize, seed: Seed) -> Result<Vec<bool>> {
    let mut rng = seed.rng();
    simulate_markov_mask_with(spec, t, &mut rng)
}

pub fn simulate_markov_mask_with<R: Rng + ?Sized>(
    spec: &MissingSpec,
    t: usize,
    rng: &mut R,
) -> Result<Vec<bool>> {
    spec.validate()?;
    if spec.tau >= 1.0 {
        return Ok(vec![true; t]);
    }
    let (p11, p10) = spec.transition_probs();
    let mut out = Vec::with_capacity(t);
    let mut o = rng.random::<f64>() < spec.tau;
    for i in 0..t {
        if i > 0 {
            let p = if o { p11 } else { p10 };
            o = rng.random::<f64>() < p;
        }
        out.push(o);
    }
    Ok(out)
}

/// Attaches `mask` to `series` and zeroes the hidden positions.
pub fn apply_mask(series: &CountSeries, mask: &[bool]) -> Result<CountSeries> {
    if series.len() != mask.len() {
        return Err(Error::LengthMismatch { values: series.len(), mask: mask.len() });
    }
    let values = series.values().iter().zip(mask).map(|(&x, &o)| if o { x } else { 0 }).collect();
    CountSeries::new(values, mask.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thinning_edge_probabilities() {
        let mut rng = Seed::new(1, 0).rng();
        assert_eq!(binomial_thinning(5, 0.0, &mut rng).unwrap(), 0);
        assert_eq!(binomial_thinning(7, 1.0, &mut rng).unwrap(), 7);
        assert!(binomial_thinning(3, 1.5, &mut rng).is_err());
        assert!(binomial_thinning(3, -0.1, &mut rng).is_err());
    }

    #[test]
    fn thinning_mean_matches_binomial() {
        let mut rng = Seed::new(7, 3).rng();
        let draws = 100_000;
        let sum: u64 = (0..draws).map(|_| binomial_thinning(4, 0.5, &mut rng).unwrap()).sum();
        let mean = sum as f64 / draws as f64;
        let se = (4.0 * 0.25 / draws as f64).sqrt();
        assert!((mean - 2.0).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn large_counts_use_exact_sampler() {
        let mut rng = Seed::new(11, 0).rng();
        let draws = 20_000;
        let sum: u64 = (0..draws).map(|_| binomial_thinning(200, 0.3, &mut rng).unwrap()).sum();
        let mean = sum as f64 / draws as f64;
        let se = (200.0 * 0.21 / draws as f64).sqrt();
        assert!((mean - 60.0).abs() < 3.0 * se);
    }

    #[test]
    fn bar1_thinning_parameters() {
        let b = Bar1::new(10, 0.3, 0.5).unwrap();
        let (alpha, beta) = b.thinning_probs();
        assert!((alpha - 0.65).abs() < 1e-15);
        assert!((beta - 0.15).abs() < 1e-15);
    }

    #[test]
    fn bar1_rejects_inadmissible_rho() {
        // pi = 0.3: lower bound is max(-3/7, -7/3) = -3/7
        let err = Bar1::new(10, 0.3, -0.5).unwrap_err();
        assert!(err.to_string().contains("lower bound"), "{err}");
        assert!(Bar1::new(10, 0.3, -0.4).is_ok());
        let err = Bar1::new(10, 0.3, 1.0).unwrap_err();
        assert!(err.to_string().contains("upper bound"));
        assert!(Bar1::new(1, 0.3, 0.2).is_err());
    }

    #[test]
    fn poi_inar1_validation() {
        assert!(PoiInar1::new(3.0, 0.5).is_ok());
        assert!(PoiInar1::new(0.0, 0.5).is_err());
        assert!(PoiInar1::new(3.0, 1.0).is_err());
        assert!(PoiInar1::new(3.0, -0.1).is_err());
        assert!((PoiInar1::new(3.0, 0.5).unwrap().innovation_mean() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn mask_transitions() {
        let m = MissingSpec::new(0.5, 0.0).unwrap();
        assert_eq!(m.transition_probs(), (0.5, 0.5));
        let m = MissingSpec::new(0.8, 0.6).unwrap();
        let (p11, p10) = m.transition_probs();
        assert!((p11 - 0.92).abs() < 1e-15);
        assert!((p10 - 0.32).abs() < 1e-15);
        assert!(MissingSpec::new(0.0, 0.1).is_err());
        assert!(MissingSpec::new(0.5, 1.0).is_err());
    }

    #[test]
    fn complete_mask_is_all_ones() {
        let spec = MissingSpec::new(1.0, 0.6).unwrap();
        let mask = simulate_markov_mask(&spec, 500, Seed::new(3, 1)).unwrap();
        assert!(mask.iter().all(|&o| o));
    }

    #[test]
    fn apply_mask_cases() {
        let s = CountSeries::fully_observed(vec![2, 3, 1]).unwrap();
        assert_eq!(apply_mask(&s, &[true, true, true]).unwrap(), s);
        let m = apply_mask(&s, &[true, false, true]).unwrap();
        assert_eq!(m.n_observed(), 2);
        assert_eq!(m.values(), &[2, 0, 1]);
        assert_eq!(m.get(1), None);
        let hidden = apply_mask(&s, &[false, false, false]).unwrap();
        assert_eq!(hidden.n_observed(), 0);
        assert!(matches!(apply_mask(&s, &[true, false]), Err(Error::LengthMismatch { values: 3, mask: 2 })));
    }

    #[test]
    fn same_seed_same_path() {
        let spec = Bar1::new(10, 0.3, 0.5).unwrap();
        let a = simulate_bar1(&spec, 300, Seed::new(42, 9)).unwrap();
        let b = simulate_bar1(&spec, 300, Seed::new(42, 9)).unwrap();
        let c = simulate_bar1(&spec, 300, Seed::new(42, 10)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.values().iter().all(|&x| x <= 10));
    }
}
