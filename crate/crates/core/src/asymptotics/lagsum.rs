// SPDX-License-Identifier: MIT OR Apache-2.0
//! Sums over lags h >= 1 weighted by the mask's lagged product tau(h).

use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::model::{powu, MissingSpec};
use crate::moments::MomentOracle;

/// Observation probabilities below this are rejected by the asymptotics.
pub const MIN_TAU: f64 = 0.01;

/// Law of the observation mask as seen by the asymptotics.
#[derive(Clone)]
pub enum MaskLaw {
    Markov(MissingSpec),
    /// Arbitrary stationary mask given through tau(h) = E[O_t O_{t+h}].
    ///
    /// `gamma_decay` is a geometric rate bounding how fast
    /// tau(h) - tau^2 decays; it drives the truncation of the mask sums.
    Sequence {
        tau: f64,
        lagged: Arc<dyn Fn(u64) -> f64 + Send + Sync>,
        gamma_decay: f64,
    },
}

impl fmt::Debug for MaskLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaskLaw::Markov(m) => f.debug_tuple("Markov").field(m).finish(),
            MaskLaw::Sequence { tau, gamma_decay, .. } => f
                .debug_struct("Sequence")
                .field("tau", tau)
                .field("gamma_decay", gamma_decay)
                .finish_non_exhaustive(),
        }
    }
}

impl MaskLaw {
    pub fn markov(tau: f64, r: f64) -> Result<Self> {
        let law = MaskLaw::Markov(MissingSpec::new(tau, r)?);
        law.validate()?;
        Ok(law)
    }

    pub fn tau(&self) -> f64 {
        match self {
            MaskLaw::Markov(m) => m.tau,
            MaskLaw::Sequence { tau, .. } => *tau,
        }
    }

    /// tau(h) = E[O_t O_{t+h}].
    pub fn lagged(&self, h: u64) -> f64 {
        match self {
            MaskLaw::Markov(m) => m.lagged_product(h),
            MaskLaw::Sequence { tau, lagged, .. } => {
                if h == 0 {
                    *tau
                } else {
                    lagged(h)
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let tau = self.tau();
        if !(MIN_TAU..=1.0).contains(&tau) {
            return domain(format!("observation probability tau must lie in [{MIN_TAU}, 1], got {tau}"));
        }
        match self {
            MaskLaw::Markov(m) => m.validate(),
            MaskLaw::Sequence { gamma_decay, .. } => {
                if !(0.0..1.0).contains(gamma_decay) {
                    return domain(format!(
                        "mask autocovariance decay rate must lie in [0, 1), got {gamma_decay}"
                    ));
                }
                Ok(())
            }
        }
    }

    /// sum_{h>=1} tau(h) x^h for a Markov mask, |x| < 1.
    fn geometric(m: &MissingSpec, x: f64) -> f64 {
        let tau = m.tau;
        let r = m.r;
        tau * tau * x / (1.0 - x) + tau * (1.0 - tau) * r * x / (1.0 - r * x)
    }
}

/// How lag sums are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SumStrategy {
    /// Closed geometric form when the mask is Markov and the oracle exposes
    /// an expansion, truncated series otherwise.
    #[default]
    Auto,
    ClosedForm,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    pub strategy: SumStrategy,
    /// Relative tolerance for the truncated series.
    pub tolerance: f64,
    pub max_lag: u64,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self { strategy: SumStrategy::Auto, tolerance: 1e-15, max_lag: 1_000_000 }
    }
}

impl SeriesControl {
    pub fn numeric() -> Self {
        Self { strategy: SumStrategy::Numeric, ..Self::default() }
    }

    pub fn closed_form() -> Self {
        Self { strategy: SumStrategy::ClosedForm, ..Self::default() }
    }
}

/// One term `weight * centered(k, s, h)` of a lag sum.
pub type LagTerm = (f64, u32, u32);

/// sum_{h>=1} tau(h) * sum_terms weight * (mu_(k,s)(h) - mu_(k) mu_(s)).
pub fn weighted_lag_sum(
    law: &MaskLaw,
    oracle: &dyn MomentOracle,
    terms: &[LagTerm],
    control: &SeriesControl,
) -> Result<f64> {
    law.validate()?;
    let expansions: Option<Vec<Vec<f64>>> =
        terms.iter().map(|&(_, k, s)| oracle.centered_expansion(k, s)).collect();
    let closed = match (law, &expansions) {
        (MaskLaw::Markov(m), Some(ex)) => Some((m, ex)),
        _ => None,
    };
    match (control.strategy, closed) {
        (SumStrategy::Numeric, _) | (SumStrategy::Auto, None) => {
            numeric_lag_sum(law, oracle, terms, expansions.as_deref(), control)
        }
        (_, Some((m, ex))) => {
            let rho = oracle.decay();
            let mut acc = 0.0;
            for (&(w, _, _), coeffs) in terms.iter().zip(ex) {
                for (j, c) in coeffs.iter().enumerate() {
                    acc += w * c * MaskLaw::geometric(m, rho.powi(j as i32 + 1));
                }
            }
            Ok(acc)
        }
        (SumStrategy::ClosedForm, None) => {
            domain("closed-form lag sum needs a Markov mask and a moment oracle with a lag expansion")
        }
    }
}

fn numeric_lag_sum(
    law: &MaskLaw,
    oracle: &dyn MomentOracle,
    terms: &[LagTerm],
    expansions: Option<&[Vec<f64>]>,
    control: &SeriesControl,
) -> Result<f64> {
    let q = oracle.decay().abs();
    if q >= 1.0 {
        return domain(format!("moment decay rate {q} does not give a convergent lag sum"));
    }
    // Envelope A with |sum_terms w c(h)| <= A q^h.
    let envelope = expansions.map(|ex| {
        terms
            .iter()
            .zip(ex)
            .map(|(&(w, _, _), c)| w.abs() * c.iter().map(|x| x.abs()).sum::<f64>())
            .sum::<f64>()
    });
    let mut sum = 0.0;
    for h in 1..=control.max_lag {
        let term: f64 = terms.iter().map(|&(w, k, s)| w * oracle.centered(k, s, h)).sum();
        sum += law.lagged(h) * term;
        let tail = match envelope {
            Some(a) => a * powu(q, h + 1) / (1.0 - q),
            None => term.abs() * q / (1.0 - q),
        };
        let scale = sum.abs().max(envelope.unwrap_or(0.0) * q);
        if tail <= control.tolerance * scale || tail == 0.0 {
            return Ok(sum);
        }
    }
    Err(Error::Convergence(control.max_lag))
}

/// sum_{h>=1} (tau(h) - tau^2), the mask autocovariances.
pub fn mask_autocovariance_sum(law: &MaskLaw, control: &SeriesControl) -> Result<f64> {
    law.validate()?;
    let tau = law.tau();
    match (law, control.strategy) {
        (MaskLaw::Markov(m), SumStrategy::Auto | SumStrategy::ClosedForm) => {
            Ok(tau * (1.0 - tau) * m.r / (1.0 - m.r))
        }
        (MaskLaw::Sequence { .. }, SumStrategy::ClosedForm) => {
            domain("closed-form mask sum needs a Markov mask")
        }
        _ => {
            let g = match law {
                MaskLaw::Markov(m) => m.r,
                MaskLaw::Sequence { gamma_decay, .. } => *gamma_decay,
            };
            let mut sum = 0.0;
            for h in 1..=control.max_lag {
                let gamma = law.lagged(h) - tau * tau;
                sum += gamma;
                let tail = gamma.abs() * g / (1.0 - g);
                if tail <= control.tolerance * sum.abs() || tail == 0.0 {
                    return Ok(sum);
                }
            }
            Err(Error::Convergence(control.max_lag))
        }
    }
}
