// SPDX-License-Identifier: MIT OR Apache-2.0
//! Index estimators, plug-in parameter fitting and the resulting tests.

use serde::{Deserialize, Serialize};

use crate::asymptotics::{
    bin_dispersion_asym_markov, poi_dispersion_asym_markov, skew_asym_binomial_markov,
    skew_asym_poisson_markov, IndexAsymptotics, IndexKind,
};
use crate::error::{domain, Error, Result};
use crate::missingness::{dr_acf, estimate_r, estimate_tau, normal_quantile_two_sided};
use crate::model::CountSeries;
use crate::moments::sample_factorial_moments;

/// Largest autocorrelation handed to the asymptotics.
pub const RHO_CEILING: f64 = 1.0 - 1e-9;

/// Plug-in Poisson dispersion index muhat_(2)/muhat - muhat + 1.
pub fn index_poi_dispersion(series: &CountSeries) -> Result<f64> {
    let m = sample_factorial_moments(series, 2)?;
    let mu = m.mean();
    if mu <= 0.0 {
        return Err(Error::Degenerate("all observed values are zero".into()));
    }
    Ok(m.factorial(2) / mu - mu + 1.0)
}

/// Plug-in binomial dispersion index for support {0, ..., n}.
pub fn index_bin_dispersion(series: &CountSeries, n: u64) -> Result<f64> {
    let m = sample_factorial_moments(series, 2)?;
    let mu = m.mean();
    let nf = n as f64;
    if mu <= 0.0 || mu >= nf {
        return Err(Error::Degenerate(format!("observed mean {mu} sits on the boundary of [0, {n}]")));
    }
    Ok((m.factorial(2) + mu - mu * mu) / (mu * (1.0 - mu / nf)))
}

/// Plug-in skewness index muhat_(3)/(muhat_(2) muhat).
pub fn index_skew(series: &CountSeries) -> Result<f64> {
    let m = sample_factorial_moments(series, 3)?;
    let (mu, m2) = (m.mean(), m.factorial(2));
    if mu <= 0.0 || m2 <= 0.0 {
        return Err(Error::Degenerate(
            "second factorial moment is zero (all observed values at most 1)".into(),
        ));
    }
    Ok(m.factorial(3) / (m2 * mu))
}

/// Plug-in index value for `kind`; `n` is needed for the binomial dispersion.
pub fn index_value(series: &CountSeries, kind: IndexKind, n: Option<u64>) -> Result<f64> {
    match kind {
        IndexKind::PoiDispersion => index_poi_dispersion(series),
        IndexKind::BinDispersion => {
            let n = n.ok_or_else(|| Error::Domain("binomial dispersion needs n".into()))?;
            index_bin_dispersion(series, n)
        }
        IndexKind::SkewPoi | IndexKind::SkewBin => index_skew(series),
    }
}

/// Parameters estimated from a gappy series, with any adjustments noted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedParams {
    pub mu: f64,
    pub rho: f64,
    pub tau: f64,
    pub r: f64,
    pub t: u64,
    pub warnings: Vec<String>,
}

/// Mean, lag-1 autocorrelation, observation rate and mask persistence.
///
/// A fully observed series gets r = 0. Negative autocorrelations are clamped
/// to 0, and rho is capped just below 1; both adjustments are recorded.
pub fn fit_null_params(series: &CountSeries) -> Result<FittedParams> {
    let mut warnings = Vec::new();
    let moments = sample_factorial_moments(series, 1)?;
    let tau = estimate_tau(series.mask())?;
    let r = if series.is_fully_observed() {
        0.0
    } else {
        match estimate_r(series.mask()) {
            Ok(r) if r < 0.0 => {
                warnings.push(format!("mask autocorrelation {r:.4} is negative; using 0"));
                0.0
            }
            Ok(r) if r >= RHO_CEILING => {
                warnings.push(format!("mask autocorrelation {r:.4} capped below 1"));
                RHO_CEILING
            }
            Ok(r) => r,
            Err(e) => return Err(e),
        }
    };
    if series.len() < 2 {
        return Err(Error::Degenerate("need at least two time points".into()));
    }
    let mut rho = dr_acf(series, 1)?.rho_hat[1];
    if !rho.is_finite() {
        return Err(Error::Degenerate("no jointly observed neighbours for lag 1".into()));
    }
    if rho < 0.0 {
        warnings.push(format!("lag-1 autocorrelation {rho:.4} is negative; using 0"));
        rho = 0.0;
    } else if rho >= RHO_CEILING {
        warnings.push(format!("lag-1 autocorrelation {rho:.4} capped below 1"));
        rho = RHO_CEILING;
    }
    Ok(FittedParams { mu: moments.mean(), rho, tau, r, t: series.len() as u64, warnings })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullFamily {
    PoissonInar1,
    BinomialAr1,
}

/// Which critical bounds decide the test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sidedness {
    #[default]
    TwoSided,
    Upper,
    Lower,
}

/// Null hypothesis and test settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullSpec {
    pub family: NullFamily,
    /// Upper bound of the support; required for the binomial family.
    pub n: Option<u64>,
    pub alpha: f64,
    /// Drop hidden positions and treat the rest as a complete series.
    pub ignore_missing: bool,
    pub sidedness: Sidedness,
}

impl NullSpec {
    pub fn poisson(alpha: f64) -> Self {
        Self {
            family: NullFamily::PoissonInar1,
            n: None,
            alpha,
            ignore_missing: false,
            sidedness: Sidedness::TwoSided,
        }
    }

    pub fn binomial(n: u64, alpha: f64) -> Self {
        Self {
            family: NullFamily::BinomialAr1,
            n: Some(n),
            alpha,
            ignore_missing: false,
            sidedness: Sidedness::TwoSided,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return domain(format!("test level must lie in (0, 1), got {}", self.alpha));
        }
        if self.family == NullFamily::BinomialAr1 {
            match self.n {
                Some(n) if n >= 2 => {}
                _ => return domain("binomial null needs an upper bound n >= 2"),
            }
        }
        Ok(())
    }

    /// Dispersion index matching the family.
    pub fn dispersion_kind(&self) -> IndexKind {
        match self.family {
            NullFamily::PoissonInar1 => IndexKind::PoiDispersion,
            NullFamily::BinomialAr1 => IndexKind::BinDispersion,
        }
    }

    /// Skewness index matching the family.
    pub fn skewness_kind(&self) -> IndexKind {
        match self.family {
            NullFamily::PoissonInar1 => IndexKind::SkewPoi,
            NullFamily::BinomialAr1 => IndexKind::SkewBin,
        }
    }

    fn check_kind(&self, kind: IndexKind) -> Result<()> {
        let binomial = self.family == NullFamily::BinomialAr1;
        if kind.is_binomial() != binomial {
            return domain(format!("index {kind} does not match the {:?} null", self.family));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Reject,
    Retain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub kind: IndexKind,
    pub statistic: f64,
    pub null_value: f64,
    pub bias: f64,
    pub sd: f64,
    pub lower_critical: f64,
    pub upper_critical: f64,
    pub alpha: f64,
    pub sidedness: Sidedness,
    pub decision: Decision,
    pub fitted: FittedParams,
    pub n: Option<u64>,
}

impl std::fmt::Display for TestReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let p = &self.fitted;
        writeln!(f, "index          {}", self.kind)?;
        writeln!(f, "statistic      {:.4}", self.statistic)?;
        writeln!(f, "null value     {:.4}", self.null_value)?;
        writeln!(f, "bias, sd       {:.4}, {:.4}", self.bias, self.sd)?;
        writeln!(
            f,
            "critical       [{:.4}, {:.4}] at alpha = {} ({:?})",
            self.lower_critical, self.upper_critical, self.alpha, self.sidedness
        )?;
        write!(
            f,
            "fitted         mu = {:.4}, rho = {:.4}, tau = {:.4}, r = {:.4}, T = {}",
            p.mu, p.rho, p.tau, p.r, p.t
        )?;
        if let Some(n) = self.n {
            write!(f, ", n = {n}")?;
        }
        writeln!(f)?;
        for w in &p.warnings {
            writeln!(f, "warning        {w}")?;
        }
        write!(f, "decision       {:?}", self.decision)
    }
}

/// Asymptotics of `kind` at fitted parameters.
pub fn asymptotics_at(kind: IndexKind, fitted: &FittedParams, n: Option<u64>) -> Result<IndexAsymptotics> {
    let (mu, rho, tau, r, t) = (fitted.mu, fitted.rho, fitted.tau, fitted.r, fitted.t);
    match kind {
        IndexKind::PoiDispersion => poi_dispersion_asym_markov(mu, rho, tau, r, t),
        IndexKind::SkewPoi => skew_asym_poisson_markov(mu, rho, tau, r, t),
        IndexKind::BinDispersion | IndexKind::SkewBin => {
            let n = n.ok_or_else(|| Error::Domain("binomial asymptotics need n".into()))?;
            let pi = mu / n as f64;
            if kind == IndexKind::BinDispersion {
                bin_dispersion_asym_markov(n, pi, rho, tau, r, t)
            } else {
                skew_asym_binomial_markov(n, pi, rho, tau, r, t)
            }
        }
    }
}

/// Builds a report from an index value and already fitted parameters.
pub fn test_from_estimates(
    statistic: f64,
    fitted: FittedParams,
    null: &NullSpec,
    kind: IndexKind,
) -> Result<TestReport> {
    null.validate()?;
    null.check_kind(kind)?;
    let asym = asymptotics_at(kind, &fitted, null.n)?;
    let z = normal_quantile_two_sided(null.alpha)?;
    let sd = asym.sd();
    let lower = asym.mean() - z * sd;
    let upper = asym.mean() + z * sd;
    let reject = match null.sidedness {
        Sidedness::TwoSided => statistic < lower || statistic > upper,
        Sidedness::Upper => statistic > upper,
        Sidedness::Lower => statistic < lower,
    };
    Ok(TestReport {
        kind,
        statistic,
        null_value: asym.null_value,
        bias: asym.bias,
        sd,
        lower_critical: lower,
        upper_critical: upper,
        alpha: null.alpha,
        sidedness: null.sidedness,
        decision: if reject { Decision::Reject } else { Decision::Retain },
        fitted,
        n: null.n,
    })
}

/// Fits the null model to `series` and tests the index `kind`.
pub fn test_index(series: &CountSeries, null: &NullSpec, kind: IndexKind) -> Result<TestReport> {
    null.validate()?;
    null.check_kind(kind)?;
    let compacted;
    let data = if null.ignore_missing {
        compacted = series.compact()?;
        &compacted
    } else {
        series
    };
    let statistic = index_value(data, kind, null.n)?;
    let fitted = fit_null_params(data)?;
    test_from_estimates(statistic, fitted, null, kind)
}
