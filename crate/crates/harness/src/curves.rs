// SPDX-License-Identifier: MIT OR Apache-2.0
//! T-scaled variance and bias as functions of the observation rate.

use countdiag::asymptotics::{markov_asymptotics, IndexKind};
use countdiag::{Bar1, MissingSpec, ModelSpec, PoiInar1};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Below this observation rate the curves are not emitted.
pub const MIN_CURVE_TAU: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    pub kind: IndexKind,
    pub mu: f64,
    /// Required for the binomial indices.
    #[serde(default)]
    pub n: Option<u64>,
    pub rho: f64,
    pub r_values: Vec<f64>,
    pub tau_min: f64,
    pub tau_max: f64,
    pub points: usize,
}

impl CurveSpec {
    pub fn new(kind: IndexKind, mu: f64, n: Option<u64>) -> Self {
        Self {
            kind,
            mu,
            n,
            rho: 0.5,
            r_values: vec![0.0, 0.3, 0.6],
            tau_min: MIN_CURVE_TAU,
            tau_max: 1.0,
            points: 76,
        }
    }

    fn model(&self) -> Result<ModelSpec> {
        match (self.kind.is_binomial(), self.n) {
            (false, _) => Ok(ModelSpec::PoiInar1(PoiInar1::new(self.mu, self.rho)?)),
            (true, Some(n)) => Ok(ModelSpec::Bar1(Bar1::new(n, self.mu / n as f64, self.rho)?)),
            (true, None) => Err(HarnessError::Invalid(format!("{} needs an upper bound n", self.kind))),
        }
    }

    /// Evenly spaced rates from `tau_min` to `tau_max`, both included.
    pub fn tau_grid(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.tau_max];
        }
        let step = (self.tau_max - self.tau_min) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| if i + 1 == self.points { self.tau_max } else { self.tau_min + step * i as f64 })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub tau: f64,
    pub r: f64,
    pub mu: f64,
    pub n: Option<u64>,
    pub t_variance: f64,
    pub t_bias: f64,
}

pub fn emit_curves(spec: &CurveSpec) -> Result<Vec<CurveRow>> {
    if !(MIN_CURVE_TAU..=1.0).contains(&spec.tau_min)
        || !(spec.tau_min..=1.0).contains(&spec.tau_max)
        || spec.points == 0
    {
        return Err(HarnessError::Invalid(format!(
            "tau range [{}, {}] with {} points is not inside [{MIN_CURVE_TAU}, 1]",
            spec.tau_min, spec.tau_max, spec.points
        )));
    }
    let model = spec.model()?;
    let mut out = Vec::with_capacity(spec.r_values.len() * spec.points);
    for &r in &spec.r_values {
        for tau in spec.tau_grid() {
            let a = markov_asymptotics(spec.kind, &model, &MissingSpec::new(tau, r)?, 1)?;
            out.push(CurveRow {
                tau,
                r,
                mu: spec.mu,
                n: spec.n.filter(|_| spec.kind.is_binomial()),
                t_variance: a.scaled_variance(),
                t_bias: a.scaled_bias(),
            });
        }
    }
    Ok(out)
}

pub fn write_curves_csv<W: std::io::Write>(rows: &[CurveRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["tau", "r", "mu", "n", "t_variance", "t_bias"])?;
    for row in rows {
        w.write_record([
            row.tau.to_string(),
            row.r.to_string(),
            row.mu.to_string(),
            row.n.map(|n| n.to_string()).unwrap_or_default(),
            row.t_variance.to_string(),
            row.t_bias.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
