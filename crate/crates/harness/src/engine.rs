// SPDX-License-Identifier: MIT OR Apache-2.0
//! Replication engine and grid runner.

use countdiag::asymptotics::{markov_asymptotics, IndexKind};
use countdiag::diagnostics::index_value;
use countdiag::model::{apply_mask, simulate_markov_mask_with, simulate_model_with};
use countdiag::CountSeries;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::scenario::{GridConfig, Scenario};

/// Replications per work item. Fixed so that the merge order, and with it
/// every floating-point result, is independent of the thread count.
const BLOCK: u64 = 64;

/// Streaming mean and variance (Welford) with pairwise merge.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningMoments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningMoments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &RunningMoments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> Option<f64> {
        (self.n > 0).then_some(self.mean)
    }

    /// Sample standard deviation; undefined below two observations.
    pub fn sd(&self) -> Option<f64> {
        (self.n > 1).then(|| (self.m2 / (self.n - 1) as f64).sqrt())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexSummary {
    pub kind: IndexKind,
    pub sim_mean: Option<f64>,
    /// `None` when fewer than two replications succeeded.
    pub sim_sd: Option<f64>,
    pub asym_mean: f64,
    pub asym_sd: f64,
    /// Replications that produced a finite index.
    pub replications: u64,
    /// Replications skipped because the index was undefined.
    pub failures: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub scenario: Scenario,
    pub indices: Vec<IndexSummary>,
}

impl ScenarioResult {
    pub fn get(&self, kind: IndexKind) -> Option<&IndexSummary> {
        self.indices.iter().find(|s| s.kind == kind)
    }
}

#[derive(Clone, Default)]
struct Block {
    stats: Vec<RunningMoments>,
    failures: Vec<u64>,
}

fn replicate(s: &Scenario, kinds: &[IndexKind], rep: u64, block: &mut Block) -> Result<()> {
    let mut rng = s.replication_seed(rep).rng();
    let values = simulate_model_with(&s.model, s.t, &mut rng)?;
    let mask = simulate_markov_mask_with(&s.missing, s.t, &mut rng)?;
    let series = apply_mask(&CountSeries::fully_observed(values)?, &mask)?;
    let n = s.model.upper_bound();
    for (i, &kind) in kinds.iter().enumerate() {
        match index_value(&series, kind, n) {
            Ok(v) if v.is_finite() => block.stats[i].push(v),
            _ => block.failures[i] += 1,
        }
    }
    Ok(())
}

/// Runs all replications of one scenario on the current rayon pool.
pub fn run_scenario(s: &Scenario) -> Result<ScenarioResult> {
    s.validate()?;
    let kinds = s.indices();
    let n_blocks = s.replications.div_ceil(BLOCK);
    let blocks: Vec<Block> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut block =
                Block { stats: vec![RunningMoments::default(); kinds.len()], failures: vec![0; kinds.len()] };
            let end = ((b + 1) * BLOCK).min(s.replications);
            for rep in b * BLOCK..end {
                replicate(s, &kinds, rep, &mut block)?;
            }
            Ok(block)
        })
        .collect::<Result<_>>()?;

    let mut total =
        Block { stats: vec![RunningMoments::default(); kinds.len()], failures: vec![0; kinds.len()] };
    for b in &blocks {
        for i in 0..kinds.len() {
            total.stats[i].merge(&b.stats[i]);
            total.failures[i] += b.failures[i];
        }
    }
    if total.stats.iter().all(|m| m.count() == 0) {
        return Err(HarnessError::Invalid("every replication was degenerate".into()));
    }

    let mut summaries = Vec::with_capacity(kinds.len());
    for (i, &kind) in kinds.iter().enumerate() {
        let asym = markov_asymptotics(kind, &s.model, &s.missing, s.t as u64)?;
        summaries.push(IndexSummary {
            kind,
            sim_mean: total.stats[i].mean(),
            sim_sd: total.stats[i].sd(),
            asym_mean: asym.mean(),
            asym_sd: asym.sd(),
            replications: total.stats[i].count(),
            failures: total.failures[i],
        });
    }
    Ok(ScenarioResult { scenario: s.clone(), indices: summaries })
}

/// One grid row; a failing scenario keeps its error message and the grid goes on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub scenario: Scenario,
    pub outcome: std::result::Result<ScenarioResult, String>,
}

/// Runs every scenario of `config` on a pool of `workers` threads
/// (0 lets rayon choose).
pub fn run_grid(config: &GridConfig, workers: usize) -> Result<Vec<GridRow>> {
    let scenarios = config.scenarios()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Invalid(e.to_string()))?;
    Ok(pool.install(|| {
        scenarios
            .into_iter()
            .map(|s| GridRow { outcome: run_scenario(&s).map_err(|e| e.to_string()), scenario: s })
            .collect()
    }))
}

/// Machine-readable grid table, one line per (scenario, index).
pub fn write_grid_csv<W: std::io::Write>(rows: &[GridRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "family",
        "n",
        "mu",
        "rho",
        "tau",
        "r",
        "T",
        "index",
        "replications",
        "failures",
        "sim_mean",
        "sim_sd",
        "asym_mean",
        "asym_sd",
        "error",
    ])?;
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for row in rows {
        let s = &row.scenario;
        let (family, n) = match s.model.upper_bound() {
            Some(n) => ("binomial", n.to_string()),
            None => ("poisson", String::new()),
        };
        let head = [
            family.to_string(),
            n,
            s.model.mean().to_string(),
            s.model.rho().to_string(),
            s.missing.tau.to_string(),
            s.missing.r.to_string(),
            s.t.to_string(),
        ];
        match &row.outcome {
            Ok(res) => {
                for ix in &res.indices {
                    let mut rec = head.to_vec();
                    rec.extend([
                        ix.kind.to_string(),
                        ix.replications.to_string(),
                        ix.failures.to_string(),
                        opt(ix.sim_mean),
                        opt(ix.sim_sd),
                        ix.asym_mean.to_string(),
                        ix.asym_sd.to_string(),
                        String::new(),
                    ]);
                    w.write_record(&rec)?;
                }
            }
            Err(e) => {
                let mut rec = head.to_vec();
                rec.extend(std::iter::repeat_n(String::new(), 7));
                rec.push(e.clone());
                w.write_record(&rec)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Human-readable table rounded to three decimals.
pub fn render_grid_table(rows: &[GridRow]) -> String {
    let mut out = String::from(
        "   tau     r      T    n  index            sim_mean  asym_mean  sim_sd  asym_sd  fail\n",
    );
    let fmt = |x: Option<f64>| x.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into());
    for row in rows {
        let s = &row.scenario;
        let n = s.model.upper_bound().map(|n| n.to_string()).unwrap_or_else(|| "-".into());
        match &row.outcome {
            Ok(res) => {
                for ix in &res.indices {
                    out.push_str(&format!(
                        "{:>6.2} {:>5.1} {:>6} {:>4}  {:<15} {:>9} {:>10.3} {:>7} {:>8.3} {:>5}\n",
                        s.missing.tau,
                        s.missing.r,
                        s.t,
                        n,
                        ix.kind.name(),
                        fmt(ix.sim_mean),
                        ix.asym_mean,
                        fmt(ix.sim_sd),
                        ix.asym_sd,
                        ix.failures
                    ));
                }
            }
            Err(e) => out.push_str(&format!(
                "{:>6.2} {:>5.1} {:>6} {:>4}  error: {e}\n",
                s.missing.tau, s.missing.r, s.t, n
            )),
        }
    }
    out
}
