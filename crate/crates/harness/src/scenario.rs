// SPDX-License-Identifier: MIT OR Apache-2.0
//! Scenario and grid configuration.

use countdiag::asymptotics::IndexKind;
use countdiag::{Bar1, MissingSpec, ModelSpec, PoiInar1, Seed};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

/// One Monte Carlo cell: model, mask, series length and index list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub model: ModelSpec,
    pub missing: MissingSpec,
    pub t: usize,
    /// Empty means the dispersion and skewness indices of the model's family.
    #[serde(default)]
    pub indices: Vec<IndexKind>,
    pub replications: u64,
    pub seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.missing.validate()?;
        if self.t == 0 {
            return Err(HarnessError::Invalid("series length must be at least 1".into()));
        }
        if self.replications == 0 {
            return Err(HarnessError::Invalid("need at least one replication".into()));
        }
        for kind in self.indices() {
            let binomial = matches!(self.model, ModelSpec::Bar1(_));
            if kind.is_binomial() != binomial {
                return Err(HarnessError::Invalid(format!(
                    "index {kind} does not fit model {:?}",
                    self.model
                )));
            }
        }
        Ok(())
    }

    pub fn indices(&self) -> Vec<IndexKind> {
        if !self.indices.is_empty() {
            return self.indices.clone();
        }
        match self.model {
            ModelSpec::PoiInar1(_) => vec![IndexKind::PoiDispersion, IndexKind::SkewPoi],
            ModelSpec::Bar1(_) => vec![IndexKind::BinDispersion, IndexKind::SkewBin],
        }
    }

    /// Hash of (model, mask, length). Replication count, index list and
    /// seed are left out so that sub-grids reuse the same streams.
    pub fn hash(&self) -> [u8; 32] {
        let key =
            serde_json::to_string(&(&self.model, &self.missing, self.t)).expect("scenario key serializes");
        Sha256::digest(key.as_bytes()).into()
    }

    /// Random stream of replication `rep`.
    pub fn replication_seed(&self, rep: u64) -> Seed {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update(self.hash());
        let digest = h.finalize();
        let mut first = [0u8; 8];
        first.copy_from_slice(&digest[..8]);
        Seed::new(u64::from_le_bytes(first), rep)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Poisson,
    Binomial,
}

fn default_mu() -> f64 {
    3.0
}
fn default_rho() -> f64 {
    0.5
}
fn default_n() -> Vec<u64> {
    vec![10, 25]
}
fn default_t() -> Vec<usize> {
    vec![100, 250, 500, 1000]
}
fn default_r() -> Vec<f64> {
    vec![0.0, 0.3, 0.6]
}
fn default_tau() -> Vec<f64> {
    vec![1.0, 0.8, 0.6, 0.4]
}
fn default_reps() -> u64 {
    10_000
}

/// Cartesian grid of scenarios. Every field except `family` has a default
/// matching the standard simulation design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub family: Family,
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default = "default_rho")]
    pub rho: f64,
    /// Upper bounds; used by the binomial family only.
    #[serde(default = "default_n")]
    pub n_values: Vec<u64>,
    #[serde(default = "default_t")]
    pub t_values: Vec<usize>,
    #[serde(default = "default_r")]
    pub r_values: Vec<f64>,
    #[serde(default = "default_tau")]
    pub tau_values: Vec<f64>,
    #[serde(default = "default_reps")]
    pub replications: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub indices: Vec<IndexKind>,
}

impl GridConfig {
    pub fn new(family: Family) -> Self {
        Self {
            family,
            mu: default_mu(),
            rho: default_rho(),
            n_values: default_n(),
            t_values: default_t(),
            r_values: default_r(),
            tau_values: default_tau(),
            replications: default_reps(),
            seed: 0,
            indices: Vec::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Scenarios ordered by tau descending, then r, T and n ascending.
    pub fn scenarios(&self) -> Result<Vec<Scenario>> {
        let ns: Vec<Option<u64>> = match self.family {
            Family::Poisson => vec![None],
            Family::Binomial => self.n_values.iter().copied().map(Some).collect(),
        };
        let mut taus = self.tau_values.clone();
        taus.sort_by(|a, b| b.total_cmp(a));
        let mut rs = self.r_values.clone();
        rs.sort_by(f64::total_cmp);
        let mut ts = self.t_values.clone();
        ts.sort_unstable();
        let mut ns_sorted = ns;
        ns_sorted.sort_unstable();

        let mut out = Vec::new();
        for &tau in &taus {
            for &r in &rs {
                for &t in &ts {
                    for &n in &ns_sorted {
                        let model = match n {
                            None => ModelSpec::PoiInar1(PoiInar1::new(self.mu, self.rho)?),
                            Some(n) => ModelSpec::Bar1(Bar1::new(n, self.mu / n as f64, self.rho)?),
                        };
                        let s = Scenario {
                            model,
                            missing: MissingSpec::new(tau, r)?,
                            t,
                            indices: self.indices.clone(),
                            replications: self.replications,
                            seed: self.seed,
                        };
                        s.validate()?;
                        out.push(s);
                    }
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grids_have_48_rows() {
        let poi = GridConfig::new(Family::Poisson).scenarios().unwrap();
        assert_eq!(poi.len(), 48);
        let mut bin = GridConfig::new(Family::Binomial);
        bin.n_values = vec![10];
        assert_eq!(bin.scenarios().unwrap().len(), 48);
    }

    #[test]
    fn row_ordering() {
        let mut cfg = GridConfig::new(Family::Binomial);
        cfg.tau_values = vec![0.4, 1.0];
        cfg.r_values = vec![0.6, 0.0];
        cfg.t_values = vec![250, 100];
        cfg.n_values = vec![25, 10];
        let rows = cfg.scenarios().unwrap();
        let key = |s: &Scenario| (s.missing.tau, s.missing.r, s.t, s.model.upper_bound().unwrap());
        assert_eq!(key(&rows[0]), (1.0, 0.0, 100, 10));
        assert_eq!(key(&rows[1]), (1.0, 0.0, 100, 25));
        assert_eq!(key(&rows[2]), (1.0, 0.0, 250, 10));
        assert_eq!(key(rows.last().unwrap()), (0.4, 0.6, 250, 25));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(GridConfig::from_json(r#"{"family": "poisson", "replicates": 5}"#).is_err());
        let cfg = GridConfig::from_json(r#"{"family": "binomial", "n_values": [8]}"#).unwrap();
        assert_eq!(cfg.n_values, vec![8]);
        assert_eq!(cfg.replications, 10_000);
        let bad = r#"{"model": {"family": "poi_inar1", "mu": 3, "rho": 0.5, "lambda": 1},
                      "missing": {"tau": 1, "r": 0}, "t": 10, "replications": 2, "seed": 1}"#;
        assert!(serde_json::from_str::<Scenario>(bad).is_err());
    }

    #[test]
    fn seeds_ignore_replication_count() {
        let cfg = GridConfig::new(Family::Poisson);
        let a = &cfg.scenarios().unwrap()[3];
        let mut b = a.clone();
        b.replications = 7;
        assert_eq!(a.replication_seed(5), b.replication_seed(5));
        let mut c = a.clone();
        c.seed += 1;
        assert_ne!(a.replication_seed(5), c.replication_seed(5));
    }
}
