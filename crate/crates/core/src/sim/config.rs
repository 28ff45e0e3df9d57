use serde::{Deserialize, Serialize};

use crate::chunks::{check_k, ChunkSet};
use crate::error::{Error, Result};
use crate::rules::Rule;
use crate::state::SwarmState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialCondition {
    /// Only the seed.
    Empty,
    /// `n` peers that all hold every chunk except `missing_chunk`.
    Imbalanced { n: u64, missing_chunk: usize },
}

/// Starting state for a scenario.
pub fn scenario(kind: InitialCondition, k: usize) -> Result<SwarmState> {
    match kind {
        InitialCondition::Empty => SwarmState::seed_only(k),
        InitialCondition::Imbalanced { n, missing_chunk } => {
            let near = ChunkSet::all_but(missing_chunk, k)?;
            SwarmState::new(k, (n > 0).then_some((near, n)))
        }
    }
}

fn default_sample_interval() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub k: usize,
    /// Arrival rate of new peers.
    pub lambda: f64,
    pub rule: Rule,
    /// End of simulated time.
    pub horizon: f64,
    pub rng_seed: u64,
    pub initial: InitialCondition,
    /// Period between metric snapshots.
    #[serde(default = "default_sample_interval")]
    pub sample_interval: f64,
}

impl SimConfig {
    pub fn new(k: usize, lambda: f64, rule: Rule, horizon: f64, rng_seed: u64) -> Self {
        SimConfig {
            k,
            lambda,
            rule,
            horizon,
            rng_seed,
            initial: InitialCondition::Empty,
            sample_interval: default_sample_interval(),
        }
    }

    pub fn with_initial(mut self, initial: InitialCondition) -> Self {
        self.initial = initial;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_k(self.k).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        self.rule.validate().map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        positive("lambda", self.lambda)?;
        positive("horizon", self.horizon)?;
        positive("sample_interval", self.sample_interval)?;
        if let InitialCondition::Imbalanced { missing_chunk, .. } = self.initial {
            if missing_chunk >= self.k {
                return Err(Error::InvalidConfig(format!(
                    "missing_chunk {missing_chunk} out of range for k = {}",
                    self.k
                )));
            }
        }
        Ok(())
    }
}
