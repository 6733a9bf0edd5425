use serde::{Deserialize, Serialize};

use crate::interp::DEFAULT_STEP_BUDGET;
use crate::miner::DEFAULT_TOP_K;
use crate::var_rank::DEFAULT_MAX_LEVEL;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct Config {
    pub timeout_seconds: u64,
    /// Deepest dependency level whose candidates are tried.
    pub max_level: usize,
    /// Mined predicates kept per candidate, before the predefined ones.
    pub top_k: usize,
    /// Suspicious methods tried per failing unit.
    pub method_budget: usize,
    /// Rounds of guard accumulation.
    pub max_iterations: usize,
    pub step_budget: u64,
    pub if_only_mining: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            timeout_seconds: 1800,
            max_level: DEFAULT_MAX_LEVEL,
            top_k: DEFAULT_TOP_K,
            method_budget: 5,
            max_iterations: 4,
            step_budget: DEFAULT_STEP_BUDGET,
            if_only_mining: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid configuration: {0}")]
pub struct ConfigError(pub String);

impl Config {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let checks = [
            (self.timeout_seconds > 0, "timeout must be positive"),
            (self.max_level >= 1, "max level must be at least 1"),
            (self.top_k > 0, "top k must be positive"),
            (self.method_budget > 0, "method budget must be positive"),
            (self.max_iterations > 0, "max iterations must be positive"),
            (self.step_budget > 0, "step budget must be positive"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(ConfigError(msg.to_string())),
            None => Ok(()),
        }
    }
}
