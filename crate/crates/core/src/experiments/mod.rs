//! Seeded Monte Carlo experiments on centroid and top-K persistence, plus
//! the exact seed-symmetry calculators they are compared against.
//!
//! Replicate `i` of a run draws from ChaCha stream `i` of the configured base
//! seed, so results do not depend on thread count or execution order.

pub mod exact;
mod hub;
mod persistence;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::growth::{ModelSpec, SeedGraph};

pub use exact::{
    necessary_bound_report, sufficient_hub_size, symmetry_prob_diffusion, symmetry_prob_pa, symmetry_prob_ua,
    NecessaryBoundReport,
};
pub use hub::{run_hub, EpsilonRow, HubConfig, HubGridRun, HubRow, HubRun, HubSummary};
pub use persistence::{
    last_change_samples, run_persistence, run_replicate, PersistenceRun, PersistenceSummary, ReplicateTrace, MAX_RECORDED_VIOLATIONS,
};

fn default_n_target() -> usize {
    10_000
}

fn default_replicates() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    #[serde(default = "default_n_target")]
    pub n_target: usize,
    /// Size of the tracked top-K set; 0 disables top-K tracking.
    #[serde(default, alias = "K")]
    pub top_k: usize,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    pub base_seed: u64,
    /// Tree sizes at which top-K is compared and the slower consistency
    /// checks run. `n_target` is always included.
    #[serde(default)]
    pub checkpoints: Vec<usize>,
    #[serde(default)]
    pub invariant_checks: bool,
    /// Compare top-K after every insertion instead of at checkpoints only.
    #[serde(default)]
    pub topk_every_step: bool,
}

impl ExperimentConfig {
    pub fn new(model: ModelSpec, n_target: usize, replicates: usize, base_seed: u64) -> Self {
        ExperimentConfig {
            model,
            n_target,
            top_k: 0,
            replicates,
            base_seed,
            checkpoints: Vec::new(),
            invariant_checks: false,
            topk_every_step: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be >= 1".into()));
        }
        let seed_vertices = self.model.seed_edges()?.len() + 1;
        if self.n_target < seed_vertices {
            return Err(Error::Config(format!(
                "n_target {} is below the seed graph size {seed_vertices}",
                self.n_target
            )));
        }
        if self.checkpoints.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Config("checkpoints must be sorted".into()));
        }
        if let Some(&last) = self.checkpoints.last() {
            if last > self.n_target {
                return Err(Error::Config(format!("checkpoint {last} exceeds n_target {}", self.n_target)));
            }
        }
        Ok(())
    }
}

/// Short label such as `pa`, `ua+hub4` or `diff:3+ball2`.
pub fn model_label(spec: &ModelSpec) -> String {
    match spec.seed_graph {
        SeedGraph::Single => spec.kind.to_string(),
        SeedGraph::StarHub { k } => format!("{}+hub{k}", spec.kind),
        SeedGraph::RBall { r } => format!("{}+ball{r}", spec.kind),
    }
}

/// Binomial standard error of a fraction over `n` trials.
pub(crate) fn binomial_sigma(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}
