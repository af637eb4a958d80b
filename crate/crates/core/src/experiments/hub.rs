use serde::{Deserialize, Serialize};

use super::exact::{self, NecessaryBoundReport};
use super::persistence::{run_streams, ReplicateTrace};
use super::{binomial_sigma, model_label, ExperimentConfig};
use crate::error::{Error, Result};
use crate::growth::{ModelKind, RngStream, SeedGraph};

/// A persistence config swept over seed sizes: hub leaves for the attachment
/// models, ball radii for diffusion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HubConfig {
    #[serde(flatten)]
    pub base: ExperimentConfig,
    pub sizes: Vec<usize>,
    #[serde(default)]
    pub epsilon_grid: Vec<f64>,
}

impl HubConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    fn seed_for(&self, size: usize) -> Result<SeedGraph> {
        match (self.base.model.kind, self.base.model.seed_graph) {
            (ModelKind::DiffusionRegular { d }, SeedGraph::Single | SeedGraph::RBall { .. }) if d >= 3 => {
                Ok(SeedGraph::RBall { r: size })
            }
            (ModelKind::DiffusionRegular { d }, _) => {
                Err(Error::Config(format!("hub runs need r-ball seeds with d >= 3, got d = {d} or a star seed")))
            }
            (_, SeedGraph::Single | SeedGraph::StarHub { .. }) => Ok(SeedGraph::StarHub { k: size }),
            (_, SeedGraph::RBall { .. }) => Err(Error::Config("r-ball seeds need the diffusion model".into())),
        }
    }

    /// The base config with the seed graph swapped for grid entry `size`.
    pub fn config_for(&self, size: usize) -> Result<ExperimentConfig> {
        let mut config = self.base.clone();
        config.model.seed_graph = self.seed_for(size)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::Config("sizes must not be empty".into()));
        }
        if let Some(e) = self.epsilon_grid.iter().find(|&&e| !(e > 0.0 && e < 0.5)) {
            return Err(Error::Config(format!("epsilon {e} outside (0, 1/2)")));
        }
        for &s in &self.sizes {
            self.config_for(s)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HubRow {
    pub size: usize,
    pub seed_vertices: usize,
    pub replicates: usize,
    pub frac_v1_final_centroid: f64,
    /// Fraction in which vertex 0 lost centroid status at some point.
    pub frac_v1_not_always_centroid: f64,
    pub sigma_not_always: f64,
    pub frac_v1_not_always_sole_centroid: f64,
    pub frac_change_after_half: f64,
    /// Exact probability that vertex 1 becomes a mirror image of vertex 0.
    pub symmetry_prob: Option<String>,
    /// Half the symmetry probability, a lower bound on non-persistence.
    pub symmetry_lower_bound: Option<f64>,
    pub violations: usize,
}

impl HubRow {
    pub const CSV_HEADER: &'static str = "model,n_target,size,seed_vertices,replicates,frac_v1_final_centroid,\
frac_v1_not_always_centroid,sigma_not_always,frac_v1_not_always_sole_centroid,frac_change_after_half,\
symmetry_prob,symmetry_prob_decimal,symmetry_lower_bound,violations";

    pub fn csv_row(&self, model: &str, n_target: usize) -> String {
        let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
        format!(
            "{model},{n_target},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.size,
            self.seed_vertices,
            self.replicates,
            self.frac_v1_final_centroid,
            self.frac_v1_not_always_centroid,
            self.sigma_not_always,
            self.frac_v1_not_always_sole_centroid,
            self.frac_change_after_half,
            self.symmetry_prob.clone().unwrap_or_default(),
            opt(self.symmetry_lower_bound.map(|b| 2.0 * b)),
            opt(self.symmetry_lower_bound),
            self.violations
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonRow {
    pub epsilon: f64,
    pub necessary: NecessaryBoundReport,
    /// Smallest grid size whose measured non-persistence is at most epsilon.
    pub empirical: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HubSummary {
    pub model: String,
    pub n_target: usize,
    pub rows: Vec<HubRow>,
    /// Non-persistence never rises by more than 3 combined standard errors
    /// between consecutive grid sizes.
    pub monotone_within_3sigma: bool,
    pub epsilon_rows: Vec<EpsilonRow>,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HubGridRun {
    pub size: usize,
    pub traces: Vec<ReplicateTrace>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HubRun {
    pub grid: Vec<HubGridRun>,
    pub summary: HubSummary,
}

fn symmetry_prob(kind: ModelKind, size: usize) -> Option<num_rational::BigRational> {
    match kind {
        ModelKind::PreferentialAttachment => exact::symmetry_prob_pa(size).ok(),
        ModelKind::UniformAttachment => exact::symmetry_prob_ua(size).ok(),
        ModelKind::DiffusionRegular { d } => exact::symmetry_prob_diffusion(d, size).ok(),
    }
}

fn hub_row(kind: ModelKind, size: usize, traces: &[ReplicateTrace]) -> HubRow {
    let reps = traces.len();
    let frac = |pred: &dyn Fn(&ReplicateTrace) -> bool| traces.iter().filter(|t| pred(t)).count() as f64 / reps as f64;
    let not_always = frac(&|t| !t.v1_always_centroid);
    let p = symmetry_prob(kind, size);
    HubRow {
        size,
        seed_vertices: traces.first().map_or(0, |t| t.seed_vertices),
        replicates: reps,
        frac_v1_final_centroid: frac(&|t| t.v1_is_final_centroid),
        frac_v1_not_always_centroid: not_always,
        sigma_not_always: binomial_sigma(not_always, reps),
        frac_v1_not_always_sole_centroid: frac(&|t| !t.v1_always_sole_centroid),
        frac_change_after_half: frac(&|t| t.last_centroid_change.is_some_and(|c| 2 * c > t.n_target)),
        symmetry_lower_bound: p.as_ref().map(|p| exact::to_f64(p) / 2.0),
        symmetry_prob: p.map(|p| p.to_string()),
        violations: traces.iter().map(|t| t.violation_count).sum(),
    }
}

/// Runs the persistence experiment once per seed size. Grid entry `g`,
/// replicate `i` uses stream `(g << 32) | i`.
pub fn run_hub(config: &HubConfig) -> Result<HubRun> {
    config.validate()?;
    let kind = config.base.model.kind;
    let mut grid = Vec::with_capacity(config.sizes.len());
    for (g, &size) in config.sizes.iter().enumerate() {
        let sub = config.config_for(size)?;
        let traces = run_streams(&sub, |i| RngStream::new(sub.base_seed, ((g as u64) << 32) | i))?;
        grid.push(HubGridRun { size, traces });
    }
    let rows: Vec<HubRow> = grid.iter().map(|r| hub_row(kind, r.size, &r.traces)).collect();
    let monotone_within_3sigma = rows.windows(2).all(|w| {
        let slack = 3.0 * (w[0].sigma_not_always.powi(2) + w[1].sigma_not_always.powi(2)).sqrt();
        w[1].frac_v1_not_always_centroid <= w[0].frac_v1_not_always_centroid + slack
    });
    let epsilon_rows = config
        .epsilon_grid
        .iter()
        .map(|&epsilon| {
            Ok(EpsilonRow {
                epsilon,
                necessary: exact::necessary_bound_report(kind, epsilon)?,
                empirical: rows.iter().find(|r| r.frac_v1_not_always_centroid <= epsilon).map(|r| r.size),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let violations = rows.iter().map(|r| r.violations).sum();
    Ok(HubRun {
        grid,
        summary: HubSummary {
            model: model_label(&config.base.model),
            n_target: config.base.n_target,
            rows,
            monotone_within_3sigma,
            epsilon_rows,
            violations,
        },
    })
}
