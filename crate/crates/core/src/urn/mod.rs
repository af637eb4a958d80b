//! Pólya urns and their limit laws.
//!
//! A pair of competing subtrees grows like a two-colour urn whose fraction
//! converges to a Beta law; the subtrees hanging off the first K vertices
//! grow like a K-colour urn with a Dirichlet limit.

pub mod stats;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::growth::ModelKind;
use crate::walk::WalkParams;

pub use stats::{beta_cdf, ks_statistic, ks_two_sample, reg_inc_beta, KsResult};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum LimitLaw {
    Beta { a: f64, b: f64 },
    Dirichlet { alphas: Vec<f64> },
}

impl LimitLaw {
    fn beta(a: f64, b: f64) -> Result<Self> {
        if a > 0.0 && b > 0.0 {
            Ok(LimitLaw::Beta { a, b })
        } else {
            Err(Error::domain(format!("Beta parameters must be positive, got ({a}, {b})")))
        }
    }

    fn dirichlet(alphas: Vec<f64>) -> Result<Self> {
        if alphas.len() >= 2 && alphas.iter().all(|&a| a > 0.0) {
            Ok(LimitLaw::Dirichlet { alphas })
        } else {
            Err(Error::domain(format!("Dirichlet parameters must be positive, got {alphas:?}")))
        }
    }

    /// Beta law of coordinate `i` (the first coordinate for a Beta law).
    pub fn marginal(&self, i: usize) -> (f64, f64) {
        match self {
            LimitLaw::Beta { a, b } => {
                if i == 0 {
                    (*a, *b)
                } else {
                    (*b, *a)
                }
            }
            LimitLaw::Dirichlet { alphas } => {
                let total: f64 = alphas.iter().sum();
                (alphas[i], total - alphas[i])
            }
        }
    }

    pub fn marginal_cdf(&self, i: usize, x: f64) -> f64 {
        let (a, b) = self.marginal(i);
        beta_cdf(a, b, x)
    }
}

/// Limit of `X / (X + Y)` for two subtrees started at sizes `(A, 1)`.
pub fn limit_law_two(params: &WalkParams, a: usize) -> Result<LimitLaw> {
    if a < 1 {
        return Err(Error::domain("A must be >= 1"));
    }
    let c = params.offset();
    let c = *c.numer() as f64 / *c.denom() as f64;
    LimitLaw::beta(a as f64 + c, 1.0 + c)
}

fn check_tree_degrees(k: usize, degrees: &[usize]) -> Result<()> {
    if k < 2 || degrees.len() != k {
        return Err(Error::domain(format!("need K >= 2 degrees, got K={k} with {} entries", degrees.len())));
    }
    if degrees.contains(&0) || degrees.iter().sum::<usize>() != 2 * k - 2 {
        return Err(Error::domain(format!("degrees {degrees:?} do not describe a tree on {k} vertices")));
    }
    Ok(())
}

/// Limit of the size fractions of the subtrees hanging off `v1..vK` once
/// the edges among them are cut, given their degrees in `T_K`.
pub fn limit_law_k(kind: ModelKind, k: usize, degrees: &[usize]) -> Result<LimitLaw> {
    check_tree_degrees(k, degrees)?;
    let alphas = match kind {
        ModelKind::UniformAttachment => vec![1.0; k],
        ModelKind::PreferentialAttachment => degrees.iter().map(|&d| d as f64 / 2.0).collect(),
        ModelKind::DiffusionRegular { d } => {
            if d < 3 {
                return Err(Error::UnsupportedModel(format!("diffusion with d = {d}")));
            }
            if let Some(&bad) = degrees.iter().find(|&&deg| deg >= d) {
                return Err(Error::domain(format!("degree {bad} leaves no free slot in a {d}-regular host")));
            }
            degrees.iter().map(|&deg| (d - deg) as f64 / (d - 2) as f64).collect()
        }
    };
    LimitLaw::dirichlet(alphas)
}

/// Urn where colour `i` is drawn with probability proportional to
/// `count_i + offset_i` and then gains `reinforcement` balls.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UrnSpec {
    pub start: Vec<u64>,
    pub reinforcement: u64,
    pub offset: Vec<f64>,
}

impl UrnSpec {
    pub fn new(start: Vec<u64>, reinforcement: u64, offset: Vec<f64>) -> Result<Self> {
        let spec = UrnSpec { start, reinforcement, offset };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.start.len() < 2 || self.offset.len() != self.start.len() {
            return Err(Error::domain("urn needs >= 2 colours and one offset per colour"));
        }
        if self.reinforcement == 0 {
            return Err(Error::domain("reinforcement must be positive"));
        }
        for (&s, &o) in self.start.iter().zip(&self.offset) {
            if s == 0 || !(s as f64 + o > 0.0) {
                return Err(Error::domain(format!("colour with start {s} and offset {o} can never be drawn")));
            }
        }
        Ok(())
    }

    pub fn colors(&self) -> usize {
        self.start.len()
    }

    /// Sizes `(A, 1)` of two competing subtrees, one ball per vertex, drawn
    /// with weight `size + beta/alpha`.
    pub fn pair(params: &WalkParams, a: usize) -> Result<Self> {
        let c = params.offset();
        let c = *c.numer() as f64 / *c.denom() as f64;
        UrnSpec::new(vec![a as u64, 1], 1, vec![c, c])
    }

    /// The urn behind the subtrees of `v1..vK`: subtree sizes (UA), degree
    /// sums (PA) or free host slots (diffusion).
    pub fn seed_tree(kind: ModelKind, degrees: &[usize]) -> Result<Self> {
        let k = degrees.len();
        check_tree_degrees(k, degrees)?;
        let zeros = vec![0.0; k];
        match kind {
            ModelKind::UniformAttachment => UrnSpec::new(vec![1; k], 1, zeros),
            ModelKind::PreferentialAttachment => {
                UrnSpec::new(degrees.iter().map(|&d| d as u64).collect(), 2, zeros)
            }
            ModelKind::DiffusionRegular { d } => {
                if d < 3 || degrees.iter().any(|&deg| deg >= d) {
                    return Err(Error::domain(format!("degrees {degrees:?} invalid for {d}-regular diffusion")));
                }
                UrnSpec::new(degrees.iter().map(|&deg| (d - deg) as u64).collect(), (d - 2) as u64, zeros)
            }
        }
    }

    /// Standard urn limit: Dirichlet with parameters `(start + offset) / reinforcement`.
    pub fn limit_law(&self) -> Result<LimitLaw> {
        let r = self.reinforcement as f64;
        let alphas: Vec<f64> = self.start.iter().zip(&self.offset).map(|(&s, &o)| (s as f64 + o) / r).collect();
        if alphas.len() == 2 {
            LimitLaw::beta(alphas[0], alphas[1])
        } else {
            LimitLaw::dirichlet(alphas)
        }
    }

    /// Number of draws since the start that went to colour `i`, given the
    /// current counts. For subtree urns this is `|T_i| - 1`.
    pub fn draws_of(&self, counts: &[u64], i: usize) -> u64 {
        (counts[i] - self.start[i]) / self.reinforcement
    }
}

/// Ball counts after `steps` draws.
pub fn simulate_urn_counts<R: Rng + ?Sized>(spec: &UrnSpec, steps: u64, rng: &mut R) -> Vec<u64> {
    let mut counts = spec.start.clone();
    let mut weights: Vec<f64> = counts.iter().zip(&spec.offset).map(|(&c, &o)| c as f64 + o).collect();
    let mut total: f64 = weights.iter().sum();
    let r = spec.reinforcement;
    let rf = r as f64;
    let last = counts.len() - 1;
    for _ in 0..steps {
        let mut u = rng.random::<f64>() * total;
        let mut pick = last;
        for (i, &w) in weights[..last].iter().enumerate() {
            if u < w {
                pick = i;
                break;
            }
            u -= w;
        }
        counts[pick] += r;
        weights[pick] += rf;
        total += rf;
    }
    counts
}

/// Colour fractions `count_i / total` after `steps` draws.
pub fn simulate_urn<R: Rng + ?Sized>(spec: &UrnSpec, steps: u64, rng: &mut R) -> Vec<f64> {
    let counts = simulate_urn_counts(spec, steps, rng);
    let total: u64 = counts.iter().sum();
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}
