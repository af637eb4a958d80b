//! Random growth processes: uniform attachment, preferential attachment and
//! diffusion inside an infinite d-regular host tree.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{GrowingTree, Insertion};

/// Largest seed graph `make_rball` will build.
pub const MAX_BALL_SIZE: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ModelKind {
    #[serde(rename = "ua")]
    UniformAttachment,
    #[serde(rename = "pa")]
    PreferentialAttachment,
    #[serde(rename = "diffusion")]
    DiffusionRegular { d: usize },
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::UniformAttachment => f.write_str("ua"),
            ModelKind::PreferentialAttachment => f.write_str("pa"),
            ModelKind::DiffusionRegular { d } => write!(f, "diff:{d}"),
        }
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    /// Accepts `ua`, `pa` and `diff:<d>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ua" => Ok(ModelKind::UniformAttachment),
            "pa" => Ok(ModelKind::PreferentialAttachment),
            _ => {
                let d = s
                    .strip_prefix("diff:")
                    .and_then(|d| d.parse::<usize>().ok())
                    .ok_or_else(|| Error::Config(format!("unknown model `{s}` (ua, pa, diff:<d>)")))?;
                if d < 2 {
                    return Err(Error::Config(format!("diffusion degree must be >= 2, got {d}")));
                }
                Ok(ModelKind::DiffusionRegular { d })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SeedGraph {
    #[default]
    Single,
    /// Vertex 0 with `k` leaves.
    StarHub { k: usize },
    /// Every host-tree vertex within distance `r` of vertex 0.
    RBall { r: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(flatten)]
    pub kind: ModelKind,
    #[serde(default)]
    pub seed_graph: SeedGraph,
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        ModelSpec { kind, seed_graph: SeedGraph::Single }
    }

    pub fn with_seed(kind: ModelKind, seed_graph: SeedGraph) -> Self {
        ModelSpec { kind, seed_graph }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind, self.seed_graph) {
            (ModelKind::DiffusionRegular { d }, _) if d < 2 => {
                Err(Error::Config(format!("diffusion degree must be >= 2, got {d}")))
            }
            (ModelKind::DiffusionRegular { .. }, SeedGraph::StarHub { .. }) => {
                Err(Error::Config("star hub seeds are for ua/pa; use r_ball with diffusion".into()))
            }
            (ModelKind::UniformAttachment | ModelKind::PreferentialAttachment, SeedGraph::RBall { .. }) => {
                Err(Error::Config("r_ball seeds need the diffusion model".into()))
            }
            (_, SeedGraph::StarHub { k: 0 }) => Err(Error::Config("hub size must be >= 1".into())),
            _ => Ok(()),
        }
    }

    /// Seed-graph edges in birth order.
    pub fn seed_edges(&self) -> Result<Vec<(usize, usize)>> {
        self.validate()?;
        match (self.kind, self.seed_graph) {
            (_, SeedGraph::Single) => Ok(vec![]),
            (_, SeedGraph::StarHub { k }) => make_star_hub(k),
            (ModelKind::DiffusionRegular { d }, SeedGraph::RBall { r }) => make_rball(d, r),
            _ => unreachable!("validated above"),
        }
    }
}

/// Seed for one replicate. ChaCha's native stream id keeps replicates
/// independent and lets them run in any order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub base_seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(base_seed: u64, stream_index: u64) -> Self {
        RngStream { base_seed, stream_index }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.base_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// `k + 1` vertices, all of `1..=k` attached to vertex 0.
pub fn make_star_hub(k: usize) -> Result<Vec<(usize, usize)>> {
    if k == 0 {
        return Err(Error::domain("hub size must be >= 1"));
    }
    Ok((1..=k).map(|v| (v, 0)).collect())
}

/// Number of host vertices within distance `r` of a vertex in the infinite
/// d-regular tree.
pub fn ball_size(d: usize, r: usize) -> Result<usize> {
    let mut total: usize = 1;
    let mut level: usize = 1;
    for depth in 1..=r {
        let branching = if depth == 1 { d } else { d - 1 };
        level = level
            .checked_mul(branching)
            .ok_or_else(|| Error::Overflow(format!("ball of radius {r} in {d}-regular tree")))?;
        total = total
            .checked_add(level)
            .filter(|&t| t <= MAX_BALL_SIZE)
            .ok_or_else(|| {
                Error::Overflow(format!("ball of radius {r} in {d}-regular tree exceeds {MAX_BALL_SIZE}"))
            })?;
    }
    Ok(total)
}

/// BFS-ordered r-ball around vertex 0 of the d-regular host tree.
pub fn make_rball(d: usize, r: usize) -> Result<Vec<(usize, usize)>> {
    if d < 3 {
        return Err(Error::domain(format!("r-ball seeds need d >= 3, got {d}")));
    }
    let size = ball_size(d, r)?;
    let mut edges = Vec::with_capacity(size - 1);
    let mut frontier = vec![0usize];
    let mut next_id = 1;
    for depth in 0..r {
        let mut next = Vec::with_capacity(frontier.len() * (d - 1));
        for &v in &frontier {
            let kids = if depth == 0 { d } else { d - 1 };
            for _ in 0..kids {
                edges.push((next_id, v));
                next.push(next_id);
                next_id += 1;
            }
        }
        frontier = next;
    }
    debug_assert_eq!(edges.len() + 1, size);
    Ok(edges)
}

/// Sampler state for one growth process. Parents are drawn uniformly from a
/// multiset of vertex ids whose multiplicities carry the attachment weights.
#[derive(Debug, Clone)]
pub struct GrowthProcess {
    kind: ModelKind,
    /// PA: each vertex once per unit of degree. Diffusion: once per free slot.
    slots: Vec<usize>,
}

impl GrowthProcess {
    /// Builds sampler state matching `tree`.
    pub fn new(kind: ModelKind, tree: &GrowingTree) -> Result<Self> {
        let mut slots = Vec::new();
        match kind {
            ModelKind::UniformAttachment => {}
            ModelKind::PreferentialAttachment => {
                slots.reserve(2 * tree.n());
                for (c, p) in tree.edges() {
                    slots.push(c);
                    slots.push(p);
                }
            }
            ModelKind::DiffusionRegular { d } => {
                if d < 2 {
                    return Err(Error::Config(format!("diffusion degree must be >= 2, got {d}")));
                }
                for (v, &deg) in tree.degrees().iter().enumerate() {
                    if deg > d {
                        return Err(Error::DegreeOverflow { vertex: v, degree: deg, d });
                    }
                    slots.extend(std::iter::repeat_n(v, d - deg));
                }
            }
        }
        Ok(GrowthProcess { kind, slots })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// Number of free host slots (diffusion) or degree units (PA).
    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    /// Draws the parent of the next vertex. Returns the index into the slot
    /// list as well so [`record`](Self::record) can consume that slot.
    #[inline]
    fn draw<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> (usize, usize) {
        match self.kind {
            ModelKind::UniformAttachment => (rng.random_range(0..n), 0),
            ModelKind::PreferentialAttachment if self.slots.is_empty() => (0, 0),
            _ => {
                let i = rng.random_range(0..self.slots.len());
                (self.slots[i], i)
            }
        }
    }

    pub fn choose_parent<R: Rng + ?Sized>(&self, tree: &GrowingTree, rng: &mut R) -> usize {
        self.draw(tree.n(), rng).0
    }

    fn record(&mut self, slot: usize, child: usize, parent: usize) {
        match self.kind {
            ModelKind::UniformAttachment => {}
            ModelKind::PreferentialAttachment => {
                self.slots.push(child);
                self.slots.push(parent);
            }
            ModelKind::DiffusionRegular { d } => {
                debug_assert_eq!(self.slots[slot], parent);
                self.slots.swap_remove(slot);
                self.slots.extend(std::iter::repeat_n(child, d - 1));
            }
        }
    }

    /// One growth step: draw a parent, insert the leaf, update the sampler.
    #[inline]
    pub fn step<R: Rng + ?Sized>(&mut self, tree: &mut GrowingTree, rng: &mut R) -> Insertion {
        let (parent, slot) = self.draw(tree.n(), rng);
        let ins = tree.insert(parent);
        self.record(slot, ins.vertex, parent);
        ins
    }
}

/// Exact attachment probabilities for the next vertex.
pub fn parent_distribution(kind: ModelKind, tree: &GrowingTree) -> Result<Vec<f64>> {
    let n = tree.n();
    let weights: Vec<f64> = match kind {
        ModelKind::UniformAttachment => vec![1.0; n],
        ModelKind::PreferentialAttachment if n == 1 => vec![1.0],
        ModelKind::PreferentialAttachment => tree.degrees().iter().map(|&d| d as f64).collect(),
        ModelKind::DiffusionRegular { d } => tree
            .degrees()
            .iter()
            .enumerate()
            .map(|(v, &deg)| {
                if deg > d {
                    Err(Error::DegreeOverflow { vertex: v, degree: deg, d })
                } else {
                    Ok((d - deg) as f64)
                }
            })
            .collect::<Result<_>>()?,
    };
    let total: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Per-step growth event, streamed as JSONL by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthEvent {
    pub step: usize,
    pub new_vertex: usize,
    pub parent: usize,
}

/// Grows the seed graph of `spec` to `n_target` vertices, calling `hook`
/// after every insertion.
pub fn grow<R, F>(spec: &ModelSpec, n_target: usize, rng: &mut R, mut hook: F) -> Result<GrowingTree>
where
    R: Rng + ?Sized,
    F: FnMut(&GrowthEvent, &GrowingTree),
{
    let seed = spec.seed_edges()?;
    if n_target < seed.len() + 1 {
        return Err(Error::Config(format!(
            "n_target {n_target} is smaller than the seed graph ({} vertices)",
            seed.len() + 1
        )));
    }
    let mut tree = GrowingTree::with_capacity(n_target);
    tree.extend_from_edges(&seed)?;
    let mut process = GrowthProcess::new(spec.kind, &tree)?;
    while tree.n() < n_target {
        let ins = process.step(&mut tree, rng);
        let event = GrowthEvent { step: tree.n(), new_vertex: ins.vertex, parent: ins.parent };
        hook(&event, &tree);
    }
    Ok(tree)
}
