use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{model_label, ExperimentConfig};
use crate::error::Result;
use crate::growth::{GrowthProcess, ModelKind, RngStream};
use crate::tree::{CentroidSet, GrowingTree, Insertion, TopKSet};

/// Violation messages kept per replicate; the count is always exact.
pub const MAX_RECORDED_VIOLATIONS: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateTrace {
    pub replicate: u64,
    pub seed_vertices: usize,
    pub n_target: usize,
    /// Tree size right after the last insertion that changed the centroid set.
    pub last_centroid_change: Option<usize>,
    pub centroid_change_count: usize,
    /// Tree size at the last top-K comparison whose set differed from the
    /// previous comparison.
    pub last_topk_change: Option<usize>,
    pub final_centroid: CentroidSet,
    pub final_topk: Option<TopKSet>,
    pub v1_is_final_centroid: bool,
    /// Vertex 0 was a centroid at every size from the seed to `n_target`.
    pub v1_always_centroid: bool,
    /// Vertex 0 was the only centroid at every size.
    pub v1_always_sole_centroid: bool,
    /// Largest tree size at which vertex 0 was a centroid.
    pub v1_last_centroid: Option<usize>,
    pub violation_count: usize,
    pub invariant_violations: Vec<String>,
}

#[derive(Debug, Default)]
struct Violations {
    count: usize,
    messages: Vec<String>,
}

impl Violations {
    fn push(&mut self, n: usize, what: impl FnOnce() -> String) {
        self.count += 1;
        if self.messages.len() < MAX_RECORDED_VIOLATIONS {
            self.messages.push(format!("n={n}: {}", what()));
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct TrackedPair {
    newcomer: usize,
    anchor: usize,
    gap: i64,
}

/// Per-step consistency checks on a growing tree.
struct InvariantChecker {
    kind: ModelKind,
    long_lived: Vec<TrackedPair>,
    latest: Option<TrackedPair>,
}

impl InvariantChecker {
    fn new(kind: ModelKind) -> Self {
        InvariantChecker { kind, long_lived: Vec::new(), latest: None }
    }

    fn gap(tree: &GrowingTree, a: usize, b: usize) -> i64 {
        tree.psi_fast(a) as i64 - tree.psi_fast(b) as i64
    }

    fn advance(tree: &GrowingTree, pair: &mut TrackedPair, out: &mut Violations) {
        let n = tree.n();
        let gap = Self::gap(tree, pair.newcomer, pair.anchor);
        if (gap - pair.gap).abs() > 1 {
            let (a, b, g) = (pair.newcomer, pair.anchor, pair.gap);
            out.push(n, || format!("psi gap of ({a}, {b}) jumped from {g} to {gap}"));
        }
        if gap == 0 {
            let toward_new = tree.component_size_fast(pair.anchor, pair.newcomer);
            let toward_old = tree.component_size_fast(pair.newcomer, pair.anchor);
            if toward_new != toward_old {
                let (a, b) = (pair.newcomer, pair.anchor);
                out.push(n, || format!("tied pair ({a}, {b}) splits unevenly: {toward_new} vs {toward_old}"));
            }
        }
        pair.gap = gap;
    }

    fn after_insert(&mut self, tree: &GrowingTree, ins: &Insertion, out: &mut Violations) {
        let n = tree.n();
        let before = n - 1;

        // Everything outside the old centroid's branch toward the newcomer
        // lies past it, which is at least half of the old tree.
        let far = ins.far_side;
        // The independent recount walks as far as the insertion did, so it is
        // sampled; the bound below is checked on every step.
        if n <= 64 || n % 8 == 0 {
            let recount = n - tree.component_size_fast(ins.previous_centroid, ins.vertex);
            if recount != far {
                out.push(n, || format!("far side recomputed as {recount}, insertion reported {far}"));
            }
        }
        if 2 * far < before {
            out.push(n, || format!("only {far} of {before} old vertices lie past the old centroid"));
        }

        let c = tree.primary_centroid();
        let psi_c = tree.psi_fast(c);
        if 2 * psi_c > n {
            out.push(n, || format!("centroid {c} has psi {psi_c} > n/2"));
        }
        if let Some(w) = tree.co_centroid() {
            let psi_w = tree.psi_fast(w);
            if !tree.adjacent(c, w) || psi_w != psi_c {
                out.push(n, || format!("co-centroids {c}, {w} not adjacent or psi differs ({psi_c} vs {psi_w})"));
            } else if tree.component_size_fast(c, w) != psi_c || tree.component_size_fast(w, c) != psi_w {
                out.push(n, || format!("co-centroids {c}, {w}: largest branches are not the shared edge"));
            }
        }
        if let ModelKind::DiffusionRegular { d } = self.kind {
            let deg = tree.degree(ins.parent);
            if deg > d {
                let p = ins.parent;
                out.push(n, || format!("vertex {p} has degree {deg} > {d}"));
            }
        }

        for pair in self.long_lived.iter_mut().chain(self.latest.as_mut()) {
            Self::advance(tree, pair, out);
        }
        let gap = Self::gap(tree, ins.vertex, ins.previous_centroid);
        if before > 2 && gap < 1 {
            let (x, a) = (ins.vertex, ins.previous_centroid);
            out.push(n, || format!("newcomer {x} starts as central as old centroid {a}"));
        }
        let pair = TrackedPair { newcomer: ins.vertex, anchor: ins.previous_centroid, gap };
        if n.is_power_of_two() {
            self.long_lived.push(pair);
            self.latest = None;
        } else {
            self.latest = Some(pair);
        }
    }

    fn checkpoint(&self, tree: &GrowingTree, process: &GrowthProcess, out: &mut Violations) {
        let n = tree.n();
        let cached = tree.cached_centroids();
        let descent = tree.centroids();
        if cached != descent {
            out.push(n, || format!("tracked centroids {:?} differ from recomputed {:?}", cached.members, descent.members));
        }
        match self.kind {
            ModelKind::PreferentialAttachment if n > 1 => {
                if process.slot_count() != 2 * (n - 1) {
                    out.push(n, || format!("{} degree units for {} edges", process.slot_count(), n - 1));
                }
            }
            ModelKind::DiffusionRegular { d } => {
                let expected = (d - 2) * n + 2;
                if process.slot_count() != expected {
                    out.push(n, || format!("{} free slots, expected {expected}", process.slot_count()));
                }
                if let Some(v) = tree.degrees().iter().position(|&deg| deg > d) {
                    out.push(n, || format!("vertex {v} exceeds degree {d}"));
                }
            }
            _ => {}
        }
    }
}

type CentroidKey = (usize, Option<usize>);

fn centroid_key(tree: &GrowingTree) -> CentroidKey {
    let c = tree.primary_centroid();
    match tree.co_centroid() {
        Some(w) => (c.min(w), Some(c.max(w))),
        None => (c, None),
    }
}

/// Grows one replicate of `config` using `stream`.
pub fn run_replicate(config: &ExperimentConfig, stream: RngStream) -> Result<ReplicateTrace> {
    let spec = &config.model;
    let n_target = config.n_target;
    let mut tree = GrowingTree::with_capacity(n_target);
    tree.extend_from_edges(&spec.seed_edges()?)?;
    let mut process = GrowthProcess::new(spec.kind, &tree)?;
    let mut rng = stream.rng();
    let seed_vertices = tree.n();

    let mut checker = config.invariant_checks.then(|| InvariantChecker::new(spec.kind));
    let mut violations = Violations::default();
    if let Some(ch) = &checker {
        ch.checkpoint(&tree, &process, &mut violations);
    }

    let mut key = centroid_key(&tree);
    let v1_in = |k: CentroidKey| k.0 == 0;
    let mut last_centroid_change = None;
    let mut centroid_change_count = 0;
    let mut v1_always = v1_in(key);
    let mut v1_always_sole = key == (0, None);
    let mut v1_last = v1_in(key).then_some(seed_vertices);

    let k = config.top_k;
    let mut topk = (k > 0).then(|| tree.top_k(k).vertex_set());
    let mut last_topk_change = None;
    let mut checkpoints = config.checkpoints.iter().copied().filter(|&c| c > seed_vertices).peekable();

    while tree.n() < n_target {
        let ins = process.step(&mut tree, &mut rng);
        let n = tree.n();

        let now = centroid_key(&tree);
        if now != key {
            centroid_change_count += 1;
            last_centroid_change = Some(n);
            key = now;
        }
        // Sorted key: vertex 0 can only appear first.
        if v1_in(key) {
            v1_last = Some(n);
            v1_always_sole &= key.1.is_none();
        } else {
            v1_always = false;
            v1_always_sole = false;
        }

        if let Some(ch) = checker.as_mut() {
            ch.after_insert(&tree, &ins, &mut violations);
        }

        let mut at_checkpoint = n == n_target;
        while checkpoints.next_if(|&c| c <= n).is_some() {
            at_checkpoint = true;
        }
        if let Some(prev) = topk.as_mut() {
            if config.topk_every_step || at_checkpoint {
                let set = tree.top_k(k).vertex_set();
                if set != *prev {
                    last_topk_change = Some(n);
                    *prev = set;
                }
            }
        }
        if at_checkpoint {
            if let Some(ch) = &checker {
                ch.checkpoint(&tree, &process, &mut violations);
            }
        }
    }

    let final_centroid = tree.cached_centroids();
    Ok(ReplicateTrace {
        replicate: stream.stream_index,
        seed_vertices,
        n_target,
        last_centroid_change,
        centroid_change_count,
        last_topk_change,
        v1_is_final_centroid: final_centroid.contains(0),
        final_centroid,
        final_topk: (k > 0).then(|| tree.top_k(k)),
        v1_always_centroid: v1_always,
        v1_always_sole_centroid: v1_always_sole,
        v1_last_centroid: v1_last,
        violation_count: violations.count,
        invariant_violations: violations.messages,
    })
}

/// Runs every replicate on the current rayon pool. Traces come back in
/// replicate order.
pub(crate) fn run_streams<F>(config: &ExperimentConfig, stream_of: F) -> Result<Vec<ReplicateTrace>>
where
    F: Fn(u64) -> RngStream + Sync,
{
    config.validate()?;
    (0..config.replicates as u64)
        .into_par_iter()
        .map(|i| {
            let mut trace = run_replicate(config, stream_of(i))?;
            trace.replicate = i;
            Ok(trace)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PersistenceSummary {
    pub model: String,
    pub n_target: usize,
    pub replicates: usize,
    /// Fraction of replicates whose centroid set changed after `n_target / 2`.
    pub frac_change_after_half: f64,
    pub frac_no_change: f64,
    pub mean_change_count: f64,
    pub median_last_change: f64,
    pub frac_v1_final_centroid: f64,
    pub frac_v1_always_centroid: f64,
    pub frac_v1_always_sole_centroid: f64,
    /// Fraction in which vertex 0 was still a centroid after `n_target / 2`.
    pub frac_v1_centroid_after_half: f64,
    pub frac_topk_change_after_half: Option<f64>,
    pub violations: usize,
}

impl PersistenceSummary {
    pub fn from_traces(config: &ExperimentConfig, traces: &[ReplicateTrace]) -> Self {
        let n = config.n_target;
        let reps = traces.len();
        let frac = |pred: &dyn Fn(&ReplicateTrace) -> bool| {
            traces.iter().filter(|t| pred(t)).count() as f64 / reps as f64
        };
        let after_half = |t: Option<usize>| t.is_some_and(|t| 2 * t > n);
        let mut last: Vec<f64> = last_change_samples(traces);
        last.sort_by(f64::total_cmp);
        let median_last_change = match reps {
            0 => f64::NAN,
            _ if reps % 2 == 1 => last[reps / 2],
            _ => 0.5 * (last[reps / 2 - 1] + last[reps / 2]),
        };
        PersistenceSummary {
            model: model_label(&config.model),
            n_target: n,
            replicates: reps,
            frac_change_after_half: frac(&|t| after_half(t.last_centroid_change)),
            frac_no_change: frac(&|t| t.centroid_change_count == 0),
            mean_change_count: traces.iter().map(|t| t.centroid_change_count as f64).sum::<f64>() / reps as f64,
            median_last_change,
            frac_v1_final_centroid: frac(&|t| t.v1_is_final_centroid),
            frac_v1_always_centroid: frac(&|t| t.v1_always_centroid),
            frac_v1_always_sole_centroid: frac(&|t| t.v1_always_sole_centroid),
            frac_v1_centroid_after_half: frac(&|t| after_half(t.v1_last_centroid)),
            frac_topk_change_after_half: (config.top_k > 0).then(|| frac(&|t| after_half(t.last_topk_change))),
            violations: traces.iter().map(|t| t.violation_count).sum(),
        }
    }

    pub const CSV_HEADER: &'static str = "model,n_target,replicates,frac_change_after_half,frac_no_change,\
mean_change_count,median_last_change,frac_v1_final_centroid,frac_v1_always_centroid,\
frac_v1_always_sole_centroid,frac_v1_centroid_after_half,frac_topk_change_after_half,violations";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.model,
            self.n_target,
            self.replicates,
            self.frac_change_after_half,
            self.frac_no_change,
            self.mean_change_count,
            self.median_last_change,
            self.frac_v1_final_centroid,
            self.frac_v1_always_centroid,
            self.frac_v1_always_sole_centroid,
            self.frac_v1_centroid_after_half,
            self.frac_topk_change_after_half.map_or(String::new(), |f| f.to_string()),
            self.violations
        )
    }
}

/// Last centroid-change times as floats; replicates without a change count
/// as the seed size.
pub fn last_change_samples(traces: &[ReplicateTrace]) -> Vec<f64> {
    traces.iter().map(|t| t.last_centroid_change.unwrap_or(t.seed_vertices) as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PersistenceRun {
    pub traces: Vec<ReplicateTrace>,
    pub summary: PersistenceSummary,
}

impl PersistenceRun {
    pub fn last_change_samples(&self) -> Vec<f64> {
        last_change_samples(&self.traces)
    }
}

/// Grows `config.replicates` independent trees and summarizes how late
/// their centroids kept moving.
pub fn run_persistence(config: &ExperimentConfig) -> Result<PersistenceRun> {
    let traces = run_streams(config, |i| RngStream::new(config.base_seed, i))?;
    let summary = PersistenceSummary::from_traces(config, &traces);
    Ok(PersistenceRun { traces, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::growth::{ModelSpec, SeedGraph};

    fn config(kind: ModelKind, n: usize, reps: usize) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(ModelSpec::new(kind), n, reps, 11);
        c.invariant_checks = true;
        c
    }

    fn brute_psi(tree: &GrowingTree, u: usize) -> usize {
        let n = tree.n();
        let adj: Vec<Vec<usize>> = (0..n).map(|v| tree.neighbors(v).collect()).collect();
        let mut best = 0;
        for &start in &adj[u] {
            let mut seen = vec![false; n];
            seen[u] = true;
            seen[start] = true;
            let mut stack = vec![start];
            let mut count = 0;
            while let Some(v) = stack.pop() {
                count += 1;
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            best = best.max(count);
        }
        best
    }

    fn brute_centroids(tree: &GrowingTree) -> Vec<usize> {
        if tree.n() == 1 {
            return vec![0];
        }
        let psi: Vec<usize> = (0..tree.n()).map(|u| brute_psi(tree, u)).collect();
        let best = *psi.iter().min().unwrap();
        (0..tree.n()).filter(|&u| psi[u] == best).collect()
    }

    /// Replays the same parent draws on a fresh tree, recomputing every
    /// centroid set by flood fill.
    fn replay(config: &ExperimentConfig, stream: RngStream) -> (Option<usize>, usize, Option<usize>, bool) {
        let mut rng = stream.rng();
        let mut tree = GrowingTree::new_tree(&config.model.seed_edges().unwrap()).unwrap();
        let mut process = GrowthProcess::new(config.model.kind, &tree).unwrap();
        let mut shadow = tree.clone();
        let mut prev = brute_centroids(&shadow);
        let (mut last, mut count, mut v1_last, mut v1_always) = (None, 0, None, prev.contains(&0));
        if v1_always {
            v1_last = Some(shadow.n());
        }
        while tree.n() < config.n_target {
            let ins = process.step(&mut tree, &mut rng);
            shadow.add_leaf(ins.parent).unwrap();
            let now = brute_centroids(&shadow);
            if now != prev {
                count += 1;
                last = Some(shadow.n());
                prev = now;
            }
            if prev.contains(&0) {
                v1_last = Some(shadow.n());
            } else {
                v1_always = false;
            }
        }
        (last, count, v1_last, v1_always)
    }

    #[test]
    fn trace_matches_brute_force_replay() {
        for kind in [ModelKind::UniformAttachment, ModelKind::PreferentialAttachment, ModelKind::DiffusionRegular { d: 3 }] {
            let cfg = config(kind, 10, 1);
            for rep in 0..40 {
                let stream = RngStream::new(cfg.base_seed, rep);
                let t = run_replicate(&cfg, stream).unwrap();
                let (last, count, v1_last, v1_always) = replay(&cfg, stream);
                assert_eq!(t.last_centroid_change, last, "{kind} rep {rep}");
                assert_eq!(t.centroid_change_count, count);
                assert_eq!(t.v1_last_centroid, v1_last);
                assert_eq!(t.v1_always_centroid, v1_always);
                assert_eq!(t.violation_count, 0, "{:?}", t.invariant_violations);
            }
        }
    }

    #[test]
    fn no_violations_on_moderate_runs() {
        for kind in [
            ModelKind::UniformAttachment,
            ModelKind::PreferentialAttachment,
            ModelKind::DiffusionRegular { d: 2 },
            ModelKind::DiffusionRegular { d: 4 },
        ] {
            let mut cfg = config(kind, 3000, 6);
            cfg.checkpoints = vec![100, 1000, 2000];
            cfg.top_k = 4;
            let run = run_persistence(&cfg).unwrap();
            assert_eq!(run.summary.violations, 0, "{kind}: {:?}", run.traces[0].invariant_violations);
            for t in &run.traces {
                assert_eq!(t.centroid_change_count == 0, t.last_centroid_change.is_none());
                assert!(t.last_centroid_change.unwrap_or(0) <= cfg.n_target);
                assert_eq!(t.final_topk.as_ref().unwrap().ordered.len(), 4);
            }
        }
    }

    #[test]
    fn path_centroid_moves_every_step() {
        let run = run_persistence(&config(ModelKind::DiffusionRegular { d: 2 }, 200, 3)).unwrap();
        for t in &run.traces {
            assert_eq!(t.centroid_change_count, 199);
            assert_eq!(t.last_centroid_change, Some(200));
        }
    }

    #[test]
    fn topk_every_step_sees_no_fewer_changes() {
        let mut cfg = config(ModelKind::PreferentialAttachment, 500, 4);
        cfg.top_k = 3;
        cfg.checkpoints = vec![100, 250];
        let sparse = run_persistence(&cfg).unwrap();
        cfg.topk_every_step = true;
        let dense = run_persistence(&cfg).unwrap();
        let evals = [1, 100, 250, 500];
        for (a, b) in sparse.traces.iter().zip(&dense.traces) {
            assert_eq!(a.final_topk, b.final_topk);
            // A change seen at one comparison happened after the one before it.
            if let Some(t) = a.last_topk_change {
                let prev = evals[evals.iter().position(|&e| e == t).unwrap() - 1];
                assert!(b.last_topk_change.unwrap() > prev);
            }
        }
    }

    #[test]
    fn aggregate_ignores_thread_count() {
        let cfg = config(ModelKind::UniformAttachment, 400, 16);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let a = one.install(|| run_persistence(&cfg)).unwrap();
        let b = three.install(|| run_persistence(&cfg)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn hub_seed_starts_with_vertex_zero() {
        let mut cfg = config(ModelKind::PreferentialAttachment, 50, 5);
        cfg.model.seed_graph = SeedGraph::StarHub { k: 6 };
        for t in run_persistence(&cfg).unwrap().traces {
            assert_eq!(t.seed_vertices, 7);
            assert!(t.v1_last_centroid.is_some());
        }
    }
}
