//! Growing trees with exact centrality bookkeeping.
//!
//! Vertices are numbered in birth order (`0` is the first vertex, written v1
//! in reports). The size structure stays rooted at vertex 0 forever: every
//! vertex caches the size of its subtree below it and the size of its largest
//! child subtree, so the largest component left after deleting `u` is
//! `max(n - size_down(u), max_child_size(u))` and can be read in O(1).

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const NONE: usize = usize::MAX;

/// The one or two centroids of a tree together with their shared ψ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CentroidSet {
    /// Sorted by vertex id.
    pub members: Vec<usize>,
    pub psi_value: usize,
}

impl CentroidSet {
    pub fn contains(&self, v: usize) -> bool {
        self.members.contains(&v)
    }

    pub fn is_unique(&self) -> bool {
        self.members.len() == 1
    }
}

/// The `k` vertices with smallest ψ, ordered by `(ψ, birth order)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopKSet {
    pub k: usize,
    /// `(vertex, psi)` pairs.
    pub ordered: Vec<(usize, usize)>,
    /// Some excluded vertex has the same ψ as the last included one.
    pub boundary_tied: bool,
}

impl TopKSet {
    /// Member ids in ascending order, for set-level comparisons.
    pub fn vertex_set(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.ordered.iter().map(|&(u, _)| u).collect();
        v.sort_unstable();
        v
    }
}

/// What a single leaf insertion did to the tracked centroid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Insertion {
    pub vertex: usize,
    pub parent: usize,
    /// A centroid of the tree before the insertion.
    pub previous_centroid: usize,
    /// Size of the subtree hanging from the new vertex toward
    /// `previous_centroid`, i.e. everything on the far side of that centroid.
    pub far_side: usize,
    /// `previous_centroid` stopped being a centroid.
    pub moved: bool,
}

/// Fields touched on every step of the leaf-to-root walk, kept together.
#[derive(Debug, Clone, Copy)]
struct Node {
    size_down: usize,
    max_child_size: usize,
    heavy_child: usize,
}

/// Birth-ordered tree grown by leaf insertions.
#[derive(Debug, Clone)]
pub struct GrowingTree {
    // Kept apart and narrow: the insert walk is a chain of dependent loads
    // through this array, so it should stay cache resident.
    up: Vec<u32>,
    nodes: Vec<Node>,
    first_child: Vec<usize>,
    last_child: Vec<usize>,
    next_sibling: Vec<usize>,
    degree: Vec<usize>,
    centroid: usize,
    co_centroid: Option<usize>,
}

impl Default for GrowingTree {
    fn default() -> Self {
        Self::with_capacity(1)
    }
}

impl GrowingTree {
    /// Single-vertex tree with room for `capacity` vertices.
    pub fn with_capacity(capacity: usize) -> Self {
        let cap = capacity.max(1);
        let mut t = GrowingTree {
            up: Vec::with_capacity(cap),
            nodes: Vec::with_capacity(cap),
            first_child: Vec::with_capacity(cap),
            last_child: Vec::with_capacity(cap),
            next_sibling: Vec::with_capacity(cap),
            degree: Vec::with_capacity(cap),
            centroid: 0,
            co_centroid: None,
        };
        t.push_root();
        t
    }

    /// Builds a tree from `(child, parent)` pairs listed in birth order.
    pub fn new_tree(edges: &[(usize, usize)]) -> Result<Self> {
        let mut t = Self::with_capacity(edges.len() + 1);
        t.extend_from_edges(edges)?;
        Ok(t)
    }

    /// Appends `(child, parent)` pairs; each child must be the next id.
    pub fn extend_from_edges(&mut self, edges: &[(usize, usize)]) -> Result<()> {
        for &(child, parent) in edges {
            if child != self.n() {
                return Err(Error::NonTreeInput(format!(
                    "expected child id {}, found {child}",
                    self.n()
                )));
            }
            if parent >= child {
                return Err(Error::NonTreeInput(format!(
                    "parent {parent} of vertex {child} is not older than it"
                )));
            }
            self.insert(parent);
        }
        Ok(())
    }

    /// Shrinks back to a single vertex, keeping allocations.
    pub fn reset(&mut self) {
        self.up.clear();
        self.nodes.clear();
        self.first_child.clear();
        self.last_child.clear();
        self.next_sibling.clear();
        self.degree.clear();
        self.push_root();
    }

    fn push_root(&mut self) {
        self.up.push(u32::MAX);
        self.nodes.push(Node { size_down: 1, max_child_size: 0, heavy_child: NONE });
        self.first_child.push(NONE);
        self.last_child.push(NONE);
        self.next_sibling.push(NONE);
        self.degree.push(0);
        self.centroid = 0;
        self.co_centroid = None;
    }

    /// Parent id, `NONE` for the root.
    #[inline]
    fn par(&self, v: usize) -> usize {
        match self.up[v] {
            u32::MAX => NONE,
            p => p as usize,
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    fn check(&self, v: usize) -> Result<()> {
        if v < self.n() {
            Ok(())
        } else {
            Err(Error::UnknownVertex { vertex: v, n: self.n() })
        }
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.up.get(v).filter(|&&p| p != u32::MAX).map(|&p| p as usize)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.degree[v]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degree
    }

    pub fn size_down(&self, v: usize) -> usize {
        self.nodes[v].size_down
    }

    pub fn max_child_size(&self, v: usize) -> usize {
        self.nodes[v].max_child_size
    }

    pub fn children(&self, v: usize) -> Children<'_> {
        Children { tree: self, next: self.first_child[v] }
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.parent(v).into_iter().chain(self.children(v))
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.parent(a) == Some(b) || self.parent(b) == Some(a)
    }

    /// `(child, parent)` pairs in birth order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (1..self.n()).map(|v| (v, self.par(v))).collect()
    }

    /// Attaches a new leaf to `parent` and returns its id.
    pub fn add_leaf(&mut self, parent: usize) -> Result<usize> {
        self.check(parent)?;
        Ok(self.insert(parent).vertex)
    }

    /// Like [`add_leaf`](Self::add_leaf) but reports the centroid update.
    pub fn add_leaf_traced(&mut self, parent: usize) -> Result<Insertion> {
        self.check(parent)?;
        Ok(self.insert(parent))
    }

    /// Leaf insertion. Sizes change only on the path from the new leaf to the
    /// root; the same walk tells us on which side of the current centroid the
    /// leaf landed, which is all the centroid update needs.
    pub(crate) fn insert(&mut self, p: usize) -> Insertion {
        debug_assert!(p < self.n());
        let x = self.n();
        let n_new = x + 1;
        self.up.push(u32::try_from(p).expect("vertex ids fit in u32"));
        self.nodes.push(Node { size_down: 1, max_child_size: 0, heavy_child: NONE });
        self.first_child.push(NONE);
        self.last_child.push(NONE);
        self.next_sibling.push(NONE);
        self.degree.push(1);
        match self.last_child[p] {
            NONE => self.first_child[p] = x,
            last => self.next_sibling[last] = x,
        }
        self.last_child[p] = x;
        self.degree[p] += 1;

        let c = self.centroid;
        let mut toward = NONE;
        let mut u = x;
        // New size of `u`, carried so the only dependent load is the parent.
        let mut s = 1;
        while u != 0 {
            let up = self.up[u] as usize;
            let node = &mut self.nodes[up];
            node.size_down += 1;
            if s > node.max_child_size {
                node.max_child_size = s;
                node.heavy_child = u;
            }
            if up == c {
                toward = u;
            }
            s = node.size_down;
            u = up;
        }

        // Only the component of T - c holding the new leaf grew.
        let (w, s) = if toward != NONE {
            (toward, self.nodes[toward].size_down)
        } else {
            (self.par(c), n_new - self.nodes[c].size_down)
        };
        let moved = 2 * s > n_new;
        if moved {
            // s = n/2 + 1 with n even, so n_new is odd and w is the sole centroid.
            self.centroid = w;
            self.co_centroid = None;
        } else if 2 * s == n_new {
            self.co_centroid = Some(w);
        } else {
            self.co_centroid = None;
        }
        Insertion { vertex: x, parent: p, previous_centroid: c, far_side: n_new - s, moved }
    }

    /// ψ without bounds or size checks; needs `n >= 2`.
    #[inline]
    pub(crate) fn psi_fast(&self, u: usize) -> usize {
        (self.n() - self.nodes[u].size_down).max(self.nodes[u].max_child_size)
    }

    /// ψ(u): the size of the largest component of the tree with `u` removed.
    pub fn psi(&self, u: usize) -> Result<usize> {
        self.check(u)?;
        if self.n() < 2 {
            return Err(Error::Undefined);
        }
        Ok(self.psi_fast(u))
    }

    /// Size of the component of the tree minus `from` that contains `to`.
    pub fn component_size(&self, from: usize, to: usize) -> Result<usize> {
        self.check(from)?;
        self.check(to)?;
        if from == to {
            return Err(Error::domain("component_size needs two distinct vertices"));
        }
        Ok(self.component_size_fast(from, to))
    }

    pub(crate) fn component_size_fast(&self, from: usize, to: usize) -> usize {
        if from != 0 && self.up[from] as usize == to {
            return self.n() - self.nodes[from].size_down;
        }
        let mut u = to;
        while u != 0 {
            let up = self.par(u);
            if up == from {
                return self.nodes[u].size_down;
            }
            u = up;
        }
        self.n() - self.nodes[from].size_down
    }

    /// Whether `u` is a centroid, i.e. ψ(u) ≤ n/2.
    pub fn is_centroid(&self, u: usize) -> bool {
        u < self.n() && 2 * self.psi_or_zero(u) <= self.n()
    }

    fn psi_or_zero(&self, u: usize) -> usize {
        if self.n() < 2 {
            0
        } else {
            self.psi_fast(u)
        }
    }

    /// Centroid set maintained incrementally by the insertions.
    pub fn cached_centroids(&self) -> CentroidSet {
        let mut members = vec![self.centroid];
        if let Some(w) = self.co_centroid {
            members.push(w);
            members.sort_unstable();
        }
        CentroidSet { members, psi_value: self.psi_or_zero(self.centroid) }
    }

    /// The tracked centroid (the smaller-ψ side never matters: all members
    /// share ψ). Cheaper than building a [`CentroidSet`].
    pub fn primary_centroid(&self) -> usize {
        self.centroid
    }

    pub fn co_centroid(&self) -> Option<usize> {
        self.co_centroid
    }

    /// Centroids found by descending from vertex 0 into any child holding
    /// more than half of the vertices.
    pub fn centroids(&self) -> CentroidSet {
        let n = self.n();
        if n == 1 {
            return CentroidSet { members: vec![0], psi_value: 0 };
        }
        let mut u = 0;
        while 2 * self.nodes[u].max_child_size > n {
            u = self.nodes[u].heavy_child;
        }
        let psi_u = self.psi_fast(u);
        let mut members = vec![u];
        // A second centroid has to be adjacent and sit across a subtree of
        // exactly n/2 vertices: the parent side or the heaviest child.
        if let Some(p) = self.parent(u) {
            if self.psi_fast(p) == psi_u {
                members.push(p);
            }
        }
        let h = self.nodes[u].heavy_child;
        if members.len() == 1 && h != NONE && self.psi_fast(h) == psi_u {
            members.push(h);
        }
        members.sort_unstable();
        CentroidSet { members, psi_value: psi_u }
    }

    /// ψ for every vertex, recomputed from the parent links alone.
    pub fn psi_all(&self) -> Result<Vec<usize>> {
        let n = self.n();
        if n < 2 {
            return Err(Error::Undefined);
        }
        let mut size = vec![1usize; n];
        for v in (1..n).rev() {
            size[self.par(v)] += size[v];
        }
        let mut largest_child = vec![0usize; n];
        for v in 1..n {
            let p = self.par(v);
            largest_child[p] = largest_child[p].max(size[v]);
        }
        Ok((0..n).map(|u| (n - size[u]).max(largest_child[u])).collect())
    }

    /// Exact top-`k` by `(ψ, birth order)` via best-first search outward from
    /// the centroid.
    pub fn top_k(&self, k: usize) -> TopKSet {
        let n = self.n();
        if n == 1 || k == 0 {
            let ordered = if k == 0 { vec![] } else { vec![(0, 0)] };
            return TopKSet { k, ordered, boundary_tied: false };
        }
        if k >= n {
            return self.top_k_exhaustive(k);
        }
        let mut heap = BinaryHeap::new();
        match self.co_centroid {
            Some(w) => {
                heap.push(Reverse((self.psi_fast(self.centroid), self.centroid, w)));
                heap.push(Reverse((self.psi_fast(w), w, self.centroid)));
            }
            None => heap.push(Reverse((self.psi_fast(self.centroid), self.centroid, NONE))),
        }
        let mut ordered = Vec::with_capacity(k);
        while ordered.len() < k {
            let Reverse((psi_u, u, from)) = heap.pop().expect("frontier exhausted before k");
            ordered.push((u, psi_u));
            for w in self.neighbors(u) {
                if w == from {
                    continue;
                }
                let psi_w = self.psi_fast(w);
                // Pruning relies on ψ growing strictly away from the centroid.
                if cfg!(debug_assertions) && psi_w <= psi_u {
                    return self.top_k_exhaustive(k);
                }
                heap.push(Reverse((psi_w, w, u)));
            }
        }
        let last = ordered[k - 1].1;
        let boundary_tied = heap.peek().is_some_and(|Reverse((p, _, _))| *p == last);
        TopKSet { k, ordered, boundary_tied }
    }

    /// Top-`k` by sorting every vertex; O(n log n).
    pub fn top_k_exhaustive(&self, k: usize) -> TopKSet {
        let n = self.n();
        if n == 1 {
            return self.top_k(k);
        }
        let psi = self.psi_all().expect("n >= 2");
        let mut all: Vec<(usize, usize)> = psi.into_iter().enumerate().map(|(u, p)| (p, u)).collect();
        all.sort_unstable();
        let take = k.min(n);
        let boundary_tied = take > 0 && take < n && all[take].0 == all[take - 1].0;
        TopKSet { k, ordered: all[..take].iter().map(|&(p, u)| (u, p)).collect(), boundary_tied }
    }
}

pub struct Children<'a> {
    tree: &'a GrowingTree,
    next: usize,
}

impl Iterator for Children<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.next == NONE {
            return None;
        }
        let v = self.next;
        self.next = self.tree.next_sibling[v];
        Some(v)
    }
}

/// Parses the edge-list text format: one `child parent` pair per line.
/// Blank lines and lines starting with `#` are skipped.
pub fn parse_edge_list(text: &str) -> Result<Vec<(usize, usize)>> {
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let parse = |s: Option<&str>| -> Result<usize> {
            s.and_then(|s| s.parse().ok()).ok_or_else(|| {
                Error::NonTreeInput(format!("line {}: expected `child parent`", lineno + 1))
            })
        };
        let child = parse(parts.next())?;
        let parent = parse(parts.next())?;
        if parts.next().is_some() {
            return Err(Error::NonTreeInput(format!("line {}: trailing fields", lineno + 1)));
        }
        edges.push((child, parent));
    }
    Ok(edges)
}

pub fn format_edge_list(edges: &[(usize, usize)]) -> String {
    let mut out = String::with_capacity(edges.len() * 12);
    for &(c, p) in edges {
        let _ = writeln!(out, "{c} {p}");
    }
    out
}
