//! Brute-force oracles shared by the integration tests. Everything here works
//! from plain edge lists or from first principles so it never goes through
//! the bookkeeping it is used to check.
#![allow(dead_code)]

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

pub fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    adj
}

/// Size of the component of the tree minus `removed` that contains `start`.
pub fn component_without(adj: &[Vec<usize>], removed: usize, start: usize) -> usize {
    let mut seen = vec![false; adj.len()];
    seen[removed] = true;
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    let mut count = 0;
    while let Some(u) = queue.pop_front() {
        count += 1;
        for &w in &adj[u] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    count
}

/// Largest component left after deleting `u`, by flood fill from each neighbour.
pub fn psi_by_rerooting(adj: &[Vec<usize>], u: usize) -> usize {
    adj[u].iter().map(|&w| component_without(adj, u, w)).max().unwrap_or(0)
}

pub fn psi_all_brute(adj: &[Vec<usize>]) -> Vec<usize> {
    (0..adj.len()).map(|u| psi_by_rerooting(adj, u)).collect()
}

/// All minimisers of ψ, ascending.
pub fn centroids_brute(adj: &[Vec<usize>]) -> (Vec<usize>, usize) {
    let psi = psi_all_brute(adj);
    let best = *psi.iter().min().unwrap();
    ((0..adj.len()).filter(|&u| psi[u] == best).collect(), best)
}

/// `(ordered (vertex, psi), boundary_tied)` for the `k` most central vertices.
pub fn top_k_brute(adj: &[Vec<usize>], k: usize) -> (Vec<(usize, usize)>, bool) {
    let psi = psi_all_brute(adj);
    let mut order: Vec<(usize, usize)> = psi.iter().enumerate().map(|(v, &p)| (v, p)).collect();
    order.sort_by_key(|&(v, p)| (p, v));
    let k = k.min(order.len());
    let tied = k > 0 && order[k..].iter().any(|&(_, p)| p == order[k - 1].1);
    order.truncate(k);
    (order, tied)
}

/// Every monotone path from `(a, b)` to `(m, m)` that keeps the first
/// coordinate strictly ahead until the end. `true` is a step in the first
/// coordinate.
pub fn enumerate_paths(a: usize, b: usize, m: usize) -> Vec<Vec<bool>> {
    fn go(i: usize, j: usize, m: usize, path: &mut Vec<bool>, out: &mut Vec<Vec<bool>>) {
        if i == m && j == m {
            out.push(path.clone());
            return;
        }
        if i == j {
            return;
        }
        if i < m {
            path.push(true);
            go(i + 1, j, m, path, out);
            path.pop();
        }
        if j < m {
            path.push(false);
            go(i, j + 1, m, path, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    go(a, b, m, &mut Vec::new(), &mut out);
    out
}

fn int(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// Product of the step probabilities along `path`, where from `(i, j)` the
/// first coordinate grows with weight `alpha*i + beta` against
/// `alpha*j + beta` for the second.
pub fn path_step_product(alpha: i64, beta: i64, a: usize, b: usize, path: &[bool]) -> BigRational {
    let (mut i, mut j) = (a as i64, b as i64);
    let mut p = BigRational::one();
    for &right in path {
        let wi = int(alpha * i + beta);
        let wj = int(alpha * j + beta);
        let total = &wi + &wj;
        if right {
            p *= wi / total;
            i += 1;
        } else {
            p *= wj / total;
            j += 1;
        }
    }
    p
}

/// Star with `k` leaves under preferential attachment: the next `k - 1`
/// vertices must all pick leaf 1, whose degree grows from 1.
pub fn pa_hub_steps(k: usize) -> BigRational {
    let mut p = BigRational::one();
    let mut leaf_degree = 1i64;
    let mut total_degree = 2 * k as i64;
    for _ in 1..k {
        p *= int(leaf_degree) / int(total_degree);
        leaf_degree += 1;
        total_degree += 2;
    }
    p
}

/// Same event under uniform attachment.
pub fn ua_hub_steps(k: usize) -> BigRational {
    let mut p = BigRational::one();
    let mut vertices = k as i64 + 1;
    for _ in 1..k {
        p *= int(1) / int(vertices);
        vertices += 1;
    }
    p
}

/// Radius-`r` ball of the `d`-regular tree around vertex 0, built by BFS.
/// Returns `(parent, depth)` per vertex; vertex 1 is the first neighbour.
pub fn host_ball(d: usize, r: usize) -> (Vec<usize>, Vec<usize>) {
    let mut parent = vec![usize::MAX];
    let mut depth = vec![0];
    let mut frontier = vec![0];
    for level in 1..=r {
        let mut next = Vec::new();
        for &u in &frontier {
            let kids = if u == 0 { d } else { d - 1 };
            for _ in 0..kids {
                parent.push(u);
                depth.push(level);
                next.push(parent.len() - 1);
            }
        }
        frontier = next;
    }
    (parent, depth)
}

/// Diffusion from the radius-`r` ball: every open host slot below vertex 1
/// has to be filled before anything else happens. Each arrival closes one
/// slot and opens `d - 1`, so the total grows by `d - 2`; the new slots sit
/// deeper and do not count.
pub fn diffusion_ball_steps(d: usize, r: usize) -> BigRational {
    let (parent, _) = host_ball(d, r);
    let n = parent.len();
    let mut degree = vec![0usize; n];
    for v in 1..n {
        degree[v] += 1;
        degree[parent[v]] += 1;
    }
    let below_one = |mut v: usize| {
        while v != 0 && v != 1 {
            v = parent[v];
        }
        v == 1
    };
    let mut open: i64 = (1..n).filter(|&v| below_one(v)).map(|v| (d - degree[v]) as i64).sum();
    let mut total: i64 = degree.iter().map(|&deg| (d - deg) as i64).sum();
    let mut p = BigRational::one();
    while open > 0 {
        p *= int(open) / int(total);
        open -= 1;
        total += d as i64 - 2;
    }
    p
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}
