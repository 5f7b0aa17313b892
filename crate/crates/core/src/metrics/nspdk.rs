//! Neighbourhood subgraph pairwise distance features.
//!
//! The radius-`r` neighbourhood of a root is encoded as the sorted list of
//! `distance:label` tokens of its nodes followed by the sorted list of its
//! edges (endpoint distances and labels, oriented canonically). A feature
//! is a pair of rooted neighbourhoods at the same radius whose roots lie at
//! shortest-path distance `d`, hashed to 64 bits.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::graph::LabeledGraph;

pub const DEFAULT_RADIUS: usize = 2;
pub const DEFAULT_DISTANCE: usize = 4;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NspdkFeatureVector {
    /// `(radius, distance, hash)` to count.
    pub counts: BTreeMap<(usize, usize, u64), f64>,
}

impl NspdkFeatureVector {
    pub fn norm(&self) -> f64 {
        self.counts.values().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        let (small, big) = if self.counts.len() <= other.counts.len() { (self, other) } else { (other, self) };
        small.counts.iter().filter_map(|(k, a)| big.counts.get(k).map(|b| a * b)).sum()
    }
}

/// Cosine-normalized kernel; two featureless graphs are identical.
pub fn nspdk_kernel(a: &NspdkFeatureVector, b: &NspdkFeatureVector) -> f64 {
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return if na == nb { 1.0 } else { 0.0 };
    }
    (a.dot(b) / (na * nb)).clamp(0.0, 1.0)
}

fn hash64(s: &str) -> u64 {
    let d = Sha256::digest(s.as_bytes());
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

/// Distances from `src`, up to `limit` (unreached nodes are `None`).
fn bfs(g: &LabeledGraph, src: usize, limit: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.node_count()];
    dist[src] = Some(0);
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].expect("queued nodes are reached");
        if du == limit {
            continue;
        }
        for &(w, _) in g.neighbors(u) {
            if dist[w].is_none() {
                dist[w] = Some(du + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

fn encode(g: &LabeledGraph, dist: &[Option<usize>], r: usize) -> String {
    let within = |v: usize| dist[v].filter(|&d| d <= r);
    let mut nodes: Vec<String> = (0..g.node_count()).filter_map(|v| within(v).map(|d| format!("{d}:{}", g.label(v)))).collect();
    nodes.sort_unstable();
    let mut edges: Vec<String> = g
        .edges()
        .iter()
        .filter_map(|e| {
            let (du, dv) = (within(e.u)?, within(e.v)?);
            let a = (du, g.label(e.u));
            let b = (dv, g.label(e.v));
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            Some(format!("{}:{}-{}-{}:{}", a.0, a.1, e.label, b.0, b.1))
        })
        .collect();
    edges.sort_unstable();
    format!("{}|{}", nodes.join(","), edges.join(","))
}

pub fn nspdk_features(g: &LabeledGraph, r_max: usize, d_max: usize) -> NspdkFeatureVector {
    let n = g.node_count();
    let reach = r_max.max(d_max);
    let dists: Vec<Vec<Option<usize>>> = (0..n).map(|v| bfs(g, v, reach)).collect();
    let enc: Vec<Vec<String>> = (0..n).map(|v| (0..=r_max).map(|r| encode(g, &dists[v], r)).collect()).collect();
    let mut out = NspdkFeatureVector::default();
    for u in 0..n {
        for v in 0..n {
            let Some(d) = dists[u][v].filter(|&d| d <= d_max) else { continue };
            for (r, (a, b)) in enc[u].iter().zip(&enc[v]).enumerate() {
                let key = hash64(&format!("{a}#{b}"));
                *out.counts.entry((r, d, key)).or_default() += 1.0;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_kernel_is_one() {
        let g = LabeledGraph::from_parts(["A", "B", "A"], [(0, 1, "x"), (1, 2, "y")]);
        let f = nspdk_features(&g, 2, 4);
        assert!((nspdk_kernel(&f, &f) - 1.0).abs() < 1e-12);
        let p = g.permuted(&[2, 0, 1]);
        assert_eq!(nspdk_features(&p, 2, 4), f);
    }

    #[test]
    fn differing_labels_lower_the_kernel() {
        let a = nspdk_features(&LabeledGraph::from_parts(["A", "B"], [(0, 1, "x")]), 2, 4);
        let b = nspdk_features(&LabeledGraph::from_parts(["A", "A"], [(0, 1, "x")]), 2, 4);
        let k = nspdk_kernel(&a, &b);
        assert!((0.0..1.0).contains(&k), "{k}");
    }

    #[test]
    fn radius_zero_distance_zero_counts_nodes() {
        let g = LabeledGraph::from_parts(["A", "B", "A"], [(0, 1, "x"), (1, 2, "y")]);
        let f = nspdk_features(&g, 0, 0);
        assert_eq!(f.counts.values().sum::<f64>(), 3.0);
        assert_eq!(f.counts.len(), 2);
    }
}
