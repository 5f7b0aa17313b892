use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::graph::{clustering_coefficient, LabeledGraph};

/// Number of uniform bins on [0, 1] for clustering coefficients.
pub const CLUSTERING_BINS: usize = 100;

/// A normalized histogram. Ordered histograms live on a 1-D grid with a
/// fixed bin width; categorical ones are keyed by label strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Histogram {
    Binned { width: f64, mass: Vec<f64> },
    Categorical(BTreeMap<String, f64>),
}

impl Histogram {
    pub fn total(&self) -> f64 {
        match self {
            Histogram::Binned { mass, .. } => mass.iter().sum(),
            Histogram::Categorical(m) => m.values().sum(),
        }
    }

    /// Mass of bin `i` (ordered) or key `k` (categorical).
    pub fn bin(&self, i: usize) -> f64 {
        match self {
            Histogram::Binned { mass, .. } => mass.get(i).copied().unwrap_or(0.0),
            Histogram::Categorical(_) => 0.0,
        }
    }

    pub fn get(&self, key: &str) -> f64 {
        match self {
            Histogram::Categorical(m) => m.get(key).copied().unwrap_or(0.0),
            Histogram::Binned { .. } => 0.0,
        }
    }
}

fn normalized(counts: Vec<f64>) -> Vec<f64> {
    let total: f64 = counts.iter().sum();
    if total == 0.0 {
        return counts;
    }
    counts.into_iter().map(|c| c / total).collect()
}

fn categorical<I: IntoIterator<Item = String>>(keys: I) -> Histogram {
    let mut m: BTreeMap<String, f64> = BTreeMap::new();
    let mut n = 0usize;
    for k in keys {
        *m.entry(k).or_default() += 1.0;
        n += 1;
    }
    if n > 0 {
        m.values_mut().for_each(|v| *v /= n as f64);
    }
    Histogram::Categorical(m)
}

/// Degree distribution over `0..=max degree`.
pub fn degree_histogram(g: &LabeledGraph) -> Histogram {
    let n = g.node_count();
    let max = (0..n).map(|v| g.degree(v)).max().unwrap_or(0);
    let mut counts = vec![0.0; if n == 0 { 0 } else { max + 1 }];
    for v in 0..n {
        counts[g.degree(v)] += 1.0;
    }
    Histogram::Binned { width: 1.0, mass: normalized(counts) }
}

/// Local clustering coefficients in 100 uniform bins; 1.0 falls in the last.
pub fn clustering_histogram(g: &LabeledGraph) -> Histogram {
    let mut counts = vec![0.0; CLUSTERING_BINS];
    for v in 0..g.node_count() {
        let c = clustering_coefficient(g, v);
        let bin = ((c * CLUSTERING_BINS as f64) as usize).min(CLUSTERING_BINS - 1);
        counts[bin] += 1.0;
    }
    Histogram::Binned { width: 1.0 / CLUSTERING_BINS as f64, mass: normalized(counts) }
}

pub fn node_label_histogram(g: &LabeledGraph) -> Histogram {
    categorical(g.labels().iter().cloned())
}

pub fn edge_label_histogram(g: &LabeledGraph) -> Histogram {
    categorical(g.edges().iter().map(|e| e.label.clone()))
}

/// Joint distribution of (node label, degree); keys are `label<TAB>degree`
/// (labels never contain whitespace).
pub fn joint_label_degree_histogram(g: &LabeledGraph) -> Histogram {
    categorical((0..g.node_count()).map(|v| format!("{}\t{}", g.label(v), g.degree(v))))
}
