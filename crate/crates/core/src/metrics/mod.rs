//! Distribution distances and redundancy checks between generated and
//! reference graph sets.

mod histogram;
mod mmd;
mod nspdk;
mod orbit;
mod redundancy;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::LabeledGraph;

pub use histogram::{
    clustering_histogram, degree_histogram, edge_label_histogram, joint_label_degree_histogram, node_label_histogram,
    Histogram, CLUSTERING_BINS,
};
pub use mmd::{emd_1d, kernel_value, mmd, total_variation, Descriptor, DescriptorKind, Kernel};
pub use nspdk::{nspdk_features, nspdk_kernel, NspdkFeatureVector, DEFAULT_DISTANCE, DEFAULT_RADIUS};
pub use orbit::{mean_orbit_vector, orbit_counts, OrbitVector, FIRST_ORBIT, ORBIT_COUNT};
pub use redundancy::{novelty, novelty_with_budget, uniqueness, uniqueness_with_budget, DEFAULT_ISO_BUDGET};

/// Descriptor kinds in report order.
pub const MMD_KINDS: [DescriptorKind; 7] = [
    DescriptorKind::Degree,
    DescriptorKind::Clustering,
    DescriptorKind::Orbit,
    DescriptorKind::Nspdk,
    DescriptorKind::NodeLabel,
    DescriptorKind::EdgeLabel,
    DescriptorKind::JointLabelDegree,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub runs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Bandwidth of the Gaussian kernels.
    pub sigma: f64,
    pub nspdk_radius: usize,
    pub nspdk_distance: usize,
    pub iso_budget: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            runs: 10,
            batch_size: 256,
            seed: 0,
            sigma: 1.0,
            nspdk_radius: DEFAULT_RADIUS,
            nspdk_distance: DEFAULT_DISTANCE,
            iso_budget: DEFAULT_ISO_BUDGET,
        }
    }
}

pub fn describe(g: &LabeledGraph, kind: DescriptorKind, cfg: &EvalConfig) -> Descriptor {
    match kind {
        DescriptorKind::Degree => Descriptor::Degree(degree_histogram(g)),
        DescriptorKind::Clustering => Descriptor::Clustering(clustering_histogram(g)),
        DescriptorKind::Orbit => Descriptor::Orbit(mean_orbit_vector(g)),
        DescriptorKind::NodeLabel => Descriptor::NodeLabel(node_label_histogram(g)),
        DescriptorKind::EdgeLabel => Descriptor::EdgeLabel(edge_label_histogram(g)),
        DescriptorKind::JointLabelDegree => Descriptor::JointLabelDegree(joint_label_degree_histogram(g)),
        DescriptorKind::Nspdk => Descriptor::Nspdk(nspdk_features(g, cfg.nspdk_radius, cfg.nspdk_distance)),
    }
}

pub fn describe_all(graphs: &[LabeledGraph], kind: DescriptorKind, cfg: &EvalConfig) -> Vec<Descriptor> {
    graphs.par_iter().map(|g| describe(g, kind, cfg)).collect()
}

/// MMD between two graph sets under the default kernel for `kind`.
pub fn graph_mmd(a: &[LabeledGraph], b: &[LabeledGraph], kind: DescriptorKind, cfg: &EvalConfig) -> Result<f64> {
    mmd(&describe_all(a, kind, cfg), &describe_all(b, kind, cfg), &Kernel::default_for(kind, cfg.sigma))
}

pub fn nspdk_mmd(generated: &[LabeledGraph], reference: &[LabeledGraph]) -> Result<f64> {
    graph_mmd(generated, reference, DescriptorKind::Nspdk, &EvalConfig::default())
}

/// Quality columns in report order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub degree_mmd: f64,
    pub clustering_mmd: f64,
    pub orbit_mmd: f64,
    pub nspdk_mmd: f64,
    pub avg_nodes_gen: f64,
    pub avg_nodes_ref: f64,
    pub avg_edges_gen: f64,
    pub avg_edges_ref: f64,
    pub node_label_mmd: f64,
    pub edge_label_mmd: f64,
    pub joint_label_degree_mmd: f64,
    pub novelty_pct: f64,
    pub uniqueness_pct: f64,
}

impl MetricReport {
    pub const CSV_HEADER: &'static str = "degree,clustering,orbit,nspdk,avg_nodes_gen,avg_nodes_ref,avg_edges_gen,avg_edges_ref,node_label,edge_label,joint_node_label_degree,novelty,uniqueness";

    pub fn values(&self) -> [f64; 13] {
        [
            self.degree_mmd,
            self.clustering_mmd,
            self.orbit_mmd,
            self.nspdk_mmd,
            self.avg_nodes_gen,
            self.avg_nodes_ref,
            self.avg_edges_gen,
            self.avg_edges_ref,
            self.node_label_mmd,
            self.edge_label_mmd,
            self.joint_label_degree_mmd,
            self.novelty_pct,
            self.uniqueness_pct,
        ]
    }

    /// Header line and one data row.
    pub fn to_csv(&self) -> String {
        let row: Vec<String> = self.values().iter().map(|v| v.to_string()).collect();
        format!("{}\n{}\n", Self::CSV_HEADER, row.join(","))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn mean_of(graphs: &[LabeledGraph], f: fn(&LabeledGraph) -> usize) -> f64 {
    graphs.iter().map(|g| f(g) as f64).sum::<f64>() / graphs.len() as f64
}

/// Batched comparison: each run draws `batch_size` graphs (without
/// replacement, or the whole set when smaller) from both sides and the
/// MMDs are averaged over runs. Sizes, novelty and uniqueness use the full
/// sets.
pub fn evaluate(
    generated: &[LabeledGraph],
    reference: &[LabeledGraph],
    training: &[LabeledGraph],
    cfg: &EvalConfig,
) -> Result<MetricReport> {
    if generated.is_empty() || reference.is_empty() || training.is_empty() {
        return Err(Error::EmptyDataset("evaluation needs generated, reference and training graphs"));
    }
    if cfg.runs == 0 || cfg.batch_size == 0 {
        return Err(Error::Precondition("runs and batch size must be positive".into()));
    }
    let whole = generated.len() <= cfg.batch_size && reference.len() <= cfg.batch_size;
    let runs = if whole { 1 } else { cfg.runs };
    let draws: Vec<(Vec<usize>, Vec<usize>)> = (0..runs)
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(r as u64);
            let mut pick = |n: usize| -> Vec<usize> {
                if n <= cfg.batch_size {
                    (0..n).collect()
                } else {
                    let mut v = sample(&mut rng, n, cfg.batch_size).into_vec();
                    v.sort_unstable();
                    v
                }
            };
            let g = pick(generated.len());
            (g, pick(reference.len()))
        })
        .collect();

    let mut mmds = [0.0; 7];
    for (slot, &kind) in mmds.iter_mut().zip(&MMD_KINDS) {
        let gen = describe_all(generated, kind, cfg);
        let refs = describe_all(reference, kind, cfg);
        let kernel = Kernel::default_for(kind, cfg.sigma);
        let mut total = 0.0;
        for (gi, ri) in &draws {
            let a: Vec<&Descriptor> = gi.iter().map(|&i| &gen[i]).collect();
            let b: Vec<&Descriptor> = ri.iter().map(|&i| &refs[i]).collect();
            total += mmd::mmd_refs(&a, &b, &kernel)?;
        }
        *slot = total / runs as f64;
    }

    Ok(MetricReport {
        degree_mmd: mmds[0],
        clustering_mmd: mmds[1],
        orbit_mmd: mmds[2],
        nspdk_mmd: mmds[3],
        avg_nodes_gen: mean_of(generated, LabeledGraph::node_count),
        avg_nodes_ref: mean_of(reference, LabeledGraph::node_count),
        avg_edges_gen: mean_of(generated, LabeledGraph::edge_count),
        avg_edges_ref: mean_of(reference, LabeledGraph::edge_count),
        node_label_mmd: mmds[4],
        edge_label_mmd: mmds[5],
        joint_label_degree_mmd: mmds[6],
        novelty_pct: novelty_with_budget(generated, training, cfg.iso_budget)?,
        uniqueness_pct: uniqueness_with_budget(generated, cfg.iso_budget)?,
    })
}
