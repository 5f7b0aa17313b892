use serde::{Deserialize, Serialize};

use super::LabeledGraph;

/// Which vertex invariants are prepended to node labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct InvariantSpec {
    pub use_degree: bool,
    pub use_clustering_coefficient: bool,
    /// Decimal places kept when rendering the clustering coefficient.
    pub cc_decimals: usize,
}

impl InvariantSpec {
    pub fn degree() -> Self {
        InvariantSpec { use_degree: true, ..Default::default() }
    }

    pub fn is_empty(&self) -> bool {
        !self.use_degree && !self.use_clustering_coefficient
    }

    fn prefix_count(&self) -> usize {
        usize::from(self.use_degree) + usize::from(self.use_clustering_coefficient)
    }
}

const SEPARATOR: &str = ", ";

/// Local clustering coefficient; 0 for nodes of degree below 2.
pub fn clustering_coefficient(g: &LabeledGraph, v: usize) -> f64 {
    let nbrs = g.neighbors(v);
    let d = nbrs.len();
    if d < 2 {
        return 0.0;
    }
    let mut closed = 0usize;
    for (i, &(a, _)) in nbrs.iter().enumerate() {
        for &(b, _) in &nbrs[i + 1..] {
            if g.edge_between(a, b).is_some() {
                closed += 1;
            }
        }
    }
    2.0 * closed as f64 / (d * (d - 1)) as f64
}

/// Prefixes every node label with the enabled invariants, in the order
/// degree, clustering coefficient, original label, joined by `", "`.
pub fn augment_labels(g: &LabeledGraph, spec: &InvariantSpec) -> LabeledGraph {
    let mut out = g.clone();
    if spec.is_empty() {
        return out;
    }
    for v in 0..g.node_count() {
        let mut parts = Vec::with_capacity(3);
        if spec.use_degree {
            parts.push(g.degree(v).to_string());
        }
        if spec.use_clustering_coefficient {
            parts.push(format!("{:.*}", spec.cc_decimals, clustering_coefficient(g, v)));
        }
        parts.push(g.label(v).to_string());
        out.set_label(v, parts.join(SEPARATOR));
    }
    out
}

/// Inverse of [`augment_labels`] on a single label.
pub fn strip_augmentation<'a>(label: &'a str, spec: &InvariantSpec) -> &'a str {
    let k = spec.prefix_count();
    if k == 0 {
        return label;
    }
    label.splitn(k + 1, SEPARATOR).nth(k).unwrap_or(label)
}
