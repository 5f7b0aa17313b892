//! One-hot vocabularies for the five tuple components.
//!
//! Each component gets its own block: timestamps `0..=max_nodes`, node
//! labels and edge labels in sorted order, and one extra trailing index per
//! block reserved for end-of-sequence.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::canonize::{DfsCode, EdgeTuple};
use crate::error::{Error, Result};
use crate::graph::LabeledGraph;

/// Component order inside an encoded step.
pub const COMPONENTS: [&str; 5] = ["src_time", "dst_time", "src_label", "edge_label", "dst_label"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "VocabFields")]
pub struct VocabSpec {
    /// Largest node count over the training graphs.
    pub max_nodes: usize,
    pub node_labels: Vec<String>,
    pub edge_labels: Vec<String>,
    #[serde(skip)]
    node_index: BTreeMap<String, usize>,
    #[serde(skip)]
    edge_index: BTreeMap<String, usize>,
}

#[derive(Deserialize)]
struct VocabFields {
    max_nodes: usize,
    node_labels: Vec<String>,
    edge_labels: Vec<String>,
}

impl From<VocabFields> for VocabSpec {
    fn from(f: VocabFields) -> Self {
        VocabSpec::new(f.max_nodes, f.node_labels, f.edge_labels)
    }
}

/// Component indices of one step; index `dim - 1` of a block is its EOS.
pub type Step = [usize; 5];

impl VocabSpec {
    pub fn new(max_nodes: usize, node_labels: Vec<String>, edge_labels: Vec<String>) -> Self {
        let mut node_labels = node_labels;
        node_labels.sort();
        node_labels.dedup();
        let mut edge_labels = edge_labels;
        edge_labels.sort();
        edge_labels.dedup();
        let node_index = node_labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        let edge_index = edge_labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        VocabSpec { max_nodes, node_labels, edge_labels, node_index, edge_index }
    }

    pub fn dim_time(&self) -> usize {
        self.max_nodes + 1
    }

    pub fn dim_node_label(&self) -> usize {
        self.node_labels.len() + 1
    }

    pub fn dim_edge_label(&self) -> usize {
        self.edge_labels.len() + 1
    }

    /// Block sizes in component order.
    pub fn dims(&self) -> [usize; 5] {
        let (t, n, e) = (self.dim_time(), self.dim_node_label(), self.dim_edge_label());
        [t, t, n, e, n]
    }

    /// Width of a concatenated one-hot step.
    pub fn k(&self) -> usize {
        self.dims().iter().sum()
    }

    /// Start offset of each block in the concatenated vector.
    pub fn offsets(&self) -> [usize; 5] {
        let d = self.dims();
        let mut o = [0; 5];
        for c in 1..5 {
            o[c] = o[c - 1] + d[c - 1];
        }
        o
    }

    pub fn eos(&self) -> Step {
        self.dims().map(|d| d - 1)
    }

    pub fn node_label_index(&self, label: &str) -> Option<usize> {
        self.node_index.get(label).copied()
    }

    pub fn edge_label_index(&self, label: &str) -> Option<usize> {
        self.edge_index.get(label).copied()
    }

    pub fn encode_tuple(&self, t: &EdgeTuple) -> Result<Step> {
        let time = |x: usize| {
            if x < self.dim_time() - 1 {
                Ok(x)
            } else {
                Err(Error::OutOfVocab(format!("timestamp {x} (max {})", self.dim_time() - 2)))
            }
        };
        let node = |l: &str| self.node_label_index(l).ok_or_else(|| Error::OutOfVocab(format!("node label {l:?}")));
        let edge = self
            .edge_label_index(&t.edge_label)
            .ok_or_else(|| Error::OutOfVocab(format!("edge label {:?}", t.edge_label)))?;
        Ok([time(t.src_time)?, time(t.dst_time)?, node(&t.src_label)?, edge, node(&t.dst_label)?])
    }

    /// Dense concatenated one-hot vector of a step.
    pub fn one_hot(&self, step: &Step) -> Vec<f64> {
        let mut v = vec![0.0; self.k()];
        for (o, i) in self.offsets().iter().zip(step) {
            v[o + i] = 1.0;
        }
        v
    }
}

/// Sizes the vocabulary from the training graphs.
pub fn build_vocab(dataset: &[LabeledGraph]) -> Result<VocabSpec> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset("vocabulary needs at least one graph"));
    }
    let max_nodes = dataset.iter().map(LabeledGraph::node_count).max().unwrap_or(0);
    let nodes: BTreeSet<&str> = dataset.iter().flat_map(|g| g.labels().iter().map(String::as_str)).collect();
    let edges: BTreeSet<&str> = dataset.iter().flat_map(|g| g.edges().iter().map(|e| e.label.as_str())).collect();
    Ok(VocabSpec::new(
        max_nodes,
        nodes.into_iter().map(str::to_string).collect(),
        edges.into_iter().map(str::to_string).collect(),
    ))
}

/// Steps of one DFS code followed by the all-EOS terminal step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedSequence {
    pub steps: Vec<Step>,
}

impl EncodedSequence {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

pub fn encode_sequence(code: &DfsCode, vocab: &VocabSpec) -> Result<EncodedSequence> {
    let mut steps = code.tuples.iter().map(|t| vocab.encode_tuple(t)).collect::<Result<Vec<_>>>()?;
    steps.push(vocab.eos());
    Ok(EncodedSequence { steps })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodedStep {
    Tuple(EdgeTuple),
    Eos,
}

/// Maps sampled component indices back to a tuple. Any component landing on
/// its EOS index ends the sequence.
pub fn decode_step(samples: &Step, vocab: &VocabSpec) -> Result<DecodedStep> {
    let dims = vocab.dims();
    for (&i, &d) in samples.iter().zip(&dims) {
        if i >= d {
            return Err(Error::IndexOutOfRange { index: i, dim: d });
        }
    }
    if samples.iter().zip(&dims).any(|(&i, &d)| i == d - 1) {
        return Ok(DecodedStep::Eos);
    }
    Ok(DecodedStep::Tuple(EdgeTuple::new(
        samples[0],
        samples[1],
        vocab.node_labels[samples[2]].clone(),
        vocab.edge_labels[samples[3]].clone(),
        vocab.node_labels[samples[4]].clone(),
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_edge() -> LabeledGraph {
        LabeledGraph::from_parts(["A", "B"], [(0, 1, "x")])
    }

    #[test]
    fn sizes_from_single_edge() {
        let v = build_vocab(&[single_edge()]).unwrap();
        assert_eq!((v.dim_time(), v.dim_node_label(), v.dim_edge_label()), (3, 3, 2));
        assert_eq!(v.k(), 2 * 3 + 2 * 3 + 2);
    }

    #[test]
    fn sizes_from_triangles() {
        let tri = LabeledGraph::from_parts(["P", "P", "P"], [(0, 1, "q"), (1, 2, "q"), (2, 0, "q")]);
        let v = build_vocab(&[tri.clone(), tri]).unwrap();
        assert_eq!((v.dim_time(), v.dim_node_label(), v.dim_edge_label()), (4, 2, 2));
    }

    #[test]
    fn lung_like_sizes() {
        // 50 nodes max, 11 node labels, 3 edge labels
        let mut big = LabeledGraph::new();
        for i in 0..50 {
            big.add_node(format!("n{}", i % 11));
            if i > 0 {
                big.add_edge(i - 1, i, format!("e{}", i % 3));
            }
        }
        let v = build_vocab(&[big]).unwrap();
        assert_eq!((v.dim_time(), v.dim_node_label(), v.dim_edge_label()), (51, 12, 4));
    }

    #[test]
    fn json_round_trip_keeps_lookups() {
        let v = build_vocab(&[single_edge()]).unwrap();
        let back: VocabSpec = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
        assert_eq!(back, v);
        assert_eq!(back.node_label_index("B"), Some(1));
    }

    #[test]
    fn empty_dataset() {
        assert!(matches!(build_vocab(&[]), Err(Error::EmptyDataset(_))));
    }

    #[test]
    fn encode_single_edge() {
        let v = build_vocab(&[single_edge()]).unwrap();
        let code = DfsCode::new(vec![EdgeTuple::new(0, 1, "A", "x", "B")]);
        let enc = encode_sequence(&code, &v).unwrap();
        assert_eq!(enc.steps, vec![[0, 1, 0, 0, 1], [2, 2, 2, 1, 2]]);
        // offsets 0, 3, 6, 9, 11
        let dense = v.one_hot(&enc.steps[0]);
        let ones: Vec<usize> = dense.iter().enumerate().filter(|(_, &x)| x == 1.0).map(|(i, _)| i).collect();
        assert_eq!(ones, vec![0, 4, 6, 9, 12]);
        assert_eq!(encode_sequence(&DfsCode::default(), &v).unwrap().steps, vec![v.eos()]);
    }

    #[test]
    fn timestamp_bound() {
        let v = build_vocab(&[single_edge()]).unwrap();
        let code = DfsCode::new(vec![EdgeTuple::new(0, 2, "A", "x", "B")]);
        assert!(matches!(encode_sequence(&code, &v), Err(Error::OutOfVocab(_))));
    }

    #[test]
    fn decode_steps() {
        let v = build_vocab(&[single_edge()]).unwrap();
        assert_eq!(decode_step(&v.eos(), &v).unwrap(), DecodedStep::Eos);
        assert_eq!(
            decode_step(&[0, 1, 0, 0, 1], &v).unwrap(),
            DecodedStep::Tuple(EdgeTuple::new(0, 1, "A", "x", "B"))
        );
        assert_eq!(decode_step(&[0, 1, 0, 1, 1], &v).unwrap(), DecodedStep::Eos);
        assert!(matches!(decode_step(&[0, 9, 0, 0, 0], &v), Err(Error::IndexOutOfRange { index: 9, dim: 3 })));
    }
}
