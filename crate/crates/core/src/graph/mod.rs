//! Undirected graphs with string node and edge labels.

mod invariants;
mod matching;

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

pub use invariants::{augment_labels, clustering_coefficient, strip_augmentation, InvariantSpec};
pub use matching::{is_isomorphic, subgraph_isomorphic, subgraph_isomorphic_with_budget, MatchOutcome};

/// Edge label used for datasets whose edges carry no label.
pub const UNLABELED: &str = "";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub label: String,
}

/// Undirected labeled graph over dense node ids `0..n`.
///
/// Edges are stored once, in insertion order. The graph may temporarily hold
/// invalid content (self-loops, parallel edges, dangling endpoints) so that
/// [`validate_graph`] can report it; adjacency lists only index edges whose
/// endpoints exist.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledGraph {
    node_labels: Vec<String>,
    edges: Vec<Edge>,
    #[serde(skip)]
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl LabeledGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_parts<S: Into<String>>(
        labels: impl IntoIterator<Item = S>,
        edges: impl IntoIterator<Item = (usize, usize, S)>,
    ) -> Self {
        let mut g = Self::new();
        for label in labels {
            g.add_node(label);
        }
        for (u, v, label) in edges {
            g.add_edge(u, v, label);
        }
        g
    }

    pub fn add_node(&mut self, label: impl Into<String>) -> usize {
        self.node_labels.push(label.into());
        self.adjacency.push(Vec::new());
        self.node_labels.len() - 1
    }

    /// Appends an edge. Out-of-range endpoints are kept in the edge list but
    /// not indexed in the adjacency.
    pub fn add_edge(&mut self, u: usize, v: usize, label: impl Into<String>) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { u, v, label: label.into() });
        let n = self.node_labels.len();
        if u < n && v < n {
            self.adjacency[u].push((v, id));
            if u != v {
                self.adjacency[v].push((u, id));
            }
        }
        id
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.node_labels.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn label(&self, v: usize) -> &str {
        &self.node_labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.node_labels
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    /// `(neighbor, edge id)` pairs of `v`.
    #[inline]
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn edge_between(&self, u: usize, v: usize) -> Option<&Edge> {
        self.adjacency
            .get(u)?
            .iter()
            .find(|&&(w, _)| w == v)
            .map(|&(_, e)| &self.edges[e])
    }

    pub fn set_label(&mut self, v: usize, label: impl Into<String>) {
        self.node_labels[v] = label.into();
    }

    /// Rebuilds adjacency lists; needed after deserialization.
    pub fn reindex(&mut self) {
        let n = self.node_labels.len();
        self.adjacency = vec![Vec::new(); n];
        for (id, e) in self.edges.iter().enumerate() {
            if e.u < n && e.v < n {
                self.adjacency[e.u].push((e.v, id));
                if e.u != e.v {
                    self.adjacency[e.v].push((e.u, id));
                }
            }
        }
    }

    /// Returns the graph with node `v` renamed to `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> LabeledGraph {
        assert_eq!(perm.len(), self.node_count(), "permutation length");
        let mut labels = vec![String::new(); perm.len()];
        for (v, &p) in perm.iter().enumerate() {
            labels[p] = self.node_labels[v].clone();
        }
        let mut g = LabeledGraph::new();
        for l in labels {
            g.add_node(l);
        }
        for e in &self.edges {
            g.add_edge(perm[e.u], perm[e.v], e.label.clone());
        }
        g
    }

    /// Subgraph spanned by `edge_ids`; nodes are renumbered by first
    /// appearance in `seed_nodes` followed by the edges' endpoints.
    pub fn edge_subgraph(&self, seed_nodes: &[usize], edge_ids: &[usize]) -> LabeledGraph {
        let mut map = vec![usize::MAX; self.node_count()];
        let mut g = LabeledGraph::new();
        let mut touch = |v: usize, g: &mut LabeledGraph| {
            if map[v] == usize::MAX {
                map[v] = g.add_node(self.node_labels[v].clone());
            }
            map[v]
        };
        for &v in seed_nodes {
            touch(v, &mut g);
        }
        for &id in edge_ids {
            let e = &self.edges[id];
            let u = touch(e.u, &mut g);
            let v = touch(e.v, &mut g);
            g.add_edge(u, v, e.label.clone());
        }
        g
    }

    /// Connected components as sorted node lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for &(w, _) in &self.adjacency[v] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Induced subgraph on `nodes` (kept in the given order).
    pub fn induced(&self, nodes: &[usize]) -> LabeledGraph {
        let mut map = vec![usize::MAX; self.node_count()];
        let mut g = LabeledGraph::new();
        for &v in nodes {
            map[v] = g.add_node(self.node_labels[v].clone());
        }
        for e in &self.edges {
            if e.u < map.len() && e.v < map.len() && map[e.u] != usize::MAX && map[e.v] != usize::MAX {
                g.add_edge(map[e.u], map[e.v], e.label.clone());
            }
        }
        g
    }

    pub fn node_label_counts(&self) -> BTreeMap<&str, usize> {
        let mut m = BTreeMap::new();
        for l in &self.node_labels {
            *m.entry(l.as_str()).or_default() += 1;
        }
        m
    }

    pub fn edge_label_counts(&self) -> BTreeMap<&str, usize> {
        let mut m = BTreeMap::new();
        for e in &self.edges {
            *m.entry(e.label.as_str()).or_default() += 1;
        }
        m
    }

    pub fn is_valid(&self) -> bool {
        validate_graph(self).is_ok()
    }
}

/// A single structural constraint violation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    SelfLoop { edge: usize, node: usize },
    ParallelEdge { edge: usize, u: usize, v: usize },
    DanglingEndpoint { edge: usize, node: usize },
    Disconnected { components: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SelfLoop { edge, node } => write!(f, "self-loop: edge {edge} on node {node}"),
            Violation::ParallelEdge { edge, u, v } => write!(f, "parallel edge: edge {edge} duplicates ({u},{v})"),
            Violation::DanglingEndpoint { edge, node } => {
                write!(f, "dangling endpoint: edge {edge} references missing node {node}")
            }
            Violation::Disconnected { components } => write!(f, "disconnected: {components} components"),
        }
    }
}

impl Violation {
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::SelfLoop { .. } => "self-loop",
            Violation::ParallelEdge { .. } => "parallel edge",
            Violation::DanglingEndpoint { .. } => "dangling endpoint",
            Violation::Disconnected { .. } => "disconnected",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationResult {
    pub violations: Vec<Violation>,
}

impl ValidationResult {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the dataset constraints: no self-loops, no parallel edges, no
/// dangling endpoints, connected. The empty graph is considered valid.
pub fn validate_graph(g: &LabeledGraph) -> ValidationResult {
    let n = g.node_count();
    let mut violations = Vec::new();
    let mut seen = HashSet::new();
    for (id, e) in g.edges.iter().enumerate() {
        let mut dangling = false;
        for node in [e.u, e.v] {
            if node >= n {
                violations.push(Violation::DanglingEndpoint { edge: id, node });
                dangling = true;
            }
        }
        if dangling {
            continue;
        }
        if e.u == e.v {
            violations.push(Violation::SelfLoop { edge: id, node: e.u });
            continue;
        }
        if !seen.insert((e.u.min(e.v), e.u.max(e.v))) {
            violations.push(Violation::ParallelEdge { edge: id, u: e.u, v: e.v });
        }
    }
    if n > 0 {
        let components = g.components().len();
        if components > 1 {
            violations.push(Violation::Disconnected { components });
        }
    }
    ValidationResult { violations }
}

/// Largest connected component with node ids re-densified in original order.
///
/// Ties go to the component with more edges, then to the one holding the
/// smallest original node id.
pub fn max_connected_component(g: &LabeledGraph) -> LabeledGraph {
    let comps = g.components();
    let edge_counts: Vec<usize> = {
        let mut comp_of = vec![0usize; g.node_count()];
        for (c, nodes) in comps.iter().enumerate() {
            for &v in nodes {
                comp_of[v] = c;
            }
        }
        let mut counts = vec![0usize; comps.len()];
        for e in &g.edges {
            if e.u < comp_of.len() && e.v < comp_of.len() {
                counts[comp_of[e.u]] += 1;
            }
        }
        counts
    };
    // components() is ordered by smallest member, so the first maximum wins ties.
    let best = (0..comps.len())
        .max_by(|&a, &b| {
            (comps[a].len(), edge_counts[a])
                .cmp(&(comps[b].len(), edge_counts[b]))
                .then(b.cmp(&a))
        })
        .expect("graph has at least one node");
    g.induced(&comps[best])
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn triangle() -> LabeledGraph {
        LabeledGraph::from_parts(["A", "B", "C"], [(0, 1, "x"), (1, 2, "y"), (2, 0, "z")])
    }

    #[test]
    fn triangle_is_valid() {
        assert!(validate_graph(&triangle()).is_ok());
    }

    #[test]
    fn self_loop_reported() {
        let mut g = LabeledGraph::from_parts(["A", "A", "A", "A"], [(0, 1, "x"), (1, 2, "x"), (2, 3, "x")]);
        g.add_edge(3, 3, "x");
        let r = validate_graph(&g);
        assert_eq!(r.violations, vec![Violation::SelfLoop { edge: 3, node: 3 }]);
        assert_eq!(r.violations[0].kind(), "self-loop");
    }

    #[test]
    fn disjoint_edges_disconnected() {
        let g = LabeledGraph::from_parts(["A", "B", "C", "D"], [(0, 1, "x"), (2, 3, "x")]);
        let r = validate_graph(&g);
        assert_eq!(r.violations, vec![Violation::Disconnected { components: 2 }]);
    }

    #[test]
    fn parallel_and_dangling() {
        let mut g = LabeledGraph::from_parts(["A", "B"], [(0, 1, "x"), (1, 0, "y")]);
        g.add_edge(1, 7, "x");
        let kinds: Vec<_> = validate_graph(&g).violations.iter().map(Violation::kind).collect();
        assert_eq!(kinds, vec!["parallel edge", "dangling endpoint"]);
    }

    #[test]
    fn mcc_identity_on_connected() {
        let g = triangle();
        assert_eq!(max_connected_component(&g), g);
    }

    #[test]
    fn mcc_picks_largest() {
        // 5-node path on 0..5 and a 3-node path on 5..8
        let g = LabeledGraph::from_parts(
            ["A", "A", "A", "A", "A", "B", "B", "B"],
            [(0, 1, "x"), (1, 2, "x"), (2, 3, "x"), (3, 4, "x"), (5, 6, "y"), (6, 7, "y")],
        );
        let m = max_connected_component(&g);
        assert_eq!(m.node_count(), 5);
        assert!(m.labels().iter().all(|l| l == "A"));
    }

    #[test]
    fn mcc_tie_breaks_on_edges_then_min_id() {
        // path (2 edges) on 0..3, triangle (3 edges) on 3..6
        let g = LabeledGraph::from_parts(
            ["P", "P", "P", "T", "T", "T"],
            [(0, 1, "x"), (1, 2, "x"), (3, 4, "x"), (4, 5, "x"), (5, 3, "x")],
        );
        let m = max_connected_component(&g);
        assert_eq!(m.edge_count(), 3);
        assert!(m.labels().iter().all(|l| l == "T"));

        // two identical paths: the one containing node 0 wins
        let g = LabeledGraph::from_parts(["Q", "Q", "R", "R"], [(2, 3, "x"), (0, 1, "x")]);
        let m = max_connected_component(&g);
        assert_eq!(m.labels(), &["Q".to_string(), "Q".to_string()]);
    }

    #[test]
    fn permuted_preserves_counts() {
        let g = triangle();
        let p = g.permuted(&[2, 0, 1]);
        assert_eq!(p.label(2), "A");
        assert_eq!(p.edge_between(2, 0).unwrap().label, "x");
    }
}
