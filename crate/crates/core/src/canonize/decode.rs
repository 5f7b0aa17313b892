use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::graph::{max_connected_component, LabeledGraph};

use super::DfsCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeMode {
    /// Reject anything that is not a well-formed DFS code.
    Strict,
    /// Best-effort repair of arbitrary tuple sequences (model output).
    Lenient,
}

/// Rebuilds a graph from a DFS code.
///
/// Lenient decoding treats timestamps as node ids, keeps the first label
/// seen for each node, drops self-loops and repeated edges, and returns the
/// largest connected component.
pub fn decode(code: &DfsCode, mode: DecodeMode) -> Result<LabeledGraph> {
    match mode {
        DecodeMode::Strict => decode_strict(code),
        DecodeMode::Lenient => Ok(decode_lenient(code)),
    }
}

fn decode_strict(code: &DfsCode) -> Result<LabeledGraph> {
    let mut g = LabeledGraph::new();
    let mut path: Vec<usize> = Vec::new();
    let mut edges: HashSet<(usize, usize)> = HashSet::new();
    let bad = |index: usize, reason: String| Error::InvalidCode { index, reason };

    for (i, t) in code.tuples.iter().enumerate() {
        let (a, b) = (t.src_time, t.dst_time);
        if a == b {
            return Err(bad(i, format!("self-loop on timestamp {a}")));
        }
        if i == 0 {
            if (a, b) != (0, 1) {
                return Err(bad(i, format!("first tuple must be (0, 1), got ({a}, {b})")));
            }
            g.add_node(t.src_label.clone());
            g.add_node(t.dst_label.clone());
            g.add_edge(0, 1, t.edge_label.clone());
            edges.insert((0, 1));
            path = vec![0, 1];
            continue;
        }
        if a >= g.node_count() {
            return Err(bad(i, format!("source timestamp {a} not yet discovered")));
        }
        if g.label(a) != t.src_label {
            return Err(bad(i, format!("label {:?} conflicts with {:?} at timestamp {a}", t.src_label, g.label(a))));
        }
        if t.is_forward() {
            if b != g.node_count() {
                return Err(bad(i, format!("forward edge must discover timestamp {}, got {b}", g.node_count())));
            }
            let Some(pos) = path.iter().position(|&x| x == a) else {
                return Err(bad(i, format!("forward edge source {a} is off the rightmost path")));
            };
            g.add_node(t.dst_label.clone());
            g.add_edge(a, b, t.edge_label.clone());
            edges.insert((a, b));
            path.truncate(pos + 1);
            path.push(b);
        } else {
            if path.last() != Some(&a) {
                return Err(bad(i, format!("backward edge must leave the rightmost node, got {a}")));
            }
            if !path.contains(&b) {
                return Err(bad(i, format!("backward edge target {b} is off the rightmost path")));
            }
            if g.label(b) != t.dst_label {
                return Err(bad(i, format!("label {:?} conflicts with {:?} at timestamp {b}", t.dst_label, g.label(b))));
            }
            if !edges.insert((b, a)) {
                return Err(bad(i, format!("edge ({a}, {b}) repeated")));
            }
            let prev = &code.tuples[i - 1];
            if prev.is_backward() && prev.src_time == a && prev.dst_time > b {
                return Err(bad(i, "backward edges out of one node must have increasing targets".into()));
            }
            g.add_edge(a, b, t.edge_label.clone());
        }
    }
    Ok(g)
}

fn decode_lenient(code: &DfsCode) -> LabeledGraph {
    let mut g = LabeledGraph::new();
    let mut ids: HashMap<usize, usize> = HashMap::new();
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    for t in &code.tuples {
        let u = *ids.entry(t.src_time).or_insert_with(|| g.add_node(t.src_label.clone()));
        let v = *ids.entry(t.dst_time).or_insert_with(|| g.add_node(t.dst_label.clone()));
        if u == v || !seen.insert((u.min(v), u.max(v))) {
            continue;
        }
        g.add_edge(u, v, t.edge_label.clone());
    }
    if g.node_count() == 0 {
        return g;
    }
    max_connected_component(&g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonize::{min_dfs_code, EdgeTuple};
    use crate::graph::is_isomorphic;

    fn t(a: usize, b: usize, x: &str, e: &str, y: &str) -> EdgeTuple {
        EdgeTuple::new(a, b, x, e, y)
    }

    fn example_code() -> DfsCode {
        DfsCode::new(vec![t(0, 1, "X", "a", "X"), t(1, 2, "X", "a", "Z"), t(2, 0, "Z", "b", "X"), t(1, 3, "X", "b", "Y")])
    }

    #[test]
    fn example_code_builds_figure_graph() {
        let g = decode(&example_code(), DecodeMode::Strict).unwrap();
        let fig = LabeledGraph::from_parts(["X", "X", "Z", "Y"], [(0, 1, "a"), (1, 2, "a"), (2, 0, "b"), (1, 3, "b")]);
        assert!(is_isomorphic(&g, &fig));
        assert_eq!(min_dfs_code(&g).unwrap(), example_code());
    }

    #[test]
    fn lenient_repairs() {
        let code = DfsCode::new(vec![t(0, 1, "A", "x", "A"), t(1, 1, "A", "x", "A"), t(0, 1, "A", "x", "A")]);
        let g = decode(&code, DecodeMode::Lenient).unwrap();
        assert_eq!(g, LabeledGraph::from_parts(["A", "A"], [(0, 1, "x")]));
        assert!(matches!(decode(&code, DecodeMode::Strict), Err(Error::InvalidCode { index: 1, .. })));
    }

    #[test]
    fn lenient_first_label_wins_and_keeps_largest_component() {
        let code = DfsCode::new(vec![
            t(0, 1, "A", "x", "B"),
            t(1, 2, "C", "y", "D"),
            t(5, 6, "E", "z", "F"),
        ]);
        let g = decode(&code, DecodeMode::Lenient).unwrap();
        assert_eq!(g.labels(), &["A".to_string(), "B".to_string(), "D".to_string()]);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn strict_errors_point_at_tuple() {
        let cases = [
            (vec![t(1, 2, "A", "x", "B")], 0),
            (vec![t(0, 1, "A", "x", "B"), t(1, 3, "B", "x", "C")], 1),
            (vec![t(0, 1, "A", "x", "B"), t(1, 2, "Q", "x", "C")], 1),
            (vec![t(0, 1, "A", "x", "B"), t(1, 0, "B", "x", "A")], 1),
            (vec![t(0, 1, "A", "x", "B"), t(1, 2, "B", "x", "C"), t(0, 3, "A", "x", "D"), t(2, 0, "C", "x", "A")], 3),
        ];
        for (tuples, index) in cases {
            match decode(&DfsCode::new(tuples), DecodeMode::Strict) {
                Err(Error::InvalidCode { index: i, .. }) => assert_eq!(i, index),
                other => panic!("expected InvalidCode at {index}, got {other:?}"),
            }
        }
    }

    #[test]
    fn empty_code() {
        assert_eq!(decode(&DfsCode::default(), DecodeMode::Strict).unwrap().node_count(), 0);
        assert_eq!(decode(&DfsCode::default(), DecodeMode::Lenient).unwrap().node_count(), 0);
    }
}
