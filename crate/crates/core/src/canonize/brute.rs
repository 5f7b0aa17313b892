//! Exhaustive enumeration of DFS traversals. Exponential; a test oracle for
//! the frontier search.

use crate::error::{Error, Result};
use crate::graph::{validate_graph, LabeledGraph};

use super::{DfsCode, EdgeTuple};

pub const BRUTE_FORCE_NODE_CAP: usize = 8;

pub fn brute_force_min_dfs_code(g: &LabeledGraph) -> Result<DfsCode> {
    brute_force_min_dfs_code_with_cap(g, BRUTE_FORCE_NODE_CAP)
}

/// Enumerates every complete DFS traversal (every start node, every order of
/// visiting unvisited neighbors) and returns the smallest resulting code.
pub fn brute_force_min_dfs_code_with_cap(g: &LabeledGraph, cap: usize) -> Result<DfsCode> {
    if g.node_count() > cap {
        return Err(Error::CapExceeded { nodes: g.node_count(), cap });
    }
    let v = validate_graph(g);
    if !v.is_ok() {
        return Err(Error::InvalidGraph(v.violations));
    }
    if g.edge_count() == 0 {
        return Ok(DfsCode::default());
    }
    let mut best: Option<DfsCode> = None;
    for root in 0..g.node_count() {
        let mut walk = Walk {
            g,
            time: vec![None; g.node_count()],
            stack: vec![root],
            code: Vec::new(),
        };
        walk.time[root] = Some(0);
        walk.explore(&mut best);
    }
    Ok(best.expect("at least one traversal"))
}

#[derive(Clone)]
struct Walk<'a> {
    g: &'a LabeledGraph,
    time: Vec<Option<usize>>,
    stack: Vec<usize>,
    code: Vec<EdgeTuple>,
}

impl Walk<'_> {
    fn explore(&self, best: &mut Option<DfsCode>) {
        let mut stack = self.stack.clone();
        // backtrack to the deepest node that still has an unvisited neighbor
        while let Some(&top) = stack.last() {
            if self.g.neighbors(top).iter().any(|&(w, _)| self.time[w].is_none()) {
                break;
            }
            stack.pop();
        }
        let Some(&top) = stack.last() else {
            let code = DfsCode::new(self.code.clone());
            if code.len() == self.g.edge_count() && best.as_ref().is_none_or(|b| code < *b) {
                *best = Some(code);
            }
            return;
        };
        let visited = self.time.iter().flatten().count();
        for &(w, e) in self.g.neighbors(top) {
            if self.time[w].is_some() {
                continue;
            }
            let mut next = self.clone();
            next.stack = stack.clone();
            next.time[w] = Some(visited);
            let t_top = self.time[top].expect("visited");
            next.code.push(EdgeTuple::new(
                t_top,
                visited,
                self.g.label(top),
                self.g.edge(e).label.clone(),
                self.g.label(w),
            ));
            // edges from the new node back to earlier nodes, oldest target first
            let mut back: Vec<(usize, usize)> = self
                .g
                .neighbors(w)
                .iter()
                .filter(|&&(x, _)| x != top)
                .filter_map(|&(x, f)| next.time[x].map(|tx| (tx, f)))
                .collect();
            back.sort_unstable();
            for (tx, f) in back {
                let x = next.time.iter().position(|&t| t == Some(tx)).expect("timestamp owner");
                next.code.push(EdgeTuple::new(
                    visited,
                    tx,
                    self.g.label(w),
                    self.g.edge(f).label.clone(),
                    self.g.label(x),
                ));
            }
            next.stack.push(w);
            next.explore(best);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge() {
        let g = LabeledGraph::from_parts(["A", "B"], [(0, 1, "x")]);
        assert_eq!(brute_force_min_dfs_code(&g).unwrap().tuples, vec![EdgeTuple::new(0, 1, "A", "x", "B")]);
    }

    #[test]
    fn figure_graph() {
        let g = LabeledGraph::from_parts(["X", "X", "Z", "Y"], [(0, 1, "a"), (1, 2, "a"), (2, 0, "b"), (1, 3, "b")]);
        let code = brute_force_min_dfs_code(&g).unwrap();
        assert_eq!(code.to_string(), "0 1 X a X\n1 2 X a Z\n2 0 Z b X\n1 3 X b Y\n");
    }

    #[test]
    fn cap() {
        let g = LabeledGraph::from_parts(["A"; 9], (0..8).map(|i| (i, i + 1, "x")));
        assert!(matches!(brute_force_min_dfs_code(&g), Err(Error::CapExceeded { nodes: 9, cap: 8 })));
    }
}
