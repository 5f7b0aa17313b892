//! Frontier branch-and-bound search for the minimum DFS code.
//!
//! All partial traversals whose codes equal the best prefix found so far
//! are advanced together. At every position each traversal proposes its
//! smallest legal extension; only traversals achieving the overall minimum
//! survive. Since every traversal of a connected graph yields a code of
//! exactly |E| tuples, the greedy per-position minimum is the global
//! lexicographic minimum.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::graph::{validate_graph, LabeledGraph};

use super::{structural_order, DfsCode, EdgeTuple};

pub const DEFAULT_FRONTIER_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CanonizeOptions {
    /// Largest number of simultaneously tracked traversals before giving up.
    pub frontier_cap: usize,
}

impl Default for CanonizeOptions {
    fn default() -> Self {
        CanonizeOptions { frontier_cap: DEFAULT_FRONTIER_CAP }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Canonization {
    pub code: DfsCode,
    /// Total number of search states expanded (summed frontier sizes).
    pub expansions: u64,
    pub max_frontier: usize,
}

/// Minimum DFS code of a valid (connected, simple) graph.
pub fn min_dfs_code(g: &LabeledGraph) -> Result<DfsCode> {
    canonize(g, &CanonizeOptions::default()).map(|c| c.code)
}

/// Label ranks replace strings during the search; rank order equals string order.
struct Prepared {
    node_rank: Vec<u32>,
    /// `(neighbor, edge id, edge label rank)`
    adj: Vec<Vec<(usize, usize, u32)>>,
    node_names: Vec<String>,
    edge_names: Vec<String>,
}

fn rank_table<'a>(labels: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut names: Vec<String> = labels.map(str::to_string).collect();
    names.sort_unstable();
    names.dedup();
    names
}

fn rank_of(names: &[String], s: &str) -> u32 {
    names.binary_search_by(|n| n.as_str().cmp(s)).expect("label in table") as u32
}

impl Prepared {
    fn new(g: &LabeledGraph) -> Self {
        let node_names = rank_table(g.labels().iter().map(String::as_str));
        let edge_names = rank_table(g.edges().iter().map(|e| e.label.as_str()));
        let node_rank = g.labels().iter().map(|l| rank_of(&node_names, l)).collect();
        let adj = (0..g.node_count())
            .map(|v| {
                g.neighbors(v)
                    .iter()
                    .map(|&(w, e)| (w, e, rank_of(&edge_names, &g.edge(e).label)))
                    .collect()
            })
            .collect();
        Prepared { node_rank, adj, node_names, edge_names }
    }

    fn tuple(&self, t: &RankTuple) -> EdgeTuple {
        EdgeTuple::new(
            t.src_time,
            t.dst_time,
            self.node_names[t.src as usize].clone(),
            self.edge_names[t.edge as usize].clone(),
            self.node_names[t.dst as usize].clone(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct RankTuple {
    src_time: usize,
    dst_time: usize,
    src: u32,
    edge: u32,
    dst: u32,
}

impl RankTuple {
    fn cmp(&self, o: &RankTuple) -> Ordering {
        structural_order((self.src_time, self.dst_time), (o.src_time, o.dst_time))
            .then(self.src.cmp(&o.src))
            .then(self.edge.cmp(&o.edge))
            .then(self.dst.cmp(&o.dst))
    }
}

const UNVISITED: u32 = u32::MAX;

/// One partial traversal: the timestamp assignment and used edges.
#[derive(Debug, Clone)]
struct Embedding {
    node_of_time: Vec<u32>,
    time_of_node: Vec<u32>,
    used: Vec<u64>,
}

impl Embedding {
    fn start(n: usize, m: usize, u: usize, v: usize, edge: usize) -> Self {
        let mut e = Embedding {
            node_of_time: vec![u as u32, v as u32],
            time_of_node: vec![UNVISITED; n],
            used: vec![0; m.div_ceil(64)],
        };
        e.time_of_node[u] = 0;
        e.time_of_node[v] = 1;
        e.mark(edge);
        e
    }

    #[inline]
    fn is_used(&self, edge: usize) -> bool {
        self.used[edge / 64] >> (edge % 64) & 1 == 1
    }

    #[inline]
    fn mark(&mut self, edge: usize) {
        self.used[edge / 64] |= 1 << (edge % 64);
    }

    #[inline]
    fn node(&self, time: usize) -> usize {
        self.node_of_time[time] as usize
    }
}

/// Successor moves sharing one tuple: `(target node, edge id)`.
type Moves = Vec<(usize, usize)>;

/// Smallest legal extension of `emb`: the pending backward edge from the
/// rightmost node with the smallest target time, otherwise the smallest
/// forward edges out of the deepest rightmost-path node that still has
/// unvisited neighbors.
fn min_extension(p: &Prepared, emb: &Embedding, path: &[usize]) -> Option<(RankTuple, Moves)> {
    let rm_time = *path.last()?;
    let r = emb.node(rm_time);

    let mut back: Option<(u32, u32, usize, usize)> = None;
    for &(w, e, er) in &p.adj[r] {
        let tw = emb.time_of_node[w];
        if tw != UNVISITED && !emb.is_used(e) && back.is_none_or(|b| tw < b.0) {
            back = Some((tw, er, w, e));
        }
    }
    if let Some((tw, er, w, e)) = back {
        let t = RankTuple {
            src_time: rm_time,
            dst_time: tw as usize,
            src: p.node_rank[r],
            edge: er,
            dst: p.node_rank[w],
        };
        return Some((t, vec![(w, e)]));
    }

    let next_time = emb.node_of_time.len();
    for &src_time in path.iter().rev() {
        let v = emb.node(src_time);
        let mut best: Option<(u32, u32)> = None;
        let mut moves = Vec::new();
        for &(w, e, er) in &p.adj[v] {
            if emb.time_of_node[w] != UNVISITED {
                continue;
            }
            let key = (er, p.node_rank[w]);
            match best.map(|b| key.cmp(&b)) {
                None | Some(Ordering::Less) => {
                    best = Some(key);
                    moves.clear();
                    moves.push((w, e));
                }
                Some(Ordering::Equal) => moves.push((w, e)),
                Some(Ordering::Greater) => {}
            }
        }
        if let Some((er, wr)) = best {
            let t = RankTuple { src_time, dst_time: next_time, src: p.node_rank[v], edge: er, dst: wr };
            return Some((t, moves));
        }
    }
    None
}

fn apply(emb: &Embedding, t: &RankTuple, target: usize, edge: usize) -> Embedding {
    let mut next = emb.clone();
    next.mark(edge);
    if t.dst_time > t.src_time {
        next.time_of_node[target] = t.dst_time as u32;
        next.node_of_time.push(target as u32);
    }
    next
}

fn advance_path(path: &mut Vec<usize>, t: &RankTuple) {
    if t.dst_time > t.src_time {
        let pos = path.iter().position(|&x| x == t.src_time).expect("source on rightmost path");
        path.truncate(pos + 1);
        path.push(t.dst_time);
    }
}

/// Minimum DFS code with search statistics.
pub fn canonize(g: &LabeledGraph, opts: &CanonizeOptions) -> Result<Canonization> {
    let validation = validate_graph(g);
    if !validation.is_ok() {
        return Err(Error::InvalidGraph(validation.violations));
    }
    let m = g.edge_count();
    if m == 0 {
        return Ok(Canonization { code: DfsCode::default(), expansions: 0, max_frontier: 0 });
    }
    let p = Prepared::new(g);
    let n = g.node_count();

    let mut first: Option<RankTuple> = None;
    let mut frontier: Vec<Embedding> = Vec::new();
    for (id, e) in g.edges().iter().enumerate() {
        let er = p.adj[e.u].iter().find(|x| x.1 == id).expect("indexed edge").2;
        for (u, v) in [(e.u, e.v), (e.v, e.u)] {
            let t = RankTuple { src_time: 0, dst_time: 1, src: p.node_rank[u], edge: er, dst: p.node_rank[v] };
            match first.map(|f| t.cmp(&f)) {
                None | Some(Ordering::Less) => {
                    first = Some(t);
                    frontier.clear();
                    frontier.push(Embedding::start(n, m, u, v, id));
                }
                Some(Ordering::Equal) => frontier.push(Embedding::start(n, m, u, v, id)),
                Some(Ordering::Greater) => {}
            }
        }
    }
    let first = first.expect("graph has an edge");
    let mut code = vec![first];
    let mut path = vec![0usize, 1];
    let mut expansions = frontier.len() as u64;
    let mut max_frontier = frontier.len();

    while code.len() < m {
        let mut best: Option<RankTuple> = None;
        let mut next: Vec<Embedding> = Vec::new();
        for emb in &frontier {
            let Some((t, moves)) = min_extension(&p, emb, &path) else { continue };
            match best.map(|b| t.cmp(&b)) {
                Some(Ordering::Greater) => continue,
                Some(Ordering::Equal) => {}
                None | Some(Ordering::Less) => {
                    best = Some(t);
                    next.clear();
                }
            }
            for (w, e) in moves {
                next.push(apply(emb, &t, w, e));
            }
            if next.len() > opts.frontier_cap {
                return Err(Error::FrontierCapExceeded { cap: opts.frontier_cap });
            }
        }
        let Some(t) = best else {
            unreachable!("connected graph traversal ended after {} of {m} edges", code.len());
        };
        advance_path(&mut path, &t);
        code.push(t);
        expansions += next.len() as u64;
        max_frontier = max_frontier.max(next.len());
        frontier = next;
    }

    Ok(Canonization {
        code: DfsCode::new(code.iter().map(|t| p.tuple(t)).collect()),
        expansions,
        max_frontier,
    })
}

/// A partial DFS traversal of a specific graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchState {
    pub code: DfsCode,
    /// Discovery time of each graph node, if visited.
    pub time_of_node: Vec<Option<usize>>,
    /// Timestamps from the root to the most recently discovered node.
    pub rightmost_path: Vec<usize>,
    pub used_edges: Vec<bool>,
}

impl SearchState {
    pub fn empty(g: &LabeledGraph) -> Self {
        SearchState {
            code: DfsCode::default(),
            time_of_node: vec![None; g.node_count()],
            rightmost_path: Vec::new(),
            used_edges: vec![false; g.edge_count()],
        }
    }

    fn node_of_time(&self) -> Vec<usize> {
        let mut out = vec![usize::MAX; self.time_of_node.iter().flatten().count()];
        for (v, t) in self.time_of_node.iter().enumerate() {
            if let Some(t) = *t {
                out[t] = v;
            }
        }
        out
    }

    fn extend(&self, g: &LabeledGraph, src: usize, dst: usize, edge: usize) -> (EdgeTuple, SearchState) {
        let mut next = self.clone();
        let src_time = next.time_of_node[src].unwrap_or_else(|| {
            next.rightmost_path.push(0);
            0
        });
        next.time_of_node[src] = Some(src_time);
        let dst_time = match next.time_of_node[dst] {
            Some(t) => t,
            None => {
                let t = next.time_of_node.iter().flatten().count();
                next.time_of_node[dst] = Some(t);
                let pos = next.rightmost_path.iter().position(|&x| x == src_time).expect("source on path");
                next.rightmost_path.truncate(pos + 1);
                next.rightmost_path.push(t);
                t
            }
        };
        next.used_edges[edge] = true;
        let t = EdgeTuple::new(src_time, dst_time, g.label(src), g.edge(edge).label.clone(), g.label(dst));
        next.code.tuples.push(t.clone());
        (t, next)
    }
}

/// Every legal single-edge extension of `state`.
///
/// From the empty state these are both orientations of every edge. After
/// that the traversal is forced to emit pending backward edges of the
/// rightmost node in increasing target time; once none remain, the choices
/// are the edges from the deepest rightmost-path node that has unvisited
/// neighbors to each of those neighbors.
pub fn valid_extensions(state: &SearchState, g: &LabeledGraph) -> Vec<(EdgeTuple, SearchState)> {
    if state.code.is_empty() {
        return g
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, e)| e.u != e.v)
            .flat_map(|(id, e)| [(e.u, e.v, id), (e.v, e.u, id)])
            .map(|(u, v, id)| state.extend(g, u, v, id))
            .collect();
    }
    let node_of_time = state.node_of_time();
    let Some(&rm_time) = state.rightmost_path.last() else { return Vec::new() };
    let r = node_of_time[rm_time];

    let pending_back = g
        .neighbors(r)
        .iter()
        .filter(|&&(w, e)| !state.used_edges[e] && state.time_of_node[w].is_some())
        .min_by_key(|&&(w, _)| state.time_of_node[w]);
    if let Some(&(w, e)) = pending_back {
        return vec![state.extend(g, r, w, e)];
    }

    for &t in state.rightmost_path.iter().rev() {
        let v = node_of_time[t];
        let out: Vec<_> = g
            .neighbors(v)
            .iter()
            .filter(|&&(w, _)| state.time_of_node[w].is_none())
            .map(|&(w, e)| state.extend(g, v, w, e))
            .collect();
        if !out.is_empty() {
            return out;
        }
    }
    Vec::new()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn fig2a() -> LabeledGraph {
        LabeledGraph::from_parts(["X", "X", "Z", "Y"], [(0, 1, "a"), (1, 2, "a"), (2, 0, "b"), (1, 3, "b")])
    }

    fn t(a: usize, b: usize, x: &str, e: &str, y: &str) -> EdgeTuple {
        EdgeTuple::new(a, b, x, e, y)
    }

    #[test]
    fn figure_graph_minimum() {
        let code = min_dfs_code(&fig2a()).unwrap();
        assert_eq!(
            code.tuples,
            vec![t(0, 1, "X", "a", "X"), t(1, 2, "X", "a", "Z"), t(2, 0, "Z", "b", "X"), t(1, 3, "X", "b", "Y")]
        );
    }

    #[test]
    fn single_edge_orientation() {
        let g = LabeledGraph::from_parts(["B", "A"], [(0, 1, "x")]);
        assert_eq!(min_dfs_code(&g).unwrap().tuples, vec![t(0, 1, "A", "x", "B")]);
    }

    #[test]
    fn uniform_triangle() {
        let g = LabeledGraph::from_parts(["P", "P", "P"], [(0, 1, "q"), (1, 2, "q"), (2, 0, "q")]);
        let c = canonize(&g, &CanonizeOptions::default()).unwrap();
        assert_eq!(c.code.tuples, vec![t(0, 1, "P", "q", "P"), t(1, 2, "P", "q", "P"), t(2, 0, "P", "q", "P")]);
        assert_eq!(c.max_frontier, 6);
    }

    #[test]
    fn invalid_graph_rejected() {
        let g = LabeledGraph::from_parts(["A", "B", "C", "D"], [(0, 1, "x"), (2, 3, "x")]);
        assert!(matches!(min_dfs_code(&g), Err(Error::InvalidGraph(_))));
    }

    #[test]
    fn frontier_cap_enforced() {
        let mut edges = Vec::new();
        for i in 0..6 {
            for j in i + 1..6 {
                edges.push((i, j, "e"));
            }
        }
        let k6 = LabeledGraph::from_parts(["A"; 6], edges);
        let err = canonize(&k6, &CanonizeOptions { frontier_cap: 50 }).unwrap_err();
        assert!(matches!(err, Error::FrontierCapExceeded { cap: 50 }));
    }

    #[test]
    fn extensions_of_single_edge() {
        let g = LabeledGraph::from_parts(["A", "B"], [(0, 1, "x")]);
        let ext = valid_extensions(&SearchState::empty(&g), &g);
        let tuples: Vec<_> = ext.iter().map(|(t, _)| t.clone()).collect();
        assert_eq!(tuples, vec![t(0, 1, "A", "x", "B"), t(0, 1, "B", "x", "A")]);
        assert!(valid_extensions(&ext[0].1, &g).is_empty());
    }

    #[test]
    fn extensions_include_figure_backward_edge() {
        let g = fig2a();
        let mut state = SearchState::empty(&g);
        for want in [t(0, 1, "X", "a", "X"), t(1, 2, "X", "a", "Z")] {
            state = valid_extensions(&state, &g)
                .into_iter()
                .find(|(t, _)| *t == want)
                .expect("extension present")
                .1;
        }
        let ext: Vec<_> = valid_extensions(&state, &g).into_iter().map(|(t, _)| t).collect();
        assert!(ext.contains(&t(2, 0, "Z", "b", "X")));
    }
}
