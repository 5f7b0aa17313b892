//! Label-preserving (sub)graph isomorphism by backtracking search.
//!
//! Pattern nodes are matched in a fixed order: the node whose (label,
//! degree) pair is rarest in the target first, then greedily the node with
//! the most already-ordered neighbors. Candidates for a node with an
//! ordered neighbor are drawn from the target neighborhood of that
//! neighbor's image, which keeps the search local.

use std::collections::HashMap;

use super::LabeledGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchOutcome {
    Found,
    NotFound,
    /// The node-expansion budget ran out before the search finished.
    BudgetExceeded,
}

/// True iff `pattern` maps injectively into `target` preserving node labels,
/// edge labels and edges (non-induced subgraph isomorphism).
pub fn subgraph_isomorphic(pattern: &LabeledGraph, target: &LabeledGraph) -> bool {
    subgraph_isomorphic_with_budget(pattern, target, u64::MAX) == MatchOutcome::Found
}

pub fn is_isomorphic(g1: &LabeledGraph, g2: &LabeledGraph) -> bool {
    g1.node_count() == g2.node_count() && g1.edge_count() == g2.edge_count() && subgraph_isomorphic(g1, g2)
}

/// Bounded search; `budget` caps the number of candidate assignments tried.
pub fn subgraph_isomorphic_with_budget(pattern: &LabeledGraph, target: &LabeledGraph, budget: u64) -> MatchOutcome {
    if pattern.node_count() > target.node_count() || pattern.edge_count() > target.edge_count() {
        return MatchOutcome::NotFound;
    }
    if pattern.node_count() == 0 {
        return MatchOutcome::Found;
    }
    if !multiset_contained(&pattern.node_label_counts(), &target.node_label_counts())
        || !multiset_contained(&pattern.edge_label_counts(), &target.edge_label_counts())
    {
        return MatchOutcome::NotFound;
    }
    let mut m = Matcher::new(pattern, target, budget);
    m.run()
}

fn multiset_contained(small: &std::collections::BTreeMap<&str, usize>, big: &std::collections::BTreeMap<&str, usize>) -> bool {
    small.iter().all(|(k, &c)| big.get(k).copied().unwrap_or(0) >= c)
}

struct Interned {
    node_labels: Vec<u32>,
    /// Sorted `(neighbor, edge label)` per node.
    adj: Vec<Vec<(usize, u32)>>,
}

impl Interned {
    fn new(g: &LabeledGraph, nodes: &mut HashMap<String, u32>, edges: &mut HashMap<String, u32>) -> Self {
        let intern = |m: &mut HashMap<String, u32>, s: &str| -> u32 {
            let next = m.len() as u32;
            *m.entry(s.to_string()).or_insert(next)
        };
        let node_labels = g.labels().iter().map(|l| intern(nodes, l)).collect();
        let mut adj = vec![Vec::new(); g.node_count()];
        for e in g.edges() {
            let l = intern(edges, &e.label);
            adj[e.u].push((e.v, l));
            if e.u != e.v {
                adj[e.v].push((e.u, l));
            }
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        Interned { node_labels, adj }
    }

    #[inline]
    fn edge_label(&self, u: usize, v: usize) -> Option<u32> {
        let a = &self.adj[u];
        a.binary_search_by(|&(w, _)| w.cmp(&v)).ok().map(|i| a[i].1)
    }
}

struct Step {
    node: usize,
    /// Position of an already-matched neighbor used to generate candidates.
    anchor: Option<usize>,
    /// `(position, edge label)` for every edge to an earlier position.
    back: Vec<(usize, u32)>,
}

struct Matcher {
    pat: Interned,
    tgt: Interned,
    order: Vec<Step>,
    images: Vec<usize>,
    used: Vec<bool>,
    budget: u64,
    spent: u64,
}

impl Matcher {
    fn new(pattern: &LabeledGraph, target: &LabeledGraph, budget: u64) -> Self {
        let mut nodes = HashMap::new();
        let mut edges = HashMap::new();
        let tgt = Interned::new(target, &mut nodes, &mut edges);
        let pat = Interned::new(pattern, &mut nodes, &mut edges);

        let n = pattern.node_count();
        let rarity: Vec<usize> = (0..n)
            .map(|p| {
                (0..target.node_count())
                    .filter(|&t| tgt.node_labels[t] == pat.node_labels[p] && tgt.adj[t].len() >= pat.adj[p].len())
                    .count()
            })
            .collect();

        let mut position = vec![usize::MAX; n];
        let mut links = vec![0usize; n];
        let mut order: Vec<Step> = Vec::with_capacity(n);
        for _ in 0..n {
            let next = (0..n)
                .filter(|&p| position[p] == usize::MAX)
                .min_by_key(|&p| (std::cmp::Reverse(links[p]), rarity[p], std::cmp::Reverse(pat.adj[p].len()), p))
                .expect("unordered node remains");
            let pos = order.len();
            position[next] = pos;
            let mut back: Vec<(usize, u32)> = pat.adj[next]
                .iter()
                .filter(|&&(w, _)| position[w] < pos)
                .map(|&(w, l)| (position[w], l))
                .collect();
            back.sort_unstable();
            let anchor = back.first().map(|&(q, _)| q);
            for &(w, _) in &pat.adj[next] {
                links[w] += 1;
            }
            order.push(Step { node: next, anchor, back });
        }

        Matcher {
            images: vec![usize::MAX; n],
            used: vec![false; target.node_count()],
            pat,
            tgt,
            order,
            budget,
            spent: 0,
        }
    }

    fn run(&mut self) -> MatchOutcome {
        match self.extend(0) {
            Some(true) => MatchOutcome::Found,
            Some(false) => MatchOutcome::NotFound,
            None => MatchOutcome::BudgetExceeded,
        }
    }

    /// `None` when the budget is exhausted.
    fn extend(&mut self, pos: usize) -> Option<bool> {
        if pos == self.order.len() {
            return Some(true);
        }
        let candidates: Vec<usize> = match self.order[pos].anchor {
            Some(a) => self.tgt.adj[self.images[a]].iter().map(|&(t, _)| t).collect(),
            None => (0..self.tgt.node_labels.len()).collect(),
        };
        for t in candidates {
            if !self.feasible(pos, t) {
                continue;
            }
            self.spent += 1;
            if self.spent > self.budget {
                return None;
            }
            self.images[pos] = t;
            self.used[t] = true;
            let found = self.extend(pos + 1);
            self.used[t] = false;
            match found {
                Some(false) => {}
                other => return other,
            }
        }
        Some(false)
    }

    #[inline]
    fn feasible(&self, pos: usize, t: usize) -> bool {
        let step = &self.order[pos];
        let p = step.node;
        !self.used[t]
            && self.tgt.node_labels[t] == self.pat.node_labels[p]
            && self.tgt.adj[t].len() >= self.pat.adj[p].len()
            && step
                .back
                .iter()
                .all(|&(q, l)| self.tgt.edge_label(t, self.images[q]) == Some(l))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2a() -> LabeledGraph {
        LabeledGraph::from_parts(
            ["X", "X", "Z", "Y"],
            [(0, 1, "a"), (1, 2, "a"), (2, 0, "b"), (1, 3, "b")],
        )
    }

    fn cycle(n: usize, label: &str) -> LabeledGraph {
        LabeledGraph::from_parts(vec![label; n], (0..n).map(|i| (i, (i + 1) % n, "e")))
    }

    fn clique(n: usize, label: &str) -> LabeledGraph {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i, j, "e"));
            }
        }
        LabeledGraph::from_parts(vec![label; n], edges)
    }

    /// Exhaustive bijection search, used as an oracle.
    fn brute_isomorphic(a: &LabeledGraph, b: &LabeledGraph) -> bool {
        fn rec(a: &LabeledGraph, b: &LabeledGraph, map: &mut Vec<usize>, used: &mut Vec<bool>) -> bool {
            let i = map.len();
            if i == a.node_count() {
                return a.edges().iter().all(|e| {
                    b.edge_between(map[e.u], map[e.v]).map(|f| f.label == e.label).unwrap_or(false)
                });
            }
            for t in 0..b.node_count() {
                if !used[t] && a.label(i) == b.label(t) {
                    used[t] = true;
                    map.push(t);
                    if rec(a, b, map, used) {
                        return true;
                    }
                    map.pop();
                    used[t] = false;
                }
            }
            false
        }
        a.node_count() == b.node_count()
            && a.edge_count() == b.edge_count()
            && rec(a, b, &mut Vec::new(), &mut vec![false; b.node_count()])
    }

    #[test]
    fn permutation_is_isomorphic() {
        let g = fig2a();
        assert!(is_isomorphic(&g, &g.permuted(&[3, 1, 0, 2])));
    }

    #[test]
    fn reversed_path() {
        let p = LabeledGraph::from_parts(["A", "B", "C"], [(0, 1, "x"), (1, 2, "x")]);
        let q = LabeledGraph::from_parts(["C", "B", "A"], [(0, 1, "x"), (1, 2, "x")]);
        assert!(is_isomorphic(&p, &q));
    }

    #[test]
    fn relabeled_node_breaks_isomorphism() {
        let g = fig2a();
        let mut h = g.clone();
        h.set_label(0, "Y");
        assert!(!brute_isomorphic(&g, &h));
        assert!(!is_isomorphic(&g, &h));
    }

    #[test]
    fn edge_label_matters() {
        let g = fig2a();
        let h = LabeledGraph::from_parts(["X", "X", "Z", "Y"], [(0, 1, "a"), (1, 2, "b"), (2, 0, "a"), (1, 3, "b")]);
        assert_eq!(is_isomorphic(&g, &h), brute_isomorphic(&g, &h));
    }

    #[test]
    fn self_containment_and_single_edge() {
        let g = fig2a();
        assert!(subgraph_isomorphic(&g, &g));
        let e = LabeledGraph::from_parts(["X", "Y"], [(0, 1, "b")]);
        assert!(subgraph_isomorphic(&e, &g));
        let f = LabeledGraph::from_parts(["X", "Y"], [(0, 1, "a")]);
        assert!(!subgraph_isomorphic(&f, &g));
    }

    #[test]
    fn cycle_in_clique_not_induced() {
        assert!(subgraph_isomorphic(&cycle(4, "P"), &clique(4, "P")));
        assert!(!subgraph_isomorphic(&clique(4, "P"), &cycle(4, "P")));
        assert!(!subgraph_isomorphic(&cycle(5, "P"), &clique(4, "P")));
    }

    #[test]
    fn budget_exhaustion() {
        assert_eq!(
            subgraph_isomorphic_with_budget(&cycle(4, "P"), &clique(5, "P"), 0),
            MatchOutcome::BudgetExceeded
        );
    }
}
