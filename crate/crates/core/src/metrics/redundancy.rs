use std::sync::atomic::{AtomicU64, Ordering};

use log::warn;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{subgraph_isomorphic_with_budget, LabeledGraph, MatchOutcome};

/// Per-pair search budget for containment checks.
pub const DEFAULT_ISO_BUDGET: u64 = 10_000_000;

/// Containment test where an exhausted budget counts as "not contained".
struct Containment {
    budget: u64,
    timeouts: AtomicU64,
}

impl Containment {
    fn new(budget: u64) -> Self {
        Containment { budget, timeouts: AtomicU64::new(0) }
    }

    fn sub(&self, pattern: &LabeledGraph, target: &LabeledGraph) -> bool {
        match subgraph_isomorphic_with_budget(pattern, target, self.budget) {
            MatchOutcome::Found => true,
            MatchOutcome::NotFound => false,
            MatchOutcome::BudgetExceeded => {
                self.timeouts.fetch_add(1, Ordering::Relaxed);
                false
            }
        }
    }

    fn report(&self, what: &str) {
        let n = self.timeouts.load(Ordering::Relaxed);
        if n > 0 {
            warn!("{what}: {n} containment checks exceeded the search budget and were counted as not contained");
        }
    }
}

/// Percentage of generated graphs in no containment relation (either
/// direction) with any training graph.
pub fn novelty(generated: &[LabeledGraph], training: &[LabeledGraph]) -> Result<f64> {
    novelty_with_budget(generated, training, DEFAULT_ISO_BUDGET)
}

pub fn novelty_with_budget(generated: &[LabeledGraph], training: &[LabeledGraph], budget: u64) -> Result<f64> {
    if generated.is_empty() || training.is_empty() {
        return Err(Error::EmptyDataset("novelty needs generated and training graphs"));
    }
    let c = Containment::new(budget);
    let novel = generated
        .par_iter()
        .filter(|g| !training.iter().any(|t| c.sub(g, t) || c.sub(t, g)))
        .count();
    c.report("novelty");
    Ok(100.0 * novel as f64 / generated.len() as f64)
}

/// Percentage of generated graphs that survive containment deduplication.
///
/// Graph `i` is removed when it is contained in some other graph `j` that
/// does not also embed into it; among mutually contained (isomorphic)
/// graphs only the earliest survives.
pub fn uniqueness(generated: &[LabeledGraph]) -> Result<f64> {
    uniqueness_with_budget(generated, DEFAULT_ISO_BUDGET)
}

pub fn uniqueness_with_budget(generated: &[LabeledGraph], budget: u64) -> Result<f64> {
    if generated.is_empty() {
        return Err(Error::EmptyDataset("uniqueness needs generated graphs"));
    }
    let c = Containment::new(budget);
    let kept = (0..generated.len())
        .into_par_iter()
        .filter(|&i| {
            let g = &generated[i];
            !generated.iter().enumerate().any(|(j, h)| j != i && c.sub(g, h) && (j < i || !c.sub(h, g)))
        })
        .count();
    c.report("uniqueness");
    Ok(100.0 * kept as f64 / generated.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> LabeledGraph {
        LabeledGraph::from_parts(["A", "A", "A"], [(0, 1, ""), (1, 2, ""), (2, 0, "")])
    }

    fn with_pendant(g: &LabeledGraph, label: &str) -> LabeledGraph {
        let mut h = g.clone();
        let v = h.add_node(label);
        h.add_edge(0, v, "");
        h
    }

    #[test]
    fn identical_graphs() {
        assert_eq!(uniqueness(&vec![triangle(); 100]).unwrap(), 1.0);
    }

    #[test]
    fn contained_graph_is_removed() {
        let t = triangle();
        assert_eq!(uniqueness(&[t.clone(), with_pendant(&t, "A")]).unwrap(), 50.0);
        assert_eq!(uniqueness(&[with_pendant(&t, "A"), t]).unwrap(), 50.0);
    }

    #[test]
    fn incomparable_graphs_all_kept() {
        let a = LabeledGraph::from_parts(["A", "B"], [(0, 1, "")]);
        let b = LabeledGraph::from_parts(["A", "C"], [(0, 1, "")]);
        assert_eq!(uniqueness(&[a, b]).unwrap(), 100.0);
    }

    #[test]
    fn novelty_cases() {
        let train = vec![triangle(), LabeledGraph::from_parts(["B", "C"], [(0, 1, "x")])];
        assert_eq!(novelty(&train, &train).unwrap(), 0.0);
        let pendants: Vec<_> = train.iter().map(|g| with_pendant(g, "Q")).collect();
        assert_eq!(novelty(&pendants, &train).unwrap(), 0.0);
        let foreign = vec![LabeledGraph::from_parts(["Z", "Z"], [(0, 1, "")])];
        assert_eq!(novelty(&foreign, &train).unwrap(), 100.0);
    }
}
