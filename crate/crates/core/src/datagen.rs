//! Dataset files, train/validation/test splits and random-walk-with-restart
//! subgraph sampling.
//!
//! Datasets use the line-oriented gSpan text format:
//!
//! ```text
//! t # 0
//! v 0 C
//! v 1 O
//! e 0 1 _
//! ```
//!
//! An empty label is written as `_`; labels containing whitespace or quotes
//! are double-quoted. Vertex ids are renumbered densely in declaration
//! order.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use log::warn;
use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canonize::{quote, split_fields};
use crate::error::{Error, Result};
use crate::graph::{validate_graph, LabeledGraph};

/// Placeholder written for the empty label.
pub const EMPTY_LABEL: &str = "_";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum DatasetFormat {
    #[default]
    GSpan,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParseMode {
    /// Invalid graphs are an error.
    #[default]
    Strict,
    /// Invalid graphs are dropped with a warning.
    SkipInvalid,
}

fn parse_label(token: &str) -> String {
    if token == EMPTY_LABEL {
        String::new()
    } else {
        token.to_string()
    }
}

struct Pending {
    graph: LabeledGraph,
    ids: HashMap<u64, usize>,
}

fn finish(pending: Option<Pending>, index: usize, mode: ParseMode, out: &mut Vec<LabeledGraph>) -> Result<()> {
    let Some(p) = pending else { return Ok(()) };
    let check = validate_graph(&p.graph);
    if check.is_ok() {
        out.push(p.graph);
        return Ok(());
    }
    match mode {
        ParseMode::Strict => Err(Error::Validation { index, violations: check.violations }),
        ParseMode::SkipInvalid => {
            warn!("graph {index} skipped: {}", check.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "));
            Ok(())
        }
    }
}

/// Parses gSpan text. Graph indices in errors count headers from 0.
pub fn parse_gspan(text: &str, mode: ParseMode) -> Result<Vec<LabeledGraph>> {
    let mut out = Vec::new();
    let mut pending: Option<Pending> = None;
    let mut index = 0usize;
    let mut headers = 0usize;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |reason: String| Error::Parse { line, reason };
        let owned = split_fields(raw).map_err(err)?;
        let fields: Vec<&str> = owned.iter().map(String::as_str).collect();
        let Some(&kind) = fields.first() else { continue };
        let number = |s: &str, what: &str| s.parse::<u64>().map_err(|_| err(format!("invalid {what} {s:?}")));
        match kind {
            "t" => {
                if fields.len() != 3 || fields[1] != "#" {
                    return Err(err("expected \"t # <id>\"".into()));
                }
                finish(pending.take(), index, mode, &mut out)?;
                if fields[2] == "-1" {
                    break;
                }
                index = headers;
                headers += 1;
                pending = Some(Pending { graph: LabeledGraph::new(), ids: HashMap::new() });
            }
            "v" => {
                let p = pending.as_mut().ok_or_else(|| err("vertex before any graph header".into()))?;
                if fields.len() != 3 {
                    return Err(err("expected \"v <id> <label>\" (quote labels that contain whitespace)".into()));
                }
                let id = number(fields[1], "vertex id")?;
                if p.ids.contains_key(&id) {
                    return Err(err(format!("vertex {id} declared twice")));
                }
                let v = p.graph.add_node(parse_label(fields[2]));
                p.ids.insert(id, v);
            }
            "e" => {
                let p = pending.as_mut().ok_or_else(|| err("edge before any graph header".into()))?;
                if fields.len() != 4 {
                    return Err(err("expected \"e <u> <v> <label>\" (quote labels that contain whitespace)".into()));
                }
                let end = |s: &str| -> Result<usize> {
                    let id = number(s, "vertex id")?;
                    p.ids.get(&id).copied().ok_or_else(|| err(format!("edge references undeclared vertex {id}")))
                };
                let (u, v) = (end(fields[1])?, end(fields[2])?);
                p.graph.add_edge(u, v, parse_label(fields[3]));
            }
            other => return Err(err(format!("unknown record type {other:?}"))),
        }
    }
    finish(pending, index, mode, &mut out)?;
    Ok(out)
}

pub fn parse_dataset(path: &Path, format: DatasetFormat, mode: ParseMode) -> Result<Vec<LabeledGraph>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match format {
        DatasetFormat::GSpan => parse_gspan(&text, mode),
    }
}

fn write_label(label: &str) -> String {
    if label.is_empty() {
        EMPTY_LABEL.to_string()
    } else if label.contains(char::is_whitespace) || label.contains('"') {
        quote(label)
    } else {
        label.to_string()
    }
}

pub fn write_gspan(graphs: &[LabeledGraph]) -> Result<String> {
    let mut s = String::new();
    for (i, g) in graphs.iter().enumerate() {
        s.push_str(&format!("t # {i}\n"));
        for (v, l) in g.labels().iter().enumerate() {
            s.push_str(&format!("v {v} {}\n", write_label(l)));
        }
        for e in g.edges() {
            s.push_str(&format!("e {} {} {}\n", e.u, e.v, write_label(&e.label)));
        }
    }
    Ok(s)
}

pub fn write_dataset(path: &Path, graphs: &[LabeledGraph]) -> Result<()> {
    fs::write(path, write_gspan(graphs)?).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<LabeledGraph>,
    pub valid: Vec<LabeledGraph>,
    pub test: Vec<LabeledGraph>,
    /// Input positions of each part, in partition order.
    pub train_idx: Vec<usize>,
    pub valid_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
    pub ratios: (f64, f64, f64),
    pub seed: u64,
}

/// Seeded shuffle, then contiguous train/validation/test slices with sizes
/// `round(n * ratio)` (the test part takes the remainder).
pub fn split_dataset(graphs: &[LabeledGraph], ratios: (f64, f64, f64), seed: u64) -> Result<DatasetSplit> {
    let (a, b, c) = ratios;
    if [a, b, c].iter().any(|r| !(0.0..=1.0).contains(r)) || ((a + b + c) - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!("split ratios {ratios:?} must be in [0, 1] and sum to 1")));
    }
    let n = graphs.len();
    let n_train = ((n as f64 * a).round() as usize).min(n);
    let n_valid = ((n as f64 * b).round() as usize).min(n - n_train);
    if n_train == 0 {
        return Err(Error::TooFewGraphs(n));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let take = |idx: &[usize]| idx.iter().map(|&i| graphs[i].clone()).collect::<Vec<_>>();
    let (train_idx, rest) = order.split_at(n_train);
    let (valid_idx, test_idx) = rest.split_at(n_valid);
    Ok(DatasetSplit {
        train: take(train_idx),
        valid: take(valid_idx),
        test: take(test_idx),
        train_idx: train_idx.to_vec(),
        valid_idx: valid_idx.to_vec(),
        test_idx: test_idx.to_vec(),
        ratios,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RwrConfig {
    pub restart: f64,
    pub iterations: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for RwrConfig {
    fn default() -> Self {
        RwrConfig { restart: 0.15, iterations: 150, samples: 1, seed: 0 }
    }
}

fn walk<R: Rng>(g: &LabeledGraph, start: usize, cfg: &RwrConfig, rng: &mut R) -> LabeledGraph {
    let mut used = BTreeSet::new();
    let mut cur = start;
    for _ in 0..cfg.iterations {
        if rng.gen_bool(cfg.restart) {
            cur = start;
            continue;
        }
        let nbrs = g.neighbors(cur);
        let &(next, edge) = nbrs.choose(rng).expect("connected graph with an edge has no isolated node");
        used.insert(edge);
        cur = next;
    }
    let edges: Vec<usize> = used.into_iter().collect();
    g.edge_subgraph(&[start], &edges)
}

/// Draws `cfg.samples` subgraphs of a single connected graph. Each walk
/// starts at a node drawn proportionally to degree, restarts with
/// probability `cfg.restart` per iteration, and keeps every traversed edge.
/// Sample `i` uses stream `i` of `cfg.seed`.
pub fn rwr_sample(g: &LabeledGraph, cfg: &RwrConfig) -> Result<Vec<LabeledGraph>> {
    if !(cfg.restart > 0.0 && cfg.restart < 1.0) || cfg.iterations == 0 {
        return Err(Error::Precondition("restart must be in (0, 1) and iterations positive".into()));
    }
    let check = validate_graph(g);
    if !check.is_ok() {
        return Err(Error::InvalidGraph(check.violations));
    }
    if g.edge_count() == 0 {
        return Err(Error::Precondition("random walks need at least one edge".into()));
    }
    let degrees = WeightedIndex::new((0..g.node_count()).map(|v| g.degree(v))).expect("positive total degree");
    Ok((0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            let start = degrees.sample(&mut rng);
            walk(g, start, cfg, &mut rng)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::subgraph_isomorphic;

    #[test]
    fn minimal_file() {
        let gs = parse_gspan("t # 0\nv 0 A\nv 1 B\ne 0 1 x\n", ParseMode::Strict).unwrap();
        assert_eq!(gs, vec![LabeledGraph::from_parts(["A", "B"], [(0, 1, "x")])]);
        assert!(parse_gspan("", ParseMode::Strict).unwrap().is_empty());
    }

    #[test]
    fn parse_errors_carry_lines() {
        let e = parse_gspan("t # 0\nv 0 A\ne 0 7 x\n", ParseMode::Strict).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
        let e = parse_gspan("t # 0\nv 0 A B\n", ParseMode::Strict).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        let e = parse_gspan("v 0 A\n", ParseMode::Strict).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn invalid_graphs_by_mode() {
        let text = "t # 0\nv 0 A\nv 1 A\ne 0 1 x\nt # 1\nv 0 A\nv 1 A\n";
        assert!(matches!(parse_gspan(text, ParseMode::Strict), Err(Error::Validation { index: 1, .. })));
        assert_eq!(parse_gspan(text, ParseMode::SkipInvalid).unwrap().len(), 1);
    }

    #[test]
    fn round_trip_with_empty_labels() {
        let g = vec![
            LabeledGraph::from_parts(["", "C"], [(0, 1, "")]),
            LabeledGraph::from_parts(["N", "N", "O"], [(0, 1, "d"), (1, 2, "s")]),
        ];
        let text = write_gspan(&g).unwrap();
        assert!(text.contains("e 0 1 _\n"));
        assert_eq!(parse_gspan(&text, ParseMode::Strict).unwrap(), g);
        let spaced = vec![LabeledGraph::from_parts(["2, C", "say \"hi\""], [(0, 1, "x y")])];
        let text = write_gspan(&spaced).unwrap();
        assert!(text.contains("v 0 \"2, C\"\n"));
        assert_eq!(parse_gspan(&text, ParseMode::Strict).unwrap(), spaced);
    }

    #[test]
    fn split_sizes_and_determinism() {
        let graphs: Vec<_> = (0..10).map(|i| LabeledGraph::from_parts([format!("L{i}")], Vec::<(usize, usize, String)>::new())).collect();
        let a = split_dataset(&graphs, (0.8, 0.1, 0.1), 1).unwrap();
        assert_eq!((a.train.len(), a.valid.len(), a.test.len()), (8, 1, 1));
        assert_eq!(a, split_dataset(&graphs, (0.8, 0.1, 0.1), 1).unwrap());
        let b = split_dataset(&graphs, (0.8, 0.1, 0.1), 2).unwrap();
        assert_ne!(a.train_idx, b.train_idx);
        let mut all: Vec<usize> = a.train_idx.iter().chain(&a.valid_idx).chain(&a.test_idx).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        assert!(matches!(split_dataset(&graphs[..0], (0.8, 0.1, 0.1), 1), Err(Error::TooFewGraphs(0))));
    }

    #[test]
    fn single_edge_walks() {
        let g = LabeledGraph::from_parts(["A", "B"], [(0, 1, "x")]);
        let s = rwr_sample(&g, &RwrConfig { samples: 5, ..Default::default() }).unwrap();
        assert!(s.iter().all(|h| h.node_count() == 2 && h.edge_count() == 1));
    }

    #[test]
    fn walks_are_connected_subgraphs() {
        let mut g = LabeledGraph::new();
        for i in 0..30 {
            g.add_node(format!("n{}", i % 4));
        }
        for i in 0..30 {
            g.add_edge(i, (i + 1) % 30, "r");
            if i % 3 == 0 {
                g.add_edge(i, (i + 7) % 30, "c");
            }
        }
        let cfg = RwrConfig { samples: 20, seed: 4, ..Default::default() };
        let s = rwr_sample(&g, &cfg).unwrap();
        assert_eq!(s, rwr_sample(&g, &cfg).unwrap());
        for h in &s {
            assert!(h.is_valid());
            assert!(h.node_count() >= 2);
            assert!(subgraph_isomorphic(h, &g));
        }
    }
}
