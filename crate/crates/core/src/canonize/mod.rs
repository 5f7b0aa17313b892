//! Minimum DFS codes: canonical sequence labels for labeled graphs.
//!
//! A DFS traversal stamps nodes with their discovery time and writes every
//! edge as `(src_time, dst_time, src_label, edge_label, dst_label)`. Forward
//! (tree) edges have `src_time < dst_time`; backward edges close cycles from
//! the most recently discovered node back to one of its ancestors. The
//! smallest such sequence under [`compare_codes`] is the canonical label.

mod brute;
mod decode;
mod search;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use brute::{brute_force_min_dfs_code, brute_force_min_dfs_code_with_cap, BRUTE_FORCE_NODE_CAP};
pub use decode::{decode, DecodeMode};
pub use search::{
    canonize, min_dfs_code, valid_extensions, Canonization, CanonizeOptions, SearchState, DEFAULT_FRONTIER_CAP,
};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgeTuple {
    pub src_time: usize,
    pub dst_time: usize,
    pub src_label: String,
    pub edge_label: String,
    pub dst_label: String,
}

impl EdgeTuple {
    pub fn new(
        src_time: usize,
        dst_time: usize,
        src_label: impl Into<String>,
        edge_label: impl Into<String>,
        dst_label: impl Into<String>,
    ) -> Self {
        EdgeTuple {
            src_time,
            dst_time,
            src_label: src_label.into(),
            edge_label: edge_label.into(),
            dst_label: dst_label.into(),
        }
    }

    #[inline]
    pub fn is_forward(&self) -> bool {
        self.src_time < self.dst_time
    }

    #[inline]
    pub fn is_backward(&self) -> bool {
        self.src_time > self.dst_time
    }
}

/// DFS-lexicographic order on edge tuples.
///
/// Backward edges precede forward edges. Two backward edges order by target
/// time (smaller first); two forward edges order by source time, deeper
/// (larger) first. Remaining ties fall to the labels, compared
/// lexicographically in the order source, edge, target.
pub fn compare_tuples(a: &EdgeTuple, b: &EdgeTuple) -> Ordering {
    structural_order(
        (a.src_time, a.dst_time),
        (b.src_time, b.dst_time),
    )
    .then_with(|| a.src_label.cmp(&b.src_label))
    .then_with(|| a.edge_label.cmp(&b.edge_label))
    .then_with(|| a.dst_label.cmp(&b.dst_label))
}

/// Timestamp part of [`compare_tuples`].
#[inline]
pub(crate) fn structural_order(a: (usize, usize), b: (usize, usize)) -> Ordering {
    let a_back = a.0 > a.1;
    let b_back = b.0 > b.1;
    match (a_back, b_back) {
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        (true, true) => a.1.cmp(&b.1).then(a.0.cmp(&b.0)),
        (false, false) => b.0.cmp(&a.0).then(a.1.cmp(&b.1)),
    }
}

impl PartialOrd for EdgeTuple {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for EdgeTuple {
    fn cmp(&self, other: &Self) -> Ordering {
        compare_tuples(self, other)
    }
}

/// A sequence of edge tuples. Only [`decode`] in strict mode enforces the
/// structural invariants; generated sequences are held in the same type.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DfsCode {
    pub tuples: Vec<EdgeTuple>,
}

impl DfsCode {
    pub fn new(tuples: Vec<EdgeTuple>) -> Self {
        DfsCode { tuples }
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// Number of distinct timestamps mentioned.
    pub fn node_count(&self) -> usize {
        self.tuples
            .iter()
            .map(|t| t.src_time.max(t.dst_time) + 1)
            .max()
            .unwrap_or(0)
    }
}

impl From<Vec<EdgeTuple>> for DfsCode {
    fn from(tuples: Vec<EdgeTuple>) -> Self {
        DfsCode { tuples }
    }
}

/// Element-wise comparison; a strict prefix is smaller than its extensions.
pub fn compare_codes(a: &DfsCode, b: &DfsCode) -> Ordering {
    for (x, y) in a.tuples.iter().zip(&b.tuples) {
        match compare_tuples(x, y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

impl PartialOrd for DfsCode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DfsCode {
    fn cmp(&self, other: &Self) -> Ordering {
        compare_codes(self, other)
    }
}

pub(crate) fn quote(label: &str) -> String {
    format!("\"{}\"", label.replace('\\', "\\\\").replace('"', "\\\""))
}

fn write_label(f: &mut fmt::Formatter<'_>, label: &str) -> fmt::Result {
    if label.is_empty() || label.contains(char::is_whitespace) || label.contains('"') {
        f.write_str(&quote(label))
    } else {
        f.write_str(label)
    }
}

impl fmt::Display for EdgeTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} ", self.src_time, self.dst_time)?;
        write_label(f, &self.src_label)?;
        f.write_str(" ")?;
        write_label(f, &self.edge_label)?;
        f.write_str(" ")?;
        write_label(f, &self.dst_label)
    }
}

/// One tuple per line, `t_u t_v L_u L_e L_v`; labels are quoted when they
/// are empty or contain whitespace.
impl fmt::Display for DfsCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.tuples {
            writeln!(f, "{t}")?;
        }
        Ok(())
    }
}

/// Whitespace-separated fields; a field may be double-quoted with `\\`
/// escapes.
pub(crate) fn split_fields(line: &str) -> std::result::Result<Vec<String>, String> {
    let mut out = Vec::new();
    let mut chars = line.chars().peekable();
    loop {
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        let Some(&c) = chars.peek() else { break };
        let mut field = String::new();
        if c == '"' {
            chars.next();
            loop {
                match chars.next() {
                    Some('\\') => field.push(chars.next().ok_or("dangling escape")?),
                    Some('"') => break,
                    Some(c) => field.push(c),
                    None => return Err("unterminated quote".into()),
                }
            }
        } else {
            while let Some(&c) = chars.peek() {
                if c.is_whitespace() {
                    break;
                }
                field.push(c);
                chars.next();
            }
        }
        out.push(field);
    }
    Ok(out)
}

impl FromStr for EdgeTuple {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let f = split_fields(s)?;
        if f.len() != 5 {
            return Err(format!("expected 5 fields, got {}", f.len()));
        }
        let time = |s: &str| s.parse::<usize>().map_err(|e| format!("bad timestamp {s:?}: {e}"));
        Ok(EdgeTuple::new(time(&f[0])?, time(&f[1])?, f[2].clone(), f[3].clone(), f[4].clone()))
    }
}

impl FromStr for DfsCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| l.parse().map_err(|reason| Error::Parse { line: i + 1, reason }))
            .collect::<Result<Vec<_>>>()
            .map(DfsCode::new)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(a: usize, b: usize, x: &str, e: &str, y: &str) -> EdgeTuple {
        EdgeTuple::new(a, b, x, e, y)
    }

    #[test]
    fn label_tie_break() {
        assert_eq!(compare_tuples(&t(1, 2, "X", "a", "Z"), &t(1, 2, "X", "b", "Z")), Ordering::Less);
        let a = t(1, 2, "X", "a", "Z");
        assert_eq!(compare_tuples(&a, &a), Ordering::Equal);
    }

    #[test]
    fn backward_before_forward() {
        assert_eq!(compare_tuples(&t(2, 0, "Z", "b", "X"), &t(2, 3, "Z", "a", "Y")), Ordering::Less);
    }

    #[test]
    fn sibling_orders() {
        // backward: smaller target first
        assert_eq!(compare_tuples(&t(3, 0, "Z", "z", "Z"), &t(3, 1, "A", "a", "A")), Ordering::Less);
        // forward: deeper source first
        assert_eq!(compare_tuples(&t(2, 3, "Z", "z", "Z"), &t(0, 3, "A", "a", "A")), Ordering::Less);
    }

    #[test]
    fn example_codes_compare() {
        let b = DfsCode::new(vec![
            t(0, 1, "X", "a", "X"),
            t(1, 2, "X", "a", "Z"),
            t(2, 0, "Z", "b", "X"),
            t(1, 3, "X", "b", "Y"),
        ]);
        let c = DfsCode::new(vec![
            t(0, 1, "X", "a", "X"),
            t(1, 2, "X", "b", "Z"),
            t(2, 0, "Z", "a", "X"),
            t(0, 3, "X", "b", "Y"),
        ]);
        assert_eq!(compare_codes(&b, &c), Ordering::Less);
        assert_eq!(compare_codes(&c, &b), Ordering::Greater);
        assert_eq!(compare_codes(&b, &b), Ordering::Equal);
    }

    #[test]
    fn prefix_is_smaller() {
        let a = DfsCode::new(vec![t(0, 1, "A", "x", "A")]);
        let b = DfsCode::new(vec![t(0, 1, "A", "x", "A"), t(1, 2, "A", "x", "A")]);
        assert_eq!(compare_codes(&a, &b), Ordering::Less);
    }

    #[test]
    fn text_rendering_round_trip() {
        let code = DfsCode::new(vec![t(0, 1, "C", "", "has space"), t(1, 2, "C", "=", "O")]);
        let text = code.to_string();
        assert_eq!(text, "0 1 C \"\" \"has space\"\n1 2 C = O\n");
        assert_eq!(text.parse::<DfsCode>().unwrap(), code);
    }
}
