//! Per-node counts of the 11 automorphism orbits (numbered 4 to 14) of the
//! six connected 4-node graphlets, by enumerating connected 4-node
//! subgraphs with ESU.

use crate::graph::LabeledGraph;

pub const ORBIT_COUNT: usize = 11;
/// Number of the first 4-node orbit.
pub const FIRST_ORBIT: usize = 4;

pub type OrbitVector = [u64; ORBIT_COUNT];

/// Orbit of a node inside a connected 4-node graphlet, from the graphlet's
/// edge count and the node's degree within it.
fn orbit_of(edges: usize, degrees: &[usize; 4], d: usize) -> usize {
    match edges {
        3 if degrees.contains(&3) => if d == 3 { 7 } else { 6 },
        3 => if d == 1 { 4 } else { 5 },
        4 if degrees.contains(&3) => match d {
            1 => 9,
            2 => 10,
            _ => 11,
        },
        4 => 8,
        5 => if d == 2 { 12 } else { 13 },
        6 => 14,
        _ => unreachable!("connected 4-node graphlets have 3 to 6 edges"),
    }
}

fn is_adjacent(g: &LabeledGraph, a: usize, b: usize) -> bool {
    g.neighbors(a).iter().any(|&(n, _)| n == b)
}

fn record(g: &LabeledGraph, sub: &[usize], counts: &mut [OrbitVector]) {
    let mut deg = [0usize; 4];
    let mut edges = 0;
    for i in 0..4 {
        for j in i + 1..4 {
            if is_adjacent(g, sub[i], sub[j]) {
                deg[i] += 1;
                deg[j] += 1;
                edges += 1;
            }
        }
    }
    for i in 0..4 {
        counts[sub[i]][orbit_of(edges, &deg, deg[i]) - FIRST_ORBIT] += 1;
    }
}

fn extend(g: &LabeledGraph, root: usize, sub: &mut Vec<usize>, mut ext: Vec<usize>, counts: &mut [OrbitVector]) {
    if sub.len() == 4 {
        record(g, sub, counts);
        return;
    }
    while let Some(w) = ext.pop() {
        let mut next = ext.clone();
        for &(u, _) in g.neighbors(w) {
            if u <= root || sub.contains(&u) || u == w || next.contains(&u) {
                continue;
            }
            // exclusive neighbourhood: not adjacent to the current subgraph
            if sub.iter().any(|&s| is_adjacent(g, s, u)) {
                continue;
            }
            next.push(u);
        }
        sub.push(w);
        extend(g, root, sub, next, counts);
        sub.pop();
    }
}

/// Orbit-count vector of every node.
pub fn orbit_counts(g: &LabeledGraph) -> Vec<OrbitVector> {
    let n = g.node_count();
    let mut counts = vec![[0u64; ORBIT_COUNT]; n];
    for v in 0..n {
        let mut ext: Vec<usize> = g.neighbors(v).iter().map(|&(u, _)| u).filter(|&u| u > v).collect();
        ext.sort_unstable();
        ext.dedup();
        extend(g, v, &mut vec![v], ext, &mut counts);
    }
    counts
}

/// Mean orbit-count vector over the nodes of `g`.
pub fn mean_orbit_vector(g: &LabeledGraph) -> Vec<f64> {
    let counts = orbit_counts(g);
    let mut mean = vec![0.0; ORBIT_COUNT];
    if counts.is_empty() {
        return mean;
    }
    for c in &counts {
        for (m, &x) in mean.iter_mut().zip(c) {
            *m += x as f64;
        }
    }
    mean.iter_mut().for_each(|m| *m /= counts.len() as f64);
    mean
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(orbit: usize) -> usize {
        orbit - FIRST_ORBIT
    }

    #[test]
    fn path_of_four() {
        let g = LabeledGraph::from_parts(["a"; 4], [(0, 1, ""), (1, 2, ""), (2, 3, "")]);
        let c = orbit_counts(&g);
        for (v, orbit) in [(0, 4), (1, 5), (2, 5), (3, 4)] {
            let mut want = [0; ORBIT_COUNT];
            want[idx(orbit)] = 1;
            assert_eq!(c[v], want, "node {v}");
        }
    }

    #[test]
    fn complete_four() {
        let g = LabeledGraph::from_parts(["a"; 4], [(0, 1, ""), (0, 2, ""), (0, 3, ""), (1, 2, ""), (1, 3, ""), (2, 3, "")]);
        for c in orbit_counts(&g) {
            let mut want = [0; ORBIT_COUNT];
            want[idx(14)] = 1;
            assert_eq!(c, want);
        }
    }

    #[test]
    fn triangle_has_none() {
        let g = LabeledGraph::from_parts(["a"; 3], [(0, 1, ""), (1, 2, ""), (2, 0, "")]);
        assert!(orbit_counts(&g).iter().all(|c| c.iter().all(|&x| x == 0)));
    }

    #[test]
    fn paw_orbits() {
        // triangle 0-1-2 with tail 2-3
        let g = LabeledGraph::from_parts(["a"; 4], [(0, 1, ""), (1, 2, ""), (2, 0, ""), (2, 3, "")]);
        let c = orbit_counts(&g);
        assert_eq!(c[3][idx(9)], 1);
        assert_eq!(c[0][idx(10)], 1);
        assert_eq!(c[2][idx(11)], 1);
    }
}
