//! Reference maps and deterministic instance generators shared by tests,
//! benchmarks and the CLI.

use crate::torus_graph::EmbeddedGraph;
use std::collections::BTreeMap;

/// One vertex, two loops interleaved as `(a+, b+, a-, b-)`: the smallest
/// toroidal map, with a single facial walk of length four.
pub fn torus_rose() -> EmbeddedGraph {
    let mut rotation = BTreeMap::new();
    rotation.insert(
        0usize,
        vec![(0usize, false), (1, false), (0, true), (1, true)],
    );
    EmbeddedGraph::build(
        vec!["v".into()],
        vec![("a".into(), 0, 0), ("b".into(), 0, 0)],
        &rotation,
    )
    .expect("torus rose is a valid toroidal map")
}

/// Two vertices joined by four parallel edges with aligned rotations: the
/// order-2 map with two quadrilateral faces.
pub fn g2() -> EmbeddedGraph {
    let mut rotation = BTreeMap::new();
    rotation.insert(
        0usize,
        vec![(0usize, false), (1, false), (2, false), (3, false)],
    );
    rotation.insert(1usize, vec![(0usize, true), (1, true), (2, true), (3, true)]);
    EmbeddedGraph::build(
        vec!["u".into(), "v".into()],
        vec![
            ("a".into(), 0, 1),
            ("b".into(), 0, 1),
            ("c".into(), 0, 1),
            ("d".into(), 0, 1),
        ],
        &rotation,
    )
    .expect("order-2 fixture is a valid toroidal map")
}

/// Quadrangulation of the torus by an `m x n` grid (`m, n >= 2`), with the
/// vertical wrap-around shifted by `twist` columns. Vertices `m*n`, edges
/// `2*m*n`, faces `m*n`; loop-free and connected for all twists.
pub fn grid_torus(m: usize, n: usize, twist: usize) -> EmbeddedGraph {
    assert!(m >= 2 && n >= 2, "grid must be at least 2 x 2");
    let idx = |i: usize, j: usize| (j % n) * m + (i % m);
    let vertices: Vec<String> = (0..m * n).map(|k| format!("v{k}")).collect();
    let mut edges = Vec::new();
    // Horizontal edge h(i,j): (i,j) -> (i+1,j). Vertical edge u(i,j):
    // (i,j) -> (i, j+1), except the top row wraps to (i + twist, 0).
    let h = |i: usize, j: usize| j * m + i;
    let u = |i: usize, j: usize| m * n + j * m + i;
    for j in 0..n {
        for i in 0..m {
            edges.push((format!("h{i}_{j}"), idx(i, j), idx(i + 1, j)));
        }
    }
    for j in 0..n {
        for i in 0..m {
            let target = if j + 1 == n { idx(i + twist, 0) } else { idx(i, j + 1) };
            edges.push((format!("u{i}_{j}"), idx(i, j), target));
        }
    }
    let mut rotation: BTreeMap<usize, Vec<(usize, bool)>> = BTreeMap::new();
    for j in 0..n {
        for i in 0..m {
            // Anti-clockwise around (i,j): East, North, West, South.
            let east = (h(i, j), false);
            let north = (u(i, j), false);
            let west = (h((i + m - 1) % m, j), true);
            let south = if j == 0 {
                // Incoming vertical edge from the top row, shifted back.
                (u((i + m - twist % m) % m, n - 1), true)
            } else {
                (u(i, j - 1), true)
            };
            rotation.insert(idx(i, j), vec![east, north, west, south]);
        }
    }
    EmbeddedGraph::build(vertices, edges, &rotation)
        .expect("grid torus is a valid toroidal map")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_torus_counts() {
        for (m, n, t) in [(2, 2, 0), (2, 2, 1), (3, 2, 0), (2, 4, 3), (4, 4, 2)] {
            let g = grid_torus(m, n, t);
            let r = m * n;
            assert_eq!(g.vertex_count(), r);
            assert_eq!(g.edge_count(), 2 * r);
            assert_eq!(g.face_count(), r, "grid {m}x{n} twist {t}");
            assert!(!g.has_loops());
        }
    }
}
