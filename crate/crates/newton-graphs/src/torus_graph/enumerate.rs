//! Exhaustive enumeration of loop-free toroidal maps with `r` vertices and
//! `2r` edges, up to equivalence in either orientation sense. Used by the
//! verification corpus.

use super::equivalence::canonical_key_raw;
use super::{alpha, EmbeddedGraph};
use crate::threads;
use std::collections::{BTreeMap, HashSet};

/// Connected loop-free multigraph shapes: multiplicity per vertex pair.
fn edge_shapes(r: usize, total_edges: usize) -> Vec<Vec<usize>> {
    let pairs: Vec<(usize, usize)> = (0..r)
        .flat_map(|i| ((i + 1)..r).map(move |j| (i, j)))
        .collect();
    let mut out = Vec::new();
    let mut counts = vec![0usize; pairs.len()];
    fn rec(
        idx: usize,
        remaining: usize,
        pairs: &[(usize, usize)],
        counts: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        r: usize,
    ) {
        if idx == pairs.len() {
            if remaining == 0 && connected(pairs, counts, r) {
                out.push(counts.clone());
            }
            return;
        }
        for m in 0..=remaining {
            counts[idx] = m;
            rec(idx + 1, remaining - m, pairs, counts, out, r);
        }
        counts[idx] = 0;
    }
    rec(0, total_edges, &pairs, &mut counts, &mut out, r);
    out
}

fn connected(pairs: &[(usize, usize)], counts: &[usize], r: usize) -> bool {
    let mut adj = vec![Vec::new(); r];
    for (k, &(i, j)) in pairs.iter().enumerate() {
        if counts[k] > 0 {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    let mut seen = vec![false; r];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, x.clone());
            out.push(tail);
        }
    }
    out
}

fn count_faces(sigma: &[usize]) -> usize {
    let mut seen = vec![false; sigma.len()];
    let mut faces = 0;
    for start in 0..sigma.len() {
        if seen[start] {
            continue;
        }
        faces += 1;
        let mut d = start;
        while !seen[d] {
            seen[d] = true;
            d = sigma[alpha(d)];
        }
    }
    faces
}

/// All loop-free toroidal maps with `r` vertices and `2r` edges, one
/// representative per equivalence class, in a deterministic order.
pub fn enumerate_toroidal(r: usize) -> Vec<EmbeddedGraph> {
    assert!((2..=4).contains(&r), "corpus enumeration supports r in 2..=4");
    let total_edges = 2 * r;
    let pairs: Vec<(usize, usize)> = (0..r)
        .flat_map(|i| ((i + 1)..r).map(move |j| (i, j)))
        .collect();
    let shapes = edge_shapes(r, total_edges);

    let per_shape = |counts: &Vec<usize>| -> Vec<(Vec<usize>, Vec<usize>)> {
        // Edge list in deterministic order; darts 2e at the smaller end.
        let mut ends: Vec<(usize, usize)> = Vec::with_capacity(total_edges);
        for (k, &(i, j)) in pairs.iter().enumerate() {
            for _ in 0..counts[k] {
                ends.push((i, j));
            }
        }
        let mut incident = vec![Vec::new(); r];
        for (e, &(i, j)) in ends.iter().enumerate() {
            incident[i].push(2 * e);
            incident[j].push(2 * e + 1);
        }
        if incident.iter().any(|l| l.is_empty()) {
            return Vec::new();
        }
        // Cyclic orders: first incident dart pinned, tail permuted.
        let per_vertex: Vec<Vec<Vec<usize>>> = incident
            .iter()
            .map(|darts| {
                permutations(&darts[1..])
                    .into_iter()
                    .map(|tail| {
                        let mut rot = vec![darts[0]];
                        rot.extend(tail);
                        rot
                    })
                    .collect()
            })
            .collect();
        let mut found: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
        let mut local_keys: HashSet<Vec<u32>> = HashSet::new();
        let mut choice = vec![0usize; r];
        loop {
            let mut sigma = vec![0usize; 2 * total_edges];
            for v in 0..r {
                let rot = &per_vertex[v][choice[v]];
                for (i, &d) in rot.iter().enumerate() {
                    sigma[d] = rot[(i + 1) % rot.len()];
                }
            }
            if count_faces(&sigma) == r && local_keys.insert(canonical_key_raw(&sigma)) {
                found.push((sigma, ends.iter().flat_map(|&(i, j)| [i, j]).collect()));
            }
            // Odometer increment.
            let mut v = 0;
            loop {
                if v == r {
                    return found;
                }
                choice[v] += 1;
                if choice[v] < per_vertex[v].len() {
                    break;
                }
                choice[v] = 0;
                v += 1;
            }
        }
    };

    let workers = threads::worker_count();
    let ranges = threads::chunk_ranges(shapes.len(), workers);
    let chunks: Vec<Vec<(Vec<usize>, Vec<usize>)>> = if ranges.len() <= 1 {
        vec![shapes.iter().flat_map(|s| per_shape(s)).collect()]
    } else {
        let per_shape = &per_shape;
        let shapes = &shapes;
        std::thread::scope(|scope| {
            let handles: Vec<_> = ranges
                .into_iter()
                .map(|range| {
                    scope.spawn(move || {
                        shapes[range]
                            .iter()
                            .flat_map(per_shape)
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        })
    };

    let mut keys: HashSet<Vec<u32>> = HashSet::new();
    let mut reps = Vec::new();
    for chunk in chunks {
        for (sigma, flat_ends) in chunk {
            if keys.insert(canonical_key_raw(&sigma)) {
                reps.push(build_from_sigma(r, &sigma, &flat_ends));
            }
        }
    }
    reps
}

fn build_from_sigma(r: usize, sigma: &[usize], flat_ends: &[usize]) -> EmbeddedGraph {
    let ne = sigma.len() / 2;
    let vertices: Vec<String> = (0..r).map(|v| format!("v{v}")).collect();
    let edges: Vec<(String, usize, usize)> = (0..ne)
        .map(|e| (format!("e{e}"), flat_ends[2 * e], flat_ends[2 * e + 1]))
        .collect();
    let mut rotation: BTreeMap<usize, Vec<(usize, bool)>> = BTreeMap::new();
    let mut placed = vec![false; sigma.len()];
    for d0 in 0..sigma.len() {
        if placed[d0] {
            continue;
        }
        let v = flat_ends[d0];
        let mut list = Vec::new();
        let mut d = d0;
        loop {
            placed[d] = true;
            list.push((d >> 1, d & 1 == 1));
            d = sigma[d];
            if d == d0 {
                break;
            }
        }
        rotation.insert(v, list);
    }
    EmbeddedGraph::build(vertices, edges, &rotation).expect("enumerated map is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_two_corpus_is_small_and_valid() {
        let reps = enumerate_toroidal(2);
        assert!(!reps.is_empty());
        for g in &reps {
            assert_eq!(g.vertex_count(), 2);
            assert_eq!(g.edge_count(), 4);
            assert_eq!(g.face_count(), 2);
            assert!(!g.has_loops());
        }
        // The aligned-rotation fixture must appear as some class.
        let g2 = crate::fixtures::g2();
        assert!(reps
            .iter()
            .any(|g| crate::torus_graph::equivalent(g, &g2).is_some()));
    }

    #[test]
    fn order_three_corpus_contains_inequivalent_classes() {
        let reps = enumerate_toroidal(3);
        assert!(reps.len() > 1);
        for g in &reps {
            assert_eq!(
                (g.vertex_count(), g.edge_count(), g.face_count()),
                (3, 6, 3)
            );
        }
    }
}
