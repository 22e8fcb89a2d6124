//! Exhaustive face-subset oracle for the Hall condition, independent of the
//! matching-based decider. For every nonempty proper face subset `J` it
//! checks `|J| < |V(G(J))|` directly and also records the interior bound
//! `|Int G(J)| < |J|`; the two are equivalent in the presence of the angle
//! property, so both are kept visible.

use crate::threads;
use crate::torus_graph::EmbeddedGraph;

#[derive(Debug, Clone)]
pub struct BruteForceReport {
    /// `|J| < |V(G(J))|` for every nonempty proper `J`.
    pub holds: bool,
    /// Face subsets violating the vertex bound, as sorted face-id lists.
    pub violations: Vec<Vec<usize>>,
    /// `|Int G(J)| < |J|` for every nonempty proper `J`.
    pub interior_bound_holds: bool,
    pub subsets_checked: u64,
}

/// Faces incident with each vertex (faces whose boundary walk visits it).
pub fn vertex_face_incidence(g: &EmbeddedGraph) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); g.vertex_count()];
    for walk in g.faces() {
        for &d in &walk.darts {
            let v = g.dart_vertex(d);
            if out[v].last() != Some(&walk.id) {
                out[v].push(walk.id);
            }
        }
    }
    for list in &mut out {
        list.sort_unstable();
        list.dedup();
    }
    out
}

/// Vertices of the subgraph generated by the faces in `mask`.
fn subgraph_vertices(face_vertices: &[Vec<usize>], mask: u64) -> Vec<usize> {
    let mut vs: Vec<usize> = Vec::new();
    for (f, verts) in face_vertices.iter().enumerate() {
        if mask & (1 << f) != 0 {
            vs.extend_from_slice(verts);
        }
    }
    vs.sort_unstable();
    vs.dedup();
    vs
}

pub fn hall_brute_force(g: &EmbeddedGraph) -> BruteForceReport {
    let r = g.face_count();
    assert!(r <= 20, "exhaustive oracle is limited to small orders");
    let face_vertices: Vec<Vec<usize>> = (0..r).map(|f| g.face_vertices(f)).collect();
    let vertex_faces = vertex_face_incidence(g);

    let full: u64 = if r == 64 { u64::MAX } else { (1u64 << r) - 1 };
    let masks: Vec<u64> = (1..full).collect();
    let workers = threads::worker_count();
    let ranges = threads::chunk_ranges(masks.len(), workers);

    let scan = |range: std::ops::Range<usize>| {
        let mut violations = Vec::new();
        let mut interior_ok = true;
        for &mask in &masks[range] {
            let j_size = mask.count_ones() as usize;
            let verts = subgraph_vertices(&face_vertices, mask);
            if verts.len() <= j_size {
                violations.push(mask);
            }
            let interior = verts
                .iter()
                .filter(|&&v| {
                    vertex_faces[v]
                        .iter()
                        .all(|&f| mask & (1 << f) != 0)
                })
                .count();
            if interior >= j_size {
                interior_ok = false;
            }
        }
        (violations, interior_ok)
    };

    let mut all_violations: Vec<u64> = Vec::new();
    let mut interior_bound_holds = true;
    if ranges.len() <= 1 {
        let (v, i) = scan(0..masks.len());
        all_violations = v;
        interior_bound_holds = i;
    } else {
        let results: Vec<(Vec<u64>, bool)> = std::thread::scope(|scope| {
            let handles: Vec<_> = ranges
                .into_iter()
                .map(|range| scope.spawn(|| scan(range)))
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        for (v, i) in results {
            all_violations.extend(v);
            interior_bound_holds &= i;
        }
        all_violations.sort_unstable();
    }

    let violations: Vec<Vec<usize>> = all_violations
        .iter()
        .map(|&mask| (0..r).filter(|&f| mask & (1 << f) != 0).collect())
        .collect();
    BruteForceReport {
        holds: violations.is_empty(),
        violations,
        interior_bound_holds,
        subsets_checked: masks.len() as u64,
    }
}

/// Interior and exterior vertex counts of the subgraph generated by the
/// faces in `j` (sorted face ids).
pub fn interior_exterior(g: &EmbeddedGraph, j: &[usize]) -> (usize, usize) {
    let vertex_faces = vertex_face_incidence(g);
    let in_j = |f: usize| j.binary_search(&f).is_ok();
    let mut verts: Vec<usize> = Vec::new();
    for &f in j {
        verts.extend(g.face_vertices(f));
    }
    verts.sort_unstable();
    verts.dedup();
    let interior = verts
        .iter()
        .filter(|&&v| vertex_faces[v].iter().all(|&f| in_j(f)))
        .count();
    (interior, verts.len() - interior)
}
