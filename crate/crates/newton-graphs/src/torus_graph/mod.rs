//! Combinatorial maps (graphs with rotation systems) cellularly embedded in
//! the torus.
//!
//! A graph is stored dart-wise: edge `e` contributes darts `2e` ("+" end) and
//! `2e + 1` ("-" end). The involution `alpha` swaps the two darts of an edge,
//! and `sigma` is the per-vertex rotation, always stored in the
//! anti-clockwise sense. Faces are the orbits of `sigma ∘ alpha`, which is
//! the classical face traversal rule: arriving at a vertex along a dart, the
//! next edge of the facial walk is the rotation successor of the arrival
//! dart.

mod enumerate;
mod equivalence;
mod io;
mod refine;

pub use enumerate::enumerate_toroidal;
pub use equivalence::{
    canonical_key, equivalences, equivalent, EquivalencePair, EquivalenceWitness,
    OrientationSense,
};
pub use io::{graph_from_json, graph_to_json, graph_to_json_value};
pub use refine::{Level, RefinedGraph};

use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Index of a dart (edge end). Edge `e` owns darts `2e` and `2e + 1`.
pub type Dart = usize;

/// The two darts of an edge are paired by `d ^ 1`.
#[inline]
pub fn alpha(d: Dart) -> Dart {
    d ^ 1
}

/// Edge owning a dart.
#[inline]
pub fn dart_edge(d: Dart) -> usize {
    d >> 1
}

/// Facial-walk convention marker. Purely a report-level label: it never
/// changes how rotations are stored (anti-clockwise) or how faces are
/// traversed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Orientation {
    Clockwise,
    AntiClockwise,
}

impl Orientation {
    pub fn flipped(self) -> Self {
        match self {
            Orientation::Clockwise => Orientation::AntiClockwise,
            Orientation::AntiClockwise => Orientation::Clockwise,
        }
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("malformed rotation: {0}")]
    MalformedRotation(String),
    #[error("graph is not connected")]
    NotConnected,
    #[error("not toroidal: V - E + F = {chi}, expected 0")]
    NotToroidal { chi: i64 },
    #[error("loop obstruction: {0}")]
    LoopObstruction(String),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
}

/// One closed facial walk, stored as the cyclic sequence of departure darts,
/// normalized to start at its smallest dart id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceWalk {
    pub id: usize,
    pub darts: Vec<Dart>,
}

impl FaceWalk {
    pub fn len(&self) -> usize {
        self.darts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.darts.is_empty()
    }

    /// Edge ids traversed by the walk, in walk order (repeats possible).
    pub fn edges(&self) -> Vec<usize> {
        self.darts.iter().map(|&d| dart_edge(d)).collect()
    }
}

/// A connected multigraph with a rotation system, validated as a cellular
/// embedding in the torus (Euler characteristic 0). Immutable after
/// construction.
#[derive(Debug, Clone)]
pub struct EmbeddedGraph {
    vertex_names: Vec<String>,
    edge_names: Vec<String>,
    /// `ends[e] = (head of dart 2e, head of dart 2e+1)`.
    edge_ends: Vec<(usize, usize)>,
    dart_vertex: Vec<usize>,
    sigma: Vec<Dart>,
    sigma_inv: Vec<Dart>,
    orientation: Orientation,
    faces: Vec<FaceWalk>,
    dart_face: Vec<usize>,
}

impl EmbeddedGraph {
    /// Validates and builds a map from named vertices, edges and per-vertex
    /// anti-clockwise rotation lists of dart references `(edge index, end)`.
    ///
    /// Every dart must appear exactly once, at the vertex it is incident
    /// with; the graph must be connected and the face count must satisfy
    /// `V - E + F = 0`.
    pub fn build(
        vertex_names: Vec<String>,
        edges: Vec<(String, usize, usize)>,
        rotation: &BTreeMap<usize, Vec<(usize, bool)>>,
    ) -> Result<Self, GraphError> {
        let nv = vertex_names.len();
        let ne = edges.len();
        {
            let mut seen = BTreeSet::new();
            for name in &vertex_names {
                if !seen.insert(name) {
                    return Err(GraphError::MalformedRotation(format!(
                        "duplicate vertex id {name:?}"
                    )));
                }
            }
            let mut seen = BTreeSet::new();
            for (name, u, v) in &edges {
                if !seen.insert(name) {
                    return Err(GraphError::MalformedRotation(format!(
                        "duplicate edge id {name:?}"
                    )));
                }
                if *u >= nv || *v >= nv {
                    return Err(GraphError::MalformedRotation(format!(
                        "edge {name:?} references an unknown vertex"
                    )));
                }
            }
        }

        let edge_names: Vec<String> = edges.iter().map(|(n, _, _)| n.clone()).collect();
        let edge_ends: Vec<(usize, usize)> = edges.iter().map(|(_, u, v)| (*u, *v)).collect();
        let mut dart_vertex = vec![0usize; 2 * ne];
        for (e, &(u, v)) in edge_ends.iter().enumerate() {
            dart_vertex[2 * e] = u;
            dart_vertex[2 * e + 1] = v;
        }

        // Assemble sigma from the rotation lists, checking exact coverage.
        let mut sigma = vec![usize::MAX; 2 * ne];
        let mut placed = vec![false; 2 * ne];
        for v in 0..nv {
            let list = rotation.get(&v).ok_or_else(|| {
                GraphError::MalformedRotation(format!(
                    "missing rotation for vertex {:?}",
                    vertex_names[v]
                ))
            })?;
            if list.is_empty() {
                return Err(GraphError::MalformedRotation(format!(
                    "empty rotation at vertex {:?}",
                    vertex_names[v]
                )));
            }
            let darts: Vec<Dart> = list
                .iter()
                .map(|&(e, minus)| {
                    if e >= ne {
                        return Err(GraphError::MalformedRotation(format!(
                            "rotation at {:?} references unknown edge index {e}",
                            vertex_names[v]
                        )));
                    }
                    Ok(2 * e + usize::from(minus))
                })
                .collect::<Result<_, _>>()?;
            for &d in &darts {
                if dart_vertex[d] != v {
                    return Err(GraphError::MalformedRotation(format!(
                        "dart {} of edge {:?} listed at vertex {:?} but incident with {:?}",
                        d & 1,
                        edge_names[dart_edge(d)],
                        vertex_names[v],
                        vertex_names[dart_vertex[d]]
                    )));
                }
                if placed[d] {
                    return Err(GraphError::MalformedRotation(format!(
                        "dart of edge {:?} listed twice",
                        edge_names[dart_edge(d)]
                    )));
                }
                placed[d] = true;
            }
            for (i, &d) in darts.iter().enumerate() {
                sigma[d] = darts[(i + 1) % darts.len()];
            }
        }
        if let Some(d) = placed.iter().position(|&p| !p) {
            return Err(GraphError::MalformedRotation(format!(
                "dart of edge {:?} missing from every rotation",
                edge_names[dart_edge(d)]
            )));
        }

        let mut sigma_inv = vec![0usize; 2 * ne];
        for d in 0..2 * ne {
            sigma_inv[sigma[d]] = d;
        }

        // Connectivity over the vertex set.
        if nv > 0 {
            let mut adj = vec![Vec::new(); nv];
            for &(u, v) in &edge_ends {
                adj[u].push(v);
                adj[v].push(u);
            }
            let mut seen = vec![false; nv];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(u) = stack.pop() {
                for &w in &adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            if seen.iter().any(|&s| !s) {
                return Err(GraphError::NotConnected);
            }
        }

        let (faces, dart_face) = trace_faces(&sigma);
        let chi = nv as i64 - ne as i64 + faces.len() as i64;
        if chi != 0 {
            return Err(GraphError::NotToroidal { chi });
        }

        Ok(EmbeddedGraph {
            vertex_names,
            edge_names,
            edge_ends,
            dart_vertex,
            sigma,
            sigma_inv,
            orientation: Orientation::Clockwise,
            faces,
            dart_face,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_names.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn dart_count(&self) -> usize {
        self.sigma.len()
    }

    pub fn vertex_name(&self, v: usize) -> &str {
        &self.vertex_names[v]
    }

    pub fn edge_name(&self, e: usize) -> &str {
        &self.edge_names[e]
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertex_names
    }

    pub fn edge_names(&self) -> &[String] {
        &self.edge_names
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.vertex_names.iter().position(|n| n == name)
    }

    /// Face id such that `name == format!("F{id}")`.
    pub fn face_name(&self, f: usize) -> String {
        format!("F{f}")
    }

    pub fn edge_ends(&self, e: usize) -> (usize, usize) {
        self.edge_ends[e]
    }

    pub fn dart_vertex(&self, d: Dart) -> usize {
        self.dart_vertex[d]
    }

    pub fn dart_face(&self, d: Dart) -> usize {
        self.dart_face[d]
    }

    pub fn rotation_next(&self, d: Dart) -> Dart {
        self.sigma[d]
    }

    pub fn rotation_prev(&self, d: Dart) -> Dart {
        self.sigma_inv[d]
    }

    pub(crate) fn sigma(&self) -> &[Dart] {
        &self.sigma
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Same embedded map, opposite facial-walk convention label.
    pub fn minus(&self) -> EmbeddedGraph {
        let mut g = self.clone();
        g.orientation = g.orientation.flipped();
        g
    }

    /// The facial walks, one per face, cyclically normalized.
    pub fn faces(&self) -> &[FaceWalk] {
        &self.faces
    }

    pub fn degree(&self, v: usize) -> usize {
        self.dart_vertex.iter().filter(|&&w| w == v).count()
    }

    /// Sorted vertex degree multiset.
    pub fn degree_multiset(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.vertex_count()];
        for &v in &self.dart_vertex {
            deg[v] += 1;
        }
        deg.sort_unstable();
        deg
    }

    /// Sorted facial walk length multiset (the dual's degree multiset).
    pub fn face_length_multiset(&self) -> Vec<usize> {
        let mut lens: Vec<usize> = self.faces.iter().map(|w| w.len()).collect();
        lens.sort_unstable();
        lens
    }

    pub fn has_loops(&self) -> bool {
        self.edge_ends.iter().any(|&(u, v)| u == v)
    }

    /// Darts incident with `v` in rotation order, starting at the smallest.
    pub fn rotation_at(&self, v: usize) -> Vec<Dart> {
        let start = (0..self.dart_count())
            .find(|&d| self.dart_vertex[d] == v)
            .expect("vertex with no incident dart");
        let mut out = vec![start];
        let mut d = self.sigma[start];
        while d != start {
            out.push(d);
            d = self.sigma[d];
        }
        out
    }

    /// Distinct vertices on the boundary walk of face `f`, sorted.
    pub fn face_vertices(&self, f: usize) -> Vec<usize> {
        let mut vs: Vec<usize> = self.faces[f]
            .darts
            .iter()
            .map(|&d| self.dart_vertex[d])
            .collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    /// Geometric dual: one vertex per face, one edge crossing each edge.
    ///
    /// The dual rotation is stored, like every rotation here, in the
    /// anti-clockwise sense; around a dual vertex that is the reverse of the
    /// facial-walk order. The facial-walk convention label flips. The dual
    /// may contain loops even when the primal does not.
    pub fn dual(&self) -> EmbeddedGraph {
        let nd = self.dart_count();
        let dart_vertex: Vec<usize> = (0..nd).map(|d| self.dart_face[d]).collect();
        // sigma* = (sigma ∘ alpha)^{-1} = alpha ∘ sigma^{-1}
        let sigma: Vec<Dart> = (0..nd).map(|d| alpha(self.sigma_inv[d])).collect();
        let mut sigma_inv = vec![0usize; nd];
        for d in 0..nd {
            sigma_inv[sigma[d]] = d;
        }
        let edge_ends: Vec<(usize, usize)> = (0..self.edge_count())
            .map(|e| (dart_vertex[2 * e], dart_vertex[2 * e + 1]))
            .collect();
        let (faces, dart_face) = trace_faces(&sigma);
        debug_assert_eq!(faces.len(), self.vertex_count());
        EmbeddedGraph {
            vertex_names: (0..self.face_count()).map(|f| self.face_name(f)).collect(),
            edge_names: self.edge_names.clone(),
            edge_ends,
            dart_vertex,
            sigma,
            sigma_inv,
            orientation: self.orientation.flipped(),
            faces,
            dart_face,
        }
    }

    /// Degree-multiset self-duality test plus the direct equivalence test
    /// against the orientation-flipped dual. Both results are reported.
    ///
    /// Requires a loop-free map whose dual is loop-free and whose facial
    /// walks are all Euler trails of their boundaries.
    pub fn self_dual_check(&self) -> Result<SelfDualReport, GraphError> {
        if self.has_loops() {
            return Err(GraphError::PreconditionFailed("graph has loops".into()));
        }
        let dual = self.dual();
        if dual.has_loops() {
            return Err(GraphError::PreconditionFailed("dual has loops".into()));
        }
        // Dual loop-freeness is exactly "every facial walk uses each edge
        // once", so the Euler-property context is established by the checks
        // above.
        let degrees = self.degree_multiset();
        let dual_degrees = dual.degree_multiset();
        let degree_test = degrees == dual_degrees;
        let witness = equivalent(self, &dual.minus());
        Ok(SelfDualReport {
            degree_test,
            direct_test: witness.is_some(),
            degrees,
            dual_degrees,
            witness,
        })
    }
}

/// Outcome of [`EmbeddedGraph::self_dual_check`].
#[derive(Debug, Clone)]
pub struct SelfDualReport {
    pub degree_test: bool,
    pub direct_test: bool,
    pub degrees: Vec<usize>,
    pub dual_degrees: Vec<usize>,
    pub witness: Option<EquivalenceWitness>,
}

/// Orbits of `sigma ∘ alpha`, i.e. the facial walks, each rotated so the
/// smallest dart id comes first, then sorted by that dart. Returns the walks
/// and the face id of every dart.
fn trace_faces(sigma: &[Dart]) -> (Vec<FaceWalk>, Vec<usize>) {
    let nd = sigma.len();
    let mut seen = vec![false; nd];
    let mut walks: Vec<Vec<Dart>> = Vec::new();
    for start in 0..nd {
        if seen[start] {
            continue;
        }
        let mut walk = Vec::new();
        let mut d = start;
        loop {
            walk.push(d);
            seen[d] = true;
            d = sigma[alpha(d)];
            if d == start {
                break;
            }
        }
        // `start` is the least unseen dart, hence the least of its orbit;
        // the walk is already normalized.
        walks.push(walk);
    }
    walks.sort_by_key(|w| w[0]);
    let mut dart_face = vec![0usize; nd];
    let mut faces = Vec::with_capacity(walks.len());
    for (id, darts) in walks.into_iter().enumerate() {
        for &d in &darts {
            dart_face[d] = id;
        }
        faces.push(FaceWalk { id, darts });
    }
    (faces, dart_face)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn torus_rose_has_one_face_of_length_four() {
        let g = fixtures::torus_rose();
        assert_eq!(g.vertex_count(), 1);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.face_count(), 1);
        assert_eq!(g.faces()[0].len(), 4);
        // Boundary word a b a^{-1} b^{-1}: every edge appears twice.
        let edges = g.faces()[0].edges();
        assert_eq!(edges.iter().filter(|&&e| e == 0).count(), 2);
        assert_eq!(edges.iter().filter(|&&e| e == 1).count(), 2);
    }

    #[test]
    fn single_loop_is_rejected_as_not_toroidal() {
        let mut rotation = BTreeMap::new();
        rotation.insert(0usize, vec![(0usize, false), (0usize, true)]);
        let err = EmbeddedGraph::build(
            vec!["v".into()],
            vec![("a".into(), 0, 0)],
            &rotation,
        )
        .unwrap_err();
        match err {
            GraphError::NotToroidal { chi } => assert_eq!(chi, 2),
            other => panic!("expected NotToroidal, got {other:?}"),
        }
    }

    #[test]
    fn g2_has_two_quadrilateral_faces() {
        let g = fixtures::g2();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g.face_count(), 2);
        for w in g.faces() {
            assert_eq!(w.len(), 4);
        }
    }

    #[test]
    fn g2_rotation_search_confirms_fixture_choice() {
        // Cyclic orders at the second vertex, first dart pinned: 3! = 6
        // candidates; the fixture's choice must give exactly 2 faces.
        let perms: Vec<Vec<usize>> = permutations(&[1, 2, 3]);
        let mut two_face_orders = Vec::new();
        for p in perms {
            let mut order = vec![0usize];
            order.extend(&p);
            let mut rotation = BTreeMap::new();
            rotation.insert(
                0usize,
                vec![(0usize, false), (1, false), (2, false), (3, false)],
            );
            rotation.insert(1usize, order.iter().map(|&e| (e, true)).collect());
            let built = EmbeddedGraph::build(
                vec!["u".into(), "v".into()],
                vec![
                    ("a".into(), 0, 1),
                    ("b".into(), 0, 1),
                    ("c".into(), 0, 1),
                    ("d".into(), 0, 1),
                ],
                &rotation,
            );
            if let Ok(g) = built {
                if g.face_count() == 2 {
                    two_face_orders.push(order);
                }
            }
        }
        assert!(two_face_orders.contains(&vec![0, 1, 2, 3]));
    }

    fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
        if items.is_empty() {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for (i, &x) in items.iter().enumerate() {
            let mut rest = items.to_vec();
            rest.remove(i);
            for mut tail in permutations(&rest) {
                tail.insert(0, x);
                out.push(tail);
            }
        }
        out
    }

    #[test]
    fn walk_lengths_sum_to_twice_edge_count() {
        for g in [fixtures::torus_rose(), fixtures::g2(), fixtures::grid_torus(2, 3, 0)] {
            let total: usize = g.faces().iter().map(|w| w.len()).sum();
            assert_eq!(total, 2 * g.edge_count());
        }
    }

    #[test]
    fn dual_of_torus_rose_is_a_torus_rose() {
        let d = fixtures::torus_rose().dual();
        assert_eq!(d.vertex_count(), 1);
        assert_eq!(d.edge_count(), 2);
        assert_eq!(d.face_count(), 1);
        assert!(d.has_loops());
        assert_eq!(d.orientation(), Orientation::AntiClockwise);
    }

    #[test]
    fn dual_of_g2_is_loop_free_with_two_faces() {
        let d = fixtures::g2().dual();
        assert_eq!(d.vertex_count(), 2);
        assert_eq!(d.edge_count(), 4);
        assert_eq!(d.face_count(), 2);
        assert!(!d.has_loops());
    }

    #[test]
    fn double_dual_is_orientation_preserving_equivalent() {
        for g in [fixtures::g2(), fixtures::grid_torus(2, 2, 1), fixtures::torus_rose()] {
            let dd = g.dual().dual();
            assert_eq!(dd.orientation(), g.orientation());
            let w = equivalent(&g, &dd).expect("double dual must be equivalent");
            assert_eq!(w.orientation, OrientationSense::Preserving);
        }
    }

    #[test]
    fn dual_face_lengths_match_primal_degrees() {
        for g in [fixtures::g2(), fixtures::grid_torus(3, 2, 1)] {
            assert_eq!(g.dual().face_length_multiset(), g.degree_multiset());
        }
    }

    #[test]
    fn g2_self_dual_by_both_tests() {
        let report = fixtures::g2().self_dual_check().unwrap();
        assert!(report.degree_test);
        assert!(report.direct_test);
        assert_eq!(report.degrees, vec![4, 4]);
        assert_eq!(report.dual_degrees, vec![4, 4]);
    }

    #[test]
    fn faces_are_reproduced_bit_identically_from_the_rotation() {
        let g = fixtures::g2();
        let again = fixtures::g2();
        assert_eq!(g.faces(), again.faces());
        let grid = fixtures::grid_torus(2, 4, 1);
        assert_eq!(grid.faces(), fixtures::grid_torus(2, 4, 1).faces());
    }
}
