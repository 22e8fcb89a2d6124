//! Common refinement of a map and its dual: a three-level graph whose
//! vertices are the primal vertices (Level 1), one crossing point per
//! primal/dual edge pair (Level 2) and the dual vertices (Level 3), with all
//! faces quadrilateral.

use super::{alpha, dart_edge, EmbeddedGraph, GraphError};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Level {
    One,
    Two,
    Three,
}

/// The refinement `P(G)`: for a primal map with `r` vertices and `2r` edges
/// it has `4r` vertices, `8r` directed edges and `4r` quadrilateral faces,
/// each incident with exactly one Level-1 vertex, one Level-3 vertex in
/// opposite position and two distinct Level-2 vertices.
#[derive(Debug, Clone)]
pub struct RefinedGraph {
    graph: EmbeddedGraph,
    levels: Vec<Level>,
    directed: Vec<(usize, usize)>,
    quads: Vec<[usize; 4]>,
}

impl RefinedGraph {
    /// The refinement as a toroidal map in its own right.
    pub fn graph(&self) -> &EmbeddedGraph {
        &self.graph
    }

    pub fn level(&self, p_vertex: usize) -> Level {
        self.levels[p_vertex]
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// Directed edges `(from, to)`: every edge either ends at Level 1 or
    /// begins at Level 3.
    pub fn directed_edges(&self) -> &[(usize, usize)] {
        &self.directed
    }

    /// One quadruple per face, in walk order `[L1, L2, L3, L2]`.
    pub fn quad_faces(&self) -> &[[usize; 4]] {
        &self.quads
    }

    /// Quads incident with a Level-3 vertex, in rotation order around it.
    pub fn quads_around_level3(&self, p_vertex: usize) -> Vec<[usize; 4]> {
        assert_eq!(self.levels[p_vertex], Level::Three);
        self.graph
            .rotation_at(p_vertex)
            .into_iter()
            .map(|d| self.quads[self.graph.dart_face(d)])
            .collect()
    }
}

impl EmbeddedGraph {
    /// Builds the common refinement. Requires both the graph and its dual to
    /// be loop-free, so the four neighbours of every Level-2 vertex are
    /// distinct.
    pub fn refine(&self) -> Result<RefinedGraph, GraphError> {
        if self.has_loops() {
            return Err(GraphError::LoopObstruction("graph has a loop".into()));
        }
        for e in 0..self.edge_count() {
            if self.dart_face(2 * e) == self.dart_face(2 * e + 1) {
                return Err(GraphError::LoopObstruction(format!(
                    "dual loop at edge {:?} (both sides bound face F{})",
                    self.edge_name(e),
                    self.dart_face(2 * e)
                )));
            }
        }

        let nv = self.vertex_count();
        let ne = self.edge_count();
        let nf = self.face_count();
        let nd = self.dart_count();
        let l1 = |v: usize| v;
        let l2 = |e: usize| nv + e;
        let l3 = |f: usize| nv + ne + f;

        let mut names: Vec<String> = Vec::with_capacity(nv + ne + nf);
        names.extend(self.vertex_names().iter().cloned());
        names.extend((0..ne).map(|e| format!("s:{}", self.edge_name(e))));
        names.extend((0..nf).map(|f| self.face_name(f)));

        // P-edge index d in 0..nd joins the crossing of edge(d) to the
        // vertex of d; index nd + d joins it to the face of d. The crossing
        // is the "+" end of both.
        let mut edges: Vec<(String, usize, usize)> = Vec::with_capacity(2 * nd);
        for d in 0..nd {
            edges.push((
                format!("sv:{}:{}", self.edge_name(dart_edge(d)), d & 1),
                l2(dart_edge(d)),
                l1(self.dart_vertex(d)),
            ));
        }
        for d in 0..nd {
            edges.push((
                format!("sf:{}:{}", self.edge_name(dart_edge(d)), d & 1),
                l2(dart_edge(d)),
                l3(self.dart_face(d)),
            ));
        }

        let mut rotation: BTreeMap<usize, Vec<(usize, bool)>> = BTreeMap::new();
        for v in 0..nv {
            rotation.insert(
                l1(v),
                self.rotation_at(v).into_iter().map(|d| (d, true)).collect(),
            );
        }
        // Around a crossing the four branches alternate: towards the vertex
        // of d, the face of d, the vertex of alpha(d), the face of alpha(d).
        for e in 0..ne {
            let d = 2 * e;
            rotation.insert(
                l2(e),
                vec![
                    (d, false),
                    (nd + d, false),
                    (alpha(d), false),
                    (nd + alpha(d), false),
                ],
            );
        }
        // Around a dual vertex the crossings appear in reversed walk order.
        for f in 0..nf {
            let walk = &self.faces()[f].darts;
            let mut order = vec![walk[0]];
            order.extend(walk[1..].iter().rev());
            rotation.insert(
                l3(f),
                order.into_iter().map(|d| (nd + d, true)).collect(),
            );
        }

        let graph = EmbeddedGraph::build(names, edges, &rotation)?;

        let mut levels = Vec::with_capacity(nv + ne + nf);
        levels.extend(std::iter::repeat(Level::One).take(nv));
        levels.extend(std::iter::repeat(Level::Two).take(ne));
        levels.extend(std::iter::repeat(Level::Three).take(nf));

        let mut directed = Vec::with_capacity(2 * nd);
        for d in 0..nd {
            directed.push((l2(dart_edge(d)), l1(self.dart_vertex(d))));
        }
        for d in 0..nd {
            directed.push((l3(self.dart_face(d)), l2(dart_edge(d))));
        }

        // Every face of the refinement is the quadrilateral of one primal
        // sector; read the corners off the traced walks and check the level
        // pattern.
        let mut quads = Vec::with_capacity(graph.face_count());
        for walk in graph.faces() {
            assert_eq!(walk.len(), 4, "refinement face is not a quadrilateral");
            let mut corners = [0usize; 4];
            for (i, &d) in walk.darts.iter().enumerate() {
                corners[i] = graph.dart_vertex(d);
            }
            let pat: Vec<Level> = corners.iter().map(|&c| levels[c]).collect();
            let l1_pos = pat
                .iter()
                .position(|&l| l == Level::One)
                .expect("quad without a Level-1 corner");
            corners.rotate_left(l1_pos);
            let pat: Vec<Level> = corners.iter().map(|&c| levels[c]).collect();
            assert_eq!(
                pat,
                vec![Level::One, Level::Two, Level::Three, Level::Two],
                "quad corner pattern"
            );
            assert_ne!(corners[1], corners[3], "quad with coincident crossings");
            quads.push(corners);
        }
        assert_eq!(quads.len(), nd, "refinement must have one face per sector");

        Ok(RefinedGraph {
            graph,
            levels,
            directed,
            quads,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn refined_g2_has_the_4r_8r_4r_profile() {
        let g = fixtures::g2();
        let p = g.refine().unwrap();
        assert_eq!(p.graph().vertex_count(), 8);
        assert_eq!(p.graph().edge_count(), 16);
        assert_eq!(p.graph().face_count(), 8);
        assert_eq!(p.directed_edges().len(), 16);
        assert_eq!(p.quad_faces().len(), 8);
    }

    #[test]
    fn torus_rose_refinement_is_obstructed_by_loops() {
        match fixtures::torus_rose().refine() {
            Err(GraphError::LoopObstruction(_)) => {}
            other => panic!("expected LoopObstruction, got {other:?}"),
        }
    }

    #[test]
    fn level2_vertices_have_two_distinct_neighbours_on_each_side() {
        let g = fixtures::grid_torus(2, 3, 1);
        let p = g.refine().unwrap();
        let map = p.graph();
        for v in 0..map.vertex_count() {
            if p.level(v) != Level::Two {
                continue;
            }
            let darts = map.rotation_at(v);
            assert_eq!(darts.len(), 4);
            let mut ones = Vec::new();
            let mut threes = Vec::new();
            for d in darts {
                let w = map.dart_vertex(super::alpha(d));
                match p.level(w) {
                    Level::One => ones.push(w),
                    Level::Three => threes.push(w),
                    Level::Two => panic!("crossing adjacent to a crossing"),
                }
            }
            assert_eq!(ones.len(), 2);
            assert_eq!(threes.len(), 2);
            assert_ne!(ones[0], ones[1]);
            assert_ne!(threes[0], threes[1]);
        }
    }

    #[test]
    fn directed_edges_end_at_level1_or_begin_at_level3() {
        let p = fixtures::g2().refine().unwrap();
        for &(from, to) in p.directed_edges() {
            let ok = p.level(to) == Level::One || p.level(from) == Level::Three;
            assert!(ok);
        }
    }

    #[test]
    fn primal_faces_decompose_into_the_quads_around_their_dual_vertex() {
        let g = fixtures::g2();
        let p = g.refine().unwrap();
        let nv = g.vertex_count();
        let ne = g.edge_count();
        for f in 0..g.face_count() {
            let l3 = nv + ne + f;
            let quads = p.quads_around_level3(l3);
            assert_eq!(quads.len(), g.faces()[f].len());
            // Each surrounding quad pairs the dual vertex with one sector of
            // the primal walk: crossing of the arriving edge, corner vertex,
            // crossing of the departing edge.
            let walk = &g.faces()[f].darts;
            let sectors: Vec<[usize; 4]> = walk
                .iter()
                .map(|&d| {
                    let dep = g.rotation_next(super::alpha(d));
                    [
                        g.dart_vertex(dep),
                        nv + dart_edge(dep),
                        l3,
                        nv + dart_edge(d),
                    ]
                })
                .collect();
            // The rotation around the dual vertex runs through the same
            // sectors, cyclically, in reversed walk order.
            let mut rev = sectors.clone();
            rev[1..].reverse();
            let start = rev
                .iter()
                .position(|q| *q == quads[0])
                .expect("first quad must be a sector of the primal walk");
            for (i, q) in quads.iter().enumerate() {
                assert_eq!(*q, rev[(start + i) % rev.len()]);
            }
        }
    }

    #[test]
    fn refinement_counts_scale_with_order() {
        let g = fixtures::grid_torus(2, 2, 0);
        let r = g.vertex_count();
        let p = g.refine().unwrap();
        assert_eq!(p.graph().vertex_count(), 4 * r);
        assert_eq!(p.graph().edge_count(), 8 * r);
        assert_eq!(p.graph().face_count(), 4 * r);
    }
}
