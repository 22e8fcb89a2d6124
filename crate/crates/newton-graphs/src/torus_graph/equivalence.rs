//! Orientation-respecting equivalence of embedded graphs by canonical
//! labeling of the underlying combinatorial maps.
//!
//! For each choice of root dart the darts are relabeled breadth-first along
//! the rotation and the edge involution; the resulting permutation tables,
//! read in label order, form a code that is invariant under relabeling. Two
//! maps are orientation-preserving equivalent iff their minimal codes agree;
//! comparing against the mirror (inverted rotations) decides the
//! orientation-reversing case. O(E^2) overall.

use super::{alpha, dart_edge, Dart, EmbeddedGraph};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrientationSense {
    Preserving,
    Reversing,
}

/// A concrete equivalence: vertex and edge bijections plus the sense in
/// which rotations are respected (`pi'_{phi(v)} = phi ∘ pi_v ∘ phi^{-1}` for
/// preserving, with `pi_v^{-1}` for reversing).
#[derive(Debug, Clone, serde::Serialize)]
pub struct EquivalenceWitness {
    pub vertex_map: BTreeMap<String, String>,
    pub edge_map: BTreeMap<String, String>,
    pub orientation: OrientationSense,
}

/// Both senses, decided independently.
#[derive(Debug, Clone)]
pub struct EquivalencePair {
    pub preserving: Option<EquivalenceWitness>,
    pub reversing: Option<EquivalenceWitness>,
}

/// Trace code of the map `(rot, alpha)` rooted at `root`: labels darts in
/// first-visit order, visiting `rot` then `alpha` successors, and returns
/// for each label the labels of its two successors.
fn code_from_root(rot: &[Dart], root: Dart) -> (Vec<u32>, Vec<usize>) {
    let nd = rot.len();
    let mut label = vec![u32::MAX; nd];
    let mut order: Vec<usize> = Vec::with_capacity(nd);
    label[root] = 0;
    order.push(root);
    let mut next = 1u32;
    let mut i = 0usize;
    while i < order.len() {
        let d = order[i];
        for s in [rot[d], alpha(d)] {
            if label[s] == u32::MAX {
                label[s] = next;
                next += 1;
                order.push(s);
            }
        }
        i += 1;
    }
    debug_assert_eq!(order.len(), nd, "map must be connected");
    let mut code = Vec::with_capacity(2 * nd);
    for &d in &order {
        code.push(label[rot[d]]);
        code.push(label[alpha(d)]);
    }
    (code, order)
}

/// Minimal code over all roots, along with the visit order realizing it.
fn min_code(rot: &[Dart]) -> (Vec<u32>, Vec<usize>) {
    let mut best: Option<(Vec<u32>, Vec<usize>)> = None;
    for root in 0..rot.len() {
        let cand = code_from_root(rot, root);
        if best.as_ref().map_or(true, |b| cand.0 < b.0) {
            best = Some(cand);
        }
    }
    best.expect("non-empty dart set")
}

fn inverse_perm(p: &[Dart]) -> Vec<Dart> {
    let mut inv = vec![0usize; p.len()];
    for (d, &pd) in p.iter().enumerate() {
        inv[pd] = d;
    }
    inv
}

/// Canonical key of the map up to equivalence in either sense. Used to
/// deduplicate enumerated corpora.
pub fn canonical_key(g: &EmbeddedGraph) -> Vec<u32> {
    canonical_key_raw(g.sigma())
}

pub(crate) fn canonical_key_raw(sigma: &[Dart]) -> Vec<u32> {
    let (a, _) = min_code(sigma);
    let (b, _) = min_code(&inverse_perm(sigma));
    a.min(b)
}

fn witness_from_orders(
    g: &EmbeddedGraph,
    h: &EmbeddedGraph,
    order_g: &[usize],
    order_h: &[usize],
    orientation: OrientationSense,
) -> EquivalenceWitness {
    // order_g[i] <-> order_h[i] is a dart bijection conjugating the maps.
    let mut vertex_map = BTreeMap::new();
    let mut edge_map = BTreeMap::new();
    for i in 0..order_g.len() {
        let dg = order_g[i];
        let dh = order_h[i];
        vertex_map
            .entry(g.vertex_name(g.dart_vertex(dg)).to_string())
            .or_insert_with(|| h.vertex_name(h.dart_vertex(dh)).to_string());
        edge_map
            .entry(g.edge_name(dart_edge(dg)).to_string())
            .or_insert_with(|| h.edge_name(dart_edge(dh)).to_string());
    }
    EquivalenceWitness {
        vertex_map,
        edge_map,
        orientation,
    }
}

/// Decides equivalence in both senses and returns the witnesses found.
pub fn equivalences(g: &EmbeddedGraph, h: &EmbeddedGraph) -> EquivalencePair {
    let mut pair = EquivalencePair {
        preserving: None,
        reversing: None,
    };
    if g.dart_count() != h.dart_count()
        || g.vertex_count() != h.vertex_count()
        || g.face_count() != h.face_count()
    {
        return pair;
    }
    if g.dart_count() == 0 {
        return pair;
    }
    let sigma_g = g.sigma().to_vec();
    let sigma_h = h.sigma().to_vec();
    let (code_g, order_g) = min_code(&sigma_g);
    let (code_h, order_h) = min_code(&sigma_h);
    if code_g == code_h {
        pair.preserving = Some(witness_from_orders(
            g,
            h,
            &order_g,
            &order_h,
            OrientationSense::Preserving,
        ));
    }
    let (code_h_rev, order_h_rev) = min_code(&inverse_perm(&sigma_h));
    if code_g == code_h_rev {
        pair.reversing = Some(witness_from_orders(
            g,
            h,
            &order_g,
            &order_h_rev,
            OrientationSense::Reversing,
        ));
    }
    pair
}

/// A single witness if the graphs are equivalent in either sense;
/// orientation-preserving witnesses are preferred when both exist.
pub fn equivalent(g: &EmbeddedGraph, h: &EmbeddedGraph) -> Option<EquivalenceWitness> {
    let pair = equivalences(g, h);
    pair.preserving.or(pair.reversing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use std::collections::BTreeMap as Map;

    #[test]
    fn identity_witness_is_preserving() {
        let g = fixtures::g2();
        let w = equivalent(&g, &g).expect("graph equivalent to itself");
        assert_eq!(w.orientation, OrientationSense::Preserving);
        for (k, v) in &w.vertex_map {
            assert_eq!(k, v);
        }
        for (k, v) in &w.edge_map {
            assert_eq!(k, v);
        }
    }

    #[test]
    fn size_mismatch_gives_no_witness() {
        assert!(equivalent(&fixtures::torus_rose(), &fixtures::g2()).is_none());
    }

    #[test]
    fn relabeled_mirror_of_g2_admits_a_reversing_witness() {
        // Same four parallel edges, both rotations reversed, fresh names.
        let mut rotation = Map::new();
        rotation.insert(
            0usize,
            vec![(3usize, false), (2, false), (1, false), (0, false)],
        );
        rotation.insert(1usize, vec![(3usize, true), (2, true), (1, true), (0, true)]);
        let mirrored = crate::EmbeddedGraph::build(
            vec!["x".into(), "y".into()],
            vec![
                ("p".into(), 0, 1),
                ("q".into(), 0, 1),
                ("r".into(), 0, 1),
                ("s".into(), 0, 1),
            ],
            &rotation,
        )
        .unwrap();
        let pair = equivalences(&fixtures::g2(), &mirrored);
        assert!(pair.reversing.is_some());
    }

    #[test]
    fn equivalence_is_an_equivalence_relation_on_the_small_corpus() {
        let mut corpus = vec![
            fixtures::g2(),
            fixtures::g2().dual(),
            fixtures::torus_rose(),
            fixtures::grid_torus(2, 2, 0),
            fixtures::grid_torus(2, 2, 1),
            fixtures::grid_torus(2, 3, 0),
        ];
        corpus.push(corpus[0].dual().dual());
        for g in &corpus {
            assert!(equivalent(g, g).is_some(), "reflexivity");
        }
        let n = corpus.len();
        let mut eq = vec![vec![false; n]; n];
        for i in 0..n {
            for j in 0..n {
                eq[i][j] = equivalent(&corpus[i], &corpus[j]).is_some();
            }
        }
        for i in 0..n {
            for j in 0..n {
                assert_eq!(eq[i][j], eq[j][i], "symmetry at ({i},{j})");
                for k in 0..n {
                    if eq[i][j] && eq[j][k] {
                        assert!(eq[i][k], "transitivity at ({i},{j},{k})");
                    }
                }
            }
        }
    }

    #[test]
    fn canonical_key_separates_distinct_classes() {
        let a = canonical_key(&fixtures::g2());
        let b = canonical_key(&fixtures::torus_rose());
        assert_ne!(a, b);
        assert_eq!(a, canonical_key(&fixtures::g2()));
    }
}
