//! The two combinatorial properties that characterize the graphs of
//! structurally stable elliptic Newton flows, and the polynomial-time
//! membership decision built on them.
//!
//! * Euler property: every facial walk traverses each boundary edge exactly
//!   once (equivalently, the dual is loop-free).
//! * Angle property: strictly positive sector weights exist with unit sums
//!   at every vertex and over every face. Decided combinatorially through
//!   the strong Hall condition `|J| < |V(G(J))|` via bipartite matching;
//!   witnessed by an angle assignment on success and by a Stiemke-style
//!   sign vector on failure.

pub mod angles;
pub mod brute;
mod matching;
mod simplex;

pub use angles::{
    sector_key, sectors, verify_angles, verify_stiemke, AngleAssignment, Sector,
    StiemkeCertificate, MIN_ANGLE, ROW_SUM_TOL,
};
pub use brute::{hall_brute_force, interior_exterior, BruteForceReport};

use crate::torus_graph::EmbeddedGraph;
use matching::{alternating_search, hopcroft_karp, AltSearch};
use num::traits::Signed;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NewtonPropsError {
    #[error("order mismatch: {faces} faces vs {vertices} vertices")]
    OrderMismatch { vertices: usize, faces: usize },
    #[error("structure mismatch: {0}")]
    StructureMismatch(String),
    #[error("Hall condition fails; no transversal exists")]
    HallFails,
    #[error("forced pair not incident: vertex {vertex} is not on face {face}")]
    ForcedPairNotIncident { vertex: String, face: String },
}

/// Euler-property outcome with evidence.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EPropertyReport {
    pub holds: bool,
    /// A face whose walk repeats an edge, when the property fails.
    pub offending_face: Option<String>,
}

/// Decides the Euler property: no facial walk repeats an edge. The direct
/// walk scan is cross-checked against loop-freeness of the dual, and on
/// success every boundary vertex is asserted to have even boundary degree.
pub fn e_property(g: &EmbeddedGraph) -> EPropertyReport {
    let mut offending = None;
    for walk in g.faces() {
        let mut edges = walk.edges();
        edges.sort_unstable();
        if edges.windows(2).any(|w| w[0] == w[1]) {
            offending = Some(walk.id);
            break;
        }
    }
    let dual_loops = g.dual().has_loops();
    assert_eq!(
        offending.is_none(),
        !dual_loops,
        "walk scan and dual loop check must agree"
    );
    if offending.is_none() {
        for walk in g.faces() {
            let mut degree: BTreeMap<usize, usize> = BTreeMap::new();
            for &d in &walk.darts {
                *degree.entry(g.dart_vertex(d)).or_default() += 1;
                *degree
                    .entry(g.dart_vertex(crate::torus_graph::alpha(d)))
                    .or_default() += 1;
            }
            for (&v, &deg) in &degree {
                assert!(
                    deg % 2 == 0,
                    "vertex {} has odd degree {} on boundary F{}",
                    g.vertex_name(v),
                    deg,
                    walk.id
                );
            }
        }
    }
    EPropertyReport {
        holds: offending.is_none(),
        offending_face: offending.map(|f| g.face_name(f)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HallOutcome {
    Pass,
    Fail,
}

/// Positive or negative certificate for the strong Hall condition.
#[derive(Debug, Clone, serde::Serialize)]
pub struct HallCertificate {
    pub outcome: HallOutcome,
    /// On pass: injective face -> vertex map, each face assigned a vertex on
    /// its own boundary.
    pub transversal: Option<BTreeMap<String, String>>,
    /// On fail: a nonempty proper face set `J` with `|V(G(J))| <= |J|`.
    pub violating_set: Option<Vec<String>>,
    /// On fail: the boundary vertices `V(G(J))` of the violating set.
    pub violating_vertices: Option<Vec<String>>,
    /// Number of maximum-matching / augmenting-path searches performed.
    pub matching_calls: usize,
}

/// Face -> boundary-vertex adjacency, restricted to the faces in `keep`.
fn face_vertex_adj(g: &EmbeddedGraph, keep: &[usize]) -> Vec<Vec<usize>> {
    keep.iter().map(|&f| g.face_vertices(f)).collect()
}

/// Decides `|J| < |V(G(J))|` for every nonempty proper face subset `J` by
/// bipartite matching. For each excluded face the remaining faces must
/// saturate, and stay saturable with any single vertex removed; a failure
/// yields a deficiency set which is minimalized greedily into the reported
/// violating `J`.
pub fn hall_condition(g: &EmbeddedGraph) -> Result<HallCertificate, NewtonPropsError> {
    let r = g.face_count();
    if g.vertex_count() != r {
        return Err(NewtonPropsError::OrderMismatch {
            vertices: g.vertex_count(),
            faces: r,
        });
    }
    let mut calls = 0usize;
    for excluded in 0..r {
        let keep: Vec<usize> = (0..r).filter(|&f| f != excluded).collect();
        let adj = face_vertex_adj(g, &keep);
        let m = hopcroft_karp(&adj, r);
        calls += 1;
        if m.size() < keep.len() {
            let free: Vec<usize> = (0..keep.len()).filter(|&x| m.left[x].is_none()).collect();
            match alternating_search(&adj, &m, &free, None) {
                AltSearch::Augmenting => unreachable!("matching was maximum"),
                AltSearch::Deficient { left, .. } => {
                    return Ok(fail_certificate(g, &keep, &left, calls));
                }
            }
        }
        for y in 0..r {
            let Some(xy) = m.right[y] else { continue };
            calls += 1;
            match alternating_search(&adj, &m, &[xy], Some(y)) {
                AltSearch::Augmenting => {}
                AltSearch::Deficient { left, .. } => {
                    return Ok(fail_certificate(g, &keep, &left, calls));
                }
            }
        }
    }
    let transversal = transversal_map(g, default_forced_pair(g))?;
    Ok(HallCertificate {
        outcome: HallOutcome::Pass,
        transversal: Some(transversal),
        violating_set: None,
        violating_vertices: None,
        matching_calls: calls,
    })
}

/// Lowest-id vertex paired with its lowest-id incident face.
fn default_forced_pair(g: &EmbeddedGraph) -> (usize, usize) {
    let v = 0;
    let f = (0..g.face_count())
        .find(|&f| g.face_vertices(f).contains(&v))
        .expect("every vertex lies on some face");
    (v, f)
}

fn fail_certificate(
    g: &EmbeddedGraph,
    keep: &[usize],
    deficient: &[usize],
    calls: usize,
) -> HallCertificate {
    // Translate the deficiency set back to face ids, then minimalize: drop
    // faces while the violation persists.
    let mut j: Vec<usize> = deficient.iter().map(|&x| keep[x]).collect();
    j.sort_unstable();
    let violated = |faces: &[usize]| -> bool {
        let mut verts: Vec<usize> = Vec::new();
        for &f in faces {
            verts.extend(g.face_vertices(f));
        }
        verts.sort_unstable();
        verts.dedup();
        !faces.is_empty() && verts.len() <= faces.len()
    };
    debug_assert!(violated(&j));
    let mut i = 0;
    while i < j.len() {
        let mut shrunk = j.clone();
        shrunk.remove(i);
        if violated(&shrunk) {
            j = shrunk;
        } else {
            i += 1;
        }
    }
    let mut verts: Vec<usize> = Vec::new();
    for &f in &j {
        verts.extend(g.face_vertices(f));
    }
    verts.sort_unstable();
    verts.dedup();
    assert!(verts.len() <= j.len(), "certificate must violate the bound");
    assert!(!j.is_empty() && j.len() < g.face_count());
    HallCertificate {
        outcome: HallOutcome::Fail,
        transversal: None,
        violating_set: Some(j.iter().map(|&f| g.face_name(f)).collect()),
        violating_vertices: Some(verts.iter().map(|&v| g.vertex_name(v).to_string()).collect()),
        matching_calls: calls,
    }
}

fn transversal_map(
    g: &EmbeddedGraph,
    forced: (usize, usize),
) -> Result<BTreeMap<String, String>, NewtonPropsError> {
    let (v0, f0) = forced;
    let r = g.face_count();
    let keep: Vec<usize> = (0..r).filter(|&f| f != f0).collect();
    let adj: Vec<Vec<usize>> = keep
        .iter()
        .map(|&f| {
            g.face_vertices(f)
                .into_iter()
                .filter(|&v| v != v0)
                .collect()
        })
        .collect();
    let m = hopcroft_karp(&adj, g.vertex_count());
    if m.size() < keep.len() {
        return Err(NewtonPropsError::HallFails);
    }
    let mut out = BTreeMap::new();
    out.insert(g.face_name(f0), g.vertex_name(v0).to_string());
    for (x, &f) in keep.iter().enumerate() {
        let v = m.left[x].expect("saturated");
        out.insert(g.face_name(f), g.vertex_name(v).to_string());
    }
    Ok(out)
}

/// Extends the forced assignment `vertex -> face` to an injective
/// face -> vertex transversal with every face mapped from its own boundary.
pub fn transversal_extend(
    g: &EmbeddedGraph,
    forced_vertex: &str,
    forced_face: &str,
) -> Result<BTreeMap<String, String>, NewtonPropsError> {
    let v0 = g
        .vertex_index(forced_vertex)
        .ok_or_else(|| NewtonPropsError::StructureMismatch(format!(
            "unknown vertex {forced_vertex:?}"
        )))?;
    let f0 = (0..g.face_count())
        .find(|&f| g.face_name(f) == forced_face)
        .ok_or_else(|| {
            NewtonPropsError::StructureMismatch(format!("unknown face {forced_face:?}"))
        })?;
    if !g.face_vertices(f0).contains(&v0) {
        return Err(NewtonPropsError::ForcedPairNotIncident {
            vertex: forced_vertex.to_string(),
            face: forced_face.to_string(),
        });
    }
    transversal_map(g, (v0, f0))
}

/// Angle-property outcome: the combinatorial decision plus the appropriate
/// verified certificate.
#[derive(Debug, Clone)]
pub struct APropertyResult {
    pub holds: bool,
    pub hall: HallCertificate,
    pub angles: Option<AngleAssignment>,
    pub stiemke: Option<StiemkeCertificate>,
}

/// Decides the angle property via the Hall condition and produces a
/// certificate: a verified positive angle assignment on pass (row
/// normalization first, exact rational margin maximization as fallback), a
/// verified sign vector on fail.
pub fn a_property(g: &EmbeddedGraph) -> Result<APropertyResult, NewtonPropsError> {
    let r = g.vertex_count();
    if g.has_loops() {
        return Err(NewtonPropsError::StructureMismatch("graph has loops".into()));
    }
    if g.edge_count() != 2 * r || g.face_count() != r {
        return Err(NewtonPropsError::StructureMismatch(format!(
            "expected (r, 2r, r) counts, found ({}, {}, {})",
            r,
            g.edge_count(),
            g.face_count()
        )));
    }
    let hall = hall_condition(g)?;
    match hall.outcome {
        HallOutcome::Pass => {
            let secs = sectors(g);
            let weights = angles::sinkhorn_weights(g, &secs);
            let mut aa = angles::assignment_from_weights(g, &secs, &weights, None);
            if verify_angles(g, &aa).is_err() || aa.margin < MIN_ANGLE {
                let (eps, exact) = angles::max_margin_exact(g, &secs)
                    .expect("Hall pass guarantees feasibility");
                assert!(eps.is_positive(), "Hall pass guarantees a positive margin");
                let floats: Vec<f64> = exact.iter().map(angles::rational_to_f64).collect();
                aa = angles::assignment_from_weights(g, &secs, &floats, Some(exact));
            }
            verify_angles(g, &aa).map_err(NewtonPropsError::StructureMismatch)?;
            Ok(APropertyResult {
                holds: true,
                hall,
                angles: Some(aa),
                stiemke: None,
            })
        }
        HallOutcome::Fail => {
            let j: Vec<usize> = hall
                .violating_set
                .as_ref()
                .unwrap()
                .iter()
                .map(|name| face_index(g, name))
                .collect();
            let cert = stiemke_from_violation(g, &j);
            verify_stiemke(g, &cert).map_err(NewtonPropsError::StructureMismatch)?;
            Ok(APropertyResult {
                holds: false,
                hall,
                angles: None,
                stiemke: Some(cert),
            })
        }
    }
}

fn face_index(g: &EmbeddedGraph, name: &str) -> usize {
    (0..g.face_count())
        .find(|&f| g.face_name(f) == name)
        .expect("face name produced by this graph")
}

/// Sign vector built from a violating face set: +1 on the boundary vertices
/// of `J`, -1 on the faces of `J`, 0 elsewhere. Every sector of a `J`-face
/// has its vertex on the boundary, so pair sums are non-negative, and the
/// total is `|V(G(J))| - |J| <= 0`.
pub fn stiemke_from_violation(g: &EmbeddedGraph, j: &[usize]) -> StiemkeCertificate {
    let r = g.vertex_count();
    let mut z = vec![0.0f64; 2 * r];
    let mut verts: Vec<usize> = Vec::new();
    for &f in j {
        verts.extend(g.face_vertices(f));
        z[r + f] = -1.0;
    }
    verts.sort_unstable();
    verts.dedup();
    for v in verts {
        z[v] = 1.0;
    }
    StiemkeCertificate { z }
}

/// Structural profile used by the Newton-graph decision.
#[derive(Debug, Clone, serde::Serialize)]
pub struct StructureReport {
    pub loop_free: bool,
    pub connected: bool,
    pub toroidal: bool,
    pub counts_ok: bool,
    pub order_at_least_two: bool,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct Counts {
    pub r: usize,
    pub edges: usize,
    pub faces: usize,
}

/// Full decision record for one graph.
#[derive(Debug, Clone, serde::Serialize)]
pub struct NewtonReport {
    pub is_newton: bool,
    pub counts: Counts,
    pub structure: StructureReport,
    pub e_property: EPropertyReport,
    pub hall: Option<HallCertificate>,
    pub angles: Option<BTreeMap<String, f64>>,
    pub angle_margin: Option<f64>,
    pub stiemke: Option<Vec<f64>>,
}

/// Total Newton-graph decision: loop-free, connected, cellular toroidal,
/// counts `(r, 2r, r)` with `r >= 2`, Euler property and angle property.
/// Structural failures are report fields, never errors.
pub fn is_newton_graph(g: &EmbeddedGraph) -> NewtonReport {
    let r = g.vertex_count();
    let counts = Counts {
        r,
        edges: g.edge_count(),
        faces: g.face_count(),
    };
    // Validated maps are connected and toroidal by construction.
    let structure = StructureReport {
        loop_free: !g.has_loops(),
        connected: true,
        toroidal: true,
        counts_ok: g.edge_count() == 2 * r && g.face_count() == r,
        order_at_least_two: r >= 2,
    };
    let ep = e_property(g);
    let applicable = structure.loop_free && structure.counts_ok && structure.order_at_least_two;
    let a = if applicable {
        Some(a_property(g).expect("structure checked above"))
    } else {
        None
    };
    let is_newton = applicable && ep.holds && a.as_ref().map_or(false, |a| a.holds);
    NewtonReport {
        is_newton,
        counts,
        structure,
        e_property: ep,
        hall: a.as_ref().map(|a| a.hall.clone()),
        angles: a
            .as_ref()
            .and_then(|a| a.angles.as_ref())
            .map(|aa| aa.angles.clone()),
        angle_margin: a.as_ref().and_then(|a| a.angles.as_ref()).map(|aa| aa.margin),
        stiemke: a
            .as_ref()
            .and_then(|a| a.stiemke.as_ref())
            .map(|s| s.z.clone()),
    }
}

/// LP route: does a strictly positive solution of the row-sum system exist?
/// Decided exactly; independent of the matching decider.
pub fn a_property_via_lp(g: &EmbeddedGraph) -> bool {
    let secs = sectors(g);
    match angles::max_margin_exact(g, &secs) {
        None => false,
        Some((eps, _)) => eps.is_positive(),
    }
}
