//! Sector bookkeeping and positive angle witnesses.
//!
//! A sector is a consecutive pair of darts in a vertex rotation; it belongs
//! to exactly one vertex and lies in exactly one face. An angle assignment
//! gives every sector a weight in (0,1) with unit sums per vertex and per
//! face. Witnesses are produced by alternating row normalization over the
//! vertex rows and face rows, with an exact rational margin-maximizing
//! fallback.

use super::simplex::{self, LpOutcome, StandardLp};
use crate::torus_graph::{dart_edge, EmbeddedGraph};
use num::rational::BigRational;
use num::traits::{Signed, ToPrimitive, Zero};
use num::BigInt;
use std::collections::BTreeMap;

/// Row-sum tolerance for float-mode witness verification.
pub const ROW_SUM_TOL: f64 = 1e-9;
/// Smallest acceptable witness angle before the exact fallback is invoked.
pub const MIN_ANGLE: f64 = 1e-6;
const SINKHORN_SWEEPS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sector {
    pub vertex: usize,
    pub dart_in: usize,
    pub dart_out: usize,
    pub face: usize,
}

/// All sectors in canonical order: vertices by index, and around each vertex
/// the rotation starting from its smallest dart.
pub fn sectors(g: &EmbeddedGraph) -> Vec<Sector> {
    let mut out = Vec::with_capacity(g.dart_count());
    for v in 0..g.vertex_count() {
        let rot = g.rotation_at(v);
        let k = rot.len();
        for i in 0..k {
            let dart_in = rot[i];
            let dart_out = rot[(i + 1) % k];
            out.push(Sector {
                vertex: v,
                dart_in,
                dart_out,
                face: g.dart_face(dart_out),
            });
        }
    }
    out
}

pub fn sector_key(g: &EmbeddedGraph, s: &Sector) -> String {
    let dart_ref = |d: usize| {
        format!(
            "{}{}",
            g.edge_name(dart_edge(d)),
            if d & 1 == 0 { '+' } else { '-' }
        )
    };
    format!(
        "{}:{}:{}",
        g.vertex_name(s.vertex),
        dart_ref(s.dart_in),
        dart_ref(s.dart_out)
    )
}

/// Strictly positive sector weights with unit vertex and face row sums.
#[derive(Debug, Clone, serde::Serialize)]
pub struct AngleAssignment {
    /// Sector key -> weight.
    pub angles: BTreeMap<String, f64>,
    /// Minimum weight.
    pub margin: f64,
    /// Exact weights in canonical sector order when the witness came from
    /// the rational solver.
    #[serde(skip)]
    pub exact: Option<Vec<BigRational>>,
}

/// Stiemke-style failure certificate: `z` is indexed by the `r` vertices
/// followed by the `r` faces; for every sector the vertex and face entries
/// sum to >= 0, the total sum is <= 0, and at least one inequality is
/// strict. Such a vector excludes any positive angle assignment.
#[derive(Debug, Clone, serde::Serialize)]
pub struct StiemkeCertificate {
    pub z: Vec<f64>,
}

/// Alternating row normalization, starting from the per-vertex uniform
/// guess. Returns weights in canonical sector order.
pub fn sinkhorn_weights(g: &EmbeddedGraph, secs: &[Sector]) -> Vec<f64> {
    let nv = g.vertex_count();
    let nf = g.face_count();
    let mut x: Vec<f64> = secs
        .iter()
        .map(|s| 1.0 / g.degree(s.vertex) as f64)
        .collect();
    for _ in 0..SINKHORN_SWEEPS {
        let mut vsum = vec![0.0; nv];
        for (i, s) in secs.iter().enumerate() {
            vsum[s.vertex] += x[i];
        }
        for (i, s) in secs.iter().enumerate() {
            x[i] /= vsum[s.vertex];
        }
        let mut fsum = vec![0.0; nf];
        for (i, s) in secs.iter().enumerate() {
            fsum[s.face] += x[i];
        }
        let mut worst = 0.0f64;
        for (i, s) in secs.iter().enumerate() {
            x[i] /= fsum[s.face];
        }
        // After face normalization only the vertex rows can be off.
        let mut vsum = vec![0.0; nv];
        for (i, s) in secs.iter().enumerate() {
            vsum[s.vertex] += x[i];
        }
        for &s in &vsum {
            worst = worst.max((s - 1.0).abs());
        }
        if worst < 1e-13 {
            break;
        }
    }
    x
}

/// Exact margin maximization: maximize `eps` subject to unit row sums and
/// `x >= eps`. Returns the optimal margin (zero when only degenerate
/// solutions exist) and the exact weights, or `None` when even the
/// non-negative system is infeasible.
pub fn max_margin_exact(
    g: &EmbeddedGraph,
    secs: &[Sector],
) -> Option<(BigRational, Vec<BigRational>)> {
    let nv = g.vertex_count();
    let nf = g.face_count();
    let n = secs.len();
    let one = || BigRational::from(BigInt::from(1));
    // Variables: y_0..y_{n-1} (shifted weights), eps.
    let mut a = vec![vec![BigRational::zero(); n + 1]; nv + nf];
    for (i, s) in secs.iter().enumerate() {
        a[s.vertex][i] = one();
        a[nv + s.face][i] = one();
    }
    for (i, s) in secs.iter().enumerate() {
        a[s.vertex][n] = &a[s.vertex][n] + one();
        a[nv + s.face][n] = &a[nv + s.face][n] + one();
        let _ = i;
    }
    let b = vec![one(); nv + nf];
    let mut c = vec![BigRational::zero(); n + 1];
    c[n] = -one();
    let lp = StandardLp { a, b, c };
    match simplex::solve(&lp) {
        LpOutcome::Infeasible => None,
        LpOutcome::Optimal { value, x } => {
            let eps = -value;
            debug_assert!(!eps.is_negative());
            let weights: Vec<BigRational> = x[..n].iter().map(|y| y + &eps).collect();
            Some((eps, weights))
        }
    }
}

pub fn assignment_from_weights(
    g: &EmbeddedGraph,
    secs: &[Sector],
    weights: &[f64],
    exact: Option<Vec<BigRational>>,
) -> AngleAssignment {
    let mut angles = BTreeMap::new();
    let mut margin = f64::INFINITY;
    for (i, s) in secs.iter().enumerate() {
        margin = margin.min(weights[i]);
        angles.insert(sector_key(g, s), weights[i]);
    }
    AngleAssignment {
        angles,
        margin,
        exact,
    }
}

/// Independent witness verifier: positivity, per-vertex sums and per-face
/// sums, exact when rational weights are present, within [`ROW_SUM_TOL`]
/// otherwise.
pub fn verify_angles(g: &EmbeddedGraph, aa: &AngleAssignment) -> Result<(), String> {
    let secs = sectors(g);
    if aa.angles.len() != secs.len() {
        return Err(format!(
            "expected {} sector angles, found {}",
            secs.len(),
            aa.angles.len()
        ));
    }
    if let Some(exact) = &aa.exact {
        if exact.len() != secs.len() {
            return Err("exact weight vector has the wrong length".into());
        }
        let one = BigRational::from(BigInt::from(1));
        let mut vsum = vec![BigRational::zero(); g.vertex_count()];
        let mut fsum = vec![BigRational::zero(); g.face_count()];
        for (i, s) in secs.iter().enumerate() {
            if !exact[i].is_positive() {
                return Err(format!("A1 fails: sector {i} is not strictly positive"));
            }
            vsum[s.vertex] = &vsum[s.vertex] + &exact[i];
            fsum[s.face] = &fsum[s.face] + &exact[i];
        }
        if let Some(v) = vsum.iter().position(|s| *s != one) {
            return Err(format!("A2 fails exactly at vertex {v}"));
        }
        if let Some(f) = fsum.iter().position(|s| *s != one) {
            return Err(format!("A3 fails exactly at face {f}"));
        }
        return Ok(());
    }
    let mut vsum = vec![0.0f64; g.vertex_count()];
    let mut fsum = vec![0.0f64; g.face_count()];
    for s in &secs {
        let key = sector_key(g, s);
        let w = *aa
            .angles
            .get(&key)
            .ok_or_else(|| format!("missing sector {key}"))?;
        if !(w > 0.0) {
            return Err(format!("A1 fails: sector {key} = {w}"));
        }
        vsum[s.vertex] += w;
        fsum[s.face] += w;
    }
    for (v, s) in vsum.iter().enumerate() {
        if (s - 1.0).abs() > ROW_SUM_TOL {
            return Err(format!("A2 fails at vertex {v}: sum {s}"));
        }
    }
    for (f, s) in fsum.iter().enumerate() {
        if (s - 1.0).abs() > ROW_SUM_TOL {
            return Err(format!("A3 fails at face {f}: sum {s}"));
        }
    }
    Ok(())
}

/// Independent certificate verifier for the alternative system: pairwise
/// sums non-negative over the sectors, total non-positive, at least one
/// strict inequality.
pub fn verify_stiemke(g: &EmbeddedGraph, cert: &StiemkeCertificate) -> Result<(), String> {
    let r = g.vertex_count();
    if cert.z.len() != 2 * r {
        return Err(format!("expected {} entries, found {}", 2 * r, cert.z.len()));
    }
    let mut strict = false;
    for s in sectors(g) {
        let pair = cert.z[s.vertex] + cert.z[r + s.face];
        if pair < 0.0 {
            return Err(format!(
                "pair sum negative for vertex {} / face {}",
                s.vertex, s.face
            ));
        }
        if pair > 0.0 {
            strict = true;
        }
        let _ = dart_edge(s.dart_in);
    }
    let total: f64 = cert.z.iter().sum();
    if total > 0.0 {
        return Err(format!("total sum positive: {total}"));
    }
    if total < 0.0 {
        strict = true;
    }
    if !strict {
        return Err("no strict inequality".into());
    }
    Ok(())
}

/// Formats an exact weight as f64 for reporting.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // Extremely small/large components fall back on a quotient of parts.
        let n = x.numer().to_f64().unwrap_or(0.0);
        let d = x.denom().to_f64().unwrap_or(1.0);
        n / d
    })
}
