//! Graph file format:
//!
//! ```json
//! {
//!   "vertices": ["u", "v"],
//!   "edges": [{"id": "a", "ends": ["u", "v"]}],
//!   "rotation": {"u": ["a+"], "v": ["a-"]}
//! }
//! ```
//!
//! A dart reference is an edge id suffixed with `+` (the end at `ends[0]`)
//! or `-` (the end at `ends[1]`); a loop uses both suffixes at its single
//! vertex. Rotation lists are anti-clockwise.

use super::{EmbeddedGraph, GraphError};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Serialize, Deserialize)]
struct GraphFile {
    vertices: Vec<String>,
    edges: Vec<EdgeFile>,
    rotation: BTreeMap<String, Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct EdgeFile {
    id: String,
    ends: [String; 2],
}

/// Parses a graph from the JSON format and validates it as a toroidal map.
pub fn graph_from_json(text: &str) -> Result<EmbeddedGraph, GraphError> {
    let file: GraphFile = serde_json::from_str(text)
        .map_err(|e| GraphError::MalformedRotation(format!("invalid graph JSON: {e}")))?;
    let vertex_index: BTreeMap<&str, usize> = file
        .vertices
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    if vertex_index.len() != file.vertices.len() {
        return Err(GraphError::MalformedRotation("duplicate vertex id".into()));
    }
    let edge_index: BTreeMap<&str, usize> = file
        .edges
        .iter()
        .enumerate()
        .map(|(i, e)| (e.id.as_str(), i))
        .collect();
    if edge_index.len() != file.edges.len() {
        return Err(GraphError::MalformedRotation("duplicate edge id".into()));
    }
    let mut edges = Vec::with_capacity(file.edges.len());
    for e in &file.edges {
        let u = *vertex_index.get(e.ends[0].as_str()).ok_or_else(|| {
            GraphError::MalformedRotation(format!("edge {:?} end {:?} unknown", e.id, e.ends[0]))
        })?;
        let v = *vertex_index.get(e.ends[1].as_str()).ok_or_else(|| {
            GraphError::MalformedRotation(format!("edge {:?} end {:?} unknown", e.id, e.ends[1]))
        })?;
        edges.push((e.id.clone(), u, v));
    }
    let mut rotation: BTreeMap<usize, Vec<(usize, bool)>> = BTreeMap::new();
    for (vname, refs) in &file.rotation {
        let v = *vertex_index.get(vname.as_str()).ok_or_else(|| {
            GraphError::MalformedRotation(format!("rotation lists unknown vertex {vname:?}"))
        })?;
        let mut list = Vec::with_capacity(refs.len());
        for r in refs {
            let (edge_name, minus) = match r.strip_suffix('+') {
                Some(n) => (n, false),
                None => match r.strip_suffix('-') {
                    Some(n) => (n, true),
                    None => {
                        return Err(GraphError::MalformedRotation(format!(
                            "dart reference {r:?} lacks a +/- suffix"
                        )))
                    }
                },
            };
            let e = *edge_index.get(edge_name).ok_or_else(|| {
                GraphError::MalformedRotation(format!("dart reference {r:?} names unknown edge"))
            })?;
            list.push((e, minus));
        }
        rotation.insert(v, list);
    }
    EmbeddedGraph::build(file.vertices, edges, &rotation)
}

/// Serializes a graph into the JSON format (pretty, deterministic).
pub fn graph_to_json(g: &EmbeddedGraph) -> String {
    serde_json::to_string_pretty(&to_file(g)).expect("graph serialization cannot fail")
}

/// Same content as [`graph_to_json`] but as a JSON value, for embedding in
/// larger reports.
pub fn graph_to_json_value(g: &EmbeddedGraph) -> serde_json::Value {
    serde_json::to_value(to_file(g)).expect("graph serialization cannot fail")
}

fn to_file(g: &EmbeddedGraph) -> GraphFile {
    let dart_ref = |d: usize| {
        format!(
            "{}{}",
            g.edge_name(super::dart_edge(d)),
            if d & 1 == 0 { '+' } else { '-' }
        )
    };
    GraphFile {
        vertices: g.vertex_names().to_vec(),
        edges: (0..g.edge_count())
            .map(|e| {
                let (u, v) = g.edge_ends(e);
                EdgeFile {
                    id: g.edge_name(e).to_string(),
                    ends: [g.vertex_name(u).to_string(), g.vertex_name(v).to_string()],
                }
            })
            .collect(),
        rotation: (0..g.vertex_count())
            .map(|v| {
                (
                    g.vertex_name(v).to_string(),
                    g.rotation_at(v).into_iter().map(dart_ref).collect(),
                )
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::torus_graph::equivalent;

    #[test]
    fn json_round_trip_is_lossless() {
        for g in [fixtures::g2(), fixtures::torus_rose(), fixtures::grid_torus(2, 3, 1)] {
            let text = graph_to_json(&g);
            let back = graph_from_json(&text).unwrap();
            assert_eq!(back.vertex_names(), g.vertex_names());
            assert_eq!(back.edge_names(), g.edge_names());
            assert_eq!(back.faces(), g.faces());
            assert_eq!(graph_to_json(&back), text);
            let w = equivalent(&g, &back).unwrap();
            assert_eq!(
                w.orientation,
                crate::torus_graph::OrientationSense::Preserving
            );
        }
    }

    #[test]
    fn bad_dart_suffix_is_rejected() {
        let text = r#"{"vertices":["v"],"edges":[{"id":"a","ends":["v","v"]}],"rotation":{"v":["a","a-"]}}"#;
        assert!(graph_from_json(text).is_err());
    }

    #[test]
    fn loop_uses_both_suffixes_at_one_vertex() {
        let g = fixtures::torus_rose();
        let text = graph_to_json(&g);
        assert!(text.contains("a+") && text.contains("a-"));
    }
}
