//! Combinatorial maps on the torus, Newton-graph recognition, and numerical
//! realization of elliptic Newton flows.
//!
//! The crate is organized in four layers:
//!
//! * [`torus_graph`] — multigraphs with rotation systems (combinatorial maps),
//!   face traversal, geometric duals, common refinements and
//!   orientation-respecting equivalence.
//! * [`newton_props`] — the Euler and Angle properties, the strong Hall
//!   condition decided by bipartite matching, positive angle witnesses and
//!   Stiemke failure certificates, and the Newton-graph decision.
//! * [`elliptic_core`] — lattices, Weierstrass sigma/zeta evaluation through
//!   theta series, sigma-quotient elliptic functions built from zero/pole
//!   data, and their critical points.
//! * [`flow_engine`] — the desingularized Newton flow and its rotated
//!   companion: equilibrium classification, separatrix tracing and extraction
//!   of the embedded graphs a flow carries.

pub mod elliptic_core;
pub mod fixtures;
pub mod flow_engine;
pub mod newton_props;
pub mod threads;
pub mod torus_graph;

pub use torus_graph::{EmbeddedGraph, FaceWalk, GraphError, Orientation, RefinedGraph};
