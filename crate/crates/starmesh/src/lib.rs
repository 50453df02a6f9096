//! Exact end-to-end arrival functions for two-terminal graphs with
//! piecewise-linear FIFO travel times.
//!
//! The engine reduces a graph to a single terminal-to-terminal edge using
//! parallel reductions and bounded-degree star-mesh transformations guided
//! by a nice tree decomposition, maintaining the exact end-to-end arrival
//! function throughout. Everything runs over arbitrary-precision rationals
//! so results can be cross-checked bit-for-bit against slow independent
//! oracles (time-dependent Dijkstra, exhaustive path enumeration).
//!
//! ```
//! use starmesh::{rat_int, Graph, PwlFunction, VertexId};
//! use starmesh::decomposition::heuristic_decomposition;
//! use starmesh::reduction::reduce_to_terminals;
//!
//! // s = 1, d = 3, with a middle vertex: t+1 then t+2
//! let mut g = Graph::new(VertexId(1), VertexId(3));
//! g.add_vertex(VertexId(2));
//! g.add_edge(VertexId(1), VertexId(2),
//!            PwlFunction::shift(rat_int(1)), PwlFunction::shift(rat_int(1))).unwrap();
//! g.add_edge(VertexId(2), VertexId(3),
//!            PwlFunction::shift(rat_int(2)), PwlFunction::shift(rat_int(2))).unwrap();
//!
//! let td = heuristic_decomposition(&g);
//! let out = reduce_to_terminals(&g, &td).unwrap();
//! assert_eq!(out.forward.to_string(), "0,3@1"); // departing at t arrives at t+3
//! ```

pub mod decomposition;
pub mod experiment;
pub mod generate;
pub mod graph;
pub mod io;
pub mod oracle;
pub mod pwl;
pub mod rational;
pub mod reduction;

pub use graph::{EdgeKey, EdgeRecord, Graph, GraphError, GraphViolation, VertexId};
pub use pwl::{Breakpoint, FifoViolation, FifoViolationKind, Piece, PwlError, PwlFunction};
pub use rational::{rat, rat_int, Arrival, Rat};
