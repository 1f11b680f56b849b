//! Pairwise trust evaluation on directed trust graphs.
//!
//! Trust between entities is a triple ⟨trust, distrust, uncertainty⟩ and the
//! trust every entity holds toward every other is obtained by aggregating
//! over all connecting paths. This crate implements that evaluation as an
//! iterated matrix power under two non-standard monoid operations:
//!
//! * [`dag`] converges to the exact all-paths fixpoint on acyclic graphs;
//! * [`cyclic`] handles arbitrary graphs by remembering, per pair, which
//!   edges already contributed, so cycles cannot feed back forever;
//! * [`oracle`] holds brute-force reference implementations for validation.
//!
//! ```
//! use trustlab::algebra::TrustTriple;
//! use trustlab::graph::TrustGraph;
//! use trustlab::report::EvalOptions;
//!
//! let mut g = TrustGraph::new();
//! g.add_edge("alice", "bob", TrustTriple::new(0.9, 0.05).unwrap()).unwrap();
//! g.add_edge("bob", "carol", TrustTriple::new(0.8, 0.1).unwrap()).unwrap();
//! let report = trustlab::dag::evaluate(&g, &EvalOptions::default()).unwrap();
//! let alice_carol = report.matrix.get(0, 2);
//! assert!(alice_carol.td() > 0.7);
//! ```

pub mod algebra;
pub mod cyclic;
pub mod dag;
mod error;
pub mod graph;
pub mod matrix;
pub mod oracle;
pub mod report;

pub use algebra::{TrustTriple, FULL_DISTRUST, FULL_TRUST, NO_RELATION};
pub use error::EngineError;
pub use graph::{GraphFormat, GraphKind, TrustGraph};
pub use matrix::{MatrixBackend, TrustMatrix};
pub use report::{EvalOptions, EvalReport, JsonReport, Termination};
