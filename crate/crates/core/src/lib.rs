//! Suspensions of directed graphs.
//!
//! The core crate is `no_std` with `alloc`. It covers graphs and paths,
//! graph transforms, the suspension quivers `SG[l]E`, the suspension flow,
//! truncated path-space operators and K-theory via Smith normal form.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod flow;
pub mod graph;
pub mod ktheory;
pub mod opalg;
pub mod quiver;
pub mod report;
pub mod scalar;
pub mod transform;

pub use graph::{Diagnostics, EdgeId, Graph, GraphError, IntMatrix, Path, VertexId};
pub use report::{Check, Report};
pub use scalar::{Rat, Scalar};
