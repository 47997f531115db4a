//! Local partition oracle for bounded-degree graphs.
//!
//! Pieces are carved out by truncated-diffusion sweep cuts. Each vertex can
//! be asked for its piece locally, and the answers always agree with one
//! global partition fixed by the master seed.

pub mod analysis;
pub mod applications;
pub mod diffusion;
pub mod graph;
pub mod oracle;

pub use graph::{BoundedDegreeGraph, GraphError, VertexSet};
pub use oracle::{OracleParams, Partition, PartitionOracle, SeedContext};
