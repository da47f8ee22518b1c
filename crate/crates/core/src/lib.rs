//! Extended persistent homology on graphs and the pairwise topological
//! features built from it.
//!
//! Diagrams are computed two ways: [`reduction`] reduces the full extended
//! boundary matrix and serves as the reference, while [`fast`] uses
//! union-find plus a spanning-forest sweep. [`pipeline`] turns a node pair
//! into an enclosing subgraph, a distance-sum filter, a diagram and a
//! persistence image; [`learn`] feeds those images into a GCN link
//! predictor.

pub mod bench;
pub mod diagram;
pub mod error;
pub mod fast;
pub mod filtration;
pub mod fixtures;
pub mod generate;
pub mod graph;
pub mod image;
pub mod learn;
pub mod pipeline;
pub mod reduction;
pub mod ricci;

pub use diagram::{DiagramOptions, PersistenceDiagram, PersistencePoint, PointKind};
pub use error::{Error, Result};
pub use filtration::{build_filtration, FiltrationOrder, Simplex, VertexFilter};
pub use graph::{EnclosingSubgraph, Graph};
