//! Quantification of network entanglement for multipartite quantum states.
//!
//! The crate models a quantum network as a hypergraph, computes the graph
//! parameters that govern LOCC preparation cost (edge radius, connected
//! domination number), estimates the network-entanglement weight from below
//! (witness, nonlocality and covariance methods) and from above (see-saw
//! over parametrized network states), and synthesizes teleportation-based
//! preparation schedules matching the graph parameters.

pub mod error;
pub mod linalg;
pub mod lmi;
pub mod netgraph;
pub mod qstate;
pub mod tol;

pub mod bounds;
pub mod protocols;
pub mod seesaw;

pub use error::{Error, Result};
