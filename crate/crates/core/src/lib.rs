//! Discrete machinery for sourceless percolation configurations on the
//! square lattice: loop decompositions, exploration processes, annulus
//! crossings, loop-ensemble metrics, and exact and sampled laws of the
//! critical Ising interface and the random-current trace.

pub mod annuli;
pub mod error;
pub mod exploration;
pub mod lattice;
pub mod loopdecomp;
pub mod loopmetric;
pub mod models;
pub mod percolation;
pub mod polygon;
pub mod rng;

pub use error::{Error, Result};

/// Version of this library, echoed into every artifact header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
