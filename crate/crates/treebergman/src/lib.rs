//! Harmonic Bergman analysis on the `q`-homogeneous tree with horocyclic
//! measures: tree geometry, exact measures, the combinatorial Laplacian and
//! harmonic extensions, the orthonormal basis and reproducing kernel of the
//! Bergman space, and the singular-integral toolkit around its projection
//! (Calderon-Zygmund decomposition, atoms, BMO, Hormander estimates).
//!
//! All quantities are computed in closed form where a closed form exists;
//! the [`oracle`] module provides independent truncated-series and
//! enumeration routes with certified tail bounds, and [`verify`] packages
//! both into machine-checkable suites.

pub mod bergman;
pub mod error;
pub mod harmonic;
pub mod measure;
pub mod operators;
pub mod oracle;
pub mod params;
pub mod sampling;
pub mod tree;
pub mod verify;

pub use error::{Error, Result};
pub use params::Params;
pub use tree::{DyadicSet, Vertex};
