//! Two-subdomain Poisson solver on independently triangulated,
//! non-matching meshes. The subdomains are glued along a straight
//! interface either with a penalty form or with Nitsche's method
//! (one-sided or averaged fluxes), and the crate provides the
//! surrounding machinery: newest-vertex-bisection meshes, Lagrange
//! P1/P2 spaces, mortar segmentation of the interface, sparse symmetric
//! assembly, a sparse Cholesky solver, residual a posteriori error
//! estimation with Dörfler marking, and convergence-study drivers.
//!
//! Element loops run in parallel through rayon when the default
//! `parallel` feature is enabled; results are bit-identical to the
//! sequential fallback because per-element contributions are collected
//! in element order before accumulation.

pub mod assembly;
pub mod coupling;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod geom;
pub mod interface;
pub mod mesh;
mod par;
pub mod quadrature;
pub mod solver;
pub mod space;

pub use error::{Error, Result};
