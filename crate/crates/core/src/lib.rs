//! Optimal prolongation and restriction maps between graphs, and the
//! multiscale autoencoder training procedure built on top of them.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`]: graphs, lineages, Laplacian and distance matrices, graph products.
//! * [`spectral`]: symmetric eigendecomposition and minimal eigenvalue matching.
//! * [`prolongation`]: the diffusion + locality objective over orthonormal maps,
//!   its Stiefel-manifold optimizer, closed-form map families and box-product
//!   composition.
//! * [`msann`]: leveled autoencoder hierarchies trained with recursive cycles.
//! * [`data`]: synthetic denoising tasks, IDX ingestion and file formats.
//!
//! Dense `nalgebra` matrices are used throughout.

pub mod data;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod msann;
pub mod prolongation;
pub mod spectral;

pub use error::{Error, Result};
pub use nalgebra::{DMatrix, DVector};
