//! Forward and inverse eigenstrain problems for residual-stress analysis.
//!
//! * [`tensor`]: symmetric tensors, isotropic Hooke's law, field inner products.
//! * [`axisym`]: closed-form polynomial solutions for long axisymmetric cylinders
//!   and the constrained least-squares inverse problem (with optional `d₀` co-estimation).
//! * [`maxwell`]: Maxwell stress-function basis on a symmetric cube and fitting
//!   to pointwise stress samples.
//! * [`fem`]: structured trilinear hexahedral solver for the forward eigenstrain
//!   problem and Helmholtz decompositions on box domains.
//! * [`decomp`]: trivial inverse solutions and orthogonality diagnostics.
//! * [`lrt`]: Longitudinal Ray Transform and stress reconstruction from the
//!   LRT-visible part of elastic strain.
//! * [`io`]: CSV/JSON/SVG plumbing shared by the command-line tool.

#![allow(clippy::needless_range_loop)]

pub mod axisym;
pub mod decomp;
pub mod fem;
pub mod grid;
pub mod io;
pub mod lrt;
pub mod lstsq;
pub mod maxwell;
pub mod poly;
pub mod tensor;

pub use grid::{BoxMesh, GridSpec, GridTensorField, GridVectorField, QuadratureRule, Sampling};
pub use tensor::{ElasticModel, SymTensor2, Weight};

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("singular elastic model: {0}")]
    SingularModel(String),
    #[error("eigenstrain yields a non-polynomial driving term: {0}")]
    NonPolynomialRhs(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("fields live on different meshes")]
    MeshMismatch,
    #[error("mesh has no cells")]
    EmptyMesh,
    #[error("mesh too small: {0}")]
    MeshTooSmall(String),
    #[error("linear solver did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    SolverDiverged { iterations: usize, residual: f64, history: Vec<f64> },
    #[error("all-zero design matrix")]
    ZeroDesign,
    #[error("{path}: line {line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
