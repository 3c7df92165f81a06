//! Crate-wide error type.

use alloc::string::String;
use core::fmt;

/// Errors reported by mesh construction, assembly, solvers, and diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A caller-supplied argument is out of contract.
    InvalidArgument(String),
    /// Mesh fails a topology invariant (open boundary, negative area, ...).
    InvalidMesh(String),
    /// Coefficient data violates the admissibility bounds.
    InvalidCoefficient(String),
    /// Boundary data is incompatible with the pure Neumann problem.
    IncompatibleData(String),
    /// Operation requires a coefficient regime the data does not satisfy.
    InvalidRegime(String),
    /// Input is degenerate for the requested diagnostic (e.g. constant field).
    DegenerateInput(String),
    /// A frequency profile hit `H(r) = 0` at the given radius.
    DegenerateProfile { radius: f64 },
    /// Linear solve did not reach the residual target.
    SolverFailure { residual: f64 },
    /// Quadrature or iteration failed to converge.
    NumericFailure(String),
    /// Fields built on different meshes were mixed.
    MeshMismatch,
    /// A sweep case failed a hard verification gate.
    GateFailure { case: String, detail: String },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::InvalidMesh(msg) => write!(f, "invalid mesh: {msg}"),
            Error::InvalidCoefficient(msg) => write!(f, "invalid coefficient: {msg}"),
            Error::IncompatibleData(msg) => write!(f, "incompatible data: {msg}"),
            Error::InvalidRegime(msg) => write!(f, "invalid regime: {msg}"),
            Error::DegenerateInput(msg) => write!(f, "degenerate input: {msg}"),
            Error::DegenerateProfile { radius } => {
                write!(f, "degenerate profile: H(r) vanished at r = {radius}")
            }
            Error::SolverFailure { residual } => {
                write!(f, "solver failure: relative residual {residual:.3e}")
            }
            Error::NumericFailure(msg) => write!(f, "numeric failure: {msg}"),
            Error::MeshMismatch => write!(f, "fields belong to different meshes"),
            Error::GateFailure { case, detail } => {
                write!(f, "gate failure in case `{case}`: {detail}")
            }
        }
    }
}

#[cfg(any(test, feature = "std"))]
impl std::error::Error for Error {}
