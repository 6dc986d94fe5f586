//! Critical site percolation on the triangular lattice and its continuum
//! counterparts: exploration interfaces, nested cluster-boundary loops,
//! chordal SLE6 via Loewner evolution, Cardy crossing probabilities via
//! numerical conformal maps, and an experiment harness that compares the
//! discrete and continuum sides at Monte Carlo scale.

pub mod cardy;
pub mod conformal;
pub mod curvespace;
pub mod exploration;
pub mod harness;
pub mod hexlattice;
pub mod loopbuilder;
pub mod percolation;
pub mod sle;

use thiserror::Error;

/// Unified error type for all modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no Jordan set of hexagons at this mesh fits inside the domain")]
    EmptyApproximation,
    #[error("vertex {0} is not an e-vertex of the domain")]
    NotEVertex(String),
    #[error("coloring does not cover the window plus one exterior ring and no boundary condition was supplied")]
    MissingBoundaryCondition,
    #[error("point lies on the explored set")]
    OnExploredSet,
    #[error("piece has too few usable endpoints: {0}")]
    DegeneratePiece(String),
    #[error("iteration failed to converge: {0}")]
    NonConvergence(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("numerical tolerance exceeded: {0}")]
    ToleranceExceeded(String),
    #[error("boundary points are not in counterclockwise cyclic order")]
    NotCyclicOrder,
    #[error("geometric precondition violated: {0}")]
    GeometryInvalid(String),
    #[error("operation requires a nonempty set")]
    EmptySet,
    #[error("discretization step too large: {0}")]
    StepTooLarge(String),
    #[error("simulated trace ended before the requested stopping time")]
    TraceExhausted,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
