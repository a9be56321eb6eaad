use thiserror::Error;

/// Errors raised by the geometry and energy routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("conformal parameter |v| = {norm} lies outside the open unit ball")]
    ParameterOutsideBall { norm: f64 },

    #[error("stereographic projection is singular at the north pole")]
    SingularProjection,

    #[error("point cloud does not determine a unique round sphere: {0}")]
    NoUniqueSphere(String),

    #[error("degenerate immersion at (u, v) = ({u}, {v}): EG - F^2 = {det}")]
    DegenerateImmersion { u: f64, v: f64, det: f64 },

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unsupported domain: {0}")]
    UnsupportedDomain(&'static str),

    #[error("unsupported ambient space: {0}")]
    UnsupportedAmbient(&'static str),

    #[error("surface is not minimal: max |H| = {max_h}")]
    NotMinimal { max_h: f64 },

    #[error("surface carries no flat conformal chart")]
    NotFlat,

    #[error("{what} did not converge (best residual {residual})")]
    NoConvergence { what: &'static str, residual: f64 },

    #[error("point is {distance} away from the surface")]
    PointOffSurface { distance: f64 },

    #[error("curve is not regular at parameter {at}")]
    IrregularCurve { at: f64 },

    #[error("curve leaves the upper half-plane at parameter {at}")]
    LeavesHalfPlane { at: f64 },

    #[error("lattice generators ({x}, {y}) are not normalized")]
    InvalidLattice { x: f64, y: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
