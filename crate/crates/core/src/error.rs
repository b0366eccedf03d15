use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value {value} at parameter {at}")]
    NonFinite { at: f64, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature did not converge on [{lo}, {hi}]: partial value {partial}, error estimate {error_estimate}")]
    NoConvergence {
        lo: f64,
        hi: f64,
        partial: f64,
        error_estimate: f64,
    },

    #[error("undefined frame at s = {s}: curvature {kappa:e} below threshold")]
    UndefinedFrame { s: f64, kappa: f64 },

    #[error("not arc-length parametrized at s = {s}: speed {speed}")]
    NotArcLength { s: f64, speed: f64 },

    #[error("axis undefined: zero torsion")]
    ZeroTorsion,

    #[error("domain bound lambda*int(kappa) < B violated at s = {s} (exponent {exponent})")]
    DomainBound { s: f64, exponent: f64 },

    #[error("curvature must be positive, got {kappa} at s = {s}")]
    NonPositiveCurvature { s: f64, kappa: f64 },

    #[error("seam at s = {s}: use the omega extension")]
    Seam { s: f64 },

    #[error("parameter t = {t} is at the seam or outside the branch interval: use the upsilon extension")]
    SphereSeam { t: f64 },

    #[error("parameter {value} outside the interval ({lo}, {hi})")]
    OutOfInterval { value: f64, lo: f64, hi: f64 },

    #[error("branch mismatch at s = {s}: as+b = {h}")]
    BranchMismatch { s: f64, h: f64 },

    #[error("degenerate surface normal at u = {u}")]
    DegenerateSurface { u: f64 },

    #[error("no stable fit: {0}")]
    NoStableFit(String),

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("evaluation failed at node {index} (s = {s}): {source}")]
    Node {
        index: usize,
        s: f64,
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Strips `Node` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Node { source, .. } => source.root(),
            e => e,
        }
    }

    pub fn is_domain(&self) -> bool {
        matches!(
            self.root(),
            Error::DomainBound { .. }
                | Error::NonPositiveCurvature { .. }
                | Error::Seam { .. }
                | Error::SphereSeam { .. }
                | Error::OutOfInterval { .. }
                | Error::BranchMismatch { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
