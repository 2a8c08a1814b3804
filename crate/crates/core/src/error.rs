use thiserror::Error;

/// Errors raised by the elliptic, chart, transform and verification layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid modular parameter tau = {re} + {im}i: {reason}")]
    InvalidModularParam { re: f64, im: f64, reason: String },

    #[error("argument {re} + {im}i hits a lattice point (reduced modulus {modulus:e})")]
    PoleAtLatticePoint { re: f64, im: f64, modulus: f64 },

    #[error("theta factor vanishes: argument {re} + {im}i is a lattice point")]
    ThetaZero { re: f64, im: f64 },

    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),

    #[error("invalid quiver: {0}")]
    InvalidQuiver(String),

    #[error("invalid degree: {0}")]
    InvalidDegree(String),

    #[error("sub-degree is not bounded by the degree at vertex {vertex}: {sub} > {bound}")]
    DegreeOverflow { vertex: usize, sub: u32, bound: u32 },

    #[error("degree vectors do not match: {0}")]
    DegreeMismatch(String),

    #[error("invalid chart point: {0}")]
    InvalidPoint(String),

    #[error("chart kind mismatch: expected {expected}, found {found}")]
    ChartKindMismatch { expected: String, found: String },

    #[error("points {first} and {second} are closer than the separation {separation:e} (distance {distance:e})")]
    CoincidentPoints {
        first: String,
        second: String,
        distance: f64,
        separation: f64,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("trajectory left the generic chart at step {step}: {reason}")]
    TrajectoryLeftChart { step: usize, reason: String },

    #[error("gauge potential is not symmetric (asymmetry {asymmetry:e} at vertex {vertex})")]
    GaugeNotSymmetric { vertex: usize, asymmetry: f64 },

    #[error("diagonal point: w1 - w2 = {distance:e} makes the local coordinate overflow")]
    DiagonalPoint { distance: f64 },

    #[error("contour of radius {radius:e} around pole {pole} is too close to pole {other} (distance {distance:e})")]
    ContourTooClose {
        pole: usize,
        other: usize,
        radius: f64,
        distance: f64,
    },

    #[error("residues must sum to zero for an elliptic function (sum has modulus {0:e})")]
    ResiduesNotBalanced(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("schema error in `{field}`: {reason}")]
    Schema { field: String, reason: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
