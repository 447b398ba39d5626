use thiserror::Error;

use crate::numerics::CPoint;

/// Errors raised by the dense-orbit toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A point sits within the safety margin of a splitting line or of the
    /// boundary of the rectangle, or outside it. `step` is the iteration
    /// index and `coord` the coordinate index (both zero-based).
    #[error("point {point} at step {step}, coordinate {coord} is within the bad-set margin")]
    BadSetProximity {
        step: usize,
        coord: usize,
        point: CPoint,
    },

    #[error("address depth {requested} exceeds the trusted maximum {max}")]
    AddressTooDeep { requested: usize, max: usize },

    #[error("target at level {level}, cell {cell} could not be addressed after {attempts} perturbations")]
    TargetUnaddressable {
        level: usize,
        cell: usize,
        attempts: usize,
    },

    #[error("target {index} missed: hit distance {distance:e} >= radius {radius:e}")]
    TargetMissed {
        index: usize,
        distance: f64,
        radius: f64,
    },

    #[error("coordinate {coord} lies outside the slit annulus")]
    OutsideDomain { coord: usize },

    #[error("no grid cell qualifies inside the domain at resolution {epsilon}")]
    EmptyDomain { epsilon: f64 },

    #[error("packing bound not reached after {halvings} halvings (last h = {h:e})")]
    IterationCap { halvings: usize, h: f64 },

    #[error("at least 2 sample points are required, got {0}")]
    TooFewPoints(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
