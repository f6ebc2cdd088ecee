use thiserror::Error;

/// Errors raised by grid construction, operators, norms and checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field has {actual} values, grid expects {expected}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("exponent must be positive or infinite, got {0}")]
    InvalidExponent(f64),

    #[error("multiplier is not finite at lattice index {index}")]
    NonFiniteMultiplier { index: usize },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("band {j} outside the partition range [{j_min}, {j_max}]")]
    BandOutOfRange { j: i32, j_min: i32, j_max: i32 },

    #[error("grid hosts only {bands} dyadic bands, at least 3 are required")]
    TooFewBands { bands: usize },

    #[error("difference order must be at least 1")]
    InvalidOrder,

    #[error("shift {0:?} is not a multiple of the grid spacing")]
    NonLatticeShift(Vec<f64>),

    #[error("exact integer range exceeded while evaluating order {m}")]
    Overflow { m: u32 },

    #[error("shift set is empty")]
    EmptyShiftSet,

    #[error("time grid is empty")]
    EmptyTimeGrid,

    #[error("axis {axis} is invalid for a {dim}-dimensional grid")]
    InvalidAxis { axis: usize, dim: usize },

    #[error("partial derivatives are inconsistent: violation {violation:.3e} for {alpha:?} vs {alpha_other:?}")]
    InconsistentPartials {
        alpha: Vec<usize>,
        alpha_other: Vec<usize>,
        violation: f64,
    },

    #[error("partial derivative {alpha:?} has nonzero mean {mean:.3e}")]
    NonzeroMean { alpha: Vec<usize>, mean: f64 },

    #[error("unknown check `{0}`")]
    UnknownCheck(String),

    #[error("calibration and validation families must use different seeds")]
    SameSeeds,

    #[error("check `{check}` failed validation under fitted constant ({detail})")]
    ValidationFailed { check: String, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
