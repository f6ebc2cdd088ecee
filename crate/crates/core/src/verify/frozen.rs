//! Constants of the fitted checks, measured once on the calibration setup
//! and committed. The regression test at the bottom refits them and fails if
//! any value drifts by more than `1e-9` relative.
//!
//! Calibration setup: the default family on the 1D grid `N = 256`,
//! `L = 2 pi`, seed [`CALIBRATION_SEED`]; default check parameters
//! (`s = 0.5`, `p = q = 2`, `eta = 1`, groups of 4 fields). Validation uses
//! seed [`VALIDATION_SEED`].

use super::{CheckParams, Constant, ConstantSource, FunctionFamily};
use crate::spectral::GridSpec;

pub const CALIBRATION_SEED: u64 = 1;
pub const VALIDATION_SEED: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrozenConstant {
    pub check: &'static str,
    pub lower: Option<f64>,
    pub upper: f64,
}

impl FrozenConstant {
    pub fn constant(&self) -> Constant {
        Constant {
            lower: self.lower,
            upper: Some(self.upper),
            source: ConstantSource::Frozen,
        }
    }
}

pub const FROZEN: &[FrozenConstant] = &[
    FrozenConstant {
        check: "phi_independence",
        lower: Some(0.868750895281029),
        upper: 1.151077950459566,
    },
    FrozenConstant {
        check: "holder_equiv",
        lower: Some(1.0746468258052504),
        upper: 3.77114850020534,
    },
    FrozenConstant {
        check: "fs_maximal",
        lower: None,
        upper: 1.2860368809321152,
    },
];

pub fn lookup(check: &str) -> Option<&'static FrozenConstant> {
    FROZEN.iter().find(|f| f.check == check)
}

/// Grid, families and parameters the frozen values were measured on.
pub fn calibration_setup() -> (FunctionFamily, FunctionFamily, CheckParams) {
    let grid = GridSpec::unit_circle(256).expect("valid grid");
    (
        FunctionFamily::default_for(grid, CALIBRATION_SEED),
        FunctionFamily::default_for(grid, VALIDATION_SEED),
        CheckParams::default(),
    )
}
