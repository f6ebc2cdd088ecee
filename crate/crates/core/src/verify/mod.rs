//! Named numerical checks of the standard inequalities, run over seeded
//! function families.
//!
//! Each check produces one [`Instance`] per family member (or per member and
//! parameter combination) holding the two sides of an inequality. Constants
//! come in three flavours:
//!
//! * exact: the inequality holds with constant one;
//! * proof: the constant is computed from grid quantities (see [`constants`]);
//! * fitted: the constant is measured on a calibration family with a 1.05
//!   margin and frozen in [`frozen`].

mod checks;
pub mod constants;
mod family;
pub mod frozen;

pub use family::{FunctionFamily, Member, DEFAULT_WEIERSTRASS_S};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::{build_cutoff, DyadicPartition};
use crate::spectral::Exponent;

/// Every check id understood by [`run_check`].
pub const CATALOG: &[&str] = &[
    "partition_validity",
    "reconstruction",
    "phi_independence",
    "lq_monotone",
    "sobolev_embedding",
    "lift_isomorphism",
    "fourier_refinement",
    "bc_embedding",
    "holder_equiv",
    "riesz_bounded",
    "bf_sandwich",
    "l2_corridor",
    "fs_maximal",
    "realization",
    "diff_convolution",
];

/// Checks whose constant is fitted on a calibration family.
pub const FITTED_CHECKS: &[&str] = &["phi_independence", "holder_equiv", "fs_maximal"];

/// Margin applied to measured extremes when fitting a constant.
pub const FIT_MARGIN: f64 = 1.05;

/// Absolute slack added to every bound, absorbing roundoff on vanishing sides.
pub const ABSOLUTE_SLACK: f64 = 1e-13;

/// Optional per-check parameters; unset fields take the check's default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Exponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Exponent>,
    /// Summability exponents compared by `lq_monotone`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qs: Option<Vec<Exponent>>,
    /// `(p, q)` pairs of `bf_sandwich`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pq: Option<Vec<(Exponent, Exponent)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// 1-based Riesz axis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// Difference orders of `diff_convolution`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orders: Option<Vec<u32>>,
    /// Dyadic levels of `diff_convolution`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<i32>>,
    /// Number of fields per vector in `fs_maximal`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<usize>,
    /// Explicit bounds for fitted checks, replacing the frozen ones.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    /// Bands removed from the partition before running (fault injection).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_bands: Option<Vec<i32>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantSource {
    Exact,
    Proof,
    Fitted,
    Frozen,
    Given,
}

/// Bounds on `lhs / rhs`: `lower <= ratio <= upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constant {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    pub source: ConstantSource,
}

impl Constant {
    pub fn upper(upper: f64, source: ConstantSource) -> Self {
        Self {
            lower: None,
            upper: Some(upper),
            source,
        }
    }

    pub fn two_sided(lower: f64, upper: f64, source: ConstantSource) -> Self {
        Self {
            lower: Some(lower),
            upper: Some(upper),
            source,
        }
    }

    /// `lhs` within the bounds times `rhs`, with relative slack `tol` and
    /// [`ABSOLUTE_SLACK`].
    pub fn admits(&self, lhs: f64, rhs: f64, tol: f64) -> bool {
        let above = self
            .upper
            .is_none_or(|c| lhs <= c * rhs * (1.0 + tol) + ABSOLUTE_SLACK);
        let below = self
            .lower
            .is_none_or(|c| lhs >= c * rhs * (1.0 - tol) - ABSOLUTE_SLACK);
        above && below && lhs.is_finite() && rhs.is_finite()
    }
}

/// Both sides of one inequality instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub pass: bool,
}

impl Instance {
    pub fn new(label: impl Into<String>, lhs: f64, rhs: f64, pass: bool) -> Self {
        let ratio = if rhs != 0.0 {
            lhs / rhs
        } else if lhs == 0.0 {
            1.0
        } else {
            f64::INFINITY
        };
        Self {
            label: label.into(),
            lhs,
            rhs,
            ratio,
            pass,
        }
    }

    pub fn bounded(label: impl Into<String>, lhs: f64, rhs: f64, c: &Constant, tol: f64) -> Self {
        Self::new(label, lhs, rhs, c.admits(lhs, rhs, tol))
    }
}

/// Ratio statistics over the instances with a finite ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl Summary {
    pub fn of(instances: &[Instance]) -> Self {
        let ratios: Vec<f64> = instances
            .iter()
            .map(|i| i.ratio)
            .filter(|r| r.is_finite())
            .collect();
        if ratios.is_empty() {
            return Self {
                count: 0,
                min: 0.0,
                max: 0.0,
                mean: 0.0,
            };
        }
        Self {
            count: ratios.len(),
            min: ratios.iter().copied().fold(f64::INFINITY, f64::min),
            max: ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean: ratios.iter().sum::<f64>() / ratios.len() as f64,
        }
    }
}

/// Outcome of one check over one family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub check: String,
    pub params: CheckParams,
    pub instances: Vec<Instance>,
    pub summary: Summary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<Constant>,
    /// Relative slack of the check's predicate.
    pub tolerance: f64,
    pub pass: bool,
}

impl ExperimentReport {
    fn assemble(check: &str, params: &CheckParams, outcome: checks::Outcome) -> Self {
        let pass = outcome.instances.iter().all(|i| i.pass);
        Self {
            check: check.to_string(),
            params: params.clone(),
            summary: Summary::of(&outcome.instances),
            instances: outcome.instances,
            constant: outcome.constant,
            tolerance: outcome.tolerance,
            pass,
        }
    }
}

/// The default-cutoff partition of the family's grid with `zero_bands` removed.
pub fn check_partition(family: &FunctionFamily, params: &CheckParams) -> Result<DyadicPartition> {
    let mut partition = DyadicPartition::new(&family.grid, build_cutoff())?;
    for &j in params.zero_bands.iter().flatten() {
        partition = partition.with_band_zeroed(j)?;
    }
    Ok(partition)
}

fn ensure_known(check_id: &str) -> Result<()> {
    if CATALOG.contains(&check_id) {
        Ok(())
    } else {
        Err(Error::UnknownCheck(check_id.to_string()))
    }
}

/// Runs `check_id` over every member of `family`.
///
/// Fitted checks use `params.lower` / `params.upper` when given and the
/// frozen constants otherwise.
pub fn run_check(
    check_id: &str,
    family: &FunctionFamily,
    params: &CheckParams,
) -> Result<ExperimentReport> {
    ensure_known(check_id)?;
    let partition = check_partition(family, params)?;
    let members = family.members()?;
    let bounds = fitted_bounds(check_id, params);
    let outcome = checks::run(check_id, &members, &partition, params, bounds)?;
    Ok(ExperimentReport::assemble(check_id, params, outcome))
}

fn fitted_bounds(check_id: &str, params: &CheckParams) -> Option<Constant> {
    if !FITTED_CHECKS.contains(&check_id) {
        return None;
    }
    if params.lower.is_some() || params.upper.is_some() {
        return Some(Constant {
            lower: params.lower,
            upper: params.upper,
            source: ConstantSource::Given,
        });
    }
    frozen::lookup(check_id).map(|f| f.constant())
}

/// Fitted constant plus the two runs behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub check: String,
    pub constant: Constant,
    pub calibration: ExperimentReport,
    pub validation: ExperimentReport,
}

/// Fits a constant from the extreme calibration ratios (with [`FIT_MARGIN`]),
/// then validates it on a family with a different seed.
pub fn fit_constant(
    check_id: &str,
    calibration: &FunctionFamily,
    validation: &FunctionFamily,
    params: &CheckParams,
) -> Result<FitReport> {
    ensure_known(check_id)?;
    if !FITTED_CHECKS.contains(&check_id) {
        return Err(Error::InvalidParameter(format!(
            "`{check_id}` has no fitted constant"
        )));
    }
    if calibration.seed == validation.seed {
        return Err(Error::SameSeeds);
    }
    let unbounded = Constant {
        lower: None,
        upper: None,
        source: ConstantSource::Fitted,
    };
    let partition = check_partition(calibration, params)?;
    let outcome = checks::run(
        check_id,
        &calibration.members()?,
        &partition,
        params,
        Some(unbounded),
    )?;
    let calibration_report = ExperimentReport::assemble(check_id, params, outcome);
    let s = calibration_report.summary;
    let constant = match check_id {
        "phi_independence" => {
            let c = s.max.max(1.0 / s.min) * FIT_MARGIN;
            Constant::two_sided(1.0 / c, c, ConstantSource::Fitted)
        }
        "holder_equiv" => Constant::two_sided(
            s.min / FIT_MARGIN,
            s.max * FIT_MARGIN,
            ConstantSource::Fitted,
        ),
        _ => Constant::upper(s.max * FIT_MARGIN, ConstantSource::Fitted),
    };
    let partition = check_partition(validation, params)?;
    let outcome = checks::run(
        check_id,
        &validation.members()?,
        &partition,
        params,
        Some(constant),
    )?;
    let validation_report = ExperimentReport::assemble(check_id, params, outcome);
    if !validation_report.pass {
        let worst = validation_report
            .instances
            .iter()
            .find(|i| !i.pass)
            .expect("a failing instance");
        return Err(Error::ValidationFailed {
            check: check_id.to_string(),
            detail: format!("{} has ratio {:.6e}", worst.label, worst.ratio),
        });
    }
    Ok(FitReport {
        check: check_id.to_string(),
        constant,
        calibration: calibration_report,
        validation: validation_report,
    })
}
