//! Fourier multipliers (lift, Riesz, heat) and real-space functionals.
//!
//! Multiplier symbols are tabulated on the lattice. Lift and Riesz vanish at
//! the origin. Symbols that are odd in `xi_k` also vanish on the Nyquist line
//! `k = -N/2` of that axis: the lattice contains no partner `+N/2` there, so
//! any other value would turn real fields complex.

mod maximal;
mod poincare;

pub use maximal::{bmo_norm, fs_vector_check, maximal_op, FsReport};
pub use poincare::{derivative, derivative_symbol, poincare_reconstruct, PartialDerivativeSet};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{
    forward_transform, inverse_transform, lp_norm_of_moduli, Exponent, GridSpec, SampledField,
};

/// The three named multipliers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum MultiplierSpec {
    /// `|xi|^alpha`.
    Lift { alpha: f64 },
    /// `-i xi_k / |xi|`, `axis` counted from 1.
    Riesz { axis: usize },
    /// `exp(-t |xi|^2)`.
    Heat { t: f64 },
}

impl MultiplierSpec {
    pub fn symbol(&self, grid: &GridSpec) -> Result<Vec<Complex64>> {
        match *self {
            MultiplierSpec::Lift { alpha } => Ok(lift_symbol(grid, alpha)
                .into_iter()
                .map(|v| Complex64::new(v, 0.0))
                .collect()),
            MultiplierSpec::Riesz { axis } => riesz_symbol(grid, axis),
            MultiplierSpec::Heat { t } => Ok(heat_symbol(grid, t)?
                .into_iter()
                .map(|v| Complex64::new(v, 0.0))
                .collect()),
        }
    }

    pub fn apply(&self, f: &SampledField) -> Result<SampledField> {
        match *self {
            MultiplierSpec::Lift { alpha } => Ok(lift(f, alpha)),
            MultiplierSpec::Riesz { axis } => riesz(f, axis),
            MultiplierSpec::Heat { t } => heat(f, t),
        }
    }
}

/// `|xi|^alpha` off the origin, `0` at the origin.
pub fn lift_symbol(grid: &GridSpec, alpha: f64) -> Vec<f64> {
    grid.lattice()
        .iter()
        .map(|pt| {
            if pt.is_origin() {
                0.0
            } else {
                pt.radius.powf(alpha)
            }
        })
        .collect()
}

/// `-i xi_k / |xi|` for the 1-based `axis`.
pub fn riesz_symbol(grid: &GridSpec, axis: usize) -> Result<Vec<Complex64>> {
    if axis < 1 || axis > grid.dim() {
        return Err(Error::InvalidAxis {
            axis,
            dim: grid.dim(),
        });
    }
    let a = axis - 1;
    let nyquist = -((grid.points_per_axis() / 2) as i64);
    Ok(grid
        .lattice()
        .iter()
        .map(|pt| {
            if pt.is_origin() || pt.k[a] == nyquist {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, -pt.xi[a] / pt.radius)
            }
        })
        .collect())
}

pub fn heat_symbol(grid: &GridSpec, t: f64) -> Result<Vec<f64>> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "heat time must be positive, got {t}"
        )));
    }
    Ok(grid
        .lattice()
        .iter()
        .map(|pt| (-t * pt.radius * pt.radius).exp())
        .collect())
}

/// `(-Delta)^{alpha/2} f`; the mean is annihilated.
pub fn lift(f: &SampledField, alpha: f64) -> SampledField {
    let symbol = lift_symbol(f.grid(), alpha);
    inverse_transform(&forward_transform(f).multiplied_real(&symbol))
}

/// Riesz transform along the 1-based `axis`.
pub fn riesz(f: &SampledField, axis: usize) -> Result<SampledField> {
    let symbol = riesz_symbol(f.grid(), axis)?;
    Ok(inverse_transform(&forward_transform(f).multiplied(&symbol)))
}

/// `e^{t Delta} f`.
pub fn heat(f: &SampledField, t: f64) -> Result<SampledField> {
    let symbol = heat_symbol(f.grid(), t)?;
    Ok(inverse_transform(
        &forward_transform(f).multiplied_real(&symbol),
    ))
}

/// Default time grid of the heat maximal function: 32 geometric points on `[h^2, 4]`.
pub fn default_t_grid(grid: &GridSpec) -> Vec<f64> {
    const POINTS: usize = 32;
    let lo = grid.spacing().powi(2);
    let hi = 4.0f64;
    let ratio = (hi / lo).powf(1.0 / (POINTS - 1) as f64);
    (0..POINTS)
        .map(|i| {
            if i == POINTS - 1 {
                hi
            } else {
                lo * ratio.powi(i as i32)
            }
        })
        .collect()
}

/// `|| sup_t |e^{t Delta} f| ||_p` over `t_grid`; `local` keeps only `t < 1`.
pub fn hardy_norm(f: &SampledField, p: f64, t_grid: &[f64], local: bool) -> Result<f64> {
    let p = match Exponent::new(p)? {
        Exponent::Infinite => {
            return Err(Error::InvalidParameter(
                "Hardy norm requires p < inf".into(),
            ))
        }
        finite => finite,
    };
    if t_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter("time grid must be sorted".into()));
    }
    let times: Vec<f64> = t_grid
        .iter()
        .copied()
        .filter(|&t| !local || t < 1.0)
        .collect();
    if times.is_empty() {
        return Err(Error::EmptyTimeGrid);
    }
    let grid = *f.grid();
    let spectrum = forward_transform(f);
    let mut sup = vec![0.0f64; grid.len()];
    for t in times {
        let smoothed = inverse_transform(&spectrum.multiplied_real(&heat_symbol(&grid, t)?));
        for (s, v) in sup.iter_mut().zip(smoothed.values()) {
            *s = s.max(v.norm());
        }
    }
    Ok(lp_norm_of_moduli(&sup, grid.cell_volume(), p))
}
