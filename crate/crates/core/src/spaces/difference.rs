use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{GridSpec, SampledField};

/// Relative distance (in grid cells) below which a physical shift counts as a
/// lattice vector.
const LATTICE_TOLERANCE: f64 = 1e-9;

/// `C(m, l)` as a float; exact for the orders used here.
pub fn binomial(m: u32, l: u32) -> f64 {
    if l > m {
        return 0.0;
    }
    let l = l.min(m - l);
    let mut c = 1.0;
    for i in 0..l {
        c = c * (m - i) as f64 / (i + 1) as f64;
    }
    c.round()
}

/// Converts a physical shift to whole grid cells per axis.
pub fn lattice_shift(grid: &GridSpec, y: &[f64]) -> Result<Vec<i64>> {
    if y.len() != grid.dim() {
        return Err(Error::LengthMismatch {
            expected: grid.dim(),
            actual: y.len(),
        });
    }
    let h = grid.spacing();
    let mut cells = Vec::with_capacity(y.len());
    for &yi in y {
        let c = yi / h;
        if !c.is_finite() || (c - c.round()).abs() > LATTICE_TOLERANCE * c.abs().max(1.0) {
            return Err(Error::NonLatticeShift(y.to_vec()));
        }
        cells.push(c.round() as i64);
    }
    Ok(cells)
}

fn check_shift(grid: &GridSpec, cells: &[i64], m: u32) -> Result<()> {
    if m < 1 {
        return Err(Error::InvalidOrder);
    }
    if cells.len() != grid.dim() {
        return Err(Error::LengthMismatch {
            expected: grid.dim(),
            actual: cells.len(),
        });
    }
    Ok(())
}

/// `Delta^m_y f = sum_{l=0}^m (-1)^{m-l} C(m,l) f(. + l y)` with `y` in grid cells.
pub fn difference(f: &SampledField, cells: &[i64], m: u32) -> Result<SampledField> {
    let grid = *f.grid();
    check_shift(&grid, cells, m)?;
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
    for l in 0..=m {
        let sign = if (m - l).is_multiple_of(2) { 1.0 } else { -1.0 };
        let c = sign * binomial(m, l);
        let shift: Vec<i64> = cells.iter().map(|&y| y * l as i64).collect();
        let shifted = f.shifted(&shift);
        for (a, v) in acc.iter_mut().zip(shifted.values()) {
            *a += c * v;
        }
    }
    SampledField::new(grid, acc)
}

/// Same operator through `Delta^{m}_y = Delta^1_y Delta^{m-1}_y`.
pub fn difference_recursive(f: &SampledField, cells: &[i64], m: u32) -> Result<SampledField> {
    check_shift(f.grid(), cells, m)?;
    let mut g = f.clone();
    for _ in 0..m {
        g = g.shifted(cells).sub(&g)?;
    }
    Ok(g)
}

/// `(sum_{l=1}^m (-1)^l l^m C(m,l), (-1)^m m!)` in exact integer arithmetic.
pub fn alternating_sum_identity(m: u32) -> Result<(i128, i128)> {
    if m < 1 {
        return Err(Error::InvalidOrder);
    }
    let overflow = || Error::Overflow { m };
    let mut lhs: i128 = 0;
    let mut binom: i128 = 1;
    for l in 1..=m as i128 {
        binom = binom.checked_mul(m as i128 - l + 1).ok_or_else(overflow)? / l;
        let power = l.checked_pow(m).ok_or_else(overflow)?;
        let term = power.checked_mul(binom).ok_or_else(overflow)?;
        lhs = if l % 2 == 0 {
            lhs.checked_add(term)
        } else {
            lhs.checked_sub(term)
        }
        .ok_or_else(overflow)?;
    }
    let mut factorial: i128 = 1;
    for i in 2..=m as i128 {
        factorial = factorial.checked_mul(i).ok_or_else(overflow)?;
    }
    let rhs = if m.is_multiple_of(2) {
        factorial
    } else {
        -factorial
    };
    Ok((lhs, rhs))
}

/// Nonzero lattice shifts with `|y| <= L/4`, one representative of each `+-y` pair.
pub fn default_shift_set(grid: &GridSpec) -> Vec<Vec<i64>> {
    let r = (grid.points_per_axis() / 4) as i64;
    let mut out = Vec::new();
    if grid.dim() == 1 {
        out.extend((1..=r).map(|c| vec![c]));
    } else {
        for a in 0..=r {
            for b in -r..=r {
                if (a == 0 && b <= 0) || a * a + b * b > r * r {
                    continue;
                }
                out.push(vec![a, b]);
            }
        }
    }
    out
}

/// `max_y ||Delta^m_y f||_inf / |y|^s` over `shifts` (in cells), `m = floor(s) + 1`.
pub fn hz_seminorm(f: &SampledField, s: f64, shifts: &[Vec<i64>]) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "smoothness must be positive, got {s}"
        )));
    }
    if shifts.is_empty() {
        return Err(Error::EmptyShiftSet);
    }
    let m = s.floor() as u32 + 1;
    let h = f.grid().spacing();
    let mut best = 0.0f64;
    for cells in shifts {
        if cells.iter().all(|&c| c == 0) {
            return Err(Error::InvalidParameter("zero shift in shift set".into()));
        }
        let len = h * (cells.iter().map(|&c| (c * c) as f64).sum::<f64>()).sqrt();
        let d = difference(f, cells, m)?;
        best = best.max(d.sup_norm() / len.powf(s));
    }
    Ok(best)
}
