use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{lp_norm_of_moduli, Exponent, GridSpec, SampledField};

/// Discrete ball as row segments `(row offset, first column offset, last column offset)`.
/// Offsets are distinct modulo `N`: both coordinates stay in `[-N/2, N/2)`.
#[derive(Debug, Clone)]
struct Ball {
    segments: Vec<(i64, i64, i64)>,
    count: usize,
}

fn isqrt(v: i64) -> i64 {
    let mut r = (v as f64).sqrt() as i64;
    while r * r > v {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= v {
        r += 1;
    }
    r
}

impl Ball {
    fn new(grid: &GridSpec, r: i64) -> Self {
        let half = (grid.points_per_axis() / 2) as i64;
        let clip = |lo: i64, hi: i64| (lo.max(-half), hi.min(half - 1));
        let rows = if grid.dim() == 1 { (0, 0) } else { clip(-r, r) };
        let mut segments = Vec::new();
        let mut count = 0;
        for a in rows.0..=rows.1 {
            let w = isqrt(r * r - a * a);
            let (lo, hi) = clip(-w, w);
            count += (hi - lo + 1) as usize;
            segments.push((a, lo, hi));
        }
        Ball { segments, count }
    }

    fn volume(&self, grid: &GridSpec) -> f64 {
        self.count as f64 * grid.cell_volume()
    }

    /// Flat indices covered when centred at `flat`.
    fn points(&self, grid: &GridSpec, flat: usize) -> impl Iterator<Item = usize> + '_ {
        let n = grid.points_per_axis() as i64;
        let dim = grid.dim();
        let [r0, c0] = grid.unflatten(flat);
        let (row, col) = if dim == 1 {
            (0, r0 as i64)
        } else {
            (r0 as i64, c0 as i64)
        };
        self.segments.iter().flat_map(move |&(a, lo, hi)| {
            let rr = (row + a).rem_euclid(n) as usize;
            (lo..=hi).map(move |b| {
                let cc = (col + b).rem_euclid(n) as usize;
                if dim == 1 {
                    cc
                } else {
                    rr * n as usize + cc
                }
            })
        })
    }
}

/// Per-row cyclic prefix sums.
struct RowSums {
    n: usize,
    prefix: Vec<Vec<f64>>,
}

impl RowSums {
    fn new(grid: &GridSpec, values: &[f64]) -> Self {
        let n = grid.points_per_axis();
        let prefix = values
            .chunks(n)
            .map(|row| {
                let mut p = Vec::with_capacity(n + 1);
                p.push(0.0);
                let mut acc = 0.0;
                for v in row {
                    acc += v;
                    p.push(acc);
                }
                p
            })
            .collect();
        Self { n, prefix }
    }

    fn segment(&self, row: usize, start: i64, len: usize) -> f64 {
        let p = &self.prefix[row];
        let s = start.rem_euclid(self.n as i64) as usize;
        let e = s + len;
        if e <= self.n {
            p[e] - p[s]
        } else {
            p[self.n] - p[s] + p[e - self.n]
        }
    }
}

/// Powered Hardy-Littlewood maximal function `M^{(eta)} f`, brute force over
/// grid-centred balls of radius `0, h, ..., L/2`.
pub fn maximal_op(f: &SampledField, eta: f64) -> Result<SampledField> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "eta must be positive, got {eta}"
        )));
    }
    let grid = *f.grid();
    let n = grid.points_per_axis() as i64;
    let powered: Vec<f64> = f.values().iter().map(|v| v.norm().powf(eta)).collect();
    let sums = RowSums::new(&grid, &powered);
    let balls: Vec<Ball> = (1..=n / 2).map(|r| Ball::new(&grid, r)).collect();
    let values: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .map(|flat| {
            let [i0, i1] = grid.unflatten(flat);
            let (row, col) = if grid.dim() == 1 {
                (0, i0 as i64)
            } else {
                (i0 as i64, i1 as i64)
            };
            let mut best = 0.0f64;
            for ball in &balls {
                let total: f64 = ball
                    .segments
                    .iter()
                    .map(|&(a, lo, hi)| {
                        let rr = (row + a).rem_euclid(n) as usize;
                        sums.segment(rr, col + lo, (hi - lo + 1) as usize)
                    })
                    .sum();
                best = best.max(total / ball.count as f64);
            }
            // the radius-0 ball is taken without the power round trip
            Complex64::new(best.powf(1.0 / eta).max(f.values()[flat].norm()), 0.0)
        })
        .collect();
    SampledField::new(grid, values)
}

fn oscillation(f: &SampledField, ball: &Ball, flat: usize) -> f64 {
    let grid = f.grid();
    let vals = f.values();
    let mean: Complex64 =
        ball.points(grid, flat).map(|i| vals[i]).sum::<Complex64>() / ball.count as f64;
    ball.points(grid, flat)
        .map(|i| (vals[i] - mean).norm())
        .sum::<f64>()
        / ball.count as f64
}

fn sup_over_centres<F: Fn(usize) -> f64 + Sync + Send>(grid: &GridSpec, term: F) -> f64 {
    let values: Vec<f64> = (0..grid.len()).into_par_iter().map(term).collect();
    values.into_iter().fold(0.0, f64::max)
}

/// BMO norm over grid-centred balls of radius at most `L/4`, by direct summation.
///
/// With `local`, the oscillation term runs over balls of volume at most one
/// (the single cell is always included) and the ball whose volume is closest
/// to one contributes `sup int_B |f|`.
pub fn bmo_norm(f: &SampledField, local: bool) -> f64 {
    let grid = *f.grid();
    let n = grid.points_per_axis() as i64;
    let family: Vec<Ball> = (1..=n / 4)
        .map(|r| Ball::new(&grid, r))
        .filter(|b| !local || b.volume(&grid) <= 1.0)
        .collect();
    let osc = sup_over_centres(&grid, |flat| {
        family
            .iter()
            .map(|b| oscillation(f, b, flat))
            .fold(0.0, f64::max)
    });
    if !local {
        return osc;
    }
    let unit = (0..=n / 2)
        .map(|r| Ball::new(&grid, r))
        .min_by(|a, b| {
            let da = (a.volume(&grid) - 1.0).abs();
            let db = (b.volume(&grid) - 1.0).abs();
            da.total_cmp(&db)
        })
        .expect("at least one radius");
    let vals = f.values();
    let mass = sup_over_centres(&grid, |flat| {
        unit.points(&grid, flat)
            .map(|i| vals[i].norm())
            .sum::<f64>()
            * grid.cell_volume()
    });
    mass + osc
}

/// One instance of the vector-valued maximal inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FsReport {
    /// `|| (sum_j (M f_j)^q)^{1/q} ||_p`.
    pub lhs: f64,
    /// `|| (sum_j |f_j|^q)^{1/q} ||_p`.
    pub rhs: f64,
    pub ratio: f64,
}

fn lq_pointwise(columns: &[Vec<f64>], q: Exponent) -> Vec<f64> {
    let len = columns[0].len();
    (0..len)
        .map(|i| q.aggregate(columns.iter().map(|c| c[i])))
        .collect()
}

/// Evaluates both sides of the Fefferman-Stein inequality with `M = M^{(eta)}`.
pub fn fs_vector_check(fields: &[SampledField], p: f64, q: f64, eta: f64) -> Result<FsReport> {
    let first = fields
        .first()
        .ok_or_else(|| Error::InvalidParameter("at least one field is required".into()))?;
    if fields.iter().any(|f| f.grid() != first.grid()) {
        return Err(Error::GridMismatch);
    }
    let (p, q) = (Exponent::new(p)?, Exponent::new(q)?);
    let grid = first.grid();
    let mut maximal = Vec::with_capacity(fields.len());
    for f in fields {
        maximal.push(
            maximal_op(f, eta)?
                .values()
                .iter()
                .map(|v| v.re)
                .collect::<Vec<_>>(),
        );
    }
    let moduli: Vec<Vec<f64>> = fields
        .iter()
        .map(|f| f.values().iter().map(|v| v.norm()).collect())
        .collect();
    let lhs = lp_norm_of_moduli(&lq_pointwise(&maximal, q), grid.cell_volume(), p);
    let rhs = lp_norm_of_moduli(&lq_pointwise(&moduli, q), grid.cell_volume(), p);
    Ok(FsReport {
        lhs,
        rhs,
        ratio: lhs / rhs,
    })
}
