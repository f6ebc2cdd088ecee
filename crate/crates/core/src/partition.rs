//! Smooth radial cutoff and the dyadic Littlewood-Paley family built from it.
//!
//! With `psi = 1` on `|xi| <= 1` and `psi = 0` on `|xi| >= 2`, the bands are
//! `phi_j = psi(2^{-j} .) - psi(2^{-j+1} .)`, supported on the open annulus
//! `2^{j-1} < |xi| < 2^{j+1}`. The band range is chosen per grid so that the
//! telescoping sum equals one at every nonzero lattice frequency.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{GridSpec, LatticePoint};

/// Tolerance used by [`DyadicPartition::validate`].
pub const PARTITION_TOLERANCE: f64 = 1e-12;

/// Smooth step `h` used in `psi(r) = h(2 - r) / (h(2 - r) + h(r - 1))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Transition {
    /// `h(t) = exp(-1/t)`.
    #[default]
    Exp,
    /// `h(t) = exp(-1/t^2)`.
    ExpSquared,
}

impl Transition {
    fn h(self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            Transition::Exp => (-1.0 / t).exp(),
            Transition::ExpSquared => (-1.0 / (t * t)).exp(),
        }
    }
}

/// Radial profile `psi` with `chi_{B(1)} <= psi <= chi_{B(2)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub struct CutoffProfile {
    pub transition: Transition,
}

impl CutoffProfile {
    pub const INNER_RADIUS: f64 = 1.0;
    pub const OUTER_RADIUS: f64 = 2.0;

    pub fn new(transition: Transition) -> Self {
        Self { transition }
    }

    /// `psi(r)` for `r >= 0`.
    pub fn eval(&self, r: f64) -> f64 {
        if r <= Self::INNER_RADIUS {
            1.0
        } else if r >= Self::OUTER_RADIUS {
            0.0
        } else {
            let a = self.transition.h(2.0 - r);
            let b = self.transition.h(r - 1.0);
            a / (a + b)
        }
    }

    /// `phi_j(r) = psi(2^{-j} r) - psi(2^{-j+1} r)`.
    pub fn band(&self, j: i32, r: f64) -> f64 {
        self.eval(r * 2f64.powi(-j)) - self.eval(r * 2f64.powi(1 - j))
    }
}

/// Default cutoff with the `exp(-1/t)` transition.
pub fn build_cutoff() -> CutoffProfile {
    CutoffProfile::new(Transition::Exp)
}

/// Inclusive range of band indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandRange {
    pub j_min: i32,
    pub j_max: i32,
}

impl BandRange {
    /// Range that makes the telescoping sum exact on `grid`, with one spare
    /// band at each end.
    pub fn for_grid(grid: &GridSpec) -> Self {
        let lo = grid.min_radius();
        let hi = grid.max_radius();
        // largest j with 2^j <= lo, smallest j with 2^j >= hi (exact powers of two)
        let mut j_lo = 0i32;
        while 2f64.powi(j_lo) > lo {
            j_lo -= 1;
        }
        while 2f64.powi(j_lo + 1) <= lo {
            j_lo += 1;
        }
        let mut j_hi = j_lo;
        while 2f64.powi(j_hi) < hi {
            j_hi += 1;
        }
        Self {
            j_min: j_lo - 1,
            j_max: j_hi + 1,
        }
    }

    pub fn contains(&self, j: i32) -> bool {
        (self.j_min..=self.j_max).contains(&j)
    }

    pub fn len(&self) -> usize {
        (self.j_max - self.j_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.j_max < self.j_min
    }

    pub fn iter(&self) -> impl Iterator<Item = i32> {
        self.j_min..=self.j_max
    }

    fn check(&self, j: i32) -> Result<()> {
        if self.contains(j) {
            Ok(())
        } else {
            Err(Error::BandOutOfRange {
                j,
                j_min: self.j_min,
                j_max: self.j_max,
            })
        }
    }
}

/// The band multipliers `phi_j` tabulated on a grid's frequency lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicPartition {
    grid: GridSpec,
    cutoff: CutoffProfile,
    range: BandRange,
    lattice: Vec<LatticePoint>,
    bands: Vec<Vec<f64>>,
}

/// Outcome of [`DyadicPartition::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionReport {
    /// Largest `|phi_j|` outside the band's open annulus.
    pub support_violation: f64,
    /// Largest excursion of `phi_j` outside `[0, 1]`.
    pub range_violation: f64,
    /// Largest `|sum_j phi_j - 1|` over nonzero lattice frequencies.
    pub telescoping_violation: f64,
    /// Frequency (lattice wavenumbers) where the telescoping violation peaks.
    pub worst_frequency: [i64; 2],
    /// Largest number of bands simultaneously nonzero at one frequency.
    pub max_overlap: usize,
    pub pass: bool,
}

/// Tabulates the partition for `grid`.
pub fn build_partition(grid: &GridSpec, cutoff: CutoffProfile) -> Result<DyadicPartition> {
    DyadicPartition::new(grid, cutoff)
}

impl DyadicPartition {
    pub fn new(grid: &GridSpec, cutoff: CutoffProfile) -> Result<Self> {
        let range = BandRange::for_grid(grid);
        Self::with_range(grid, cutoff, range)
    }

    /// Partition over an explicit band range (no exactness guarantee).
    pub fn with_range(grid: &GridSpec, cutoff: CutoffProfile, range: BandRange) -> Result<Self> {
        if range.is_empty() || range.len() < 3 {
            return Err(Error::TooFewBands {
                bands: if range.is_empty() { 0 } else { range.len() },
            });
        }
        let lattice = grid.lattice();
        let bands = range
            .iter()
            .map(|j| lattice.iter().map(|pt| cutoff.band(j, pt.radius)).collect())
            .collect();
        Ok(Self {
            grid: *grid,
            cutoff,
            range,
            lattice,
            bands,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn cutoff(&self) -> &CutoffProfile {
        &self.cutoff
    }

    pub fn range(&self) -> BandRange {
        self.range
    }

    pub fn lattice(&self) -> &[LatticePoint] {
        &self.lattice
    }

    /// Values of `phi_j` in lattice storage order.
    pub fn band(&self, j: i32) -> Result<&[f64]> {
        self.range.check(j)?;
        Ok(&self.bands[(j - self.range.j_min) as usize])
    }

    /// `(j, phi_j)` pairs in increasing `j`.
    pub fn bands(&self) -> impl Iterator<Item = (i32, &[f64])> {
        self.range.iter().zip(self.bands.iter().map(Vec::as_slice))
    }

    /// `phi_{j-1} + phi_j + phi_{j+1}`, treating bands outside the range as zero.
    pub fn neighborhood(&self, j: i32) -> Result<Vec<f64>> {
        self.range.check(j)?;
        let mut sum = vec![0.0; self.lattice.len()];
        for jj in j - 1..=j + 1 {
            if let Ok(b) = self.band(jj) {
                for (s, v) in sum.iter_mut().zip(b) {
                    *s += v;
                }
            }
        }
        Ok(sum)
    }

    /// Low-pass block `psi(2^{-j_split} xi)`.
    pub fn low_block(&self, j_split: i32) -> Vec<f64> {
        let scale = 2f64.powi(-j_split);
        self.lattice
            .iter()
            .map(|pt| self.cutoff.eval(pt.radius * scale))
            .collect()
    }

    /// `sum_j phi_j` at every lattice point.
    pub fn band_sum(&self) -> Vec<f64> {
        let mut sum = vec![0.0; self.lattice.len()];
        for band in &self.bands {
            for (s, v) in sum.iter_mut().zip(band) {
                *s += v;
            }
        }
        sum
    }

    /// Copy with band `j` replaced by zeros; used to build failing fixtures.
    pub fn with_band_zeroed(&self, j: i32) -> Result<Self> {
        self.range.check(j)?;
        let mut out = self.clone();
        out.bands[(j - self.range.j_min) as usize]
            .iter_mut()
            .for_each(|v| *v = 0.0);
        Ok(out)
    }

    /// Checks support, range and telescoping invariants on the lattice.
    pub fn validate(&self) -> PartitionReport {
        let mut support: f64 = 0.0;
        let mut range: f64 = 0.0;
        for (j, band) in self.bands() {
            let inner = 2f64.powi(j - 1);
            let outer = 2f64.powi(j + 1);
            for (pt, &v) in self.lattice.iter().zip(band) {
                if pt.radius <= inner || pt.radius >= outer {
                    support = support.max(v.abs());
                }
                range = range.max(-v).max(v - 1.0);
            }
        }
        let sum = self.band_sum();
        let mut telescoping: f64 = 0.0;
        let mut worst = [0, 0];
        for (pt, s) in self.lattice.iter().zip(&sum) {
            if pt.is_origin() {
                continue;
            }
            let err = (s - 1.0).abs();
            if err > telescoping {
                telescoping = err;
                worst = pt.k;
            }
        }
        let max_overlap = (0..self.lattice.len())
            .map(|i| self.bands.iter().filter(|b| b[i] != 0.0).count())
            .max()
            .unwrap_or(0);
        let pass = support <= PARTITION_TOLERANCE
            && range <= PARTITION_TOLERANCE
            && telescoping <= PARTITION_TOLERANCE
            && max_overlap <= 2;
        PartitionReport {
            support_violation: support,
            range_violation: range,
            telescoping_violation: telescoping,
            worst_frequency: worst,
            max_overlap,
            pass,
        }
    }

    /// Per-band CSV dump `j,k[,k1],value`, nonzero entries only, in storage order.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if self.grid.dim() == 1 {
            out.push_str("j,k,value\n");
        } else {
            out.push_str("j,k0,k1,value\n");
        }
        for (j, band) in self.bands() {
            for (pt, &v) in self.lattice.iter().zip(band) {
                if v == 0.0 {
                    continue;
                }
                if self.grid.dim() == 1 {
                    let _ = writeln!(out, "{j},{},{v:.17e}", pt.k[0]);
                } else {
                    let _ = writeln!(out, "{j},{},{},{v:.17e}", pt.k[0], pt.k[1]);
                }
            }
        }
        out
    }
}

/// Convenience wrapper around [`DyadicPartition::validate`].
pub fn validate_partition(p: &DyadicPartition) -> PartitionReport {
    p.validate()
}
