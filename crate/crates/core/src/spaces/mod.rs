//! Band projections and the Besov / Triebel-Lizorkin scales.
//!
//! Homogeneous norms work modulo constants (the only polynomials on the
//! torus): the `xi = 0` coefficient never enters. Nonhomogeneous norms add the
//! low block `psi(2^{-j_split} D) f` and keep only bands `j > j_split`.

mod difference;

use std::fmt::Write as _;

pub use difference::{
    alternating_sum_identity, binomial, default_shift_set, difference, difference_recursive,
    hz_seminorm, lattice_shift,
};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::DyadicPartition;
use crate::spectral::{
    forward_transform, inverse_transform, lp_norm, lp_norm_of_moduli, Exponent, SampledField,
    SpectralField,
};

/// Default split index between the low block and the bands of nonhomogeneous norms.
pub const DEFAULT_SPLIT: i32 = 0;

/// Which of the four scales a norm is taken in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    BesovHomog,
    BesovNonhomog,
    TlHomog,
    TlNonhomog,
}

impl SpaceKind {
    pub fn is_homogeneous(self) -> bool {
        matches!(self, SpaceKind::BesovHomog | SpaceKind::TlHomog)
    }

    pub fn is_besov(self) -> bool {
        matches!(self, SpaceKind::BesovHomog | SpaceKind::BesovNonhomog)
    }
}

/// Smoothness `s`, integrability `p`, summability `q` and the scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceParams {
    pub s: f64,
    pub p: Exponent,
    pub q: Exponent,
    pub kind: SpaceKind,
}

impl SpaceParams {
    pub fn new(s: f64, p: Exponent, q: Exponent, kind: SpaceKind) -> Result<Self> {
        let params = Self { s, p, q, kind };
        params.validate()?;
        Ok(params)
    }

    pub fn besov(s: f64, p: f64, q: f64) -> Result<Self> {
        Self::new(
            s,
            Exponent::new(p)?,
            Exponent::new(q)?,
            SpaceKind::BesovHomog,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !self.s.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "s must be finite, got {}",
                self.s
            )));
        }
        for e in [self.p, self.q] {
            if let Exponent::Finite(v) = e {
                Exponent::new(v)?;
            }
        }
        if !self.kind.is_besov() && self.p.is_infinite() {
            return Err(Error::InvalidParameter(
                "Triebel-Lizorkin norms require p < inf".into(),
            ));
        }
        Ok(())
    }

    pub fn with_kind(self, kind: SpaceKind) -> Self {
        Self { kind, ..self }
    }
}

/// Band projections of one field.
#[derive(Debug, Clone, PartialEq)]
pub struct BandDecomposition {
    /// `(j, F^{-1}[phi_j F f])`, increasing in `j`.
    pub entries: Vec<(i32, SampledField)>,
    /// `F^{-1}[psi(2^{-j_split} .) F f]` for nonhomogeneous decompositions.
    pub low_block: Option<SampledField>,
    /// Split index when `low_block` is present.
    pub j_split: Option<i32>,
    /// The `xi = 0` component (the mean, as a constant field).
    pub dc: SampledField,
}

impl BandDecomposition {
    pub fn is_homogeneous(&self) -> bool {
        self.low_block.is_none()
    }

    /// Sum of all pieces; equals the source field up to roundoff.
    pub fn reconstruct(&self) -> SampledField {
        let base = self.low_block.clone().unwrap_or_else(|| self.dc.clone());
        let mut values = base.into_values();
        for (_, e) in &self.entries {
            for (acc, v) in values.iter_mut().zip(e.values()) {
                *acc += v;
            }
        }
        SampledField::new(*self.dc.grid(), values).expect("sum of finite fields")
    }

    /// CSV export in the layout of the partition dump: one row per band and
    /// grid point, `j` is `low` for the low block.
    pub fn to_csv(&self) -> String {
        let grid = self.dc.grid();
        let mut out = String::from(if grid.dim() == 1 {
            "j,i,re,im\n"
        } else {
            "j,i0,i1,re,im\n"
        });
        let low = self.low_block.iter().map(|f| ("low".to_string(), f));
        let bands = self.entries.iter().map(|(j, f)| (j.to_string(), f));
        for (label, field) in low.chain(bands) {
            for (flat, v) in field.values().iter().enumerate() {
                let idx = grid.unflatten(flat);
                let _ = if grid.dim() == 1 {
                    writeln!(out, "{label},{},{:.17e},{:.17e}", idx[0], v.re, v.im)
                } else {
                    writeln!(
                        out,
                        "{label},{},{},{:.17e},{:.17e}",
                        idx[0], idx[1], v.re, v.im
                    )
                };
            }
        }
        out
    }

    pub fn entry(&self, j: i32) -> Option<&SampledField> {
        self.entries.iter().find(|(jj, _)| *jj == j).map(|(_, f)| f)
    }

    /// Norm of the decomposed field in `params`; the decomposition's homogeneity
    /// must match `params.kind`.
    pub fn norm(&self, params: &SpaceParams) -> Result<NormReport> {
        params.validate()?;
        if params.kind.is_homogeneous() != self.is_homogeneous() {
            return Err(Error::InvalidParameter(format!(
                "{:?} norm requested from a {} decomposition",
                params.kind,
                if self.is_homogeneous() {
                    "homogeneous"
                } else {
                    "nonhomogeneous"
                }
            )));
        }
        let weight = |j: i32| 2f64.powf(j as f64 * params.s);
        let per_band: Vec<(i32, f64)> = self
            .entries
            .iter()
            .map(|(j, e)| (*j, weight(*j) * lp_norm(e, params.p)))
            .collect();
        let low_block_term = self.low_block.as_ref().map(|low| lp_norm(low, params.p));

        let body = if params.kind.is_besov() {
            params.q.aggregate(per_band.iter().map(|&(_, t)| t))
        } else {
            let grid = self.dc.grid();
            let mut pointwise = vec![0.0; grid.len()];
            match params.q {
                Exponent::Infinite => {
                    for (j, e) in &self.entries {
                        let w = weight(*j);
                        for (acc, v) in pointwise.iter_mut().zip(e.values()) {
                            *acc = f64::max(*acc, w * v.norm());
                        }
                    }
                }
                Exponent::Finite(q) => {
                    for (j, e) in &self.entries {
                        let w = weight(*j);
                        for (acc, v) in pointwise.iter_mut().zip(e.values()) {
                            *acc += (w * v.norm()).powf(q);
                        }
                    }
                    for acc in &mut pointwise {
                        *acc = acc.powf(1.0 / q);
                    }
                }
            }
            lp_norm_of_moduli(&pointwise, grid.cell_volume(), params.p)
        };
        Ok(NormReport {
            params: *params,
            per_band,
            aggregate: body + low_block_term.unwrap_or(0.0),
            low_block_term,
        })
    }
}

/// Result of [`space_norm`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub params: SpaceParams,
    /// `(j, 2^{js} ||Delta_j f||_p)` for each band that enters the norm.
    pub per_band: Vec<(i32, f64)>,
    pub aggregate: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub low_block_term: Option<f64>,
}

fn check_grid(f: &SampledField, partition: &DyadicPartition) -> Result<()> {
    if f.grid() != partition.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

fn project(spectrum: &SpectralField, symbol: &[f64]) -> SampledField {
    inverse_transform(&spectrum.multiplied_real(symbol))
}

fn dc_field(f: &SampledField) -> SampledField {
    let m = f.mean();
    SampledField::new(*f.grid(), vec![m; f.grid().len()]).expect("finite mean")
}

/// `F^{-1}[phi_j F f]`.
pub fn band_project(f: &SampledField, partition: &DyadicPartition, j: i32) -> Result<SampledField> {
    check_grid(f, partition)?;
    let band = partition.band(j)?;
    Ok(project(&forward_transform(f), band))
}

/// All band projections of `f`; nonhomogeneous kinds use the default split.
pub fn decompose(
    f: &SampledField,
    partition: &DyadicPartition,
    kind: SpaceKind,
) -> Result<BandDecomposition> {
    let split = if kind.is_homogeneous() {
        None
    } else {
        Some(DEFAULT_SPLIT)
    };
    decompose_with_split(f, partition, split)
}

/// Decomposition with an explicit split: `None` keeps every band and no low
/// block; `Some(j_split)` keeps bands `j > j_split` plus the low block
/// (`j_split <= j_max` required).
pub fn decompose_with_split(
    f: &SampledField,
    partition: &DyadicPartition,
    j_split: Option<i32>,
) -> Result<BandDecomposition> {
    check_grid(f, partition)?;
    let range = partition.range();
    // below the range every band vanishes on the lattice, so any split up to
    // j_max telescopes correctly
    if let Some(js) = j_split {
        if js > range.j_max {
            return Err(Error::BandOutOfRange {
                j: js,
                j_min: range.j_min,
                j_max: range.j_max,
            });
        }
    }
    let spectrum = forward_transform(f);
    let js: Vec<i32> = range
        .iter()
        .filter(|&j| j_split.is_none_or(|s| j > s))
        .collect();
    let entries = js
        .par_iter()
        .map(|&j| {
            (
                j,
                project(&spectrum, partition.band(j).expect("j in range")),
            )
        })
        .collect();
    let low_block = j_split.map(|s| project(&spectrum, &partition.low_block(s)));
    Ok(BandDecomposition {
        entries,
        low_block,
        j_split,
        dc: dc_field(f),
    })
}

/// Norm of `f` in the space selected by `params`.
pub fn space_norm(
    f: &SampledField,
    params: &SpaceParams,
    partition: &DyadicPartition,
) -> Result<NormReport> {
    params.validate()?;
    decompose(f, partition, params.kind)?.norm(params)
}

/// Splits `f` into `(low, high)` with `high = sum_{j > j_split} Delta_j f` and
/// `low = f - high - mean`.
pub fn high_low_split(
    f: &SampledField,
    partition: &DyadicPartition,
    j_split: i32,
) -> Result<(SampledField, SampledField)> {
    check_grid(f, partition)?;
    let range = partition.range();
    if !range.contains(j_split) {
        return Err(Error::BandOutOfRange {
            j: j_split,
            j_min: range.j_min,
            j_max: range.j_max,
        });
    }
    let mut symbol = vec![0.0; f.grid().len()];
    for (j, band) in partition.bands() {
        if j > j_split {
            for (s, v) in symbol.iter_mut().zip(band) {
                *s += v;
            }
        }
    }
    let high = project(&forward_transform(f), &symbol);
    let mean = f.mean();
    let low = f.zip_with(&high, |a, b| a - b - mean)?;
    Ok((low, high))
}

/// Field whose spectrum at `2k` is copied from `k` (requires `|k_i| < N/4` on
/// the support of `f`'s spectrum); physically `x -> f(2x)` on the torus.
/// Coefficients below `1e-13` of the largest one are treated as roundoff.
pub fn dyadic_dilate(f: &SampledField) -> Result<SampledField> {
    let grid = *f.grid();
    let spectrum = forward_transform(f);
    let floor = 1e-13
        * spectrum
            .coefficients()
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
    let quarter = (grid.points_per_axis() / 4) as i64;
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (flat, pt) in grid.lattice().iter().enumerate() {
        let c = spectrum.coefficients()[flat];
        if c.norm() <= floor {
            continue;
        }
        if pt.k.iter().any(|&k| k.abs() >= quarter) {
            return Err(Error::InvalidParameter(format!(
                "spectrum at {:?} cannot be dilated within the lattice",
                pt.k
            )));
        }
        let doubled: Vec<i64> = pt.k[..grid.dim()].iter().map(|k| 2 * k).collect();
        out[grid.lattice_index(&doubled)?] = c;
    }
    Ok(inverse_transform(&SpectralField::new(grid, out)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{build_cutoff, build_partition};
    use crate::spectral::{sample_preset, GridSpec, Preset, PresetParams};

    fn partition(n: usize) -> (GridSpec, DyadicPartition) {
        let g = GridSpec::unit_circle(n).unwrap();
        let p = build_partition(&g, build_cutoff()).unwrap();
        (g, p)
    }

    fn random(g: &GridSpec, seed: u64) -> SampledField {
        Preset::RandomBandlimited {
            seed,
            band_lo: 1.0,
            band_hi: 60.0,
        }
        .sample(g)
        .unwrap()
    }

    #[test]
    fn projection_of_dyadic_harmonic() {
        let (g, p) = partition(256);
        let f = Preset::Harmonic { k: [16, 0] }.sample(&g).unwrap();
        let same = band_project(&f, &p, 4).unwrap();
        assert!(same.max_abs_diff(&f).unwrap() < 1e-13);
        assert!(band_project(&f, &p, 6).unwrap().sup_norm() < 1e-13);
        let c = Preset::Constant { value: 3.0 }.sample(&g).unwrap();
        for j in p.range().iter() {
            assert!(band_project(&c, &p, j).unwrap().sup_norm() < 1e-13);
        }
        assert!(matches!(
            band_project(&f, &p, 42),
            Err(Error::BandOutOfRange { .. })
        ));
    }

    #[test]
    fn reconstruction_both_kinds() {
        let (g, p) = partition(256);
        let f = random(&g, 3)
            .add(&Preset::Constant { value: 0.7 }.sample(&g).unwrap())
            .unwrap();
        for kind in [SpaceKind::BesovHomog, SpaceKind::BesovNonhomog] {
            let dec = decompose(&f, &p, kind).unwrap();
            assert!(dec.reconstruct().max_abs_diff(&f).unwrap() <= 1e-10 * f.sup_norm());
        }
    }

    #[test]
    fn weierstrass_bands_are_single_lacunary_terms() {
        let (g, p) = partition(256);
        let s = 0.5;
        let f = Preset::Weierstrass { s, j_max: 7 }.sample(&g).unwrap();
        let dec = decompose(&f, &p, SpaceKind::BesovHomog).unwrap();
        for j in 0..=7 {
            let band = dec.entry(j).unwrap();
            // band j holds exactly 2^{-js} cos(2^j x)
            let cos = SampledField::from_fn(g, |x| {
                Complex64::new(
                    2f64.powf(-s * j as f64) * ((1u64 << j) as f64 * x[0]).cos(),
                    0.0,
                )
            })
            .unwrap();
            assert!(band.max_abs_diff(&cos).unwrap() < 1e-12, "band {j}");
        }
    }

    #[test]
    fn harmonic_norm_closed_form() {
        let (g, p) = partition(256);
        for j0 in 0..=6 {
            let f = Preset::Harmonic { k: [1 << j0, 0] }.sample(&g).unwrap();
            for (s, pp, q) in [(0.5, 2.0, 2.0), (-1.0, 1.0, 3.0), (2.0, 4.0, f64::INFINITY)] {
                let params = SpaceParams::besov(s, pp, q).unwrap();
                let got = space_norm(&f, &params, &p).unwrap().aggregate;
                let expected = 2f64.powf(j0 as f64 * s) * g.period().powf(1.0 / pp);
                assert!(
                    (got - expected).abs() <= 1e-10 * expected,
                    "{got} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn constants_have_zero_homogeneous_norm() {
        let (g, p) = partition(64);
        let c = Preset::Constant { value: 2.5 }.sample(&g).unwrap();
        for kind in [SpaceKind::BesovHomog, SpaceKind::TlHomog] {
            let params =
                SpaceParams::new(0.5, Exponent::Finite(2.0), Exponent::Finite(2.0), kind).unwrap();
            assert!(space_norm(&c, &params, &p).unwrap().aggregate < 1e-12);
        }
        let params = SpaceParams::new(
            0.5,
            Exponent::Finite(2.0),
            Exponent::Finite(2.0),
            SpaceKind::BesovNonhomog,
        )
        .unwrap();
        let nonhom = space_norm(&c, &params, &p).unwrap();
        let expected = 2.5 * g.period().sqrt();
        assert!((nonhom.aggregate - expected).abs() < 1e-12);
    }

    #[test]
    fn tl_rejects_p_infinity() {
        let err = SpaceParams::new(
            0.0,
            Exponent::Infinite,
            Exponent::Finite(2.0),
            SpaceKind::TlHomog,
        );
        assert!(err.is_err());
    }

    #[test]
    fn tl_with_p_equal_q_matches_besov() {
        let (g, p) = partition(128);
        let f = random(&g, 11);
        for pq in [1.0, 2.0, 3.0] {
            let b = SpaceParams::besov(0.7, pq, pq).unwrap();
            let t = b.with_kind(SpaceKind::TlHomog);
            let nb = space_norm(&f, &b, &p).unwrap().aggregate;
            let nt = space_norm(&f, &t, &p).unwrap().aggregate;
            assert!((nb - nt).abs() < 1e-10 * nb);
        }
    }

    #[test]
    fn split_matches_support() {
        let (g, p) = partition(256);
        let high_only = Preset::Harmonic { k: [40, 0] }.sample(&g).unwrap();
        let (low, high) = high_low_split(&high_only, &p, 3).unwrap();
        assert!(low.sup_norm() < 1e-12);
        assert!(high.max_abs_diff(&high_only).unwrap() < 1e-12);

        let low_only = Preset::Harmonic { k: [3, 0] }.sample(&g).unwrap();
        let (low, high) = high_low_split(&low_only, &p, 4).unwrap();
        assert!(high.sup_norm() < 1e-12);
        assert!(low.max_abs_diff(&low_only).unwrap() < 1e-12);

        let f = random(&g, 5)
            .add(&Preset::Constant { value: 1.0 }.sample(&g).unwrap())
            .unwrap();
        let (low, high) = high_low_split(&f, &p, 2).unwrap();
        let rebuilt = low.add(&high).unwrap().map(|v| v + f.mean());
        assert!(rebuilt.max_abs_diff(&f).unwrap() < 1e-10);
    }

    #[test]
    fn dilation_scales_besov_norm() {
        let (g, p) = partition(256);
        let f = Preset::RandomBandlimited {
            seed: 9,
            band_lo: 1.0,
            band_hi: 30.0,
        }
        .sample(&g)
        .unwrap();
        let d = dyadic_dilate(&f).unwrap();
        let s = 0.8;
        let params = SpaceParams::besov(s, 2.0, 2.0).unwrap();
        let nf = space_norm(&f, &params, &p).unwrap();
        let nd = space_norm(&d, &params, &p).unwrap();
        assert!((nd.aggregate - 2f64.powf(s) * nf.aggregate).abs() < 1e-10 * nd.aggregate);
        for (j, t) in &nf.per_band {
            if let Some((_, td)) = nd.per_band.iter().find(|(jj, _)| *jj == j + 1) {
                assert!((td - 2f64.powf(s) * t).abs() < 1e-10 * (1.0 + t));
            }
        }
    }

    #[test]
    fn report_serializes_per_band_pairs() {
        let (g, p) = partition(32);
        let f = sample_preset("harmonic", &PresetParams::from([("k".into(), 2.0)]), &g).unwrap();
        let r = space_norm(&f, &SpaceParams::besov(1.0, 2.0, 2.0).unwrap(), &p).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert!(v["per_band"][0].is_array());
        assert_eq!(v["params"]["kind"], "besov_homog");
    }
}
