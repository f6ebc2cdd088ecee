//! Catalog of deterministic and seeded test functions.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{inverse_transform, GridSpec, SampledField, SpectralField};
use crate::error::{Error, Result};

/// Named real parameters of a preset, as they appear in job configs.
pub type PresetParams = BTreeMap<String, f64>;

/// Test-function catalog. Frequencies are integer lattice wavenumbers, so a
/// wavenumber `k` corresponds to `xi = 2 pi k / L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum Preset {
    /// `e^{i k . x}`.
    Harmonic {
        k: [i64; 2],
    },
    Constant {
        value: f64,
    },
    /// Periodized Gaussian of width `sigma` centred in the cell.
    Gaussian {
        sigma: f64,
    },
    /// `sum_{j=0}^{j_max} 2^{-js} cos(2^j xi_1 x_0)`, lacunary along axis 0.
    Weierstrass {
        s: f64,
        j_max: u32,
    },
    /// Real field with uniformly random coefficients on `band_lo <= |k| <= band_hi`,
    /// scaled to unit sup norm.
    RandomBandlimited {
        seed: u64,
        band_lo: f64,
        band_hi: f64,
    },
    /// Real even field whose spectrum is nonnegative on the band.
    NonnegativeSpectrum {
        seed: u64,
        band_lo: f64,
        band_hi: f64,
    },
    /// `+1` on `x_0 < L/2`, `-1` elsewhere.
    Sign,
    /// Indicator of the grid cell with flat index `index`.
    Cell {
        index: usize,
    },
}

fn get(params: &PresetParams, key: &str) -> Option<f64> {
    params.get(key).copied()
}

fn get_or(params: &PresetParams, key: &str, default: f64) -> f64 {
    get(params, key).unwrap_or(default)
}

fn as_integer(v: f64, key: &str) -> Result<i64> {
    if v.fract() != 0.0 || !v.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "`{key}` must be an integer, got {v}"
        )));
    }
    Ok(v as i64)
}

fn as_count(v: f64, key: &str) -> Result<u64> {
    let i = as_integer(v, key)?;
    u64::try_from(i)
        .map_err(|_| Error::InvalidParameter(format!("`{key}` must be nonnegative, got {v}")))
}

impl Preset {
    /// Builds a preset from its id and named parameters, filling grid-dependent
    /// defaults.
    pub fn from_params(name: &str, params: &PresetParams, grid: &GridSpec) -> Result<Self> {
        let allowed: &[&str] = match name {
            "harmonic" => &["k", "k0", "k1"],
            "constant" => &["c"],
            "gaussian" => &["sigma"],
            "weierstrass" => &["s", "j_max"],
            "random_bandlimited" | "nonnegative_spectrum" => &["seed", "band_lo", "band_hi"],
            "sign" => &[],
            "cell" => &["index"],
            other => return Err(Error::UnknownPreset(other.to_string())),
        };
        if let Some(key) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::InvalidParameter(format!(
                "preset `{name}` has no parameter `{key}`"
            )));
        }
        let half = (grid.points_per_axis() / 2) as f64;
        let preset = match name {
            "harmonic" => {
                let k0 = get(params, "k0")
                    .or_else(|| get(params, "k"))
                    .unwrap_or(1.0);
                let k1 = get_or(params, "k1", 0.0);
                Preset::Harmonic {
                    k: [as_integer(k0, "k0")?, as_integer(k1, "k1")?],
                }
            }
            "constant" => Preset::Constant {
                value: get_or(params, "c", 1.0),
            },
            "gaussian" => Preset::Gaussian {
                sigma: get_or(params, "sigma", grid.period() / 16.0),
            },
            "weierstrass" => {
                let default_j = (grid.points_per_axis() / 2).trailing_zeros() as f64 - 1.0;
                let j_max = as_count(get_or(params, "j_max", default_j), "j_max")?;
                Preset::Weierstrass {
                    s: get_or(params, "s", 0.5),
                    j_max: j_max as u32,
                }
            }
            "random_bandlimited" | "nonnegative_spectrum" => {
                let seed = as_count(get_or(params, "seed", 0.0), "seed")?;
                let band_lo = get_or(params, "band_lo", 1.0);
                let band_hi = get_or(params, "band_hi", half / 2.0);
                if name == "random_bandlimited" {
                    Preset::RandomBandlimited {
                        seed,
                        band_lo,
                        band_hi,
                    }
                } else {
                    Preset::NonnegativeSpectrum {
                        seed,
                        band_lo,
                        band_hi,
                    }
                }
            }
            "sign" => Preset::Sign,
            "cell" => Preset::Cell {
                index: as_count(get_or(params, "index", 0.0), "index")? as usize,
            },
            _ => unreachable!(),
        };
        preset.validate(grid)?;
        Ok(preset)
    }

    fn validate(&self, grid: &GridSpec) -> Result<()> {
        let half = (grid.points_per_axis() / 2) as i64;
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            Preset::Harmonic { k } => {
                if k.iter().any(|&ki| ki < -half || ki >= half) {
                    return bad(format!("harmonic wavenumber {k:?} outside [-N/2, N/2)"));
                }
                if grid.dim() == 1 && k[1] != 0 {
                    return bad("k1 given on a one-dimensional grid".into());
                }
            }
            Preset::Constant { value } if !value.is_finite() => {
                return bad("constant must be finite".into())
            }
            Preset::Gaussian { sigma } if !(sigma.is_finite() && sigma > 0.0) => {
                return bad(format!("sigma must be positive, got {sigma}"));
            }
            Preset::Weierstrass { s, j_max } => {
                if !s.is_finite() {
                    return bad("s must be finite".into());
                }
                if (1i64 << j_max.min(62)) > half {
                    return bad(format!(
                        "2^j_max = 2^{j_max} exceeds the Nyquist wavenumber {half}"
                    ));
                }
            }
            Preset::RandomBandlimited {
                band_lo, band_hi, ..
            }
            | Preset::NonnegativeSpectrum {
                band_lo, band_hi, ..
            } => {
                if !(band_lo >= 0.0 && band_hi >= band_lo && band_hi.is_finite()) {
                    return bad(format!("invalid band [{band_lo}, {band_hi}]"));
                }
            }
            Preset::Cell { index } if index >= grid.len() => {
                return bad(format!(
                    "cell index {index} outside grid of {} points",
                    grid.len()
                ));
            }
            _ => {}
        }
        Ok(())
    }

    /// Samples the preset on `grid`.
    pub fn sample(&self, grid: &GridSpec) -> Result<SampledField> {
        self.validate(grid)?;
        let step = grid.frequency_step();
        let period = grid.period();
        let d = grid.dim();
        match *self {
            Preset::Harmonic { k } => SampledField::from_fn(*grid, |x| {
                let phase = (0..d).map(|a| k[a] as f64 * step * x[a]).sum::<f64>();
                Complex64::from_polar(1.0, phase)
            }),
            Preset::Constant { value } => {
                SampledField::new(*grid, vec![Complex64::new(value, 0.0); grid.len()])
            }
            Preset::Gaussian { sigma } => SampledField::from_fn(*grid, |x| {
                let centre = period / 2.0;
                let images = -2i32..=2;
                let mut total = 0.0;
                for m0 in images.clone() {
                    let ms1: Vec<i32> = if d == 2 {
                        images.clone().collect()
                    } else {
                        vec![0]
                    };
                    for m1 in ms1 {
                        let dx0 = x[0] - centre + m0 as f64 * period;
                        let dx1 = if d == 2 {
                            x[1] - centre + m1 as f64 * period
                        } else {
                            0.0
                        };
                        total += (-(dx0 * dx0 + dx1 * dx1) / (2.0 * sigma * sigma)).exp();
                    }
                }
                Complex64::new(total, 0.0)
            }),
            Preset::Weierstrass { s, j_max } => SampledField::from_fn(*grid, |x| {
                let v = (0..=j_max)
                    .map(|j| {
                        let freq = (1u64 << j) as f64;
                        2f64.powf(-(j as f64) * s) * (freq * step * x[0]).cos()
                    })
                    .sum::<f64>();
                Complex64::new(v, 0.0)
            }),
            Preset::RandomBandlimited {
                seed,
                band_lo,
                band_hi,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let coeffs = grid
                    .lattice()
                    .iter()
                    .map(|pt| {
                        let r = lattice_radius(pt.k);
                        let re: f64 = rng.random_range(-1.0..1.0);
                        let im: f64 = rng.random_range(-1.0..1.0);
                        if r >= band_lo && r <= band_hi {
                            Complex64::new(re, im)
                        } else {
                            Complex64::new(0.0, 0.0)
                        }
                    })
                    .collect();
                let field = inverse_transform(&SpectralField::new(*grid, coeffs)?);
                let real = field.map(|v| Complex64::new(v.re, 0.0));
                let sup = real.sup_norm();
                if sup == 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "band [{band_lo}, {band_hi}] contains no lattice frequency"
                    )));
                }
                Ok(real.scale(Complex64::new(1.0 / sup, 0.0)))
            }
            Preset::NonnegativeSpectrum {
                seed,
                band_lo,
                band_hi,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let lattice = grid.lattice();
                let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
                for (flat, pt) in lattice.iter().enumerate() {
                    let draw: f64 = rng.random_range(0.0..1.0);
                    let r = lattice_radius(pt.k);
                    if r < band_lo || r > band_hi {
                        continue;
                    }
                    // one draw per {k, -k} pair keeps the field real and even
                    let mirror = mirror_index(grid, pt.k);
                    if mirror < flat {
                        coeffs[flat] = coeffs[mirror];
                    } else {
                        coeffs[flat] = Complex64::new(draw, 0.0);
                    }
                }
                if coeffs.iter().all(|c| c.re == 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "band [{band_lo}, {band_hi}] contains no lattice frequency"
                    )));
                }
                let field = inverse_transform(&SpectralField::new(*grid, coeffs)?);
                Ok(field.map(|v| Complex64::new(v.re, 0.0)))
            }
            Preset::Sign => SampledField::from_fn(*grid, |x| {
                Complex64::new(if x[0] < period / 2.0 { 1.0 } else { -1.0 }, 0.0)
            }),
            Preset::Cell { index } => {
                let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
                values[index] = Complex64::new(1.0, 0.0);
                SampledField::new(*grid, values)
            }
        }
    }
}

fn lattice_radius(k: [i64; 2]) -> f64 {
    ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt()
}

fn mirror_index(grid: &GridSpec, k: [i64; 2]) -> usize {
    let mut idx = [0usize; 2];
    for axis in 0..grid.dim() {
        idx[axis] = grid.storage_index(-k[axis]);
    }
    grid.flatten(idx)
}

/// Samples the preset `name` with named parameters on `grid`.
pub fn sample_preset(name: &str, params: &PresetParams, grid: &GridSpec) -> Result<SampledField> {
    Preset::from_params(name, params, grid)?.sample(grid)
}
