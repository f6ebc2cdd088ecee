use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{GridSpec, Preset, PresetParams, SampledField};

/// Smoothness values of the Weierstrass members of the default family.
pub const DEFAULT_WEIERSTRASS_S: [f64; 3] = [0.3, 0.5, 0.7];

/// Seeded collection of test fields.
///
/// Generators:
/// * `random_bandlimited`, `nonnegative_spectrum`: `count` fields drawn with
///   seeds derived from `seed`; `band_lo` / `band_hi` may be set in `params`.
/// * `weierstrass`: `count` values of `s` spread over `[0.3, 0.7]`, or the
///   single `s` from `params`.
/// * `harmonics`: `e^{i k x}` with `k = 1, 2, 4, ...` along axis 0.
/// * `default`: `count` random fields, the Weierstrass fields with
///   `s` in {0.3, 0.5, 0.7} and the harmonics `k = 1, 4, 16`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionFamily {
    pub generator: String,
    pub seed: u64,
    pub count: usize,
    pub grid: GridSpec,
    #[serde(default)]
    pub params: PresetParams,
}

/// One generated field with a short description.
#[derive(Debug, Clone)]
pub struct Member {
    pub label: String,
    pub field: SampledField,
}

fn member_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(i as u64)
}

impl FunctionFamily {
    pub fn new(generator: &str, seed: u64, count: usize, grid: GridSpec) -> Self {
        Self {
            generator: generator.to_string(),
            seed,
            count,
            grid,
            params: PresetParams::new(),
        }
    }

    /// The default family on `grid`: 20 random fields plus Weierstrass and harmonics.
    pub fn default_for(grid: GridSpec, seed: u64) -> Self {
        Self::new("default", seed, 20, grid)
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    fn band(&self) -> (f64, f64) {
        let quarter = (self.grid.points_per_axis() / 4) as f64;
        (
            self.params.get("band_lo").copied().unwrap_or(1.0),
            self.params.get("band_hi").copied().unwrap_or(quarter),
        )
    }

    fn check_params(&self, allowed: &[&str]) -> Result<()> {
        match self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(key) => Err(Error::InvalidParameter(format!(
                "family `{}` has no parameter `{key}`",
                self.generator
            ))),
            None => Ok(()),
        }
    }

    fn random(&self, nonnegative: bool) -> Result<Vec<Member>> {
        let (band_lo, band_hi) = self.band();
        (0..self.count)
            .map(|i| {
                let seed = member_seed(self.seed, i);
                let (label, preset) = if nonnegative {
                    (
                        "nonnegative_spectrum",
                        Preset::NonnegativeSpectrum {
                            seed,
                            band_lo,
                            band_hi,
                        },
                    )
                } else {
                    (
                        "random_bandlimited",
                        Preset::RandomBandlimited {
                            seed,
                            band_lo,
                            band_hi,
                        },
                    )
                };
                Ok(Member {
                    label: format!("{label}[{i}]"),
                    field: preset.sample(&self.grid)?,
                })
            })
            .collect()
    }

    fn weierstrass(&self, values: &[f64]) -> Result<Vec<Member>> {
        let j_max = (self.grid.points_per_axis() / 2).trailing_zeros() - 1;
        values
            .iter()
            .map(|&s| {
                let field = Preset::Weierstrass { s, j_max }.sample(&self.grid)?;
                Ok(Member {
                    label: format!("weierstrass[s={s}]"),
                    field,
                })
            })
            .collect()
    }

    fn harmonics(&self, ks: &[i64]) -> Result<Vec<Member>> {
        ks.iter()
            .map(|&k| {
                let field = Preset::Harmonic { k: [k, 0] }.sample(&self.grid)?;
                Ok(Member {
                    label: format!("harmonic[k={k}]"),
                    field,
                })
            })
            .collect()
    }

    /// Generates the members; deterministic in `(generator, seed, count, grid, params)`.
    pub fn members(&self) -> Result<Vec<Member>> {
        if self.count == 0 {
            return Err(Error::InvalidParameter(
                "family count must be at least 1".into(),
            ));
        }
        let quarter = (self.grid.points_per_axis() / 4) as i64;
        match self.generator.as_str() {
            "random_bandlimited" | "nonnegative_spectrum" => {
                self.check_params(&["band_lo", "band_hi"])?;
                self.random(self.generator == "nonnegative_spectrum")
            }
            "weierstrass" => {
                self.check_params(&["s"])?;
                let values: Vec<f64> = match self.params.get("s") {
                    Some(&s) => vec![s],
                    None if self.count == 1 => vec![0.5],
                    None => (0..self.count)
                        .map(|i| 0.3 + 0.4 * i as f64 / (self.count - 1) as f64)
                        .collect(),
                };
                self.weierstrass(&values)
            }
            "harmonics" => {
                self.check_params(&[])?;
                let ks: Vec<i64> = (0..self.count)
                    .map(|i| 1i64 << i)
                    .take_while(|&k| k <= quarter)
                    .collect();
                self.harmonics(&ks)
            }
            "default" => {
                self.check_params(&["band_lo", "band_hi"])?;
                let mut out = self.random(false)?;
                out.extend(self.weierstrass(&DEFAULT_WEIERSTRASS_S)?);
                let ks: Vec<i64> = [1, 4, 16].into_iter().filter(|&k| k <= quarter).collect();
                out.extend(self.harmonics(&ks)?);
                Ok(out)
            }
            other => Err(Error::InvalidParameter(format!(
                "unknown family generator `{other}`"
            ))),
        }
    }
}
