use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{
    forward_transform, inverse_transform, GridSpec, SampledField, SpectralField,
};

/// Relative tolerance of the cross-derivative consistency test.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-8;

fn i_pow(n: usize) -> Complex64 {
    match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// `(i xi)^alpha` on the lattice. Odd powers along an axis vanish on that
/// axis' Nyquist line so real fields stay real.
pub fn derivative_symbol(grid: &GridSpec, alpha: &[usize]) -> Result<Vec<Complex64>> {
    if alpha.len() != grid.dim() {
        return Err(Error::LengthMismatch {
            expected: grid.dim(),
            actual: alpha.len(),
        });
    }
    let nyquist = -((grid.points_per_axis() / 2) as i64);
    let total: usize = alpha.iter().sum();
    Ok(grid
        .lattice()
        .iter()
        .map(|pt| {
            let mut v = i_pow(total);
            for (axis, &a) in alpha.iter().enumerate() {
                if a % 2 == 1 && pt.k[axis] == nyquist {
                    return Complex64::new(0.0, 0.0);
                }
                v *= pt.xi[axis].powi(a as i32);
            }
            v
        })
        .collect())
}

/// `partial^alpha f`, computed spectrally.
pub fn derivative(f: &SampledField, alpha: &[usize]) -> Result<SampledField> {
    let symbol = derivative_symbol(f.grid(), alpha)?;
    Ok(inverse_transform(&forward_transform(f).multiplied(&symbol)))
}

/// All multi-indices of length `dim` and order `order`, in lexicographic order.
pub fn multi_indices(dim: usize, order: usize) -> Vec<Vec<usize>> {
    match dim {
        1 => vec![vec![order]],
        _ => (0..=order).rev().map(|a| vec![a, order - a]).collect(),
    }
}

/// The complete family `{f_alpha : |alpha| = order}` on one grid.
#[derive(Debug, Clone)]
pub struct PartialDerivativeSet {
    order: usize,
    entries: BTreeMap<Vec<usize>, SampledField>,
}

impl PartialDerivativeSet {
    pub fn new(order: usize, entries: BTreeMap<Vec<usize>, SampledField>) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidOrder);
        }
        let grid = *entries
            .values()
            .next()
            .ok_or_else(|| Error::InvalidParameter("no partial derivatives given".into()))?
            .grid();
        if entries.values().any(|f| *f.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        let expected = multi_indices(grid.dim(), order);
        for alpha in entries.keys() {
            if !expected.contains(alpha) {
                return Err(Error::InvalidParameter(format!(
                    "multi-index {alpha:?} is not of order {order} in dimension {}",
                    grid.dim()
                )));
            }
        }
        if let Some(missing) = expected.iter().find(|a| !entries.contains_key(*a)) {
            return Err(Error::InvalidParameter(format!(
                "missing partial {missing:?}"
            )));
        }
        Ok(Self { order, entries })
    }

    /// All partials of order `order` of `f`.
    pub fn of_field(f: &SampledField, order: usize) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for alpha in multi_indices(f.grid().dim(), order) {
            entries.insert(alpha.clone(), derivative(f, &alpha)?);
        }
        Self::new(order, entries)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn grid(&self) -> GridSpec {
        *self
            .entries
            .values()
            .next()
            .expect("validated nonempty")
            .grid()
    }

    pub fn entries(&self) -> &BTreeMap<Vec<usize>, SampledField> {
        &self.entries
    }

    pub fn entry_mut(&mut self, alpha: &[usize]) -> Option<&mut SampledField> {
        self.entries.get_mut(alpha)
    }

    /// Checks `partial^beta f_alpha = partial^beta' f_alpha'` for the minimal
    /// `beta, beta'` with `alpha + beta = alpha' + beta'`; returns the largest
    /// relative violation.
    pub fn check_consistency(&self) -> Result<f64> {
        let grid = self.grid();
        let spectra: Vec<(&Vec<usize>, SpectralField)> = self
            .entries
            .iter()
            .map(|(a, f)| (a, forward_transform(f)))
            .collect();
        let mut worst = 0.0f64;
        for (i, (a, fa)) in spectra.iter().enumerate() {
            for (b, fb) in &spectra[i + 1..] {
                let join: Vec<usize> = a.iter().zip(b.iter()).map(|(x, y)| *x.max(y)).collect();
                let beta: Vec<usize> = join.iter().zip(a.iter()).map(|(j, x)| j - x).collect();
                let beta_other: Vec<usize> =
                    join.iter().zip(b.iter()).map(|(j, y)| j - y).collect();
                let lhs = fa.multiplied(&derivative_symbol(&grid, &beta)?);
                let rhs = fb.multiplied(&derivative_symbol(&grid, &beta_other)?);
                let scale = lhs
                    .coefficients()
                    .iter()
                    .chain(rhs.coefficients())
                    .map(|c| c.norm())
                    .fold(0.0, f64::max);
                if scale == 0.0 {
                    continue;
                }
                let diff = lhs
                    .coefficients()
                    .iter()
                    .zip(rhs.coefficients())
                    .map(|(x, y)| (x - y).norm())
                    .fold(0.0, f64::max);
                let violation = diff / scale;
                if violation > CONSISTENCY_TOLERANCE {
                    return Err(Error::InconsistentPartials {
                        alpha: a.to_vec(),
                        alpha_other: b.to_vec(),
                        violation,
                    });
                }
                worst = worst.max(violation);
            }
        }
        Ok(worst)
    }
}

/// Mean-zero `f` with `partial^alpha f = f_alpha` for every entry.
///
/// The spectrum is the least-squares solution
/// `F = sum_alpha conj((i xi)^alpha) F_alpha / sum_alpha |xi^alpha|^2` off the origin.
pub fn poincare_reconstruct(partials: &PartialDerivativeSet) -> Result<SampledField> {
    for (alpha, f) in partials.entries() {
        let mean = f.mean().norm();
        if mean > 1e-12 * f.sup_norm().max(1.0) {
            return Err(Error::NonzeroMean {
                alpha: alpha.clone(),
                mean,
            });
        }
    }
    partials.check_consistency()?;
    let grid = partials.grid();
    let mut num = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut den = vec![0.0f64; grid.len()];
    for (alpha, f) in partials.entries() {
        let symbol = derivative_symbol(&grid, alpha)?;
        let spectrum = forward_transform(f);
        for (i, (s, c)) in symbol.iter().zip(spectrum.coefficients()).enumerate() {
            num[i] += s.conj() * c;
            den[i] += s.norm_sqr();
        }
    }
    let coefficients = num
        .into_iter()
        .zip(den)
        .map(|(n, d)| {
            if d > 0.0 {
                n / d
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    Ok(inverse_transform(&SpectralField::new(grid, coefficients)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Preset;
    use std::f64::consts::TAU;

    #[test]
    fn antiderivative_of_cosine() {
        let g = GridSpec::unit_circle(64).unwrap();
        let k = 3.0;
        let cos = SampledField::from_fn(g, |x| Complex64::new((k * x[0]).cos(), 0.0)).unwrap();
        let set = PartialDerivativeSet::new(1, BTreeMap::from([(vec![1], cos)])).unwrap();
        let f = poincare_reconstruct(&set).unwrap();
        let sin = SampledField::from_fn(g, |x| Complex64::new((k * x[0]).sin() / k, 0.0)).unwrap();
        assert!(f.max_abs_diff(&sin).unwrap() < 1e-13);
    }

    #[test]
    fn round_trip_2d() {
        let g = GridSpec::new(2, 32, TAU).unwrap();
        let f = Preset::RandomBandlimited {
            seed: 12,
            band_lo: 1.0,
            band_hi: 8.0,
        }
        .sample(&g)
        .unwrap();
        for order in 1..=2 {
            let set = PartialDerivativeSet::of_field(&f, order).unwrap();
            assert_eq!(set.entries().len(), order + 1);
            let back = poincare_reconstruct(&set).unwrap();
            assert!(back.max_abs_diff(&f.minus_mean()).unwrap() < 1e-9);
        }
    }

    #[test]
    fn rejects_inconsistent_and_nonzero_mean() {
        let g = GridSpec::new(2, 16, TAU).unwrap();
        let f = Preset::RandomBandlimited {
            seed: 2,
            band_lo: 1.0,
            band_hi: 4.0,
        }
        .sample(&g)
        .unwrap();
        let mut set = PartialDerivativeSet::of_field(&f, 2).unwrap();
        let bump = Preset::Harmonic { k: [1, 1] }
            .sample(&g)
            .unwrap()
            .scale(Complex64::new(0.1, 0.0));
        let e = set.entry_mut(&[2, 0]).unwrap();
        *e = e.add(&bump).unwrap();
        assert!(matches!(
            poincare_reconstruct(&set),
            Err(Error::InconsistentPartials { .. })
        ));

        let mut set = PartialDerivativeSet::of_field(&f, 1).unwrap();
        let e = set.entry_mut(&[0, 1]).unwrap();
        *e = e.map(|v| v + 1.0);
        assert!(matches!(
            poincare_reconstruct(&set),
            Err(Error::NonzeroMean { .. })
        ));
    }

    #[test]
    fn incomplete_sets_are_rejected() {
        let g = GridSpec::new(2, 16, TAU).unwrap();
        let z = SampledField::zeros(g);
        assert!(PartialDerivativeSet::new(1, BTreeMap::from([(vec![1, 0], z.clone())])).is_err());
        assert!(PartialDerivativeSet::new(1, BTreeMap::from([(vec![2, 0], z)])).is_err());
    }
}
