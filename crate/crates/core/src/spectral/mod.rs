//! Periodic grids, the symmetric Fourier convention, quadrature norms and
//! generic Fourier multipliers.
//!
//! A [`GridSpec`] describes the torus `[0, L)^dim` sampled at `N` points per
//! axis. Values are stored row-major (axis 0 slowest). Spectra are stored in
//! FFT order: storage index `i` along an axis holds the wavenumber `k = i`
//! for `i < N/2` and `k = i - N` otherwise, so `-N/2 <= k < N/2`.
//!
//! The transforms are Riemann sums of
//! `F f(xi) = (2 pi)^{-dim/2} \int f(x) e^{-i x.xi} dx`, with
//! `xi_k = 2 pi k / L`, and its inverse.

mod exponent;
mod preset;

pub use exponent::Exponent;
pub use preset::{sample_preset, Preset, PresetParams};

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid with `n` points per axis on a torus of period `period`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    n: usize,
    period: f64,
}

impl GridSpec {
    pub fn new(dim: usize, n: usize, period: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dim must be 1 or 2, got {dim}")));
        }
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 16, got {n}"
            )));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "period must be positive, got {period}"
            )));
        }
        Ok(Self { dim, n, period })
    }

    /// One-dimensional grid on `[0, 2 pi)`.
    pub fn unit_circle(n: usize) -> Result<Self> {
        Self::new(1, n, 2.0 * PI)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Grid spacing `h = L / N`.
    pub fn spacing(&self) -> f64 {
        self.period / self.n as f64
    }

    /// Quadrature weight `h^dim` of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Lattice step `2 pi / L` of the dual variable.
    pub fn frequency_step(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// Total number of grid points, `N^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Wavenumber stored at FFT index `i` along one axis.
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Storage index of wavenumber `k` along one axis (taken modulo `N`).
    pub fn storage_index(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    /// Splits a flat index into per-axis indices (unused axes are zero).
    pub fn unflatten(&self, flat: usize) -> [usize; 2] {
        if self.dim == 1 {
            [flat, 0]
        } else {
            [flat / self.n, flat % self.n]
        }
    }

    pub fn flatten(&self, idx: [usize; 2]) -> usize {
        if self.dim == 1 {
            idx[0]
        } else {
            idx[0] * self.n + idx[1]
        }
    }

    /// Flat storage index of the lattice point `k` (one entry per axis).
    pub fn lattice_index(&self, k: &[i64]) -> Result<usize> {
        if k.len() != self.dim {
            return Err(Error::InvalidParameter(format!(
                "lattice point has {} components, grid has dim {}",
                k.len(),
                self.dim
            )));
        }
        let half = (self.n / 2) as i64;
        if k.iter().any(|&ki| ki < -half || ki >= half) {
            return Err(Error::InvalidParameter(format!(
                "lattice point {k:?} outside [-N/2, N/2)"
            )));
        }
        let mut idx = [0usize; 2];
        for (axis, &ki) in k.iter().enumerate() {
            idx[axis] = self.storage_index(ki);
        }
        Ok(self.flatten(idx))
    }

    /// Physical coordinates of grid point `flat` (unused axes are zero).
    pub fn point(&self, flat: usize) -> [f64; 2] {
        let idx = self.unflatten(flat);
        let h = self.spacing();
        [idx[0] as f64 * h, idx[1] as f64 * h]
    }

    /// Tabulated frequency lattice in storage order.
    pub fn lattice(&self) -> Vec<LatticePoint> {
        let step = self.frequency_step();
        (0..self.len())
            .map(|flat| {
                let idx = self.unflatten(flat);
                let mut k = [0i64; 2];
                for axis in 0..self.dim {
                    k[axis] = self.wavenumber(idx[axis]);
                }
                let xi = [k[0] as f64 * step, k[1] as f64 * step];
                let radius = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
                LatticePoint { k, xi, radius }
            })
            .collect()
    }

    /// Smallest nonzero frequency radius.
    pub fn min_radius(&self) -> f64 {
        self.frequency_step()
    }

    /// Largest frequency radius on the lattice.
    pub fn max_radius(&self) -> f64 {
        let half = (self.n / 2) as f64 * self.frequency_step();
        half * (self.dim as f64).sqrt()
    }
}

/// One point of the frequency lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticePoint {
    /// Integer wavenumbers (unused axis is zero).
    pub k: [i64; 2],
    /// `xi = 2 pi k / L`.
    pub xi: [f64; 2],
    /// `|xi|`.
    pub radius: f64,
}

impl LatticePoint {
    pub fn is_origin(&self) -> bool {
        self.k == [0, 0]
    }
}

/// Scale factors of the discrete forward and inverse transforms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierConvention {
    pub forward_scale: f64,
    pub inverse_scale: f64,
}

impl FourierConvention {
    pub fn for_grid(grid: &GridSpec) -> Self {
        let d = grid.dim() as i32;
        let sym = (2.0 * PI).powf(-(d as f64) / 2.0);
        Self {
            forward_scale: sym * grid.cell_volume(),
            inverse_scale: sym * grid.frequency_step().powi(d),
        }
    }
}

/// `(2 pi)^{-dim/2}`: the factor relating `F^{-1}[m F g]` to the Riemann-sum
/// convolution `(F^{-1} m) * g`.
pub fn convolution_factor(grid: &GridSpec) -> f64 {
    (2.0 * PI).powf(-(grid.dim() as f64) / 2.0)
}

/// A function sampled on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl SampledField {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                actual: values.len(),
            });
        }
        if let Some(index) = values
            .iter()
            .position(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_real(grid: GridSpec, values: &[f64]) -> Result<Self> {
        Self::new(
            grid,
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }

    /// Samples `f` at every grid point; the closure receives `dim` coordinates.
    pub fn from_fn<F>(grid: GridSpec, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Complex64,
    {
        let d = grid.dim();
        let values = (0..grid.len())
            .map(|flat| f(&grid.point(flat)[..d]))
            .collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Average value, i.e. the field's `xi = 0` component.
    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.values.len() as f64
    }

    pub fn minus_mean(&self) -> Self {
        let m = self.mean();
        self.map(|v| v - m)
    }

    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn zip_with<F>(&self, other: &Self, f: F) -> Result<Self>
    where
        F: Fn(Complex64, Complex64) -> Complex64,
    {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self {
            grid: self.grid,
            values,
        })
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// `max |f - g|` over the grid.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm())))
    }

    /// Largest imaginary part in absolute value.
    pub fn max_imag(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.im.abs()))
    }

    /// The translate `f(. + y)` for a lattice shift `y` given in cells.
    pub fn shifted(&self, cells: &[i64]) -> Self {
        let n = self.grid.n as i64;
        let d = self.grid.dim;
        let mut values = Vec::with_capacity(self.values.len());
        for flat in 0..self.values.len() {
            let idx = self.grid.unflatten(flat);
            let mut src = [0usize; 2];
            for axis in 0..d {
                src[axis] = (idx[axis] as i64 + cells[axis]).rem_euclid(n) as usize;
            }
            values.push(self.values[self.grid.flatten(src)]);
        }
        Self {
            grid: self.grid,
            values,
        }
    }
}

/// Frequency-space representation, coefficients in FFT storage order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coefficients: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: GridSpec, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                actual: coefficients.len(),
            });
        }
        if let Some(index) = coefficients
            .iter()
            .position(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, coefficients })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// Coefficient at lattice point `k`.
    pub fn coefficient(&self, k: &[i64]) -> Result<Complex64> {
        Ok(self.coefficients[self.grid.lattice_index(k)?])
    }

    /// Pointwise product with a tabulated symbol (storage order).
    pub fn multiplied(&self, symbol: &[Complex64]) -> Self {
        let coefficients = self
            .coefficients
            .iter()
            .zip(symbol)
            .map(|(&c, &m)| c * m)
            .collect();
        Self {
            grid: self.grid,
            coefficients,
        }
    }

    /// Pointwise product with a real tabulated symbol (storage order).
    pub fn multiplied_real(&self, symbol: &[f64]) -> Self {
        let coefficients = self
            .coefficients
            .iter()
            .zip(symbol)
            .map(|(&c, &m)| c * m)
            .collect();
        Self {
            grid: self.grid,
            coefficients,
        }
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(n, direction))
}

/// Unnormalized in-place DFT over every axis.
fn dft_in_place(grid: &GridSpec, data: &mut [Complex64], direction: FftDirection) {
    let n = grid.n;
    let fft = plan(n, direction);
    // rows (last axis, contiguous)
    fft.process(data);
    if grid.dim == 2 {
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for c in 0..n {
            for r in 0..n {
                col[r] = data[r * n + c];
            }
            fft.process(&mut col);
            for r in 0..n {
                data[r * n + c] = col[r];
            }
        }
    }
}

/// Discrete forward transform in the symmetric convention.
pub fn forward_transform(f: &SampledField) -> SpectralField {
    let conv = FourierConvention::for_grid(&f.grid);
    let mut data = f.values.clone();
    dft_in_place(&f.grid, &mut data, FftDirection::Forward);
    for c in &mut data {
        *c *= conv.forward_scale;
    }
    SpectralField {
        grid: f.grid,
        coefficients: data,
    }
}

/// Inverse of [`forward_transform`].
pub fn inverse_transform(spectrum: &SpectralField) -> SampledField {
    let conv = FourierConvention::for_grid(&spectrum.grid);
    let mut data = spectrum.coefficients.clone();
    dft_in_place(&spectrum.grid, &mut data, FftDirection::Inverse);
    for c in &mut data {
        *c *= conv.inverse_scale;
    }
    SampledField {
        grid: spectrum.grid,
        values: data,
    }
}

/// Quadrature `L^p` norm `(h^dim sum |f|^p)^{1/p}`, or `max |f|` for `p = inf`.
pub fn lp_norm(f: &SampledField, p: Exponent) -> f64 {
    let moduli: Vec<f64> = f.values.iter().map(|v| v.norm()).collect();
    lp_norm_of_moduli(&moduli, f.grid.cell_volume(), p)
}

/// `L^p` quadrature of already-computed nonnegative samples.
pub fn lp_norm_of_moduli(moduli: &[f64], cell_volume: f64, p: Exponent) -> f64 {
    match p {
        Exponent::Infinite => moduli.iter().fold(0.0, |m, &v| m.max(v)),
        Exponent::Finite(p) => {
            let sum: f64 = moduli.iter().map(|&v| v.powf(p)).sum();
            (cell_volume * sum).powf(1.0 / p)
        }
    }
}

/// Applies the multiplier `m(xi)` (the closure receives `dim` components of xi).
pub fn apply_multiplier<M>(f: &SampledField, m: M) -> Result<SampledField>
where
    M: Fn(&[f64]) -> Complex64,
{
    let d = f.grid.dim;
    let symbol: Vec<Complex64> = f.grid.lattice().iter().map(|pt| m(&pt.xi[..d])).collect();
    apply_symbol(f, &symbol)
}

/// Applies a symbol tabulated on the lattice in storage order.
pub fn apply_symbol(f: &SampledField, symbol: &[Complex64]) -> Result<SampledField> {
    if symbol.len() != f.grid.len() {
        return Err(Error::LengthMismatch {
            expected: f.grid.len(),
            actual: symbol.len(),
        });
    }
    if let Some(index) = symbol
        .iter()
        .position(|v| !(v.re.is_finite() && v.im.is_finite()))
    {
        return Err(Error::NonFiniteMultiplier { index });
    }
    Ok(inverse_transform(&forward_transform(f).multiplied(symbol)))
}

/// Applies a real symbol tabulated on the lattice in storage order.
pub fn apply_real_symbol(f: &SampledField, symbol: &[f64]) -> Result<SampledField> {
    if symbol.len() != f.grid.len() {
        return Err(Error::LengthMismatch {
            expected: f.grid.len(),
            actual: symbol.len(),
        });
    }
    if let Some(index) = symbol.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteMultiplier { index });
    }
    Ok(inverse_transform(
        &forward_transform(f).multiplied_real(symbol),
    ))
}

/// Riemann-sum `L^p` norm of the kernel `F^{-1}[symbol]`.
pub fn kernel_lp_norm(grid: &GridSpec, symbol: &[Complex64], p: Exponent) -> Result<f64> {
    let spectrum = SpectralField::new(*grid, symbol.to_vec())?;
    Ok(lp_norm(&inverse_transform(&spectrum), p))
}

/// Circular convolution `sum_z w(z) f(x - z)` with weights given per grid cell.
pub fn circular_convolve(f: &SampledField, weights: &[Complex64]) -> Result<SampledField> {
    if weights.len() != f.grid.len() {
        return Err(Error::LengthMismatch {
            expected: f.grid.len(),
            actual: weights.len(),
        });
    }
    let mut a = f.values.clone();
    let mut b = weights.to_vec();
    dft_in_place(&f.grid, &mut a, FftDirection::Forward);
    dft_in_place(&f.grid, &mut b, FftDirection::Forward);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    dft_in_place(&f.grid, &mut a, FftDirection::Inverse);
    let norm = 1.0 / f.grid.len() as f64;
    for x in &mut a {
        *x *= norm;
    }
    SampledField::new(f.grid, a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(3, 16, 1.0).is_err());
        assert!(GridSpec::new(1, 24, 1.0).is_err());
        assert!(GridSpec::new(1, 8, 1.0).is_err());
        assert!(GridSpec::new(1, 16, 0.0).is_err());
        assert!(GridSpec::new(2, 16, 3.0).is_ok());
    }

    #[test]
    fn lattice_range() {
        let g = GridSpec::unit_circle(16).unwrap();
        let ks: Vec<i64> = g.lattice().iter().map(|p| p.k[0]).collect();
        assert_eq!(*ks.iter().min().unwrap(), -8);
        assert_eq!(*ks.iter().max().unwrap(), 7);
    }

    #[test]
    fn constant_has_only_dc() {
        let g = GridSpec::unit_circle(16).unwrap();
        let f = SampledField::from_real(g, &[1.0; 16]).unwrap();
        let spec = forward_transform(&f);
        let dc = spec.coefficient(&[0]).unwrap();
        let expected = (2.0 * PI).powf(-0.5) * g.period();
        assert!((dc.re - expected).abs() < 1e-14 && dc.im.abs() < 1e-14);
        for k in 1..8 {
            assert!(spec.coefficient(&[k]).unwrap().norm() < 1e-14);
        }
    }

    #[test]
    fn harmonic_is_single_coefficient() {
        let g = GridSpec::unit_circle(32).unwrap();
        let f = SampledField::from_fn(g, |x| Complex64::from_polar(1.0, 5.0 * x[0])).unwrap();
        let spec = forward_transform(&f);
        for pt in g.lattice() {
            let v = spec.coefficient(&[pt.k[0]]).unwrap();
            if pt.k[0] == 5 {
                assert!(v.norm() > 1.0);
            } else {
                assert!(v.norm() < 1e-13, "k={} leak {}", pt.k[0], v.norm());
            }
        }
    }

    #[test]
    fn inverse_of_zero_and_delta() {
        let g = GridSpec::new(2, 16, 3.0).unwrap();
        let zero = SpectralField::new(g, vec![c(0.0); g.len()]).unwrap();
        assert_eq!(inverse_transform(&zero).sup_norm(), 0.0);

        let mut coeffs = vec![c(0.0); g.len()];
        coeffs[g.lattice_index(&[2, -3]).unwrap()] = c(1.0);
        let f = inverse_transform(&SpectralField::new(g, coeffs).unwrap());
        let m0 = f.values()[0].norm();
        assert!(m0 > 0.0);
        assert!(f.values().iter().all(|v| (v.norm() - m0).abs() < 1e-14));
    }

    #[test]
    fn lp_norm_examples() {
        let g = GridSpec::new(1, 16, 3.0).unwrap();
        let f = SampledField::from_real(g, &[2.0; 16]).unwrap();
        for p in [0.5, 1.0, 2.0, 3.5] {
            let expected = 2.0 * 3.0f64.powf(1.0 / p);
            assert!((lp_norm(&f, Exponent::Finite(p)) - expected).abs() < 1e-12);
        }
        let g = GridSpec::unit_circle(64).unwrap();
        let h = SampledField::from_fn(g, |x| Complex64::from_polar(1.0, 3.0 * x[0])).unwrap();
        assert!((lp_norm(&h, Exponent::Infinite) - 1.0).abs() < 1e-15);
        let s = SampledField::from_fn(g, |x| c(x[0].sin())).unwrap();
        assert!((lp_norm(&s, Exponent::Finite(2.0)) - PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn multiplier_eigenfunction_and_errors() {
        let g = GridSpec::unit_circle(32).unwrap();
        let f = SampledField::from_fn(g, |x| Complex64::from_polar(1.0, -3.0 * x[0])).unwrap();
        let lap = apply_multiplier(&f, |xi| c(xi[0] * xi[0])).unwrap();
        assert!(lap.max_abs_diff(&f.scale(c(9.0))).unwrap() < 1e-12);
        let same = apply_multiplier(&f, |_| c(1.0)).unwrap();
        assert!(same.max_abs_diff(&f).unwrap() < 1e-12);
        let bad = apply_multiplier(&f, |xi| c(1.0 / xi[0]));
        assert!(matches!(bad, Err(Error::NonFiniteMultiplier { .. })));
    }

    #[test]
    fn non_finite_values_rejected() {
        let g = GridSpec::unit_circle(16).unwrap();
        let mut v = vec![0.0; 16];
        v[3] = f64::NAN;
        assert_eq!(
            SampledField::from_real(g, &v),
            Err(Error::NonFinite { index: 3 })
        );
        assert!(SampledField::from_real(g, &[0.0; 4]).is_err());
    }

    #[test]
    fn convolution_with_delta_is_shift() {
        let g = GridSpec::unit_circle(16).unwrap();
        let f = SampledField::from_fn(g, |x| c(x[0].cos() + 0.3 * (2.0 * x[0]).sin())).unwrap();
        let mut w = vec![c(0.0); 16];
        w[3] = c(1.0);
        let conv = circular_convolve(&f, &w).unwrap();
        assert!(conv.max_abs_diff(&f.shifted(&[-3])).unwrap() < 1e-14);
    }
}
