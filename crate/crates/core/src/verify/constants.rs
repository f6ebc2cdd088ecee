//! Constants read off from the Young and Hölder steps of the classical
//! proofs, evaluated on the grid.
//!
//! Every band estimate has the form
//! `||F^{-1}[m phi_j F f]||_r <= c ||F^{-1}[m Phi_j]||_t ||Delta_j f||_p` with
//! `Phi_j = phi_{j-1} + phi_j + phi_{j+1}` (equal to one on the support of
//! `phi_j`) and `c = (2 pi)^{-dim/2}` the convolution factor of the transform
//! convention. The Riemann-sum convolution satisfies Young's inequality
//! exactly, so these constants are rigorous on the grid.

use num_complex::Complex64;

use crate::error::Result;
use crate::operators::riesz_symbol;
use crate::partition::DyadicPartition;
use crate::spectral::{convolution_factor, kernel_lp_norm, Exponent};

fn max_over_bands<F>(partition: &DyadicPartition, mut per_band: F) -> Result<f64>
where
    F: FnMut(i32, Vec<f64>) -> Result<f64>,
{
    let mut best = 0.0f64;
    for j in partition.range().iter() {
        best = best.max(per_band(j, partition.neighborhood(j)?)?);
    }
    Ok(best * convolution_factor(partition.grid()))
}

fn complex(symbol: &[f64]) -> Vec<Complex64> {
    symbol.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

/// `C` with `||f||_{B^{s - dim/p}_{inf q}} <= C ||f||_{B^s_{pq}}`:
/// `c max_j 2^{-j dim/p} ||F^{-1} Phi_j||_{p'}`; requires `p >= 1`.
pub fn sobolev_constant(partition: &DyadicPartition, p: Exponent) -> Result<f64> {
    let conjugate = p.conjugate()?;
    let dim = partition.grid().dim() as f64;
    let grid = *partition.grid();
    max_over_bands(partition, |j, phi| {
        let weight = 2f64.powf(-(j as f64) * dim * p.reciprocal());
        Ok(weight * kernel_lp_norm(&grid, &complex(&phi), conjugate)?)
    })
}

/// `C_alpha` with `||lift(f, alpha)||_{B^{s - alpha}} <= C_alpha ||f||_{B^s}`:
/// `c max_j ||F^{-1}[Phi_j |xi|^alpha 2^{-j alpha}]||_1`.
pub fn lift_constant(partition: &DyadicPartition, alpha: f64) -> Result<f64> {
    let grid = *partition.grid();
    let lattice = partition.lattice();
    max_over_bands(partition, |j, phi| {
        let scale = 2f64.powf(-(j as f64) * alpha);
        let symbol: Vec<Complex64> = phi
            .iter()
            .zip(lattice)
            .map(|(&v, pt)| {
                let m = if v == 0.0 {
                    0.0
                } else {
                    v * pt.radius.powf(alpha) * scale
                };
                Complex64::new(m, 0.0)
            })
            .collect();
        kernel_lp_norm(&grid, &symbol, Exponent::Finite(1.0))
    })
}

/// `C` with `||riesz(f, axis)||_{B^s_{pq}} <= C ||f||_{B^s_{pq}}` for `p >= 1`:
/// `c max_j ||F^{-1}[sigma Phi_j]||_1` with `sigma` the Riesz symbol.
pub fn riesz_constant(partition: &DyadicPartition, axis: usize) -> Result<f64> {
    let grid = *partition.grid();
    let sigma = riesz_symbol(&grid, axis)?;
    max_over_bands(partition, |_, phi| {
        let symbol: Vec<Complex64> = phi.iter().zip(&sigma).map(|(&v, s)| s * v).collect();
        kernel_lp_norm(&grid, &symbol, Exponent::Finite(1.0))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::build_cutoff;
    use crate::spectral::GridSpec;

    #[test]
    fn constants_are_finite_and_positive() {
        let g = GridSpec::unit_circle(256).unwrap();
        let p = DyadicPartition::new(&g, build_cutoff()).unwrap();
        for c in [
            sobolev_constant(&p, Exponent::Finite(2.0)).unwrap(),
            sobolev_constant(&p, Exponent::Infinite).unwrap(),
            lift_constant(&p, 1.0).unwrap(),
            lift_constant(&p, -1.0).unwrap(),
            riesz_constant(&p, 1).unwrap(),
        ] {
            assert!(c.is_finite() && c > 0.0);
        }
        assert!(sobolev_constant(&p, Exponent::Finite(0.5)).is_err());
    }

    #[test]
    fn lift_by_zero_is_at_least_one() {
        // Phi_j is one somewhere, and the kernel L^1 norm dominates the sup of the symbol
        let g = GridSpec::unit_circle(128).unwrap();
        let p = DyadicPartition::new(&g, build_cutoff()).unwrap();
        assert!(lift_constant(&p, 0.0).unwrap() >= 1.0 - 1e-12);
    }
}
