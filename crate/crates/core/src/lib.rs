//! Littlewood-Paley analysis on periodic grids.
//!
//! The crate samples functions on the torus, splits them into dyadic
//! frequency bands, and measures them in the Besov and Triebel-Lizorkin
//! scales (homogeneous and nonhomogeneous) and in the Hölder-Zygmund
//! seminorm. The classical Fourier multipliers (lift, Riesz, heat) and the
//! real-space maximal and oscillation functionals are provided alongside a
//! harness ([`verify`]) that runs the standard inequalities of the theory as
//! named numerical checks.

pub mod error;
pub mod operators;
pub mod partition;
pub mod spaces;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
