//! Periodic spectral substrate on the torus `[0, 2π)²`.
//!
//! Normalization: the forward transform approximates the torus integral
//! `f̂(ξ) = ∫ e^{-ix·ξ} f(x) dx` by the rectangle rule with weight `(2π/n)²`,
//! and the inverse is the Fourier series `f(x) = (2π)^{-2} Σ_ξ f̂(ξ) e^{ix·ξ}`.
//! With this choice `∫|f|² dx = (2π)^{-2} Σ_ξ |f̂(ξ)|²`, the lattice analogue of
//! Plancherel on `ℝ²`, and every norm in the crate is expressed in physical
//! `L²` units.

mod dyadic;
mod field;
mod grid;
mod multiplier;
pub mod snapshot;
mod transform;

pub use dyadic::{dyadic_bands, dyadic_project, Dyadic};
pub use field::SpectralField;
pub use grid::{FourierGrid, Mode};
pub use multiplier::{apply_multiplier, check_weight_exponent, Symbol, MAX_WEIGHT_EXPONENT};
pub use transform::{dealiased_product, forward_transform, inverse_transform, Transform};

/// `(2π)^{-2}`, the Parseval constant of the torus.
pub const INV_TORUS_AREA: f64 = 1.0 / (4.0 * std::f64::consts::PI * std::f64::consts::PI);
