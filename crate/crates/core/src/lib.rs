//! Spectral laboratory for the two-dimensional Dirac–Klein–Gordon system.
//!
//! The crate evolves the half-wave split form of the system on the periodic
//! torus `[0, 2π)²`, measures the uniform radius of spatial analyticity of the
//! solution from the exponential decay of its Fourier coefficients and checks
//! it against the exponential lower-bound schedule produced by the
//! approximate-conservation argument. It also ships empirical verification
//! routines for the estimates that argument rests on: charge conservation,
//! null-form bilinear and trilinear bounds, the commutator bound and the
//! Bourgain-norm inequalities.
//!
//! Module map:
//!
//! * [`spectral`]: grid, transforms, Fourier multipliers, dyadic projectors,
//!   dealiased products and the binary snapshot format.
//! * [`dirac`]: Pauli/Dirac matrices, the projections `Π(±ξ)` and the null
//!   structure.
//! * [`gevrey`]: Gevrey norms, analytic test data and the radius estimator.
//! * [`solver`]: Lawson-RK4 integrator, Picard oracle and trajectories.
//! * [`xsb`]: space-time transforms, `X^{σ,s,b;p}` norms and estimate labs.
//! * [`tracker`]: `𝔐_σ`/`𝔑_σ` observables, approximate conservation and the
//!   certificate schedule.

pub mod dirac;
pub mod error;
pub mod gevrey;
pub mod linalg;
pub mod solver;
pub mod spectral;
pub mod tracker;
pub mod xsb;

pub use error::{DkgError, Result};
pub use rustfft::num_complex::Complex64;
