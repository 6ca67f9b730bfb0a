//! Discrete space-time lab for the `X^{σ,s,b;p}` norms.
//!
//! A space-time field is a uniform record of spatial samples. The temporal
//! transform uses the same rectangle-rule convention as space, so
//! `‖u‖²_{L²_{t,x}} = (2π)^{-3} Σ |ũ|² dτ` exactly.

mod angle;
mod bilinear;
mod commutator;
mod norms;
mod random;
mod trilinear;
mod spacetime;

pub use angle::*;
pub use bilinear::*;
pub use commutator::*;
pub use norms::*;
pub use random::*;
pub use trilinear::*;
pub use spacetime::*;
