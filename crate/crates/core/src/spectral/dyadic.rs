use std::fmt;

use serde::{Deserialize, Serialize};

use super::SpectralField;
use rustfft::num_complex::Complex64;

/// A dyadic number `2^k`, `k ≥ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Dyadic(u64);

impl Dyadic {
    pub const ONE: Dyadic = Dyadic(1);

    pub fn new(value: u64) -> Option<Dyadic> {
        value.is_power_of_two().then_some(Dyadic(value))
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }

    /// Membership of `|v|` in `S_N`: `S₁ = (−1,1)`, `S_{2ⁿ} = ±[2^{n−1}, 2ⁿ)`.
    pub fn contains(self, v: f64) -> bool {
        let a = v.abs();
        if self.0 == 1 {
            a < 1.0
        } else {
            a >= (self.0 / 2) as f64 && a < self.0 as f64
        }
    }

    /// Membership of `|ξ|` in `S_N` decided exactly from `|ξ|²`.
    pub fn contains_sq(self, abs_sq: i64) -> bool {
        let hi = (self.0 as i128) * (self.0 as i128);
        let v = abs_sq as i128;
        if self.0 == 1 {
            v < 1
        } else {
            v * 4 >= hi && v < hi
        }
    }

    /// The unique `N` with `|v| ∈ S_N`.
    pub fn band_of(v: f64) -> Dyadic {
        assert!(v.is_finite(), "dyadic band of non-finite value");
        let a = v.abs();
        let mut n = 1u64;
        while !Dyadic(n).contains(a) {
            n *= 2;
        }
        Dyadic(n)
    }

    /// The unique `N` with `|ξ| ∈ S_N`, from `|ξ|²`.
    pub fn band_of_sq(abs_sq: i64) -> Dyadic {
        let mut n = 1u64;
        while !Dyadic(n).contains_sq(abs_sq) {
            n *= 2;
        }
        Dyadic(n)
    }
}

impl TryFrom<u64> for Dyadic {
    type Error = String;
    fn try_from(v: u64) -> Result<Self, Self::Error> {
        Dyadic::new(v).ok_or_else(|| format!("{v} is not a power of two"))
    }
}

impl From<Dyadic> for u64 {
    fn from(d: Dyadic) -> u64 {
        d.0
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `P_N f`: keep modes with `|ξ| ∈ S_N`.
pub fn dyadic_project(f: &SpectralField, n: Dyadic) -> SpectralField {
    f.map(|m, c| if n.contains_sq(m.abs_sq()) { c } else { Complex64::new(0.0, 0.0) })
}

/// All `N` whose band meets the lattice of `grid`.
pub fn dyadic_bands(grid: super::FourierGrid) -> Vec<Dyadic> {
    let max_sq = grid.modes().map(|(_, m)| m.abs_sq()).max().unwrap_or(0);
    let top = Dyadic::band_of_sq(max_sq);
    std::iter::successors(Some(Dyadic::ONE), |d| Some(Dyadic(d.0 * 2)))
        .take_while(|d| *d <= top)
        .collect()
}
