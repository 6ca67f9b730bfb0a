use serde::{Deserialize, Serialize};

use crate::error::{DkgError, Result};

/// Integer frequency on the lattice `ℤ²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mode {
    pub k1: i64,
    pub k2: i64,
}

impl Mode {
    pub const ZERO: Mode = Mode { k1: 0, k2: 0 };

    pub const fn new(k1: i64, k2: i64) -> Self {
        Mode { k1, k2 }
    }

    /// `|ξ|²`, exact.
    pub fn abs_sq(self) -> i64 {
        self.k1 * self.k1 + self.k2 * self.k2
    }

    /// Euclidean length `|ξ|`.
    pub fn abs(self) -> f64 {
        (self.abs_sq() as f64).sqrt()
    }

    /// `‖ξ‖ = |ξ₁| + |ξ₂|`.
    pub fn l1(self) -> i64 {
        self.k1.abs() + self.k2.abs()
    }

    /// `⟨ξ⟩ = (1 + |ξ|²)^{1/2}`.
    pub fn japanese(self) -> f64 {
        (1.0 + self.abs_sq() as f64).sqrt()
    }

    pub fn as_vec(self) -> [f64; 2] {
        [self.k1 as f64, self.k2 as f64]
    }
}

impl std::ops::Add for Mode {
    type Output = Mode;
    fn add(self, o: Mode) -> Mode {
        Mode::new(self.k1 + o.k1, self.k2 + o.k2)
    }
}

impl std::ops::Sub for Mode {
    type Output = Mode;
    fn sub(self, o: Mode) -> Mode {
        Mode::new(self.k1 - o.k1, self.k2 - o.k2)
    }
}

impl std::ops::Neg for Mode {
    type Output = Mode;
    fn neg(self) -> Mode {
        Mode::new(-self.k1, -self.k2)
    }
}

/// Square periodic grid with `n` modes per axis.
///
/// Storage is row-major with `ξ₁` fastest; along each axis frequencies are in
/// FFT order `0, 1, …, n/2−1, −n/2, …, −1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FourierGrid {
    n: usize,
    dealias_num: u32,
    dealias_den: u32,
}

impl FourierGrid {
    /// Grid with the default 2/3 dealiasing fraction.
    pub fn new(n: usize) -> Result<Self> {
        Self::with_dealias(n, 2, 3)
    }

    pub fn with_dealias(n: usize, num: u32, den: u32) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(DkgError::Config(format!(
                "grid size n = {n} must be even and at least 8"
            )));
        }
        if num == 0 || den == 0 || num > den {
            return Err(DkgError::Config(format!(
                "dealias fraction {num}/{den} must lie in (0, 1]"
            )));
        }
        Ok(FourierGrid { n, dealias_num: num, dealias_den: den })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of lattice points, `n²`.
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dealias_fraction(&self) -> (u32, u32) {
        (self.dealias_num, self.dealias_den)
    }

    /// Frequency stored at 1D position `i`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        let half = self.n / 2;
        if i < half {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// 1D position of frequency `k`, if it lies in `{−n/2, …, n/2−1}`.
    pub fn position(&self, k: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if k >= -half && k < half {
            Some(if k >= 0 { k as usize } else { (k + self.n as i64) as usize })
        } else {
            None
        }
    }

    pub fn mode(&self, idx: usize) -> Mode {
        Mode::new(self.wavenumber(idx % self.n), self.wavenumber(idx / self.n))
    }

    pub fn index(&self, m: Mode) -> Option<usize> {
        Some(self.position(m.k2)? * self.n + self.position(m.k1)?)
    }

    /// Index of `m` reduced modulo `n`; always defined.
    pub fn wrapped_index(&self, m: Mode) -> usize {
        let n = self.n as i64;
        (m.k2.rem_euclid(n) * n + m.k1.rem_euclid(n)) as usize
    }

    pub fn modes(&self) -> impl Iterator<Item = (usize, Mode)> + '_ {
        (0..self.len()).map(move |i| (i, self.mode(i)))
    }

    /// Largest `‖ξ‖` on the lattice.
    pub fn max_l1(&self) -> i64 {
        self.n as i64
    }

    /// Largest retained component `K`: modes with `|ξ₁|, |ξ₂| ≤ K` survive the
    /// dealias mask. `K` is the largest integer strictly below `fraction·n/2`,
    /// or everything for fraction 1.
    pub fn dealias_cutoff(&self) -> i64 {
        if self.dealias_num == self.dealias_den {
            return self.n as i64 / 2;
        }
        let num = self.dealias_num as i64 * self.n as i64;
        let den = 2 * self.dealias_den as i64;
        (num + den - 1) / den - 1
    }

    pub fn is_retained(&self, m: Mode) -> bool {
        if self.dealias_num == self.dealias_den {
            return true;
        }
        let k = self.dealias_cutoff();
        m.k1.abs() <= k && m.k2.abs() <= k
    }

    /// Grid-point coordinate `2πj/n`.
    pub fn coordinate(&self, j: usize) -> f64 {
        2.0 * std::f64::consts::PI * j as f64 / self.n as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(FourierGrid::new(6).is_err());
        assert!(FourierGrid::new(9).is_err());
        assert!(FourierGrid::with_dealias(16, 4, 3).is_err());
        assert!(FourierGrid::new(8).is_ok());
    }

    #[test]
    fn index_mode_bijection() {
        for n in [8, 10, 16, 32] {
            let g = FourierGrid::new(n).unwrap();
            let mut seen = vec![false; g.len()];
            for (i, m) in g.modes() {
                assert_eq!(g.index(m), Some(i));
                assert_eq!(g.wrapped_index(m), i);
                assert!(m.k1 >= -(n as i64) / 2 && m.k1 < n as i64 / 2);
                seen[i] = true;
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn dealias_cutoff_is_alias_free() {
        for n in [8, 16, 32, 64, 128, 256] {
            let g = FourierGrid::new(n).unwrap();
            let k = g.dealias_cutoff();
            assert!(3 * k < n as i64, "n={n} k={k}");
            assert!(3 * (k + 1) >= n as i64, "n={n} k={k} not maximal");
        }
        assert_eq!(FourierGrid::new(16).unwrap().dealias_cutoff(), 5);
        let full = FourierGrid::with_dealias(16, 1, 1).unwrap();
        assert!(full.is_retained(Mode::new(-8, 7)));
    }

    #[test]
    fn l1_triangle_inequality_exhaustive() {
        let g = FourierGrid::new(8).unwrap();
        for (_, xi) in g.modes() {
            for (_, eta) in g.modes() {
                assert!(xi.l1() <= (xi - eta).l1() + eta.l1());
            }
        }
    }
}
