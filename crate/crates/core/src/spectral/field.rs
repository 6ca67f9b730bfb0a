use rustfft::num_complex::Complex64;

use super::{FourierGrid, Mode, INV_TORUS_AREA};
use crate::error::{DkgError, Result};

/// Fourier coefficients of a scalar function on a [`FourierGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: FourierGrid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: FourierGrid) -> Self {
        SpectralField { grid, coeffs: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_coeffs(grid: FourierGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(DkgError::Config(format!(
                "coefficient array has {} entries, grid expects {}",
                coeffs.len(),
                grid.len()
            )));
        }
        Ok(SpectralField { grid, coeffs })
    }

    /// Field whose coefficients are `f(ξ)`.
    pub fn from_fn(grid: FourierGrid, mut f: impl FnMut(Mode) -> Complex64) -> Self {
        let coeffs = grid.modes().map(|(_, m)| f(m)).collect();
        SpectralField { grid, coeffs }
    }

    /// Single mode `amplitude·δ_{ξ₀}`.
    pub fn single_mode(grid: FourierGrid, mode: Mode, amplitude: Complex64) -> Result<Self> {
        let idx = grid
            .index(mode)
            .ok_or_else(|| DkgError::Config(format!("mode {mode:?} is not on the grid")))?;
        let mut f = Self::zeros(grid);
        f.coeffs[idx] = amplitude;
        Ok(f)
    }

    pub fn grid(&self) -> FourierGrid {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn coeff(&self, m: Mode) -> Option<Complex64> {
        self.grid.index(m).map(|i| self.coeffs[i])
    }

    pub fn ensure_same_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(DkgError::Config("fields live on different grids".into()));
        }
        Ok(())
    }

    /// Mode-wise map `c(ξ) ↦ f(ξ, c(ξ))`.
    pub fn map(&self, f: impl Fn(Mode, Complex64) -> Complex64) -> SpectralField {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| f(self.grid.mode(i), c))
            .collect();
        SpectralField { grid: self.grid, coeffs }
    }

    pub fn zip_map(
        &self,
        other: &SpectralField,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> SpectralField {
        debug_assert_eq!(self.grid, other.grid);
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| f(a, b)).collect();
        SpectralField { grid: self.grid, coeffs }
    }

    pub fn add(&self, other: &SpectralField) -> SpectralField {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, s: Complex64) -> SpectralField {
        self.map(|_, c| c * s)
    }

    /// `self += s·other`.
    pub fn axpy(&mut self, s: Complex64, other: &SpectralField) {
        for (a, &b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
    }

    /// Squared physical `L²` norm, `(2π)^{-2} Σ |f̂|²`.
    pub fn norm_sq(&self) -> f64 {
        INV_TORUS_AREA * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Physical `L²` inner product `∫ f ḡ dx`.
    pub fn inner(&self, other: &SpectralField) -> Complex64 {
        let s: Complex64 = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b.conj()).sum();
        s * INV_TORUS_AREA
    }

    /// Coefficients of the real part of the represented function,
    /// `½(f̂(ξ) + conj f̂(−ξ))` with `−ξ` taken modulo `n`.
    pub fn real_part(&self) -> SpectralField {
        let g = self.grid;
        self.map(|m, c| 0.5 * (c + self.coeffs[g.wrapped_index(-m)].conj()))
    }

    /// Coefficients of the imaginary part, `(f̂(ξ) − conj f̂(−ξ)) / 2i`.
    pub fn imag_part(&self) -> SpectralField {
        let g = self.grid;
        let half_over_i = Complex64::new(0.0, -0.5);
        self.map(|m, c| half_over_i * (c - self.coeffs[g.wrapped_index(-m)].conj()))
    }

    /// Largest deviation from `f̂(−ξ) = conj f̂(ξ)` over pairs where both
    /// lattice points exist, relative to the largest coefficient.
    pub fn conjugate_symmetry_residual(&self) -> f64 {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for (i, m) in self.grid.modes() {
            if let Some(j) = self.grid.index(-m) {
                worst = worst.max((self.coeffs[i] - self.coeffs[j].conj()).norm());
            }
        }
        worst / scale
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.conjugate_symmetry_residual() <= tol
    }

    /// Zero every mode outside the dealias mask.
    pub fn dealiased(&self) -> SpectralField {
        let g = self.grid;
        self.map(|m, c| if g.is_retained(m) { c } else { Complex64::new(0.0, 0.0) })
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> FourierGrid {
        FourierGrid::new(8).unwrap()
    }

    #[test]
    fn real_and_imag_parts_recombine() {
        let f = SpectralField::from_fn(g(), |m| Complex64::new(m.k1 as f64, (m.k2 * m.k1) as f64 + 0.5));
        let re = f.real_part();
        let im = f.imag_part();
        assert!(re.is_real(1e-15));
        assert!(im.is_real(1e-15));
        let back = re.add(&im.scale(Complex64::new(0.0, 1.0)));
        for (a, b) in back.coeffs().iter().zip(f.coeffs()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn single_mode_off_grid_is_error() {
        assert!(SpectralField::single_mode(g(), Mode::new(4, 0), Complex64::new(1.0, 0.0)).is_err());
        assert!(SpectralField::single_mode(g(), Mode::new(-4, 3), Complex64::new(1.0, 0.0)).is_ok());
    }

    #[test]
    fn one_mode_norm() {
        let f = SpectralField::single_mode(g(), Mode::new(1, 2), Complex64::new(3.0, 4.0)).unwrap();
        assert!((f.norm_sq() - 25.0 * INV_TORUS_AREA).abs() < 1e-15);
    }
}
