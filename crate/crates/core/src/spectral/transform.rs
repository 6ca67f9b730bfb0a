use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{FourierGrid, SpectralField, INV_TORUS_AREA};
use crate::error::{DkgError, Result};

/// Grids at least this large transform rows in parallel. Rows are independent,
/// so the output is bitwise identical for any thread count.
const PAR_MIN_N: usize = 128;

/// Planned 2D transform pair for one grid.
#[derive(Clone)]
pub struct Transform {
    grid: FourierGrid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transform").field("grid", &self.grid).finish()
    }
}

impl Transform {
    pub fn new(grid: FourierGrid) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(grid.n());
        let inv = planner.plan_fft_inverse(grid.n());
        Transform { grid, fwd, inv }
    }

    pub fn grid(&self) -> FourierGrid {
        self.grid
    }

    /// Physical samples (row-major, `x₁` fastest) to coefficients.
    pub fn forward(&self, samples: &[Complex64]) -> Result<SpectralField> {
        self.check_shape(samples.len())?;
        let mut data = samples.to_vec();
        self.fft2(&mut data, true);
        let w = (2.0 * std::f64::consts::PI / self.grid.n() as f64).powi(2);
        data.iter_mut().for_each(|c| *c *= w);
        SpectralField::from_coeffs(self.grid, data)
    }

    pub fn forward_real(&self, samples: &[f64]) -> Result<SpectralField> {
        let c: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward(&c)
    }

    /// Coefficients to physical samples.
    pub fn inverse(&self, field: &SpectralField) -> Vec<Complex64> {
        debug_assert_eq!(field.grid(), self.grid);
        let mut data = field.coeffs().to_vec();
        self.fft2(&mut data, false);
        data.iter_mut().for_each(|c| *c *= INV_TORUS_AREA);
        data
    }

    fn check_shape(&self, len: usize) -> Result<()> {
        if len != self.grid.len() {
            return Err(DkgError::Config(format!(
                "sample array has {len} entries, grid {}x{} expects {}",
                self.grid.n(),
                self.grid.n(),
                self.grid.len()
            )));
        }
        Ok(())
    }

    fn fft2(&self, data: &mut [Complex64], forward: bool) {
        let n = self.grid.n();
        let plan = if forward { &self.fwd } else { &self.inv };
        rows(plan, data, n);
        transpose(data, n);
        rows(plan, data, n);
        transpose(data, n);
    }

    /// Pseudospectral product `mask(f·g)` with both inputs masked first.
    pub fn dealiased_product(&self, f: &SpectralField, g: &SpectralField) -> SpectralField {
        let a = self.inverse(&f.dealiased());
        let b = self.inverse(&g.dealiased());
        let prod: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        self.forward(&prod).expect("shape preserved").dealiased()
    }

    /// Pseudospectral product without any masking (aliased).
    pub fn aliased_product(&self, f: &SpectralField, g: &SpectralField) -> SpectralField {
        let a = self.inverse(f);
        let b = self.inverse(g);
        let prod: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        self.forward(&prod).expect("shape preserved")
    }
}

fn rows(plan: &Arc<dyn Fft<f64>>, data: &mut [Complex64], n: usize) {
    if n >= PAR_MIN_N {
        data.par_chunks_mut(n * 8).for_each(|block| {
            let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
            plan.process_with_scratch(block, &mut scratch);
        });
    } else {
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(data, &mut scratch);
    }
}

fn transpose(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in i + 1..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

/// One-shot forward transform; plans on every call.
pub fn forward_transform(grid: FourierGrid, samples: &[Complex64]) -> Result<SpectralField> {
    Transform::new(grid).forward(samples)
}

/// One-shot inverse transform; plans on every call.
pub fn inverse_transform(field: &SpectralField) -> Vec<Complex64> {
    Transform::new(field.grid()).inverse(field)
}

/// One-shot dealiased product.
pub fn dealiased_product(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    f.ensure_same_grid(g)?;
    Ok(Transform::new(f.grid()).dealiased_product(f, g))
}
