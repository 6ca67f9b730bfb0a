use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::dirac::SpinorField;
use crate::error::{DkgError, Result};
use crate::spectral::{FourierGrid, SpectralField, Transform};

pub const MIN_SAMPLES: usize = 8;

/// Time window applied before the temporal transform.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Taper {
    /// For records that are exactly periodic on the window.
    #[default]
    None,
    /// Periodic Hann `1 − cos(2πj/n)`, scaled to unit mean square. Its DFT
    /// lives on bins `0, ±1` only, so a constant leaks nowhere beyond them.
    Hann,
}

impl Taper {
    pub fn weights(self, n_t: usize) -> Vec<f64> {
        match self {
            Taper::None => vec![1.0; n_t],
            Taper::Hann => {
                let norm = (2.0f64 / 3.0).sqrt();
                (0..n_t).map(|j| norm * (1.0 - (2.0 * PI * j as f64 / n_t as f64).cos())).collect()
            }
        }
    }
}

/// Uniform samples `u(t₀ + j·dt)`, `j < n_t`, of a spatial field.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeField {
    pub dt: f64,
    pub samples: Vec<SpectralField>,
    pub taper: Taper,
}

impl SpaceTimeField {
    pub fn new(dt: f64, samples: Vec<SpectralField>, taper: Taper) -> Result<Self> {
        if samples.len() < MIN_SAMPLES {
            return Err(DkgError::Config(format!("need at least {MIN_SAMPLES} time samples, got {}", samples.len())));
        }
        if !(dt > 0.0) {
            return Err(DkgError::Config(format!("sample spacing must be positive, got {dt}")));
        }
        for s in &samples[1..] {
            samples[0].ensure_same_grid(s)?;
        }
        Ok(SpaceTimeField { dt, samples, taper })
    }

    pub fn grid(&self) -> FourierGrid {
        self.samples[0].grid()
    }

    pub fn n_t(&self) -> usize {
        self.samples.len()
    }

    pub fn zeros_like(&self) -> SpaceTimeField {
        SpaceTimeField { samples: self.samples.iter().map(|s| SpectralField::zeros(s.grid())).collect(), ..self.clone() }
    }

    /// `w_j·u_j`: the canonical representative seen by every space-time operation.
    pub fn tapered_samples(&self) -> Vec<SpectralField> {
        let w = self.taper.weights(self.n_t());
        self.samples.iter().zip(w).map(|(s, w)| s.scale(w.into())).collect()
    }

    pub fn map_samples(&self, f: impl Fn(&SpectralField) -> SpectralField) -> SpaceTimeField {
        SpaceTimeField { samples: self.samples.iter().map(f).collect(), ..self.clone() }
    }
}

/// Two-component space-time spinor.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorSpaceTime {
    pub c1: SpaceTimeField,
    pub c2: SpaceTimeField,
}

impl SpinorSpaceTime {
    pub fn new(c1: SpaceTimeField, c2: SpaceTimeField) -> Result<Self> {
        if c1.n_t() != c2.n_t() || c1.dt != c2.dt || c1.taper != c2.taper {
            return Err(DkgError::Config("spinor components sampled differently".into()));
        }
        c1.samples[0].ensure_same_grid(&c2.samples[0])?;
        Ok(SpinorSpaceTime { c1, c2 })
    }

    pub fn n_t(&self) -> usize {
        self.c1.n_t()
    }

    pub fn sample(&self, j: usize) -> SpinorField {
        SpinorField { c1: self.c1.samples[j].clone(), c2: self.c2.samples[j].clone() }
    }

    pub fn tapered_sample(&self, j: usize) -> SpinorField {
        let w = self.c1.taper.weights(self.n_t())[j];
        self.sample(j).scale(w.into())
    }

    pub fn map_samples(&self, f: impl Fn(&SpinorField) -> SpinorField) -> SpinorSpaceTime {
        let mapped: Vec<SpinorField> = (0..self.n_t()).map(|j| f(&self.sample(j))).collect();
        let (a, b): (Vec<_>, Vec<_>) = mapped.into_iter().map(|s| (s.c1, s.c2)).unzip();
        SpinorSpaceTime {
            c1: SpaceTimeField { samples: a, ..self.c1.clone() },
            c2: SpaceTimeField { samples: b, ..self.c2.clone() },
        }
    }

    pub fn spectra(&self) -> [SpaceTimeSpectrum; 2] {
        [spacetime_transform(&self.c1), spacetime_transform(&self.c2)]
    }
}

/// `ũ(τ_k, ξ) = dt Σ_j e^{−iτ_k t_j} w_j û_j(ξ)` on `τ_k = k·dτ`,
/// `dτ = 2π/(n_t·dt)`, `k` in FFT order.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeSpectrum {
    pub grid: FourierGrid,
    pub n_t: usize,
    pub dt: f64,
    /// `coeffs[k·len + i]`.
    pub coeffs: Vec<Complex64>,
}

// repeated plans are cheap next to the transforms, but reuse keeps sweeps lean
fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut p = FftPlanner::new();
    if inverse {
        p.plan_fft_inverse(n)
    } else {
        p.plan_fft_forward(n)
    }
}

impl SpaceTimeSpectrum {
    pub fn zeros(grid: FourierGrid, n_t: usize, dt: f64) -> Self {
        SpaceTimeSpectrum { grid, n_t, dt, coeffs: vec![Complex64::new(0.0, 0.0); n_t * grid.len()] }
    }

    pub fn dtau(&self) -> f64 {
        2.0 * PI / (self.n_t as f64 * self.dt)
    }

    /// Integer temporal wavenumber of bin `k`.
    pub fn tau_index(&self, k: usize) -> i64 {
        let h = self.n_t / 2;
        if k < h {
            k as i64
        } else {
            k as i64 - self.n_t as i64
        }
    }

    pub fn tau(&self, k: usize) -> f64 {
        self.tau_index(k) as f64 * self.dtau()
    }

    /// Bin of integer wavenumber `j`, if on the lattice.
    pub fn tau_bin(&self, j: i64) -> Option<usize> {
        let h = (self.n_t / 2) as i64;
        (-h..h).contains(&j).then(|| j.rem_euclid(self.n_t as i64) as usize)
    }

    pub fn get(&self, k: usize, i: usize) -> Complex64 {
        self.coeffs[k * self.grid.len() + i]
    }

    pub fn set(&mut self, k: usize, i: usize, c: Complex64) {
        let len = self.grid.len();
        self.coeffs[k * len + i] = c;
    }

    /// `(2π)^{-3} Σ |ũ|² dτ`.
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.dtau() / (8.0 * PI * PI * PI)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Multiply every coefficient by `f(τ, ξ)`.
    pub fn mask(&self, f: impl Fn(f64, crate::spectral::Mode) -> f64) -> SpaceTimeSpectrum {
        let mut out = self.clone();
        let len = self.grid.len();
        let modes: Vec<_> = self.grid.modes().map(|(_, m)| m).collect();
        for k in 0..self.n_t {
            let tau = self.tau(k);
            for (i, m) in modes.iter().enumerate() {
                out.coeffs[k * len + i] *= f(tau, *m);
            }
        }
        out
    }

    /// Samples `w_j û_j` (taper included, since it cannot be divided out).
    pub fn inverse(&self) -> SpaceTimeField {
        let len = self.grid.len();
        let p = plan(self.n_t, true);
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len()];
        let mut col = vec![Complex64::new(0.0, 0.0); self.n_t];
        let scale = 1.0 / (self.n_t as f64 * self.dt);
        for i in 0..len {
            for k in 0..self.n_t {
                col[k] = self.coeffs[k * len + i];
            }
            p.process(&mut col);
            for j in 0..self.n_t {
                out[j * len + i] = col[j] * scale;
            }
        }
        let samples = out
            .chunks(len)
            .map(|c| SpectralField::from_coeffs(self.grid, c.to_vec()).expect("length preserved"))
            .collect();
        SpaceTimeField { dt: self.dt, samples, taper: Taper::None }
    }
}

pub fn spacetime_transform(f: &SpaceTimeField) -> SpaceTimeSpectrum {
    let grid = f.grid();
    let len = grid.len();
    let n_t = f.n_t();
    let w = f.taper.weights(n_t);
    let p = plan(n_t, false);
    let mut out = SpaceTimeSpectrum::zeros(grid, n_t, f.dt);
    let mut col = vec![Complex64::new(0.0, 0.0); n_t];
    for i in 0..len {
        for (j, s) in f.samples.iter().enumerate() {
            col[j] = s.coeffs()[i] * w[j];
        }
        p.process(&mut col);
        for (k, c) in col.iter().enumerate() {
            out.coeffs[k * len + i] = c * f.dt;
        }
    }
    out
}

/// `∫ u v̄ dt dx = dt Σ_j ∫ (w_j u_j)(w_j v_j)‾ dx`.
pub fn pairing(u: &SpaceTimeField, v: &SpaceTimeField) -> Complex64 {
    u.tapered_samples().iter().zip(v.tapered_samples()).map(|(a, b)| a.inner(&b)).sum::<Complex64>() * u.dt
}

/// Spectral side of the pairing, `(2π)^{-3} Σ ũ ṽ̄ dτ`.
pub fn spectral_pairing(u: &SpaceTimeSpectrum, v: &SpaceTimeSpectrum) -> Complex64 {
    let s: Complex64 = u.coeffs.iter().zip(&v.coeffs).map(|(a, b)| a * b.conj()).sum();
    s * u.dtau() / (8.0 * PI * PI * PI)
}

/// Pointwise-in-time product of two scalar space-time fields.
pub fn spacetime_product(transform: &Transform, u: &SpaceTimeField, v: &SpaceTimeField) -> SpaceTimeField {
    let a = u.tapered_samples();
    let b = v.tapered_samples();
    let samples = a.iter().zip(&b).map(|(x, y)| transform.aliased_product(x, y)).collect();
    SpaceTimeField { dt: u.dt, samples, taper: Taper::None }
}

/// The standard lab lattice: `n²` modes, `n_t` samples over one `2π` period,
/// so that `dτ = 1` and free waves with integer `|ξ|` sit on the lattice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabGrid {
    pub grid: FourierGrid,
    pub n_t: usize,
    pub dt: f64,
}

impl LabGrid {
    pub fn new(n: usize, n_t: usize) -> Result<Self> {
        if n_t < MIN_SAMPLES || n_t % 2 == 1 {
            return Err(DkgError::Config(format!("n_t must be even and ≥ {MIN_SAMPLES}, got {n_t}")));
        }
        Ok(LabGrid { grid: FourierGrid::with_dealias(n, 1, 1)?, n_t, dt: 2.0 * PI / n_t as f64 })
    }

    /// `32² × 64`.
    pub fn standard() -> Self {
        LabGrid::new(32, 64).expect("valid lab grid")
    }

    pub fn dtau(&self) -> f64 {
        2.0 * PI / (self.n_t as f64 * self.dt)
    }

    pub fn zeros(&self) -> SpaceTimeSpectrum {
        SpaceTimeSpectrum::zeros(self.grid, self.n_t, self.dt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Mode;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(lab: &LabGrid, seed: u64, taper: Taper) -> SpaceTimeField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples = (0..lab.n_t)
            .map(|_| SpectralField::from_fn(lab.grid, |_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
            .collect();
        SpaceTimeField::new(lab.dt, samples, taper).unwrap()
    }

    #[test]
    fn constant_in_time_concentrates_at_zero() {
        let lab = LabGrid::new(8, 32).unwrap();
        let s = SpectralField::from_fn(lab.grid, |m| Complex64::new(1.0 + m.k1 as f64, 0.5));
        let f = SpaceTimeField::new(lab.dt, vec![s; lab.n_t], Taper::Hann).unwrap();
        let spec = spacetime_transform(&f);
        let peak: f64 = spec.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for k in 0..lab.n_t {
            if spec.tau_index(k).abs() >= 4 {
                for i in 0..lab.grid.len() {
                    // −60 dB in amplitude
                    assert!(spec.get(k, i).norm() <= 1e-3 * peak);
                    assert!(spec.get(k, i).norm() <= 1e-13 * peak);
                }
            }
        }
    }

    #[test]
    fn free_wave_is_single_peak() {
        let lab = LabGrid::new(16, 32).unwrap();
        let xi = Mode::new(3, 4);
        let h = 5.0;
        let samples = (0..lab.n_t)
            .map(|j| {
                let t = j as f64 * lab.dt;
                SpectralField::single_mode(lab.grid, xi, Complex64::from_polar(1.0, -t * h)).unwrap()
            })
            .collect();
        let spec = spacetime_transform(&SpaceTimeField::new(lab.dt, samples, Taper::None).unwrap());
        let i0 = lab.grid.index(xi).unwrap();
        let k0 = spec.tau_bin(-5).unwrap();
        for k in 0..lab.n_t {
            for i in 0..lab.grid.len() {
                let c = spec.get(k, i).norm();
                if (k, i) == (k0, i0) {
                    assert!((c - 2.0 * PI).abs() < 1e-12);
                } else {
                    assert!(c < 1e-12);
                }
            }
        }
    }

    #[test]
    fn parseval_matches_direct_sum() {
        let lab = LabGrid::new(8, 16).unwrap();
        for taper in [Taper::None, Taper::Hann] {
            let f = random_field(&lab, 3, taper);
            let spec = spacetime_transform(&f);
            let direct: f64 = f.tapered_samples().iter().map(|s| s.norm_sq()).sum::<f64>() * f.dt;
            assert!((spec.norm_sq() / direct - 1.0).abs() < 1e-12);
        }
        assert!((Taper::Hann.weights(64).iter().map(|w| w * w).sum::<f64>() / 64.0 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn inverse_round_trip_and_pairing() {
        let lab = LabGrid::new(8, 16).unwrap();
        let f = random_field(&lab, 4, Taper::None);
        let g = random_field(&lab, 5, Taper::None);
        let back = spacetime_transform(&f).inverse();
        for (a, b) in back.samples.iter().zip(&f.samples) {
            assert!(a.sub(b).max_abs() < 1e-13);
        }
        let p1 = pairing(&f, &g);
        let p2 = spectral_pairing(&spacetime_transform(&f), &spacetime_transform(&g));
        assert!((p1 - p2).norm() <= 1e-12 * p1.norm());
    }

    #[test]
    fn too_few_samples_rejected() {
        let g = FourierGrid::new(8).unwrap();
        assert!(SpaceTimeField::new(0.1, vec![SpectralField::zeros(g); 7], Taper::None).is_err());
    }
}
