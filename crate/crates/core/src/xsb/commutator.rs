use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bilinear::RatioStats;
use super::norms::{xsb_norm, xsb_norm_multi, Dispersion, XsbParams};
use super::random::{band_support, check_resolvable, random_band_field, random_band_spinor, trial_rng};
use super::spacetime::{LabGrid, SpaceTimeSpectrum};
use super::trilinear::{all_sign_triples, band_schedule, scheduled_draw, weighted_spinor, TrilinearExponents};
use crate::dirac::{apply_projection, Mat2, Sign, SpinorField};
use crate::error::{DkgError, Result};
use crate::gevrey::GevreyWeight;
use crate::linalg::linear_fit;
use crate::spectral::{check_weight_exponent, SpectralField, Transform};

fn product(transform: &Transform, phi: &SpectralField, psi: &SpinorField) -> SpinorField {
    SpinorField { c1: transform.dealiased_product(phi, &psi.c1), c2: transform.dealiased_product(phi, &psi.c2) }
}

/// `e^{σ‖D‖}(φβΠ_{s₁}ψ₁) − φ(βΠ_{s₁}e^{σ‖D‖}ψ₁)`, both products dealiased.
pub fn commutator_field(phi: &SpectralField, psi1: &SpinorField, sigma: f64, s1: Sign) -> Result<SpinorField> {
    phi.ensure_same_grid(&psi1.c1)?;
    check_weight_exponent(sigma, phi.grid())?;
    let transform = Transform::new(phi.grid());
    commutator_with(&transform, phi, psi1, sigma, s1)
}

fn commutator_with(transform: &Transform, phi: &SpectralField, psi1: &SpinorField, sigma: f64, s1: Sign) -> Result<SpinorField> {
    let beta = Mat2::beta();
    let inner = apply_projection(psi1, s1).apply_matrix(beta);
    let outer = weighted_spinor(&product(transform, phi, &inner), sigma)?;
    let lifted = apply_projection(&weighted_spinor(psi1, sigma)?, s1).apply_matrix(beta);
    Ok(outer.sub(&product(transform, phi, &lifted)))
}

/// `∫ ⟨commutator, Π_{s₂}ψ₂⟩ dt dx` over spectral records.
pub fn commutator_pairing(
    phi: &SpaceTimeSpectrum,
    psi1: &[SpaceTimeSpectrum; 2],
    psi2: &[SpaceTimeSpectrum; 2],
    sigma: f64,
    signs: [Sign; 2],
) -> Result<Complex64> {
    check_weight_exponent(sigma, phi.grid)?;
    let transform = Transform::new(phi.grid);
    let p = phi.inverse();
    let (a1, a2) = (psi1[0].inverse(), psi1[1].inverse());
    let (b1, b2) = (psi2[0].inverse(), psi2[1].inverse());
    let mut total = Complex64::new(0.0, 0.0);
    for j in 0..p.n_t() {
        let u = SpinorField { c1: a1.samples[j].clone(), c2: a2.samples[j].clone() };
        let v = apply_projection(&SpinorField { c1: b1.samples[j].clone(), c2: b2.samples[j].clone() }, signs[1]);
        let c = commutator_with(&transform, &p.samples[j], &u, sigma, signs[0])?;
        total += c.inner(&v);
    }
    Ok(total * p.dt)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutatorPoint {
    pub sigma: f64,
    /// `|pairing| / (σ^θ ‖φ‖_{X^{σ,a+θ,b₀;1}} ‖ψ₁‖_{X^{σ,0,b₁;1}} ‖ψ₂‖_{X^{0,0,b₂;1}})`.
    pub stats: RatioStats<CommutatorParams>,
    /// Mean raw `|pairing|` over the trials.
    pub mean_size: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutatorParams {
    pub exponents: TrilinearExponents,
    pub theta: f64,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutatorReport {
    pub points: Vec<CommutatorPoint>,
    /// Slope of `ln(mean size)` against `ln σ`.
    pub slope: f64,
}

/// Each trial takes scheduled bands, signs (cycling through all eight) and fields once
/// and reuses them for every `σ`, so the slope follows a fixed population.
pub fn commutator_ratio(
    lab: &LabGrid,
    exponents: TrilinearExponents,
    sigmas: &[f64],
    theta: f64,
    trials: usize,
    seed: u64,
) -> Result<CommutatorReport> {
    exponents.check()?;
    if !(0.0..=1.0).contains(&theta) {
        return Err(DkgError::Domain(format!("θ = {theta} outside [0, 1]")));
    }
    if sigmas.len() < 2 || sigmas.iter().any(|s| !(*s > 0.0)) {
        return Err(DkgError::Config("need at least two positive σ values".into()));
    }
    for &s in sigmas {
        check_weight_exponent(s, lab.grid)?;
    }
    let triples = all_sign_triples();
    let schedule = band_schedule();
    let per_trial: Vec<Result<Vec<(f64, f64)>>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            let draw = scheduled_draw(&schedule, t, trials);
            let signs = triples[t % triples.len()];
            let h = signs.map(Dispersion::wave);
            let supports: Vec<_> = (0..3).map(|i| band_support(lab, draw.bands[i], h[i])).collect();
            check_resolvable(lab, &supports, lab.n_t as f64 * lab.dtau(), lab.grid.n() as i64)?;
            let phi = random_band_field(lab, draw.bands[0], h[0], &mut rng);
            let psi1 = random_band_spinor(lab, draw.bands[1], signs[1], &mut rng);
            let psi2 = random_band_spinor(lab, draw.bands[2], signs[2], &mut rng);
            let d2 = xsb_norm_multi(&[&psi2[0], &psi2[1]], XsbParams::new(0.0, 0.0, exponents.b[2], 1.0, h[2]))?;
            sigmas
                .iter()
                .map(|&sigma| {
                    let size = commutator_pairing(&phi, &psi1, &psi2, sigma, [signs[1], signs[2]])?.norm();
                    let d0 = xsb_norm(&phi, XsbParams::new(sigma, exponents.a + theta, exponents.b[0], 1.0, h[0]))?;
                    let d1 = xsb_norm_multi(&[&psi1[0], &psi1[1]], XsbParams::new(sigma, 0.0, exponents.b[1], 1.0, h[1]))?;
                    let denom = sigma.powf(theta) * d0 * d1 * d2;
                    Ok((size, if denom > 0.0 { size / denom } else { 0.0 }))
                })
                .collect()
        })
        .collect();
    let per_trial = per_trial.into_iter().collect::<Result<Vec<_>>>()?;
    let mut points = Vec::with_capacity(sigmas.len());
    for (k, &sigma) in sigmas.iter().enumerate() {
        let ratios: Vec<f64> = per_trial.iter().map(|v| v[k].1).collect();
        let mean_size = per_trial.iter().map(|v| v[k].0).sum::<f64>() / trials.max(1) as f64;
        let params = CommutatorParams { exponents, theta, sigma };
        points.push(CommutatorPoint { sigma, stats: RatioStats::from_ratios(params, &ratios, seed)?, mean_size });
    }
    let xs: Vec<f64> = sigmas.iter().map(|s| s.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean_size.max(f64::MIN_POSITIVE).ln()).collect();
    let (_, slope, _) = linear_fit(&xs, &ys).ok_or_else(|| DkgError::Numerical { t: 0.0, message: "degenerate slope fit".into() })?;
    Ok(CommutatorReport { points, slope })
}

/// `Λ(ξ, η) = e^{σ‖η‖} − e^{σ‖η−ξ‖}`.
pub fn lambda_kernel(sigma: f64, xi: crate::spectral::Mode, eta: crate::spectral::Mode) -> f64 {
    let w = GevreyWeight { sigma, s: 0.0 };
    w.eval(eta) - w.eval(eta - xi)
}

pub const COMMUTATOR_SIGMAS: [f64; 4] = [0.0125, 0.025, 0.05, 0.1];

pub const COMMUTATOR_TRIALS: usize = 50;
