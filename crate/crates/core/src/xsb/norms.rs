use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::spacetime::SpaceTimeSpectrum;
use crate::dirac::Sign;
use crate::error::{DkgError, Result};
use crate::gevrey::GevreyWeight;
use crate::spectral::{check_weight_exponent, Dyadic, Mode};

/// Dispersion `h(ξ)` of `(−i∂t + h(D))u = F`; free waves sit on `τ = −h(ξ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dispersion {
    PlusAbs,
    MinusAbs,
    PlusJapanese,
    MinusJapanese,
}

impl Dispersion {
    /// `h = s|ξ|`, the half-wave dispersion used by `Q_L^±`.
    pub fn wave(s: Sign) -> Self {
        match s {
            Sign::Plus => Dispersion::PlusAbs,
            Sign::Minus => Dispersion::MinusAbs,
        }
    }

    pub fn eval(self, m: Mode) -> f64 {
        match self {
            Dispersion::PlusAbs => m.abs(),
            Dispersion::MinusAbs => -m.abs(),
            Dispersion::PlusJapanese => m.japanese(),
            Dispersion::MinusJapanese => -m.japanese(),
        }
    }

    /// `|τ + h(ξ)|`.
    pub fn modulation(self, tau: f64, m: Mode) -> f64 {
        (tau + self.eval(m)).abs()
    }
}

/// Parameters of `X^{σ,s,b;p}_h`; `p = ∞` is the sup over `L`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XsbParams {
    pub sigma: f64,
    pub s: f64,
    pub b: f64,
    pub p: f64,
    pub h: Dispersion,
}

impl XsbParams {
    pub fn new(sigma: f64, s: f64, b: f64, p: f64, h: Dispersion) -> Self {
        XsbParams { sigma, s, b, p, h }
    }
}

/// `Q_L`: keep `(τ, ξ)` with `|τ + h(ξ)| ∈ S_L`.
pub fn modulation_project(f: &SpaceTimeSpectrum, l: Dyadic, h: Dispersion) -> SpaceTimeSpectrum {
    f.mask(|tau, m| if l.contains(h.modulation(tau, m)) { 1.0 } else { 0.0 })
}

/// `P_N`: keep `|ξ| ∈ S_N`.
pub fn frequency_project(f: &SpaceTimeSpectrum, n: Dyadic) -> SpaceTimeSpectrum {
    f.mask(|_, m| if n.contains_sq(m.abs_sq()) { 1.0 } else { 0.0 })
}

/// `‖e^{σ‖ξ‖}⟨ξ⟩^s χ_{S_L}(τ + h(ξ)) ũ‖²` for every band `L` present,
/// summed over the given components.
pub fn band_masses(components: &[&SpaceTimeSpectrum], weight: GevreyWeight, h: Dispersion) -> Result<BTreeMap<Dyadic, f64>> {
    let first = components.first().ok_or_else(|| DkgError::Config("no components".into()))?;
    check_weight_exponent(weight.sigma, first.grid)?;
    let grid = first.grid;
    let len = grid.len();
    let modes: Vec<Mode> = grid.modes().map(|(_, m)| m).collect();
    let wsq: Vec<f64> = modes.iter().map(|&m| weight.eval(m).powi(2)).collect();
    let unit = first.dtau() / (8.0 * std::f64::consts::PI.powi(3));
    let mut out = BTreeMap::new();
    for k in 0..first.n_t {
        let tau = first.tau(k);
        for (i, &m) in modes.iter().enumerate() {
            let mut v = 0.0;
            for c in components {
                v += c.coeffs[k * len + i].norm_sqr();
            }
            if v == 0.0 {
                continue;
            }
            let l = Dyadic::band_of(h.modulation(tau, m));
            *out.entry(l).or_insert(0.0) += v * wsq[i] * unit;
        }
    }
    Ok(out)
}

/// `(Σ_L L^{bp} m_L^{p/2})^{1/p}` from squared band masses `m_L`.
pub fn combine_bands(masses: &BTreeMap<Dyadic, f64>, b: f64, p: f64) -> f64 {
    if p.is_infinite() {
        masses.iter().map(|(l, m)| l.as_f64().powf(b) * m.sqrt()).fold(0.0, f64::max)
    } else {
        masses.iter().map(|(l, m)| (l.as_f64().powf(b) * m.sqrt()).powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

pub fn xsb_norm(f: &SpaceTimeSpectrum, params: XsbParams) -> Result<f64> {
    xsb_norm_multi(&[f], params)
}

/// Components share one band decomposition; a spinor is measured by the
/// `ℂ²` length inside each band.
pub fn xsb_norm_multi(components: &[&SpaceTimeSpectrum], params: XsbParams) -> Result<f64> {
    if !(params.p >= 1.0) {
        return Err(DkgError::Domain(format!("ℓ^p exponent must be ≥ 1, got {}", params.p)));
    }
    let w = GevreyWeight::new(params.sigma, params.s)?;
    Ok(combine_bands(&band_masses(components, w, params.h)?, params.b, params.p))
}

/// Constant `C` in `sup_t ‖u(t)‖ ≤ C Σ_L L^{1/2}‖Q_L ũ‖` on a lattice of
/// spacing `dτ`: a band `S_L` holds at most `(2 + dτ)L/dτ` points.
pub fn embedding_constant(dtau: f64) -> f64 {
    ((2.0 + dtau) / (2.0 * std::f64::consts::PI)).sqrt()
}
