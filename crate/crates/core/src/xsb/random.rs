use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::norms::Dispersion;
use super::spacetime::{LabGrid, SpaceTimeSpectrum};

use crate::dirac::{projection_for_mode, Sign};
use crate::error::{DkgError, Result};
use crate::spectral::{Dyadic, Mode};

/// A spatial band `P_N` together with a modulation band `Q_L^h`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicBand {
    #[serde(rename = "N")]
    pub n: Dyadic,
    #[serde(rename = "L")]
    pub l: Dyadic,
}

impl DyadicBand {
    pub fn new(n: u64, l: u64) -> Result<Self> {
        let d = |v| Dyadic::new(v).ok_or_else(|| DkgError::Domain(format!("{v} is not a dyadic number")));
        Ok(DyadicBand { n: d(n)?, l: d(l)? })
    }

    pub fn contains(self, tau: f64, m: Mode, h: Dispersion) -> bool {
        self.n.contains_sq(m.abs_sq()) && self.l.contains(h.modulation(tau, m))
    }
}

/// Largest `|τ|` and largest coordinate `|k_i|` over the lattice points of a band.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Support {
    pub tau: f64,
    pub k: i64,
}

pub fn band_support(lab: &LabGrid, band: DyadicBand, h: Dispersion) -> Support {
    let z = lab.zeros();
    let mut s = Support { tau: 0.0, k: 0 };
    for k in 0..lab.n_t {
        let tau = z.tau(k);
        for (_, m) in lab.grid.modes() {
            if band.contains(tau, m, h) {
                s.tau = s.tau.max(tau.abs());
                s.k = s.k.max(m.k1.abs()).max(m.k2.abs());
            }
        }
    }
    s
}

/// Products of fields with these supports are computed without wrap-around
/// when the summed extents stay inside the given fractions of the lattice.
pub fn check_resolvable(lab: &LabGrid, supports: &[Support], tau_extent: f64, k_extent: i64) -> Result<()> {
    let tau: f64 = supports.iter().map(|s| s.tau).sum();
    let k: i64 = supports.iter().map(|s| s.k).sum();
    if tau >= tau_extent || k >= k_extent {
        return Err(DkgError::Config(format!(
            "bands not resolvable on {}² × {}: |τ| extent {tau} (limit {tau_extent}), |k| extent {k} (limit {k_extent})",
            lab.grid.n(),
            lab.n_t
        )));
    }
    Ok(())
}

/// Per-trial generator: one ChaCha stream per trial index.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Complex Gaussian with `E|z|² = 1`.
pub fn complex_gaussian(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// i.i.d. complex Gaussian coefficients on the band, zero elsewhere.
pub fn random_band_field(lab: &LabGrid, band: DyadicBand, h: Dispersion, rng: &mut impl Rng) -> SpaceTimeSpectrum {
    let mut out = lab.zeros();
    let modes: Vec<Mode> = lab.grid.modes().map(|(_, m)| m).collect();
    for k in 0..lab.n_t {
        let tau = out.tau(k);
        for (i, &m) in modes.iter().enumerate() {
            if band.contains(tau, m, h) {
                out.set(k, i, complex_gaussian(rng));
            }
        }
    }
    out
}

/// A random spinor in the range of `Π_s` on the band of `Q^{s}` (`h = s|ξ|`).
pub fn random_band_spinor(lab: &LabGrid, band: DyadicBand, s: Sign, rng: &mut impl Rng) -> [SpaceTimeSpectrum; 2] {
    let h = Dispersion::wave(s);
    let a = random_band_field(lab, band, h, rng);
    let b = random_band_field(lab, band, h, rng);
    project_spinor(&[a, b], s)
}

/// `Π_s` applied at every `(τ, ξ)`.
pub fn project_spinor(psi: &[SpaceTimeSpectrum; 2], s: Sign) -> [SpaceTimeSpectrum; 2] {
    let grid = psi[0].grid;
    let len = grid.len();
    let mut out = [psi[0].clone(), psi[1].clone()];
    for (i, m) in grid.modes() {
        let p = projection_for_mode(m, s);
        for k in 0..psi[0].n_t {
            let v = p.apply([psi[0].coeffs[k * len + i], psi[1].coeffs[k * len + i]]);
            out[0].coeffs[k * len + i] = v[0];
            out[1].coeffs[k * len + i] = v[1];
        }
    }
    out
}
