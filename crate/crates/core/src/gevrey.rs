//! Gevrey norms, analytic test data, and the decay-rate radius estimator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dirac::SpinorField;
use crate::error::{DkgError, Result};
use crate::linalg::{least_squares, linear_fit};
use crate::spectral::{check_weight_exponent, FourierGrid, Mode, SpectralField, INV_TORUS_AREA};

/// Weight `e^{σ‖ξ‖}⟨ξ⟩^s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GevreyWeight {
    pub sigma: f64,
    pub s: f64,
}

impl GevreyWeight {
    pub fn new(sigma: f64, s: f64) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() || !s.is_finite() {
            return Err(DkgError::Domain(format!("bad Gevrey weight σ = {sigma}, s = {s}")));
        }
        Ok(GevreyWeight { sigma, s })
    }

    pub fn eval(&self, m: Mode) -> f64 {
        let w = (self.sigma * m.l1() as f64).exp();
        if self.s == 0.0 {
            w
        } else {
            w * m.japanese().powf(self.s)
        }
    }
}

// Sum of squares with a running rescale so that weights near the overflow
// guard cannot push the intermediate sum to infinity.
fn scaled_sq_sum(terms: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut scale = 0.0f64;
    let mut sum = 0.0f64;
    for t in terms {
        if t == 0.0 {
            continue;
        }
        if t > scale {
            sum = 1.0 + sum * (scale / t) * (scale / t);
            scale = t;
        } else {
            sum += (t / scale) * (t / scale);
        }
    }
    (scale, sum)
}

fn weighted_norm<'a>(fields: impl Iterator<Item = &'a SpectralField>, grid: FourierGrid, w: GevreyWeight) -> Result<f64> {
    check_weight_exponent(w.sigma, grid)?;
    let weights: Vec<f64> = grid.modes().map(|(_, m)| w.eval(m)).collect();
    let terms = fields.flat_map(|f| f.coeffs().iter().zip(&weights).map(|(c, wt)| c.norm() * wt));
    let (scale, sum) = scaled_sq_sum(terms);
    Ok(scale * (sum * INV_TORUS_AREA).sqrt())
}

/// `‖e^{σ‖D‖}⟨D⟩^s f‖_{L²}`.
pub fn gevrey_norm(f: &SpectralField, w: GevreyWeight) -> Result<f64> {
    weighted_norm(std::iter::once(f), f.grid(), w)
}

/// Root of the sum of squared component norms.
pub fn gevrey_norm_spinor(psi: &SpinorField, w: GevreyWeight) -> Result<f64> {
    weighted_norm([&psi.c1, &psi.c2].into_iter(), psi.grid(), w)
}

/// Analytic test data with a known radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Datum {
    /// `e^{−σ*‖ξ‖}⟨ξ⟩^{−ρ}e^{iθ(ξ)}` with Hermitian random phases.
    ExpDecay { sigma_star: f64, rho: f64, seed: u64 },
    /// `e^{−|ξ|²/w²}`.
    Gaussian { width: f64 },
    /// `amplitude·δ_{ξ₀}`.
    SingleMode { k1: i64, k2: i64, amplitude: f64 },
}

pub fn make_datum(grid: FourierGrid, kind: &Datum) -> Result<SpectralField> {
    match *kind {
        Datum::ExpDecay { sigma_star, rho, seed } => {
            if !(sigma_star > 0.0) || !(rho >= 0.0) {
                return Err(DkgError::Config(format!("exp_decay needs σ* > 0 and ρ ≥ 0, got {sigma_star}, {rho}")));
            }
            let phases = hermitian_phases(grid, seed);
            Ok(SpectralField::from_fn(grid, |m| {
                let idx = grid.wrapped_index(m);
                let amp = (-sigma_star * m.l1() as f64).exp() * m.japanese().powf(-rho);
                if phases[idx].is_nan() {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::from_polar(amp, phases[idx])
                }
            }))
        }
        Datum::Gaussian { width } => {
            if !(width > 0.0) {
                return Err(DkgError::Config(format!("gaussian width must be > 0, got {width}")));
            }
            Ok(SpectralField::from_fn(grid, |m| Complex64::new((-(m.abs_sq() as f64) / (width * width)).exp(), 0.0)))
        }
        Datum::SingleMode { k1, k2, amplitude } => SpectralField::single_mode(grid, Mode::new(k1, k2), amplitude.into()),
    }
}

// θ(−ξ) = −θ(ξ), θ(0) = 0. Nyquist modes have no partner on the grid and are
// marked NaN, which the caller turns into a zero coefficient.
fn hermitian_phases(grid: FourierGrid, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = grid.n() as i64 / 2;
    let mut phases = vec![f64::NAN; grid.len()];
    for (i, m) in grid.modes() {
        if m.k1 == -half || m.k2 == -half {
            continue;
        }
        if m == Mode::ZERO {
            phases[i] = 0.0;
            continue;
        }
        let positive = m.k1 > 0 || (m.k1 == 0 && m.k2 > 0);
        if positive {
            let th = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            phases[i] = th;
            phases[grid.wrapped_index(-m)] = -th;
        }
    }
    phases
}

/// Range of ℓ¹ shells `r_min ≤ ‖ξ‖ ≤ r_max` used by the radius fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "[i64; 2]", from = "[i64; 2]")]
pub struct RadiusWindow {
    pub r_min: i64,
    pub r_max: i64,
}

impl From<RadiusWindow> for [i64; 2] {
    fn from(w: RadiusWindow) -> Self {
        [w.r_min, w.r_max]
    }
}

impl From<[i64; 2]> for RadiusWindow {
    fn from(w: [i64; 2]) -> Self {
        RadiusWindow { r_min: w[0], r_max: w[1] }
    }
}

impl RadiusWindow {
    pub fn new(r_min: i64, r_max: i64) -> Self {
        RadiusWindow { r_min, r_max }
    }

    /// `[n/32, n/6]`: skips the low-mode bulge and the dealias-truncated tail.
    pub fn default_for(grid: FourierGrid) -> Self {
        let n = grid.n() as i64;
        RadiusWindow { r_min: (n / 32).max(1), r_max: n / 6 }
    }

    fn validate(&self, grid: FourierGrid) -> Result<()> {
        if self.r_min < 0 || self.r_min >= self.r_max || self.r_max > grid.max_l1() {
            return Err(DkgError::Estimation(format!(
                "window [{}, {}] is empty or exceeds the lattice (max ‖ξ‖ = {})",
                self.r_min,
                self.r_max,
                grid.max_l1()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusEstimate {
    pub sigma_hat: f64,
    pub window: RadiusWindow,
    pub residual: f64,
    pub saturated: bool,
}

/// Shells below `NOISE_FLOOR·max|f̂|` are round-off, not decay.
pub const NOISE_FLOOR: f64 = 1e3 * f64::EPSILON;
/// Fewer surviving shells than this and the estimate is flagged saturated.
pub const MIN_FIT_SHELLS: usize = 5;

/// `max_{‖ξ‖ = r} |f̂(ξ)|` over components, for every `r` in `0..=max_l1`.
pub fn shell_maxima(fields: &[&SpectralField]) -> Vec<f64> {
    let grid = fields[0].grid();
    let mut out = vec![0.0; grid.max_l1() as usize + 1];
    for f in fields {
        for (i, m) in grid.modes() {
            let r = m.l1() as usize;
            out[r] = f64::max(out[r], f.coeffs()[i].norm());
        }
    }
    out
}

pub fn estimate_radius(f: &SpectralField, window: RadiusWindow) -> Result<RadiusEstimate> {
    estimate_radius_multi(&[f], window)
}

/// Shell maxima are taken across all components, so a spinor and its
/// companion fields share one radius.
pub fn estimate_radius_multi(fields: &[&SpectralField], window: RadiusWindow) -> Result<RadiusEstimate> {
    let Some(first) = fields.first() else {
        return Err(DkgError::Estimation("no fields".into()));
    };
    let grid = first.grid();
    for f in fields {
        first.ensure_same_grid(f)?;
    }
    window.validate(grid)?;
    let maxima = shell_maxima(fields);
    let top = maxima.iter().copied().fold(0.0, f64::max);
    if !(top > 0.0) || !top.is_finite() {
        return Err(DkgError::Estimation("field is zero or non-finite".into()));
    }
    let floor = NOISE_FLOOR * top;
    let (rs, logs): (Vec<f64>, Vec<f64>) = (window.r_min..=window.r_max)
        .filter(|&r| maxima[r as usize] >= floor && maxima[r as usize] > 0.0)
        .map(|r| (r as f64, maxima[r as usize].ln()))
        .unzip();
    if rs.len() < 2 {
        return Err(DkgError::Estimation(format!(
            "{} shell(s) above the noise floor in [{}, {}]; nothing to fit",
            rs.len(),
            window.r_min,
            window.r_max
        )));
    }
    if rs.len() < MIN_FIT_SHELLS {
        let (_, slope, rms) = linear_fit(&rs, &logs).ok_or_else(|| DkgError::Estimation("degenerate fit".into()))?;
        return Ok(RadiusEstimate { sigma_hat: (-slope).max(0.0), window, residual: rms, saturated: true });
    }
    // log A = c − α·ln⟨r⟩ − σ·r; the algebraic term absorbs Sobolev-type tilts
    let basis = |r: f64, j: usize| match j {
        0 => 1.0,
        1 => -0.5 * (1.0 + r * r).ln(),
        _ => -r,
    };
    let (coef, rms) =
        least_squares(&rs, &logs, 3, basis).ok_or_else(|| DkgError::Estimation("singular regression".into()))?;
    let sigma_hat = coef[2];
    if !sigma_hat.is_finite() {
        return Err(DkgError::Estimation("non-finite slope".into()));
    }
    Ok(RadiusEstimate { sigma_hat, window, residual: rms, saturated: false })
}

pub fn estimate_radius_state(psi: &[&SpinorField], extra: &[&SpectralField], window: RadiusWindow) -> Result<RadiusEstimate> {
    let mut all: Vec<&SpectralField> = psi.iter().flat_map(|p| [&p.c1, &p.c2]).collect();
    all.extend_from_slice(extra);
    estimate_radius_multi(&all, window)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{apply_multiplier, Symbol, Transform};
    use proptest::prelude::*;

    fn w(sigma: f64, s: f64) -> GevreyWeight {
        GevreyWeight::new(sigma, s).unwrap()
    }

    #[test]
    fn plain_l2_at_zero_weight() {
        let g = FourierGrid::new(16).unwrap();
        let f = make_datum(g, &Datum::ExpDecay { sigma_star: 0.3, rho: 1.0, seed: 3 }).unwrap();
        let n = gevrey_norm(&f, w(0.0, 0.0)).unwrap();
        assert!((n - f.norm()).abs() <= 1e-12 * n);
    }

    #[test]
    fn single_mode_norm() {
        let g = FourierGrid::new(16).unwrap();
        let f = make_datum(g, &Datum::SingleMode { k1: 3, k2: -4, amplitude: 1.0 }).unwrap();
        let n = gevrey_norm(&f, w(0.1, 0.0)).unwrap();
        let expect = 0.7f64.exp() * INV_TORUS_AREA.sqrt();
        assert!((n - expect).abs() <= 1e-15 * expect);
    }

    #[test]
    fn weighted_ratio_matches_direct_sum() {
        let g = FourierGrid::new(64).unwrap();
        let f = SpectralField::from_fn(g, |m| Complex64::new((-0.3 * m.l1() as f64).exp(), 0.0));
        let ratio = gevrey_norm(&f, w(0.2, 0.0)).unwrap() / gevrey_norm(&f, w(0.0, 0.0)).unwrap();
        let mut num = 0.0;
        let mut den = 0.0;
        for k1 in -32i64..32 {
            for k2 in -32i64..32 {
                let l1 = (k1.abs() + k2.abs()) as f64;
                num += (2.0 * 0.2 * l1).exp() * (-0.6 * l1).exp();
                den += (-0.6 * l1).exp();
            }
        }
        let oracle = num.sqrt() / den.sqrt();
        assert!((ratio - oracle).abs() <= 1e-12 * oracle);
    }

    #[test]
    fn overflow_guard() {
        let g = FourierGrid::new(64).unwrap();
        let f = SpectralField::zeros(g);
        assert!(matches!(gevrey_norm(&f, w(6.0, 0.0)), Err(DkgError::Range { .. })));
        assert!(GevreyWeight::new(-0.1, 0.0).is_err());
        // right at the guard the norm is still finite
        let top = SpectralField::from_fn(g, |_| Complex64::new(1.0, 0.0));
        let sigma = crate::spectral::MAX_WEIGHT_EXPONENT / 64.0;
        assert!(gevrey_norm(&top, w(sigma, 0.0)).unwrap().is_finite());
    }

    #[test]
    fn exp_decay_formula_and_reality() {
        let g = FourierGrid::new(64).unwrap();
        let f = make_datum(g, &Datum::ExpDecay { sigma_star: 0.3, rho: 0.0, seed: 11 }).unwrap();
        for m in [Mode::new(10, 0), Mode::new(4, -6), Mode::new(-5, -5)] {
            assert!((f.coeff(m).unwrap().norm() - (-3.0f64).exp()).abs() < 1e-15);
        }
        assert!(f.is_real(1e-15));
        let x = Transform::new(g).inverse(&f);
        let peak = x.iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(x.iter().all(|c| c.im.abs() <= 1e-12 * peak));
        assert_eq!(f.coeff(Mode::new(-32, 3)).unwrap().norm(), 0.0);
    }

    #[test]
    fn gaussian_real_even_positive() {
        let g = FourierGrid::new(32).unwrap();
        let f = make_datum(g, &Datum::Gaussian { width: 4.0 }).unwrap();
        for (i, m) in g.modes() {
            let c = f.coeffs()[i];
            assert!(c.im == 0.0 && c.re > 0.0);
            if let Some(j) = g.index(-m) {
                assert_eq!(f.coeffs()[j], c);
            }
        }
    }

    #[test]
    fn recovers_radius_with_tilt() {
        let g = FourierGrid::new(256).unwrap();
        let f = make_datum(g, &Datum::ExpDecay { sigma_star: 0.3, rho: 2.0, seed: 1 }).unwrap();
        let est = estimate_radius(&f, RadiusWindow::new(8, 40)).unwrap();
        assert!(!est.saturated);
        assert!((0.294..=0.306).contains(&est.sigma_hat), "{est:?}");
    }

    #[test]
    fn recovery_grid_and_weight_shift() {
        let g = FourierGrid::new(256).unwrap();
        for &sigma_star in &[0.1, 0.2, 0.3, 0.4, 0.5] {
            for &rho in &[0.0, 1.0, 2.0] {
                let f = make_datum(g, &Datum::ExpDecay { sigma_star, rho, seed: 7 }).unwrap();
                let est = estimate_radius(&f, RadiusWindow::new(8, 40)).unwrap();
                assert!((est.sigma_hat - sigma_star).abs() <= 0.02 * sigma_star, "σ*={sigma_star} ρ={rho}: {est:?}");
                let shifted = apply_multiplier(&f, &Symbol::Gevrey(0.05)).unwrap();
                let est = estimate_radius(&shifted, RadiusWindow::new(8, 40)).unwrap();
                let target = sigma_star - 0.05;
                assert!((est.sigma_hat - target).abs() <= 0.02 * target, "shifted σ*={sigma_star} ρ={rho}: {est:?}");
            }
        }
    }

    #[test]
    fn degenerate_inputs() {
        let g = FourierGrid::new(64).unwrap();
        let single = make_datum(g, &Datum::SingleMode { k1: 5, k2: 1, amplitude: 1.0 }).unwrap();
        assert!(matches!(estimate_radius(&single, RadiusWindow::new(2, 10)), Err(DkgError::Estimation(_))));
        assert!(estimate_radius(&SpectralField::zeros(g), RadiusWindow::new(2, 10)).is_err());
        let f = make_datum(g, &Datum::Gaussian { width: 3.0 }).unwrap();
        assert!(estimate_radius(&f, RadiusWindow::new(10, 10)).is_err());
        assert!(estimate_radius(&f, RadiusWindow::new(1, 65)).is_err());
    }

    #[test]
    fn gaussian_saturates() {
        let g = FourierGrid::new(256).unwrap();
        let f = make_datum(g, &Datum::Gaussian { width: 1.5 }).unwrap();
        let est = estimate_radius(&f, RadiusWindow::new(8, 40)).unwrap();
        assert!(est.saturated, "{est:?}");
        assert!(est.sigma_hat.is_finite());
    }

    #[test]
    fn estimate_json_shape() {
        let e = RadiusEstimate { sigma_hat: 0.25, window: RadiusWindow::new(2, 10), residual: 0.0, saturated: false };
        let v = serde_json::to_string(&e).unwrap();
        assert_eq!(v, r#"{"sigma_hat":0.25,"window":[2,10],"residual":0.0,"saturated":false}"#);
        assert_eq!(serde_json::from_str::<RadiusEstimate>(&v).unwrap(), e);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn monotone_in_sigma_and_s(seed in 0u64..1000, s1 in 0.0f64..0.5, ds in 0.0f64..0.5, t1 in -1.0f64..1.0, dt in 0.0f64..1.0) {
            let g = FourierGrid::new(16).unwrap();
            let f = make_datum(g, &Datum::ExpDecay { sigma_star: 0.4, rho: 0.5, seed }).unwrap();
            let a = gevrey_norm(&f, w(s1, t1)).unwrap();
            let b = gevrey_norm(&f, w(s1 + ds, t1)).unwrap();
            let c = gevrey_norm(&f, w(s1, t1 + dt)).unwrap();
            prop_assert!(b >= a * (1.0 - 1e-14));
            prop_assert!(c >= a * (1.0 - 1e-14));
        }
    }
}
