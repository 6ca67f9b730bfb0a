//! wasm-bindgen surface for `www/index.html`. Every export takes plain
//! numbers and returns a JSON string, so the same functions run natively in
//! tests.

use dkg_core::dirac::{null_form_sweep, Sign, NULL_FORM_CONSTANT};
use dkg_core::gevrey::{estimate_radius, make_datum, shell_maxima, Datum, RadiusWindow};
use dkg_core::spectral::FourierGrid;
use dkg_core::tracker::{certificate_schedule, TrackerParams};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest grid the page will build; 128² keeps a click under a second.
pub const MAX_DEMO_N: usize = 128;

#[derive(Debug, Serialize)]
pub struct RadiusView {
    pub sigma_hat: f64,
    pub saturated: bool,
    pub window: [i64; 2],
    /// `ln max_{‖ξ‖=r} |f̂|`, `null` below the noise floor.
    pub ln_shell_max: Vec<Option<f64>>,
}

pub fn radius_view(n: usize, sigma_star: f64, rho: f64, seed: u64) -> Result<RadiusView, String> {
    if n > MAX_DEMO_N {
        return Err(format!("n = {n} is above the demo limit {MAX_DEMO_N}"));
    }
    let grid = FourierGrid::new(n).map_err(|e| e.to_string())?;
    let f = make_datum(grid, &Datum::ExpDecay { sigma_star, rho, seed }).map_err(|e| e.to_string())?;
    let window = RadiusWindow::default_for(grid);
    let est = estimate_radius(&f, window).map_err(|e| e.to_string())?;
    let shells = shell_maxima(&[&f]);
    let top = shells.iter().cloned().fold(0.0, f64::max);
    let ln_shell_max = shells
        .iter()
        .map(|&m| (m > top * dkg_core::gevrey::NOISE_FLOOR).then(|| m.ln()))
        .collect();
    Ok(RadiusView { sigma_hat: est.sigma_hat, saturated: est.saturated, window: window.into(), ln_shell_max })
}

#[derive(Debug, Serialize)]
pub struct SweepView {
    pub angle: Vec<f64>,
    pub norm: Vec<f64>,
    /// `sup norm/angle` over the sweep.
    pub max_ratio: f64,
    pub constant: f64,
}

pub fn sweep_view(count: usize, s1: i32, s2: i32) -> Result<SweepView, String> {
    if count == 0 || count > 100_000 {
        return Err(format!("count = {count} outside 1..=100000"));
    }
    let sign = |s: i32| if s >= 0 { Sign::Plus } else { Sign::Minus };
    let pts = null_form_sweep(count, sign(s1), sign(s2));
    let max_ratio = pts.iter().map(|p| p.norm / p.angle).fold(0.0, f64::max);
    Ok(SweepView {
        angle: pts.iter().map(|p| p.angle).collect(),
        norm: pts.iter().map(|p| p.norm).collect(),
        max_ratio,
        constant: NULL_FORM_CONSTANT,
    })
}

#[derive(Debug, Serialize)]
pub struct CurveView {
    pub r: f64,
    pub exponent_r: f64,
    pub rate: f64,
    pub t: Vec<f64>,
    /// `log₁₀` of the curve; the values themselves underflow quickly.
    pub log10_curve: Vec<f64>,
    pub knot_t: Vec<f64>,
    pub log10_knot: Vec<f64>,
    pub warnings: Vec<String>,
}

#[allow(clippy::too_many_arguments)]
pub fn curve_view(a: f64, m0: f64, n0: f64, k: f64, sigma0: f64, c: f64, c0: f64, horizon: f64) -> Result<CurveView, String> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(format!("horizon must be positive, got {horizon}"));
    }
    let params = TrackerParams { a, sigma0, c, c0, k, mass: 1.0 };
    let cert = certificate_schedule(params, m0, n0, horizon).map_err(|e| e.to_string())?;
    let steps = 200;
    let t: Vec<f64> = (0..=steps).map(|i| horizon * i as f64 / steps as f64).collect();
    let ln10 = std::f64::consts::LN_10;
    Ok(CurveView {
        r: cert.r,
        exponent_r: cert.exponents.r,
        rate: cert.a_rate,
        log10_curve: t.iter().map(|&s| cert.ln_curve(s) / ln10).collect(),
        t,
        knot_t: cert.knots.iter().map(|k| k.t_start).collect(),
        log10_knot: cert.knots.iter().map(|k| k.ln_sigma / ln10).collect(),
        warnings: cert.warnings,
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

// u32 seed: a u64 would arrive as a BigInt.
#[wasm_bindgen]
pub fn radius(n: usize, sigma_star: f64, rho: f64, seed: u32) -> Result<String, JsError> {
    to_js(radius_view(n, sigma_star, rho, seed.into()))
}

#[wasm_bindgen]
pub fn null_sweep(count: usize, s1: i32, s2: i32) -> Result<String, JsError> {
    to_js(sweep_view(count, s1, s2))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn certificate(a: f64, m0: f64, n0: f64, k: f64, sigma0: f64, c: f64, c0: f64, horizon: f64) -> Result<String, JsError> {
    to_js(curve_view(a, m0, n0, k, sigma0, c, c0, horizon))
}
