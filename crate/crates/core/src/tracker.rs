//! Gevrey observables, the approximate conservation check and the stepwise
//! lower bound on the radius of analyticity.

use serde::{Deserialize, Serialize};

use crate::error::{DkgError, Result};
use crate::gevrey::{gevrey_norm, gevrey_norm_spinor, GevreyWeight};
use crate::linalg::{linear_fit, polynomial_fit};
use crate::gevrey::Datum;
use crate::solver::{initial_state, picard_solve, Dynamics, InitialData, Nonlinearity, SplitState, Trajectory, PICARD_MAX_T};
use crate::spectral::FourierGrid;

/// `p = min(a, 3(a − 1/4))`, `q = 1/2 − a`, `r = (3/2 − p)/q` (`+∞` at `a = 1/2`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub a: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

pub fn exponents(a: f64) -> Result<Exponents> {
    if !(a > 0.25 && a <= 0.5) {
        return Err(DkgError::Domain(format!("a = {a} outside (1/4, 1/2]")));
    }
    let p = a.min(3.0 * (a - 0.25));
    let q = 0.5 - a;
    let r = if q == 0.0 { f64::INFINITY } else { (1.5 - p) / q };
    Ok(Exponents { a, p, q, r })
}

fn sigma_column(traj: &Trajectory, sigma: f64, which: &str) -> Result<Option<usize>> {
    if traj.samples.is_empty() {
        return Err(DkgError::Config("empty trajectory".into()));
    }
    Ok(traj.sigmas.iter().position(|s| *s == sigma).or_else(|| {
        let _ = which;
        None
    }))
}

fn from_states(traj: &Trajectory, sigma: f64, f: impl Fn(&SplitState, f64) -> Result<f64>) -> Result<Vec<f64>> {
    if traj.states.len() != traj.samples.len() {
        return Err(DkgError::Config(format!("σ = {sigma} was not recorded and the trajectory keeps no states")));
    }
    traj.states
        .iter()
        .map(|s| {
            f(s, sigma).map_err(|e| match e {
                DkgError::Range { requested, max_supported } => DkgError::Numerical {
                    t: s.t,
                    message: format!("Gevrey weight exponent {requested} exceeds {max_supported}"),
                },
                other => other,
            })
        })
        .collect()
}

pub fn m_sigma_of(state: &SplitState, sigma: f64) -> Result<f64> {
    let w = GevreyWeight::new(sigma, 0.0)?;
    let a = gevrey_norm_spinor(&state.psi_plus, w)?;
    let b = gevrey_norm_spinor(&state.psi_minus, w)?;
    Ok(a * a + b * b)
}

pub fn n_sigma_of(state: &SplitState, sigma: f64) -> Result<f64> {
    gevrey_norm(&state.phi_plus, GevreyWeight::new(sigma, 0.5)?)
}

/// `𝔐_σ(t)` per sample, from the recorded column or the kept states.
pub fn measure_m_sigma(traj: &Trajectory, sigma: f64) -> Result<Vec<f64>> {
    match sigma_column(traj, sigma, "M")? {
        Some(i) => Ok(traj.samples.iter().map(|s| s.m_sigma[i]).collect()),
        None => from_states(traj, sigma, m_sigma_of),
    }
}

/// `𝔑_σ(t)` per sample.
pub fn measure_n_sigma(traj: &Trajectory, sigma: f64) -> Result<Vec<f64>> {
    match sigma_column(traj, sigma, "N")? {
        Some(i) => Ok(traj.samples.iter().map(|s| s.n_sigma[i]).collect()),
        None => from_states(traj, sigma, n_sigma_of),
    }
}

/// `δ = c₀ / (1 + 𝔐 + 𝔑²)`.
pub fn local_delta(m: f64, n: f64, c0: f64) -> f64 {
    c0 / (1.0 + m + n * n)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthPoint {
    pub sigma: f64,
    /// `G(σ) = sup_{t≤δ} 𝔐_σ(t) − 𝔐_σ(0)`.
    pub growth: f64,
    /// `G(σ) / (δ^p σ^{1/2−a} 𝔐_σ(0)(𝔐_σ(0)^{1/2} + 𝔑_σ(0)))`; absent at `σ = 0`.
    pub c_eff: Option<f64>,
    pub n_growth: f64,
    /// `G_𝔑(σ) / (δ^{1/2}K + δ^p σ^{1/2−a} 𝔐_σ(0))`.
    pub n_c_eff: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxReport {
    pub exponents: Exponents,
    pub c0: f64,
    pub delta: f64,
    /// Samples with `t ≤ δ`.
    pub samples_used: usize,
    pub points: Vec<GrowthPoint>,
    /// Slope of `ln G` against `ln σ` over `σ > 0` with `G > 0`.
    pub slope: Option<f64>,
    pub max_c_eff: f64,
    /// `max c_eff / min c_eff` over `σ > 0`.
    pub c_eff_variation: f64,
}

impl ApproxReport {
    pub fn point(&self, sigma: f64) -> Option<&GrowthPoint> {
        self.points.iter().find(|p| p.sigma == sigma)
    }
}

/// Growth of `𝔐_σ`, `𝔑_σ` over `[0, δ]` with `δ = local_delta` at the largest `σ`.
pub fn verify_approx_conservation(traj: &Trajectory, sigmas: &[f64], a: f64, c0: f64) -> Result<ApproxReport> {
    let e = exponents(a)?;
    if sigmas.is_empty() {
        return Err(DkgError::Config("no σ values".into()));
    }
    let sigma_max = sigmas.iter().copied().fold(0.0, f64::max);
    let m_top = measure_m_sigma(traj, sigma_max)?;
    let n_top = measure_n_sigma(traj, sigma_max)?;
    let delta = local_delta(m_top[0], n_top[0], c0);
    let t0 = traj.samples[0].t;
    let t_last = traj.samples.last().map(|s| s.t).unwrap_or(t0);
    if t_last - t0 < delta * (1.0 - 1e-12) {
        return Err(DkgError::Config(format!("trajectory covers {} < δ = {delta}", t_last - t0)));
    }
    let used: Vec<usize> = (0..traj.samples.len()).filter(|&i| traj.samples[i].t - t0 <= delta * (1.0 + 1e-12)).collect();
    let k = traj.samples[0].charge;
    let mut points = Vec::with_capacity(sigmas.len());
    for &sigma in sigmas {
        let m = measure_m_sigma(traj, sigma)?;
        let n = measure_n_sigma(traj, sigma)?;
        if m.iter().chain(&n).any(|v| !v.is_finite()) {
            return Err(DkgError::Numerical { t: t0, message: format!("non-finite Gevrey observable at σ = {sigma}") });
        }
        let growth = used.iter().map(|&i| m[i]).fold(f64::NEG_INFINITY, f64::max) - m[0];
        let n_growth = used.iter().map(|&i| n[i]).fold(f64::NEG_INFINITY, f64::max) - n[0];
        let (c_eff, n_c_eff) = if sigma > 0.0 {
            let gain = delta.powf(e.p) * sigma.powf(e.q);
            let scale = gain * m[0] * (m[0].sqrt() + n[0]);
            let n_scale = delta.sqrt() * k + gain * m[0];
            (Some(growth / scale), Some(n_growth / n_scale))
        } else {
            (None, None)
        };
        points.push(GrowthPoint { sigma, growth, c_eff, n_growth, n_c_eff });
    }
    let positive: Vec<&GrowthPoint> = points.iter().filter(|p| p.sigma > 0.0 && p.growth > 0.0).collect();
    let slope = if positive.len() >= 2 {
        let xs: Vec<f64> = positive.iter().map(|p| p.sigma.ln()).collect();
        let ys: Vec<f64> = positive.iter().map(|p| p.growth.ln()).collect();
        linear_fit(&xs, &ys).map(|(_, s, _)| s)
    } else {
        None
    };
    let ceffs: Vec<f64> = points.iter().filter_map(|p| p.c_eff).collect();
    let max_c_eff = ceffs.iter().copied().fold(0.0, f64::max);
    let min_c_eff = ceffs.iter().copied().fold(f64::INFINITY, f64::min);
    let c_eff_variation = if min_c_eff > 0.0 { max_c_eff / min_c_eff } else { f64::INFINITY };
    Ok(ApproxReport { exponents: e, c0, delta, samples_used: used.len(), points, slope, max_c_eff, c_eff_variation })
}

/// Constants of the certificate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackerParams {
    pub a: f64,
    pub sigma0: f64,
    pub c: f64,
    pub c0: f64,
    /// Conserved charge `‖ψ₀‖²`.
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "M")]
    pub mass: f64,
}

/// Block `[(n−1)T₀, nT₀]` with radius at least `σ_n = (11^{n−1}R)^{−r}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Knot {
    pub n: u32,
    pub t_start: f64,
    pub t_end: f64,
    pub sigma: f64,
    /// `ln σ_n`; `σ_n` itself underflows for large `r`.
    pub ln_sigma: f64,
    /// Both Step-1 conditions at `n = 1` with `R` replaced by `11^{n−1}R`.
    pub induction_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub params: TrackerParams,
    pub exponents: Exponents,
    #[serde(rename = "R0")]
    pub r0: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub delta: f64,
    pub mu: f64,
    #[serde(rename = "T0")]
    pub t0: f64,
    #[serde(rename = "A")]
    pub a_rate: f64,
    pub knots: Vec<Knot>,
    pub warnings: Vec<String>,
}

impl Certificate {
    /// `R^{−r} e^{−At}`.
    pub fn curve(&self, t: f64) -> f64 {
        self.ln_curve(t).exp()
    }

    pub fn ln_curve(&self, t: f64) -> f64 {
        -self.exponents.r * self.r.ln() - self.a_rate * t
    }

    /// `σ_n` of the block containing `t`.
    pub fn schedule(&self, t: f64) -> Option<f64> {
        self.knots.iter().find(|k| t >= k.t_start && t <= k.t_end).map(|k| k.sigma)
    }
}

/// Below this `p` the conservation gain `δ^p` is too weak to matter.
pub const DEGENERATE_P: f64 = 0.05;

fn step1_conditions(c: f64, c0: f64, k: f64, e: &Exponents, r: f64) -> bool {
    let delta = c0 / (12.0 * r);
    // σ^q = R^{−rq} = R^{p − 3/2}
    let first = c * delta.powf(e.p) * r.powf(e.p - 1.5) * 11f64.powf(1.5) * r.sqrt();
    let second = c * k * delta.sqrt();
    first <= 1.0 + 1e-12 && second <= r.sqrt() * (1.0 + 1e-12)
}

/// Steps 1 and 2: `R₀` is the smallest power of two with `σ₀^q R₀^{3/2−p} ≥ 1`,
/// `c c₀^{1/2} K ≤ R₀`, `11^{3/2} c c₀^p ≤ R₀`; knots cover `[0, horizon]`.
pub fn certificate_schedule(params: TrackerParams, m0: f64, n0: f64, horizon: f64) -> Result<Certificate> {
    let TrackerParams { a, sigma0, c, c0, k, .. } = params;
    let e = exponents(a)?;
    if !e.r.is_finite() {
        return Err(DkgError::Domain("a = 1/2 gives r = ∞; the certificate needs a < 1/2".into()));
    }
    if !(c > 0.0 && c0 > 0.0 && k > 0.0 && sigma0 > 0.0) {
        return Err(DkgError::Domain(format!("need c, c₀, K, σ₀ > 0 (c = {c}, c₀ = {c0}, K = {k}, σ₀ = {sigma0})")));
    }
    if !(m0 >= 0.0 && n0 >= 0.0 && horizon >= 0.0) {
        return Err(DkgError::Domain("data norms and horizon must be ≥ 0".into()));
    }
    let ok = |r0: f64| sigma0.powf(e.q) * r0.powf(1.5 - e.p) >= 1.0 && c * c0.sqrt() * k <= r0 && 11f64.powf(1.5) * c * c0.powf(e.p) <= r0;
    let mut r0 = 1.0f64;
    while !ok(r0) {
        r0 *= 2.0;
        if !r0.is_finite() {
            return Err(DkgError::Numerical { t: 0.0, message: "R₀ search overflowed".into() });
        }
    }
    let r = r0.max(m0 + n0 * n0);
    let delta = c0 / (12.0 * r);
    let twelfth = c0 / 12.0;
    let mu = (11f64.powf(1.5) * c * twelfth.powf(e.p - 1.0)).max(c * twelfth.powf(-0.5) * k);
    let t0 = 1.0 / (2.0 * mu);
    // A = r ln 11 / T₀ makes the curve pass through every knot
    let a_rate = e.r * 11f64.ln() / t0;
    let mut knots = Vec::new();
    let mut n = 1u32;
    loop {
        let t_start = (n - 1) as f64 * t0;
        if t_start > horizon && n > 1 {
            break;
        }
        let ln_rn = (n - 1) as f64 * 11f64.ln() + r.ln();
        let ln_sigma = -e.r * ln_rn;
        let induction_ok = step1_conditions(c, c0, k, &e, ln_rn.exp());
        knots.push(Knot { n, t_start, t_end: n as f64 * t0, sigma: ln_sigma.exp(), ln_sigma, induction_ok });
        n += 1;
        if knots.len() > 100_000 {
            return Err(DkgError::Config(format!("horizon {horizon} needs more than 10⁵ blocks of length T₀ = {t0}")));
        }
    }
    let mut warnings = Vec::new();
    if e.p < DEGENERATE_P {
        warnings.push(format!("degenerate exponent p = {} (a = {a} is close to 1/4)", e.p));
    }
    Ok(Certificate { params, exponents: e, r0, r, delta, mu, t0, a_rate, knots, warnings })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub t: f64,
    pub sigma_hat: f64,
    pub sigma_lower: f64,
    pub margin: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    /// Samples without a usable estimate (saturated or refused).
    pub excluded: usize,
    pub min_margin: f64,
    pub pass: bool,
    /// Constants used, for the report header.
    pub c: f64,
    pub c0: f64,
}

pub fn compare_certificate(traj: &Trajectory, cert: &Certificate) -> Result<Comparison> {
    let mut rows = Vec::new();
    let mut excluded = 0;
    let t0 = traj.samples.first().ok_or_else(|| DkgError::Config("empty trajectory".into()))?.t;
    for s in &traj.samples {
        match &s.radius {
            Some(r) if !r.saturated => {
                let lower = cert.curve(s.t - t0);
                let margin = r.sigma_hat - lower;
                rows.push(ComparisonRow { t: s.t, sigma_hat: r.sigma_hat, sigma_lower: lower, margin, pass: margin >= 0.0 });
            }
            _ => excluded += 1,
        }
    }
    if rows.is_empty() {
        return Err(DkgError::Estimation(format!("no usable radius estimates ({excluded} excluded)")));
    }
    let min_margin = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    let pass = rows.iter().all(|r| r.pass);
    Ok(Comparison { rows, excluded, min_margin, pass, c: cert.params.c, c0: cert.params.c0 })
}

/// Quadratic fit to `ln σ̂(t)`; faster-than-exponential decay shows up as
/// significant negative curvature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusTrend {
    pub coeffs: [f64; 3],
    pub curvature_std_error: f64,
    pub rms: f64,
    pub samples: usize,
    /// `c₂ ≥ −2·SE(c₂)`, or a total bend `|c₂|·span²` below `TREND_ROUNDOFF`.
    pub convex_or_linear: bool,
}

/// Bend in `ln σ̂` too small to tell from round-off; a constant `σ̂`
/// otherwise fits with `c₂ ≈ −1e-12` and an even smaller standard error.
pub const TREND_ROUNDOFF: f64 = 1e-9;

pub fn radius_trend(traj: &Trajectory) -> Result<RadiusTrend> {
    let (ts, ys): (Vec<f64>, Vec<f64>) = traj
        .samples
        .iter()
        .filter_map(|s| s.radius.as_ref().filter(|r| !r.saturated && r.sigma_hat > 0.0).map(|r| (s.t, r.sigma_hat.ln())))
        .unzip();
    let fit = polynomial_fit(&ts, &ys, 2).ok_or_else(|| DkgError::Estimation(format!("{} radius samples cannot fix a quadratic", ts.len())))?;
    let se = fit.std_errors[2];
    let span = ts.last().copied().unwrap_or(0.0) - ts.first().copied().unwrap_or(0.0);
    let c2 = fit.coeffs[2];
    Ok(RadiusTrend {
        coeffs: [fit.coeffs[0], fit.coeffs[1], fit.coeffs[2]],
        curvature_std_error: se,
        rms: fit.rms,
        samples: ts.len(),
        convex_or_linear: c2 >= -2.0 * se || c2.abs() * span * span <= TREND_ROUNDOFF,
    })
}

/// Contraction threshold for `calibrate_c0`.
pub const CALIBRATION_CONTRACTION: f64 = 0.5;

/// Ratios `d_{n+1}/d_n` inspected per candidate.
pub const CALIBRATION_RATIOS: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub c0: f64,
    pub delta: f64,
    pub contraction: f64,
    /// The search hit `δ = PICARD_MAX_T` without losing contraction.
    pub capped: bool,
}

/// Largest `c₀` (bisection in `ln c₀`) for which the Picard iteration on
/// `[0, δ(c₀)]`, `δ = c₀/(1 + 𝔐_{σ₀}(0) + 𝔑_{σ₀}(0)²)`, contracts by
/// `CALIBRATION_CONTRACTION` over its first `CALIBRATION_RATIOS` ratios.
pub fn calibrate_c0(reference: &SplitState, mass: f64, sigma0: f64, steps: usize) -> Result<Calibration> {
    let dynamics = Dynamics::new(reference.grid(), mass, Nonlinearity::Full, true);
    let norm = 1.0 + m_sigma_of(reference, sigma0)? + n_sigma_of(reference, sigma0)?.powi(2);
    let contraction = |c0: f64| -> Result<f64> {
        let delta = c0 / norm;
        let r = picard_solve(&dynamics, reference, delta, Some(CALIBRATION_RATIOS + 1))?;
        Ok(r.contraction(CALIBRATION_RATIOS))
    };
    let cap = PICARD_MAX_T * norm;
    let top = contraction(cap)?;
    if top <= CALIBRATION_CONTRACTION {
        return Ok(Calibration { c0: cap, delta: PICARD_MAX_T, contraction: top, capped: true });
    }
    let (mut lo, mut hi) = (cap * 1e-6, cap);
    if contraction(lo)? > CALIBRATION_CONTRACTION {
        return Err(DkgError::Numerical { t: 0.0, message: "Picard iteration does not contract even for tiny δ".into() });
    }
    for _ in 0..steps {
        let mid = (lo * hi).sqrt();
        if contraction(mid)? <= CALIBRATION_CONTRACTION {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Calibration { c0: lo, delta: lo / norm, contraction: contraction(lo)?, capped: false })
}

/// `σ₀` and data of the calibration reference: 16², `exp_decay` with
/// `σ* = 0.3`, `ρ = 0`, unit amplitude, seed 1, `M = 1`.
pub const CALIBRATION_SIGMA0: f64 = 0.15;

pub fn calibration_reference() -> Result<SplitState> {
    let data = InitialData {
        datum: Datum::ExpDecay { sigma_star: 0.3, rho: 0.0, seed: 1 },
        amplitude: 1.0,
        phi_scale: 1.0,
        dphi_scale: 1.0,
    };
    initial_state(FourierGrid::new(16)?, &data)
}

/// `calibrate_c0` on `calibration_reference`, 20 bisection steps, rounded down.
pub const CALIBRATED_C0: f64 = 6.16;
