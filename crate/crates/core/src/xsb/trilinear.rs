use rand::Rng;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::angle::{sample_angle_triples, AngleTriple};
use super::bilinear::{RatioStats, BAND_VALUES};
use super::norms::{xsb_norm, xsb_norm_multi, Dispersion, XsbParams};
use super::random::{band_support, check_resolvable, random_band_field, random_band_spinor, trial_rng, DyadicBand};
use super::spacetime::{LabGrid, SpaceTimeField, SpaceTimeSpectrum, SpinorSpaceTime};
use crate::dirac::{apply_projection, Mat2, Sign, SpinorField};
use crate::error::{DkgError, Result};
use crate::gevrey::GevreyWeight;
use crate::spectral::{check_weight_exponent, Dyadic, Mode, SpectralField, Transform};

/// Exponents `a, b₀, b₁, b₂` of the trilinear estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrilinearExponents {
    pub a: f64,
    pub b: [f64; 3],
}

impl TrilinearExponents {
    pub fn new(a: f64, b: [f64; 3]) -> Self {
        TrilinearExponents { a, b }
    }

    /// `a ∈ (1/4, 3/4]`, `b_i ≥ max(1/4, 3/4 − a)`, `Σb ≥ 3/2 − a`.
    pub fn check(&self) -> Result<()> {
        let TrilinearExponents { a, b } = *self;
        if !(a > 0.25 && a <= 0.75) {
            return Err(DkgError::Precondition(format!("a = {a} outside (1/4, 3/4]")));
        }
        let floor = 0.25f64.max(0.75 - a);
        for (i, bi) in b.iter().enumerate() {
            if !(*bi >= floor - 1e-15) {
                return Err(DkgError::Precondition(format!("b{i} = {bi} below max(1/4, 3/4 − a) = {floor}")));
            }
        }
        let sum: f64 = b.iter().sum();
        if !(sum >= 1.5 - a - 1e-15) {
            return Err(DkgError::Precondition(format!("b0 + b1 + b2 = {sum} below 3/2 − a = {}", 1.5 - a)));
        }
        Ok(())
    }
}

fn weighted(f: &SpectralField, sigma: f64) -> Result<SpectralField> {
    if sigma == 0.0 {
        return Ok(f.clone());
    }
    check_weight_exponent(sigma, f.grid())?;
    let w = GevreyWeight::new(sigma, 0.0)?;
    Ok(f.map(|m, c| c * w.eval(m)))
}

pub(crate) fn weighted_spinor(psi: &SpinorField, sigma: f64) -> Result<SpinorField> {
    Ok(SpinorField { c1: weighted(&psi.c1, sigma)?, c2: weighted(&psi.c2, sigma)? })
}

/// `∫ Φ ⟨A, B⟩ dx` with `⟨A, B⟩ = A₁B̄₁ + A₂B̄₂`.
pub(crate) fn spatial_form(transform: &Transform, phi: &SpectralField, a: &SpinorField, b: &SpinorField) -> Complex64 {
    transform.dealiased_product(phi, &a.c1).inner(&b.c1) + transform.dealiased_product(phi, &a.c2).inner(&b.c2)
}

/// `∫ (e^{σ‖D‖}φ) ⟨βΠ_{s₁}ψ₁, Π_{s₂}ψ₂⟩ dt dx` over the tapered records.
pub fn trilinear_form(phi: &SpaceTimeField, psi1: &SpinorSpaceTime, psi2: &SpinorSpaceTime, signs: [Sign; 2], sigma: f64) -> Result<Complex64> {
    let n_t = phi.n_t();
    if psi1.n_t() != n_t || psi2.n_t() != n_t || psi1.c1.dt != phi.dt || psi2.c1.dt != phi.dt {
        return Err(DkgError::Config("trilinear inputs sampled differently".into()));
    }
    phi.samples[0].ensure_same_grid(&psi1.c1.samples[0])?;
    phi.samples[0].ensure_same_grid(&psi2.c1.samples[0])?;
    let transform = Transform::new(phi.grid());
    let phis = phi.tapered_samples();
    let beta = Mat2::beta();
    let mut total = Complex64::new(0.0, 0.0);
    for (j, p) in phis.iter().enumerate() {
        let big_phi = weighted(p, sigma)?;
        let a = apply_projection(&psi1.tapered_sample(j), signs[0]).apply_matrix(beta);
        let b = apply_projection(&psi2.tapered_sample(j), signs[1]);
        total += spatial_form(&transform, &big_phi, &a, &b);
    }
    Ok(total * phi.dt)
}

fn spinor_record(psi: &[SpaceTimeSpectrum; 2]) -> SpinorSpaceTime {
    SpinorSpaceTime { c1: psi[0].inverse(), c2: psi[1].inverse() }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrilinearParams {
    pub exponents: TrilinearExponents,
    pub signs: [Sign; 3],
    pub sigma: f64,
}

/// Bands for the three slots of one trial.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrilinearDraw {
    pub bands: [DyadicBand; 3],
}

/// Every `(𝐍, 𝐋)` over `BAND_VALUES` whose spatial bands admit a lattice
/// triple `ξ₂ = ξ₀ + ξ₁`, in lexicographic order.
pub fn band_schedule() -> Vec<TrilinearDraw> {
    let d = |v: u64| Dyadic::new(v).expect("dyadic table");
    let k = *BAND_VALUES.last().expect("nonempty") as i64;
    let modes: Vec<Mode> = (-k..=k).flat_map(|a| (-k..=k).map(move |b| Mode::new(a, b))).collect();
    let in_band = |n: u64, m: Mode| d(n).contains_sq(m.abs_sq());
    let mut out = Vec::new();
    for &n0 in &BAND_VALUES {
        for &n1 in &BAND_VALUES {
            for &n2 in &BAND_VALUES {
                let interacts = modes.iter().filter(|m| in_band(n1, **m)).any(|&x1| modes.iter().any(|&x2| in_band(n2, x2) && in_band(n0, x2 - x1)));
                if !interacts {
                    continue;
                }
                for &l0 in &BAND_VALUES {
                    for &l1 in &BAND_VALUES {
                        for &l2 in &BAND_VALUES {
                            let b = |n, l| DyadicBand { n: d(n), l: d(l) };
                            out.push(TrilinearDraw { bands: [b(n0, l0), b(n1, l1), b(n2, l2)] });
                        }
                    }
                }
            }
        }
    }
    out
}

/// Trial `t` of `trials` takes the evenly spaced schedule entry `⌊t·C/trials⌋`,
/// so changing the seed redraws coefficients but not bands.
pub fn scheduled_draw(schedule: &[TrilinearDraw], t: usize, trials: usize) -> TrilinearDraw {
    schedule[(t * schedule.len() / trials.max(1)) % schedule.len()]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrilinearReport {
    pub stats: RatioStats<TrilinearParams>,
    /// Interacting triples whose angle exceeded the frozen bound.
    pub angle_violations: Vec<AngleTriple>,
    pub angle_checked: usize,
}

/// Triples sampled per trial for the angle bound.
pub const ANGLE_SAMPLES_PER_TRIAL: usize = 16;

/// `|form| / (‖φ‖_{X^{0,a,b₀;1}_{s₀}} ‖ψ₁‖_{X^{σ,0,b₁;1}_{s₁}} ‖ψ₂‖_{X^{σ,0,b₂;1}_{s₂}})`
/// over random band draws with `ψ_i` in the range of `Π_{s_i}`.
pub fn empirical_trilinear_ratio(
    lab: &LabGrid,
    exponents: TrilinearExponents,
    signs: [Sign; 3],
    sigma: f64,
    trials: usize,
    seed: u64,
) -> Result<TrilinearReport> {
    exponents.check()?;
    check_weight_exponent(sigma, lab.grid)?;
    let params = TrilinearParams { exponents, signs, sigma };
    let schedule = band_schedule();
    let results: Vec<Result<TrialOutcome>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            trilinear_trial(lab, &params, scheduled_draw(&schedule, t, trials), &mut rng)
        })
        .collect();
    let mut ratios = Vec::with_capacity(trials);
    let mut angle_violations = Vec::new();
    let mut angle_checked = 0;
    for r in results {
        let o = r?;
        ratios.push(o.ratio);
        angle_checked += o.angles_checked;
        angle_violations.extend(o.violations);
    }
    Ok(TrilinearReport { stats: RatioStats::from_ratios(params, &ratios, seed)?, angle_violations, angle_checked })
}

struct TrialOutcome {
    ratio: f64,
    angles_checked: usize,
    violations: Vec<AngleTriple>,
}

fn trilinear_trial(lab: &LabGrid, params: &TrilinearParams, draw: TrilinearDraw, rng: &mut impl Rng) -> Result<TrialOutcome> {
    let [s0, s1, s2] = params.signs;
    let hs = [Dispersion::wave(s0), Dispersion::wave(s1), Dispersion::wave(s2)];
    let supports: Vec<_> = (0..3).map(|i| band_support(lab, draw.bands[i], hs[i])).collect();
    check_resolvable(lab, &supports, lab.n_t as f64 * lab.dtau(), lab.grid.n() as i64)?;
    let phi = random_band_field(lab, draw.bands[0], hs[0], rng);
    let psi1 = random_band_spinor(lab, draw.bands[1], s1, rng);
    let psi2 = random_band_spinor(lab, draw.bands[2], s2, rng);
    let triples = sample_angle_triples(lab, draw.bands, params.signs, ANGLE_SAMPLES_PER_TRIAL, rng);
    let angles_checked = triples.len();
    let violations = triples.into_iter().filter(|t| !t.within_bound()).collect();
    let form = trilinear_form(&phi.inverse(), &spinor_record(&psi1), &spinor_record(&psi2), [s1, s2], params.sigma)?;
    let e = params.exponents;
    let d0 = xsb_norm(&phi, XsbParams::new(0.0, e.a, e.b[0], 1.0, hs[0]))?;
    let d1 = xsb_norm_multi(&[&psi1[0], &psi1[1]], XsbParams::new(params.sigma, 0.0, e.b[1], 1.0, hs[1]))?;
    let d2 = xsb_norm_multi(&[&psi2[0], &psi2[1]], XsbParams::new(params.sigma, 0.0, e.b[2], 1.0, hs[2]))?;
    let denom = d0 * d1 * d2;
    let ratio = if denom > 0.0 { form.norm() / denom } else { 0.0 };
    Ok(TrialOutcome { ratio, angles_checked, violations })
}

/// All eight sign triples in a fixed order.
pub fn all_sign_triples() -> Vec<[Sign; 3]> {
    let mut v = Vec::with_capacity(8);
    for s0 in Sign::BOTH {
        for s1 in Sign::BOTH {
            for s2 in Sign::BOTH {
                v.push([s0, s1, s2]);
            }
        }
    }
    v
}

pub const TRILINEAR_TRIALS: usize = 100;

pub const TRILINEAR_REFERENCE_SEED: u64 = 20_140_902;

/// Max ratio over all sign triples and `σ ∈ {0, 0.1}` at `a = 1/2`, `b = (1/3,1/3,1/3)`,
/// `TRILINEAR_TRIALS` trials each, `TRILINEAR_REFERENCE_SEED`, standard lab grid.
pub const TRILINEAR_BASELINE: f64 = 6.35e-2;

pub const TRILINEAR_SIGMAS: [f64; 2] = [0.0, 0.1];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrilinearSweep {
    pub reports: Vec<TrilinearReport>,
    pub max_ratio: f64,
    pub angle_violations: usize,
    pub angle_checked: usize,
}

/// `empirical_trilinear_ratio` for every sign triple at every `σ`.
pub fn trilinear_sweep(lab: &LabGrid, exponents: TrilinearExponents, sigmas: &[f64], trials: usize, seed: u64) -> Result<TrilinearSweep> {
    let mut reports = Vec::with_capacity(8 * sigmas.len());
    for &sigma in sigmas {
        for signs in all_sign_triples() {
            reports.push(empirical_trilinear_ratio(lab, exponents, signs, sigma, trials, seed)?);
        }
    }
    let max_ratio = reports.iter().map(|r| r.stats.max_ratio).fold(0.0, f64::max);
    let angle_violations = reports.iter().map(|r| r.angle_violations.len()).sum();
    let angle_checked = reports.iter().map(|r| r.angle_checked).sum();
    Ok(TrilinearSweep { reports, max_ratio, angle_violations, angle_checked })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac::projection_for_mode;
    use std::f64::consts::PI;

    fn dense_oracle(phi: &SpaceTimeSpectrum, a: &[SpaceTimeSpectrum; 2], b: &[SpaceTimeSpectrum; 2]) -> Complex64 {
        let grid = phi.grid;
        let len = grid.len();
        let n_t = phi.n_t;
        let mut s = Complex64::new(0.0, 0.0);
        for k0 in 0..n_t {
            for k1 in 0..n_t {
                let k2 = (k0 + k1) % n_t;
                for i0 in 0..len {
                    let f = phi.coeffs[k0 * len + i0];
                    if f == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for i1 in 0..len {
                        let i2 = grid.wrapped_index(grid.mode(i0) + grid.mode(i1));
                        for c in 0..2 {
                            s += f * a[c].coeffs[k1 * len + i1] * b[c].coeffs[k2 * len + i2].conj();
                        }
                    }
                }
            }
        }
        s * phi.dtau().powi(2) / (2.0 * PI).powi(6)
    }

    #[test]
    fn hypotheses() {
        assert!(TrilinearExponents::new(0.5, [1.0 / 3.0; 3]).check().is_ok());
        assert!(matches!(TrilinearExponents::new(0.5, [0.2, 1.0 / 3.0, 1.0 / 3.0]).check(), Err(DkgError::Precondition(_))));
        assert!(TrilinearExponents::new(0.25, [0.5; 3]).check().is_err());
        assert!(TrilinearExponents::new(0.3, [0.45, 0.45, 0.2]).check().is_err());
        assert!(TrilinearExponents::new(0.3, [0.45, 0.45, 0.45]).check().is_ok());
        assert!(TrilinearExponents::new(0.7, [0.25; 3]).check().is_err());
        assert!(TrilinearExponents::new(0.75, [0.25; 3]).check().is_ok());
    }

    #[test]
    fn plancherel_oracle_agrees() {
        let lab = LabGrid::new(8, 16).unwrap();
        let mut rng = trial_rng(42, 0);
        for (signs, sigma) in [([Sign::Plus, Sign::Minus, Sign::Plus], 0.0), ([Sign::Minus, Sign::Plus, Sign::Plus], 0.3)] {
            let bands = [DyadicBand::new(2, 2).unwrap(), DyadicBand::new(2, 1).unwrap(), DyadicBand::new(4, 2).unwrap()];
            let phi = random_band_field(&lab, bands[0], Dispersion::wave(signs[0]), &mut rng);
            let psi1 = random_band_spinor(&lab, bands[1], signs[1], &mut rng);
            let psi2 = random_band_spinor(&lab, bands[2], signs[2], &mut rng);
            let form = trilinear_form(&phi.inverse(), &spinor_record(&psi1), &spinor_record(&psi2), [signs[1], signs[2]], sigma).unwrap();
            let w = GevreyWeight::new(sigma, 0.0).unwrap();
            let big_phi = phi.mask(|_, m| w.eval(m));
            let beta = Mat2::beta();
            let mut a = psi1.clone();
            let len = lab.grid.len();
            for (i, _) in lab.grid.modes() {
                for k in 0..lab.n_t {
                    let v = beta.apply([psi1[0].coeffs[k * len + i], psi1[1].coeffs[k * len + i]]);
                    a[0].coeffs[k * len + i] = v[0];
                    a[1].coeffs[k * len + i] = v[1];
                }
            }
            let oracle = dense_oracle(&big_phi, &a, &psi2);
            assert!((form - oracle).norm() <= 1e-12 * oracle.norm().max(1e-300), "{form} vs {oracle}");
            assert!(oracle.norm() > 0.0);
        }
    }

    #[test]
    fn single_triple_closed_form() {
        let lab = LabGrid::new(8, 16).unwrap();
        let (x0, x1) = (Mode::new(1, 0), Mode::new(1, 2));
        let x2 = x0 + x1;
        let (k0, k1) = (2usize, 3usize);
        let (s1, s2) = (Sign::Plus, Sign::Minus);
        let mut phi = lab.zeros();
        let a0 = Complex64::new(0.7, -0.2);
        phi.set(k0, lab.grid.index(x0).unwrap(), a0);
        let v1 = [Complex64::new(1.0, 0.5), Complex64::new(-0.3, 0.2)];
        let v2 = [Complex64::new(0.1, -1.0), Complex64::new(0.4, 0.9)];
        let mut p1 = [lab.zeros(), lab.zeros()];
        let mut p2 = [lab.zeros(), lab.zeros()];
        for c in 0..2 {
            p1[c].set(k1, lab.grid.index(x1).unwrap(), v1[c]);
            p2[c].set(k0 + k1, lab.grid.index(x2).unwrap(), v2[c]);
        }
        let sigma = 0.2;
        let form = trilinear_form(&phi.inverse(), &spinor_record(&p1), &spinor_record(&p2), [s1, s2], sigma).unwrap();
        let left = (Mat2::beta() * projection_for_mode(x1, s1)).apply(v1);
        let right = projection_for_mode(x2, s2).apply(v2);
        let inner = left[0] * right[0].conj() + left[1] * right[1].conj();
        let expected = a0 * inner * (sigma * 1.0f64).exp() * lab.dtau().powi(2) / (2.0 * PI).powi(6);
        assert!((form - expected).norm() <= 1e-13 * expected.norm());
    }

    #[test]
    fn zero_and_translation() {
        let lab = LabGrid::new(8, 16).unwrap();
        let mut rng = trial_rng(8, 0);
        let bands = [DyadicBand::new(2, 2).unwrap(), DyadicBand::new(2, 2).unwrap(), DyadicBand::new(2, 4).unwrap()];
        let phi = random_band_field(&lab, bands[0], Dispersion::PlusAbs, &mut rng);
        let psi1 = random_band_spinor(&lab, bands[1], Sign::Plus, &mut rng);
        let psi2 = random_band_spinor(&lab, bands[2], Sign::Minus, &mut rng);
        let signs = [Sign::Plus, Sign::Minus];
        let zero = [lab.zeros(), lab.zeros()];
        assert_eq!(trilinear_form(&phi.inverse(), &spinor_record(&psi1), &spinor_record(&zero), signs, 0.1).unwrap(), Complex64::new(0.0, 0.0));
        let x = [0.37, -1.2];
        let translate = |f: &SpaceTimeSpectrum| {
            let mut g = f.clone();
            let len = lab.grid.len();
            for (i, m) in lab.grid.modes() {
                let ph = Complex64::from_polar(1.0, -(m.k1 as f64 * x[0] + m.k2 as f64 * x[1]));
                for k in 0..lab.n_t {
                    g.coeffs[k * len + i] *= ph;
                }
            }
            g
        };
        let base = trilinear_form(&phi.inverse(), &spinor_record(&psi1), &spinor_record(&psi2), signs, 0.1).unwrap();
        let moved = trilinear_form(
            &translate(&phi).inverse(),
            &spinor_record(&[translate(&psi1[0]), translate(&psi1[1])]),
            &spinor_record(&[translate(&psi2[0]), translate(&psi2[1])]),
            signs,
            0.1,
        )
        .unwrap();
        assert!((base.norm() - moved.norm()).abs() <= 1e-12 * base.norm());
    }

    #[test]
    fn small_sweep_is_finite_and_reproducible() {
        let lab = LabGrid::new(16, 32).unwrap();
        // supports sized for the smaller lattice
        let e = TrilinearExponents::new(0.5, [1.0 / 3.0; 3]);
        let signs = [Sign::Plus, Sign::Minus, Sign::Plus];
        let run = |seed| {
            let p = TrilinearParams { exponents: e, signs, sigma: 0.1 };
            let bands = [DyadicBand::new(4, 2).unwrap(), DyadicBand::new(4, 4).unwrap(), DyadicBand::new(4, 2).unwrap()];
            (0..6u64).map(|t| trilinear_trial(&lab, &p, TrilinearDraw { bands }, &mut trial_rng(seed, t)).unwrap().ratio).collect::<Vec<_>>()
        };
        let a = run(1);
        assert_eq!(a, run(1));
        assert!(a.iter().all(|r| r.is_finite() && *r > 0.0));
    }

    #[test]
    fn schedule_covers_interacting_bands() {
        let s = band_schedule();
        assert_eq!(s.len() % 64, 0);
        let has = |n: [u64; 3]| s.iter().any(|d| d.bands.map(|b| b.n.value()) == n);
        assert!(has([1, 4, 4]) && has([8, 1, 8]) && has([2, 8, 8]));
        assert!(!has([1, 2, 4]) && !has([8, 1, 1]));
        let picks: Vec<_> = (0..100).map(|t| scheduled_draw(&s, t, 100)).collect();
        assert_eq!(picks[0], s[0]);
        assert!(picks.windows(2).all(|w| w[0] != w[1]));
    }

    #[test]
    fn inadmissible_exponents_are_refused() {
        let lab = LabGrid::new(8, 16).unwrap();
        let r = empirical_trilinear_ratio(&lab, TrilinearExponents::new(0.5, [0.2, 0.4, 0.4]), [Sign::Plus; 3], 0.0, 2, 0);
        assert!(matches!(r, Err(DkgError::Precondition(_))));
    }
}
