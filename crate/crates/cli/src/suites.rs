//! Verification suites behind `dkg verify`.

use dkg_core::dirac::{
    beta_commutation_residual, half_wave_identity_residual, null_form_norm, null_form_sweep, projection_for_mode, Mat2, Sign,
    NULL_FORM_CONSTANT,
};
use dkg_core::solver::{evolve, initial_state, ObservableSpec, SolverConfig, Trajectory};
use dkg_core::spectral::{FourierGrid, Mode};
use dkg_core::tracker::{local_delta, m_sigma_of, n_sigma_of, verify_approx_conservation, ApproxReport, CALIBRATED_C0};
use dkg_core::xsb::{
    bilinear_matrix, commutator_ratio, trilinear_sweep, BilinearCell, CommutatorReport, LabGrid, TrilinearExponents, TrilinearSweep,
    BILINEAR_TRIALS, COMMUTATOR_SIGMAS, COMMUTATOR_TRIALS, TRILINEAR_BASELINE, TRILINEAR_SIGMAS, TRILINEAR_TRIALS,
};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Charge,
    Approx,
    Bilinear,
    Trilinear,
    Commutator,
    Identities,
}

/// One assertion: `value` compared against `limit` in the direction `relation`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: String,
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Check {
        Check { name: name.into(), value, relation: "<=".into(), limit, pass: value <= limit }
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Check {
        Check { name: name.into(), value, relation: ">=".into(), limit, pass: value >= limit }
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Check {
        Check { name: name.into(), value: ok as u8 as f64, relation: "==".into(), limit: 1.0, pass: ok }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub details: serde_json::Value,
}

impl SuiteReport {
    fn new(suite: Suite, checks: Vec<Check>, details: impl Serialize) -> SuiteReport {
        SuiteReport {
            suite,
            pass: checks.iter().all(|c| c.pass),
            checks,
            details: serde_json::to_value(details).unwrap_or(serde_json::Value::Null),
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

pub fn run_suite(cfg: &RunConfig, suite: Suite) -> Result<SuiteReport, CliError> {
    match suite {
        Suite::Identities => {
            let mut r = identities(cfg.grid()?);
            r.checks.extend(null_structure(1000).checks);
            r.pass = r.checks.iter().all(|c| c.pass);
            Ok(r)
        }
        Suite::Charge => charge(cfg),
        Suite::Approx => approx(cfg),
        Suite::Bilinear => bilinear(cfg.verify.lab.bilinear_seed),
        Suite::Trilinear => trilinear(cfg.verify.lab.trilinear_seed, cfg.verify.lab.trilinear_alt_seed),
        Suite::Commutator => commutator(cfg.verify.lab.commutator_seed),
    }
}

pub const IDENTITY_TOLERANCE: f64 = 1e-14;

fn close_to(a: Mat2, b: Mat2) -> f64 {
    (a - b).frobenius()
}

/// Projection identities at every lattice mode `ξ ≠ 0`.
pub fn identities(grid: FourierGrid) -> SuiteReport {
    let zero = Mat2::IDENTITY - Mat2::IDENTITY;
    let mut worst = [0.0f64; 5];
    for (_, m) in grid.modes().filter(|(_, m)| *m != Mode::ZERO) {
        let p = projection_for_mode(m, Sign::Plus);
        let q = projection_for_mode(m, Sign::Minus);
        let r = [
            close_to(p * p, p).max(close_to(q * q, q)),
            close_to(p + q, Mat2::IDENTITY),
            close_to(p * q, zero).max(close_to(q * p, zero)),
            beta_commutation_residual(m.as_vec()),
            half_wave_identity_residual(m.as_vec()) / m.abs().max(1.0),
        ];
        for (w, v) in worst.iter_mut().zip(r) {
            *w = w.max(v);
        }
    }
    let names = ["idempotence", "completeness", "orthogonality", "beta_sign_reversal", "half_wave_split_relative"];
    let checks = names.iter().zip(worst).map(|(n, v)| Check::at_most(*n, v, IDENTITY_TOLERANCE)).collect();
    SuiteReport::new(Suite::Identities, checks, serde_json::json!({ "grid_n": grid.n(), "modes": grid.len() - 1 }))
}

/// Norm of `Π(−s₂η)Π(s₁ξ)` at zero signed angle, and the ratio to the angle over a sweep.
pub fn null_structure(count: usize) -> SuiteReport {
    let mut checks = Vec::new();
    let mut maxima = Vec::new();
    for s1 in Sign::BOTH {
        for s2 in Sign::BOTH {
            let tag = format!("{}{}", s1.value() as i8, s2.value() as i8);
            let s = s1.value() * s2.value();
            // zero signed angle: s₂η = s₁ξ
            let mut at_zero = 0.0f64;
            for xi in [[1.0, 0.0], [0.0, 1.0], [3.0, 4.0], [-5.0, 2.0], [7.0, -7.0]] {
                let eta = [s * xi[0], s * xi[1]];
                let nf = null_form_norm(xi, eta, s1, s2).expect("nonzero input");
                at_zero = at_zero.max(nf.norm);
            }
            checks.push(Check::at_most(format!("zero_angle_norm[{tag}]"), at_zero, 1e-15));
            let sweep = null_form_sweep(count, s1, s2);
            let ratio = sweep.iter().map(|p| p.norm / p.angle).fold(0.0, f64::max);
            let monotone = sweep.windows(2).all(|w| w[1].norm >= w[0].norm);
            checks.push(Check::at_most(format!("norm_over_angle[{tag}]"), ratio, NULL_FORM_CONSTANT * (1.0 + 1e-12)));
            checks.push(Check::holds(format!("decays_toward_zero_angle[{tag}]"), monotone));
            maxima.push(ratio);
        }
    }
    SuiteReport::new(Suite::Identities, checks, serde_json::json!({ "sweep_points": count, "max_ratio": maxima, "constant": NULL_FORM_CONSTANT }))
}

fn trajectory(cfg: &RunConfig, solver: &SolverConfig, sigmas: Vec<f64>) -> Result<Trajectory, CliError> {
    let u0 = initial_state(cfg.grid()?, &cfg.initial_data()?)?;
    Ok(evolve(&u0, solver, &ObservableSpec { sigmas, window: None, keep_states: false })?)
}

#[derive(Serialize)]
struct ChargeDetails {
    drift: f64,
    drift_half_dt: f64,
    reduction: f64,
    max_range_residual: f64,
    max_phi_symmetry: f64,
}

/// Charge drift at `dt` and `dt/2`, plus the projection-range and reality monitors.
pub fn charge(cfg: &RunConfig) -> Result<SuiteReport, CliError> {
    let coarse = trajectory(cfg, &cfg.solver, vec![])?;
    let mut fine_cfg = cfg.solver.clone();
    fine_cfg.dt /= 2.0;
    fine_cfg.record_every *= 2;
    let fine = trajectory(cfg, &fine_cfg, vec![])?;
    let drift = coarse.relative_charge_drift();
    let drift_half_dt = fine.relative_charge_drift();
    let reduction = drift / drift_half_dt;
    let max_range_residual = coarse.samples.iter().map(|s| s.range_residual).fold(0.0, f64::max);
    let max_phi_symmetry = coarse.samples.iter().map(|s| s.phi_symmetry).fold(0.0, f64::max);
    let checks = vec![
        Check::at_most("relative_drift", drift, cfg.verify.charge_tolerance),
        Check::at_least("drift_reduction_at_half_dt", reduction, 8.0),
        Check::at_most("projection_range_residual", max_range_residual, 1e-8),
        Check::at_most("phi_conjugate_symmetry", max_phi_symmetry, 1e-10),
    ];
    Ok(SuiteReport::new(Suite::Charge, checks, ChargeDetails { drift, drift_half_dt, reduction, max_range_residual, max_phi_symmetry }))
}

/// `c_eff` spread allowed across the `σ` list.
pub const C_EFF_VARIATION: f64 = 10.0;

#[derive(Serialize)]
struct ApproxDetails {
    report: ApproxReport,
    relative_growth_at_zero: f64,
    t_end: f64,
}

/// Growth of `𝔐_σ` over `[0, δ]`, `δ = local_delta` at the largest `σ`, recorded every step.
pub fn approx(cfg: &RunConfig) -> Result<SuiteReport, CliError> {
    let c0 = cfg.tracker.c0.unwrap_or(CALIBRATED_C0);
    let mut sigmas = cfg.verify.approx_sigmas.clone();
    if sigmas.is_empty() || sigmas.iter().any(|s| !(*s > 0.0)) {
        return Err(CliError::Config("verify.approx_sigmas: need positive values".into()));
    }
    sigmas.insert(0, 0.0);
    let u0 = initial_state(cfg.grid()?, &cfg.initial_data()?)?;
    let top = sigmas.iter().copied().fold(0.0, f64::max);
    let delta = local_delta(m_sigma_of(&u0, top)?, n_sigma_of(&u0, top)?, c0);
    let mut solver = cfg.solver.clone();
    solver.record_every = 1;
    solver.t_end = (delta / solver.dt).ceil() * solver.dt;
    let traj = evolve(&u0, &solver, &ObservableSpec { sigmas: sigmas.clone(), window: None, keep_states: false })?;
    let report = verify_approx_conservation(&traj, &sigmas, cfg.tracker.a, c0)?;
    let mut checks = Vec::new();
    let positive: Vec<_> = report.points.iter().filter(|p| p.sigma > 0.0).collect();
    for p in &positive {
        checks.push(Check::holds(format!("growth_positive_finite[{}]", p.sigma), p.growth > 0.0 && p.growth.is_finite()));
    }
    let mut by_sigma = positive.clone();
    by_sigma.sort_by(|a, b| a.sigma.total_cmp(&b.sigma));
    checks.push(Check::holds("growth_decreases_with_sigma", by_sigma.windows(2).all(|w| w[0].growth < w[1].growth)));
    let zero = report.point(0.0).map(|p| p.growth).unwrap_or(f64::NAN);
    let relative_growth_at_zero = zero.abs() / traj.samples[0].charge;
    checks.push(Check::at_most("relative_growth_at_zero", relative_growth_at_zero, cfg.verify.charge_tolerance));
    checks.push(Check::at_most("c_eff_variation", report.c_eff_variation, C_EFF_VARIATION));
    if let Some(base) = &cfg.verify.c_eff_baseline {
        for (s, b) in cfg.verify.approx_sigmas.iter().zip(base) {
            let got = report.point(*s).and_then(|p| p.c_eff).unwrap_or(f64::NAN);
            checks.push(Check::at_most(format!("c_eff_regression[{s}]"), (got / b - 1.0).abs(), cfg.verify.c_eff_tolerance));
        }
    }
    Ok(SuiteReport::new(Suite::Approx, checks, ApproxDetails { report, relative_growth_at_zero, t_end: solver.t_end }))
}

/// Tolerance factor on the frozen bilinear baseline.
pub const BILINEAR_SLACK: f64 = 1.1;

pub fn bilinear(seed: u64) -> Result<SuiteReport, CliError> {
    let cells: Vec<BilinearCell> = bilinear_matrix(&LabGrid::standard(), BILINEAR_TRIALS, seed, BILINEAR_SLACK)?;
    let checks = cells
        .iter()
        .map(|c| {
            let p = &c.stats.params;
            let name = format!("ratio[{}{}; N={} L={}]", p.signs[1].value() as i8, p.signs[2].value() as i8, p.bands[0].n.value(), p.bands[0].l.value());
            Check { name, value: c.stats.max_ratio, relation: "<=".into(), limit: c.baseline * BILINEAR_SLACK, pass: c.pass }
        })
        .collect();
    Ok(SuiteReport::new(Suite::Bilinear, checks, cells))
}

/// Allowed factor between a seed's max ratio and the baseline or another seed.
pub const TRILINEAR_STABILITY: f64 = 2.0;

pub fn trilinear_exponents() -> TrilinearExponents {
    TrilinearExponents::new(0.5, [1.0 / 3.0; 3])
}

pub fn trilinear(seed: u64, alt_seed: u64) -> Result<SuiteReport, CliError> {
    let lab = LabGrid::standard();
    let sweeps: Vec<TrilinearSweep> = [seed, alt_seed]
        .iter()
        .map(|&s| trilinear_sweep(&lab, trilinear_exponents(), &TRILINEAR_SIGMAS, TRILINEAR_TRIALS, s))
        .collect::<dkg_core::Result<_>>()?;
    let mut checks = Vec::new();
    for (s, sw) in [seed, alt_seed].iter().zip(&sweeps) {
        checks.push(Check::holds(format!("finite[seed {s}]"), sw.max_ratio.is_finite() && sw.max_ratio > 0.0));
        let factor = (sw.max_ratio / TRILINEAR_BASELINE).max(TRILINEAR_BASELINE / sw.max_ratio);
        checks.push(Check::at_most(format!("factor_to_baseline[seed {s}]"), factor, TRILINEAR_STABILITY));
        checks.push(Check::at_most(format!("angle_violations[seed {s}]"), sw.angle_violations as f64, 0.0));
    }
    let (a, b) = (sweeps[0].max_ratio, sweeps[1].max_ratio);
    checks.push(Check::at_most("factor_between_seeds", (a / b).max(b / a), TRILINEAR_STABILITY));
    Ok(SuiteReport::new(Suite::Trilinear, checks, sweeps))
}

pub const COMMUTATOR_MIN_SLOPE: f64 = 0.9;

pub fn commutator(seed: u64) -> Result<SuiteReport, CliError> {
    let report: CommutatorReport = commutator_ratio(&LabGrid::standard(), trilinear_exponents(), &COMMUTATOR_SIGMAS, 1.0, COMMUTATOR_TRIALS, seed)?;
    let mut checks = vec![Check::at_least("log_log_slope", report.slope, COMMUTATOR_MIN_SLOPE)];
    for p in &report.points {
        checks.push(Check::holds(format!("ratio_finite[{}]", p.sigma), p.stats.max_ratio.is_finite()));
    }
    Ok(SuiteReport::new(Suite::Commutator, checks, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identities_pass_on_a_small_grid() {
        let r = identities(FourierGrid::new(16).unwrap());
        assert!(r.pass, "{:?}", r.checks);
    }

    #[test]
    fn null_structure_passes() {
        let r = null_structure(200);
        assert!(r.pass, "{:?}", r.failures().collect::<Vec<_>>());
    }

    #[test]
    fn checks_compare_in_the_stated_direction() {
        assert!(Check::at_most("x", 1.0, 1.0).pass);
        assert!(!Check::at_most("x", f64::NAN, 1.0).pass);
        assert!(!Check::at_least("x", 0.5, 1.0).pass);
    }
}
