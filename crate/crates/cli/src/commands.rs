//! `simulate`, `verify` and `certificate`.

use std::path::Path;

use dkg_core::gevrey::estimate_radius_state;
use dkg_core::solver::{charge, evolve_with, initial_state, ObservableSpec, SplitState, Trajectory};
use dkg_core::tracker::{
    certificate_schedule, compare_certificate, m_sigma_of, n_sigma_of, radius_trend, Certificate, Comparison, RadiusTrend, TrackerParams,
    CALIBRATED_C0,
};
use dkg_core::xsb::TRILINEAR_BASELINE;
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::output::{comparison_csv, echo_config, trajectory_csv, write_atomic, write_json, write_state_snapshot};
use crate::suites::{run_suite, Suite, SuiteReport};
use crate::CliError;

/// Result of a command that ran to completion.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub pass: bool,
    pub summary: String,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

#[derive(Serialize)]
struct Diagnostic<'a> {
    error: String,
    command: &'a str,
    version: &'a str,
}

/// Writes `diagnostic.json` for numerical failures (best effort) and returns the error.
pub fn record_failure(dir: &Path, command: &str, e: CliError) -> CliError {
    if matches!(e, CliError::Numerical(_)) {
        let _ = write_json(&dir.join("diagnostic.json"), &Diagnostic { error: e.to_string(), command, version: crate::VERSION });
    }
    e
}

fn run_trajectory(cfg: &RunConfig, dir: &Path, snapshots: bool) -> Result<(SplitState, Trajectory), CliError> {
    let u0 = initial_state(cfg.grid()?, &cfg.initial_data()?)?;
    let spec = ObservableSpec { sigmas: cfg.observables.sigmas.clone(), window: Some(cfg.window()?), keep_states: false };
    let mut index = 0usize;
    let mut io_error = None;
    let snap_dir = dir.join("snapshots");
    let traj = evolve_with(&u0, &cfg.solver, &spec, |s| {
        if snapshots && io_error.is_none() {
            if let Err(e) = write_state_snapshot(&snap_dir.join(format!("state_{index:06}.dkgf")), s) {
                io_error = Some(e);
            }
        }
        index += 1;
        Ok(())
    })?;
    if let Some(e) = io_error {
        return Err(e);
    }
    Ok((u0, traj))
}

#[derive(Serialize)]
struct SimulationSummary {
    samples: usize,
    t_end: f64,
    relative_charge_drift: f64,
    max_range_residual: f64,
}

pub fn simulate(cfg: &RunConfig, dir: &Path) -> Result<Outcome, CliError> {
    echo_config(dir, cfg)?;
    let (_, traj) = run_trajectory(cfg, dir, cfg.wants(Format::Snapshots)).map_err(|e| record_failure(dir, "simulate", e))?;
    if cfg.wants(Format::Csv) {
        write_atomic(&dir.join("trajectory.csv"), &trajectory_csv(&traj)?)?;
    }
    let summary = SimulationSummary {
        samples: traj.samples.len(),
        t_end: traj.samples.last().map(|s| s.t).unwrap_or(0.0),
        relative_charge_drift: traj.relative_charge_drift(),
        max_range_residual: traj.samples.iter().map(|s| s.range_residual).fold(0.0, f64::max),
    };
    if cfg.wants(Format::Json) {
        write_json(&dir.join("summary.json"), &summary)?;
    }
    Ok(Outcome {
        pass: true,
        summary: format!("{} samples to t = {}, relative charge drift {:.3e}", summary.samples, summary.t_end, summary.relative_charge_drift),
    })
}

pub fn verify(cfg: &RunConfig, suite: Suite, dir: &Path) -> Result<(Outcome, SuiteReport), CliError> {
    echo_config(dir, cfg)?;
    let name = serde_json::to_value(suite).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    let report = run_suite(cfg, suite).map_err(|e| record_failure(dir, "verify", e))?;
    write_json(&dir.join(format!("report_{name}.json")), &report)?;
    let mut summary = format!("{name}: {}", if report.pass { "pass" } else { "FAIL" });
    for c in report.failures() {
        summary.push_str(&format!("\n  {}: {:e} {} {:e} violated", c.name, c.value, c.relation, c.limit));
    }
    Ok((Outcome { pass: report.pass, summary }, report))
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateRun {
    pub certificate: Certificate,
    pub comparison: Comparison,
    pub trend: RadiusTrend,
    pub sigma0: f64,
    pub m0: f64,
    pub n0: f64,
}

/// The schedule is built for `tracker.a` and the constants in `tracker`, with
/// `σ₀ = sigma_hat(0)/2` unless given.
pub fn certificate_run(cfg: &RunConfig, dir: &Path) -> Result<(CertificateRun, Trajectory), CliError> {
    let (u0, traj) = run_trajectory(cfg, dir, false)?;
    let sigma0 = match cfg.tracker.sigma0 {
        Some(s) => s,
        None => {
            let psi = [&u0.psi_plus, &u0.psi_minus];
            estimate_radius_state(&psi, &[&u0.phi_plus], cfg.window()?)?.sigma_hat / 2.0
        }
    };
    let m0 = m_sigma_of(&u0, sigma0)?;
    let n0 = n_sigma_of(&u0, sigma0)?;
    let params = TrackerParams {
        a: cfg.tracker.a,
        sigma0,
        c: cfg.tracker.c.unwrap_or(TRILINEAR_BASELINE),
        c0: cfg.tracker.c0.unwrap_or(CALIBRATED_C0),
        k: charge(&u0),
        mass: cfg.solver.mass,
    };
    let certificate = certificate_schedule(params, m0, n0, cfg.solver.t_end)?;
    let comparison = compare_certificate(&traj, &certificate)?;
    let trend = radius_trend(&traj)?;
    Ok((CertificateRun { certificate, comparison, trend, sigma0, m0, n0 }, traj))
}

pub fn certificate(cfg: &RunConfig, dir: &Path) -> Result<Outcome, CliError> {
    echo_config(dir, cfg)?;
    let (run, traj) = certificate_run(cfg, dir).map_err(|e| record_failure(dir, "certificate", e))?;
    write_json(&dir.join("certificate.json"), &run.certificate)?;
    write_atomic(&dir.join("comparison.csv"), &comparison_csv(&run.comparison)?)?;
    if cfg.wants(Format::Csv) {
        write_atomic(&dir.join("trajectory.csv"), &trajectory_csv(&traj)?)?;
    }
    write_json(&dir.join("report_certificate.json"), &run)?;
    let pass = run.comparison.pass && run.trend.convex_or_linear;
    let mut summary = format!(
        "certificate (c = {:e}, c0 = {:e}, A = {:e}, R = {}): min margin {:e} over {} samples ({} excluded), curvature {:e} ± {:e}",
        run.comparison.c,
        run.comparison.c0,
        run.certificate.a_rate,
        run.certificate.r,
        run.comparison.min_margin,
        run.comparison.rows.len(),
        run.comparison.excluded,
        run.trend.coeffs[2],
        run.trend.curvature_std_error
    );
    for w in &run.certificate.warnings {
        summary.push_str(&format!("\n  warning: {w}"));
    }
    Ok(Outcome { pass, summary })
}
