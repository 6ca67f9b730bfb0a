//! Atomic artifact writers.

use std::io::Write;
use std::path::Path;

use dkg_core::solver::{SplitState, Trajectory};
use dkg_core::spectral::snapshot::write_snapshot;
use dkg_core::tracker::Comparison;
use serde::Serialize;

use crate::config::RunConfig;
use crate::{CliError, VERSION};

/// Temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// `config.json` and `VERSION` in every output directory.
pub fn echo_config(dir: &Path, cfg: &RunConfig) -> Result<(), CliError> {
    write_json(&dir.join("config.json"), cfg)?;
    write_atomic(&dir.join("VERSION"), format!("{VERSION}\n").as_bytes())
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>, CliError> {
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

/// Columns `t, charge, M_sigma[σ]…, N_sigma[σ]…, sigma_hat`; an empty
/// `sigma_hat` marks a sample without a usable estimate.
pub fn trajectory_csv(traj: &Trajectory) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string(), "charge".to_string()];
    header.extend(traj.sigmas.iter().map(|s| format!("M_sigma[{s}]")));
    header.extend(traj.sigmas.iter().map(|s| format!("N_sigma[{s}]")));
    header.push("sigma_hat".into());
    w.write_record(&header).map_err(|e| CliError::Io(e.to_string()))?;
    for s in &traj.samples {
        let mut row = vec![num(s.t), num(s.charge)];
        row.extend(s.m_sigma.iter().map(|v| num(*v)));
        row.extend(s.n_sigma.iter().map(|v| num(*v)));
        row.push(s.radius.as_ref().filter(|r| !r.saturated).map(|r| num(r.sigma_hat)).unwrap_or_default());
        w.write_record(&row).map_err(|e| CliError::Io(e.to_string()))?;
    }
    finish_csv(w)
}

pub fn comparison_csv(cmp: &Comparison) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "sigma_hat", "sigma_lower", "margin", "pass"]).map_err(|e| CliError::Io(e.to_string()))?;
    for r in &cmp.rows {
        w.write_record([num(r.t), num(r.sigma_hat), num(r.sigma_lower), num(r.margin), r.pass.to_string()])
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    finish_csv(w)
}

/// `ψ₊` components, `ψ₋` components, `φ₊`.
pub fn write_state_snapshot(path: &Path, s: &SplitState) -> Result<(), CliError> {
    let fields = [s.psi_plus.c1.clone(), s.psi_plus.c2.clone(), s.psi_minus.c1.clone(), s.psi_minus.c2.clone(), s.phi_plus.clone()];
    let mut bytes = Vec::new();
    write_snapshot(&mut bytes, &fields)?;
    write_atomic(path, &bytes)
}
