//! Run configuration, one TOML file per run.

use std::path::{Path, PathBuf};

use dkg_core::gevrey::{Datum, RadiusWindow};
use dkg_core::solver::{InitialData, SolverConfig};
use dkg_core::spectral::FourierGrid;
use dkg_core::xsb::{BILINEAR_REFERENCE_SEED, TRILINEAR_REFERENCE_SEED};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub data: DataConfig,
    pub solver: SolverConfig,
    pub observables: ObservablesConfig,
    #[serde(default)]
    pub tracker: TrackerConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    ExpDecay,
    Gaussian,
    SingleMode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub kind: DataKind,
    /// Required for every kind, so a config always pins its randomness.
    pub seed: u64,
    pub amplitude: f64,
    pub sigma_star: Option<f64>,
    #[serde(default)]
    pub rho: f64,
    pub width: Option<f64>,
    pub mode: Option<[i64; 2]>,
    #[serde(default = "one")]
    pub phi_scale: f64,
    #[serde(default = "one")]
    pub dphi_scale: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservablesConfig {
    pub sigmas: Vec<f64>,
    /// `[r_min, r_max]` in ℓ¹ shells; the grid default when absent.
    pub window: Option<RadiusWindow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackerConfig {
    #[serde(default = "default_a")]
    pub a: f64,
    /// Trilinear baseline when absent.
    pub c: Option<f64>,
    /// Calibrated value when absent.
    pub c0: Option<f64>,
    /// Half the initial radius estimate when absent.
    pub sigma0: Option<f64>,
}

fn default_a() -> f64 {
    1.0 / 3.0
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig { a: default_a(), c: None, c0: None, sigma0: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_charge_tol")]
    pub charge_tolerance: f64,
    /// `σ` list of the approx suite.
    #[serde(default = "default_approx_sigmas")]
    pub approx_sigmas: Vec<f64>,
    /// Frozen `c_eff(σ)` for `approx_sigmas`; the regression check is skipped when absent.
    pub c_eff_baseline: Option<Vec<f64>>,
    #[serde(default = "default_c_eff_tol")]
    pub c_eff_tolerance: f64,
    #[serde(default = "default_lab")]
    pub lab: LabConfig,
}

fn default_charge_tol() -> f64 {
    1e-6
}

fn default_approx_sigmas() -> Vec<f64> {
    vec![0.025, 0.05, 0.1, 0.2]
}

fn default_c_eff_tol() -> f64 {
    0.01
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            charge_tolerance: default_charge_tol(),
            approx_sigmas: default_approx_sigmas(),
            c_eff_baseline: None,
            c_eff_tolerance: default_c_eff_tol(),
            lab: default_lab(),
        }
    }
}

/// Monte-Carlo suites on the standard 32²×64 lab grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabConfig {
    #[serde(default = "default_bilinear_seed")]
    pub bilinear_seed: u64,
    #[serde(default = "default_trilinear_seed")]
    pub trilinear_seed: u64,
    /// Extra seed for the stability comparison of the trilinear suite.
    #[serde(default = "default_alt_seed")]
    pub trilinear_alt_seed: u64,
    #[serde(default = "default_trilinear_seed")]
    pub commutator_seed: u64,
}

fn default_bilinear_seed() -> u64 {
    BILINEAR_REFERENCE_SEED
}

fn default_trilinear_seed() -> u64 {
    TRILINEAR_REFERENCE_SEED
}

fn default_alt_seed() -> u64 {
    TRILINEAR_REFERENCE_SEED + 1
}

fn default_lab() -> LabConfig {
    LabConfig {
        bilinear_seed: default_bilinear_seed(),
        trilinear_seed: default_trilinear_seed(),
        trilinear_alt_seed: default_alt_seed(),
        commutator_seed: default_trilinear_seed(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Snapshots,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
    /// Size of the worker pool; outputs do not depend on it.
    #[serde(default = "default_workers")]
    pub workers: usize,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

fn default_workers() -> usize {
    1
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { directory: default_dir(), formats: default_formats(), workers: default_workers() }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// `--seed` replaces the data seed and every lab seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.data.seed = seed;
        self.verify.lab = LabConfig {
            bilinear_seed: seed,
            trilinear_seed: seed,
            trilinear_alt_seed: seed.wrapping_add(1),
            commutator_seed: seed,
        };
        self
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, why: String| Err(CliError::Config(format!("{field}: {why}")));
        self.grid()?;
        self.initial_data()?;
        self.solver.steps().map_err(|e| CliError::Config(e.to_string()))?;
        if self.observables.sigmas.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return bad("observables.sigmas", "every σ must be finite and ≥ 0".into());
        }
        if let Some(w) = self.observables.window {
            if w.r_min < 0 || w.r_min >= w.r_max {
                return bad("observables.window", format!("[{}, {}] is empty", w.r_min, w.r_max));
            }
        }
        if !(self.tracker.a > 0.25 && self.tracker.a <= 0.5) {
            return bad("tracker.a", format!("{} outside (1/4, 1/2]", self.tracker.a));
        }
        for (name, v) in [("tracker.c", self.tracker.c), ("tracker.c0", self.tracker.c0), ("tracker.sigma0", self.tracker.sigma0)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return bad(name, format!("must be positive, got {v}"));
                }
            }
        }
        if let Some(b) = &self.verify.c_eff_baseline {
            if b.len() != self.verify.approx_sigmas.len() {
                return bad("verify.c_eff_baseline", format!("{} values for {} σ", b.len(), self.verify.approx_sigmas.len()));
            }
        }
        if self.output.workers == 0 {
            return bad("output.workers", "must be ≥ 1".into());
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<FourierGrid, CliError> {
        FourierGrid::new(self.grid.n).map_err(|e| CliError::Config(format!("grid.n: {e}")))
    }

    pub fn initial_data(&self) -> Result<InitialData, CliError> {
        let d = &self.data;
        let need = |name: &str, v: Option<f64>| v.ok_or_else(|| CliError::Config(format!("data.{name} is required for this kind")));
        let datum = match d.kind {
            DataKind::ExpDecay => Datum::ExpDecay { sigma_star: need("sigma_star", d.sigma_star)?, rho: d.rho, seed: d.seed },
            DataKind::Gaussian => Datum::Gaussian { width: need("width", d.width)? },
            DataKind::SingleMode => {
                let [k1, k2] = d.mode.ok_or_else(|| CliError::Config("data.mode is required for single_mode".into()))?;
                Datum::SingleMode { k1, k2, amplitude: 1.0 }
            }
        };
        if !(d.amplitude.is_finite() && d.phi_scale.is_finite() && d.dphi_scale.is_finite()) {
            return Err(CliError::Config("data.amplitude: must be finite".into()));
        }
        if let Some(s) = d.sigma_star {
            if !(s > 0.0) {
                return Err(CliError::Config(format!("data.sigma_star: must be > 0, got {s}")));
            }
        }
        Ok(InitialData { datum, amplitude: d.amplitude, phi_scale: d.phi_scale, dphi_scale: d.dphi_scale })
    }

    pub fn window(&self) -> Result<RadiusWindow, CliError> {
        Ok(self.observables.window.unwrap_or_else(|| self.grid().map(RadiusWindow::default_for).unwrap_or(RadiusWindow::new(1, 2))))
    }

    pub fn wants(&self, f: Format) -> bool {
        self.output.formats.contains(&f)
    }
}
