use serde::{Deserialize, Serialize};

use super::dynamics::Dynamics;
use super::picard::picard_solve;
use super::state::{charge, SplitState};
use super::{Integrator, SolverConfig};
use crate::error::{DkgError, Result};
use crate::gevrey::{estimate_radius_multi, gevrey_norm, gevrey_norm_spinor, GevreyWeight, RadiusEstimate, RadiusWindow};

/// What to measure at each recorded sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ObservableSpec {
    #[serde(default)]
    pub sigmas: Vec<f64>,
    #[serde(default)]
    pub window: Option<RadiusWindow>,
    /// Keep the sampled states in the trajectory.
    #[serde(default)]
    pub keep_states: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub charge: f64,
    /// `𝔐_σ = ‖ψ₊‖²_{G^{σ,0}} + ‖ψ₋‖²_{G^{σ,0}}`, one per configured `σ`.
    pub m_sigma: Vec<f64>,
    /// `𝔑_σ = ‖φ₊‖_{G^{σ,1/2}}`.
    pub n_sigma: Vec<f64>,
    /// `None` when the estimator refuses the field.
    pub radius: Option<RadiusEstimate>,
    pub range_residual: f64,
    pub phi_symmetry: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub sigmas: Vec<f64>,
    pub samples: Vec<Sample>,
    pub states: Vec<SplitState>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn charges(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.charge).collect()
    }

    /// Largest `|Q(t) − Q(0)| / Q(0)`.
    pub fn relative_charge_drift(&self) -> f64 {
        let q0 = self.samples[0].charge;
        if q0 == 0.0 {
            return 0.0;
        }
        self.samples.iter().map(|s| (s.charge - q0).abs() / q0).fold(0.0, f64::max)
    }
}

pub fn observe(state: &SplitState, spec: &ObservableSpec) -> Result<Sample> {
    let numerical = |e: DkgError| match e {
        DkgError::Range { requested, max_supported } => DkgError::Numerical {
            t: state.t,
            message: format!("Gevrey weight exponent {requested} exceeds {max_supported}"),
        },
        other => other,
    };
    if !state.is_finite() {
        return Err(DkgError::Numerical { t: state.t, message: "state is not finite".into() });
    }
    let mut m_sigma = Vec::with_capacity(spec.sigmas.len());
    let mut n_sigma = Vec::with_capacity(spec.sigmas.len());
    for &sigma in &spec.sigmas {
        let w0 = GevreyWeight::new(sigma, 0.0)?;
        let wh = GevreyWeight::new(sigma, 0.5)?;
        let mp = gevrey_norm_spinor(&state.psi_plus, w0).map_err(numerical)?;
        let mm = gevrey_norm_spinor(&state.psi_minus, w0).map_err(numerical)?;
        m_sigma.push(mp * mp + mm * mm);
        n_sigma.push(gevrey_norm(&state.phi_plus, wh).map_err(numerical)?);
    }
    let radius = match spec.window {
        Some(w) => {
            let fields = [
                &state.psi_plus.c1,
                &state.psi_plus.c2,
                &state.psi_minus.c1,
                &state.psi_minus.c2,
                &state.phi_plus,
            ];
            estimate_radius_multi(&fields, w).ok()
        }
        None => None,
    };
    Ok(Sample {
        t: state.t,
        charge: charge(state),
        m_sigma,
        n_sigma,
        radius,
        range_residual: state.range_residual(),
        phi_symmetry: state.phi_plus.real_part().conjugate_symmetry_residual(),
    })
}

/// Step to `config.t_end`, recording every `record_every` steps and at the end.
pub fn evolve(initial: &SplitState, config: &SolverConfig, spec: &ObservableSpec) -> Result<Trajectory> {
    evolve_with(initial, config, spec, |_| Ok(()))
}

/// As `evolve`, also handing every recorded state to `on_record`.
pub fn evolve_with(
    initial: &SplitState,
    config: &SolverConfig,
    spec: &ObservableSpec,
    mut on_record: impl FnMut(&SplitState) -> Result<()>,
) -> Result<Trajectory> {
    let steps = config.steps()?;
    let dynamics = Dynamics::new(initial.grid(), config.mass, config.nonlinearity, config.dealias);
    let mut traj = Trajectory { sigmas: spec.sigmas.clone(), samples: vec![], states: vec![] };
    let mut record = |s: &SplitState, traj: &mut Trajectory| -> Result<()> {
        traj.samples.push(observe(s, spec)?);
        if spec.keep_states {
            traj.states.push(s.clone());
        }
        on_record(s)
    };
    record(initial, &mut traj)?;
    match config.integrator {
        Integrator::LawsonRk4 => {
            let p = dynamics.propagator(config.dt);
            let mut u = initial.clone();
            for k in 1..=steps {
                u = dynamics.step(&u, &p);
                // exact multiples avoid drift in the recorded times
                u.t = initial.t + k as f64 * config.dt;
                if k % config.record_every == 0 || k == steps {
                    record(&u, &mut traj)?;
                }
            }
        }
        Integrator::PicardOracle => {
            for k in (1..=steps).filter(|k| k % config.record_every == 0 || *k == steps) {
                let t = k as f64 * config.dt;
                let mut u = picard_solve(&dynamics, initial, t, None)?.state;
                u.t = initial.t + t;
                record(&u, &mut traj)?;
            }
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gevrey::Datum;
    use crate::solver::{initial_state, InitialData, Nonlinearity};
    use crate::spectral::FourierGrid;

    fn state(n: usize, amp: f64) -> SplitState {
        let d = InitialData {
            datum: Datum::ExpDecay { sigma_star: 0.4, rho: 0.0, seed: 21 },
            amplitude: amp,
            phi_scale: 1.0,
            dphi_scale: 1.0,
        };
        initial_state(FourierGrid::new(n).unwrap(), &d).unwrap()
    }

    #[test]
    fn zero_length_run_is_initial_sample() {
        let s = state(16, 1.0);
        let cfg = SolverConfig::new(0.01, 0.0, 1.0);
        let t = evolve(&s, &cfg, &ObservableSpec { sigmas: vec![0.0], ..Default::default() }).unwrap();
        assert_eq!(t.samples.len(), 1);
        assert_eq!(t.samples[0].t, 0.0);
        assert!((t.samples[0].m_sigma[0] - t.samples[0].charge).abs() <= 1e-14 * t.samples[0].charge);
    }

    #[test]
    fn free_run_conserves_everything() {
        let s = state(16, 1.0);
        let mut cfg = SolverConfig::new(0.01, 0.5, 1.0);
        cfg.nonlinearity = Nonlinearity::Off;
        cfg.record_every = 10;
        let spec = ObservableSpec { sigmas: vec![0.0, 0.1, 0.2], ..Default::default() };
        let t = evolve(&s, &cfg, &spec).unwrap();
        assert_eq!(t.samples.len(), 6);
        assert!(t.relative_charge_drift() <= 1e-14);
        for s in &t.samples {
            for j in 0..3 {
                assert!((s.m_sigma[j] - t.samples[0].m_sigma[j]).abs() <= 1e-12 * t.samples[0].m_sigma[j]);
                assert!((s.n_sigma[j] - t.samples[0].n_sigma[j]).abs() <= 1e-12 * t.samples[0].n_sigma[j]);
            }
        }
        assert!(t.times().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn overflow_reports_time() {
        let s = state(64, 1.0);
        let cfg = SolverConfig::new(0.01, 0.02, 1.0);
        let e = evolve(&s, &cfg, &ObservableSpec { sigmas: vec![10.0], ..Default::default() }).unwrap_err();
        assert!(matches!(e, DkgError::Numerical { t, .. } if t == 0.0));
    }

    #[test]
    fn config_validation() {
        let s = state(8, 1.0);
        for cfg in [SolverConfig::new(0.0, 1.0, 1.0), SolverConfig::new(0.3, 1.0, 1.0), SolverConfig::new(0.1, -1.0, 1.0)] {
            assert!(matches!(evolve(&s, &cfg, &ObservableSpec::default()), Err(DkgError::Config(_))));
        }
    }

    #[test]
    fn reruns_are_bitwise_identical() {
        let s = state(16, 1.0);
        let mut cfg = SolverConfig::new(0.01, 0.2, 1.0);
        cfg.record_every = 5;
        let spec = ObservableSpec { sigmas: vec![0.1], window: Some(RadiusWindow::new(1, 8)), keep_states: true };
        let a = evolve(&s, &cfg, &spec).unwrap();
        let b = evolve(&s, &cfg, &spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn picard_integrator_matches_rk4() {
        let s = state(16, 0.1);
        let mut cfg = SolverConfig::new(1e-3, 0.1, 1.0);
        cfg.record_every = 100;
        let spec = ObservableSpec { keep_states: true, ..Default::default() };
        let rk = evolve(&s, &cfg, &spec).unwrap();
        cfg.integrator = Integrator::PicardOracle;
        let pc = evolve(&s, &cfg, &spec).unwrap();
        let err = rk.states[1].distance(&pc.states[1]);
        assert!(err <= 1e-8, "{err:e}");
    }
}
