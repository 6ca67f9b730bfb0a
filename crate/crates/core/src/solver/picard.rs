//! Collocation Picard iteration for `u(t) = E(t)[u₀ + ∫₀ᵗ E(−s)N(u(s)) ds]`.
//!
//! The integrand is interpolated at Gauss–Legendre nodes, so the iteration
//! shares nothing with the Runge–Kutta stepper beyond the right-hand side.

use super::dynamics::Dynamics;
use super::state::SplitState;
use crate::error::{DkgError, Result};
use crate::linalg::gauss_legendre;

pub const PICARD_MAX_N: usize = 32;
pub const PICARD_MAX_T: f64 = 1.0;
const MAX_ITERS: usize = 200;
const TOL: f64 = 1e-15;

#[derive(Clone, Debug)]
pub struct PicardReport {
    pub state: SplitState,
    pub iterations: usize,
    /// `d_n = max_k ‖u_k^{(n+1)} − u_k^{(n)}‖` over the nodes.
    pub increments: Vec<f64>,
    pub nodes: usize,
}

impl PicardReport {
    /// `max d_{n+1}/d_n` over the first `count` ratios.
    pub fn contraction(&self, count: usize) -> f64 {
        self.increments
            .windows(2)
            .take(count)
            .filter(|w| w[0] > 0.0)
            .map(|w| w[1] / w[0])
            .fold(0.0, f64::max)
    }
}

/// Node count `clamp(20 + ⌈1.2·ω·T⌉, 20, 96)` with `ω = 3·max⟨ξ⟩`, enough to
/// resolve the cubic phase mixing in the interaction picture.
pub fn picard_nodes(dynamics: &Dynamics, t: f64) -> usize {
    let omega = 3.0 * dynamics.max_frequency();
    (20.0 + (1.2 * omega * t).ceil()).clamp(20.0, 96.0) as usize
}

// Lagrange basis ℓ_k at x for nodes `xs`
fn lagrange(xs: &[f64], k: usize, x: f64) -> f64 {
    xs.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, &xj)| (x - xj) / (xs[k] - xj)).product()
}

/// Solve to time `t` from `u0`. With `max_iters` given the iteration stops
/// there even if not converged (used to sample contraction factors).
pub fn picard_solve(dynamics: &Dynamics, u0: &SplitState, t: f64, max_iters: Option<usize>) -> Result<PicardReport> {
    let n = dynamics.grid().n();
    if n > PICARD_MAX_N {
        return Err(DkgError::Config(format!("Picard oracle limited to grids ≤ {PICARD_MAX_N}², got {n}²")));
    }
    if !(t >= 0.0) || t > PICARD_MAX_T {
        return Err(DkgError::Config(format!("Picard oracle limited to 0 ≤ t ≤ {PICARD_MAX_T}, got {t}")));
    }
    if t == 0.0 {
        return Ok(PicardReport { state: u0.clone(), iterations: 0, increments: vec![], nodes: 0 });
    }
    let m = picard_nodes(dynamics, t);
    let (x, w) = gauss_legendre(m);
    let nodes: Vec<f64> = x.iter().map(|x| 0.5 * t * (x + 1.0)).collect();
    let weights: Vec<f64> = w.iter().map(|w| 0.5 * t * w).collect();
    // W[j][k] = ∫₀^{t_j} ℓ_k, exact with an m-point rule on [0, t_j]
    let cum: Vec<Vec<f64>> = nodes
        .iter()
        .map(|&tj| {
            (0..m)
                .map(|k| x.iter().zip(&w).map(|(xq, wq)| 0.5 * tj * wq * lagrange(&nodes, k, 0.5 * tj * (xq + 1.0))).sum())
                .collect()
        })
        .collect();

    let base = SplitState { t: u0.t, ..u0.clone() };
    let start = SplitState { t: 0.0, ..u0.clone() };
    let mut u: Vec<SplitState> = nodes.iter().map(|_| SplitState::zeros(dynamics.grid())).collect();
    let mut increments = Vec::new();
    let limit = max_iters.unwrap_or(MAX_ITERS);
    let scale = start.norm().max(f64::MIN_POSITIVE);
    let mut integrand: Vec<SplitState>;
    let mut iterations = 0;
    loop {
        integrand = u
            .iter()
            .zip(&nodes)
            .map(|(uk, &tk)| dynamics.free_flow(&dynamics.nonlinear_term(uk), -tk))
            .collect();
        let next: Vec<SplitState> = nodes
            .iter()
            .zip(&cum)
            .map(|(&tj, row)| {
                let mut terms = vec![(1.0, &start)];
                terms.extend(row.iter().copied().zip(integrand.iter()));
                dynamics.free_flow(&SplitState::lincomb(&terms), tj)
            })
            .collect();
        let d = next.iter().zip(&u).map(|(a, b)| a.distance(b)).fold(0.0, f64::max);
        if !d.is_finite() {
            return Err(DkgError::Numerical { t, message: "Picard iteration diverged".into() });
        }
        increments.push(d);
        u = next;
        iterations += 1;
        if d <= TOL * scale || iterations >= limit {
            break;
        }
    }
    if max_iters.is_none() && increments.last().copied().unwrap_or(0.0) > TOL * scale {
        return Err(DkgError::Numerical { t, message: format!("Picard iteration did not converge in {MAX_ITERS} sweeps") });
    }
    integrand = u
        .iter()
        .zip(&nodes)
        .map(|(uk, &tk)| dynamics.free_flow(&dynamics.nonlinear_term(uk), -tk))
        .collect();
    let mut terms = vec![(1.0, &start)];
    terms.extend(weights.iter().copied().zip(integrand.iter()));
    let mut state = dynamics.free_flow(&SplitState::lincomb(&terms), t);
    state.t = base.t + t;
    Ok(PicardReport { state, iterations, increments, nodes: m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gevrey::Datum;
    use crate::solver::{initial_state, InitialData, Nonlinearity};
    use crate::spectral::FourierGrid;

    fn state(n: usize, amp: f64) -> SplitState {
        let d = InitialData {
            datum: Datum::ExpDecay { sigma_star: 0.5, rho: 0.0, seed: 9 },
            amplitude: amp,
            phi_scale: 1.0,
            dphi_scale: 1.0,
        };
        initial_state(FourierGrid::new(n).unwrap(), &d).unwrap()
    }

    #[test]
    fn free_flow_is_reproduced() {
        let s = state(8, 1.0);
        let d = Dynamics::new(s.grid(), 1.0, Nonlinearity::Off, true);
        let r = picard_solve(&d, &s, 0.5, None).unwrap();
        assert!(r.iterations <= 2);
        assert!(r.state.distance(&d.free_flow(&s, 0.5)) <= 1e-14 * s.norm());
    }

    #[test]
    fn limits_enforced() {
        let s = state(64, 0.1);
        let d = Dynamics::new(s.grid(), 1.0, Nonlinearity::Full, true);
        assert!(matches!(picard_solve(&d, &s, 0.1, None), Err(DkgError::Config(_))));
        let s = state(8, 0.1);
        let d = Dynamics::new(s.grid(), 1.0, Nonlinearity::Full, true);
        assert!(picard_solve(&d, &s, 1.5, None).is_err());
    }

    #[test]
    fn agrees_with_runge_kutta_on_small_grid() {
        let s = state(8, 0.3);
        let d = Dynamics::new(s.grid(), 1.0, Nonlinearity::Full, true);
        let r = picard_solve(&d, &s, 0.2, None).unwrap();
        let p = d.propagator(0.002);
        let mut u = s.clone();
        for _ in 0..100 {
            u = d.step(&u, &p);
        }
        assert!(r.state.distance(&u) <= 1e-10 * s.norm(), "{:e}", r.state.distance(&u));
        assert!(r.contraction(5) < 0.5);
    }
}
