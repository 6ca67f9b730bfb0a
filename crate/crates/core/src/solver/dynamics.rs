use rustfft::num_complex::Complex64;

use super::state::SplitState;
use super::Nonlinearity;
use crate::dirac::{projection_for_mode, Mat2, Sign, SpinorField};
use crate::spectral::{FourierGrid, SpectralField, Transform};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Right-hand side of the split system with cached symbols.
pub struct Dynamics {
    transform: Transform,
    mass: f64,
    nonlinearity: Nonlinearity,
    dealias: bool,
    abs: Vec<f64>,
    jap: Vec<f64>,
    proj_plus: Vec<Mat2>,
    proj_minus: Vec<Mat2>,
}

/// `E(τ)` for `τ ∈ {h/2, h}`: the exact linear flow of the three components.
pub struct Propagator {
    pub h: f64,
    half: [Vec<Complex64>; 3],
    full: [Vec<Complex64>; 3],
}

impl Dynamics {
    pub fn new(grid: FourierGrid, mass: f64, nonlinearity: Nonlinearity, dealias: bool) -> Self {
        let modes: Vec<_> = grid.modes().map(|(_, m)| m).collect();
        Dynamics {
            transform: Transform::new(grid),
            mass,
            nonlinearity,
            dealias,
            abs: modes.iter().map(|m| m.abs()).collect(),
            jap: modes.iter().map(|m| m.japanese()).collect(),
            proj_plus: modes.iter().map(|&m| projection_for_mode(m, Sign::Plus)).collect(),
            proj_minus: modes.iter().map(|&m| projection_for_mode(m, Sign::Minus)).collect(),
        }
    }

    pub fn grid(&self) -> FourierGrid {
        self.transform.grid()
    }

    pub fn transform(&self) -> &Transform {
        &self.transform
    }

    /// Largest linear frequency, `max⟨ξ⟩`.
    pub fn max_frequency(&self) -> f64 {
        self.jap.iter().copied().fold(0.0, f64::max)
    }

    fn product(&self, f: &SpectralField, g: &SpectralField) -> SpectralField {
        if self.dealias {
            self.transform.dealiased_product(f, g)
        } else {
            self.transform.aliased_product(f, g)
        }
    }

    fn project(&self, x: &SpinorField, sign: Sign) -> SpinorField {
        let table = match sign {
            Sign::Plus => &self.proj_plus,
            Sign::Minus => &self.proj_minus,
        };
        let mut out = x.clone();
        for (i, p) in table.iter().enumerate() {
            let [a, b] = p.apply([x.c1.coeffs()[i], x.c2.coeffs()[i]]);
            out.c1.coeffs_mut()[i] = a;
            out.c2.coeffs_mut()[i] = b;
        }
        out
    }

    /// `⟨βψ, ψ⟩ = |ψ₁|² − |ψ₂|²`, formed pointwise in physical space.
    fn density(&self, psi: &SpinorField) -> SpectralField {
        let prep = |f: &SpectralField| if self.dealias { f.dealiased() } else { f.clone() };
        let u1 = self.transform.inverse(&prep(&psi.c1));
        let u2 = self.transform.inverse(&prep(&psi.c2));
        let rho: Vec<f64> = u1.iter().zip(&u2).map(|(a, b)| a.norm_sqr() - b.norm_sqr()).collect();
        let out = self.transform.forward_real(&rho).expect("shape preserved");
        if self.dealias {
            out.dealiased()
        } else {
            out
        }
    }

    /// `(F₊, F₋, G)` with `F± = Π±(−Mβψ + (Re φ₊)βψ)` and `G = ⟨D⟩^{-1}⟨βψ, ψ⟩`.
    pub fn rhs_nonlinear(&self, s: &SplitState) -> (SpinorField, SpinorField, SpectralField) {
        let g = self.grid();
        if self.nonlinearity == Nonlinearity::Off {
            return (SpinorField::zeros(g), SpinorField::zeros(g), SpectralField::zeros(g));
        }
        let psi = s.psi();
        let phi = s.phi_plus.real_part();
        let m = Complex64::new(self.mass, 0.0);
        let mut x1 = self.product(&phi, &psi.c1);
        x1.axpy(-m, &psi.c1);
        let mut x2 = self.product(&phi, &psi.c2).scale((-1.0).into());
        x2.axpy(m, &psi.c2);
        let x = SpinorField { c1: x1, c2: x2 };
        let mut rho = self.density(&psi);
        for (c, j) in rho.coeffs_mut().iter_mut().zip(&self.jap) {
            *c /= j;
        }
        (self.project(&x, Sign::Plus), self.project(&x, Sign::Minus), rho)
    }

    /// `N(u) = i(F₊, F₋, G)`, the non-dispersive part of `∂t u`.
    pub fn nonlinear_term(&self, s: &SplitState) -> SplitState {
        let (fp, fm, gg) = self.rhs_nonlinear(s);
        SplitState { psi_plus: fp.scale(I), psi_minus: fm.scale(I), phi_plus: gg.scale(I), t: s.t }
    }

    /// Full time derivative `L u + N(u)`.
    pub fn time_derivative(&self, s: &SplitState) -> SplitState {
        let mut d = self.nonlinear_term(s);
        let lin = [&self.abs, &self.abs, &self.abs, &self.abs, &self.jap];
        let signs = [-1.0, -1.0, 1.0, 1.0, -1.0];
        for (((dst, src), h), sg) in d.parts_mut().into_iter().zip(s.parts()).zip(lin).zip(signs) {
            for ((a, &b), &w) in dst.coeffs_mut().iter_mut().zip(src.coeffs()).zip(h.iter()) {
                *a += I * (sg * w) * b;
            }
        }
        d
    }

    pub fn propagator(&self, h: f64) -> Propagator {
        Propagator { h, half: self.phases(0.5 * h), full: self.phases(h) }
    }

    // e^{−iτ|ξ|}, e^{+iτ|ξ|}, e^{−iτ⟨ξ⟩}
    fn phases(&self, tau: f64) -> [Vec<Complex64>; 3] {
        [
            self.abs.iter().map(|w| Complex64::from_polar(1.0, -tau * w)).collect(),
            self.abs.iter().map(|w| Complex64::from_polar(1.0, tau * w)).collect(),
            self.jap.iter().map(|w| Complex64::from_polar(1.0, -tau * w)).collect(),
        ]
    }

    /// Exact linear flow over an arbitrary `τ`.
    pub fn free_flow(&self, s: &SplitState, tau: f64) -> SplitState {
        let ph = self.phases(tau);
        let mut out = apply_phases(&ph, s);
        out.t = s.t + tau;
        out
    }

    /// One Lawson (integrating-factor) RK4 step of size `p.h`.
    pub fn step(&self, u: &SplitState, p: &Propagator) -> SplitState {
        let h = p.h;
        let eh = |s: &SplitState| apply_phases(&p.half, s);
        let ef = |s: &SplitState| apply_phases(&p.full, s);
        let k1 = self.nonlinear_term(u);
        let u_half = eh(u);
        let k2 = self.nonlinear_term(&SplitState::lincomb(&[(1.0, &u_half), (0.5 * h, &eh(&k1))]));
        let k3 = self.nonlinear_term(&SplitState::lincomb(&[(1.0, &u_half), (0.5 * h, &k2)]));
        let u_full = ef(u);
        let k4 = self.nonlinear_term(&SplitState::lincomb(&[(1.0, &u_full), (h, &eh(&k3))]));
        let mid = eh(&SplitState::lincomb(&[(1.0, &k2), (1.0, &k3)]));
        let mut out = SplitState::lincomb(&[(1.0, &u_full), (h / 6.0, &ef(&k1)), (h / 3.0, &mid), (h / 6.0, &k4)]);
        out.t = u.t + h;
        out
    }
}

fn apply_phases(ph: &[Vec<Complex64>; 3], s: &SplitState) -> SplitState {
    let mut out = s.clone();
    let which = [0usize, 0, 1, 1, 2];
    for (dst, k) in out.parts_mut().into_iter().zip(which) {
        for (c, e) in dst.coeffs_mut().iter_mut().zip(&ph[k]) {
            *c *= e;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac::apply_projection;
    use crate::gevrey::Datum;
    use crate::solver::{charge, initial_state, InitialData};
    use crate::spectral::Mode;

    fn small_state(n: usize, amp: f64, seed: u64) -> SplitState {
        let g = FourierGrid::new(n).unwrap();
        let d = InitialData {
            datum: Datum::ExpDecay { sigma_star: 0.5, rho: 0.0, seed },
            amplitude: amp,
            phi_scale: 1.0,
            dphi_scale: 1.0,
        };
        initial_state(g, &d).unwrap()
    }

    #[test]
    fn zero_state_zero_rhs() {
        let g = FourierGrid::new(8).unwrap();
        let d = Dynamics::new(g, 1.3, Nonlinearity::Full, true);
        let (a, b, c) = d.rhs_nonlinear(&SplitState::zeros(g));
        assert_eq!(a.max_abs() + b.max_abs() + c.max_abs(), 0.0);
    }

    #[test]
    fn massless_without_meson_gives_no_spinor_forcing() {
        let mut s = small_state(16, 1.0, 3);
        s.phi_plus = SpectralField::zeros(s.grid());
        let d = Dynamics::new(s.grid(), 0.0, Nonlinearity::Full, true);
        let (a, b, _) = d.rhs_nonlinear(&s);
        assert_eq!(a.max_abs() + b.max_abs(), 0.0);
    }

    // Hand convolution on 8²: with single-mode data every product has one term.
    #[test]
    fn single_mode_rhs_matches_convolution() {
        let g = FourierGrid::new(8).unwrap();
        let (xi, eta) = (Mode::new(1, -1), Mode::new(0, 2));
        let (a1, a2) = (Complex64::new(0.7, 0.2), Complex64::new(-0.4, 0.5));
        let psi = SpinorField::new(
            SpectralField::single_mode(g, xi, a1).unwrap(),
            SpectralField::single_mode(g, xi, a2).unwrap(),
        )
        .unwrap();
        // real φ = 2·0.3·cos(η·x) with φ̂(±η) = 0.3·(2π)²
        let amp = 0.3 * (2.0 * std::f64::consts::PI).powi(2);
        let mut phi = SpectralField::single_mode(g, eta, amp.into()).unwrap();
        phi.coeffs_mut()[g.index(-eta).unwrap()] = amp.into();
        let psi_p = apply_projection(&psi, Sign::Plus);
        let psi_m = apply_projection(&psi, Sign::Minus);
        let s = SplitState { psi_plus: psi_p, psi_minus: psi_m, phi_plus: phi.clone(), t: 0.0 };
        let mass = 0.8;
        let d = Dynamics::new(g, mass, Nonlinearity::Full, true);
        let (fp, fm, gg) = d.rhs_nonlinear(&s);

        // (φ·u)^(ζ) = (2π)^{-2} Σ φ̂(ζ−ξ') û(ξ')
        let conv = |zeta: Mode, c: Complex64| {
            let mut v = Complex64::new(0.0, 0.0);
            if !g.is_retained(zeta) {
                return v;
            }
            for e in [eta, -eta] {
                if zeta - e == xi {
                    v += amp * c / (2.0 * std::f64::consts::PI).powi(2);
                }
            }
            v
        };
        for (_, zeta) in g.modes() {
            let mut x1 = conv(zeta, a1);
            let mut x2 = -conv(zeta, a2);
            if zeta == xi {
                x1 -= mass * a1;
                x2 += mass * a2;
            }
            for (sign, out) in [(Sign::Plus, &fp), (Sign::Minus, &fm)] {
                let [e1, e2] = projection_for_mode(zeta, sign).apply([x1, x2]);
                assert!((out.c1.coeff(zeta).unwrap() - e1).norm() < 1e-13, "{zeta:?}");
                assert!((out.c2.coeff(zeta).unwrap() - e2).norm() < 1e-13, "{zeta:?}");
            }
            // |ψ₁|² − |ψ₂|² is the constant (|a1|² − |a2|²)/(2π)⁴, so Ĝ lives at 0
            let want = if zeta == Mode::ZERO {
                (a1.norm_sqr() - a2.norm_sqr()) / (2.0 * std::f64::consts::PI).powi(2)
            } else {
                0.0
            };
            assert!((gg.coeff(zeta).unwrap() - want).norm() < 1e-15, "{zeta:?}");
        }
    }

    #[test]
    fn off_is_exact_phase_rotation() {
        let s = small_state(16, 1.0, 4);
        let d = Dynamics::new(s.grid(), 1.0, Nonlinearity::Off, true);
        let p = d.propagator(0.01);
        let stepped = d.step(&s, &p);
        let exact = d.free_flow(&s, 0.01);
        assert_eq!(stepped.parts().map(|f| f.coeffs().to_vec()), exact.parts().map(|f| f.coeffs().to_vec()));
        let back = d.step(&stepped, &d.propagator(-0.01));
        assert!(back.distance(&s) <= 1e-13 * s.norm());
        assert!((charge(&stepped) - charge(&s)).abs() <= 1e-14 * charge(&s));
    }

    #[test]
    fn step_keeps_projection_ranges() {
        let s = small_state(16, 1.0, 5);
        let d = Dynamics::new(s.grid(), 1.0, Nonlinearity::Full, true);
        let p = d.propagator(0.01);
        let mut u = s;
        for _ in 0..20 {
            u = d.step(&u, &p);
        }
        assert!(u.range_residual() < 1e-10, "{}", u.range_residual());
    }

    #[test]
    fn fourth_order_self_convergence() {
        let s = small_state(16, 1.0, 6);
        let d = Dynamics::new(s.grid(), 1.0, Nonlinearity::Full, true);
        let run = |dt: f64, steps: usize| {
            let p = d.propagator(dt);
            let mut u = s.clone();
            for _ in 0..steps {
                u = d.step(&u, &p);
            }
            u
        };
        let t = 0.8;
        let reference = run(t / 160.0, 160);
        let e1 = run(t / 10.0, 10).distance(&reference);
        let e2 = run(t / 20.0, 20).distance(&reference);
        let ratio = e1 / e2;
        assert!(ratio > 12.0 && ratio < 20.0, "ratio {ratio} ({e1:e}, {e2:e})");
    }

    #[test]
    fn time_derivative_matches_finite_difference_of_flow() {
        let s = small_state(8, 0.7, 7);
        let d = Dynamics::new(s.grid(), 0.9, Nonlinearity::Full, true);
        let h = 1e-4;
        let fwd = d.step(&s, &d.propagator(h));
        let bwd = d.step(&s, &d.propagator(-h));
        let fd = SplitState::lincomb(&[(0.5 / h, &fwd), (-0.5 / h, &bwd)]);
        let exact = d.time_derivative(&s);
        assert!(fd.distance(&exact) <= 1e-7 * exact.norm());
    }
}
