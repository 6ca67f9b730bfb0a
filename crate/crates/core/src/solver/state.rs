use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dirac::{apply_projection, Sign, SpinorField};
use crate::error::{DkgError, Result};
use crate::gevrey::{make_datum, Datum};
use crate::spectral::{FourierGrid, SpectralField, Symbol};

const REAL_TOL: f64 = 1e-12;

/// `(ψ₊, ψ₋, φ₊)` at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitState {
    pub psi_plus: SpinorField,
    pub psi_minus: SpinorField,
    pub phi_plus: SpectralField,
    pub t: f64,
}

impl SplitState {
    /// Checks the grids agree and that `ψ±` lie in the ranges of `Π±`.
    pub fn new(psi_plus: SpinorField, psi_minus: SpinorField, phi_plus: SpectralField, t: f64) -> Result<Self> {
        psi_plus.c1.ensure_same_grid(&psi_minus.c1)?;
        psi_plus.c1.ensure_same_grid(&phi_plus)?;
        let s = SplitState { psi_plus, psi_minus, phi_plus, t };
        let res = s.range_residual();
        if res > 1e-10 {
            return Err(DkgError::Domain(format!("ψ± outside the Π± ranges (residual {res:.3e})")));
        }
        Ok(s)
    }

    pub fn zeros(grid: FourierGrid) -> Self {
        SplitState {
            psi_plus: SpinorField::zeros(grid),
            psi_minus: SpinorField::zeros(grid),
            phi_plus: SpectralField::zeros(grid),
            t: 0.0,
        }
    }

    pub fn grid(&self) -> FourierGrid {
        self.phi_plus.grid()
    }

    pub fn psi(&self) -> SpinorField {
        self.psi_plus.add(&self.psi_minus)
    }

    pub fn parts(&self) -> [&SpectralField; 5] {
        [&self.psi_plus.c1, &self.psi_plus.c2, &self.psi_minus.c1, &self.psi_minus.c2, &self.phi_plus]
    }

    pub(crate) fn parts_mut(&mut self) -> [&mut SpectralField; 5] {
        [
            &mut self.psi_plus.c1,
            &mut self.psi_plus.c2,
            &mut self.psi_minus.c1,
            &mut self.psi_minus.c2,
            &mut self.phi_plus,
        ]
    }

    /// `Σ cᵢ·sᵢ`; time taken from the first term.
    pub fn lincomb(terms: &[(f64, &SplitState)]) -> SplitState {
        let (c0, first) = terms[0];
        let mut out = first.clone();
        for p in out.parts_mut() {
            p.coeffs_mut().iter_mut().for_each(|c| *c *= c0);
        }
        for &(c, s) in &terms[1..] {
            for (dst, src) in out.parts_mut().into_iter().zip(s.parts()) {
                dst.axpy(Complex64::new(c, 0.0), src);
            }
        }
        out
    }

    /// `‖Π₋ψ₊‖ + ‖Π₊ψ₋‖`, relative to `‖ψ₊‖ + ‖ψ₋‖`.
    pub fn range_residual(&self) -> f64 {
        let scale = self.psi_plus.norm_sq().sqrt() + self.psi_minus.norm_sq().sqrt();
        if scale == 0.0 {
            return 0.0;
        }
        let off = apply_projection(&self.psi_plus, Sign::Minus).norm_sq().sqrt()
            + apply_projection(&self.psi_minus, Sign::Plus).norm_sq().sqrt();
        off / scale
    }

    /// `‖φ₊(t) − φ₊'(t)‖ + Σ‖ψ± − ψ±'‖` in `L²`.
    pub fn distance(&self, o: &SplitState) -> f64 {
        self.parts().iter().zip(o.parts()).map(|(a, b)| a.sub(b).norm_sq()).sum::<f64>().sqrt()
    }

    pub fn norm(&self) -> f64 {
        self.parts().iter().map(|a| a.norm_sq()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.parts().iter().all(|f| f.is_finite())
    }
}

/// `f± = Π±ψ₀`, `g₊ = φ₀ + i⟨D⟩^{-1}φ₁`.
pub fn split_initial_data(psi0: &SpinorField, phi0: &SpectralField, phi1: &SpectralField) -> Result<SplitState> {
    psi0.c1.ensure_same_grid(phi0)?;
    phi0.ensure_same_grid(phi1)?;
    for (name, f) in [("φ₀", phi0), ("φ₁", phi1)] {
        let r = f.conjugate_symmetry_residual();
        if r > REAL_TOL {
            return Err(DkgError::Domain(format!("{name} is not real-valued (symmetry residual {r:.3e})")));
        }
    }
    let inv = phi1.map(|m, c| c * Complex64::new(0.0, Symbol::JapaneseInv.eval(m)));
    Ok(SplitState {
        psi_plus: apply_projection(psi0, Sign::Plus),
        psi_minus: apply_projection(psi0, Sign::Minus),
        phi_plus: phi0.add(&inv),
        t: 0.0,
    })
}

/// `(ψ, φ, ∂tφ) = (ψ₊ + ψ₋, Re φ₊, ⟨D⟩ Im φ₊)`.
pub fn reconstruct(state: &SplitState) -> (SpinorField, SpectralField, SpectralField) {
    let phi = state.phi_plus.real_part();
    let dphi = state.phi_plus.imag_part().map(|m, c| c * Symbol::Japanese.eval(m));
    (state.psi(), phi, dphi)
}

/// `‖ψ₊‖² + ‖ψ₋‖²`.
pub fn charge(state: &SplitState) -> f64 {
    state.psi_plus.norm_sq() + state.psi_minus.norm_sq()
}

/// Initial data built from one analytic profile: the two spinor components
/// and `φ₀`, `φ₁` get independent phases from consecutive seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialData {
    #[serde(flatten)]
    pub datum: Datum,
    pub amplitude: f64,
    /// Scale of `φ` relative to `ψ`.
    #[serde(default = "one")]
    pub phi_scale: f64,
    /// Scale of `φ₁` relative to `φ₀`.
    #[serde(default = "one")]
    pub dphi_scale: f64,
}

fn one() -> f64 {
    1.0
}

fn reseed(d: &Datum, k: u64) -> Datum {
    match d {
        Datum::ExpDecay { sigma_star, rho, seed } => {
            Datum::ExpDecay { sigma_star: *sigma_star, rho: *rho, seed: seed.wrapping_mul(4).wrapping_add(k) }
        }
        other => other.clone(),
    }
}

pub fn initial_state(grid: FourierGrid, data: &InitialData) -> Result<SplitState> {
    if !data.amplitude.is_finite() || !data.phi_scale.is_finite() || !data.dphi_scale.is_finite() {
        return Err(DkgError::Config("data amplitudes must be finite".into()));
    }
    let a = Complex64::new(data.amplitude, 0.0);
    let field = |k: u64| make_datum(grid, &reseed(&data.datum, k)).map(|f| f.scale(a));
    let psi0 = SpinorField::new(field(0)?, field(1)?)?;
    let phi0 = field(2)?.scale(data.phi_scale.into());
    let phi1 = field(3)?.scale((data.phi_scale * data.dphi_scale).into());
    split_initial_data(&psi0, &phi0.real_part(), &phi1.real_part())
}
