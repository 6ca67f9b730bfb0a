//! Pauli/Dirac algebra and the half-wave projections `Π(±ξ)`.
//!
//! At `ξ = 0` the formula `½(I + ξ/|ξ|·α)` is undefined. We use the limit
//! along the positive `ξ₁` axis, `Π_±(0) = ½(I ± α¹)`: the two zero-mode
//! projectors are then complementary rank-one orthogonal projections, so the
//! split charge `‖ψ₊‖² + ‖ψ₋‖²` equals `‖ψ‖²` on every mode, including the
//! mean, and the sign-reversing identity holds there too.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DkgError, Result};
use crate::spectral::{FourierGrid, Mode, SpectralField};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Half-wave sign `±`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl std::fmt::Display for Sign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// 2×2 complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);
    pub const ZERO: Mat2 = Mat2([[ZERO, ZERO], [ZERO, ZERO]]);

    pub fn alpha1() -> Mat2 {
        Mat2([[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn alpha2() -> Mat2 {
        Mat2([[ZERO, -I], [I, ZERO]])
    }

    pub fn beta() -> Mat2 {
        Mat2([[ONE, ZERO], [ZERO, -ONE]])
    }

    /// `v·α = v₁α¹ + v₂α²`.
    pub fn dot_alpha(v: [f64; 2]) -> Mat2 {
        Mat2::alpha1().scale(v[0].into()) + Mat2::alpha2().scale(v[1].into())
    }

    pub fn scale(self, s: Complex64) -> Mat2 {
        let a = self.0;
        Mat2([[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]])
    }

    pub fn adjoint(self) -> Mat2 {
        let a = self.0;
        Mat2([[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]])
    }

    pub fn apply(self, v: [Complex64; 2]) -> [Complex64; 2] {
        let a = self.0;
        [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
    }

    pub fn frobenius(self) -> f64 {
        self.0.iter().flatten().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest singular value.
    pub fn spectral_norm(self) -> f64 {
        let g = self.adjoint() * self;
        let (a, d) = (g.0[0][0].re, g.0[1][1].re);
        let b = g.0[0][1].norm_sqr();
        let half = 0.5 * (a - d);
        let top = 0.5 * (a + d) + (half * half + b).sqrt();
        top.max(0.0).sqrt()
    }
}

impl std::ops::Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        let mut c = [[ZERO; 2]; 2];
        for (i, row) in c.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(c)
    }
}

impl std::ops::Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        Mat2([[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]])
    }
}

impl std::ops::Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + o.scale(-ONE)
    }
}

/// `Π(sign·ξ) = ½(I + (sign·ξ)/|ξ|·α)`, with `Π_±(0) = ½(I ± α¹)`.
pub fn projection_matrix(xi: [f64; 2], sign: Sign) -> Mat2 {
    let s = sign.value();
    let len = xi[0].hypot(xi[1]);
    let dir = if len == 0.0 { [s, 0.0] } else { [s * xi[0] / len, s * xi[1] / len] };
    (Mat2::IDENTITY + Mat2::dot_alpha(dir)).scale(0.5.into())
}

pub fn projection_for_mode(m: Mode, sign: Sign) -> Mat2 {
    projection_matrix(m.as_vec(), sign)
}

/// `‖Π(ξ)β − βΠ(−ξ)‖_F`.
pub fn beta_commutation_residual(xi: [f64; 2]) -> f64 {
    let beta = Mat2::beta();
    (projection_matrix(xi, Sign::Plus) * beta - beta * projection_matrix(xi, Sign::Minus)).frobenius()
}

/// `‖|ξ|Π(ξ) − |ξ|Π(−ξ) − ξ·α‖_F`, the mode-wise form of the half-wave split.
pub fn half_wave_identity_residual(xi: [f64; 2]) -> f64 {
    let len: Complex64 = xi[0].hypot(xi[1]).into();
    let lhs = projection_matrix(xi, Sign::Plus).scale(len) - projection_matrix(xi, Sign::Minus).scale(len);
    (lhs - Mat2::dot_alpha(xi)).frobenius()
}

/// `∠(u, v) ∈ [0, π]`, computed as `atan2(|u×v|, u·v)`.
pub fn angle(u: [f64; 2], v: [f64; 2]) -> f64 {
    let cross = u[0] * v[1] - u[1] * v[0];
    let dot = u[0] * v[0] + u[1] * v[1];
    cross.abs().atan2(dot)
}

/// Operator norm of `Π(−s₂η)Π(s₁ξ)` together with `∠(s₁ξ, s₂η)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NullForm {
    pub norm: f64,
    pub angle: f64,
}

pub fn null_form_norm(xi: [f64; 2], eta: [f64; 2], s1: Sign, s2: Sign) -> Result<NullForm> {
    if xi == [0.0, 0.0] || eta == [0.0, 0.0] {
        return Err(DkgError::Domain("null form needs nonzero frequencies".into()));
    }
    let prod = projection_matrix(eta, s2.flip()) * projection_matrix(xi, s1);
    let (a, b) = (s1.value(), s2.value());
    Ok(NullForm {
        norm: prod.spectral_norm(),
        angle: angle([a * xi[0], a * xi[1]], [b * eta[0], b * eta[1]]),
    })
}

/// Regression value for `sup ‖Π(−s₂η)Π(s₁ξ)‖ / ∠(s₁ξ, s₂η)`, taken from the
/// dense sweep. The norm is `sin(θ/2)`, so the sup is approached as `θ → 0`.
pub const NULL_FORM_CONSTANT: f64 = 0.5;

/// One point of an angle sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub angle: f64,
    pub norm: f64,
}

/// Sweep `count` angles in `(0, π]` with `ξ` fixed along `ξ₁` and `η` rotated.
pub fn null_form_sweep(count: usize, s1: Sign, s2: Sign) -> Vec<SweepPoint> {
    (1..=count)
        .map(|k| {
            let th = std::f64::consts::PI * k as f64 / count as f64;
            let s = s1.value() * s2.value();
            let eta = [s * th.cos(), s * th.sin()];
            let nf = null_form_norm([1.0, 0.0], eta, s1, s2).expect("unit vectors");
            SweepPoint { angle: nf.angle, norm: nf.norm }
        })
        .collect()
}

/// Two-component spinor field, column-vector convention.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorField {
    pub c1: SpectralField,
    pub c2: SpectralField,
}

impl SpinorField {
    pub fn new(c1: SpectralField, c2: SpectralField) -> Result<Self> {
        c1.ensure_same_grid(&c2)?;
        Ok(SpinorField { c1, c2 })
    }

    pub fn zeros(grid: FourierGrid) -> Self {
        SpinorField { c1: SpectralField::zeros(grid), c2: SpectralField::zeros(grid) }
    }

    pub fn grid(&self) -> FourierGrid {
        self.c1.grid()
    }

    pub fn add(&self, o: &SpinorField) -> SpinorField {
        SpinorField { c1: self.c1.add(&o.c1), c2: self.c2.add(&o.c2) }
    }

    pub fn sub(&self, o: &SpinorField) -> SpinorField {
        SpinorField { c1: self.c1.sub(&o.c1), c2: self.c2.sub(&o.c2) }
    }

    pub fn scale(&self, s: Complex64) -> SpinorField {
        SpinorField { c1: self.c1.scale(s), c2: self.c2.scale(s) }
    }

    pub fn axpy(&mut self, s: Complex64, o: &SpinorField) {
        self.c1.axpy(s, &o.c1);
        self.c2.axpy(s, &o.c2);
    }

    /// `∫ |ψ|² dx` with the standard `ℂ²` inner product.
    pub fn norm_sq(&self) -> f64 {
        self.c1.norm_sq() + self.c2.norm_sq()
    }

    pub fn max_abs(&self) -> f64 {
        self.c1.max_abs().max(self.c2.max_abs())
    }

    /// `∫ ⟨ψ, χ⟩ dx` with `⟨u, v⟩ = u₁v̄₁ + u₂v̄₂`.
    pub fn inner(&self, o: &SpinorField) -> Complex64 {
        self.c1.inner(&o.c1) + self.c2.inner(&o.c2)
    }

    /// Apply the matrix `a(ξ)` to every Fourier coefficient pair.
    pub fn map_modes(&self, a: impl Fn(Mode) -> Mat2) -> SpinorField {
        let g = self.grid();
        let mut c1 = self.c1.clone();
        let mut c2 = self.c2.clone();
        let (x1, x2) = (self.c1.coeffs(), self.c2.coeffs());
        for (i, m) in g.modes() {
            let [y1, y2] = a(m).apply([x1[i], x2[i]]);
            c1.coeffs_mut()[i] = y1;
            c2.coeffs_mut()[i] = y2;
        }
        SpinorField { c1, c2 }
    }

    /// Apply the constant matrix `a` pointwise.
    pub fn apply_matrix(&self, a: Mat2) -> SpinorField {
        self.map_modes(|_| a)
    }

    pub fn dealiased(&self) -> SpinorField {
        SpinorField { c1: self.c1.dealiased(), c2: self.c2.dealiased() }
    }

    pub fn is_finite(&self) -> bool {
        self.c1.is_finite() && self.c2.is_finite()
    }
}

/// `Π_± ψ`, mode-wise.
pub fn apply_projection(psi: &SpinorField, sign: Sign) -> SpinorField {
    psi.map_modes(|m| projection_for_mode(m, sign))
}
