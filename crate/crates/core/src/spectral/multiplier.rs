use rustfft::num_complex::Complex64;

use super::{FourierGrid, Mode, SpectralField};
use crate::error::{DkgError, Result};

/// Largest exponent `σ‖ξ‖` accepted for the weight `e^{σ‖ξ‖}`. Half the log
/// of `f64::MAX`, so squared weights in norms stay finite.
pub const MAX_WEIGHT_EXPONENT: f64 = 354.891_356_446_691_8;

/// Closed catalog of real Fourier symbols `h(ξ)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Symbol {
    /// `|ξ|`
    Abs,
    /// `−|ξ|`
    NegAbs,
    /// `⟨ξ⟩`
    Japanese,
    /// `⟨ξ⟩^s`
    JapanesePow(f64),
    /// `⟨ξ⟩^{-1}`
    JapaneseInv,
    /// `e^{σ‖ξ‖}`, `σ ≥ 0`
    Gevrey(f64),
    /// Pointwise product, applied right factor first.
    Product(Box<Symbol>, Box<Symbol>),
}

impl Symbol {
    pub fn times(self, other: Symbol) -> Symbol {
        Symbol::Product(Box::new(self), Box::new(other))
    }

    pub fn eval(&self, m: Mode) -> f64 {
        match self {
            Symbol::Abs => m.abs(),
            Symbol::NegAbs => -m.abs(),
            Symbol::Japanese => m.japanese(),
            Symbol::JapanesePow(s) => m.japanese().powf(*s),
            Symbol::JapaneseInv => 1.0 / m.japanese(),
            Symbol::Gevrey(sigma) => (sigma * m.l1() as f64).exp(),
            Symbol::Product(a, b) => a.eval(m) * b.eval(m),
        }
    }

    fn apply(&self, m: Mode, c: Complex64) -> Complex64 {
        match self {
            Symbol::Product(a, b) => a.apply(m, b.apply(m, c)),
            other => c * other.eval(m),
        }
    }

    /// Verify every exponential factor is representable on `grid`.
    pub fn check_range(&self, grid: FourierGrid) -> Result<()> {
        match self {
            Symbol::Gevrey(sigma) => check_weight_exponent(*sigma, grid),
            Symbol::Product(a, b) => {
                a.check_range(grid)?;
                b.check_range(grid)
            }
            _ => Ok(()),
        }
    }
}

/// Refuse `σ` whose weight `e^{σ‖ξ‖}` overflows somewhere on the grid.
pub fn check_weight_exponent(sigma: f64, grid: FourierGrid) -> Result<()> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(DkgError::Domain(format!("Gevrey radius σ = {sigma} must be finite and ≥ 0")));
    }
    let requested = sigma * grid.max_l1() as f64;
    if requested > MAX_WEIGHT_EXPONENT {
        return Err(DkgError::Range { requested, max_supported: MAX_WEIGHT_EXPONENT });
    }
    Ok(())
}

/// `h(D)f`: multiply every coefficient by `h(ξ)`. No transform is involved.
pub fn apply_multiplier(f: &SpectralField, h: &Symbol) -> Result<SpectralField> {
    h.check_range(f.grid())?;
    Ok(f.map(|m, c| h.apply(m, c)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn field(g: FourierGrid, seed: u64) -> SpectralField {
        SpectralField::from_fn(g, |m| {
            let x = ((m.k1 * 31 + m.k2 * 17) as f64 + seed as f64).sin();
            Complex64::new(x, 0.5 * x.cos())
        })
    }

    #[test]
    fn max_exponent_constant() {
        assert!((MAX_WEIGHT_EXPONENT - f64::MAX.ln() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn identity_and_inverse_pair() {
        let g = FourierGrid::new(16).unwrap();
        let f = field(g, 1);
        assert_eq!(apply_multiplier(&f, &Symbol::JapanesePow(0.0)).unwrap(), f);
        let there = apply_multiplier(&f, &Symbol::JapaneseInv).unwrap();
        let back = apply_multiplier(&there, &Symbol::Japanese).unwrap();
        for (a, b) in back.coeffs().iter().zip(f.coeffs()) {
            assert!((a - b).norm() <= 1e-14 * b.norm().max(1.0));
        }
    }

    #[test]
    fn gevrey_weight_on_single_mode() {
        let g = FourierGrid::new(16).unwrap();
        let f = SpectralField::single_mode(g, Mode::new(3, -4), Complex64::new(1.0, 0.0)).unwrap();
        let w = apply_multiplier(&f, &Symbol::Gevrey(0.1)).unwrap();
        let c = w.coeff(Mode::new(3, -4)).unwrap();
        assert!((c.re - 0.7f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn overflow_is_refused_with_limit() {
        let g = FourierGrid::new(256).unwrap();
        let f = SpectralField::zeros(g);
        match apply_multiplier(&f, &Symbol::Gevrey(2.0)) {
            Err(DkgError::Range { requested, max_supported }) => {
                assert_eq!(requested, 512.0);
                assert_eq!(max_supported, MAX_WEIGHT_EXPONENT);
            }
            other => panic!("expected range error, got {other:?}"),
        }
        assert!(apply_multiplier(&f, &Symbol::Gevrey(1.0)).is_ok());
    }

    #[test]
    fn catalog_lower_bounds() {
        let g = FourierGrid::new(16).unwrap();
        for (_, m) in g.modes() {
            assert!(Symbol::Gevrey(0.3).eval(m) >= 1.0);
            assert!(Symbol::Japanese.eval(m) >= 1.0);
            assert!(Symbol::Abs.eval(m) >= 0.0);
            assert_eq!(Symbol::NegAbs.eval(m), -Symbol::Abs.eval(m));
        }
    }

    fn arb_symbol() -> impl Strategy<Value = Symbol> {
        prop_oneof![
            Just(Symbol::Abs),
            Just(Symbol::NegAbs),
            Just(Symbol::Japanese),
            Just(Symbol::JapaneseInv),
            (-2.0f64..2.0).prop_map(Symbol::JapanesePow),
            (0.0f64..0.5).prop_map(Symbol::Gevrey),
        ]
    }

    proptest! {
        #[test]
        fn composition_equals_product_symbol(h1 in arb_symbol(), h2 in arb_symbol(), seed in 0u64..100) {
            let g = FourierGrid::new(8).unwrap();
            let f = field(g, seed);
            let composed = apply_multiplier(&apply_multiplier(&f, &h2).unwrap(), &h1).unwrap();
            let product = apply_multiplier(&f, &h1.times(h2)).unwrap();
            prop_assert_eq!(composed, product);
        }
    }
}
