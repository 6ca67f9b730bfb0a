use rand::Rng;
use serde::{Deserialize, Serialize};

use super::norms::Dispersion;
use super::random::DyadicBand;
use super::spacetime::LabGrid;
use crate::dirac::{angle, Sign};
use crate::spectral::{Dyadic, Mode};

/// `θ₁₂ ≤ c (L_max / N^{12}_min)^{1/2}` with `c` the sup of `angle_sweep` on
/// the unit `τ` lattice, rounded up. The sup grows from 4.443 at `|k_i| ≤ 7`
/// to 5.0392 at `|k_i| ≤ 19` and does not move between 19 and 23.
pub const ANGLE_CONSTANT: f64 = 5.04;

/// An interacting triple: `ξ₂ = ξ₀ + ξ₁`, `τ₂ = τ₀ + τ₁`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleTriple {
    pub xi: [[i64; 2]; 3],
    pub tau: [f64; 3],
    pub signs: [Sign; 3],
    /// `∠(s₁ξ₁, s₂ξ₂)`.
    pub theta: f64,
    pub l_max: Dyadic,
    pub n12_min: Dyadic,
}

impl AngleTriple {
    pub fn new(xi1: Mode, xi2: Mode, tau: [f64; 3], signs: [Sign; 3]) -> Option<Self> {
        if xi1 == Mode::ZERO || xi2 == Mode::ZERO {
            return None;
        }
        let xi0 = xi2 - xi1;
        let xs = [xi0, xi1, xi2];
        let modulation = |i: usize| Dispersion::wave(signs[i]).modulation(tau[i], xs[i]);
        let l_max = (0..3).map(|i| Dyadic::band_of(modulation(i))).max().expect("three bands");
        let n12_min = Dyadic::band_of_sq(xi1.abs_sq()).min(Dyadic::band_of_sq(xi2.abs_sq()));
        let sv = |s: Sign, m: Mode| [s.value() * m.k1 as f64, s.value() * m.k2 as f64];
        let theta = angle(sv(signs[1], xi1), sv(signs[2], xi2));
        Some(AngleTriple { xi: xs.map(|m| [m.k1, m.k2]), tau, signs, theta, l_max, n12_min })
    }

    /// `θ₁₂ / (L_max/N^{12}_min)^{1/2}`.
    pub fn ratio(&self) -> f64 {
        self.theta / (self.l_max.as_f64() / self.n12_min.as_f64()).sqrt()
    }

    pub fn within_bound(&self) -> bool {
        self.ratio() <= ANGLE_CONSTANT
    }
}

fn band_modes(lab: &LabGrid, n: Dyadic) -> Vec<Mode> {
    lab.grid.modes().map(|(_, m)| m).filter(|m| n.contains_sq(m.abs_sq())).collect()
}

/// Draw up to `count` interacting lattice triples inside the given bands.
pub fn sample_angle_triples(lab: &LabGrid, bands: [DyadicBand; 3], signs: [Sign; 3], count: usize, rng: &mut impl Rng) -> Vec<AngleTriple> {
    let m1 = band_modes(lab, bands[1].n);
    let m2 = band_modes(lab, bands[2].n);
    let dtau = lab.dtau();
    let h = signs.map(Dispersion::wave);
    // τ lattice values with modulation inside band `i` at mode `m`
    let taus = |i: usize, m: Mode| -> Vec<f64> {
        let half = (lab.n_t / 2) as i64;
        (-half..half).map(|j| j as f64 * dtau).filter(|&t| bands[i].l.contains(h[i].modulation(t, m))).collect()
    };
    let mut out = Vec::new();
    if m1.is_empty() || m2.is_empty() {
        return out;
    }
    for _ in 0..count * 20 {
        if out.len() == count {
            break;
        }
        let xi1 = m1[rng.gen_range(0..m1.len())];
        let xi2 = m2[rng.gen_range(0..m2.len())];
        let xi0 = xi2 - xi1;
        if !bands[0].n.contains_sq(xi0.abs_sq()) {
            continue;
        }
        let (t1, t2) = (taus(1, xi1), taus(2, xi2));
        if t1.is_empty() || t2.is_empty() {
            continue;
        }
        let tau1 = t1[rng.gen_range(0..t1.len())];
        let tau2 = t2[rng.gen_range(0..t2.len())];
        let tau0 = tau2 - tau1;
        if !bands[0].l.contains(h[0].modulation(tau0, xi0)) {
            continue;
        }
        if let Some(t) = AngleTriple::new(xi1, xi2, [tau0, tau1, tau2], signs) {
            out.push(t);
        }
    }
    out
}

/// The triple with the smallest achievable `L_max` for a spatial pair,
/// searching the `τ` lattice of spacing `dtau`.
pub fn least_modulated(xi1: Mode, xi2: Mode, signs: [Sign; 3], dtau: f64) -> Option<AngleTriple> {
    if xi1 == Mode::ZERO || xi2 == Mode::ZERO {
        return None;
    }
    let xi0 = xi2 - xi1;
    let h = signs.map(Dispersion::wave);
    let mut l = 1.0;
    loop {
        // |τ_i + h_i(ξ_i)| < l for the two outer slots, then test slot 0
        let range = |m: Mode, hh: Dispersion| {
            let c = -hh.eval(m) / dtau;
            let r = l / dtau;
            ((c - r).floor() as i64..=(c + r).ceil() as i64).map(|j| j as f64 * dtau).filter(move |&t| hh.modulation(t, m) < l)
        };
        for tau1 in range(xi1, h[1]) {
            for tau2 in range(xi2, h[2]) {
                let tau0 = tau2 - tau1;
                if h[0].modulation(tau0, xi0) < l {
                    return AngleTriple::new(xi1, xi2, [tau0, tau1, tau2], signs);
                }
            }
        }
        l *= 2.0;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleSweep {
    pub pairs: usize,
    pub max_ratio: f64,
    pub worst: Option<AngleTriple>,
    pub violations: Vec<AngleTriple>,
}

/// Every pair `ξ₁, ξ₂` with coordinates in `[−k_max, k_max]`, all sign triples.
pub fn angle_sweep(k_max: i64, dtau: f64) -> AngleSweep {
    let modes: Vec<Mode> = (-k_max..=k_max).flat_map(|a| (-k_max..=k_max).map(move |b| Mode::new(a, b))).collect();
    let mut sweep = AngleSweep { pairs: 0, max_ratio: 0.0, worst: None, violations: Vec::new() };
    for signs in super::trilinear::all_sign_triples() {
        for &xi1 in &modes {
            for &xi2 in &modes {
                let Some(t) = least_modulated(xi1, xi2, signs, dtau) else { continue };
                sweep.pairs += 1;
                let r = t.ratio();
                if r > sweep.max_ratio {
                    sweep.max_ratio = r;
                    sweep.worst = Some(t);
                }
                if !t.within_bound() {
                    sweep.violations.push(t);
                }
            }
        }
    }
    sweep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::xsb::random::trial_rng;

    #[test]
    fn parallel_waves_have_zero_angle() {
        let t = AngleTriple::new(Mode::new(2, 0), Mode::new(5, 0), [-3.0, -2.0, -5.0], [Sign::Plus; 3]).unwrap();
        assert_eq!(t.theta, 0.0);
        assert_eq!(t.l_max, Dyadic::ONE);
        let opposite = AngleTriple::new(Mode::new(2, 0), Mode::new(5, 0), [-7.0, 2.0, -5.0], [Sign::Plus, Sign::Minus, Sign::Plus]).unwrap();
        assert!((opposite.theta - std::f64::consts::PI).abs() <= 1e-15);
        assert!(AngleTriple::new(Mode::ZERO, Mode::new(1, 0), [0.0; 3], [Sign::Plus; 3]).is_none());
    }

    #[test]
    fn least_modulated_is_minimal() {
        let signs = [Sign::Plus, Sign::Minus, Sign::Plus];
        let (x1, x2) = (Mode::new(3, 1), Mode::new(-2, 4));
        let best = least_modulated(x1, x2, signs, 1.0).unwrap();
        for j1 in -40..40 {
            for j2 in -40..40 {
                let t = AngleTriple::new(x1, x2, [(j2 - j1) as f64, j1 as f64, j2 as f64], signs).unwrap();
                assert!(t.l_max >= best.l_max);
            }
        }
    }

    #[test]
    fn sampled_triples_interact_inside_their_bands() {
        let lab = LabGrid::standard();
        let bands = [DyadicBand::new(4, 4).unwrap(), DyadicBand::new(8, 2).unwrap(), DyadicBand::new(8, 4).unwrap()];
        let signs = [Sign::Minus, Sign::Plus, Sign::Plus];
        let triples = sample_angle_triples(&lab, bands, signs, 32, &mut trial_rng(3, 0));
        assert!(!triples.is_empty());
        for t in &triples {
            let xs = t.xi.map(|[a, b]| Mode::new(a, b));
            assert_eq!(xs[2], xs[0] + xs[1]);
            assert_eq!(t.tau[2], t.tau[0] + t.tau[1]);
            for i in 0..3 {
                assert!(bands[i].contains(t.tau[i], xs[i], Dispersion::wave(signs[i])));
            }
            assert!(t.l_max <= Dyadic::new(4).unwrap());
        }
    }

    #[test]
    fn frozen_constant_covers_the_lab_lattice() {
        let sweep = angle_sweep(7, 1.0);
        assert!((sweep.max_ratio - std::f64::consts::PI * 2f64.sqrt()).abs() <= 1e-12);
        let wide = angle_sweep(11, 1.0);
        assert!(wide.violations.is_empty(), "{:?}", wide.worst);
        assert!(wide.max_ratio > 4.7);
    }
}
