//! Closed-form Green functions used as references in checks and plots.

use std::f64::consts::PI;

use fracpme::quadrature::integrate;
use statrs::function::gamma::gamma;

use crate::config::{ExperimentConfig, WarpingKind};

/// Riesz kernel of `(-Δ)^{-s}` on `ℝᴺ`.
pub fn riesz(n: usize, s: f64, r: f64) -> f64 {
    let n = n as f64;
    gamma(0.5 * n - s) / (4f64.powf(s) * PI.powf(0.5 * n) * gamma(s)) * r.powf(2.0 * s - n)
}

/// `K₁(x) = ∫₀^∞ e^{-x cosh t} cosh t dt`.
pub fn bessel_k1(x: f64) -> f64 {
    let top = (60.0 / x + 1.0).acosh();
    integrate(|t| (-x * t.cosh()).exp() * t.cosh(), 0.0, top, 1e-300, 1e-12)
        .map(|e| e.value)
        .unwrap_or(f64::NAN)
}

/// `s = 1/2` kernel on `ℍ³` of curvature `-c`.
pub fn hyperbolic3_half(c: f64, r: f64) -> f64 {
    let k = c.sqrt();
    let x = k * r;
    k * bessel_k1(x) / (2.0 * PI * PI * x.sinh())
}

/// Reference kernel for a configuration, when one is known.
pub fn reference_green(cfg: &ExperimentConfig) -> Option<Box<dyn Fn(f64) -> f64>> {
    let (n, s, c) = (cfg.dimension, cfg.s, cfg.curvature);
    match cfg.warping {
        WarpingKind::Euclidean => Some(Box::new(move |r| riesz(n, s, r))),
        WarpingKind::Hyperbolic if cfg.closed_form_available() => Some(Box::new(move |r| hyperbolic3_half(c, r))),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn riesz_half_in_three_dimensions() {
        let r = 1.7;
        assert!((riesz(3, 0.5, r) - 1.0 / (2.0 * PI * PI * r * r)).abs() < 1e-14);
    }

    #[test]
    fn bessel_reference_values() {
        assert!((bessel_k1(1.0) - 0.601_907_230_197_234_6).abs() < 1e-10);
        assert!((bessel_k1(0.1) - 9.853_844_780_870_606).abs() < 1e-8);
    }

    #[test]
    fn hyperbolic_kernel_at_unit_distance() {
        assert!((hyperbolic3_half(1.0, 1.0) - 0.02595).abs() < 5e-5);
    }
}
