use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use fracpme::datum::{ball_indicator, bump_sum, power_tail};
use fracpme::green::{
    decay_class_report, dirac_limit_errors, green_ball_integral, green_comparison_check, green_profile,
    offcenter_green_moment, potential_two_sided_check, weighted_norm, GreenProfile, NormEquivalence,
};
use fracpme::manifold::{CustomWarping, ModelManifold, Warping};
use fracpme::spectral::{build_spectrum, FractionalOperator, RadialField};

struct Setup {
    op: FractionalOperator,
    green: GreenProfile,
}

fn setup(manifold: ModelManifold, r_max: f64) -> Setup {
    let spectrum = build_spectrum(&manifold, r_max, 1024, 1.0).unwrap();
    let op = FractionalOperator::new(0.5, spectrum).unwrap();
    let green = green_profile(&op).unwrap();
    Setup { op, green }
}

fn euclid() -> &'static Setup {
    static CELL: OnceLock<Setup> = OnceLock::new();
    CELL.get_or_init(|| setup(ModelManifold::euclidean(3).unwrap(), 20.0))
}

fn hyper() -> &'static Setup {
    static CELL: OnceLock<Setup> = OnceLock::new();
    CELL.get_or_init(|| setup(ModelManifold::hyperbolic(3, 1.0).unwrap(), 20.0))
}

#[test]
fn green_at_unit_distance() {
    let ge = euclid().green.at_distance(1.0);
    let gh = hyper().green.at_distance(1.0);
    assert!((ge / 0.0507 - 1.0).abs() < 0.02, "{ge}");
    assert!((gh / 0.0259 - 1.0).abs() < 0.02, "{gh}");
    assert!(gh <= ge);
}

#[test]
fn euclidean_unit_ball_integral() {
    let v = green_ball_integral(&euclid().green, 1.0);
    assert!((v / (2.0 / PI) - 1.0).abs() < 0.01, "{v}");
}

#[test]
fn far_field_factorizes() {
    let s = euclid();
    let grid = s.op.grid();
    let chi = ball_indicator(grid, 0.5).unwrap();
    let vol = ModelManifold::euclidean(3).unwrap().ball_volume(0.5).unwrap();
    for rho in [4.0, 6.0] {
        let m = offcenter_green_moment(&s.green, &chi, rho).unwrap();
        let expected = vol * s.green.at_distance(rho);
        assert!((m / expected - 1.0).abs() < 0.05, "rho = {rho}: {m} vs {expected}");
    }
}

// Unit-mass shell on the cell containing `radius`.
fn shell(grid: &Arc<fracpme::manifold::RadialGrid>, radius: f64) -> (RadialField, f64) {
    let i = grid.nearest_node(radius);
    let mut v = vec![0.0; grid.len()];
    v[i] = 1.0 / grid.weights()[i];
    (RadialField::new(grid.clone(), v).unwrap(), grid.nodes()[i])
}

#[test]
fn shell_moment_is_symmetric_under_swap() {
    for s in [euclid(), hyper()] {
        let grid = s.op.grid();
        let (ua, a) = shell(grid, 1.0);
        let (ub, b) = shell(grid, 3.0);
        let ab = offcenter_green_moment(&s.green, &ua, b).unwrap();
        let ba = offcenter_green_moment(&s.green, &ub, a).unwrap();
        assert!((ab / ba - 1.0).abs() < 0.01, "{ab} {ba}");
    }
}

#[test]
fn weighted_norm_of_small_ball_is_its_volume() {
    let s = euclid();
    let chi = ball_indicator(s.op.grid(), 0.5).unwrap();
    let w = weighted_norm(&chi, &s.green, 0.0).unwrap();
    let vol = ModelManifold::euclidean(3).unwrap().ball_volume(0.5).unwrap();
    assert!((w.total() - vol).abs() < 1e-10 * vol);
    assert_eq!(w.outer, 0.0);
}

// For u = |x|^{-2} the centred norm is dominated by the convolution
// ∫ |x|^{-2} |x - y|^{-2} dx = π³/|y|, so it decays like 1/ρ, not faster.
#[test]
fn weighted_norm_of_power_tail_decays_like_inverse_distance() {
    let s = euclid();
    let u = power_tail(s.op.grid(), 2.0, 1.0).unwrap();
    let totals: Vec<f64> = [0.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|&rho| weighted_norm(&u, &s.green, rho).unwrap().total())
        .collect();
    assert!(totals.iter().all(|t| t.is_finite() && *t > 0.0));
    assert!(totals.windows(2).all(|w| w[1] < w[0]), "{totals:?}");
    let ratio = totals[2] / totals[3];
    assert!(ratio > 2.0 && ratio < 4.0, "{totals:?}");
}

#[test]
fn norm_equivalence_examples() {
    let s = euclid();
    let eq = NormEquivalence::calibrate(&s.op, &s.green).unwrap();
    assert!(eq.lower > 0.0 && eq.upper.is_finite());
    let chi = ball_indicator(s.op.grid(), 0.5).unwrap();
    let rc = eq.ratio(&chi, &s.green).unwrap();
    assert!(rc > 0.0 && rc.is_finite());
    let u = power_tail(s.op.grid(), 2.0, 1.0).unwrap();
    let ru = eq.ratio(&u, &s.green).unwrap();
    assert!(ru >= eq.lower && ru <= eq.upper, "{ru} not in [{}, {}]", eq.lower, eq.upper);
    let doubled = u.map(|v| 2.0 * v);
    assert!((eq.ratio(&doubled, &s.green).unwrap() - ru).abs() < 1e-12 * ru);
}

#[test]
fn euclidean_potential_is_comparable_to_green() {
    let s = euclid();
    let report = potential_two_sided_check(&s.op, &s.green, 0.5, (0.1, 6.0)).unwrap();
    assert!(report.is_two_sided());
    assert!(report.spread() < 50.0, "{}", report.spread());
    // Far from the ball the potential looks like mass times the kernel.
    let (r, tail) = *report.normalized.last().unwrap();
    assert!(r > 5.5 && (tail - 1.0).abs() < 0.05, "{r} {tail}");
}

#[test]
fn potential_of_shrinking_balls_tends_to_green() {
    let s = euclid();
    let errs = dirac_limit_errors(&s.op, &s.green, &[1.0, 0.5, 0.25, 0.125], 2.0).unwrap();
    assert!(errs.windows(2).all(|w| w[1].1 < w[0].1), "{errs:?}");
    assert!(errs.last().unwrap().1 < 0.01, "{errs:?}");
}

#[test]
fn decay_class_thresholds() {
    let e = &euclid().green;
    let fast = decay_class_report(2.0, e).unwrap();
    assert!(fast.increment_ratio < 0.5, "{fast:?}");
    let slow = decay_class_report(0.5, e).unwrap();
    assert!(!slow.converges(), "{slow:?}");
    let h = decay_class_report(1.0, &hyper().green).unwrap();
    assert!(h.converges() && !h.mass_converges(), "{h:?}");
}

#[test]
fn bump_sum_masses_add_up() {
    let s = setup(ModelManifold::euclidean(3).unwrap(), 25.0);
    let u = bump_sum(s.op.grid(), 3).unwrap();
    assert!((u.integral() - 3.0).abs() < 1e-10);
    let norms: Vec<f64> = (1..=3)
        .map(|j| weighted_norm(&bump_sum(s.op.grid(), j).unwrap(), &s.green, 0.0).unwrap().total())
        .collect();
    let (d1, d2) = (norms[1] - norms[0], norms[2] - norms[1]);
    assert!(d1 > 0.0 && d2 > 0.0 && d2 < d1, "{norms:?}");
}

#[test]
fn hyperbolic_green_is_dominated_by_euclidean() {
    let h = ModelManifold::hyperbolic(3, 1.0).unwrap();
    let radii = [0.5, 1.0, 2.0, 4.0];
    let report = green_comparison_check(&h, 0.0, 0.5, (12.0, 256, 1.0), &radii, 1e-3).unwrap();
    assert!(report.holds(), "{report:?}");
    let same = green_comparison_check(&h, 1.0, 0.5, (12.0, 256, 1.0), &radii, 1e-3).unwrap();
    assert!((same.pointwise_max_ratio - 1.0).abs() < 1e-10);
    assert!((same.ball_max_ratio - 1.0).abs() < 1e-10);
}

#[test]
fn more_curved_warping_has_smaller_green() {
    let m = ModelManifold::new(3, Warping::Custom(CustomWarping::builtin("sinh_cosh").unwrap())).unwrap();
    let report = green_comparison_check(&m, 1.0, 0.5, (8.0, 256, 1.0), &[0.5, 1.0, 2.0], 1e-3).unwrap();
    assert!(report.holds(), "{report:?}");
}
