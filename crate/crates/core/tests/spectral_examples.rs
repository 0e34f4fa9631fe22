use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use fracpme::manifold::{CustomWarping, ModelManifold, RadialGrid, Warping};
use fracpme::spectral::{
    build_spectrum, faber_krahn_check, gaussian_bound_check, subordination_identity_check, FractionalOperator,
    Power, RadialField, SpectralDecomposition,
};

fn euclid() -> &'static Arc<SpectralDecomposition> {
    static CELL: OnceLock<Arc<SpectralDecomposition>> = OnceLock::new();
    CELL.get_or_init(|| build_spectrum(&ModelManifold::euclidean(3).unwrap(), 12.0, 1024, 1.0).unwrap())
}

fn hyper() -> &'static Arc<SpectralDecomposition> {
    static CELL: OnceLock<Arc<SpectralDecomposition>> = OnceLock::new();
    CELL.get_or_init(|| build_spectrum(&ModelManifold::hyperbolic(3, 1.0).unwrap(), 12.0, 1024, 1.0).unwrap())
}

fn euclid_kernel(t: f64, r: f64) -> f64 {
    (4.0 * PI * t).powf(-1.5) * (-r * r / (4.0 * t)).exp()
}

fn hyper_kernel(t: f64, r: f64) -> f64 {
    let shape = if r < 1e-8 { 1.0 } else { r / r.sinh() };
    (4.0 * PI * t).powf(-1.5) * shape * (-t - r * r / (4.0 * t)).exp()
}

// Relative error of the kernel from the origin. The finite-volume error in
// the Gaussian tail grows like (r²/t)² Δr², so the comparison stops where the
// exact kernel drops below 1e-6 of its peak.
fn max_kernel_error(spectrum: &SpectralDecomposition, exact: impl Fn(f64, f64) -> f64) -> f64 {
    let grid = spectrum.grid();
    let limit = grid.r_max() / 3.0;
    let mut worst = 0.0f64;
    for &t in &[0.01, 0.03, 0.1, 0.3, 1.0] {
        let peak = exact(t, 0.0);
        for (i, &r) in grid.nodes().iter().enumerate() {
            let e = exact(t, r);
            if r > limit || e < 1e-6 * peak {
                continue;
            }
            worst = worst.max((spectrum.heat_kernel(t, i, 0) - e).abs() / e);
        }
    }
    worst
}

#[test]
fn euclidean_heat_kernel_is_gaussian() {
    let spectrum = build_spectrum(&ModelManifold::euclidean(3).unwrap(), 6.0, 2048, 1.0).unwrap();
    let err = max_kernel_error(&spectrum, euclid_kernel);
    assert!(err < 0.02, "relative error {err}");
}

#[test]
fn hyperbolic_heat_kernel_matches_closed_form() {
    let spectrum = build_spectrum(&ModelManifold::hyperbolic(3, 1.0).unwrap(), 6.0, 2048, 1.0).unwrap();
    let err = max_kernel_error(&spectrum, hyper_kernel);
    assert!(err < 0.02, "relative error {err}");
}

#[test]
fn heat_of_narrow_bump_spreads_as_gaussian() {
    let spectrum = euclid();
    let grid = spectrum.grid().clone();
    let bump = RadialField::from_fn(grid.clone(), |r| if r < 0.1 { 1.0 } else { 0.0 });
    let mass = bump.integral();
    let out = spectrum.apply_heat(1.0, &bump).unwrap();
    for (i, &r) in grid.nodes().iter().enumerate() {
        if r > grid.r_max() / 3.0 {
            break;
        }
        let e = mass * euclid_kernel(1.0, r);
        assert!((out.values()[i] - e).abs() < 0.02 * e, "r = {r}");
    }
}

#[test]
fn heat_at_time_zero_is_identity_and_ground_state_decays() {
    let spectrum = euclid();
    let phi = spectrum.eigenfunction(0);
    let same = spectrum.apply_heat(0.0, &phi).unwrap();
    let decayed = spectrum.apply_heat(1.0, &phi).unwrap();
    let factor = (-spectrum.eigenvalues()[0]).exp();
    for i in 0..phi.values().len() {
        assert!((same.values()[i] - phi.values()[i]).abs() < 1e-12);
        assert!((decayed.values()[i] - factor * phi.values()[i]).abs() < 1e-10);
    }
}

#[test]
fn decomposition_is_orthonormal() {
    assert!(euclid().orthonormality_defect() < 1e-10);
    assert!(hyper().orthonormality_defect() < 1e-10);
}

#[test]
fn hyperbolic_bottom_of_spectrum_approaches_one() {
    let spectrum = build_spectrum(&ModelManifold::hyperbolic(3, 1.0).unwrap(), 40.0, 1024, 1.0).unwrap();
    let lambda1 = spectrum.eigenvalues()[0];
    // Truncation at radius R lifts the bottom by about π²/R².
    assert!(lambda1 >= 1.0 && lambda1 < 1.0 + 1.5 * PI * PI / 1600.0, "{lambda1}");
}

#[test]
fn fractional_power_of_ground_state() {
    let op = FractionalOperator::new(0.75, euclid().clone()).unwrap();
    let phi = euclid().eigenfunction(0);
    let out = op.apply(Power::Positive, &phi).unwrap();
    let factor = euclid().eigenvalues()[0].powf(0.75);
    let scale = phi.sup_norm();
    for (a, b) in out.values().iter().zip(phi.values()) {
        assert!((a - factor * b).abs() < 1e-9 * scale);
    }
}

#[test]
fn fractional_power_tends_to_laplacian() {
    let spectrum = build_spectrum(&ModelManifold::euclidean(3).unwrap(), 8.0, 256, 1.0).unwrap();
    let f = RadialField::from_fn(spectrum.grid().clone(), |r| (-r * r).exp());
    let full = spectrum.apply_function(&f, |l| l).unwrap();
    let gap = |s: f64| {
        let op = FractionalOperator::new(s, spectrum.clone()).unwrap();
        let g = op.apply(Power::Positive, &f).unwrap();
        g.values().iter().zip(full.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / full.sup_norm()
    };
    let (far, near) = (gap(0.9), gap(0.99));
    assert!(near < far && near < 0.1, "{far} {near}");
    // First order in 1 - s.
    assert!((far / near - 10.0).abs() < 3.0, "{far} {near}");
}

#[test]
fn subordination_examples() {
    assert!(subordination_identity_check(0.5, 4.0).unwrap() < 1e-10);
    for s in [0.2, 0.5, 0.9] {
        assert!(subordination_identity_check(s, 1.0).unwrap() < 1e-10);
    }
    let lambda1 = euclid().eigenvalues()[0];
    assert!(subordination_identity_check(0.75, lambda1).unwrap() < 1e-8);
}

fn faber_krahn_constant() -> f64 {
    PI * PI * (4.0 * PI / 3.0f64).powf(2.0 / 3.0)
}

#[test]
fn euclidean_faber_krahn_product_is_scale_free() {
    let grid = euclid().grid().clone();
    let report = faber_krahn_check(&grid, &[1.0, 2.0, 4.0, 8.0]).unwrap();
    assert_eq!(report.rows.len(), 4);
    for row in &report.rows {
        assert!((row.product / faber_krahn_constant() - 1.0).abs() < 0.01, "{row:?}");
    }
    let p = &report.rows;
    assert!((p[1].product / p[0].product - 1.0).abs() < 0.01);
    assert!((p[3].product / p[2].product - 1.0).abs() < 0.01);
}

#[test]
fn hyperbolic_faber_krahn_product_exceeds_euclidean() {
    let grid = hyper().grid().clone();
    let report = faber_krahn_check(&grid, &[0.5, 1.0, 2.0, 4.0, 8.0]).unwrap();
    assert!(report.rows.len() >= 4);
    assert!(report.constant >= faber_krahn_constant() * 0.999, "{}", report.constant);
}

#[test]
fn faber_krahn_skips_unresolved_balls() {
    let grid = Arc::new(RadialGrid::build(&ModelManifold::euclidean(3).unwrap(), 4.0, 32, 1.0).unwrap());
    let report = faber_krahn_check(&grid, &[0.1, 2.0, 10.0]).unwrap();
    assert_eq!(report.skipped, vec![0.1, 10.0]);
    assert_eq!(report.rows.len(), 1);
}

fn samples(spectrum: &SpectralDecomposition, t_max: f64, r_max: f64) -> Vec<(f64, usize)> {
    let times = [0.01, 0.03, 0.1, 0.3, 1.0, 3.0, t_max];
    let nodes = spectrum.grid().nodes();
    let mut out = Vec::new();
    for &t in times.iter().filter(|&&t| t <= t_max) {
        for (i, &r) in nodes.iter().enumerate().step_by(8) {
            if r <= r_max {
                out.push((t, i));
            }
        }
    }
    out
}

#[test]
fn euclidean_gaussian_bound_peaks_at_origin() {
    let spectrum = euclid();
    let pts = samples(spectrum, 1.0, 4.0);
    let report = gaussian_bound_check(spectrum, &pts, 0.5).unwrap();
    let exact = (4.0 * PI).powf(-1.5);
    assert!((report.supremum / exact - 1.0).abs() < 0.02, "{report:?}");
    assert!(report.argmax_r < 0.1);
}

#[test]
fn gaussian_bound_is_monotone_in_epsilon() {
    for spectrum in [euclid(), hyper()] {
        let pts = samples(spectrum, 5.0, 10.0);
        let sups: Vec<f64> = [0.1, 0.5, 1.0, 2.0]
            .iter()
            .map(|&e| gaussian_bound_check(spectrum, &pts, e).unwrap().supremum)
            .collect();
        assert!(sups.iter().all(|s| s.is_finite()));
        assert!(sups.windows(2).all(|w| w[1] <= w[0]), "{sups:?}");
    }
}

#[test]
fn custom_warping_curvature_and_volume() {
    let cubic = ModelManifold::new(3, Warping::Custom(CustomWarping::builtin("cubic").unwrap())).unwrap();
    let k = cubic.sectional_curvature_radial(1.0).unwrap().value;
    assert!((k + 3.0).abs() < 1e-12);
    let e = ModelManifold::euclidean(3).unwrap();
    let ratio = e.ball_volume(2.0).unwrap() / e.ball_volume(1.0).unwrap();
    assert!((ratio - 8.0).abs() < 1e-12);
    let h = ModelManifold::hyperbolic(3, 1.0).unwrap();
    assert!((h.ball_volume(1.0).unwrap() - PI * (2.0f64.sinh() - 2.0)).abs() < 1e-10);
    assert!((h.sphere_area(1.0).unwrap() - 4.0 * PI * 1.0f64.sinh().powi(2)).abs() < 1e-10);
    assert_eq!(h.sphere_area(0.0).unwrap(), 0.0);
}

#[test]
fn graded_grid_spacing_ratio() {
    let grid = RadialGrid::build(&ModelManifold::euclidean(3).unwrap(), 10.0, 64, 1.05).unwrap();
    let e = grid.edges();
    for k in 1..e.len() - 1 {
        let ratio = (e[k + 1] - e[k]) / (e[k] - e[k - 1]);
        assert!((ratio - 1.05).abs() < 1e-9);
    }
}
