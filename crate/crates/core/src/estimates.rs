//! Quantitative checks on computed trajectories: weak formulation
//! residuals, Green moments, pointwise bounds and smoothing rates.

use crate::error::{invalid, Error, Result};
use crate::fit::{least_squares, LineFit};
use crate::green::{offcenter_green_moment, GreenProfile};
use crate::semigroup::Trajectory;
use crate::spectral::{FractionalOperator, Power, RadialField};

/// `θ₁ = 1 / (2s + N(m-1))`.
pub fn theta1(n: usize, s: f64, m: f64) -> f64 {
    1.0 / (2.0 * s + n as f64 * (m - 1.0))
}

fn bump(x: f64) -> (f64, f64) {
    if x.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let q = 1.0 - x * x;
    let b = (-1.0 / q).exp();
    (b, -2.0 * x / (q * q) * b)
}

/// Smooth test function `b(r/σ) b(τ(t))` with `τ` mapping
/// `[t_lo, t_hi]` onto `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    pub sigma: f64,
    pub t_lo: f64,
    pub t_hi: f64,
}

impl TestFunction {
    fn time_part(&self, t: f64) -> (f64, f64) {
        let scale = 2.0 / (self.t_hi - self.t_lo);
        let (b, db) = bump(scale * (t - 0.5 * (self.t_lo + self.t_hi)));
        (b, db * scale)
    }
}

/// Normalised residual of the very weak formulation
/// `∫∫ ∂ₜψ L^{-s}u - ∫∫ u^m ψ = 0`.
pub fn wds_residual(traj: &Trajectory, op: &FractionalOperator, test: &TestFunction) -> Result<f64> {
    let times = traj.times();
    let t_end = times[times.len() - 1];
    if !(test.t_lo >= times[1] && test.t_hi <= t_end && test.t_lo < test.t_hi) {
        return Err(invalid(
            "test_function",
            format!("time support [{}, {}] outside [{}, {t_end}]", test.t_lo, test.t_hi, times[1]),
        ));
    }
    if !(test.sigma > 0.0 && test.sigma < 0.5 * traj.grid().r_max()) {
        return Err(invalid("test_function", format!("radius {} outside the grid", test.sigma)));
    }
    let grid = traj.grid().clone();
    let spatial = RadialField::from_fn(grid.clone(), |r| bump(r / test.sigma).0);
    let potential = op.apply(Power::Negative, &spatial)?;
    let m = traj.m();
    let mut flux = Vec::with_capacity(times.len());
    let mut source = Vec::with_capacity(times.len());
    let mut scale = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        let (b, db) = test.time_part(t);
        let u = traj.profile(k);
        let um = u.map(|v| v.max(0.0).powf(m));
        let moment = um.dot(&spatial)?;
        flux.push(db * u.dot(&potential)?);
        source.push(b * moment);
        scale.push(b.abs() * moment);
    }
    let lhs = trapezoid(&times, &flux) - trapezoid(&times, &source);
    let norm = trapezoid(&times, &scale);
    if !(norm > 0.0) {
        if lhs == 0.0 {
            return Ok(0.0);
        }
        return Err(Error::Precondition("test function does not meet the solution".into()));
    }
    Ok(lhs / norm)
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(a, b)| 0.5 * (a[1] - a[0]) * (b[0] + b[1])).sum()
}

/// `∫ u(t) G(d(x, x₀))` at every recorded time.
pub fn green_moment_series(traj: &Trajectory, green: &GreenProfile, rho: f64) -> Result<Vec<f64>> {
    (0..traj.len()).map(|k| offcenter_green_moment(green, &traj.profile(k), rho)).collect()
}

/// Largest relative increase between consecutive entries.
pub fn max_relative_increase(series: &[f64]) -> f64 {
    series
        .windows(2)
        .map(|w| (w[1] - w[0]) / w[0].abs().max(f64::MIN_POSITIVE))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// One evaluation of the two-sided pointwise bound at the pole.
#[derive(Debug, Clone, Copy)]
pub struct FundamentalRow {
    pub t0: f64,
    pub t1: f64,
    pub t: f64,
    pub lower: f64,
    pub middle: f64,
    pub upper: f64,
}

impl FundamentalRow {
    pub fn holds(&self, slack: f64) -> bool {
        self.lower <= self.middle * (1.0 + slack) && self.middle <= self.upper * (1.0 + slack)
    }
}

/// For recorded indices `k0 < k1 <= k`, compare
/// `(t0/t1)^{m/(m-1)} (t1-t0) u^m(t0)`, `∫ (u(t0) - u(t1)) G` and
/// `(m-1) t^{m/(m-1)} t0^{-1/(m-1)} u^m(t)`, with `u` taken at the pole.
pub fn fundamental_bound_check(
    traj: &Trajectory,
    green: &GreenProfile,
    triples: &[(usize, usize, usize)],
) -> Result<Vec<FundamentalRow>> {
    let m = traj.m();
    if !(m > 1.0) {
        return Err(Error::Precondition("the bound needs m > 1".into()));
    }
    let times = traj.times();
    let g = green.as_field();
    let moment = |k: usize| traj.profile(k).dot(&g);
    let e = m / (m - 1.0);
    triples
        .iter()
        .map(|&(k0, k1, k)| {
            if !(0 < k0 && k0 < k1 && k1 <= k && k < traj.len()) {
                return Err(invalid("triples", format!("bad index triple ({k0}, {k1}, {k})")));
            }
            let (t0, t1, t) = (times[k0], times[k1], times[k]);
            let u0 = traj.profile_values(k0)[0].powf(m);
            let ut = traj.profile_values(k)[0].powf(m);
            Ok(FundamentalRow {
                t0,
                t1,
                t,
                lower: (t0 / t1).powf(e) * (t1 - t0) * u0,
                middle: moment(k0)? - moment(k1)?,
                upper: (m - 1.0) * t.powf(e) / t0.powf(1.0 / (m - 1.0)) * ut,
            })
        })
        .collect()
}

/// Deterministic index triples spread over the recorded times.
pub fn sample_triples(traj: &Trajectory, count: usize) -> Vec<(usize, usize, usize)> {
    let n = traj.len();
    if n < 4 {
        return Vec::new();
    }
    let last = n - 1;
    (0..count)
        .map(|j| {
            let a = 1 + (j * 7919) % (last - 2);
            let b = a + 1 + (j * 104_729) % (last - a);
            let c = b + (j * 1_299_709) % (last - b + 1);
            (a, b, c)
        })
        .collect()
}

/// Verdict of a decay-rate study.
#[derive(Debug, Clone)]
pub struct SmoothingReport {
    pub regime: String,
    pub fit_window: (f64, f64),
    pub fit: Option<LineFit>,
    pub target_exponent: Option<f64>,
    /// `(t, ratio)` pairs of the normalised decay quantity.
    pub ratio_series: Vec<(f64, f64)>,
    pub pass: bool,
    pub note: String,
}

impl SmoothingReport {
    pub fn ratio_max(&self) -> f64 {
        self.ratio_series.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn ratio_min(&self) -> f64 {
        self.ratio_series.iter().map(|p| p.1).fold(f64::INFINITY, f64::min)
    }

    pub fn ratio_median(&self) -> f64 {
        let mut v: Vec<f64> = self.ratio_series.iter().map(|p| p.1).collect();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n == 0 {
            return f64::NAN;
        }
        if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    }
}

pub const MIN_SAMPLES_PER_DECADE: f64 = 12.0;

/// Least squares fit of `log ‖u(t)‖∞` against `log t` over a window.
pub fn fit_linf_decay(traj: &Trajectory, window: (f64, f64)) -> Result<LineFit> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi / lo >= 10f64.sqrt()) {
        return Err(Error::InsufficientSampling(format!(
            "window [{lo}, {hi}] is shorter than half a decade"
        )));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = traj
        .records()
        .iter()
        .filter(|r| r.t >= lo * (1.0 - 1e-12) && r.t <= hi * (1.0 + 1e-12))
        .filter(|r| r.linf > 0.0)
        .map(|r| (r.t.ln(), r.linf.ln()))
        .unzip();
    let decades = (hi / lo).log10();
    if (x.len() as f64) < MIN_SAMPLES_PER_DECADE * decades {
        return Err(Error::InsufficientSampling(format!(
            "{} samples over {decades:.2} decades",
            x.len()
        )));
    }
    least_squares(&x, &y)
}

/// Euclidean-type decay `‖u(t)‖∞ ~ t^{-Nθ₁}` over a window past the
/// threshold `‖u₀‖₁^{-(m-1)}`.
pub fn fit_smoothing_exponent(traj: &Trajectory, window: (f64, f64), tolerance: f64) -> Result<SmoothingReport> {
    let n = traj.grid().manifold().dimension();
    let (s, m) = (traj.s(), traj.m());
    let th = theta1(n, s, m);
    let mass = traj.initial_mass();
    let threshold = mass.powf(-(m - 1.0));
    if window.0 < threshold * (1.0 - 1e-12) {
        return Err(invalid(
            "fit_window",
            format!("window starts at {} before the threshold {threshold}", window.0),
        ));
    }
    let fit = fit_linf_decay(traj, window)?;
    let target = -(n as f64) * th;
    let ratio_series = traj
        .records()
        .iter()
        .filter(|r| r.t >= window.0 && r.t <= window.1)
        .map(|r| (r.t, r.linf * r.t.powf(n as f64 * th) / mass.powf(2.0 * s * th)))
        .collect();
    Ok(SmoothingReport {
        regime: "euclidean_S1".into(),
        fit_window: window,
        fit: Some(fit),
        target_exponent: Some(target),
        ratio_series,
        pass: (fit.slope - target).abs() <= tolerance,
        note: String::new(),
    })
}

/// Long-time regime on a hyperbolic space of curvature `-c`.
///
/// Past `t* = e^{(N-1)(m-1)√c} / ‖u₀‖₁^{m-1}` the ratio
/// `‖u‖∞ t^{1/(m-1)} / log(t ‖u₀‖₁^{m-1})^{s/(m-1)}` must stay within twice
/// its value at `t*` up to `50 t*`, the slope over `[5t*, 50t*]` must be at
/// most `-0.9`, and `‖u‖∞ t^{Nθ₁}` must decay.
pub fn hyperbolic_longtime_check(traj: &Trajectory, c: f64) -> Result<SmoothingReport> {
    let n = traj.grid().manifold().dimension();
    let (s, m) = (traj.s(), traj.m());
    let mass = traj.initial_mass();
    let t_star = ((n as f64 - 1.0) * (m - 1.0) * c.sqrt()).exp() / mass.powf(m - 1.0);
    let horizon = 50.0 * t_star;
    let t_end = traj.records().last().map(|r| r.t).unwrap_or(0.0);
    if t_end < horizon * (1.0 - 1e-9) {
        return Err(Error::Precondition(format!(
            "trajectory ends at {t_end}; the check needs t_max >= {horizon} (50 t*)"
        )));
    }
    let ratio_series: Vec<(f64, f64)> = traj
        .records()
        .iter()
        .filter(|r| r.t >= t_star && r.t <= horizon * (1.0 + 1e-9))
        .map(|r| {
            let log = (r.t * mass.powf(m - 1.0)).ln();
            (r.t, r.linf * r.t.powf(1.0 / (m - 1.0)) / log.powf(s / (m - 1.0)))
        })
        .collect();
    let first = ratio_series.first().map(|p| p.1).ok_or_else(|| {
        Error::InsufficientSampling("no samples after the threshold".into())
    })?;
    let bounded = ratio_series.iter().all(|p| p.1 <= 2.0 * first);
    let fit = fit_linf_decay(traj, (5.0 * t_star, horizon))?;
    let th = theta1(n, s, m);
    let euclid: Vec<f64> = traj
        .records()
        .iter()
        .filter(|r| r.t >= t_star && r.t <= horizon * (1.0 + 1e-9))
        .map(|r| r.linf * r.t.powf(n as f64 * th))
        .collect();
    let euclid_decays = euclid.last() < euclid.first();
    Ok(SmoothingReport {
        regime: "hyperbolic_longtime".into(),
        fit_window: (5.0 * t_star, horizon),
        fit: Some(fit),
        target_exponent: Some(-1.0 / (m - 1.0)),
        ratio_series,
        pass: bounded && fit.slope <= -0.9 && euclid_decays,
        note: format!(
            "t* = {t_star:.6e}; bounded = {bounded}; late slope = {:.4}; euclidean ratio decays = {euclid_decays}",
            fit.slope
        ),
    })
}

/// Boundedness of `‖u(t)‖∞` against the weighted norm `‖u₀‖` of the datum.
///
/// Short times `[T/10, T]`, `T = ‖u₀‖^{-(m-1)}`, use the scale
/// `‖u₀‖^{2sθ₁} t^{-Nθ₁} ∨ ‖u₀‖`; long times from `T` to the end of the
/// trajectory (at least `10T`) on Cartan–Hadamard manifolds use
/// `‖u₀‖^{1/m} t^{-1/m}`. Each series must stay below three
/// times its median.
pub fn weighted_smoothing_check(
    traj: &Trajectory,
    weighted_norm: Option<f64>,
    cartan_hadamard: bool,
) -> Result<Vec<SmoothingReport>> {
    let norm = weighted_norm
        .ok_or_else(|| Error::Precondition("the weighted norm of the datum is required".into()))?;
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(invalid("weighted_norm", format!("need a positive finite norm, got {norm}")));
    }
    let n = traj.grid().manifold().dimension() as f64;
    let (s, m) = (traj.s(), traj.m());
    let th = theta1(n as usize, s, m);
    let big_t = norm.powf(-(m - 1.0));
    let series = |lo: f64, hi: f64, f: &dyn Fn(f64, f64) -> f64| -> Vec<(f64, f64)> {
        traj.records()
            .iter()
            .filter(|r| r.t >= lo * (1.0 - 1e-12) && r.t <= hi * (1.0 + 1e-12))
            .map(|r| (r.t, f(r.t, r.linf)))
            .collect()
    };
    let mut out = Vec::new();
    let short = series(0.1 * big_t, big_t, &|t, linf| {
        linf / (norm.powf(2.0 * s * th) * t.powf(-n * th)).max(norm)
    });
    out.push(bounded_report("weighted_short", (0.1 * big_t, big_t), short));
    if cartan_hadamard {
        let t_end = traj.records().last().map_or(0.0, |r| r.t);
        if t_end < 10.0 * big_t * (1.0 - 1e-9) {
            return Err(Error::Precondition(format!(
                "trajectory ends at {t_end}; the long-time window needs t_max >= {}",
                10.0 * big_t
            )));
        }
        let long = series(big_t, t_end, &|t, linf| linf * t.powf(1.0 / m) / norm.powf(1.0 / m));
        out.push(bounded_report("weighted_long", (big_t, t_end), long));
    }
    for r in &out {
        if r.ratio_series.len() < 3 {
            return Err(Error::InsufficientSampling(format!(
                "{} window [{:.3e}, {:.3e}] has {} samples",
                r.regime,
                r.fit_window.0,
                r.fit_window.1,
                r.ratio_series.len()
            )));
        }
    }
    Ok(out)
}

fn bounded_report(regime: &str, window: (f64, f64), ratio_series: Vec<(f64, f64)>) -> SmoothingReport {
    let mut report = SmoothingReport {
        regime: regime.into(),
        fit_window: window,
        fit: None,
        target_exponent: None,
        ratio_series,
        pass: false,
        note: String::new(),
    };
    let (max, med) = (report.ratio_max(), report.ratio_median());
    report.pass = max.is_finite() && med > 0.0 && max <= 3.0 * med;
    report.note = format!("max / median = {:.4}", max / med);
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_values() {
        assert!((3.0 * theta1(3, 0.5, 2.0) - 0.75).abs() < 1e-15);
        assert!((2.0 * theta1(2, 0.5, 3.0) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn bump_derivative_matches_difference_quotient() {
        let h = 1e-6;
        for x in [-0.7, -0.2, 0.0, 0.4, 0.9] {
            let fd = (bump(x + h).0 - bump(x - h).0) / (2.0 * h);
            assert!((fd - bump(x).1).abs() < 1e-7);
        }
        assert_eq!(bump(1.0).0, 0.0);
    }

    #[test]
    fn trapezoid_integrates_lines_exactly() {
        let x = [0.0, 0.3, 1.0, 2.5];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        assert!((trapezoid(&x, &y) - 8.75).abs() < 1e-14);
    }

    #[test]
    fn increase_detection() {
        assert!(max_relative_increase(&[3.0, 2.0, 1.0]) < 0.0);
        assert!((max_relative_increase(&[1.0, 1.1, 1.0]) - 0.1).abs() < 1e-12);
    }
}
