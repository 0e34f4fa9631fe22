//! Verdicts evaluated on a finished run.

use std::f64::consts::PI;

use fracpme::datum;
use fracpme::estimates::{
    fit_linf_decay, fit_smoothing_exponent, fundamental_bound_check, green_moment_series, hyperbolic_longtime_check,
    max_relative_increase, sample_triples, wds_residual, weighted_smoothing_check, TestFunction,
};
use fracpme::green::{
    ball_integral_growth, bump_sum_report, decay_class_report, dirac_limit_errors, green_ball_integral,
    green_comparison_check, potential_two_sided_check, rho_sample, weighted_norm, weighted_norm_sup, GreenProfile,
};
use fracpme::semigroup::{
    check_lp_nonexpansivity, check_order_preservation, check_time_monotonicity, monotone_approximation,
    refine_times, sup_distance, SolverConfig, Trajectory, Truncation,
};
use fracpme::spectral::{faber_krahn_check, subordination_identity_check, Power, RadialField};

use crate::closed_form::reference_green;
use crate::config::{CheckName, WarpingKind};
use crate::pipeline::Context;

/// One line of `checks.csv`; `pass` is empty for diagnostics.
#[derive(Debug, Clone)]
pub struct Row {
    pub quantity: String,
    pub parameter: String,
    pub value: f64,
    pub bound: String,
    pub pass: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub pass: bool,
    pub note: String,
    pub rows: Vec<Row>,
}

struct Rows {
    check: &'static str,
    rows: Vec<Row>,
}

impl Rows {
    fn new(check: CheckName) -> Self {
        Self { check: check.as_str(), rows: Vec::new() }
    }

    fn push(&mut self, quantity: &str, parameter: impl Into<String>, value: f64, bound: impl Into<String>, pass: bool) -> bool {
        self.rows.push(Row {
            quantity: format!("{}/{quantity}", self.check),
            parameter: parameter.into(),
            value,
            bound: bound.into(),
            pass: Some(pass),
        });
        pass
    }

    fn info(&mut self, quantity: &str, parameter: impl Into<String>, value: f64) {
        self.rows.push(Row {
            quantity: format!("{}/{quantity}", self.check),
            parameter: parameter.into(),
            value,
            bound: String::new(),
            pass: None,
        });
    }

    fn finish(self, mut note: String) -> CheckOutcome {
        let failed: Vec<&str> = self
            .rows
            .iter()
            .filter(|r| r.pass == Some(false))
            .map(|r| &r.quantity[self.check.len() + 1..])
            .collect();
        if !failed.is_empty() {
            note = format!("{note}; out of bounds: {}", failed.join(", "));
        }
        let pass = !self.rows.is_empty() && failed.is_empty();
        CheckOutcome { name: self.check, pass, note, rows: self.rows }
    }
}

type CheckResult = fracpme::Result<CheckOutcome>;

pub fn evaluate(ctx: &Context, traj: &Trajectory) -> Vec<CheckOutcome> {
    ctx.cfg
        .checks
        .iter()
        .map(|&c| {
            log::info!("check {}", c.as_str());
            let result = match c {
                CheckName::Subordination => subordination(ctx),
                CheckName::GreenClosedForm => green_closed_form(ctx),
                CheckName::BallGrowth => ball_growth(ctx),
                CheckName::GreenComparison => green_comparison(ctx),
                CheckName::Potential => potential(ctx),
                CheckName::FaberKrahn => faber_krahn(ctx),
                CheckName::Semigroup => semigroup(ctx, traj),
                CheckName::FundamentalBound => fundamental_bound(ctx, traj),
                CheckName::SmoothingRate => smoothing_rate(ctx, traj),
                CheckName::HyperbolicAcceleration => hyperbolic_acceleration(ctx, traj),
                CheckName::WeightedSmoothing => weighted_smoothing(ctx, traj),
                CheckName::DecayClass => decay_class(ctx),
                CheckName::BumpSum => bump_sum(ctx),
                CheckName::WdsResidual => wds(ctx, traj),
                CheckName::MonotoneLimit => monotone_limit(ctx),
            };
            result.unwrap_or_else(|e| CheckOutcome {
                name: c.as_str(),
                pass: false,
                note: format!("could not be evaluated: {e}"),
                rows: Vec::new(),
            })
        })
        .collect()
}

/// Slope of `log ‖u‖∞` against `log t` over the last decade of the run.
pub fn diagnostics(ctx: &Context, traj: &Trajectory) -> Vec<Row> {
    let t_end = ctx.cfg.t_max;
    let window = ((0.1 * t_end).max(ctx.cfg.t_min), t_end);
    match fit_linf_decay(traj, window) {
        Ok(fit) => vec![Row {
            quantity: "diagnostic/late_linf_slope".into(),
            parameter: format!("t in [{}, {}]", window.0, window.1),
            value: fit.slope,
            bound: String::new(),
            pass: None,
        }],
        Err(e) => {
            log::info!("late slope not available: {e}");
            Vec::new()
        }
    }
}

fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

fn subordination(ctx: &Context) -> CheckResult {
    let mut rows = Rows::new(CheckName::Subordination);
    let lambdas = ctx.spectrum.eigenvalues();
    let last = lambdas.len() - 1;
    let mut sub = 0.0f64;
    for j in 0..=16 {
        sub = sub.max(subordination_identity_check(ctx.cfg.s, lambdas[j * last / 16])?);
    }
    let f = RadialField::from_fn(ctx.op.grid().clone(), |r| (-r * r).exp() * (1.0 + r));
    let back = ctx.op.apply(Power::Positive, &ctx.op.apply(Power::Negative, &f)?)?;
    let roundtrip = max_rel_diff(back.values(), f.values());
    rows.push("max_rel_err", "17 eigenvalues", sub, "< 1e-8", sub < 1e-8);
    rows.push("roundtrip_rel_err", "L^s L^-s f", roundtrip, "< 1e-8", roundtrip < 1e-8);
    Ok(rows.finish(format!("subordination {sub:.2e}, roundtrip {roundtrip:.2e}")))
}

fn green_closed_form(ctx: &Context) -> CheckResult {
    let mut rows = Rows::new(CheckName::GreenClosedForm);
    let exact = reference_green(&ctx.cfg)
        .ok_or_else(|| fracpme::Error::Precondition("no closed form for this manifold".into()))?;
    let grid = ctx.op.grid();
    let (lo, hi) = match ctx.cfg.warping {
        WarpingKind::Euclidean => (10.0 * grid.r_max() / grid.len() as f64, grid.r_max() / 3.0),
        _ => (0.2, 8.0f64.min(grid.r_max() / 2.0)),
    };
    let mut worst = 0.0f64;
    let mut worst_r = lo;
    for i in grid.nodes_in(lo, hi) {
        let r = grid.nodes()[i];
        let g = exact(r);
        let err = ((ctx.green.values()[i] - g) / g).abs();
        if err > worst {
            worst = err;
            worst_r = r;
        }
    }
    let window = format!("r in [{lo:.4}, {hi:.4}]");
    rows.push("max_rel_err", window.clone(), worst, "< 0.02", worst < 0.02);
    if ctx.cfg.warping == WarpingKind::Euclidean && ctx.cfg.dimension == 3 && ctx.cfg.s == 0.5 {
        // The s = 1/2 kernel of the Dirichlet ball of radius R is the Riesz
        // kernel times x cot x, x = πr/2R.
        let mut truncated = 0.0f64;
        for i in grid.nodes_in(lo, hi) {
            let r = grid.nodes()[i];
            let x = PI * r / (2.0 * grid.r_max());
            let g = exact(r) * x / x.tan();
            truncated = truncated.max(((ctx.green.values()[i] - g) / g).abs());
        }
        rows.info("dirichlet_ball_rel_err", window, truncated);
    }
    Ok(rows.finish(format!("max relative error {worst:.4} at r = {worst_r:.3}")))
}

fn ball_growth(ctx: &Context) -> CheckResult {
    let mut rows = Rows::new(CheckName::BallGrowth);
    let s = ctx.cfg.s;
    let note;
    if ctx.cfg.warping == WarpingKind::Euclidean {
        let radii: Vec<f64> = (0..=15).map(|k| 0.5 * 8f64.powf(k as f64 / 15.0)).collect();
        let fit = ball_integral_growth(&ctx.green, &radii)?.fit;
        rows.push("exponent", "R in [0.5, 4]", fit.slope, format!("{} +- 0.03", 2.0 * s), (fit.slope - 2.0 * s).abs() <= 0.03);
        note = format!("exponent {:.4} vs {}", fit.slope, 2.0 * s);
        if ctx.cfg.dimension == 3 && s == 0.5 {
            let err = radii
                .iter()
                .map(|&r| ((green_ball_integral(&ctx.green, r) - 2.0 / PI * r) / (2.0 / PI * r)).abs())
                .fold(0.0, f64::max);
            rows.push("exact_rel_err", "(2/pi) R", err, "< 0.01", err < 0.01);
        }
    } else {
        let radii: Vec<f64> = (0..=12).map(|k| 2.0 * 4f64.powf(k as f64 / 12.0)).collect();
        let fit = ball_integral_growth(&ctx.green, &radii)?.fit;
        rows.push("exponent", "R in [2, 8]", fit.slope, format!("<= {}", s + 0.05), fit.slope <= s + 0.05);
        note = format!("exponent {:.4}, bound {}", fit.slope, s + 0.05);
    }
    Ok(rows.finish(note))
}

fn green_comparison(ctx: &Context) -> CheckResult {
    let mut rows = Rows::new(CheckName::GreenComparison);
    let c = ctx.cfg.comparison_curvature.unwrap_or(0.0);
    let radii: Vec<f64> = [0.5, 1.0, 2.0, 4.0].into_iter().filter(|&r| r < 0.5 * ctx.cfg.r_max).collect();
    let grid = (ctx.cfg.r_max, ctx.cfg.n_nodes, ctx.cfg.grading);
    let rep = green_comparison_check(&ctx.manifold, c, ctx.cfg.s, grid, &radii, 1e-3)?;
    let param = format!("against curvature -{c}");
    rows.push("pointwise_max_ratio", param.clone(), rep.pointwise_max_ratio, "<= 1.001", rep.pointwise_max_ratio <= 1.001);
    rows.push("ball_max_ratio", param, rep.ball_max_ratio, "<= 1.001", rep.ball_max_ratio <= 1.001);
    Ok(rows.finish(format!(
        "max ratios pointwise {:.6}, on balls {:.6}",
        rep.pointwise_max_ratio, rep.ball_max_ratio
    )))
}

fn potential(ctx: &Context) -> CheckResult {
    let mut rows = Rows::new(CheckName::Potential);
    let window = (0.1, 6.0f64.min(0.5 * ctx.cfg.r_max));
    let mut worst = 0.0f64;
    for sigma in [0.25, 0.5, 1.0] {
        let rep = potential_two_sided_check(&ctx.op, &ctx.green, sigma, window)?;
        let spread = rep.spread();
        worst = worst.max(spread);
        rows.push("spread", format!("sigma = {sigma}"), spread, "< 50", rep.is_two_sided() && spread < 50.0);
    }
    let sigmas = [1.0, 0.5, 0.25, 0.125, 0.0625];
    let errs = dirac_limit_errors(&ctx.op, &ctx.green, &sigmas, 2.0)?;
    let monotone = errs.windows(2).all(|w| w[1].1 < w[0].1);
    for (k, (sigma, e)) in errs.iter().enumerate() {
        let ok = k == 0 || *e < errs[k - 1].1;
        rows.push("dirac_limit_rel_err", format!("sigma = {sigma}, r = 2"), *e, "decreasing in sigma", ok);
    }
    Ok(rows.finish(format!("largest spread {worst:.3}; Dirac limit monotone: {monotone}")))
}

fn faber_krahn(ctx: &Context) -> CheckResult {
    let mut rows = Rows::new(CheckName::FaberKrahn);
    let constant = PI * PI * (4.0 * PI / 3.0f64).powf(2.0 / 3.0);
    let radii: Vec<f64> = [2.0, 4.0, 8.0].into_iter().filter(|&r| r <= ctx.cfg.r_max).collect();
    let rep = faber_krahn_check(ctx.op.grid(), &radii)?;
    for row in &rep.rows {
        let param = format!("R = {:.4}", row.radius);
        if ctx.cfg.warping == WarpingKind::Euclidean {
            let ok = (row.product / constant - 1.0).abs() <= 0.01;
            rows.push("product", param, row.product, format!("{constant:.4} +- 1%"), ok);
        } else {
            rows.push("product", param, row.product, format!(">= {constant:.4}"), row.product >= constant);
        }
    }
    for r in &rep.skipped {
        rows.push("unresolved_radius", format!("R = {r}"), *r, "resolved", false);
    }
    Ok(rows.finish(format!("smallest product {:.4} (Euclidean constant {constant:.4})", rep.constant)))
}

fn semigroup(ctx: &Context, traj: &Trajectory) -> CheckResult {
    let mut rows = Rows::new(CheckName::Semigroup);
    let slack = 1e-10;
    for (p, label) in [(1.0, "p = 1"), (2.0, "p = 2"), (f64::INFINITY, "p = inf")] {
        let r = check_lp_nonexpansivity(traj, p);
        rows.push("lp_step_ratio", label, r, "<= 1 + 1e-10", r <= 1.0 + slack);
    }
    let (v0, what) = match (ctx.cfg.datum, ctx.cfg.datum_radius) {
        (crate::config::DatumKind::Ball, Some(r)) if 2.0 * r < ctx.cfg.r_max => {
            (datum::ball_indicator(ctx.op.grid(), 2.0 * r)?, format!("v0 = ball of radius {}", 2.0 * r))
        }
        _ => (ctx.u0.map(|v| 2.0 * v), "v0 = 2 u0".to_string()),
    };
    let v = ctx.evolve(&v0, &ctx.solver).map_err(|e| fracpme::Error::Precondition(e.to_string()))?;
    let order = check_order_preservation(traj, &v)?;
    rows.push("order_violation", what.clone(), order.max_violation, "<= 1e-10", order.ordered(slack));
    let last = *order.positive_part_l1.last().unwrap_or(&0.0);
    rows.push("positive_part_l1", what, last, "<= initial + 1e-10", order.contraction_holds(slack));
    let drop = check_time_monotonicity(traj)?;
    rows.push("time_monotonicity_drop", "t^(1/(m-1)) u", drop, "<= 1e-10", drop <= slack);
    let moments = green_moment_series(traj, &ctx.green, 0.0)?;
    let inc = max_relative_increase(&moments);
    rows.push("green_moment_increase", "rho = 0", inc, "<= 1e-10", inc <= slack);
    Ok(rows.finish(format!("order violation {:.2e}, time drop {drop:.2e}, moment increase {inc:.2e}", order.max_violation)))
}

fn fundamental_bound(ctx: &Context, traj: &Trajectory) -> CheckResult {
    let mut rows = Rows::new(CheckName::FundamentalBound);
    let mut triples = sample_triples(traj, 15);
    let step = (traj.len().saturating_sub(2) / 6).max(1);
    triples.extend((1..=5).map(|j| (j * step, j * step + 1, j * step + 1)).filter(|t| t.2 < traj.len()));
    let result = fundamental_bound_check(traj, &ctx.green, &triples)?;
    let failures = result.iter().filter(|r| !r.holds(1e-3)).count();
    let tightest = result
        .iter()
        .map(|r| (r.middle / r.lower).min(r.upper / r.middle))
        .fold(f64::INFINITY, f64::min);
    rows.push("violations", format!("{} triples, slack 1e-3", result.len()), failures as f64, "0", failures == 0);
    rows.info("tightest_margin", "min(middle/lower, upper/middle)", tightest);
    let corrupted = GreenProfile::from_values(
        traj.grid().clone(),
        ctx.cfg.s,
        ctx.green.values().iter().map(|g| 0.9 * g).collect(),
    )?;
    let flagged = fundamental_bound_check(traj, &corrupted, &triples)?.iter().filter(|r| !r.holds(1e-3)).count();
    rows.push("control_flagged", "Green profile scaled by 0.9", flagged as f64, ">= 1", flagged > 0);
    Ok(rows.finish(format!("{failures} violations in {} triples; corrupted control flagged on {flagged}", result.len())))
}

fn smoothing_rate(ctx: &Context, traj: &Trajectory) -> CheckResult {
    let mut rows = Rows::new(CheckName::SmoothingRate);
    let window = ctx.fit_window();
    let rep = fit_smoothing_exponent(traj, window, 0.08)?;
    let fit = rep.fit.expect("fit present");
    let target = rep.target_exponent.unwrap_or(f64::NAN);
    let param = format!("t in [{}, {}]", window.0, window.1);
    rows.push("slope", param.clone(), fit.slope, format!("{target} +- 0.08"), rep.pass);
    rows.info("slope_stderr", param.clone(), fit.slope_stderr);
    rows.info("ratio_spread", param, rep.ratio_max() / rep.ratio_min());
    Ok(rows.finish(format!("slope {:.4} vs {target:.4}", fit.slope)))
}

fn hyperbolic_acceleration(ctx: &Context, traj: &Trajectory) -> CheckResult {
    let mut rows = Rows::new(CheckName::HyperbolicAcceleration);
    let rep = hyperbolic_longtime_check(traj, ctx.cfg.curvature)?;
    let first = rep.ratio_series.first().map_or(f64::NAN, |p| p.1);
    let ratio = rep.ratio_max() / first;
    rows.push("ratio_max_over_threshold_value", "t in [t*, 50 t*]", ratio, "<= 2", ratio <= 2.0);
    let fit = rep.fit.expect("fit present");
    let param = format!("t in [{:.4}, {:.4}]", rep.fit_window.0, rep.fit_window.1);
    rows.push("late_slope", param, fit.slope, "<= -0.9", fit.slope <= -0.9);
    Ok(rows.finish(rep.note.clone()))
}

fn weighted_smoothing(ctx: &Context, traj: &Trajectory) -> CheckResult {
    let mut rows = Rows::new(CheckName::WeightedSmoothing);
    let norm = weighted_norm_sup(&ctx.u0, &ctx.green, &rho_sample(ctx.op.grid()))?.total();
    let curved = ctx.cfg.warping != WarpingKind::Euclidean;
    let reports = weighted_smoothing_check(traj, Some(norm), curved)?;
    rows.info("weighted_norm", "sup over centres", norm);
    let gated = if curved { "weighted_long" } else { "weighted_short" };
    let mut note = String::new();
    for rep in &reports {
        let param = format!("{} t in [{:.4e}, {:.4e}]", rep.regime, rep.fit_window.0, rep.fit_window.1);
        let value = rep.ratio_max() / rep.ratio_median();
        if rep.regime == gated {
            rows.push("max_over_median", param, value, "<= 3", rep.pass);
            note = format!("{}: {}", rep.regime, rep.note);
        } else {
            rows.info("max_over_median", param, value);
        }
    }
    Ok(rows.finish(note))
}

fn decay_class(ctx: &Context) -> CheckResult {
    let mut rows = Rows::new(CheckName::DecayClass);
    let a = ctx.cfg.datum_a.unwrap_or(1.0);
    let member = a > ctx.cfg.tail_threshold();
    let rep = decay_class_report(a, &ctx.green)?;
    let param = format!("a = {a}");
    let expect = if member { "< 1 (converges)" } else { ">= 1 (diverges)" };
    rows.push("outer_increment_ratio", param.clone(), rep.increment_ratio, expect, rep.converges() == member);
    if member && ctx.cfg.warping == WarpingKind::Euclidean {
        rows.push("outer_increment_ratio_bound", param.clone(), rep.increment_ratio, "< 0.5", rep.increment_ratio < 0.5);
    }
    if member && ctx.cfg.warping == WarpingKind::Hyperbolic {
        rows.push("l1_increment_ratio", param.clone(), rep.mass_increment_ratio, ">= 1 (not integrable)", !rep.mass_converges());
    } else {
        rows.info("l1_increment_ratio", param.clone(), rep.mass_increment_ratio);
    }
    rows.info("weighted_norm", param, rep.norm.total());
    Ok(rows.finish(format!(
        "outer increment ratio {:.4}: {}",
        rep.increment_ratio,
        if rep.converges() { "converges" } else { "diverges" }
    )))
}

fn bump_sum(ctx: &Context) -> CheckResult {
    let mut rows = Rows::new(CheckName::BumpSum);
    let j = ctx.cfg.datum_j.unwrap_or(1);
    let report = bump_sum_report(&ctx.green, j)?;
    let mut prev_inc: Option<f64> = None;
    let mut prev_pole = 0.0;
    for row in &report {
        let param = format!("J = {}", row.count);
        rows.push("l1", param.clone(), row.l1, format!("{} +- 1e-9", row.count), (row.l1 - row.count as f64).abs() < 1e-9);
        let inc = row.weighted_pole - prev_pole;
        let ok = inc > 0.0 && prev_inc.map_or(true, |p| inc < 0.5 * p);
        rows.push("pole_weighted_increment", param, inc, "> 0, below half the previous", ok);
        prev_inc = Some(inc);
        prev_pole = row.weighted_pole;
    }
    if report.len() >= 2 {
        let (a, b) = (&report[report.len() - 2], &report[report.len() - 1]);
        let growth = (b.weighted_sup - a.weighted_sup) / (b.l1 - a.l1);
        rows.push("weighted_over_l1_growth", format!("J = {} -> {}", a.count, b.count), growth, "< 0.1", growth < 0.1);
    }
    Ok(rows.finish(format!("L1 grows by one per bump; weighted norm saturates at {prev_pole:.4}")))
}

fn wds(ctx: &Context, traj: &Trajectory) -> CheckResult {
    let mut rows = Rows::new(CheckName::WdsResidual);
    let mut fine_cfg: SolverConfig = ctx.solver.clone();
    fine_cfg.times = refine_times(&ctx.solver.times);
    let refined = ctx.evolve(&ctx.u0, &fine_cfg).map_err(|e| fracpme::Error::Precondition(e.to_string()))?;
    let (lo, hi) = (10.0 * ctx.cfg.t_min, 0.8 * ctx.cfg.t_max);
    let g = (hi / lo).powf(1.0 / 3.0);
    let sigma_cap = 0.45 * ctx.cfg.r_max;
    let tests = [
        TestFunction { sigma: 1.0f64.min(sigma_cap), t_lo: lo, t_hi: lo * g.powf(1.5) },
        TestFunction { sigma: 2.0f64.min(sigma_cap), t_lo: lo * g.powf(0.75), t_hi: lo * g.powf(2.25) },
        TestFunction { sigma: 3.0f64.min(sigma_cap), t_lo: lo * g.powf(1.5), t_hi: hi },
    ];
    let mut worst = 0.0f64;
    for t in &tests {
        let coarse = wds_residual(traj, &ctx.op, t)?;
        let fine = wds_residual(&refined, &ctx.op, t)?;
        let param = format!("sigma = {}, t in [{:.4}, {:.4}]", t.sigma, t.t_lo, t.t_hi);
        worst = worst.max(coarse.abs());
        rows.push("residual", param.clone(), coarse, "|r| < 0.02", coarse.abs() < 0.02);
        let ratio = coarse / fine;
        rows.push("refinement_ratio", param, ratio, "2 +- 0.6", (ratio - 2.0).abs() <= 0.6);
    }
    Ok(rows.finish(format!("largest residual {worst:.3e}")))
}

fn monotone_limit(ctx: &Context) -> CheckResult {
    let mut rows = Rows::new(CheckName::MonotoneLimit);
    let full = ctx.cfg.r_max;
    let top = ctx.u0.sup_norm();
    let radius_first: Vec<Truncation> = [2.0, 4.0, 8.0]
        .into_iter()
        .filter(|&r| r < full)
        .chain(std::iter::once(full))
        .map(|radius| Truncation { radius, height: top })
        .collect();
    let height_first: Vec<Truncation> = [0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|&h| Truncation { radius: full, height: h * top })
        .collect();
    let a = monotone_approximation(&ctx.stepper, &ctx.green, &ctx.u0, &radius_first, &ctx.solver, 1e-10)?;
    let b = monotone_approximation(&ctx.stepper, &ctx.green, &ctx.u0, &height_first, &ctx.solver, 1e-10)?;
    let distance = sup_distance(a.limit(), b.limit())?;
    rows.push("limit_distance", "radius-first vs height-first", distance, "<= 1e-3", distance <= 1e-3);
    for (name, seq) in [("radius-first", &a), ("height-first", &b)] {
        let mut worst = 0.0f64;
        for w in seq.trajectories.windows(2) {
            let base = weighted_norm(&diff(&w[1].profile(0), &w[0].profile(0)), &ctx.green, 0.0)?.total();
            for k in 0..w[0].len() {
                let d = weighted_norm(&diff(&w[1].profile(k), &w[0].profile(k)), &ctx.green, 0.0)?.total();
                worst = worst.max(d / base);
            }
        }
        rows.info("weighted_decrement_constant", name, worst);
    }
    Ok(rows.finish(format!("limits differ by {distance:.2e} relative in L^inf")))
}

fn diff(a: &RadialField, b: &RadialField) -> RadialField {
    let values = a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect();
    RadialField::new(a.grid().clone(), values).expect("same grid")
}
