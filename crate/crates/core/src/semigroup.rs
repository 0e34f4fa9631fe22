//! Implicit Euler solver for `∂ₜu + L^s(u^m) = 0` and the semigroup
//! properties of its trajectories.
//!
//! Each step solves `u + h L^s(u^m) = u_k` by projected, damped Newton.
//! With `z = W^{1/2} δ`, the Newton system `(I + h A D) δ = -F` becomes
//! `(S^{-s} + hD) z = S^{-s} W^{1/2}(-F)`, whose matrix is symmetric
//! positive definite and is factorised by Cholesky.

use std::sync::Arc;

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};

use crate::error::{invalid, Error, Result};
use crate::green::{green_profile, weighted_norm, GreenProfile};
use crate::manifold::RadialGrid;
use crate::spectral::{FractionalOperator, Power, RadialField};

/// Output and step times of a run. The first step starts at `t = 0`.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub times: Vec<f64>,
    /// Newton stops once `‖F‖∞ <= newton_tol · ‖u_k‖∞`.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Abort when the mass fraction beyond `r_max/2` exceeds this.
    pub boundary_mass_cap: Option<f64>,
    /// Accept `m = 1`, the linear fractional heat flow.
    pub linear_diagnostic: bool,
}

impl SolverConfig {
    pub fn new(times: Vec<f64>) -> Self {
        Self {
            times,
            newton_tol: 1e-10,
            newton_max_iter: 50,
            boundary_mass_cap: None,
            linear_diagnostic: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.times.is_empty() {
            return Err(invalid("times", "empty time grid"));
        }
        if !(self.times[0] > 0.0) {
            return Err(invalid("times", "first time must be positive"));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) || self.times.iter().any(|t| !t.is_finite()) {
            return Err(invalid("times", "times must be finite and strictly increasing"));
        }
        if !(self.newton_tol > 0.0) || self.newton_max_iter == 0 {
            return Err(invalid("newton_tol", "need a positive tolerance and iteration budget"));
        }
        Ok(())
    }
}

/// `t_min q^{k}`-type grid from `t_min` to `t_max` with ratio at most `q`.
pub fn geometric_times(t_min: f64, t_max: f64, q: f64) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_max > t_min) {
        return Err(invalid("t_min", format!("need 0 < t_min < t_max, got {t_min}, {t_max}")));
    }
    if !(q > 1.0) {
        return Err(invalid("q", format!("need q > 1, got {q}")));
    }
    let span = (t_max / t_min).ln();
    let k = (span / q.ln() - 1e-9).ceil().max(1.0) as usize;
    Ok((0..=k).map(|j| t_min * (span * j as f64 / k as f64).exp()).collect())
}

/// Insert the midpoint of every step, including the first one from zero.
pub fn refine_times(times: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * times.len());
    let mut prev = 0.0;
    for &t in times {
        out.push(0.5 * (prev + t));
        out.push(t);
        prev = t;
    }
    out
}

/// Diagnostics recorded at every time level.
#[derive(Debug, Clone, Copy)]
pub struct StepRecord {
    pub t: f64,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub weighted_rho0: f64,
    pub boundary_mass_fraction: f64,
    pub newton_iterations: usize,
    pub residual: f64,
}

/// Discrete solution at `t = 0` and at every configured time.
#[derive(Debug, Clone)]
pub struct Trajectory {
    grid: Arc<RadialGrid>,
    m: f64,
    s: f64,
    profiles: Vec<Vec<f64>>,
    records: Vec<StepRecord>,
}

impl Trajectory {
    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn records(&self) -> &[StepRecord] {
        &self.records
    }

    pub fn profile(&self, k: usize) -> RadialField {
        RadialField::new(self.grid.clone(), self.profiles[k].clone()).expect("finite profile")
    }

    pub fn profile_values(&self, k: usize) -> &[f64] {
        &self.profiles[k]
    }

    pub fn initial_mass(&self) -> f64 {
        self.records[0].l1
    }
}

/// Precomputed matrices of one fractional operator for repeated steps.
pub struct Stepper {
    op: FractionalOperator,
    m: f64,
    sqrt_w: Vec<f64>,
    s_pos: Mat<f64>,
    s_neg: Mat<f64>,
}

/// Outcome of one implicit step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub u: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

impl Stepper {
    pub fn new(op: &FractionalOperator, m: f64) -> Result<Self> {
        if !(m >= 1.0 && m.is_finite()) {
            return Err(invalid("m", format!("need m >= 1, got {m}")));
        }
        let sqrt_w = op.grid().weights().iter().map(|w| w.sqrt()).collect();
        Ok(Self {
            op: op.clone(),
            m,
            sqrt_w,
            s_pos: op.symmetric_matrix(Power::Positive),
            s_neg: op.symmetric_matrix(Power::Negative),
        })
    }

    pub fn operator(&self) -> &FractionalOperator {
        &self.op
    }

    fn matvec(a: &Mat<f64>, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let mut y = vec![0.0; n];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                let col = a.col(j);
                for (i, yi) in y.iter_mut().enumerate() {
                    *yi += col[i] * xj;
                }
            }
        }
        y
    }

    /// `L^s f` in value space.
    pub fn apply_power(&self, f: &[f64]) -> Vec<f64> {
        let x: Vec<f64> = f.iter().zip(&self.sqrt_w).map(|(v, s)| v * s).collect();
        let y = Self::matvec(&self.s_pos, &x);
        y.iter().zip(&self.sqrt_w).map(|(v, s)| v / s).collect()
    }

    fn residual(&self, h: f64, u: &[f64], prev: &[f64]) -> Vec<f64> {
        let phi: Vec<f64> = u.iter().map(|&v| v.powf(self.m)).collect();
        let a = self.apply_power(&phi);
        (0..u.len()).map(|i| h * a[i] + u[i] - prev[i]).collect()
    }

    fn merit(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.sqrt_w).map(|(v, s)| (v * s).powi(2)).sum::<f64>().sqrt()
    }

    /// Solve `u + h L^s(u^m) = prev` starting from `prev`.
    pub fn step(&self, t: f64, h: f64, prev: &[f64], tol: f64, max_iter: usize) -> Result<StepOutcome> {
        let n = prev.len();
        let scale = prev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return Ok(StepOutcome { u: vec![0.0; n], iterations: 0, residual: 0.0 });
        }
        let target = tol * scale;
        let mut u = prev.to_vec();
        let mut f = self.residual(h, &u, prev);
        let mut res = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut iterations = 0;
        while res > target {
            if iterations == max_iter {
                return Err(Error::NewtonStagnation { t, iterations, residual: res / scale });
            }
            iterations += 1;
            let b: Vec<f64> = f.iter().zip(&self.sqrt_w).map(|(v, s)| -v * s).collect();
            let rhs = Self::matvec(&self.s_neg, &b);
            let mut mat = self.s_neg.clone();
            for (i, &ui) in u.iter().enumerate() {
                mat[(i, i)] += h * self.m * ui.max(0.0).powf(self.m - 1.0);
            }
            let llt = mat.llt(Side::Lower).map_err(|e| Error::LinearSolve { t, detail: format!("{e:?}") })?;
            let mut z = Mat::from_fn(n, 1, |i, _| rhs[i]);
            llt.solve_in_place(z.as_mut());
            let delta: Vec<f64> = (0..n).map(|i| z[(i, 0)] / self.sqrt_w[i]).collect();
            let merit0 = self.merit(&f);
            let mut alpha = 1.0;
            loop {
                let trial: Vec<f64> =
                    u.iter().zip(&delta).map(|(a, d)| (a + alpha * d).max(0.0)).collect();
                let ft = self.residual(h, &trial, prev);
                let mt = self.merit(&ft);
                if mt <= (1.0 - 1e-4 * alpha) * merit0 || alpha < 1e-6 {
                    u = trial;
                    f = ft;
                    break;
                }
                alpha *= 0.5;
            }
            let next = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if !next.is_finite() {
                return Err(Error::NonFinite(format!("Newton iteration at t = {t}")));
            }
            res = next;
        }
        Ok(StepOutcome { u, iterations, residual: res / scale })
    }
}

/// One implicit step with fresh matrices.
pub fn implicit_euler_step(
    op: &FractionalOperator,
    m: f64,
    h: f64,
    prev: &RadialField,
    cfg: &SolverConfig,
) -> Result<StepOutcome> {
    if !(h > 0.0) {
        return Err(invalid("h", format!("need h > 0, got {h}")));
    }
    Stepper::new(op, m)?.step(h, h, prev.values(), cfg.newton_tol, cfg.newton_max_iter)
}

fn boundary_fraction(grid: &RadialGrid, u: &[f64]) -> f64 {
    let half = 0.5 * grid.r_max();
    let (mut outer, mut total) = (0.0, 0.0);
    for ((&v, &w), &r) in u.iter().zip(grid.weights()).zip(grid.nodes()) {
        total += v.abs() * w;
        if r >= half {
            outer += v.abs() * w;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        outer / total
    }
}

fn record(t: f64, u: &RadialField, green: &GreenProfile, iterations: usize, residual: f64) -> Result<StepRecord> {
    Ok(StepRecord {
        t,
        l1: u.lp_norm(1.0),
        l2: u.lp_norm(2.0),
        linf: u.sup_norm(),
        weighted_rho0: weighted_norm(u, green, 0.0)?.total(),
        boundary_mass_fraction: boundary_fraction(u.grid(), u.values()),
        newton_iterations: iterations,
        residual,
    })
}

/// Advance `u0` through every configured time.
pub fn evolve(op: &FractionalOperator, m: f64, u0: &RadialField, cfg: &SolverConfig) -> Result<Trajectory> {
    let stepper = Stepper::new(op, m)?;
    let green = green_profile(op)?;
    evolve_with(&stepper, &green, u0, cfg)
}

/// [`evolve`] reusing precomputed matrices and Green function.
pub fn evolve_with(
    stepper: &Stepper,
    green: &GreenProfile,
    u0: &RadialField,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    let m = stepper.m;
    if m == 1.0 && !cfg.linear_diagnostic {
        return Err(invalid("m", "m = 1 is only available as the linear diagnostic"));
    }
    if !Arc::ptr_eq(u0.grid(), stepper.op.grid()) {
        return Err(Error::GridMismatch);
    }
    let floor = -1e-12 * u0.sup_norm();
    if let Some(v) = u0.values().iter().find(|&&v| v < floor) {
        return Err(invalid("datum", format!("initial datum must be nonnegative, found {v}")));
    }
    let grid = u0.grid().clone();
    let mut u: Vec<f64> = u0.values().iter().map(|v| v.max(0.0)).collect();
    let mut profiles = vec![u.clone()];
    let mut records = vec![record(0.0, u0, green, 0, 0.0)?];
    let mut prev_t = 0.0;
    for &t in &cfg.times {
        let out = stepper.step(t, t - prev_t, &u, cfg.newton_tol, cfg.newton_max_iter)?;
        u = out.u;
        let field = RadialField::new(grid.clone(), u.clone())?;
        let rec = record(t, &field, green, out.iterations, out.residual)?;
        if let Some(cap) = cfg.boundary_mass_cap {
            if rec.boundary_mass_fraction > cap {
                return Err(Error::BoundaryContamination { t, fraction: rec.boundary_mass_fraction, cap });
            }
        }
        records.push(rec);
        profiles.push(u.clone());
        prev_t = t;
    }
    Ok(Trajectory { grid, m, s: stepper.op.s(), profiles, records })
}

/// Result of comparing two trajectories pointwise.
#[derive(Debug, Clone)]
pub struct OrderReport {
    /// Largest `u - v` over all nodes and times.
    pub max_violation: f64,
    /// `‖(u - v)_+‖₁` at every time.
    pub positive_part_l1: Vec<f64>,
}

impl OrderReport {
    pub fn ordered(&self, tol: f64) -> bool {
        self.max_violation <= tol
    }

    /// `∫(u_k - v_k)₊ <= ∫(u_0 - v_0)₊ + tol` at every time.
    pub fn contraction_holds(&self, tol: f64) -> bool {
        let first = self.positive_part_l1[0];
        self.positive_part_l1.iter().all(|&p| p <= first + tol)
    }
}

fn same_run_layout(u: &Trajectory, v: &Trajectory) -> Result<()> {
    if !Arc::ptr_eq(&u.grid, &v.grid) {
        return Err(Error::GridMismatch);
    }
    if u.times() != v.times() {
        return Err(Error::Precondition("trajectories have different time grids".into()));
    }
    Ok(())
}

pub fn check_order_preservation(u: &Trajectory, v: &Trajectory) -> Result<OrderReport> {
    same_run_layout(u, v)?;
    let w = u.grid.weights();
    let mut max_violation = f64::NEG_INFINITY;
    let mut positive_part_l1 = Vec::with_capacity(u.len());
    for k in 0..u.len() {
        let mut pos = 0.0;
        for i in 0..w.len() {
            let d = u.profiles[k][i] - v.profiles[k][i];
            max_violation = max_violation.max(d);
            pos += d.max(0.0) * w[i];
        }
        positive_part_l1.push(pos);
    }
    Ok(OrderReport { max_violation, positive_part_l1 })
}

/// Largest step ratio `‖u_{k+1}‖_p / ‖u_k‖_p` along the trajectory.
pub fn check_lp_nonexpansivity(traj: &Trajectory, p: f64) -> f64 {
    let norms: Vec<f64> = (0..traj.len()).map(|k| traj.profile(k).lp_norm(p)).collect();
    norms
        .windows(2)
        .map(|w| if w[0] > 0.0 { w[1] / w[0] } else if w[1] > 0.0 { f64::INFINITY } else { 1.0 })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Largest decrease of `t^{1/(m-1)} u(t, x)` between consecutive recorded
/// times, relative to `max_x t_k^{1/(m-1)} u(t_k, x)`.
pub fn check_time_monotonicity(traj: &Trajectory) -> Result<f64> {
    if !(traj.m > 1.0) {
        return Err(Error::Precondition("time monotonicity needs m > 1".into()));
    }
    let e = 1.0 / (traj.m - 1.0);
    let times = traj.times();
    let mut worst: f64 = 0.0;
    for k in 1..traj.len() - 1 {
        let (a, b) = (times[k].powf(e), times[k + 1].powf(e));
        let scale = a * traj.records[k].linf;
        if scale == 0.0 {
            continue;
        }
        for i in 0..traj.grid.len() {
            let drop = a * traj.profiles[k][i] - b * traj.profiles[k + 1][i];
            worst = worst.max(drop / scale);
        }
    }
    Ok(worst)
}

/// Truncation level `(R, H)` of a monotone approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    pub radius: f64,
    pub height: f64,
}

/// Outcome of solving along increasing truncations of one datum.
#[derive(Debug, Clone)]
pub struct MonotoneSequence {
    pub levels: Vec<Truncation>,
    pub trajectories: Vec<Trajectory>,
    /// `∫ (u_{k+1} - u_k)(t) G` at each time for consecutive levels.
    pub green_increments: Vec<Vec<f64>>,
}

impl MonotoneSequence {
    pub fn limit(&self) -> &Trajectory {
        self.trajectories.last().expect("nonempty sequence")
    }
}

/// Solve along `levels` and verify that the solutions increase with the
/// truncation up to `tol_neg`.
pub fn monotone_approximation(
    stepper: &Stepper,
    green: &GreenProfile,
    datum: &RadialField,
    levels: &[Truncation],
    cfg: &SolverConfig,
    tol_neg: f64,
) -> Result<MonotoneSequence> {
    if levels.is_empty() {
        return Err(invalid("levels", "need at least one truncation"));
    }
    let mut trajectories: Vec<Trajectory> = Vec::with_capacity(levels.len());
    let mut green_increments = Vec::new();
    for lvl in levels {
        let u0 = crate::datum::truncate(datum, lvl.radius, lvl.height);
        let traj = evolve_with(stepper, green, &u0, cfg)?;
        if let Some(prev) = trajectories.last() {
            let times = traj.times();
            let g = green.values();
            let w = traj.grid.weights();
            let mut inc = Vec::with_capacity(traj.len());
            for k in 0..traj.len() {
                let mut acc = 0.0;
                for i in 0..w.len() {
                    let d = traj.profiles[k][i] - prev.profiles[k][i];
                    let scale = tol_neg * traj.records[k].linf.max(f64::MIN_POSITIVE);
                    if d < -scale {
                        return Err(Error::OrderViolation {
                            t: times[k],
                            r: traj.grid.nodes()[i],
                            excess: -d,
                        });
                    }
                    acc += d * g[i] * w[i];
                }
                inc.push(acc);
            }
            green_increments.push(inc);
        }
        trajectories.push(traj);
    }
    Ok(MonotoneSequence { levels: levels.to_vec(), trajectories, green_increments })
}

/// Largest relative `L∞` distance between two trajectories over all times.
pub fn sup_distance(u: &Trajectory, v: &Trajectory) -> Result<f64> {
    same_run_layout(u, v)?;
    let mut worst: f64 = 0.0;
    for k in 1..u.len() {
        let scale = u.records[k].linf.max(v.records[k].linf);
        let d = u.profiles[k]
            .iter()
            .zip(&v.profiles[k])
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if scale > 0.0 {
            worst = worst.max(d / scale);
        }
    }
    Ok(worst)
}
