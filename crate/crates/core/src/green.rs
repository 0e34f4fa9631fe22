//! Green function of the fractional Laplacian and the Green-weighted
//! norms built from it.

use std::sync::Arc;

use crate::datum;
use crate::error::{invalid, Error, Result};
use crate::fit::{power_law, LineFit};
use crate::manifold::{unit_sphere_area, ModelManifold, RadialGrid};
use crate::quadrature::GaussRule;
use crate::spectral::{build_spectrum, FractionalOperator, Power, RadialField};

/// `G(r) = L^{-s} δ_0` on the grid, with a smooth interpolant in distance.
#[derive(Debug, Clone)]
pub struct GreenProfile {
    grid: Arc<RadialGrid>,
    s: f64,
    values: Vec<f64>,
    /// Nodes `0..positive` carry strictly positive values.
    positive: usize,
    log_r: Vec<f64>,
    log_g: Vec<f64>,
    slopes: Vec<f64>,
}

/// Green function with pole at the innermost node.
pub fn green_profile(op: &FractionalOperator) -> Result<GreenProfile> {
    let grid = op.grid().clone();
    let delta = RadialField::dirac(grid.clone(), 0);
    let g = op.apply(Power::Negative, &delta)?;
    GreenProfile::from_values(grid, op.s(), g.into_values())
}

/// The same profile as a direct eigenfunction sum `Σ λ^{-s} φ_j(0) φ_j(r)`.
pub fn green_by_eigensum(op: &FractionalOperator) -> Vec<f64> {
    let spectrum = op.spectrum();
    let n = spectrum.len();
    let mut acc = vec![0.0; n];
    for (j, &l) in spectrum.eigenvalues().iter().enumerate() {
        let phi = spectrum.eigenfunction(j);
        let c = l.powf(-op.s()) * phi.values()[0];
        for (a, p) in acc.iter_mut().zip(phi.values()) {
            *a += c * p;
        }
    }
    acc
}

impl GreenProfile {
    pub fn from_values(grid: Arc<RadialGrid>, s: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid("values", "length differs from the grid"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("computing the Green function".into()));
        }
        let positive = values.iter().position(|&v| !(v > 0.0)).unwrap_or(values.len());
        if positive < 2 {
            return Err(Error::Precondition("Green function is not positive near the pole".into()));
        }
        let log_r: Vec<f64> = grid.nodes()[..positive].iter().map(|r| r.ln()).collect();
        let log_g: Vec<f64> = values[..positive].iter().map(|g| g.ln()).collect();
        let slopes = monotone_slopes(&log_r, &log_g);
        Ok(Self { grid, s, values, positive, log_r, log_g, slopes })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn as_field(&self) -> RadialField {
        RadialField::new(self.grid.clone(), self.values.clone()).expect("finite by construction")
    }

    /// `G` at geodesic distance `d` from the pole.
    ///
    /// Constant below the first node, monotone cubic Hermite in log-log
    /// coordinates across the nodes, then linear decay to zero at `r_max`.
    pub fn at_distance(&self, d: f64) -> f64 {
        let r = self.grid.nodes();
        let last = self.positive - 1;
        if d <= r[0] {
            return self.values[0];
        }
        let r_end = if self.positive == self.values.len() { self.grid.r_max() } else { r[self.positive] };
        if d >= r_end {
            return 0.0;
        }
        if d >= r[last] {
            return self.values[last] * (r_end - d) / (r_end - r[last]);
        }
        let x = d.ln();
        let k = self.log_r.partition_point(|&v| v <= x).clamp(1, last) - 1;
        let h = self.log_r[k + 1] - self.log_r[k];
        let t = (x - self.log_r[k]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let y = (2.0 * t3 - 3.0 * t2 + 1.0) * self.log_g[k]
            + (t3 - 2.0 * t2 + t) * h * self.slopes[k]
            + (-2.0 * t3 + 3.0 * t2) * self.log_g[k + 1]
            + (t3 - t2) * h * self.slopes[k + 1];
        y.exp()
    }
}

fn monotone_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / (x[k + 1] - x[k])).collect();
    let mut m = vec![0.0; n];
    m[0] = delta[0];
    m[n - 1] = delta[n - 2];
    for k in 1..n - 1 {
        m[k] = if delta[k - 1] * delta[k] <= 0.0 { 0.0 } else { 0.5 * (delta[k - 1] + delta[k]) };
    }
    for k in 0..n - 1 {
        if delta[k] == 0.0 {
            m[k] = 0.0;
            m[k + 1] = 0.0;
            continue;
        }
        let a = m[k] / delta[k];
        let b = m[k + 1] / delta[k];
        let s = a * a + b * b;
        if s > 9.0 {
            let tau = 3.0 / s.sqrt();
            m[k] = tau * a * delta[k];
            m[k + 1] = tau * b * delta[k];
        }
    }
    m
}

/// `∫_{B_R} G dμ`, with the cell cut by the sphere counted fractionally.
pub fn green_ball_integral(green: &GreenProfile, radius: f64) -> f64 {
    green
        .grid
        .ball_coverage(radius)
        .iter()
        .zip(&green.values)
        .map(|(c, g)| c * g)
        .sum()
}

/// Growth of `R ↦ ∫_{B_R} G` and its fitted power.
#[derive(Debug, Clone)]
pub struct BallGrowth {
    pub radii: Vec<f64>,
    pub integrals: Vec<f64>,
    pub fit: LineFit,
}

pub fn ball_integral_growth(green: &GreenProfile, radii: &[f64]) -> Result<BallGrowth> {
    let integrals: Vec<f64> = radii.iter().map(|&r| green_ball_integral(green, r)).collect();
    let fit = power_law(radii, &integrals)?;
    Ok(BallGrowth { radii: radii.to_vec(), integrals, fit })
}

/// Two-sided comparison of the potential `P = L^{-s} χ_{B_σ}` with `G`.
#[derive(Debug, Clone)]
pub struct PotentialReport {
    pub sigma: f64,
    pub mass: f64,
    /// `(r, P(r) / (‖χ‖₁ (1 ∧ r^{N-2s}) G(r)))` over the sample radii.
    pub normalized: Vec<(f64, f64)>,
    /// `(r, P(r) / (σ^N G(r)))` over the sample radii.
    pub scaled: Vec<(f64, f64)>,
}

fn extremes(series: &[(f64, f64)]) -> (f64, f64) {
    series.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, v)| (lo.min(v), hi.max(v)))
}

impl PotentialReport {
    pub fn normalized_range(&self) -> (f64, f64) {
        extremes(&self.normalized)
    }

    pub fn scaled_range(&self) -> (f64, f64) {
        extremes(&self.scaled)
    }

    /// Larger of the two max/min spreads.
    pub fn spread(&self) -> f64 {
        let (a, b) = self.normalized_range();
        let (c, d) = self.scaled_range();
        (b / a).max(d / c)
    }

    /// Both series nonempty, finite and strictly positive.
    pub fn is_two_sided(&self) -> bool {
        let ok = |v: &[(f64, f64)]| !v.is_empty() && v.iter().all(|&(_, x)| x.is_finite() && x > 0.0);
        ok(&self.normalized) && ok(&self.scaled)
    }
}

/// Both ratio series over the nodes in `window` where `G > 0`.
pub fn potential_two_sided_check(
    op: &FractionalOperator,
    green: &GreenProfile,
    sigma: f64,
    window: (f64, f64),
) -> Result<PotentialReport> {
    let grid = op.grid();
    if !(sigma > 0.0 && sigma < 0.5 * grid.r_max()) {
        return Err(invalid("sigma", format!("need 0 < sigma < r_max/2, got {sigma}")));
    }
    let chi = datum::ball_indicator(grid, sigma)?;
    let mass = chi.integral();
    let p = op.apply(Power::Negative, &chi)?;
    let n = grid.manifold().dimension() as f64;
    let decay = n - 2.0 * op.s();
    let r = grid.nodes();
    let mut normalized = Vec::new();
    let mut scaled = Vec::new();
    for i in grid.nodes_in(window.0, window.1).into_iter().filter(|&i| i < green.positive) {
        let g = green.values[i];
        normalized.push((r[i], p.values()[i] / (mass * r[i].powf(decay).min(1.0) * g)));
        scaled.push((r[i], p.values()[i] / (sigma.powf(n) * g)));
    }
    Ok(PotentialReport { sigma, mass, normalized, scaled })
}

/// Relative error `|P_σ(r)/‖χ_σ‖₁ - G(r)| / G(r)` at one radius for each σ.
pub fn dirac_limit_errors(
    op: &FractionalOperator,
    green: &GreenProfile,
    sigmas: &[f64],
    radius: f64,
) -> Result<Vec<(f64, f64)>> {
    let i = op.grid().nearest_node(radius);
    sigmas
        .iter()
        .map(|&sigma| {
            let chi = datum::ball_indicator(op.grid(), sigma)?;
            let p = op.apply(Power::Negative, &chi)?;
            let approx = p.values()[i] / chi.integral();
            Ok((sigma, ((approx - green.values[i]) / green.values[i]).abs()))
        })
        .collect()
}

/// Angular integration around an off-centre point on a space form.
struct Angular {
    rule: GaussRule,
    dimension: usize,
    /// `ω_{N-2} / ω_{N-1}`.
    normalisation: f64,
}

impl Angular {
    fn new(dimension: usize, nodes: usize) -> Self {
        let normalisation = unit_sphere_area(dimension - 1) / unit_sphere_area(dimension);
        Self { rule: GaussRule::new(nodes), dimension, normalisation }
    }

    fn measure(&self, theta: f64) -> f64 {
        theta.sin().powi(self.dimension as i32 - 2)
    }

    fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        self.normalisation * self.rule.integrate(a, b, |th| f(th) * self.measure(th))
    }
}

/// Angle at which the point at radius `r` is at distance `dist` from the
/// point at radius `rho`; `0` or `π` when no such angle exists.
fn angle_at_distance(m: &ModelManifold, rho: f64, r: f64, dist: f64) -> f64 {
    let c = m.space_form_curvature().expect("space form");
    let cos = if c == 0.0 {
        (rho * rho + r * r - dist * dist) / (2.0 * rho * r)
    } else {
        let k = c.sqrt();
        let (a, b) = (k * rho, k * r);
        ((a - b).cosh() - (k * dist).cosh()) / (a.sinh() * b.sinh()) + 1.0
    };
    cos.clamp(-1.0, 1.0).acos()
}

fn require_offcentre_support(m: &ModelManifold, rho: f64) -> Result<()> {
    if rho != 0.0 && m.space_form_curvature().is_none() {
        return Err(Error::Precondition(format!(
            "off-centre evaluation at rho = {rho} needs a space form; custom warpings support rho = 0 only"
        )));
    }
    if !(rho >= 0.0) {
        return Err(invalid("rho", format!("need rho >= 0, got {rho}")));
    }
    Ok(())
}

/// `∫ u(x) G(d(x, x₀)) dμ(x)` with `x₀` at radius `rho`.
pub fn offcenter_green_moment(green: &GreenProfile, u: &RadialField, rho: f64) -> Result<f64> {
    let m = green.grid.manifold();
    require_offcentre_support(m, rho)?;
    if !Arc::ptr_eq(u.grid(), &green.grid) {
        return Err(Error::GridMismatch);
    }
    if rho == 0.0 {
        return u.dot(&green.as_field());
    }
    let ang = Angular::new(m.dimension(), 16);
    let r = green.grid.nodes();
    let w = green.grid.weights();
    let mut total = 0.0;
    for i in 0..r.len() {
        if u.values()[i] == 0.0 {
            continue;
        }
        let g = |th: f64| green.at_distance(m.distance(rho, r[i], th.cos()).unwrap());
        // Geometric panels towards θ = 0, where the pole may sit.
        let mut acc = 0.0;
        let mut hi = std::f64::consts::PI;
        for _ in 0..40 {
            let lo = 0.5 * hi;
            acc += ang.integrate(lo, hi, g);
            hi = lo;
        }
        acc += ang.integrate(0.0, hi, g);
        total += u.values()[i] * w[i] * acc;
    }
    Ok(total)
}

/// `‖u‖_{L¹_{x₀,G}} = ∫_{B₁(x₀)} |u| + ∫_{B₁(x₀)ᶜ} |u| G(d(x, x₀))`.
#[derive(Debug, Clone, Copy)]
pub struct WeightedNorm {
    pub rho: f64,
    pub inner: f64,
    pub outer: f64,
    /// Change of the off-centre quadrature when its node count doubles.
    pub quadrature_defect: f64,
}

impl WeightedNorm {
    pub fn total(&self) -> f64 {
        self.inner + self.outer
    }
}

pub const ANGULAR_NODES: usize = 96;

pub fn weighted_norm(u: &RadialField, green: &GreenProfile, rho: f64) -> Result<WeightedNorm> {
    let m = green.grid.manifold();
    require_offcentre_support(m, rho)?;
    if !Arc::ptr_eq(u.grid(), &green.grid) {
        return Err(Error::GridMismatch);
    }
    let grid = &green.grid;
    if rho == 0.0 {
        let cover = grid.ball_coverage(1.0);
        let (mut inner, mut outer) = (0.0, 0.0);
        for i in 0..grid.len() {
            let a = u.values()[i].abs();
            inner += a * cover[i];
            outer += a * (grid.weights()[i] - cover[i]) * green.values[i];
        }
        return Ok(WeightedNorm { rho, inner, outer, quadrature_defect: 0.0 });
    }
    let eval = |nodes: usize| {
        let ang = Angular::new(m.dimension(), nodes);
        let r = grid.nodes();
        let (mut inner, mut outer) = (0.0, 0.0);
        for i in 0..grid.len() {
            let a = u.values()[i].abs();
            if a == 0.0 {
                continue;
            }
            let mass = a * grid.weights()[i];
            let split = angle_at_distance(m, rho, r[i], 1.0);
            inner += mass * ang.integrate(0.0, split, |_| 1.0);
            outer += mass
                * ang.integrate(split, std::f64::consts::PI, |th| {
                    green.at_distance(m.distance(rho, r[i], th.cos()).unwrap())
                });
        }
        (inner, outer)
    };
    let (inner, outer) = eval(ANGULAR_NODES);
    let (inner2, outer2) = eval(2 * ANGULAR_NODES);
    let defect = ((inner2 + outer2) - (inner + outer)).abs() / (inner2 + outer2).max(f64::MIN_POSITIVE);
    Ok(WeightedNorm { rho, inner, outer, quadrature_defect: defect })
}

/// Radii of the default centre sample for a grid.
pub fn rho_sample(grid: &RadialGrid) -> Vec<f64> {
    if grid.manifold().space_form_curvature().is_none() {
        return vec![0.0];
    }
    let half = 0.5 * grid.r_max();
    let mut out: Vec<f64> = [0.0, 1.0, 2.0, 4.0, 8.0].into_iter().filter(|&r| r < half).collect();
    out.push(half);
    out
}

/// Largest weighted norm over a set of centres.
pub fn weighted_norm_sup(u: &RadialField, green: &GreenProfile, rhos: &[f64]) -> Result<WeightedNorm> {
    let mut best: Option<WeightedNorm> = None;
    for &rho in rhos {
        let w = weighted_norm(u, green, rho)?;
        if best.map_or(true, |b| w.total() > b.total()) {
            best = Some(w);
        }
    }
    best.ok_or_else(|| invalid("rhos", "empty centre sample"))
}

/// Membership of the power-tail datum `1 ∧ r^{-a}` in the Green-weighted
/// space, judged from how the outer integral grows with the cut-off radius.
#[derive(Debug, Clone)]
pub struct DecayClassReport {
    pub a: f64,
    /// Cut-off radii, doubling, ending at `r_max / 2`.
    pub cutoffs: Vec<f64>,
    /// `∫_{1 ≤ r < R} u G dμ` for each cut-off.
    pub outer: Vec<f64>,
    /// `∫_{B_R} u dμ` for each cut-off.
    pub mass: Vec<f64>,
    /// Ratio of the last two increments of `outer`.
    pub increment_ratio: f64,
    /// Ratio of the last two increments of `mass`.
    pub mass_increment_ratio: f64,
    /// Weighted norm of the full datum, maximised over the centre sample.
    pub norm: WeightedNorm,
}

impl DecayClassReport {
    /// Geometric decay of the increments: the truncated outer integral has a
    /// finite limit.
    pub fn converges(&self) -> bool {
        self.increment_ratio < 1.0
    }

    pub fn mass_converges(&self) -> bool {
        self.mass_increment_ratio < 1.0
    }
}

pub fn decay_class_report(a: f64, green: &GreenProfile) -> Result<DecayClassReport> {
    if !(a > 0.0) {
        return Err(invalid("a", format!("need a > 0, got {a}")));
    }
    let grid = green.grid.clone();
    let u = datum::power_tail(&grid, a, 1.0)?;
    let top = 0.5 * grid.r_max();
    if top < 8.0 {
        return Err(invalid("r_max", format!("need r_max >= 16 to resolve four doublings, got {}", grid.r_max())));
    }
    let cutoffs: Vec<f64> = (0..4).rev().map(|k| top / f64::from(1u32 << k)).collect();
    let unit = grid.ball_coverage(1.0);
    let mut outer = Vec::with_capacity(cutoffs.len());
    let mut mass = Vec::with_capacity(cutoffs.len());
    for &cut in &cutoffs {
        let cover = grid.ball_coverage(cut);
        let (mut o, mut l1) = (0.0, 0.0);
        for i in 0..grid.len() {
            let v = u.values()[i];
            o += v * (cover[i] - unit[i]).max(0.0) * green.values[i];
            l1 += v * cover[i];
        }
        outer.push(o);
        mass.push(l1);
    }
    let ratio = |x: &[f64]| {
        let n = x.len();
        (x[n - 1] - x[n - 2]) / (x[n - 2] - x[n - 3])
    };
    let norm = weighted_norm_sup(&u, green, &rho_sample(&grid))?;
    Ok(DecayClassReport {
        a,
        increment_ratio: ratio(&outer),
        mass_increment_ratio: ratio(&mass),
        cutoffs,
        outer,
        mass,
        norm,
    })
}

/// One row of the bump-sum example: `J` unit bumps at radii `e^j`.
#[derive(Debug, Clone, Copy)]
pub struct BumpRow {
    pub count: usize,
    pub l1: f64,
    /// Weighted norm centred at the pole.
    pub weighted_pole: f64,
    /// Weighted norm maximised over the centre sample.
    pub weighted_sup: f64,
}

/// `‖û_J‖₁` and weighted norms for `J = 1..=max_count`.
pub fn bump_sum_report(green: &GreenProfile, max_count: usize) -> Result<Vec<BumpRow>> {
    let rhos = rho_sample(&green.grid);
    (1..=max_count)
        .map(|count| {
            let u = datum::bump_sum(&green.grid, count)?;
            Ok(BumpRow {
                count,
                l1: u.integral(),
                weighted_pole: weighted_norm(&u, green, 0.0)?.total(),
                weighted_sup: weighted_norm_sup(&u, green, &rhos)?.total(),
            })
        })
        .collect()
}

/// Pointwise and ball-integral comparison of Green functions.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    /// `max G_m / G_c` over nodes where both are resolved.
    pub pointwise_max_ratio: f64,
    /// `max ∫_{B_R} G_m / ∫_{B_R} G_c` over the radii.
    pub ball_max_ratio: f64,
    pub tolerance: f64,
}

impl ComparisonReport {
    pub fn holds(&self) -> bool {
        self.pointwise_max_ratio <= 1.0 + self.tolerance && self.ball_max_ratio <= 1.0 + self.tolerance
    }
}

/// Compare `G` on `m` with `G` on the space form of curvature `-c`, both
/// discretized with the same grid parameters.
pub fn green_comparison_check(
    m: &ModelManifold,
    c: f64,
    s: f64,
    grid_params: (f64, usize, f64),
    radii: &[f64],
    tolerance: f64,
) -> Result<ComparisonReport> {
    let (r_max, n, grading) = grid_params;
    let reference = if c == 0.0 {
        ModelManifold::euclidean(m.dimension())?
    } else {
        ModelManifold::hyperbolic(m.dimension(), c)?
    };
    let spec_m = build_spectrum(m, r_max, n, grading)?;
    for &r in spec_m.grid().nodes() {
        let k = m.sectional_curvature_radial(r)?.value;
        if k > -c + 1e-9 * c.max(1.0) {
            return Err(Error::Precondition(format!(
                "radial curvature {k} at r = {r} exceeds -{c}"
            )));
        }
    }
    let spec_c = build_spectrum(&reference, r_max, n, grading)?;
    let g_m = green_profile(&FractionalOperator::new(s, spec_m)?)?;
    let g_c = green_profile(&FractionalOperator::new(s, spec_c)?)?;
    let limit = g_m.positive.min(g_c.positive);
    let pointwise_max_ratio = (0..limit)
        .map(|i| g_m.values[i] / g_c.values[i])
        .fold(f64::NEG_INFINITY, f64::max);
    let ball_max_ratio = radii
        .iter()
        .map(|&r| green_ball_integral(&g_m, r) / green_ball_integral(&g_c, r))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ComparisonReport { pointwise_max_ratio, ball_max_ratio, tolerance })
}

/// Bracket `[lower, upper]` with
/// `lower ≤ ‖u‖_{L¹_{0,G}} / ∫ u L^{-s}χ_{B_{1/2}} ≤ upper` for `u ≥ 0`,
/// derived from the pointwise comparison of the potential with `G`.
#[derive(Debug, Clone)]
pub struct NormEquivalence {
    potential: RadialField,
    pub lower: f64,
    pub upper: f64,
}

impl NormEquivalence {
    pub fn calibrate(op: &FractionalOperator, green: &GreenProfile) -> Result<Self> {
        let grid = op.grid();
        let chi = datum::ball_indicator(grid, 0.5)?;
        let p = op.apply(Power::Negative, &chi)?;
        let cover = grid.ball_coverage(1.0);
        let (mut lower, mut upper) = (f64::INFINITY, 0.0f64);
        for i in 0..grid.len() {
            let w = grid.weights()[i];
            let inside = cover[i] / w;
            // Weight of the norm per unit mass in cell i against the potential there.
            let density = inside + (1.0 - inside) * green.values[i];
            let ratio = density / p.values()[i];
            if ratio.is_finite() {
                lower = lower.min(ratio);
                upper = upper.max(ratio);
            }
        }
        Ok(Self { potential: p, lower, upper })
    }

    /// `‖u‖_{L¹_{0,G}} / ∫ u P`.
    pub fn ratio(&self, u: &RadialField, green: &GreenProfile) -> Result<f64> {
        let norm = weighted_norm(u, green, 0.0)?.total();
        Ok(norm / u.map(f64::abs).dot(&self.potential)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn euclid_green(n: usize, r_max: f64, s: f64) -> (FractionalOperator, GreenProfile) {
        let spectrum = build_spectrum(&ModelManifold::euclidean(3).unwrap(), r_max, n, 1.0).unwrap();
        let op = FractionalOperator::new(s, spectrum).unwrap();
        let g = green_profile(&op).unwrap();
        (op, g)
    }

    #[test]
    fn both_green_paths_agree() {
        let (op, g) = euclid_green(128, 10.0, 0.5);
        let direct = green_by_eigensum(&op);
        for (a, b) in g.values().iter().zip(&direct) {
            assert!(((a - b) / b).abs() < 1e-9);
        }
    }

    #[test]
    fn green_near_riesz_kernel() {
        let (_, g) = euclid_green(512, 40.0, 0.5);
        let r = 2.0;
        let truncation = {
            let x = PI * r / 80.0;
            x / x.tan()
        };
        let exact = truncation / (2.0 * PI * PI * r * r);
        assert!(((g.at_distance(r) - exact) / exact).abs() < 0.02);
    }

    #[test]
    fn interpolant_reproduces_nodes_and_is_monotone() {
        let (_, g) = euclid_green(256, 10.0, 0.5);
        let r = g.grid().nodes().to_vec();
        for i in [0, 5, 100, 200] {
            assert!(((g.at_distance(r[i]) - g.values()[i]) / g.values()[i]).abs() < 1e-12);
        }
        let mut prev = f64::INFINITY;
        for k in 0..2000 {
            let v = g.at_distance(0.005 * k as f64);
            assert!(v <= prev);
            prev = v;
        }
        assert_eq!(g.at_distance(10.0), 0.0);
    }

    #[test]
    fn offcentre_moment_reduces_to_radial_at_origin() {
        let (op, g) = euclid_green(256, 10.0, 0.5);
        let u = datum::ball_indicator(op.grid(), 1.0).unwrap();
        let radial = offcenter_green_moment(&g, &u, 0.0).unwrap();
        let near = offcenter_green_moment(&g, &u, 1e-9).unwrap();
        assert!(((radial - near) / radial).abs() < 1e-3);
    }

    #[test]
    fn weighted_norm_at_origin_splits_ball() {
        let (op, g) = euclid_green(256, 10.0, 0.5);
        let u = datum::ball_indicator(op.grid(), 0.8).unwrap();
        let w = weighted_norm(&u, &g, 0.0).unwrap();
        assert!((w.inner - u.integral()).abs() < 1e-12);
        assert_eq!(w.outer, 0.0);
        let far = weighted_norm(&u, &g, 4.0).unwrap();
        assert_eq!(far.inner, 0.0);
        assert!(far.quadrature_defect < 1e-6);
    }
}
