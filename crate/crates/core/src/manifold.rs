//! Rotationally symmetric model manifolds and their radial grids.
//!
//! A model manifold is `[0, ∞) × S^{N-1}` with metric `dr² + ψ(r)² dθ²`.
//! Radial functions are discretized by a cell-centred grid whose cell
//! weights are the exact Riemannian volumes of the corresponding annuli.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use statrs::function::gamma::gamma;

use crate::error::{invalid, Error, Result};
use crate::quadrature::{self, GaussRule};

/// Warping function and its first two derivatives at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpingValue {
    pub psi: f64,
    pub dpsi: f64,
    pub ddpsi: f64,
}

type WarpingFn = dyn Fn(f64) -> WarpingValue + Send + Sync;

/// User-supplied warping with analytic derivatives.
#[derive(Clone)]
pub struct CustomWarping {
    name: String,
    eval: Arc<WarpingFn>,
}

impl CustomWarping {
    pub fn new<F>(name: impl Into<String>, eval: F) -> Self
    where
        F: Fn(f64) -> WarpingValue + Send + Sync + 'static,
    {
        Self { name: name.into(), eval: Arc::new(eval) }
    }

    /// Named warpings available from configuration files.
    ///
    /// `sinh_cosh` is `sinh r cosh r`, a space form of curvature -4 written
    /// in a non-standard way. `cubic` is `r + r³`, whose radial curvature
    /// `-6r / (r + r³)` stays below zero and tends to zero at infinity.
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "sinh_cosh" => Ok(Self::new(name, |r: f64| {
                let s2 = (2.0 * r).sinh();
                let c2 = (2.0 * r).cosh();
                WarpingValue { psi: 0.5 * s2, dpsi: c2, ddpsi: 2.0 * s2 }
            })),
            "cubic" => Ok(Self::new(name, |r: f64| WarpingValue {
                psi: r + r * r * r,
                dpsi: 1.0 + 3.0 * r * r,
                ddpsi: 6.0 * r,
            })),
            other => Err(invalid("custom_warping", format!("unknown warping `{other}`"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, r: f64) -> WarpingValue {
        (self.eval)(r)
    }
}

impl fmt::Debug for CustomWarping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomWarping").field("name", &self.name).finish()
    }
}

/// Radial warping of a model manifold.
#[derive(Debug, Clone)]
pub enum Warping {
    Euclidean,
    /// Constant sectional curvature `-curvature`.
    Hyperbolic { curvature: f64 },
    Custom(CustomWarping),
}

/// Sectional curvature in radial planes, possibly obtained as a limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Curvature {
    pub value: f64,
    pub approximate: bool,
}

/// An `N`-dimensional model manifold.
#[derive(Debug, Clone)]
pub struct ModelManifold {
    dimension: usize,
    warping: Warping,
}

impl ModelManifold {
    pub fn new(dimension: usize, warping: Warping) -> Result<Self> {
        if dimension < 2 {
            return Err(invalid("dimension", format!("need N >= 2, got {dimension}")));
        }
        match &warping {
            Warping::Euclidean => {}
            Warping::Hyperbolic { curvature } => {
                if !(curvature.is_finite() && *curvature > 0.0) {
                    return Err(invalid("curvature", format!("need c > 0, got {curvature}")));
                }
            }
            Warping::Custom(w) => check_custom(w)?,
        }
        Ok(Self { dimension, warping })
    }

    pub fn euclidean(dimension: usize) -> Result<Self> {
        Self::new(dimension, Warping::Euclidean)
    }

    pub fn hyperbolic(dimension: usize, curvature: f64) -> Result<Self> {
        Self::new(dimension, Warping::Hyperbolic { curvature })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn warping(&self) -> &Warping {
        &self.warping
    }

    /// `Some(c)` when the manifold has constant curvature `-c`.
    pub fn space_form_curvature(&self) -> Option<f64> {
        match self.warping {
            Warping::Euclidean => Some(0.0),
            Warping::Hyperbolic { curvature } => Some(curvature),
            Warping::Custom(_) => None,
        }
    }

    /// Short label used in reports.
    pub fn label(&self) -> String {
        match &self.warping {
            Warping::Euclidean => "euclidean".to_string(),
            Warping::Hyperbolic { curvature } => format!("hyperbolic(c={curvature})"),
            Warping::Custom(w) => format!("custom({})", w.name()),
        }
    }

    pub fn warping_eval(&self, r: f64) -> Result<WarpingValue> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::Domain { r, r_max: f64::INFINITY });
        }
        Ok(self.warping_unchecked(r))
    }

    fn warping_unchecked(&self, r: f64) -> WarpingValue {
        match &self.warping {
            Warping::Euclidean => WarpingValue { psi: r, dpsi: 1.0, ddpsi: 0.0 },
            Warping::Hyperbolic { curvature } => {
                let k = curvature.sqrt();
                let sh = (k * r).sinh();
                WarpingValue { psi: sh / k, dpsi: (k * r).cosh(), ddpsi: k * sh }
            }
            Warping::Custom(w) => w.eval(r),
        }
    }

    /// `ψ(r)^{N-1}`, the radial density of the volume measure up to `ω_{N-1}`.
    pub fn radial_density(&self, r: f64) -> f64 {
        self.warping_unchecked(r).psi.powi(self.dimension as i32 - 1)
    }

    /// Curvature `-ψ''/ψ` of planes containing the radial direction.
    pub fn sectional_curvature_radial(&self, r: f64) -> Result<Curvature> {
        let w = self.warping_eval(r)?;
        if r > 0.0 {
            return Ok(Curvature { value: -w.ddpsi / w.psi, approximate: false });
        }
        let value = match &self.warping {
            Warping::Euclidean => return Ok(Curvature { value: 0.0, approximate: false }),
            Warping::Hyperbolic { curvature } => {
                return Ok(Curvature { value: -curvature, approximate: false })
            }
            Warping::Custom(c) => {
                let h = 1e-4;
                let third = (-3.0 * c.eval(0.0).ddpsi + 4.0 * c.eval(h).ddpsi
                    - c.eval(2.0 * h).ddpsi)
                    / (2.0 * h);
                -third
            }
        };
        Ok(Curvature { value, approximate: true })
    }

    /// Area `ω_{N-1}` of the unit sphere `S^{N-1}`.
    pub fn unit_sphere_area(&self) -> f64 {
        unit_sphere_area(self.dimension)
    }

    /// Area of the geodesic sphere of radius `r`.
    pub fn sphere_area(&self, r: f64) -> Result<f64> {
        self.warping_eval(r)?;
        Ok(self.unit_sphere_area() * self.radial_density(r))
    }

    /// Volume of the geodesic ball of radius `r` by adaptive quadrature.
    pub fn ball_volume(&self, r: f64) -> Result<f64> {
        self.warping_eval(r)?;
        let est = quadrature::integrate(|x| self.radial_density(x), 0.0, r, 0.0, 1e-13)?;
        Ok(self.unit_sphere_area() * est.value)
    }

    /// Volume of the annulus `a <= |x| <= b` with a fixed Gauss rule.
    pub(crate) fn annulus_volume(&self, rule: &GaussRule, a: f64, b: f64) -> f64 {
        self.unit_sphere_area() * rule.integrate(a, b, |x| self.radial_density(x))
    }

    /// Geodesic distance between a point at radius `rho` on the axis and a
    /// point at radius `r` making angle `theta` with it.
    ///
    /// Only defined on space forms.
    pub fn distance(&self, rho: f64, r: f64, cos_theta: f64) -> Option<f64> {
        match self.warping {
            Warping::Euclidean => {
                let d2 = rho * rho + r * r - 2.0 * rho * r * cos_theta;
                Some(d2.max(0.0).sqrt())
            }
            Warping::Hyperbolic { curvature } => {
                let k = curvature.sqrt();
                let (a, b) = (k * rho, k * r);
                // cosh d = cosh(a-b) + sinh a sinh b (1 - cos θ), stable for small d.
                let x = (a - b).cosh() + a.sinh() * b.sinh() * (1.0 - cos_theta);
                Some(x.max(1.0).acosh() / k)
            }
            Warping::Custom(_) => None,
        }
    }
}

/// Area of the unit sphere in `R^dimension`.
pub fn unit_sphere_area(dimension: usize) -> f64 {
    let n = dimension as f64;
    2.0 * PI.powf(0.5 * n) / gamma(0.5 * n)
}

fn check_custom(w: &CustomWarping) -> Result<()> {
    let at0 = w.eval(0.0);
    if at0.psi.abs() > 1e-12 {
        return Err(Error::InadmissibleWarping(format!(
            "{}: psi(0) = {} but must vanish",
            w.name(),
            at0.psi
        )));
    }
    if (at0.dpsi - 1.0).abs() > 1e-10 {
        return Err(Error::InadmissibleWarping(format!(
            "{}: psi'(0) = {} but must equal 1",
            w.name(),
            at0.dpsi
        )));
    }
    for k in 1..=200 {
        let r = 0.05 * k as f64;
        let v = w.eval(r);
        if !(v.psi > 0.0) || !v.psi.is_finite() || !v.dpsi.is_finite() || !v.ddpsi.is_finite() {
            return Err(Error::InadmissibleWarping(format!(
                "{}: psi({r}) = {} is not positive and finite",
                w.name(),
                v.psi
            )));
        }
    }
    Ok(())
}

/// Cell-centred radial grid on `[0, r_max]`.
///
/// Cell `i` spans `[edges[i], edges[i+1]]`, its node is the midpoint and its
/// weight is the volume of that annulus. Consecutive cell widths have the
/// constant ratio `grading`.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    manifold: ModelManifold,
    r_max: f64,
    grading: f64,
    edges: Vec<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

pub const MIN_NODES: usize = 16;

impl RadialGrid {
    pub fn build(manifold: &ModelManifold, r_max: f64, n: usize, grading: f64) -> Result<Self> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(invalid("r_max", format!("need r_max > 0, got {r_max}")));
        }
        if n < MIN_NODES {
            return Err(invalid("n_nodes", format!("need at least {MIN_NODES} nodes, got {n}")));
        }
        if !(1.0..=2.0).contains(&grading) {
            return Err(invalid("grading", format!("need 1 <= grading <= 2, got {grading}")));
        }
        let mut widths = Vec::with_capacity(n);
        if grading == 1.0 {
            widths.resize(n, r_max / n as f64);
        } else {
            let first = r_max * (grading - 1.0) / (grading.powi(n as i32) - 1.0);
            let mut w = first;
            for _ in 0..n {
                widths.push(w);
                w *= grading;
            }
        }
        let mut edges = Vec::with_capacity(n + 1);
        edges.push(0.0);
        let mut acc = 0.0;
        for w in &widths {
            acc += w;
            edges.push(acc);
        }
        edges[n] = r_max;
        let nodes: Vec<f64> = edges.windows(2).map(|e| 0.5 * (e[0] + e[1])).collect();
        let rule = GaussRule::new(8);
        let weights: Vec<f64> =
            edges.windows(2).map(|e| manifold.annulus_volume(&rule, e[0], e[1])).collect();
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::NonFinite(format!(
                "computing the volume of cell {i} at r = {}",
                nodes[i]
            )));
        }
        Ok(Self { manifold: manifold.clone(), r_max, grading, edges, nodes, weights })
    }

    pub fn manifold(&self) -> &ModelManifold {
        &self.manifold
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Index of the node closest to `r`.
    pub fn nearest_node(&self, r: f64) -> usize {
        let k = self.edges.partition_point(|&e| e <= r);
        k.clamp(1, self.len()) - 1
    }

    /// Volume of `{ |x| < radius }` intersected with each cell.
    pub fn ball_coverage(&self, radius: f64) -> Vec<f64> {
        let rule = GaussRule::new(8);
        self.edges
            .windows(2)
            .zip(&self.weights)
            .map(|(e, &w)| {
                if e[1] <= radius {
                    w
                } else if e[0] >= radius {
                    0.0
                } else {
                    self.manifold.annulus_volume(&rule, e[0], radius)
                }
            })
            .collect()
    }

    /// Indices of the nodes with `lo <= r <= hi`.
    pub fn nodes_in(&self, lo: f64, hi: f64) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.nodes[i] >= lo && self.nodes[i] <= hi).collect()
    }
}
