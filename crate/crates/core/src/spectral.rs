//! Discrete Laplace–Beltrami operator, its eigendecomposition and
//! spectral calculus: heat semigroup and fractional powers.
//!
//! The operator `L = -Δ` acts on radial functions with zero flux at the
//! pole and a homogeneous Dirichlet condition at `r_max`. In the cell
//! weights `W` it reads `L = W⁻¹K` with `K` symmetric tridiagonal, so
//! `S = W^{-1/2} K W^{-1/2}` is symmetric and `S = QΛQᵀ`. Every spectral
//! function is `g(L) f = W^{-1/2} Q g(Λ) Qᵀ W^{1/2} f`.

use std::sync::Arc;

use faer::{Mat, Side};
use statrs::function::gamma::gamma;

use crate::error::{invalid, Error, Result};
use crate::manifold::{ModelManifold, RadialGrid};
use crate::quadrature;

/// A radial function sampled at the nodes of a grid.
#[derive(Debug, Clone)]
pub struct RadialField {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid(
                "values",
                format!("expected {} values, got {}", grid.len(), values.len()),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("building a radial field".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        Self { grid, values: vec![0.0; n] }
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self { grid, values }
    }

    /// The discrete Dirac mass at node `i`, normalised to unit integral.
    pub fn dirac(grid: Arc<RadialGrid>, i: usize) -> Self {
        let mut values = vec![0.0; grid.len()];
        values[i] = 1.0 / grid.weights()[i];
        Self { grid, values }
    }

    pub(crate) fn from_raw(grid: Arc<RadialGrid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn same_grid(&self, other: &RadialField) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid)
    }

    /// `∫ f dμ`.
    pub fn integral(&self) -> f64 {
        self.values.iter().zip(self.grid.weights()).map(|(v, w)| v * w).sum()
    }

    /// `∫ f g dμ`.
    pub fn dot(&self, other: &RadialField) -> Result<f64> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .zip(self.grid.weights())
            .map(|((a, b), w)| a * b * w)
            .sum())
    }

    /// `L^p` norm for `p >= 1`, with `p = ∞` giving the maximum modulus.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.sup_norm();
        }
        let s: f64 = self
            .values
            .iter()
            .zip(self.grid.weights())
            .map(|(v, w)| v.abs().powf(p) * w)
            .sum();
        s.powf(1.0 / p)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }
}

/// Stiffness form of `-Δ` on the first cells of a grid.
#[derive(Debug, Clone)]
pub struct RadialLaplacian {
    grid: Arc<RadialGrid>,
    /// Diagonal of `K`.
    diag: Vec<f64>,
    /// Conductance `T_{i+1/2}` coupling cells `i` and `i+1`.
    conductance: Vec<f64>,
    weights: Vec<f64>,
}

/// Discretize `-Δ` on the full grid.
pub fn assemble_laplacian(grid: &Arc<RadialGrid>) -> RadialLaplacian {
    assemble_truncated(grid, grid.len())
}

/// Discretize `-Δ` on the first `cells` cells with a Dirichlet condition
/// on the outer edge of the last one.
pub fn assemble_truncated(grid: &Arc<RadialGrid>, cells: usize) -> RadialLaplacian {
    let n = cells;
    let m = grid.manifold();
    let omega = m.unit_sphere_area();
    let edges = grid.edges();
    let nodes = grid.nodes();
    let conductance: Vec<f64> = (0..n.saturating_sub(1))
        .map(|i| omega * m.radial_density(edges[i + 1]) / (nodes[i + 1] - nodes[i]))
        .collect();
    let outer = omega * m.radial_density(edges[n]) / (edges[n] - nodes[n - 1]);
    let diag: Vec<f64> = (0..n)
        .map(|i| {
            let left = if i > 0 { conductance[i - 1] } else { 0.0 };
            let right = if i + 1 < n { conductance[i] } else { outer };
            left + right
        })
        .collect();
    RadialLaplacian { grid: grid.clone(), diag, conductance, weights: grid.weights()[..n].to_vec() }
}

impl RadialLaplacian {
    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `(-Δ f)` at the nodes.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut k = self.diag[i] * f[i];
                if i > 0 {
                    k -= self.conductance[i - 1] * f[i - 1];
                }
                if i + 1 < n {
                    k -= self.conductance[i] * f[i + 1];
                }
                k / self.weights[i]
            })
            .collect()
    }

    /// Dense symmetric matrix `W^{-1/2} K W^{-1/2}`.
    pub fn symmetric_matrix(&self) -> Mat<f64> {
        let n = self.len();
        let s: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
        Mat::from_fn(n, n, |i, j| {
            if i == j {
                self.diag[i] / self.weights[i]
            } else if i.abs_diff(j) == 1 {
                -self.conductance[i.min(j)] / (s[i] * s[j])
            } else {
                0.0
            }
        })
    }

    /// Ascending eigenvalues without eigenvectors.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.symmetric_matrix().self_adjoint_eigenvalues(Side::Lower).map_err(|e| {
            Error::Eigensolver {
                n: self.len(),
                r_max: self.grid.r_max(),
                detail: format!("{e:?}"),
            }
        })
    }
}

/// Eigenpairs of the symmetrised operator.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    grid: Arc<RadialGrid>,
    eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors of `S`, column-major.
    q: Vec<f64>,
    sqrt_w: Vec<f64>,
}

pub fn decompose(laplacian: &RadialLaplacian) -> Result<SpectralDecomposition> {
    let n = laplacian.len();
    if n != laplacian.grid.len() {
        return Err(Error::Precondition("decompose needs the operator on the full grid".into()));
    }
    let s = laplacian.symmetric_matrix();
    let evd = s.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Eigensolver {
        n,
        r_max: laplacian.grid.r_max(),
        detail: format!(
            "{e:?}; diagonal range [{:e}, {:e}]",
            laplacian.diag.iter().zip(&laplacian.weights).map(|(d, w)| d / w).fold(f64::INFINITY, f64::min),
            laplacian.diag.iter().zip(&laplacian.weights).map(|(d, w)| d / w).fold(0.0, f64::max)
        ),
    })?;
    let lambda = evd.S().column_vector();
    let u = evd.U();
    let eigenvalues: Vec<f64> = (0..n).map(|j| lambda[j]).collect();
    if eigenvalues.iter().any(|l| !l.is_finite()) || eigenvalues[0] <= 0.0 {
        return Err(Error::Eigensolver {
            n,
            r_max: laplacian.grid.r_max(),
            detail: format!("smallest eigenvalue {} is not positive", eigenvalues[0]),
        });
    }
    let mut q = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            q.push(u[(i, j)]);
        }
    }
    let sqrt_w = laplacian.weights.iter().map(|w| w.sqrt()).collect();
    Ok(SpectralDecomposition { grid: laplacian.grid.clone(), eigenvalues, q, sqrt_w })
}

impl SpectralDecomposition {
    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    fn column(&self, j: usize) -> &[f64] {
        let n = self.len();
        &self.q[j * n..(j + 1) * n]
    }

    /// Eigenfunction `φ_j`, orthonormal in `L²(dμ)`.
    pub fn eigenfunction(&self, j: usize) -> RadialField {
        let values = self.column(j).iter().zip(&self.sqrt_w).map(|(q, s)| q / s).collect();
        RadialField::from_raw(self.grid.clone(), values)
    }

    /// Coefficients `Qᵀ W^{1/2} f`.
    pub fn coefficients(&self, f: &RadialField) -> Result<Vec<f64>> {
        if !Arc::ptr_eq(f.grid(), &self.grid) {
            return Err(Error::GridMismatch);
        }
        let x: Vec<f64> = f.values().iter().zip(&self.sqrt_w).map(|(v, s)| v * s).collect();
        Ok((0..self.len()).map(|j| dot(self.column(j), &x)).collect())
    }

    /// Inverse of [`Self::coefficients`].
    pub fn synthesize(&self, coefficients: &[f64]) -> RadialField {
        let n = self.len();
        let mut y = vec![0.0; n];
        for (j, &c) in coefficients.iter().enumerate() {
            if c != 0.0 {
                axpy(c, self.column(j), &mut y);
            }
        }
        for (v, s) in y.iter_mut().zip(&self.sqrt_w) {
            *v /= s;
        }
        RadialField::from_raw(self.grid.clone(), y)
    }

    /// `g(L) f` for a spectral multiplier `g`.
    pub fn apply_function(&self, f: &RadialField, g: impl Fn(f64) -> f64) -> Result<RadialField> {
        let mut c = self.coefficients(f)?;
        for (cj, &l) in c.iter_mut().zip(&self.eigenvalues) {
            *cj *= g(l);
        }
        Ok(self.synthesize(&c))
    }

    /// `e^{tΔ} f`.
    pub fn apply_heat(&self, t: f64, f: &RadialField) -> Result<RadialField> {
        if !(t >= 0.0) {
            return Err(invalid("t", format!("heat semigroup needs t >= 0, got {t}")));
        }
        self.apply_function(f, |l| (-l * t).exp())
    }

    /// Heat kernel `k(t, r_i, r_j)` with respect to the Riemannian measure.
    pub fn heat_kernel(&self, t: f64, i: usize, j: usize) -> f64 {
        let n = self.len();
        let mut acc = 0.0;
        for k in 0..n {
            acc += (-self.eigenvalues[k] * t).exp() * (self.q[k * n + i] * self.q[k * n + j]);
        }
        acc / (self.sqrt_w[i] * self.sqrt_w[j])
    }

    /// Dense `Q g(Λ) Qᵀ`, the symmetric-coordinate matrix of `g(L)`.
    pub fn symmetric_function_matrix(&self, g: impl Fn(f64) -> f64) -> Mat<f64> {
        let n = self.len();
        let gl: Vec<f64> = self.eigenvalues.iter().map(|&l| g(l)).collect();
        let q = Mat::from_fn(n, n, |i, j| self.q[j * n + i]);
        let qg = Mat::from_fn(n, n, |i, j| self.q[j * n + i] * gl[j]);
        &qg * q.transpose()
    }

    /// Largest deviation of `QᵀQ` from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.len();
        let q = Mat::from_fn(n, n, |i, j| self.q[j * n + i]);
        let p = q.transpose() * &q;
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for i in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((p[(i, j)] - target).abs());
            }
        }
        worst
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Direction of a fractional power.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Power {
    /// `L^s`.
    Positive,
    /// `L^{-s}`.
    Negative,
}

/// The fractional Laplacian `L^s` for `0 < s < 1`, normalised so that its
/// eigenvalues are exactly `λ^s`.
#[derive(Debug, Clone)]
pub struct FractionalOperator {
    s: f64,
    spectrum: Arc<SpectralDecomposition>,
}

impl FractionalOperator {
    pub fn new(s: f64, spectrum: Arc<SpectralDecomposition>) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(invalid("s", format!("need 0 < s < 1, got {s}")));
        }
        Ok(Self { s, spectrum })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn spectrum(&self) -> &Arc<SpectralDecomposition> {
        &self.spectrum
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.spectrum.grid()
    }

    pub fn manifold(&self) -> &ModelManifold {
        self.spectrum.grid().manifold()
    }

    pub fn apply(&self, power: Power, f: &RadialField) -> Result<RadialField> {
        let e = match power {
            Power::Positive => self.s,
            Power::Negative => -self.s,
        };
        self.spectrum.apply_function(f, |l| l.powf(e))
    }

    pub fn symmetric_matrix(&self, power: Power) -> Mat<f64> {
        let e = match power {
            Power::Positive => self.s,
            Power::Negative => -self.s,
        };
        self.spectrum.symmetric_function_matrix(|l| l.powf(e))
    }
}

/// Computes `λ^{-s}` as `Γ(s)⁻¹ ∫₀^∞ e^{-tλ} t^{s-1} dt` and returns the
/// relative error against the closed form.
pub fn subordination_identity_check(s: f64, lambda: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(invalid("s", format!("need 0 < s < 1, got {s}")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid("lambda", format!("need lambda > 0, got {lambda}")));
    }
    let integral = subordinate(s, lambda, |t, l| (-t * l).exp())?;
    let exact = lambda.powf(-s);
    Ok(((integral - exact) / exact).abs())
}

/// `Γ(s)⁻¹ ∫₀^∞ k(t, λ) t^{s-1} dt` after the substitution `t = e^x / λ`.
fn subordinate(s: f64, lambda: f64, k: impl Fn(f64, f64) -> f64) -> Result<f64> {
    let scale = lambda.powf(-s);
    let (lo, hi) = (-40.0 / s, 4.0);
    let est = quadrature::integrate(
        |x| {
            let t = x.exp() / lambda;
            k(t, lambda) * (s * x).exp()
        },
        lo,
        hi,
        1e-15,
        1e-13,
    )?;
    Ok(scale * est.value / gamma(s))
}

/// First Dirichlet eigenvalue of the ball `B_R` times `|B_R|^{2/N}`.
#[derive(Debug, Clone)]
pub struct FaberKrahnRow {
    pub radius: f64,
    pub lambda1: f64,
    pub volume: f64,
    pub product: f64,
}

#[derive(Debug, Clone)]
pub struct FaberKrahnReport {
    pub rows: Vec<FaberKrahnRow>,
    /// Radii resolved by fewer than eight cells.
    pub skipped: Vec<f64>,
    /// Smallest product over the resolved radii.
    pub constant: f64,
}

/// Solves the Dirichlet problem on the grid cells inside each ball.
///
/// The effective radius is the grid edge closest to the requested one.
pub fn faber_krahn_check(grid: &Arc<RadialGrid>, radii: &[f64]) -> Result<FaberKrahnReport> {
    let m = grid.manifold();
    let n_dim = m.dimension() as f64;
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for &radius in radii {
        let edges = grid.edges();
        let cells = (1..edges.len())
            .min_by(|&a, &b| (edges[a] - radius).abs().total_cmp(&(edges[b] - radius).abs()))
            .unwrap_or(0);
        if cells < 8 || radius > grid.r_max() {
            log::warn!("Faber-Krahn radius {radius} resolved by {cells} cells, skipped");
            skipped.push(radius);
            continue;
        }
        let lap = assemble_truncated(grid, cells);
        let lambda1 = lap.eigenvalues()?[0];
        let volume: f64 = grid.weights()[..cells].iter().sum();
        rows.push(FaberKrahnRow {
            radius: edges[cells],
            lambda1,
            volume,
            product: lambda1 * volume.powf(2.0 / n_dim),
        });
    }
    let constant = rows.iter().map(|r| r.product).fold(f64::INFINITY, f64::min);
    Ok(FaberKrahnReport { rows, skipped, constant })
}

/// Supremum of `k(t, 0, r) t^{N/2} exp(r² / ((4+ε)t))` over sample pairs
/// `(t, node index)`.
///
/// Samples where the kernel has fallen below `1e-10 k(t, 0, 0)` carry only
/// round-off, which the exponential weight would amplify; they are skipped.
#[derive(Debug, Clone, Copy)]
pub struct GaussianBoundReport {
    pub supremum: f64,
    pub argmax_t: f64,
    pub argmax_r: f64,
    pub skipped: usize,
}

pub fn gaussian_bound_check(
    spectrum: &SpectralDecomposition,
    samples: &[(f64, usize)],
    epsilon: f64,
) -> Result<GaussianBoundReport> {
    if !(epsilon > 0.0) {
        return Err(invalid("epsilon", "need epsilon > 0"));
    }
    let half_n = 0.5 * spectrum.grid().manifold().dimension() as f64;
    let nodes = spectrum.grid().nodes();
    let mut best = GaussianBoundReport { supremum: f64::NEG_INFINITY, argmax_t: 0.0, argmax_r: 0.0, skipped: 0 };
    let mut skipped = 0;
    for &(t, i) in samples {
        if !(t > 0.0) || i >= nodes.len() {
            return Err(invalid("samples", format!("bad sample (t = {t}, node = {i})")));
        }
        let r = nodes[i];
        let k = spectrum.heat_kernel(t, 0, i);
        if k < 1e-10 * spectrum.heat_kernel(t, 0, 0) {
            skipped += 1;
            continue;
        }
        let v = k * t.powf(half_n) * (r * r / ((4.0 + epsilon) * t)).exp();
        if v > best.supremum {
            best = GaussianBoundReport { supremum: v, argmax_t: t, argmax_r: r, skipped: 0 };
        }
    }
    best.skipped = skipped;
    Ok(best)
}

/// Convenience: grid, operator and decomposition in one step.
pub fn build_spectrum(
    manifold: &ModelManifold,
    r_max: f64,
    n: usize,
    grading: f64,
) -> Result<Arc<SpectralDecomposition>> {
    let grid = Arc::new(RadialGrid::build(manifold, r_max, n, grading)?);
    Ok(Arc::new(decompose(&assemble_laplacian(&grid))?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn euclid(n: usize, r_max: f64) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::build(&ModelManifold::euclidean(3).unwrap(), r_max, n, 1.0).unwrap())
    }

    #[test]
    fn laplacian_of_r_squared_is_exact_inside() {
        let g = euclid(64, 1.0);
        let lap = assemble_laplacian(&g);
        let f: Vec<f64> = g.nodes().iter().map(|r| r * r).collect();
        let lf = lap.apply(&f);
        for v in &lf[..63] {
            assert!((v + 6.0).abs() < 1e-9, "{v}");
        }
    }

    #[test]
    fn hyperbolic_laplacian_of_cosh() {
        let m = ModelManifold::hyperbolic(3, 1.0).unwrap();
        let g = Arc::new(RadialGrid::build(&m, 4.0, 400, 1.0).unwrap());
        let lap = assemble_laplacian(&g);
        let f: Vec<f64> = g.nodes().iter().map(|r| r.cosh() - 1.0).collect();
        let lf = lap.apply(&f);
        for (i, &r) in g.nodes().iter().enumerate().take(390) {
            let exact = -3.0 * r.cosh();
            assert!(((lf[i] - exact) / exact).abs() < 1e-3, "r = {r}");
        }
    }

    #[test]
    fn first_eigenvalue_of_unit_ball() {
        let g = euclid(400, 1.0);
        let d = decompose(&assemble_laplacian(&g)).unwrap();
        assert!((d.eigenvalues()[0] - PI * PI).abs() / (PI * PI) < 1e-4);
        assert!((d.eigenvalues()[1] - 4.0 * PI * PI).abs() / (4.0 * PI * PI) < 1e-4);
        assert!(d.orthonormality_defect() < 1e-10);
    }

    #[test]
    fn subordination_matches_closed_form() {
        for s in [0.25, 0.5, 0.75] {
            for l in [1e-6, 1e-3, 1.0, 1e3, 1e6] {
                assert!(subordination_identity_check(s, l).unwrap() < 1e-10, "s={s} l={l}");
            }
        }
    }

    #[test]
    fn heat_kernel_is_symmetric() {
        let g = euclid(48, 2.0);
        let d = decompose(&assemble_laplacian(&g)).unwrap();
        for (i, j) in [(0, 5), (3, 40), (10, 11)] {
            assert_eq!(d.heat_kernel(0.1, i, j), d.heat_kernel(0.1, j, i));
        }
    }

    #[test]
    fn fractional_roundtrip() {
        let g = euclid(64, 3.0);
        let d = Arc::new(decompose(&assemble_laplacian(&g)).unwrap());
        let op = FractionalOperator::new(0.4, d).unwrap();
        let f = RadialField::from_fn(g.clone(), |r| (-r * r).exp());
        let back = op.apply(Power::Positive, &op.apply(Power::Negative, &f).unwrap()).unwrap();
        let err = back.values().iter().zip(f.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-11);
        assert!(FractionalOperator::new(1.0, op.spectrum().clone()).is_err());
    }
}
