//! Experiment configuration: a flat TOML file with typed keys.

use std::path::{Path, PathBuf};

use fracpme::manifold::{CustomWarping, ModelManifold, Warping};
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarpingKind {
    Euclidean,
    Hyperbolic,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatumKind {
    Ball,
    PowerTail,
    BumpSum,
    File,
}

/// Checks a run can evaluate, one per verdict family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    Subordination,
    GreenClosedForm,
    BallGrowth,
    GreenComparison,
    Potential,
    FaberKrahn,
    Semigroup,
    FundamentalBound,
    SmoothingRate,
    HyperbolicAcceleration,
    WeightedSmoothing,
    DecayClass,
    BumpSum,
    WdsResidual,
    MonotoneLimit,
}

impl CheckName {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Subordination => "subordination",
            Self::GreenClosedForm => "green_closed_form",
            Self::BallGrowth => "ball_growth",
            Self::GreenComparison => "green_comparison",
            Self::Potential => "potential",
            Self::FaberKrahn => "faber_krahn",
            Self::Semigroup => "semigroup",
            Self::FundamentalBound => "fundamental_bound",
            Self::SmoothingRate => "smoothing_rate",
            Self::HyperbolicAcceleration => "hyperbolic_acceleration",
            Self::WeightedSmoothing => "weighted_smoothing",
            Self::DecayClass => "decay_class",
            Self::BumpSum => "bump_sum",
            Self::WdsResidual => "wds_residual",
            Self::MonotoneLimit => "monotone_limit",
        }
    }
}

fn one() -> f64 {
    1.0
}

fn default_newton_tol() -> f64 {
    1e-10
}

fn default_newton_max_iter() -> usize {
    50
}

fn default_boundary_cap() -> f64 {
    1e-4
}

fn default_output() -> PathBuf {
    PathBuf::from("runs")
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,

    pub dimension: usize,
    pub warping: WarpingKind,
    #[serde(default = "one")]
    pub curvature: f64,
    #[serde(default)]
    pub custom_warping: Option<String>,

    pub r_max: f64,
    pub n_nodes: usize,
    #[serde(default = "one")]
    pub grading: f64,

    pub s: f64,
    pub m: f64,
    #[serde(default)]
    pub linear_diagnostic: bool,

    pub datum: DatumKind,
    #[serde(default)]
    pub datum_radius: Option<f64>,
    #[serde(default)]
    pub datum_a: Option<f64>,
    #[serde(default)]
    pub datum_cap: Option<f64>,
    #[serde(default)]
    pub datum_j: Option<usize>,
    #[serde(default)]
    pub datum_file: Option<PathBuf>,
    #[serde(default)]
    pub allow_inadmissible: bool,

    pub t_min: f64,
    pub t_max: f64,
    pub q: f64,

    #[serde(default = "default_newton_tol")]
    pub newton_tol: f64,
    #[serde(default = "default_newton_max_iter")]
    pub newton_max_iter: usize,
    #[serde(default = "default_boundary_cap")]
    pub boundary_mass_cap: f64,

    #[serde(default)]
    pub checks: Vec<CheckName>,
    #[serde(default)]
    pub fit_window: Option<[f64; 2]>,
    #[serde(default)]
    pub comparison_curvature: Option<f64>,

    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string().trim_end().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a config; relative `datum_file` paths are taken
    /// relative to the config file.
    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::parse(&text)?;
        if let Some(file) = &cfg.datum_file {
            if file.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                cfg.datum_file = Some(base.join(file));
            }
        }
        Ok((cfg, text))
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| "unnamed".into())
    }

    pub fn manifold(&self) -> Result<ModelManifold> {
        let m = match self.warping {
            WarpingKind::Euclidean => ModelManifold::euclidean(self.dimension)?,
            WarpingKind::Hyperbolic => ModelManifold::hyperbolic(self.dimension, self.curvature)?,
            WarpingKind::Custom => {
                let name = self
                    .custom_warping
                    .as_deref()
                    .ok_or_else(|| CliError::config("custom_warping", "required when warping = \"custom\""))?;
                let w = CustomWarping::builtin(name).map_err(|_| {
                    CliError::config("custom_warping", format!("unknown built-in warping \"{name}\""))
                })?;
                ModelManifold::new(self.dimension, Warping::Custom(w))?
            }
        };
        Ok(m)
    }

    pub fn has(&self, check: CheckName) -> bool {
        self.checks.contains(&check)
    }

    fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: String| Err(CliError::config(key, reason));
        if self.dimension == 0 {
            return bad("dimension", "need dimension >= 1".into());
        }
        if self.warping == WarpingKind::Hyperbolic && !(self.curvature > 0.0 && self.curvature.is_finite()) {
            return bad("curvature", format!("need curvature > 0, got {}", self.curvature));
        }
        if self.warping != WarpingKind::Custom && self.custom_warping.is_some() {
            return bad("custom_warping", "only meaningful with warping = \"custom\"".into());
        }
        if !(self.r_max > 0.0 && self.r_max.is_finite()) {
            return bad("r_max", format!("need r_max > 0, got {}", self.r_max));
        }
        if self.n_nodes < 16 {
            return bad("n_nodes", format!("need at least 16 nodes, got {}", self.n_nodes));
        }
        if !(self.grading >= 1.0 && self.grading.is_finite()) {
            return bad("grading", format!("need grading >= 1, got {}", self.grading));
        }
        if !(self.s > 0.0 && self.s < 1.0) {
            return bad("s", format!("need 0 < s < 1, got {}", self.s));
        }
        if self.m == 1.0 {
            if !self.linear_diagnostic {
                return bad("m", "m = 1 is the linear flow; set linear_diagnostic = true to run it".into());
            }
        } else if !(self.m > 1.0 && self.m.is_finite()) {
            return bad("m", format!("need m > 1, got {}", self.m));
        }
        if 2.0 * self.s >= self.dimension as f64 {
            return bad("s", format!("need 2s < dimension for a finite Green function, got s = {}", self.s));
        }
        if !(self.t_min > 0.0) {
            return bad("t_min", format!("need t_min > 0, got {}", self.t_min));
        }
        if !(self.t_max > self.t_min && self.t_max.is_finite()) {
            return bad("t_max", format!("need t_min < t_max, got [{}, {}]", self.t_min, self.t_max));
        }
        if !(self.q > 1.0 && self.q.is_finite()) {
            return bad("q", format!("need q > 1, got {}", self.q));
        }
        if !(self.newton_tol > 0.0) {
            return bad("newton_tol", format!("need newton_tol > 0, got {}", self.newton_tol));
        }
        if self.newton_max_iter == 0 {
            return bad("newton_max_iter", "need at least one iteration".into());
        }
        if !(self.boundary_mass_cap > 0.0) {
            return bad("boundary_mass_cap", format!("need a positive cap, got {}", self.boundary_mass_cap));
        }
        self.validate_datum()?;
        if let Some([lo, hi]) = self.fit_window {
            if !(lo > 0.0 && hi > lo) {
                return bad("fit_window", format!("need 0 < lo < hi, got [{lo}, {hi}]"));
            }
        }
        self.validate_checks()
    }

    /// Lower bound on the power-tail exponent for the weighted data class.
    pub fn tail_threshold(&self) -> f64 {
        match self.warping {
            WarpingKind::Euclidean => 2.0 * self.s,
            _ => self.s,
        }
    }

    fn validate_datum(&self) -> Result<()> {
        let need = |key: &str, v: Option<f64>| -> Result<f64> {
            v.ok_or_else(|| CliError::config(key, "required by this datum kind"))
        };
        match self.datum {
            DatumKind::Ball => {
                let r = need("datum_radius", self.datum_radius)?;
                if !(r > 0.0 && r < self.r_max) {
                    return Err(CliError::config("datum_radius", format!("need 0 < radius < r_max, got {r}")));
                }
            }
            DatumKind::PowerTail => {
                let a = need("datum_a", self.datum_a)?;
                let cap = self.datum_cap.unwrap_or(1.0);
                if !(cap > 0.0 && cap < self.r_max) {
                    return Err(CliError::config("datum_cap", format!("need 0 < cap < r_max, got {cap}")));
                }
                let threshold = self.tail_threshold();
                if !(a > 0.0) {
                    return Err(CliError::config("datum_a", format!("need a > 0, got {a}")));
                }
                if a <= threshold && !self.allow_inadmissible {
                    return Err(CliError::config(
                        "datum_a",
                        format!("a = {a} is outside the weighted data class (a > {threshold}); set allow_inadmissible = true to run it anyway"),
                    ));
                }
            }
            DatumKind::BumpSum => {
                let j = self
                    .datum_j
                    .ok_or_else(|| CliError::config("datum_j", "required by this datum kind"))?;
                if j == 0 || (j as f64).exp() + 1.0 >= self.r_max {
                    return Err(CliError::config("datum_j", format!("need 1 <= J with e^J + 1 < r_max, got {j}")));
                }
            }
            DatumKind::File => {
                if self.datum_file.is_none() {
                    return Err(CliError::config("datum_file", "required by this datum kind"));
                }
            }
        }
        Ok(())
    }

    fn validate_checks(&self) -> Result<()> {
        let mut seen = self.checks.clone();
        seen.sort();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(CliError::config("checks", "duplicate check"));
        }
        let nonlinear = [
            CheckName::Semigroup,
            CheckName::FundamentalBound,
            CheckName::SmoothingRate,
            CheckName::HyperbolicAcceleration,
            CheckName::WeightedSmoothing,
            CheckName::WdsResidual,
            CheckName::MonotoneLimit,
        ];
        for &c in &self.checks {
            let reason = match c {
                _ if self.m == 1.0 && nonlinear.contains(&c) => Some("needs m > 1"),
                CheckName::GreenClosedForm if !self.closed_form_available() => {
                    Some("no closed form: needs the Euclidean space or 3-dimensional hyperbolic space with s = 1/2")
                }
                CheckName::BallGrowth if self.warping == WarpingKind::Custom => {
                    Some("growth exponents are known for the space forms only")
                }
                CheckName::GreenComparison if self.comparison_curvature.is_none() => {
                    Some("needs comparison_curvature")
                }
                CheckName::FaberKrahn if self.dimension != 3 => Some("the reference constant is tabulated for N = 3"),
                CheckName::HyperbolicAcceleration if self.warping != WarpingKind::Hyperbolic => {
                    Some("needs warping = \"hyperbolic\"")
                }
                CheckName::DecayClass | CheckName::MonotoneLimit if self.datum != DatumKind::PowerTail => {
                    Some("needs datum = \"power_tail\"")
                }
                CheckName::DecayClass if self.warping == WarpingKind::Custom => {
                    Some("the class threshold is known for the space forms only")
                }
                CheckName::BumpSum if self.datum != DatumKind::BumpSum => Some("needs datum = \"bump_sum\""),
                _ => None,
            };
            if let Some(reason) = reason {
                return Err(CliError::config("checks", format!("{}: {reason}", c.as_str())));
            }
        }
        Ok(())
    }

    pub fn closed_form_available(&self) -> bool {
        match self.warping {
            WarpingKind::Euclidean => true,
            WarpingKind::Hyperbolic => self.dimension == 3 && self.s == 0.5,
            WarpingKind::Custom => false,
        }
    }
}
