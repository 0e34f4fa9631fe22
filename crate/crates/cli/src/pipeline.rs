//! Manifold, spectrum, datum and flow for one configuration.

use std::path::Path;
use std::sync::Arc;

use fracpme::datum;
use fracpme::estimates::theta1;
use fracpme::green::{green_profile, GreenProfile};
use fracpme::manifold::ModelManifold;
use fracpme::semigroup::{evolve_with, geometric_times, SolverConfig, Stepper, Trajectory};
use fracpme::spectral::{build_spectrum, FractionalOperator, RadialField, SpectralDecomposition};

use crate::config::{CheckName, DatumKind, ExperimentConfig, WarpingKind};
use crate::error::{CliError, Result};

pub struct Context {
    pub cfg: ExperimentConfig,
    pub manifold: ModelManifold,
    pub spectrum: Arc<SpectralDecomposition>,
    pub op: FractionalOperator,
    pub green: GreenProfile,
    pub stepper: Stepper,
    pub u0: RadialField,
    pub solver: SolverConfig,
}

impl Context {
    pub fn prepare(cfg: ExperimentConfig) -> Result<Self> {
        let manifold = cfg.manifold()?;
        let spectrum = build_spectrum(&manifold, cfg.r_max, cfg.n_nodes, cfg.grading)?;
        let op = FractionalOperator::new(cfg.s, spectrum.clone())?;
        let green = green_profile(&op)?;
        let stepper = Stepper::new(&op, cfg.m)?;
        let u0 = build_datum(&cfg, &op)?;
        let mut solver = SolverConfig::new(geometric_times(cfg.t_min, cfg.t_max, cfg.q)?);
        solver.newton_tol = cfg.newton_tol;
        solver.newton_max_iter = cfg.newton_max_iter;
        solver.boundary_mass_cap = Some(cfg.boundary_mass_cap);
        solver.linear_diagnostic = cfg.linear_diagnostic;
        let ctx = Self { cfg, manifold, spectrum, op, green, stepper, u0, solver };
        ctx.validate_horizons()?;
        Ok(ctx)
    }

    pub fn mass(&self) -> f64 {
        self.u0.lp_norm(1.0)
    }

    /// `‖u₀‖₁^{-(m-1)}`, the time after which mass dominates the decay.
    pub fn threshold(&self) -> f64 {
        self.mass().powf(-(self.cfg.m - 1.0))
    }

    pub fn theta1(&self) -> f64 {
        theta1(self.cfg.dimension, self.cfg.s, self.cfg.m)
    }

    /// Default window of the smoothing fit: from the threshold (or ten
    /// times the first step) to the end of the run.
    pub fn fit_window(&self) -> (f64, f64) {
        match self.cfg.fit_window {
            Some([lo, hi]) => (lo, hi),
            None => (self.threshold().max(10.0 * self.cfg.t_min), self.cfg.t_max),
        }
    }

    pub fn evolve(&self, u0: &RadialField, solver: &SolverConfig) -> Result<Trajectory> {
        evolve_with(&self.stepper, &self.green, u0, solver).map_err(|e| CliError::Solver(e.to_string()))
    }

    /// Time-horizon requirements that depend on the datum's mass.
    fn validate_horizons(&self) -> Result<()> {
        let cfg = &self.cfg;
        if cfg.m == 1.0 {
            return Ok(());
        }
        if cfg.has(CheckName::SmoothingRate) {
            let (lo, hi) = self.fit_window();
            if lo < self.threshold() * (1.0 - 1e-12) {
                return Err(CliError::config(
                    "fit_window",
                    format!("window starts at {lo}, before the threshold {:.6}", self.threshold()),
                ));
            }
            if hi > cfg.t_max || hi / lo < 10.0 {
                return Err(CliError::config(
                    "fit_window",
                    format!("need a window of at least one decade inside [t_min, t_max], got [{lo}, {hi}]"),
                ));
            }
        }
        if cfg.has(CheckName::HyperbolicAcceleration) && cfg.warping == WarpingKind::Hyperbolic {
            let n = cfg.dimension as f64;
            let t_star = ((n - 1.0) * (cfg.m - 1.0) * cfg.curvature.sqrt()).exp() / self.mass().powf(cfg.m - 1.0);
            if cfg.t_max < 50.0 * t_star {
                return Err(CliError::config("t_max", format!("the check needs t_max >= 50 t* = {:.4}", 50.0 * t_star)));
            }
        }
        if cfg.has(CheckName::DecayClass) && cfg.r_max < 16.0 {
            return Err(CliError::config("r_max", "decay_class needs r_max >= 16"));
        }
        Ok(())
    }
}

fn build_datum(cfg: &ExperimentConfig, op: &FractionalOperator) -> Result<RadialField> {
    let grid = op.grid();
    let u0 = match cfg.datum {
        DatumKind::Ball => datum::ball_indicator(grid, cfg.datum_radius.unwrap_or(1.0))?,
        DatumKind::PowerTail => datum::power_tail(grid, cfg.datum_a.unwrap_or(1.0), cfg.datum_cap.unwrap_or(1.0))?,
        DatumKind::BumpSum => datum::bump_sum(grid, cfg.datum_j.unwrap_or(1))?,
        DatumKind::File => {
            let path = cfg.datum_file.as_deref().ok_or_else(|| CliError::config("datum_file", "missing"))?;
            datum::from_table(grid, &read_table(path)?)?
        }
    };
    if u0.values().iter().any(|&v| v < 0.0) {
        return Err(CliError::config("datum", "the datum must be nonnegative"));
    }
    Ok(u0)
}

/// Two-column `r,u` CSV with a header row.
fn read_table(path: &Path) -> Result<Vec<(f64, f64)>> {
    let bad = |reason: String| CliError::config("datum_file", format!("{}: {reason}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let mut rows = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != 2 {
            return Err(bad(format!("row {} has {} columns, expected 2", k + 1, rec.len())));
        }
        let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| bad(format!("row {}: {e}", k + 1)));
        rows.push((parse(&rec[0])?, parse(&rec[1])?));
    }
    Ok(rows)
}
