//! The `run` verb: solve, evaluate checks and write the run directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use fracpme::semigroup::Trajectory;
use sha2::{Digest, Sha256};

use crate::checks::{diagnostics, evaluate, CheckOutcome, Row};
use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::pipeline::Context;

pub const MANIFEST: &str = "manifest.txt";
pub const FAILED_MARKER: &str = "FAILED";

/// Where a run ended up and whether all its checks passed.
#[derive(Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub pass: bool,
    pub checks: Vec<CheckOutcome>,
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(2 * bytes.len()), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

/// Run directory name: first 12 hex digits of the config's digest.
pub fn run_name(config_text: &str) -> String {
    format!("run-{}", &sha256_hex(config_text.as_bytes())[..12])
}

pub fn execute(config_path: &Path, output_override: Option<&Path>) -> Result<RunOutcome> {
    let (cfg, text) = ExperimentConfig::load(config_path)?;
    let root = output_override.map_or_else(|| cfg.output_dir.clone(), Path::to_path_buf);
    let name = run_name(&text);
    log::info!("{}: {} on {}", cfg.label(), name, cfg.manifold()?.label());

    let ctx = Context::prepare(cfg)?;
    fs::create_dir_all(&root).map_err(|e| CliError::io(&root, e))?;
    let partial = root.join(format!(".{name}.partial"));
    if partial.exists() {
        fs::remove_dir_all(&partial).map_err(|e| CliError::io(&partial, e))?;
    }
    fs::create_dir(&partial).map_err(|e| CliError::io(&partial, e))?;
    write(&partial.join("config.cfg"), text.as_bytes())?;

    let traj = match ctx.evolve(&ctx.u0, &ctx.solver) {
        Ok(t) => t,
        Err(e) => {
            write(&partial.join(FAILED_MARKER), format!("{e}\n").as_bytes())?;
            publish(&partial, &root.join(format!("{name}.failed")))?;
            return Err(e);
        }
    };
    let checks = evaluate(&ctx, &traj);
    let mut rows: Vec<Row> = checks.iter().flat_map(|c| c.rows.iter().cloned()).collect();
    rows.extend(diagnostics(&ctx, &traj));
    let pass = checks.iter().all(|c| c.pass);

    let files = [
        ("trajectory.csv", trajectory_csv(&traj)?),
        ("profiles.csv", profiles_csv(&traj)?),
        ("green.csv", green_csv(&ctx)?),
        ("checks.csv", checks_csv(&ctx, &rows)?),
        ("summary.txt", summary(&ctx, &traj, &checks, pass).into_bytes()),
    ];
    let mut manifest = format!("fracpme-cli {}\n", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(manifest, "{}  config.cfg", sha256_hex(text.as_bytes()));
    for (file, bytes) in &files {
        write(&partial.join(file), bytes)?;
        let _ = writeln!(manifest, "{}  {file}", sha256_hex(bytes));
    }
    write(&partial.join(MANIFEST), manifest.as_bytes())?;
    let dir = root.join(&name);
    publish(&partial, &dir)?;
    Ok(RunOutcome { dir, pass, checks })
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Replace `target` with the finished temporary directory.
pub fn publish(partial: &Path, target: &Path) -> Result<()> {
    if target.exists() {
        fs::remove_dir_all(target).map_err(|e| CliError::io(target, e))?;
    }
    fs::rename(partial, target).map_err(|e| CliError::io(target, e))
}

/// Shortest round-trip representation, exponent form for small and large values.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

fn csv_bytes(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Input(format!("csv encoding: {e}"));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::Input(format!("csv encoding: {e}")))
}

fn trajectory_csv(traj: &Trajectory) -> Result<Vec<u8>> {
    csv_bytes(
        &["t", "L1", "L2", "Linf", "weighted_rho0", "boundary_mass_fraction", "newton_iterations"],
        traj.records().iter().map(|r| {
            vec![
                num(r.t),
                num(r.l1),
                num(r.l2),
                num(r.linf),
                num(r.weighted_rho0),
                num(r.boundary_mass_fraction),
                r.newton_iterations.to_string(),
            ]
        }),
    )
}

/// About 25 recorded times, evenly spaced in `log t`.
pub fn profile_indices(times: &[f64]) -> Vec<usize> {
    if times.len() <= 26 {
        return (0..times.len()).collect();
    }
    let first = times.iter().position(|&t| t > 0.0).unwrap_or(0);
    let (lo, hi) = (times[first].ln(), times[times.len() - 1].ln());
    let mut picked = vec![0];
    for j in 0..25 {
        let target = lo + (hi - lo) * j as f64 / 24.0;
        let k = (first..times.len())
            .min_by(|&a, &b| (times[a].ln() - target).abs().total_cmp(&(times[b].ln() - target).abs()))
            .unwrap_or(first);
        if picked.last() != Some(&k) {
            picked.push(k);
        }
    }
    picked
}

fn profiles_csv(traj: &Trajectory) -> Result<Vec<u8>> {
    let times = traj.times();
    let nodes = traj.grid().nodes().to_vec();
    let rows = profile_indices(&times).into_iter().flat_map(|k| {
        let t = times[k];
        let u = traj.profile_values(k).to_vec();
        nodes.clone().into_iter().zip(u).map(move |(r, v)| vec![num(t), num(r), num(v)])
    });
    csv_bytes(&["t", "r", "u"], rows)
}

fn green_csv(ctx: &Context) -> Result<Vec<u8>> {
    let nodes = ctx.op.grid().nodes();
    csv_bytes(
        &["r", "G"],
        nodes.iter().zip(ctx.green.values()).map(|(r, g)| vec![num(*r), num(*g)]),
    )
}

fn checks_csv(ctx: &Context, rows: &[Row]) -> Result<Vec<u8>> {
    let manifold = ctx.manifold.label();
    let (n, s) = (ctx.cfg.dimension.to_string(), ctx.cfg.s.to_string());
    csv_bytes(
        &["quantity", "manifold", "N", "s", "parameter", "value", "bound", "pass"],
        rows.iter().map(|r| {
            vec![
                r.quantity.clone(),
                manifold.clone(),
                n.clone(),
                s.clone(),
                r.parameter.clone(),
                num(r.value),
                r.bound.clone(),
                r.pass.map_or(String::new(), |p| p.to_string()),
            ]
        }),
    )
}

fn summary(ctx: &Context, traj: &Trajectory, checks: &[CheckOutcome], pass: bool) -> String {
    let cfg = &ctx.cfg;
    let mut out = String::new();
    let _ = writeln!(out, "experiment: {}", cfg.label());
    let _ = writeln!(out, "manifold: {} (N = {})", ctx.manifold.label(), cfg.dimension);
    let _ = writeln!(out, "grid: r_max = {}, {} cells, grading {}", cfg.r_max, cfg.n_nodes, cfg.grading);
    let _ = writeln!(out, "equation: s = {}, m = {}", cfg.s, cfg.m);
    let _ = writeln!(out, "datum: {:?}, mass {}", cfg.datum, ctx.mass());
    let _ = writeln!(out, "times: {} steps in [{}, {}], ratio {}", traj.len(), cfg.t_min, cfg.t_max, cfg.q);
    if cfg.m > 1.0 {
        let _ = writeln!(out, "theta1 = {}, mass threshold time = {}", ctx.theta1(), ctx.threshold());
    }
    if let Some(last) = traj.records().last() {
        let _ = writeln!(
            out,
            "final: t = {}, L1 = {}, Linf = {}, boundary mass fraction = {}",
            last.t, last.l1, last.linf, last.boundary_mass_fraction
        );
    }
    let _ = writeln!(out);
    for c in checks {
        let _ = writeln!(out, "[{}] {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.note);
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "overall: {}", if pass { "PASS" } else { "FAIL" });
    out
}
