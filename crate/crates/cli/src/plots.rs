//! The `plots` verb: plot-ready tables derived from a finished run.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use fracpme::fit::least_squares;

use crate::closed_form::reference_green;
use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::run::{num, publish, MANIFEST};

struct TrajectoryRow {
    t: f64,
    linf: f64,
}

fn read_columns(path: &Path, wanted: &[&str]) -> Result<Vec<Vec<f64>>> {
    let bad = |reason: String| CliError::Input(format!("{}: {reason}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let idx: Vec<usize> = wanted
        .iter()
        .map(|w| headers.iter().position(|h| h == *w).ok_or_else(|| bad(format!("missing column `{w}`"))))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let row = idx
            .iter()
            .map(|&i| rec[i].parse::<f64>().map_err(|e| bad(format!("row {}: {e}", k + 1))))
            .collect::<Result<Vec<f64>>>()?;
        out.push(row);
    }
    Ok(out)
}

fn table(header: &str, rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = format!("{header}\n");
    for r in rows {
        let line: Vec<String> = r.iter().map(|&v| num(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Writes `<run_dir>/plots` and returns its path.
pub fn render(run_dir: &Path) -> Result<PathBuf> {
    if !run_dir.join(MANIFEST).is_file() {
        return Err(CliError::Input(format!("{} is not a finished run (no {MANIFEST})", run_dir.display())));
    }
    let text = fs::read_to_string(run_dir.join("config.cfg")).map_err(|e| CliError::io(&run_dir.join("config.cfg"), e))?;
    let cfg = ExperimentConfig::parse(&text)?;
    let traj: Vec<TrajectoryRow> = read_columns(&run_dir.join("trajectory.csv"), &["t", "Linf"])?
        .into_iter()
        .map(|r| TrajectoryRow { t: r[0], linf: r[1] })
        .filter(|r| r.t > 0.0 && r.linf > 0.0)
        .collect();
    if traj.is_empty() {
        return Err(CliError::Input(format!("{}: trajectory has no positive samples", run_dir.display())));
    }
    let green = read_columns(&run_dir.join("green.csv"), &["r", "G"])?;

    let t_end = traj[traj.len() - 1].t;
    let (lo, hi) = cfg.fit_window.map_or((0.1 * t_end, t_end), |w| (w[0], w[1]));
    let window: Vec<&TrajectoryRow> = traj.iter().filter(|r| r.t >= lo * (1.0 - 1e-12) && r.t <= hi * (1.0 + 1e-12)).collect();
    let fit = if window.len() >= 2 {
        let x: Vec<f64> = window.iter().map(|r| r.t.log10()).collect();
        let y: Vec<f64> = window.iter().map(|r| r.linf.log10()).collect();
        least_squares(&x, &y).ok()
    } else {
        None
    };

    let mut files: Vec<(&str, String)> = Vec::new();
    files.push((
        "decay_loglog.csv",
        table(
            "log10_t,log10_Linf,fit_line",
            traj.iter().map(|r| {
                let x = r.t.log10();
                vec![x, r.linf.log10(), fit.as_ref().map_or(f64::NAN, |f| f.eval(x))]
            }),
        ),
    ));

    let n = cfg.dimension as f64;
    let theta = if cfg.m > 1.0 { 1.0 / (2.0 * cfg.s + n * (cfg.m - 1.0)) } else { f64::NAN };
    files.push((
        "ratio_series.csv",
        table(
            "t,Linf_t_theta1N,Linf_t_inv_m_minus_1",
            traj.iter().map(|r| vec![r.t, r.linf * r.t.powf(n * theta), r.linf * r.t.powf(1.0 / (cfg.m - 1.0))]),
        ),
    ));

    let has_reference = if let Some(exact) = reference_green(&cfg) {
        files.push((
            "green_vs_closedform.csv",
            table(
                "r,G,closed_form,rel_error",
                green.iter().map(|row| {
                    let g = exact(row[0]);
                    vec![row[0], row[1], g, (row[1] - g) / g]
                }),
            ),
        ));
        true
    } else {
        false
    };
    files.push(("plot.py", script(&cfg.label(), fit.as_ref().map(|f| f.slope), has_reference)));

    let target = run_dir.join("plots");
    let partial = run_dir.join(".plots.partial");
    if partial.exists() {
        fs::remove_dir_all(&partial).map_err(|e| CliError::io(&partial, e))?;
    }
    fs::create_dir(&partial).map_err(|e| CliError::io(&partial, e))?;
    for (name, body) in files {
        let p = partial.join(name);
        fs::write(&p, body).map_err(|e| CliError::io(&p, e))?;
    }
    publish(&partial, &target)?;
    Ok(target)
}

fn script(title: &str, slope: Option<f64>, reference: bool) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "import csv\nimport matplotlib.pyplot as plt\n");
    let _ = writeln!(s, "def read(name):\n    with open(name) as f:\n        rows = list(csv.DictReader(f))\n    return {{k: [float(r[k]) for r in rows] for k in rows[0]}}\n");
    let _ = writeln!(s, "d = read('decay_loglog.csv')");
    let _ = writeln!(s, "plt.plot(d['log10_t'], d['log10_Linf'], label='Linf')");
    let label = slope.map_or("fit".to_string(), |v| format!("fit, slope {v:.4}"));
    let _ = writeln!(s, "plt.plot(d['log10_t'], d['fit_line'], '--', label='{label}')");
    let _ = writeln!(s, "plt.xlabel('log10 t'); plt.ylabel('log10 Linf'); plt.title('{title}'); plt.legend()");
    let _ = writeln!(s, "plt.savefig('decay_loglog.png', dpi=150); plt.clf()\n");
    let _ = writeln!(s, "r = read('ratio_series.csv')");
    let _ = writeln!(s, "plt.loglog(r['t'], r['Linf_t_theta1N'], label='Linf t^(N theta1)')");
    let _ = writeln!(s, "plt.loglog(r['t'], r['Linf_t_inv_m_minus_1'], label='Linf t^(1/(m-1))')");
    let _ = writeln!(s, "plt.xlabel('t'); plt.legend(); plt.savefig('ratio_series.png', dpi=150); plt.clf()");
    if reference {
        let _ = writeln!(s, "\ng = read('green_vs_closedform.csv')");
        let _ = writeln!(s, "plt.loglog(g['r'], g['G'], label='computed')");
        let _ = writeln!(s, "plt.loglog(g['r'], g['closed_form'], '--', label='closed form')");
        let _ = writeln!(s, "plt.xlabel('r'); plt.legend(); plt.savefig('green_vs_closedform.png', dpi=150)");
    }
    s
}
