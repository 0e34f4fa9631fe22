use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fracpme_cli::compare::{compare, read_checks};
use fracpme_cli::config::ExperimentConfig;
use tempfile::TempDir;

fn fracpme(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracpme")).args(args).output().expect("spawn fracpme")
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

const SMALL: &str = r#"name = "small"
dimension = 3
warping = "euclidean"
r_max = 12.0
n_nodes = 128
s = 0.5
m = 2.0
datum = "ball"
datum_radius = 1.0
t_min = 0.001
t_max = 2.0
q = 1.2
boundary_mass_cap = 0.5
checks = ["subordination", "semigroup"]
"#;

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn run_dir(out: &Output) -> PathBuf {
    let stdout = String::from_utf8_lossy(&out.stdout);
    PathBuf::from(stdout.lines().last().expect("run directory on stdout"))
}

fn run_config(config: &Path, out_root: &Path) -> (Output, PathBuf) {
    let out = fracpme(&["run", config.to_str().unwrap(), "--output-dir", out_root.to_str().unwrap()]);
    assert!(
        out.status.code().is_some_and(|c| c <= 1),
        "run failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let dir = run_dir(&out);
    (out, dir)
}

fn value(dir: &Path, quantity: &str) -> f64 {
    read_checks(dir)
        .unwrap()
        .into_iter()
        .find(|r| r.quantity == quantity)
        .unwrap_or_else(|| panic!("{quantity} missing"))
        .value
}

#[test]
fn out_of_range_order_is_a_config_error_naming_the_key() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "bad.cfg", &SMALL.replace("s = 0.5", "s = 1.5"));
    let out = fracpme(&["run", cfg.to_str().unwrap(), "--output-dir", tmp.path().join("runs").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`s`"));
    assert!(!tmp.path().join("runs").exists());
}

#[test]
fn unknown_key_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "bad.cfg", &format!("{SMALL}nodes = 5\n"));
    let out = fracpme(&["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nodes"));
}

#[test]
fn missing_config_file_exits_with_two() {
    let out = fracpme(&["run", "/nonexistent/none.cfg"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "small.cfg", SMALL);
    let (first, a) = run_config(&cfg, &tmp.path().join("one"));
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stdout));
    let (_, b) = run_config(&cfg, &tmp.path().join("two"));
    assert_eq!(a.file_name(), b.file_name());
    for name in ["config.cfg", "trajectory.csv", "profiles.csv", "green.csv", "checks.csv", "summary.txt", "manifest.txt"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name} differs");
    }
    let manifest = fs::read_to_string(a.join("manifest.txt")).unwrap();
    assert_eq!(manifest.lines().count(), 7);
    assert!(manifest.lines().nth(1).unwrap().ends_with("  config.cfg"));
}

#[test]
fn rerun_replaces_the_previous_directory() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "small.cfg", SMALL);
    let (_, a) = run_config(&cfg, tmp.path());
    fs::write(a.join("stray.txt"), "x").unwrap();
    let (_, b) = run_config(&cfg, tmp.path());
    assert_eq!(a, b);
    assert!(!b.join("stray.txt").exists());
    let leftovers: Vec<_> = fs::read_dir(tmp.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().ends_with(".partial"))
        .collect();
    assert!(leftovers.is_empty());
}

#[test]
fn solver_failure_exits_with_three_and_marks_the_run() {
    let tmp = TempDir::new().unwrap();
    let text = SMALL.replace("boundary_mass_cap = 0.5", "boundary_mass_cap = 1e-12");
    let cfg = write_config(tmp.path(), "fail.cfg", &text);
    let out = fracpme(&["run", cfg.to_str().unwrap(), "--output-dir", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let failed: Vec<PathBuf> = fs::read_dir(tmp.path())
        .unwrap()
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.to_string_lossy().ends_with(".failed"))
        .collect();
    assert_eq!(failed.len(), 1);
    assert!(failed[0].join("FAILED").exists());
    assert!(!failed[0].join("manifest.txt").exists());
    let listing = fracpme(&["list", tmp.path().to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&listing.stdout).contains("FAILED"));
}

#[test]
fn failing_check_exits_with_one() {
    let tmp = TempDir::new().unwrap();
    // The Dirichlet wall at r = 12 pulls the kernel well below the Riesz
    // kernel at r_max/3.
    let text = SMALL.replace(r#"["subordination", "semigroup"]"#, r#"["green_closed_form"]"#);
    let cfg = write_config(tmp.path(), "riesz.cfg", &text);
    let (out, dir) = run_config(&cfg, tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL green_closed_form"));
    let row = read_checks(&dir).unwrap().into_iter().find(|r| r.quantity == "green_closed_form/max_rel_err").unwrap();
    assert_eq!(row.pass, "false");
    assert!(dir.join("manifest.txt").exists());
}

#[test]
fn reference_configuration_passes() {
    let tmp = TempDir::new().unwrap();
    let (out, dir) = run_config(&configs_dir().join("euclidean_s1.cfg"), tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let slope = value(&dir, "smoothing_rate/slope");
    assert!((slope + 0.75).abs() < 0.08, "slope {slope}");

    let plots = fracpme(&["plots", dir.to_str().unwrap()]);
    assert_eq!(plots.status.code(), Some(0), "{}", String::from_utf8_lossy(&plots.stderr));
    let decay = fs::read_to_string(dir.join("plots/decay_loglog.csv")).unwrap();
    assert!(decay.starts_with("log10_t,log10_Linf,fit_line\n"));
    assert!(decay.lines().count() > 100);
    assert!(dir.join("plots/ratio_series.csv").exists());
    assert!(dir.join("plots/plot.py").exists());
    assert!(dir.join("plots/green_vs_closedform.csv").exists());
}

#[test]
fn plots_for_a_hyperbolic_run_include_the_closed_form() {
    let tmp = TempDir::new().unwrap();
    let text = SMALL.replace("warping = \"euclidean\"", "warping = \"hyperbolic\"");
    let cfg = write_config(tmp.path(), "h.cfg", &text);
    let (_, dir) = run_config(&cfg, tmp.path());
    let out = fracpme(&["plots", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(dir.join("plots/green_vs_closedform.csv")).unwrap();
    assert!(table.starts_with("r,G,closed_form,rel_error\n"));
    // Mid-range agreement even on a coarse grid.
    let mid: Vec<f64> = table
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .filter(|v| v[0] > 0.5 && v[0] < 3.0)
        .map(|v| v[3].abs())
        .collect();
    assert!(!mid.is_empty() && mid.iter().all(|e| *e < 0.05), "{mid:?}");
}

#[test]
fn plots_reject_an_empty_trajectory_without_writing() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "small.cfg", SMALL);
    let (_, dir) = run_config(&cfg, tmp.path());
    fs::write(dir.join("trajectory.csv"), "t,L1,L2,Linf,weighted_rho0,boundary_mass_fraction,newton_iterations\n").unwrap();
    let out = fracpme(&["plots", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.join("plots").exists());
    assert!(!dir.join(".plots.partial").exists());
}

#[test]
fn plots_require_a_finished_run() {
    let tmp = TempDir::new().unwrap();
    let out = fracpme(&["plots", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn comparing_identical_runs_gives_zero_deltas() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "small.cfg", SMALL);
    let (_, a) = run_config(&cfg, &tmp.path().join("a"));
    let (_, b) = run_config(&cfg, &tmp.path().join("b"));
    let rows = compare(&[a.clone(), b.clone()]).unwrap();
    assert!(!rows.is_empty());
    for r in &rows {
        assert_eq!(r.deltas()[1], Some(0.0), "{}", r.quantity);
        assert!(!r.regressed());
    }
    let out = fracpme(&["compare", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("semigroup/order_violation"));
}

#[test]
fn compare_needs_two_runs_with_common_quantities() {
    let tmp = TempDir::new().unwrap();
    let header = "quantity,manifold,N,s,parameter,value,bound,pass\n";
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    fs::create_dir(&a).unwrap();
    fs::create_dir(&b).unwrap();
    fs::write(a.join("checks.csv"), format!("{header}x/one,euclidean,3,0.5,p,1.0,< 2,true\n")).unwrap();
    fs::write(b.join("checks.csv"), format!("{header}x/two,euclidean,3,0.5,p,1.0,< 2,true\n")).unwrap();
    assert_eq!(fracpme(&["compare", a.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(fracpme(&["compare", a.to_str().unwrap(), b.to_str().unwrap()]).status.code(), Some(2));

    fs::write(b.join("checks.csv"), format!("{header}x/one,euclidean,3,0.5,p,3.0,< 2,false\n")).unwrap();
    let rows = compare(&[a.clone(), b.clone()]).unwrap();
    assert_eq!(rows[0].deltas()[1], Some(2.0));
    assert!(rows[0].regressed());
    let out = fracpme(&["compare", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("REGRESSION"));
}

/// Same datum on R^3 and H^3: the late sup-norm decay separates the two.
#[test]
fn euclidean_and_hyperbolic_late_decay_differ() {
    let tmp = TempDir::new().unwrap();
    let base = SMALL
        .replace("n_nodes = 128", "n_nodes = 256")
        .replace("r_max = 12.0", "r_max = 20.0")
        .replace("t_max = 2.0", "t_max = 1000.0")
        .replace("boundary_mass_cap = 0.5", "boundary_mass_cap = 1.0")
        .replace(r#"["subordination", "semigroup"]"#, r#"["subordination"]"#);
    let flat = write_config(tmp.path(), "flat.cfg", &base);
    let hyper = write_config(tmp.path(), "hyper.cfg", &base.replace("\"euclidean\"", "\"hyperbolic\""));
    let (_, a) = run_config(&flat, tmp.path());
    let (_, b) = run_config(&hyper, tmp.path());
    let rows = compare(&[a, b]).unwrap();
    let late = rows.iter().find(|r| r.quantity == "diagnostic/late_linf_slope").unwrap();
    let gap = late.deltas()[1].unwrap();
    assert!(gap <= -0.1, "late slopes {:?}", late.values);
}

#[test]
fn refining_the_grid_barely_moves_the_decay_rate() {
    let tmp = TempDir::new().unwrap();
    let base = fs::read_to_string(configs_dir().join("euclidean_s1.cfg"))
        .unwrap()
        .replace(r#"["subordination", "semigroup", "fundamental_bound", "smoothing_rate", "wds_residual"]"#, r#"["smoothing_rate"]"#);
    assert!(base.contains(r#"checks = ["smoothing_rate"]"#));
    let fine = write_config(tmp.path(), "fine.cfg", &base);
    let coarse = write_config(tmp.path(), "coarse.cfg", &base.replace("n_nodes = 1024", "n_nodes = 512"));
    let (_, a) = run_config(&coarse, tmp.path());
    let (_, b) = run_config(&fine, tmp.path());
    let rows = compare(&[a, b]).unwrap();
    let slope = rows.iter().find(|r| r.quantity == "smoothing_rate/slope").unwrap();
    assert!(slope.deltas()[1].unwrap().abs() < 0.02, "{:?}", slope.values);
}

#[test]
fn list_reports_status_and_manifold() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "small.cfg", SMALL);
    run_config(&cfg, tmp.path());
    let out = fracpme(&["list", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    let line = text.lines().find(|l| l.starts_with("run-")).unwrap();
    assert!(line.contains("PASS") && line.contains("small") && line.contains("euclidean"), "{line}");
}

#[test]
fn bundled_configs_parse() {
    let mut count = 0;
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "cfg") {
            ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            count += 1;
        }
    }
    assert!(count >= 20);
}
