use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fracpme_cli::{compare, plots, run, CliError};

/// Solve radial fractional porous medium problems and check the results.
#[derive(Parser)]
#[command(name = "fracpme", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment; exit 0 if every check passes, 1 otherwise.
    Run {
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Write plot-ready tables and a matplotlib script into `<run>/plots`.
    Plots { run_dir: PathBuf },
    /// Side-by-side table of check values from several runs.
    Compare {
        #[arg(required = true, num_args = 2..)]
        runs: Vec<PathBuf>,
    },
    /// List the runs under a directory.
    List { root: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Run { config, output_dir } => {
            let outcome = run::execute(&config, output_dir.as_deref())?;
            for c in &outcome.checks {
                println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.note);
            }
            println!("{}", outcome.dir.display());
            Ok(if outcome.pass { 0 } else { 1 })
        }
        Command::Plots { run_dir } => {
            println!("{}", plots::render(&run_dir)?.display());
            Ok(0)
        }
        Command::Compare { runs } => {
            let rows = compare::compare(&runs)?;
            print!("{}", compare::format_table(&runs, &rows));
            Ok(0)
        }
        Command::List { root } => {
            for e in compare::list(&root)? {
                println!("{:<24} {:<10} {:<32} {}", e.dir, e.status.as_str(), e.name, e.manifold);
            }
            Ok(0)
        }
    }
}
