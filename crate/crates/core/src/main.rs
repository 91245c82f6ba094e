use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sqfock::harness::{self, ExperimentConfig, Overrides, ResultBundle};
use sqfock::Result;

/// Squeezed-cavity three-photon resonance experiments.
#[derive(Parser)]
#[command(name = "sqfock", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a packaged figure preset.
    Reproduce {
        /// One of fig1, fig3, fig4, fig5, fig6, fig7.
        figure: String,
        #[command(flatten)]
        flags: Flags,
    },
    /// Run an experiment described by a config file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Check a config file without running it.
    Validate { config: PathBuf },
    /// List the packaged presets.
    Presets {
        /// Print the TOML of each preset.
        #[arg(long)]
        show: bool,
    },
}

#[derive(Args)]
struct Flags {
    /// Output base directory; bundles go to <DIR>/<experiment>.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Photon-number cutoff.
    #[arg(long = "nmax", value_name = "N")]
    n_max: Option<usize>,
    /// Time step.
    #[arg(long, value_name = "X")]
    dt: Option<f64>,
    /// Skip the convergence re-runs.
    #[arg(long)]
    fast: bool,
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides { out: self.out.clone(), n_max: self.n_max, dt: self.dt, fast: self.fast }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Reproduce { figure, flags } => {
            let (bundle, dir) = harness::reproduce(&figure, &flags.overrides())?;
            print_bundle(&bundle, &dir);
        }
        Command::Run { config, flags } => {
            let mut cfg = ExperimentConfig::from_path(&config)?;
            cfg.apply(&flags.overrides());
            cfg.validate()?;
            let (bundle, dir) = harness::execute(&cfg)?;
            print_bundle(&bundle, &dir);
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            println!("{}: valid {} config", config.display(), cfg.experiment);
        }
        Command::Presets { show } => {
            for name in harness::preset_names() {
                if show {
                    println!("# {name}\n{}", harness::preset_source(name)?);
                } else {
                    println!("{name}");
                }
            }
        }
    }
    Ok(())
}

fn print_bundle(bundle: &ResultBundle, dir: &std::path::Path) {
    println!("{} -> {} ({:.1} s, {})", bundle.experiment, dir.display(), bundle.wall_time_s, bundle.status);
    for (k, v) in &bundle.summary {
        println!("  {k} = {v:.6e}");
    }
    for c in &bundle.convergence {
        println!("  convergence {}: shift {:.2e} ({})", c.quantity, c.shift, if c.passed { "ok" } else { "exceeds 1e-4" });
    }
    for n in &bundle.notes {
        println!("  note: {n}");
    }
}
