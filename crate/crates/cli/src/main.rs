use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use phenoinvade_core::io::{load_config, load_preset, PRESETS};
use phenoinvade_core::run::{run, Mode, RunSpec};

#[derive(Parser)]
#[command(name = "phenoinvade", version, about = "Phenotype-structured haptotactic invasion simulators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lattice model ensemble.
    Ibm(RunArgs),
    /// Continuum solver.
    Continuum(RunArgs),
    /// Both engines at equal times, with oracle and cross-engine reports.
    Compare(RunArgs),
    /// `compare` repeated over the configured eps values.
    Sweep(RunArgs),
    /// Planar lattice ensemble with radial transects.
    Ibm2d(RunArgs),
    /// List the built-in presets.
    Presets,
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML configuration file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in preset, used when no configuration file is given.
    #[arg(long)]
    preset: Option<String>,
    /// Base seed; replicate seeds are derived from it.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicates: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Comma-separated snapshot times.
    #[arg(long, value_delimiter = ',')]
    snapshots: Option<Vec<f64>>,
    /// Worker threads (defaults to all cores).
    #[arg(long, env = "PHENOINVADE_THREADS")]
    threads: Option<usize>,
    /// Report format on stdout.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Quiet,
}

fn execute(mode: Mode, args: RunArgs) -> anyhow::Result<bool> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let cfg = match (&args.config, &args.preset) {
        (Some(path), _) => load_config(path).with_context(|| format!("loading {}", path.display()))?,
        (None, Some(name)) => load_preset(name)?,
        (None, None) => bail!("either --config or --preset is required"),
    };
    let mut spec = RunSpec::from_config(mode, &cfg, args.out);
    spec.config = args.config;
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    if let Some(r) = args.replicates {
        spec.replicates = r;
    }
    if let Some(t) = args.snapshots {
        spec.snapshots = t;
    }
    let outcome = run(&spec, &cfg)?;
    if matches!(args.format, Format::Text) {
        for m in &outcome.metrics {
            let status = match m.pass {
                Some(true) => "PASS",
                Some(false) => "FAIL",
                None => "    ",
            };
            let t = m.t.map(|t| format!(" t={t}")).unwrap_or_default();
            let bound = match m.bound {
                Some(b) => format!(" ({b:?})"),
                None => String::new(),
            };
            println!("{status} eps={:e}{t} {} = {:e}{bound}", m.eps, m.metric, m.value);
        }
        println!("artifacts written to {}", spec.out.display());
    }
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, args) = match cli.command {
        Command::Ibm(a) => (Mode::Ibm, a),
        Command::Continuum(a) => (Mode::Continuum, a),
        Command::Compare(a) => (Mode::Compare, a),
        Command::Sweep(a) => (Mode::Sweep, a),
        Command::Ibm2d(a) => (Mode::Ibm2d, a),
        Command::Presets => {
            for p in PRESETS {
                println!("{p}");
            }
            return ExitCode::SUCCESS;
        }
    };
    match execute(mode, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
