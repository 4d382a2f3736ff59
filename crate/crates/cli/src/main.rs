use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use voi_cli::{list_problems, run, Analysis, AnalysisRequest, CliError, ConfigDocument, RunManifest};

/// Value-of-information analyses for building energy decisions.
#[derive(Parser)]
#[command(name = "voi", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List registered problems, their measurements and sweeps.
    List {
        /// Print the listing as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Run one analysis and write report.json, CSV tables and manifest.json.
    Run(RunArgs),
    /// Re-run the request recorded in a manifest.
    Replay {
        manifest: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the worker count (results do not depend on it).
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        quiet: bool,
    },
    /// Print the fully resolved configuration (defaults plus --config).
    Config {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// Problem name, or `problem:sweep` for sweeps.
    #[arg(long)]
    problem: String,
    #[arg(long, value_enum)]
    analysis: Analysis,
    /// Measurement label (EVII); all measurements when omitted.
    #[arg(long)]
    measurement: Option<String>,
    /// Action index or label (outcome distribution); prior optimum when omitted.
    #[arg(long)]
    action: Option<String>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// JSON configuration file; unknown keys are an error.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Posterior grid points for EVII.
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    quiet: bool,
}

fn load_config(path: Option<&PathBuf>) -> Result<ConfigDocument, CliError> {
    path.map_or_else(|| Ok(ConfigDocument::default()), |p| ConfigDocument::load(p))
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::List { json } => {
            let listing = list_problems(&ConfigDocument::default())?;
            if json {
                println!("{}", serde_json::to_string_pretty(&listing).expect("listing serializes"));
            } else {
                for p in listing {
                    println!("{} — {} ({} actions)", p.name, p.description, p.actions);
                    for q in &p.parameters {
                        println!("  parameter   {} [{}] ({})", q.name, q.unit, q.role);
                    }
                    for m in &p.measurements {
                        println!("  measurement {m}");
                    }
                    for s in &p.sweeps {
                        println!("  sweep       {s}");
                    }
                }
            }
            Ok(())
        }
        Command::Config { config } => {
            println!("{}", load_config(config.as_ref())?.to_json());
            Ok(())
        }
        Command::Run(args) => {
            let mut config = load_config(args.config.as_ref())?;
            let est = &mut config.estimator;
            if let Some(n) = args.samples {
                est.n_samples = n;
            }
            if let Some(s) = args.seed {
                est.seed = s;
            }
            if let Some(w) = args.workers {
                est.workers = w;
            }
            if let Some(g) = args.grid_points {
                est.posterior_grid.n_points = g;
            }
            let request = AnalysisRequest {
                problem: args.problem,
                analysis: args.analysis,
                measurement: args.measurement,
                action: args.action,
                config,
            };
            let out = run(&request, &args.out)?;
            if !args.quiet {
                println!("{}", out.summary);
                println!("wrote {} files to {}", out.files.len(), args.out.display());
            }
            Ok(())
        }
        Command::Replay {
            manifest,
            out,
            workers,
            quiet,
        } => {
            let mut request = RunManifest::load(&manifest)?.request;
            if let Some(w) = workers {
                request.config.estimator.workers = w;
            }
            let result = run(&request, &out)?;
            if !quiet {
                println!("{}", result.summary);
            }
            Ok(())
        }
    }
}

fn main() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => Ok(ExitCode::SUCCESS),
        Err(e) => {
            let code = e.exit_code();
            let e = anyhow::Error::new(e).context("analysis failed");
            eprintln!("error: {e:#}");
            Ok(ExitCode::from(code))
        }
    }
}
