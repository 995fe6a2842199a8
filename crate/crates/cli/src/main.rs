use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spincorr::experiment::{Command, Recipe};
use spincorr_cli::config::{resolve, Overrides};
use spincorr_cli::error::CliError;
use spincorr_cli::output::Format;
use spincorr_cli::{emit, replay, RunSpec};

#[derive(Parser)]
#[command(
    name = "spincorr",
    version,
    about = "Two-time spin correlations through an ancilla: exact values, protocol estimates and sampled error bars"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact normalized correlation C(t1, t2)/l^2 over the t2 grid
    Exact(RunArgs),
    /// Protocol correlator at each lambda-l and the extracted Re C, Im C
    Protocol(RunArgs),
    /// Finite-sample estimates with error bars over repeated samples
    Sample(RunArgs),
    /// Gamma-coefficient profile and slow-variation metric of the initial state
    Diagnose(RunArgs),
    /// Run a built-in plot recipe with every parameter pinned
    Recipe {
        #[arg(value_parser = ["fig2-left", "fig2-right", "fig3", "fig4-left", "fig4-right"])]
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_parser = ["csv", "json"], default_value = "csv")]
        format: String,
    },
    /// Re-run a manifest, reproducing its data file byte for byte
    Replay {
        manifest: PathBuf,
        /// Write here instead of the path recorded in the manifest
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file; flags take precedence over its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Spin quantum number of both sites (e.g. 8, 8.5 or 17/2)
    #[arg(long)]
    l: Option<String>,
    #[arg(long, value_parser = ["uniform", "maxmag", "ramp"])]
    state: Option<String>,
    #[arg(long, value_parser = ["heisenberg", "zz", "xx"])]
    coupling: Option<String>,
    /// Site coupled to the ancilla
    #[arg(long)]
    site_i: Option<usize>,
    /// Site read out at t2
    #[arg(long)]
    site_j: Option<usize>,
    /// Site analysed by `diagnose` (defaults to site-i)
    #[arg(long)]
    site: Option<usize>,
    #[arg(long)]
    t1: Option<f64>,
    /// t2 grid as start:stop:step
    #[arg(long)]
    t2_grid: Option<String>,
    /// Dimensionless coupling lambda*L, repeatable; accepts pi expressions such as pi/2
    #[arg(long = "lambda-l")]
    lambda_l: Vec<String>,
    /// Shots per sample
    #[arg(long)]
    ns: Option<usize>,
    /// Independent samples per grid point
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = ["two-point", "fourier"])]
    method: Option<String>,
    /// Use L = l + 1/2 instead of L = l in the extraction (default true)
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    refined_l: Option<bool>,
    /// TOML file with `re` (and optionally `im`) matrices of a custom two-site Hamiltonian
    #[arg(long)]
    hamiltonian_file: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
}

impl RunArgs {
    fn overrides(self) -> Overrides {
        Overrides {
            config: self.config,
            l: self.l,
            state: self.state,
            coupling: self.coupling,
            site_i: self.site_i,
            site_j: self.site_j,
            t1: self.t1,
            t2_grid: self.t2_grid,
            lambda_l: self.lambda_l,
            ns: self.ns,
            repeats: self.repeats,
            seed: self.seed,
            method: self.method,
            refined_l: self.refined_l,
            hamiltonian_file: self.hamiltonian_file,
            out: self.out,
            format: self.format,
        }
    }
}

fn run_command(command: Command, args: RunArgs) -> Result<(), CliError> {
    let site = args.site;
    let resolved = resolve(&args.overrides())?;
    let mut spec = RunSpec::new(command, vec![resolved.spec], resolved.format);
    match command {
        Command::Sample => spec.sampling = Some(resolved.sampling),
        Command::Diagnose => spec.site = Some(site.unwrap_or(spec.runs[0].site_i)),
        _ => {}
    }
    finish(emit(&spec, resolved.out.as_deref())?)
}

fn finish(out: spincorr_cli::RunOutput) -> Result<(), CliError> {
    for line in out.summary {
        eprintln!("{line}");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Cmd::Exact(args) => run_command(Command::Exact, args),
        Cmd::Protocol(args) => run_command(Command::Protocol, args),
        Cmd::Sample(args) => run_command(Command::Sample, args),
        Cmd::Diagnose(args) => run_command(Command::Diagnose, args),
        Cmd::Recipe { name, out, format } => {
            let recipe: Recipe = name.parse()?;
            let format: Format = format.parse()?;
            finish(emit(&RunSpec::from_recipe(recipe, format), out.as_deref())?)
        }
        Cmd::Replay { manifest, out } => finish(replay(&manifest, out.as_deref())?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
