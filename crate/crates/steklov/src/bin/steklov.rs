use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use steklov::config::{Mode, Overrides, RunConfig};

#[derive(Parser)]
#[command(
    name = "steklov",
    version,
    about = "Steklov eigenvalues of star-shaped domains in 3D and 4D: forward solves, \
             shape optimization, solver validation, and collocation point generation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the Steklov spectrum of one domain
    Solve(CommonArgs),
    /// Maximize the k-th volume-normalized eigenvalue over star-shaped domains
    Optimize(CommonArgs),
    /// Check the solver against the analytic ball spectrum
    Validate(CommonArgs),
    /// Generate Riesz-refined boundary collocation points
    Points(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Configuration file with key=value lines; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Ambient dimension, 3 or 4
    #[arg(long)]
    d: Option<u32>,
    /// Target eigenvalue index
    #[arg(long)]
    k: Option<usize>,
    /// Truncation degree of the radial harmonic expansion
    #[arg(long = "N")]
    degree: Option<u32>,
    /// Number of boundary collocation points
    #[arg(long)]
    mc: Option<usize>,
    /// Source offset along the outward normal
    #[arg(long)]
    delta: Option<f64>,
    /// Riesz kernel exponent for point refinement
    #[arg(long)]
    s: Option<f64>,
    /// Eigenvalue cluster threshold in cost units
    #[arg(long)]
    eps: Option<f64>,
    /// Quadrature grid sizes, THETAxPHI in 3D or BETAxTHETAxPHI in 4D
    #[arg(long)]
    resolution: Option<String>,
    /// Optimizer iteration cap
    #[arg(long)]
    iters: Option<usize>,
    /// Optimizer restart count
    #[arg(long)]
    restarts: Option<usize>,
    /// Random seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for artifacts
    #[arg(long)]
    out: Option<PathBuf>,
    /// Coefficients file defining the input domain
    #[arg(long)]
    coeffs: Option<PathBuf>,
}

fn overrides(args: &CommonArgs) -> Result<Overrides, steklov::Error> {
    let mut ov = Overrides {
        dimension: args.d,
        k: args.k,
        degree: args.degree,
        collocation: args.mc,
        delta: args.delta,
        riesz_exponent: args.s,
        epsilon: args.eps,
        resolution: None,
        max_iterations: args.iters,
        restarts: args.restarts,
        seed: args.seed,
        outdir: args.out.clone(),
        coefficients: args.coeffs.clone(),
    };
    if let Some(spec) = &args.resolution {
        ov.set("resolution", spec)?;
    }
    Ok(ov)
}

fn main() {
    let cli = Cli::parse();
    let (mode, args) = match &cli.command {
        Command::Solve(a) => (Mode::Solve, a),
        Command::Optimize(a) => (Mode::Optimize, a),
        Command::Validate(a) => (Mode::Validate, a),
        Command::Points(a) => (Mode::Points, a),
    };
    let config = overrides(args)
        .and_then(|ov| RunConfig::resolve(mode, args.config.as_deref(), &ov));
    match config {
        Ok(config) => std::process::exit(steklov::runner::run(&config)),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
