//! Run orchestration behind the command-line interface: forward solves,
//! optimization campaigns with on-disk artifacts, validation against the
//! analytic ball spectra, and point-set generation.

use std::path::PathBuf;
use std::time::Instant;

use crate::ball::BallOracle;
use crate::config::{Mode, RunConfig};
use crate::error::{Error, Result};
use crate::geometry::{build_quadrature, HarmonicCoefficients};
use crate::harmonics::Dimension;
use crate::io;
use crate::mfs::{solve_eigen, MfsSystem};
use crate::shape_opt::{CostEvaluator, OptimizeOptions, OptimizerState};
use crate::sphere_points::{build_collocation, min_pairwise_distance};

/// Wall-clock bookkeeping for the manifest.
struct Stages {
    start: Instant,
    entries: Vec<(String, f64)>,
}

impl Stages {
    fn new() -> Self {
        Self { start: Instant::now(), entries: Vec::new() }
    }

    fn mark(&mut self, name: &str) {
        self.entries
            .push((name.to_string(), self.start.elapsed().as_secs_f64()));
        self.start = Instant::now();
    }
}

fn ensure_outdir(config: &RunConfig) -> Result<PathBuf> {
    std::fs::create_dir_all(&config.outdir).map_err(|source| Error::Io {
        path: config.outdir.clone(),
        source,
    })?;
    Ok(config.outdir.clone())
}

fn initial_domain(config: &RunConfig) -> Result<HarmonicCoefficients> {
    match &config.coefficients {
        Some(path) => {
            let coeffs = io::load_coefficients(path)?;
            if coeffs.dimension() != config.dimension {
                return Err(Error::Config(format!(
                    "{} holds a {} domain but the run asks for {}",
                    path.display(),
                    coeffs.dimension(),
                    config.dimension
                )));
            }
            Ok(coeffs)
        }
        None => {
            let radius = BallOracle::unit_volume(config.dimension).radius();
            HarmonicCoefficients::ball(config.dimension, config.degree, radius)
        }
    }
}

fn evaluator(config: &RunConfig) -> CostEvaluator {
    CostEvaluator {
        collocation_count: config.collocation,
        delta: config.delta,
        riesz_exponent: config.riesz_exponent,
        resolution: config.resolution,
        seed: config.seed,
        warm_riesz_iters: 80,
    }
}

/// Solves one domain and writes its spectrum; returns the eigenvalues.
pub fn run_solve(config: &RunConfig) -> Result<Vec<f64>> {
    let outdir = ensure_outdir(config)?;
    let mut stages = Stages::new();
    let coeffs = initial_domain(config)?;

    let eval = evaluator(config).solve(&coeffs, config.k.max(1) + 1)?;
    stages.mark("solve");

    let mut log = io::CsvLog::create(
        &outdir.join("spectrum.csv"),
        &["k", "sigma", "cost"],
    )?;
    for (k, &sigma) in eval.solution.eigenvalues().iter().enumerate() {
        log.row(&[k.to_string(), sigma.to_string(), eval.costs[k].to_string()])?;
    }
    log.finish()?;
    io::save_coefficients(&coeffs, &outdir.join("coefficients.txt"))?;
    stages.mark("artifacts");

    io::write_manifest(
        &outdir.join("manifest.txt"),
        &config.to_key_values(),
        &stages.entries,
    )?;
    Ok(eval.solution.eigenvalues().to_vec())
}

/// One row of the validation ladder.
#[derive(Clone, Debug)]
pub struct ValidationRow {
    pub collocation: usize,
    /// Absolute eigenvalue errors for the tracked indices.
    pub errors: Vec<f64>,
}

/// Validation report: tracked indices, the error ladder, and the verdict.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub tracked: Vec<usize>,
    pub rows: Vec<ValidationRow>,
    pub passed: bool,
}

/// Error floor below which the convergence ladder is not required to keep
/// decreasing: ill-conditioning noise dominates there.
pub const LADDER_FLOOR: f64 = 1e-7;

/// Tolerances the final (largest M) ladder row must meet per tracked index.
const FINAL_TOLERANCES: [f64; 3] = [1e-4, 1e-3, 5e-3];

/// Computes the unit-volume ball spectrum across a ladder of collocation
/// counts and compares with the analytic oracle. The tracked indices are
/// sigma_1, sigma_7, sigma_15 in 3D (sigma_1, sigma_5, sigma_13 in 4D,
/// matching the block structure). Errors must decrease with M up to a
/// numerical floor, and the last row must meet the tolerances.
pub fn run_validate(config: &RunConfig) -> Result<ValidationReport> {
    let outdir = ensure_outdir(config)?;
    let mut stages = Stages::new();

    let oracle = BallOracle::unit_volume(config.dimension);
    let coeffs =
        HarmonicCoefficients::ball(config.dimension, config.degree.min(4), oracle.radius())?;
    let tracked: Vec<usize> = match config.dimension {
        Dimension::Three => vec![1, 7, 15],
        Dimension::Four => vec![1, 5, 13],
    };
    let kmax = *tracked.iter().max().expect("nonempty") + 1;
    let exact = oracle.eigenvalues(kmax + 1);
    let quad = build_quadrature(&coeffs, config.resolution)?;

    // Ladder of collocation counts ending at the configured budget.
    let ladder: Vec<usize> = [8usize, 4, 2, 1]
        .iter()
        .map(|div| (config.collocation / div).max(kmax + 2))
        .collect();

    let mut rows = Vec::new();
    let mut header = vec!["mc".to_string()];
    header.extend(tracked.iter().map(|k| format!("err_sigma{k}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut log = io::CsvLog::create(&outdir.join("log.csv"), &header_refs)?;
    for &m in &ladder {
        let colloc =
            build_collocation(&coeffs, m, config.riesz_exponent, config.delta, config.seed)?;
        let system = MfsSystem::assemble(colloc)?;
        let sol = solve_eigen(&system, kmax, &quad)?;
        let errors: Vec<f64> = tracked
            .iter()
            .map(|&k| (sol.eigenvalue(k) - exact[k]).abs())
            .collect();
        let mut fields = vec![m.to_string()];
        fields.extend(errors.iter().map(f64::to_string));
        log.row(&fields)?;
        rows.push(ValidationRow { collocation: m, errors });
        stages.mark(&format!("solve_mc{m}"));
    }
    log.finish()?;

    // Monotone decrease with a floor, plus final tolerances.
    let mut passed = true;
    for (j, _) in tracked.iter().enumerate() {
        for w in rows.windows(2) {
            let (prev, next) = (w[0].errors[j], w[1].errors[j]);
            if next > prev && next > LADDER_FLOOR {
                passed = false;
            }
        }
        if rows.last().expect("ladder nonempty").errors[j] > FINAL_TOLERANCES[j] {
            passed = false;
        }
    }

    io::write_manifest(
        &outdir.join("manifest.txt"),
        &config.to_key_values(),
        &stages.entries,
    )?;
    Ok(ValidationReport { tracked, rows, passed })
}

/// Artifacts of one optimization campaign.
#[derive(Debug)]
pub struct OptimizeOutcome {
    pub best: OptimizerState,
    /// Best cost rounded down at two decimals (a certified lower bound up
    /// to discretization error).
    pub reported: f64,
    /// Cluster size at the optimum.
    pub multiplicity: usize,
    pub outdir: PathBuf,
}

/// Runs the multi-start ascent campaign and writes per-iteration logs, the
/// best coefficients, and mesh (3D) or hyperplane-cut (4D) exports.
pub fn run_optimize(config: &RunConfig) -> Result<OptimizeOutcome> {
    let outdir = ensure_outdir(config)?;
    let mut stages = Stages::new();

    let mut opts = OptimizeOptions::new(config.k, evaluator(config));
    opts.epsilon = config.epsilon;
    opts.max_iterations = config.max_iterations;

    let runs = crate::shape_opt::optimize_multi(
        config.degree,
        &opts,
        config.restarts,
        0.15,
        config.dimension,
    )?;
    stages.mark("optimize");

    // Columns: iteration, the cost window C_k ..= C_{k+cap} (short windows
    // leave trailing cost cells empty), cluster size, step, volume.
    let window_slots = opts.cluster_cap + 1;
    let mut header = vec!["iteration".to_string()];
    header.extend((0..window_slots).map(|j| format!("C{}", config.k + j)));
    header.extend(["M".to_string(), "step".to_string(), "volume".to_string()]);
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    for (r, run) in runs.iter().enumerate() {
        let mut log =
            io::CsvLog::create(&outdir.join(format!("log-restart{r}.csv")), &header_refs)?;
        for rec in &run.history {
            let mut fields = vec![rec.iteration.to_string()];
            fields.extend(rec.window.iter().map(f64::to_string));
            fields.resize(1 + window_slots, String::new());
            fields.extend([
                rec.cluster.to_string(),
                rec.step.to_string(),
                rec.volume.to_string(),
            ]);
            log.row(&fields)?;
        }
        log.finish()?;
    }

    let best = runs.into_iter().next().expect("at least one restart");
    io::save_coefficients(&best.coefficients, &outdir.join("coefficients.txt"))?;
    match config.dimension {
        Dimension::Three => {
            io::export_mesh3d(&best.coefficients, 64, 128, &outdir.join("domain.obj"))?;
        }
        Dimension::Four => {
            io::export_cuts4d(&best.coefficients, 64, 128, &outdir.join("domain"))?;
        }
    }
    stages.mark("artifacts");

    let reported = io::floor_two_decimals(best.cost);
    let multiplicity = best.cluster;
    let summary = format!(
        "k={}\nreported={reported}\nmultiplicity={multiplicity}\nstop={}\n",
        config.k, best.stop
    );
    std::fs::write(outdir.join("summary.txt"), summary).map_err(|source| Error::Io {
        path: outdir.join("summary.txt"),
        source,
    })?;

    io::write_manifest(
        &outdir.join("manifest.txt"),
        &config.to_key_values(),
        &stages.entries,
    )?;
    Ok(OptimizeOutcome { best, reported, multiplicity, outdir })
}

/// Generates the refined collocation set for a domain and writes the
/// boundary points, sources, and summary statistics.
pub fn run_points(config: &RunConfig) -> Result<PathBuf> {
    let outdir = ensure_outdir(config)?;
    let mut stages = Stages::new();
    let coeffs = initial_domain(config)?;
    let colloc = build_collocation(
        &coeffs,
        config.collocation,
        config.riesz_exponent,
        config.delta,
        config.seed,
    )?;
    stages.mark("refine");

    io::write_points(colloc.points(), config.dimension, &outdir.join("points.txt"))?;
    io::write_points(colloc.sources(), config.dimension, &outdir.join("sources.txt"))?;
    let stats = format!(
        "count={}\nenergy={}\nmin_distance={}\n",
        colloc.len(),
        colloc.energy(),
        min_pairwise_distance(colloc.points())
    );
    std::fs::write(outdir.join("stats.txt"), &stats).map_err(|source| Error::Io {
        path: outdir.join("stats.txt"),
        source,
    })?;
    stages.mark("artifacts");

    io::write_manifest(
        &outdir.join("manifest.txt"),
        &config.to_key_values(),
        &stages.entries,
    )?;
    Ok(outdir)
}

/// Dispatches on the configured mode; returns a process exit code.
pub fn run(config: &RunConfig) -> i32 {
    let outcome: Result<String> = match config.mode {
        Mode::Solve => run_solve(config).map(|sigma| {
            let line: Vec<String> = sigma.iter().map(|s| format!("{s:.8}")).collect();
            format!("sigma = [{}]", line.join(", "))
        }),
        Mode::Validate => run_validate(config).map(|report| {
            let mut text = String::new();
            for row in &report.rows {
                let errs: Vec<String> = report
                    .tracked
                    .iter()
                    .zip(&row.errors)
                    .map(|(k, e)| format!("err(sigma_{k})={e:.3e}"))
                    .collect();
                text.push_str(&format!("M={:6}  {}\n", row.collocation, errs.join("  ")));
            }
            text.push_str(if report.passed {
                "validation PASSED"
            } else {
                "validation FAILED"
            });
            text
        }),
        Mode::Optimize => run_optimize(config).map(|out| {
            format!(
                "best C_{} = {} (multiplicity {}), artifacts in {}",
                config.k,
                out.reported,
                out.multiplicity,
                out.outdir.display()
            )
        }),
        Mode::Points => {
            run_points(config).map(|dir| format!("points written to {}", dir.display()))
        }
    };
    match outcome {
        Ok(text) => {
            println!("{text}");
            if config.mode == Mode::Validate && text.ends_with("FAILED") {
                2
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
