//! Command-line driver: parses arguments, runs one experiment and writes its
//! report.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::bounds::{epsilon_threshold, sigma_value};
use crate::contraction::{
    continuity_experiment, sweep_epsilon, FixedPointSolver, IterationOptions, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use crate::error::{Error, Result};
use crate::linear::{box_sweep, regularity_check, solvability_report, solve_double_fractional, Regime, ZeroModePolicy};
use crate::problem::{bundled_quadratics, load_problem, ProblemSpec, ValidationMode, CONTINUITY_PAIRS};
use crate::report::{write_report, Assertion, ExperimentReport, Series};
use crate::spectral::snapshot::write_snapshot;
use crate::spectral::{field_norms, random_ball_sample, vector_h2_norm, vector_norms, Grid3, VectorField};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "FRAC_THREADS";

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

/// Double-scale anomalous diffusion experiments.
#[derive(Debug, Parser)]
#[command(name = "bifrac", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the linear problem for u0 and check its regularity identity.
    SolveLinear(CommonArgs),
    /// Picard iteration to the fixed point u = u0 + u_p.
    Solve(CommonArgs),
    /// Assemble the bounds and check the threshold/sigma duality.
    VerifyBounds(CommonArgs),
    /// Measure Lipschitz ratios of tau on random pairs in B_rho.
    Contraction {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Fixed points along eps = fraction * eps_max and the log-log slope.
    SweepEpsilon {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.125, 0.25, 0.5, 1.0])]
        fractions: Vec<f64>,
    },
    /// Compare ||u1 - u2|| with the continuity bound for bundled nonlinearity pairs.
    Continuity(CommonArgs),
    /// Box sweeps of ||u||^2 at fixed spacing for each component.
    Solvability {
        #[command(flatten)]
        common: CommonArgs,
        /// Box lengths; defaults to L/2, L, 2L.
        #[arg(long, value_delimiter = ',')]
        boxes: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    /// Write binary snapshots of the computed fields.
    #[arg(long)]
    pub dump_fields: bool,
    /// Points per axis override.
    #[arg(long = "grid")]
    pub grid_n: Option<usize>,
    /// Box length override.
    #[arg(long = "box")]
    pub box_length: Option<f64>,
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::SolveLinear(c) | Command::Solve(c) | Command::VerifyBounds(c) | Command::Continuity(c) => c,
            Command::Contraction { common, .. }
            | Command::SweepEpsilon { common, .. }
            | Command::Solvability { common, .. } => common,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::SolveLinear(_) => "solve-linear",
            Command::Solve(_) => "solve",
            Command::VerifyBounds(_) => "verify-bounds",
            Command::Contraction { .. } => "contraction",
            Command::SweepEpsilon { .. } => "sweep-epsilon",
            Command::Continuity(_) => "continuity",
            Command::Solvability { .. } => "solvability",
        }
    }

    fn validation_mode(&self) -> ValidationMode {
        match self {
            Command::SolveLinear(_) | Command::Solvability { .. } => ValidationMode::Linear,
            _ => ValidationMode::Nonlinear,
        }
    }
}

/// Caps the global rayon pool from [`THREADS_ENV`] when set.
pub fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("could not size the thread pool: {e}");
            }
        }
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run_command<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let common = cli.command.common();
    let config_text = match fs::read_to_string(&common.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read config {}: {e}", common.config.display());
            return EXIT_USAGE;
        }
    };
    match execute(&cli.command, &config_text) {
        Ok(report) => {
            for a in report.failures() {
                eprintln!("assertion failed: {}", a.describe());
            }
            if report.all_passed {
                EXIT_OK
            } else {
                EXIT_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILED
        }
    }
}

/// Runs `command` against the given config text and writes the report.
pub fn execute(command: &Command, config_text: &str) -> Result<ExperimentReport> {
    let start = Instant::now();
    let common = command.common();
    let problem = apply_overrides(load_problem(config_text, command.validation_mode())?, common)?;
    let mut report = ExperimentReport::new(command.name(), &problem.to_json()?);
    let opts = IterationOptions {
        tol: common.tol,
        max_iter: common.max_iter,
    };

    let series = match command {
        Command::SolveLinear(_) => {
            run_solve_linear(&problem, common, &mut report)?;
            None
        }
        Command::Solve(_) => {
            run_solve(&problem, common, opts, &mut report)?;
            None
        }
        Command::VerifyBounds(_) => {
            run_verify_bounds(&problem, &mut report)?;
            None
        }
        Command::Contraction { trials, .. } => {
            run_contraction(&problem, common.seed, *trials, &mut report)?;
            None
        }
        Command::SweepEpsilon { fractions, .. } => Some(run_sweep(&problem, fractions, opts, &mut report)?),
        Command::Continuity(_) => {
            run_continuity(&problem, opts, &mut report)?;
            None
        }
        Command::Solvability { boxes, .. } => Some(run_solvability(&problem, boxes.as_deref(), &mut report)?),
    };

    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    for path in write_report(&report, series.as_ref(), &common.out)? {
        log::info!("wrote {}", path.display());
    }
    Ok(report)
}

fn apply_overrides(problem: ProblemSpec, common: &CommonArgs) -> Result<ProblemSpec> {
    if common.grid_n.is_none() && common.box_length.is_none() {
        return Ok(problem);
    }
    let l = common.box_length.unwrap_or(problem.grid.box_length());
    let n = common.grid_n.unwrap_or(problem.grid.points_per_axis());
    let grid = Grid3::new(l, n)?;
    // Re-validate so clearance warnings reflect the new box.
    load_problem(&problem.with_grid(grid).to_json()?, ValidationMode::Linear)?;
    Ok(problem.with_grid(grid))
}

fn dump(out: &Path, stem: &str, field: &VectorField) -> Result<()> {
    fs::create_dir_all(out)?;
    for (m, c) in field.components().iter().enumerate() {
        let file = File::create(out.join(format!("{stem}_{m}.fsf")))?;
        write_snapshot(BufWriter::new(file), c, m as u32)?;
    }
    Ok(())
}

fn run_solve_linear(problem: &ProblemSpec, common: &CommonArgs, report: &mut ExperimentReport) -> Result<()> {
    let mut components = Vec::new();
    let mut fields = Vec::new();
    for m in 0..problem.n_components {
        let (s1, s2) = (problem.orders.s1[m], problem.orders.s2[m]);
        let f = problem.influx_field(m)?;
        let u0 = solve_double_fractional(&f, s1, s2, ZeroModePolicy::Drop)?;
        let residual = regularity_check(&u0, &f, s1, s2)?;
        report.assert(Assertion::le(format!("regularity_residual[{m}]"), residual, 1e-10));
        components.push(json!({
            "component": m,
            "norms": field_norms(&u0, Some(s1))?,
            "solvability": solvability_report(&f, s1)?,
            "regularity_residual": residual,
        }));
        fields.push(u0);
    }
    let u0 = VectorField::new(fields)?;
    report.results = json!({
        "components": components,
        "u0_norms": vector_norms(&u0)?,
    });
    if common.dump_fields {
        dump(&common.out, "u0", &u0)?;
    }
    Ok(())
}

fn run_solve(problem: &ProblemSpec, common: &CommonArgs, opts: IterationOptions, report: &mut ExperimentReport) -> Result<()> {
    let solver = FixedPointSolver::prepare(problem, problem.rho, None)?;
    report.bounds = solver.context().copied();
    let result = solver.run(opts)?;

    // Second start drawn from B_rho; the fixed point must not depend on it.
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let start = random_ball_sample(problem.grid, problem.n_components, problem.rho, &mut rng)?;
    let restart = solver.run_from(start, opts)?;
    let restart_gap = vector_h2_norm(&result.u_p.sub(&restart.u_p)?)?;

    let summary = result.summary()?;
    report.assert(Assertion::holds("converged", result.converged));
    report.assert(Assertion::le("final_residual", result.final_residual, 1e-8));
    report.assert(Assertion::le("up_h2_norm", summary.up_h2, problem.rho));
    report.assert(Assertion::le("restart_gap", restart_gap, 10.0 * opts.tol));
    if let Some(ctx) = solver.context().filter(|c| c.within_threshold()) {
        let worst = result.contraction_estimates.iter().copied().fold(0.0, f64::max);
        report.assert(Assertion::le("max_step_ratio", worst, ctx.contraction_factor()));
    }
    report.results = json!({
        "fixed_point": summary,
        "restart": restart.summary()?,
        "restart_gap": restart_gap,
        "seed": common.seed,
    });
    if common.dump_fields {
        dump(&common.out, "u0", &result.u0)?;
        dump(&common.out, "up", &result.u_p)?;
        dump(&common.out, "u", &result.u)?;
    }
    Ok(())
}

fn run_verify_bounds(problem: &ProblemSpec, report: &mut ExperimentReport) -> Result<()> {
    let solver = FixedPointSolver::prepare(problem, problem.rho, None)?;
    let ctx = *solver
        .context()
        .ok_or_else(|| Error::InvalidParameter("bounds unavailable for this problem".into()))?;
    report.bounds = Some(ctx);
    let product = epsilon_threshold(&ctx, ctx.rho)? * sigma_value(&ctx)?;
    let target = ctx.rho / (ctx.u0_h2 + 1.0);
    report.assert(Assertion::approx("eps_max_times_sigma", product, target, 1e-12));
    report.results = json!({
        "eps_max_times_sigma": product,
        "rho_over_u0_plus_one": target,
        "eps_sigma": ctx.contraction_factor(),
        "within_threshold": ctx.within_threshold(),
    });
    Ok(())
}

fn run_contraction(problem: &ProblemSpec, seed: u64, trials: usize, report: &mut ExperimentReport) -> Result<()> {
    let solver = FixedPointSolver::prepare(problem, problem.rho, None)?;
    let ctx = *solver
        .context()
        .ok_or_else(|| Error::InvalidParameter("bounds unavailable for this problem".into()))?;
    report.bounds = Some(ctx);
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let ratios = solver.contraction_ratios(trials, seed)?;
    let images = solver.self_map_norms(trials, seed.wrapping_add(1))?;
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let max_image = images.iter().copied().fold(0.0, f64::max);
    report.assert(Assertion::le("max_ratio_vs_eps_sigma", max_ratio, ctx.contraction_factor()));
    report.assert(Assertion::lt("max_ratio_vs_one", max_ratio, 1.0));
    report.assert(Assertion::le("max_self_map_norm", max_image, ctx.rho));
    report.results = json!({
        "seed": seed,
        "ratios": ratios,
        "self_map_norms": images,
        "eps_sigma": ctx.contraction_factor(),
    });
    Ok(())
}

fn run_sweep(problem: &ProblemSpec, fractions: &[f64], opts: IterationOptions, report: &mut ExperimentReport) -> Result<Series> {
    let sweep = sweep_epsilon(problem, problem.rho, fractions, opts)?;
    for (i, row) in sweep.rows.iter().enumerate() {
        report.assert(Assertion::holds(format!("converged[{i}]"), row.converged));
    }
    report.assert(Assertion::approx("log_log_slope", sweep.slope, 1.0, 0.05));
    let series = Series {
        headers: vec!["epsilon".into(), "up_h2_norm".into()],
        rows: sweep.rows.iter().map(|r| vec![r.epsilon, r.up_h2_norm]).collect(),
    };
    report.results = serde_json::to_value(&sweep)?;
    Ok(series)
}

fn run_continuity(problem: &ProblemSpec, opts: IterationOptions, report: &mut ExperimentReport) -> Result<()> {
    let pairs: Vec<_> = if problem.n_components == 2 {
        let q = bundled_quadratics();
        CONTINUITY_PAIRS.iter().map(|&(a, b)| (q[a].clone(), q[b].clone())).collect()
    } else {
        let g = problem.nonlinearity.clone();
        vec![(g.clone(), g.scale(1.1))]
    };
    let mut outcomes = Vec::new();
    for (i, (g1, g2)) in pairs.iter().enumerate() {
        let out = continuity_experiment(problem, g1, g2, problem.rho, opts)?;
        report.assert(Assertion::le(format!("continuity[{i}]"), out.lhs, out.rhs));
        outcomes.push(out);
    }
    report.results = json!({ "pairs": outcomes });
    Ok(())
}

fn run_solvability(problem: &ProblemSpec, boxes: Option<&[f64]>, report: &mut ExperimentReport) -> Result<Series> {
    let l = problem.grid.box_length();
    let boxes = boxes.map(<[f64]>::to_vec).unwrap_or_else(|| vec![l / 2.0, l, 2.0 * l]);
    let h = problem.grid.spacing();
    let mut sweeps = Vec::new();
    let mut rows = Vec::new();
    for m in 0..problem.n_components {
        let (s1, s2) = (problem.orders.s1[m], problem.orders.s2[m]);
        let influx = &problem.influxes[m];
        let sweep = box_sweep(|g| crate::problem::realize_sum(influx, g), s1, s2, h, &boxes)?;
        let grows = sweep.report.regime == Regime::OrthogonalityRequired && sweep.report.predicted_low_freq_growth > 0.0;
        if grows {
            let predicted = sweep.report.predicted_low_freq_growth;
            report.assert(Assertion::approx(format!("growth_exponent[{m}]"), sweep.fitted_exponent, predicted, 0.25));
        } else {
            for (i, change) in sweep.relative_changes.iter().enumerate() {
                report.assert(Assertion::le(format!("relative_change[{m}][{i}]"), *change, 0.05));
            }
        }
        for r in &sweep.rows {
            rows.push(vec![m as f64, r.box_length, r.points_per_axis as f64, r.u_l2_squared]);
        }
        sweeps.push(sweep);
    }
    report.results = json!({ "sweeps": sweeps });
    Ok(Series {
        headers: vec!["component".into(), "box_length".into(), "points_per_axis".into(), "u_l2_squared".into()],
        rows,
    })
}
