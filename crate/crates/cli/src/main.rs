use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tiltcov_cli::{
    config::{EvaluatorKind, ExperimentSpec, NetworkSection},
    emit_builtin_scenarios, run_experiment, runner, CliError, OutputFormat, RunOverrides,
};
use tiltcov_core::{
    coverage_probability, estimate_coverage, McCampaign, QuadratureSpec,
};

/// Coverage analysis and tilt optimization for 3D-beamforming cellular
/// networks with height-distributed users.
#[derive(Parser)]
#[command(name = "tiltcov", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the coverage probability of a single configuration.
    Coverage(CoverageArgs),
    /// Run one experiment described by a TOML config file.
    Sweep(SweepArgs),
    /// Run the built-in scenario set (tilt and threshold figures).
    Figures(FiguresArgs),
    /// Parse and validate a config file without computing anything.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EvalFlag {
    Analytic,
    #[value(alias = "montecarlo")]
    Mc,
    Both,
}

impl EvalFlag {
    fn kinds(self) -> Vec<EvaluatorKind> {
        match self {
            EvalFlag::Analytic => vec![EvaluatorKind::Analytic],
            EvalFlag::Mc => vec![EvaluatorKind::Montecarlo],
            EvalFlag::Both => vec![EvaluatorKind::Analytic, EvaluatorKind::Montecarlo],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatFlag {
    Csv,
    Json,
}

impl From<FormatFlag> for OutputFormat {
    fn from(f: FormatFlag) -> Self {
        match f {
            FormatFlag::Csv => OutputFormat::Csv,
            FormatFlag::Json => OutputFormat::Json,
        }
    }
}

#[derive(Args)]
struct CoverageArgs {
    /// Read the base network from this experiment config (flags override it).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base-station density, 1/m^2 (required without --config).
    #[arg(long)]
    lambda: Option<f64>,
    /// Antenna tilt, degrees.
    #[arg(long)]
    beta: Option<f64>,
    /// Use the omni-directional vertical baseline.
    #[arg(long)]
    omni: bool,
    /// SIR threshold, dB.
    #[arg(long)]
    tau_db: Option<f64>,
    /// Mixture weight of the continuous interferer-height component.
    #[arg(long)]
    a: Option<f64>,
    /// Typical-user effective height, meters.
    #[arg(long)]
    h0: Option<f64>,
    /// Exclusion radius, meters (default: density-derived).
    #[arg(long)]
    exclusion_radius: Option<f64>,
    /// Approximation order N.
    #[arg(long)]
    order: Option<u32>,
    #[arg(long, value_enum, default_value = "analytic")]
    evaluator: EvalFlag,
    /// Monte Carlo trial count.
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    /// Monte Carlo seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    /// Experiment config file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output path (overrides the config's `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the campaign seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the campaign trial count.
    #[arg(long)]
    trials: Option<u64>,
    /// Override the evaluator set.
    #[arg(long, value_enum)]
    evaluator: Option<EvalFlag>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatFlag,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Log every evaluated row to stderr.
    #[arg(long)]
    verbose: bool,
}

#[derive(Args)]
struct FiguresArgs {
    /// Output directory.
    #[arg(long, default_value = "figures")]
    out: PathBuf,
    /// Run only the named scenarios (repeatable); default runs all six.
    #[arg(long)]
    scenario: Vec<String>,
    /// Coarsen grids and trial counts for a fast smoke run.
    #[arg(long)]
    quick: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatFlag,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    verbose: bool,
}

#[derive(Args)]
struct ValidateArgs {
    /// Experiment config file (TOML).
    #[arg(long)]
    config: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Coverage(args) => cmd_coverage(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Figures(args) => cmd_figures(args),
        Command::Validate(args) => cmd_validate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn read_spec(path: &PathBuf) -> Result<ExperimentSpec, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    ExperimentSpec::from_toml(&text)
}

fn cmd_coverage(args: CoverageArgs) -> Result<(), CliError> {
    let mut network: NetworkSection = match (&args.config, args.lambda) {
        (Some(path), _) => read_spec(path)?.network,
        (None, Some(lambda)) => toml::from_str(&format!("lambda_bs = {lambda:e}"))
            .map_err(|e| CliError::Config(e.to_string()))?,
        (None, None) => {
            return Err(CliError::Config(
                "provide --lambda or --config to define the network".into(),
            ))
        }
    };
    if let Some(lambda) = args.lambda {
        network.lambda_bs = lambda;
        if args.exclusion_radius.is_none() && args.config.is_none() {
            network.exclusion_radius = None;
        }
    }
    if let Some(beta) = args.beta {
        network.pattern.tilt_deg = beta;
    }
    if args.omni {
        network.pattern.enabled = false;
    }
    if let Some(tau) = args.tau_db {
        network.sir_threshold_db = tau;
    }
    if let Some(a) = args.a {
        network.height_model.a = a;
    }
    if let Some(h0) = args.h0 {
        network.h0 = h0;
    }
    if let Some(re) = args.exclusion_radius {
        network.exclusion_radius = Some(re);
    }
    if let Some(n) = args.order {
        network.approx_order = n;
    }

    let cfg = network.resolve();
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;

    println!(
        "network: lambda_bs={:e} /m^2, R_e={:.2} m, v={}, C={}, tau={} dB, N={}",
        cfg.lambda_bs,
        cfg.exclusion_radius,
        cfg.path_loss.exponent_v,
        cfg.path_loss.scale_c,
        cfg.sir_threshold_db,
        cfg.approx_order
    );
    if cfg.pattern.enabled {
        println!(
            "pattern: tilt={} deg, theta3db={} deg, sll={} dB",
            cfg.pattern.tilt_deg, cfg.pattern.theta3db_deg, cfg.pattern.sll_el_db
        );
    } else {
        println!("pattern: omni vertical baseline (gain 1)");
    }
    println!(
        "heights: a={}, h0={} m, support [{}, {}] m, atom at {} m",
        cfg.height_model.a,
        cfg.h0,
        cfg.height_model.h_min,
        cfg.height_model.h_max,
        cfg.height_model.h_atom
    );

    let run = || -> Result<(), CliError> {
        for kind in args.evaluator.kinds() {
            let start = Instant::now();
            match kind {
                EvaluatorKind::Analytic => {
                    let r = coverage_probability(&cfg, &QuadratureSpec::default())
                        .map_err(|e| CliError::Numerical(e.to_string()))?;
                    println!(
                        "analytic:   p_cov={:.6}  err_estimate={:.2e}  evals={}  ({} ms)",
                        r.p_cov,
                        r.err_estimate,
                        r.evals,
                        start.elapsed().as_millis()
                    );
                }
                EvaluatorKind::Montecarlo => {
                    let campaign = McCampaign::new(args.trials, args.seed);
                    let run = estimate_coverage(&cfg, &campaign, &[cfg.sir_threshold_db])
                        .map_err(|e| CliError::Numerical(e.to_string()))?;
                    let est = &run.estimates[0];
                    println!(
                        "montecarlo: p_cov={:.6}  ci95=+-{:.4}  trials={}  seed={}  ({} ms)",
                        est.p_cov_hat,
                        est.ci_halfwidth_95,
                        args.trials,
                        args.seed,
                        start.elapsed().as_millis()
                    );
                }
            }
        }
        Ok(())
    };
    match args.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::Config(format!("cannot build worker pool: {e}")))?
            .install(run),
        None => run(),
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let spec = read_spec(&args.config)?;
    let overrides = RunOverrides {
        seed: args.seed,
        trials: args.trials,
        evaluators: args.evaluator.map(EvalFlag::kinds),
        jobs: args.jobs,
        out: args.out.clone(),
        verbose: args.verbose,
    };
    let rows = run_experiment(&spec, &overrides)?;
    let out = overrides
        .out
        .or_else(|| spec.out.clone())
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", spec.id)));
    runner::write_output(&out, &spec, &rows, args.format.into())?;
    eprintln!("{}: {} rows -> {}", spec.id, rows.len(), out.display());
    Ok(())
}

fn cmd_figures(args: FiguresArgs) -> Result<(), CliError> {
    let mut specs = emit_builtin_scenarios();
    if !args.scenario.is_empty() {
        specs.retain(|s| args.scenario.iter().any(|want| *want == s.id));
        if specs.is_empty() {
            return Err(CliError::Config(format!(
                "no built-in scenario matches {:?}; available: fig3 fig4 fig5 fig6 fig3_mc fig4_mc",
                args.scenario
            )));
        }
    }
    if args.quick {
        for spec in &mut specs {
            let (lo, hi) = (spec.grid[0], *spec.grid.last().unwrap());
            let step = (hi - lo) / 6.0;
            spec.grid = (0..=6).map(|k| lo + step * k as f64).collect();
            spec.campaign.trials = spec.campaign.trials.min(20_000);
            spec.tilt_search.grid_step_deg = 4.0;
            spec.tilt_search.refine_tol_deg = 0.5;
        }
    }
    let ext = match args.format {
        FormatFlag::Csv => "csv",
        FormatFlag::Json => "json",
    };
    for spec in &specs {
        let started = Instant::now();
        eprintln!("running {} ({} axis points)...", spec.id, spec.grid.len());
        let overrides = RunOverrides {
            seed: args.seed,
            trials: args.trials,
            evaluators: None,
            jobs: args.jobs,
            out: None,
            verbose: args.verbose,
        };
        let rows = run_experiment(spec, &overrides)?;
        let out = args.out.join(format!("{}.{ext}", spec.id));
        runner::write_output(&out, spec, &rows, args.format.into())?;
        eprintln!(
            "{}: {} rows -> {} ({:.1} s)",
            spec.id,
            rows.len(),
            out.display(),
            started.elapsed().as_secs_f64()
        );
    }
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> Result<(), CliError> {
    let spec = read_spec(&args.config)?;
    println!(
        "{}: ok ({} axis points, {} cases, {} modes, {} evaluators)",
        spec.id,
        spec.grid.len(),
        spec.cases().len(),
        spec.modes.len(),
        spec.evaluators.len()
    );
    Ok(())
}
