//! Experiment execution: expands a spec into the cross product of axis
//! values, height cases, comparison modes and evaluators, evaluates the
//! points on a worker pool, and persists a self-describing table.
//!
//! Rows are produced in the deterministic expansion order regardless of
//! completion order, and nothing volatile is written outside the header
//! comment block, so a rerun with the same seed reproduces the file
//! byte for byte apart from the `# generated:` line.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::Serialize;
use tiltcov_core::{
    coverage_probability, estimate_coverage, optimize_tilt, NetworkConfig, QuadratureSpec,
    TiltEvaluator, TiltSearchSpec,
};

use crate::config::{ComparisonMode, EvaluatorKind, ExperimentSpec, SweepAxis};
use crate::CliError;

/// Command-line overrides applied on top of the spec.
#[derive(Debug, Clone, Default)]
pub struct RunOverrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub evaluators: Option<Vec<EvaluatorKind>>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub verbose: bool,
}

/// One evaluated point. `runtime_ms` stays in memory (and in verbose logs);
/// persisting it would break byte-level reproducibility of the output files.
#[derive(Debug, Clone, Serialize)]
pub struct ResultRow {
    pub scenario: String,
    pub case: String,
    pub evaluator: &'static str,
    pub mode: &'static str,
    pub axis: &'static str,
    pub axis_value: f64,
    /// Tilt behind this row: the axis value on tilt sweeps, the optimized
    /// tilt on threshold/density sweeps, absent for the omni baseline.
    pub beta_deg: Option<f64>,
    pub a: f64,
    pub h0: f64,
    pub p_cov: f64,
    /// 95% confidence half-width (simulation rows only).
    pub ci_halfwidth: Option<f64>,
    /// Quadrature error estimate (analytic rows only).
    pub err_estimate: Option<f64>,
    #[serde(skip)]
    pub runtime_ms: u64,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
struct Task {
    case_label: String,
    a: f64,
    h0: f64,
    mode: ComparisonMode,
    evaluator: EvaluatorKind,
    axis_value: f64,
    /// Tasks sharing a key are identical; only the first is computed.
    dedupe_key: Option<String>,
}

struct Evaluation {
    p_cov: f64,
    beta_deg: Option<f64>,
    ci_halfwidth: Option<f64>,
    err_estimate: Option<f64>,
    runtime_ms: u64,
}

/// Expand, evaluate and order the rows of one experiment. Errors carry the
/// offending row in their message.
pub fn run_experiment(
    spec: &ExperimentSpec,
    overrides: &RunOverrides,
) -> Result<Vec<ResultRow>, CliError> {
    spec.validate()?;
    let mut campaign = spec.campaign.resolve();
    if let Some(seed) = overrides.seed {
        campaign.seed = seed;
    }
    if let Some(trials) = overrides.trials {
        campaign.trials = trials;
    }
    let evaluators = overrides
        .evaluators
        .clone()
        .unwrap_or_else(|| spec.evaluators.clone());
    let quad = spec.quadrature.resolve();

    let mut tasks = Vec::new();
    for case in spec.cases() {
        for &mode in &spec.modes {
            for &evaluator in &evaluators {
                for &axis_value in &spec.grid {
                    // on a tilt sweep the omni baseline ignores the axis value
                    let dedupe_key = (spec.axis == SweepAxis::Tilt
                        && mode == ComparisonMode::TwoDbf)
                        .then(|| format!("{}|{}", case.label, evaluator.name()));
                    tasks.push(Task {
                        case_label: case.label.clone(),
                        a: case.a,
                        h0: case.h0,
                        mode,
                        evaluator,
                        axis_value,
                        dedupe_key,
                    });
                }
            }
        }
    }

    let run_all = || -> Result<Vec<ResultRow>, CliError> {
        // compute only the first task of every dedupe group
        let mut first_of_key: Vec<Option<usize>> = vec![None; tasks.len()];
        let mut seen: Vec<(String, usize)> = Vec::new();
        for (i, t) in tasks.iter().enumerate() {
            if let Some(key) = &t.dedupe_key {
                if let Some(&(_, j)) = seen.iter().find(|(k, _)| k == key) {
                    first_of_key[i] = Some(j);
                } else {
                    seen.push((key.clone(), i));
                }
            }
        }

        let evaluations: Vec<Option<Result<Evaluation, CliError>>> = tasks
            .par_iter()
            .enumerate()
            .map(|(i, task)| {
                if first_of_key[i].is_some() {
                    return None;
                }
                Some(evaluate_task(spec, task, &campaign, &quad))
            })
            .collect();

        let mut rows = Vec::with_capacity(tasks.len());
        let mut failures: Vec<String> = Vec::new();
        let mut resolved: Vec<Option<Evaluation>> = Vec::with_capacity(tasks.len());
        for (i, ev) in evaluations.into_iter().enumerate() {
            match ev {
                Some(Ok(e)) => resolved.push(Some(e)),
                Some(Err(err)) => {
                    failures.push(format!(
                        "{} case {} {} {} at {} = {}: {err}",
                        spec.id,
                        tasks[i].case_label,
                        tasks[i].mode.name(),
                        tasks[i].evaluator.name(),
                        spec.axis.name(),
                        tasks[i].axis_value
                    ));
                    resolved.push(None);
                }
                None => resolved.push(None),
            }
        }
        if !failures.is_empty() {
            return Err(CliError::Numerical(failures.join("\n")));
        }
        for (i, task) in tasks.iter().enumerate() {
            let source = first_of_key[i].unwrap_or(i);
            let e = resolved[source].as_ref().expect("computed or deduped");
            if overrides.verbose {
                eprintln!(
                    "{} {} {} {} {}={} -> p={} ({} ms)",
                    spec.id,
                    task.case_label,
                    task.mode.name(),
                    task.evaluator.name(),
                    spec.axis.name(),
                    task.axis_value,
                    e.p_cov,
                    e.runtime_ms
                );
            }
            rows.push(ResultRow {
                scenario: spec.id.clone(),
                case: task.case_label.clone(),
                evaluator: task.evaluator.name(),
                mode: task.mode.name(),
                axis: spec.axis.name(),
                axis_value: task.axis_value,
                beta_deg: e.beta_deg,
                a: task.a,
                h0: task.h0,
                p_cov: e.p_cov,
                ci_halfwidth: e.ci_halfwidth,
                err_estimate: e.err_estimate,
                runtime_ms: e.runtime_ms,
                seed: (task.evaluator == EvaluatorKind::Montecarlo).then_some(campaign.seed),
            });
        }
        Ok(rows)
    };

    match overrides.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::Config(format!("cannot build worker pool: {e}")))?
            .install(run_all),
        None => run_all(),
    }
}

/// Base network for a task: the case's mixture weight and typical height
/// applied, then the axis value.
fn task_config(spec: &ExperimentSpec, task: &Task) -> NetworkConfig {
    let mut network = spec.network.clone();
    network.height_model.a = task.a;
    network.h0 = task.h0;
    let cfg = network.resolve();
    match spec.axis {
        SweepAxis::Tilt => cfg.with_tilt(task.axis_value),
        SweepAxis::SirThresholdDb => cfg.with_sir_threshold_db(task.axis_value),
        SweepAxis::BsDensity => {
            let explicit_re = spec.network.exclusion_radius;
            let cfg = cfg.with_density(task.axis_value);
            match explicit_re {
                Some(re) => cfg.with_exclusion_radius(re),
                None => cfg,
            }
        }
    }
}

fn evaluate_task(
    spec: &ExperimentSpec,
    task: &Task,
    campaign: &tiltcov_core::McCampaign,
    quad: &QuadratureSpec,
) -> Result<Evaluation, CliError> {
    let start = Instant::now();
    let cfg = task_config(spec, task);

    // which tilt to evaluate at, per comparison mode
    let (eval_cfg, beta_deg) = match (task.mode, spec.axis) {
        (ComparisonMode::TwoDbf, _) => (cfg.with_omni_pattern(), None),
        (ComparisonMode::HeightAware, SweepAxis::Tilt) => {
            let beta = cfg.pattern.tilt_deg;
            (cfg, Some(beta))
        }
        (ComparisonMode::HeightAware, _) => {
            let (beta, _) = optimize(spec, &cfg, task.evaluator, campaign, quad)?;
            (cfg.with_tilt(beta), Some(beta))
        }
        (ComparisonMode::HeightBlind, _) => {
            // optimize as if everyone were on the ground, evaluate the truth
            let blind_cfg = cfg
                .clone()
                .with_height_weight(0.0)
                .with_h0(cfg.height_model.h_atom);
            let (beta, _) = optimize(spec, &blind_cfg, task.evaluator, campaign, quad)?;
            (cfg.with_tilt(beta), Some(beta))
        }
    };

    let (p_cov, ci_halfwidth, err_estimate) = match task.evaluator {
        EvaluatorKind::Analytic => {
            let r = coverage_probability(&eval_cfg, quad)
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            (r.p_cov, None, Some(r.err_estimate))
        }
        EvaluatorKind::Montecarlo => {
            let run = estimate_coverage(&eval_cfg, campaign, &[eval_cfg.sir_threshold_db])
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            let est = &run.estimates[0];
            (est.p_cov_hat, Some(est.ci_halfwidth_95), None)
        }
    };

    Ok(Evaluation {
        p_cov,
        beta_deg,
        ci_halfwidth,
        err_estimate,
        runtime_ms: start.elapsed().as_millis() as u64,
    })
}

fn optimize(
    spec: &ExperimentSpec,
    cfg: &NetworkConfig,
    evaluator: EvaluatorKind,
    campaign: &tiltcov_core::McCampaign,
    quad: &QuadratureSpec,
) -> Result<(f64, f64), CliError> {
    let ts = spec.tilt_search;
    let evaluator = match evaluator {
        EvaluatorKind::Analytic => TiltEvaluator::Analytic(*quad),
        EvaluatorKind::Montecarlo => TiltEvaluator::MonteCarlo(*campaign),
    };
    let search = TiltSearchSpec {
        grid_step_deg: ts.grid_step_deg,
        refine: ts.refine,
        refine_tol_deg: ts.refine_tol_deg,
        beta_min_deg: 0.0,
        beta_max_deg: 90.0,
        evaluator,
    };
    optimize_tilt(cfg, &search).map_err(|e| CliError::Numerical(e.to_string()))
}

/// Output format of the persisted table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

const CSV_COLUMNS: &str =
    "scenario,case,evaluator,mode,axis,axis_value,beta_deg,a,h0,p_cov,ci_halfwidth,err_estimate,seed";

fn opt_num<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

/// Render the CSV document: a `#` header block with the units, the full
/// serialized spec and one volatile `# generated:` line, then the rows.
pub fn render_csv(spec: &ExperimentSpec, rows: &[ResultRow]) -> String {
    let mut out = String::new();
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    out.push_str("# tiltcov sweep results\n");
    let _ = writeln!(out, "# generated: unix {stamp}");
    out.push_str("# units: angles deg, thresholds dB, density 1/m^2, heights/distances m\n");
    if spec.modes.contains(&ComparisonMode::HeightBlind) {
        out.push_str(
            "# note: 3dbf_height_blind optimizes the tilt under a ground-user assumption \
             (a = 0, h0 at the point mass) and evaluates under the true height model\n",
        );
    }
    out.push_str("# spec:\n");
    for line in spec.to_toml().lines() {
        let _ = writeln!(out, "#   {line}");
    }
    out.push_str(CSV_COLUMNS);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.scenario,
            r.case,
            r.evaluator,
            r.mode,
            r.axis,
            r.axis_value,
            opt_num(&r.beta_deg),
            r.a,
            r.h0,
            r.p_cov,
            opt_num(&r.ci_halfwidth),
            opt_num(&r.err_estimate),
            opt_num(&r.seed),
        );
    }
    out
}

#[derive(Serialize)]
struct JsonDocument<'a> {
    generated_unix: u64,
    units: &'static str,
    spec: &'a ExperimentSpec,
    rows: &'a [ResultRow],
}

pub fn render_json(spec: &ExperimentSpec, rows: &[ResultRow]) -> String {
    let doc = JsonDocument {
        generated_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        units: "angles deg, thresholds dB, density 1/m^2, heights/distances m",
        spec,
        rows,
    };
    serde_json::to_string_pretty(&doc).expect("rows serialize")
}

pub fn write_output(
    path: &Path,
    spec: &ExperimentSpec,
    rows: &[ResultRow],
    format: OutputFormat,
) -> Result<(), CliError> {
    let body = match format {
        OutputFormat::Csv => render_csv(spec, rows),
        OutputFormat::Json => render_json(spec, rows),
    };
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::Io(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    std::fs::write(path, body)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentSpec;

    fn tiny_spec(extra: &str) -> ExperimentSpec {
        let text = format!(
            r#"
id = "tiny"
axis = "tilt"
grid = [0.0, 8.0, 16.0]
evaluators = ["montecarlo"]
modes = ["3dbf_height_aware", "2dbf"]
{extra}

[network]
lambda_bs = 5e-5

[campaign]
trials = 500
seed = 7
"#
        );
        ExperimentSpec::from_toml(&text).unwrap()
    }

    #[test]
    fn rows_come_out_in_expansion_order() {
        let spec = tiny_spec("");
        let rows = run_experiment(&spec, &RunOverrides::default()).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[0].mode, "3dbf_height_aware");
        assert_eq!(rows[0].axis_value, 0.0);
        assert_eq!(rows[1].axis_value, 8.0);
        assert_eq!(rows[3].mode, "2dbf");
        for r in &rows[..3] {
            assert_eq!(r.beta_deg, Some(r.axis_value));
            assert_eq!(r.seed, Some(7));
            assert!(r.ci_halfwidth.is_some() && r.err_estimate.is_none());
        }
    }

    #[test]
    fn omni_rows_identical_across_tilt_axis() {
        let spec = tiny_spec("");
        let rows = run_experiment(&spec, &RunOverrides::default()).unwrap();
        let omni: Vec<&ResultRow> = rows.iter().filter(|r| r.mode == "2dbf").collect();
        assert_eq!(omni.len(), 3);
        assert!(omni.iter().all(|r| r.p_cov == omni[0].p_cov));
        assert!(omni.iter().all(|r| r.beta_deg.is_none()));
    }

    #[test]
    fn csv_determinism_modulo_generated_line() {
        let spec = tiny_spec("");
        let overrides = RunOverrides::default();
        let a = render_csv(&spec, &run_experiment(&spec, &overrides).unwrap());
        let b = render_csv(&spec, &run_experiment(&spec, &overrides).unwrap());
        let strip = |s: &str| -> String {
            s.lines()
                .filter(|l| !l.starts_with("# generated:"))
                .collect::<Vec<_>>()
                .join("\n")
        };
        assert_eq!(strip(&a), strip(&b));
        assert!(a.contains("lambda_bs = 5e-5") || a.contains("lambda_bs = 0.00005"));
    }

    #[test]
    fn jobs_override_does_not_change_results() {
        let spec = tiny_spec("");
        let one = run_experiment(
            &spec,
            &RunOverrides {
                jobs: Some(1),
                ..Default::default()
            },
        )
        .unwrap();
        let four = run_experiment(
            &spec,
            &RunOverrides {
                jobs: Some(4),
                ..Default::default()
            },
        )
        .unwrap();
        let key = |rows: &[ResultRow]| -> Vec<(f64, f64)> {
            rows.iter().map(|r| (r.axis_value, r.p_cov)).collect()
        };
        assert_eq!(key(&one), key(&four));
    }

    #[test]
    fn seed_override_changes_mc_rows() {
        let spec = tiny_spec("");
        let a = run_experiment(&spec, &RunOverrides::default()).unwrap();
        let b = run_experiment(
            &spec,
            &RunOverrides {
                seed: Some(8),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(b[0].seed, Some(8));
        assert!(a.iter().zip(&b).any(|(x, y)| x.p_cov != y.p_cov));
    }
}
