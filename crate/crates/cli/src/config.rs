//! Declarative experiment specification: a TOML file describing a base
//! network, a sweep axis with its grid, the evaluators, the comparison modes
//! and optional height cases. Everything numeric uses the units of the model:
//! degrees, dB, meters, 1/m^2.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use tiltcov_core::{
    AntennaPattern, HeightModel, McCampaign, NetworkConfig, PathLossModel, QuadratureSpec,
};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Tilt,
    SirThresholdDb,
    BsDensity,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Tilt => "tilt",
            SweepAxis::SirThresholdDb => "sir_threshold_db",
            SweepAxis::BsDensity => "bs_density",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvaluatorKind {
    Analytic,
    Montecarlo,
}

impl EvaluatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            EvaluatorKind::Analytic => "analytic",
            EvaluatorKind::Montecarlo => "montecarlo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ComparisonMode {
    /// Beamforming with the tilt taken from the sweep axis (tilt sweeps) or
    /// optimized against the true height distribution (threshold/density
    /// sweeps).
    #[serde(rename = "3dbf_height_aware")]
    HeightAware,
    /// Tilt optimized as if every user were on the ground (`a = 0`, typical
    /// user at the point-mass height), then evaluated against the true
    /// height distribution.
    #[serde(rename = "3dbf_height_blind")]
    HeightBlind,
    /// Omni-directional vertical pattern baseline.
    #[serde(rename = "2dbf")]
    TwoDbf,
}

impl ComparisonMode {
    pub fn name(&self) -> &'static str {
        match self {
            ComparisonMode::HeightAware => "3dbf_height_aware",
            ComparisonMode::HeightBlind => "3dbf_height_blind",
            ComparisonMode::TwoDbf => "2dbf",
        }
    }
}

/// One (interferer mixture weight, typical-user height) combination applied
/// on top of the base network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeightCase {
    pub label: String,
    pub a: f64,
    pub h0: f64,
}

fn default_enabled() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PatternSection {
    pub tilt_deg: f64,
    pub theta3db_deg: f64,
    pub sll_el_db: f64,
    #[serde(default = "default_enabled")]
    pub enabled: bool,
}

impl Default for PatternSection {
    fn default() -> Self {
        PatternSection {
            tilt_deg: 8.0,
            theta3db_deg: tiltcov_core::geometry::DEFAULT_THETA3DB_DEG,
            sll_el_db: tiltcov_core::geometry::DEFAULT_SLL_EL_DB,
            enabled: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathLossSection {
    pub exponent_v: f64,
    pub scale_c: f64,
}

impl Default for PathLossSection {
    fn default() -> Self {
        let m = PathLossModel::default();
        PathLossSection {
            exponent_v: m.exponent_v,
            scale_c: m.scale_c,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeightSection {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub h_atom: f64,
}

impl Default for HeightSection {
    fn default() -> Self {
        let m = HeightModel::standard(1.0);
        HeightSection {
            a: m.a,
            b: m.b,
            c: m.c,
            h_min: m.h_min,
            h_max: m.h_max,
            h_atom: m.h_atom,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    /// Base-station density, 1/m^2.
    pub lambda_bs: f64,
    #[serde(default = "NetworkSection::default_bs_height")]
    pub bs_height: f64,
    /// Typical-user effective height, meters.
    #[serde(default = "NetworkSection::default_h0")]
    pub h0: f64,
    /// Meters; omitted selects the density-derived `sqrt(1 / (pi lambda))`.
    #[serde(default)]
    pub exclusion_radius: Option<f64>,
    #[serde(default = "NetworkSection::default_tau_db")]
    pub sir_threshold_db: f64,
    #[serde(default = "NetworkSection::default_order")]
    pub approx_order: u32,
    #[serde(default)]
    pub pattern: PatternSection,
    #[serde(default)]
    pub path_loss: PathLossSection,
    #[serde(default)]
    pub height_model: HeightSection,
}

impl NetworkSection {
    fn default_bs_height() -> f64 {
        tiltcov_core::geometry::DEFAULT_BS_HEIGHT_M
    }
    fn default_h0() -> f64 {
        tiltcov_core::geometry::DEFAULT_H_MAX
    }
    fn default_tau_db() -> f64 {
        4.0
    }
    fn default_order() -> u32 {
        5
    }

    pub fn from_config(cfg: &NetworkConfig) -> Self {
        NetworkSection {
            lambda_bs: cfg.lambda_bs,
            bs_height: cfg.bs_height,
            h0: cfg.h0,
            exclusion_radius: Some(cfg.exclusion_radius),
            sir_threshold_db: cfg.sir_threshold_db,
            approx_order: cfg.approx_order,
            pattern: PatternSection {
                tilt_deg: cfg.pattern.tilt_deg,
                theta3db_deg: cfg.pattern.theta3db_deg,
                sll_el_db: cfg.pattern.sll_el_db,
                enabled: cfg.pattern.enabled,
            },
            path_loss: PathLossSection {
                exponent_v: cfg.path_loss.exponent_v,
                scale_c: cfg.path_loss.scale_c,
            },
            height_model: HeightSection {
                a: cfg.height_model.a,
                b: cfg.height_model.b,
                c: cfg.height_model.c,
                h_min: cfg.height_model.h_min,
                h_max: cfg.height_model.h_max,
                h_atom: cfg.height_model.h_atom,
            },
        }
    }

    pub fn resolve(&self) -> NetworkConfig {
        NetworkConfig {
            lambda_bs: self.lambda_bs,
            bs_height: self.bs_height,
            pattern: AntennaPattern {
                tilt_deg: self.pattern.tilt_deg,
                theta3db_deg: self.pattern.theta3db_deg,
                sll_el_db: self.pattern.sll_el_db,
                enabled: self.pattern.enabled,
            },
            path_loss: PathLossModel {
                exponent_v: self.path_loss.exponent_v,
                scale_c: self.path_loss.scale_c,
            },
            height_model: HeightModel {
                a: self.height_model.a,
                b: self.height_model.b,
                c: self.height_model.c,
                h_min: self.height_model.h_min,
                h_max: self.height_model.h_max,
                h_atom: self.height_model.h_atom,
            },
            h0: self.h0,
            exclusion_radius: self
                .exclusion_radius
                .unwrap_or_else(|| NetworkConfig::default_exclusion_radius(self.lambda_bs)),
            sir_threshold_db: self.sir_threshold_db,
            approx_order: self.approx_order,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CampaignSection {
    pub trials: u64,
    pub seed: u64,
    pub window_radius: Option<f64>,
    pub record_sir: bool,
}

impl Default for CampaignSection {
    fn default() -> Self {
        CampaignSection {
            trials: 100_000,
            seed: 1,
            window_radius: None,
            record_sir: false,
        }
    }
}

impl CampaignSection {
    pub fn resolve(&self) -> McCampaign {
        McCampaign {
            trials: self.trials,
            seed: self.seed,
            window_radius: self.window_radius,
            record_sir: self.record_sir,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSection {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub outer_trunc_mass: f64,
    pub radial_trunc_factor: f64,
}

impl Default for QuadratureSection {
    fn default() -> Self {
        let q = QuadratureSpec::default();
        QuadratureSection {
            rel_tol: q.rel_tol,
            abs_tol: q.abs_tol,
            outer_trunc_mass: q.outer_trunc_mass,
            radial_trunc_factor: q.radial_trunc_factor,
        }
    }
}

impl QuadratureSection {
    pub fn resolve(&self) -> QuadratureSpec {
        QuadratureSpec {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            outer_trunc_mass: self.outer_trunc_mass,
            radial_trunc_factor: self.radial_trunc_factor,
        }
    }
}

/// Grid and refinement of the per-point tilt optimization used by the
/// threshold and density axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TiltSearchSection {
    pub grid_step_deg: f64,
    pub refine: bool,
    pub refine_tol_deg: f64,
}

impl Default for TiltSearchSection {
    fn default() -> Self {
        TiltSearchSection {
            grid_step_deg: 1.0,
            refine: true,
            refine_tol_deg: 0.05,
        }
    }
}

/// A complete experiment: the cross product of the axis grid, the height
/// cases, the comparison modes and the evaluators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub id: String,
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
    #[serde(default = "ExperimentSpec::default_evaluators")]
    pub evaluators: Vec<EvaluatorKind>,
    #[serde(default = "ExperimentSpec::default_modes")]
    pub modes: Vec<ComparisonMode>,
    pub network: NetworkSection,
    /// Height cases; empty means a single case taken from the base network.
    #[serde(default)]
    pub height_cases: Vec<HeightCase>,
    #[serde(default)]
    pub campaign: CampaignSection,
    #[serde(default)]
    pub quadrature: QuadratureSection,
    #[serde(default)]
    pub tilt_search: TiltSearchSection,
    /// Output path; the CLI `--out` flag overrides it.
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl ExperimentSpec {
    fn default_evaluators() -> Vec<EvaluatorKind> {
        vec![EvaluatorKind::Analytic]
    }

    fn default_modes() -> Vec<ComparisonMode> {
        vec![ComparisonMode::HeightAware]
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let spec: ExperimentSpec =
            toml::from_str(text).map_err(|e| CliError::Config(format!("config parse error: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("spec serializes")
    }

    /// The effective height cases: the declared list, or the base network as
    /// a single case labeled `base`.
    pub fn cases(&self) -> Vec<HeightCase> {
        if self.height_cases.is_empty() {
            vec![HeightCase {
                label: "base".into(),
                a: self.network.height_model.a,
                h0: self.network.h0,
            }]
        } else {
            self.height_cases.clone()
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.id.is_empty() {
            return Err(CliError::Config("scenario id must be non-empty".into()));
        }
        if self.grid.is_empty() {
            return Err(CliError::Config(format!(
                "{}: axis grid must be non-empty",
                self.id
            )));
        }
        if self.grid.len() > 1 {
            let increasing = self.grid.windows(2).all(|w| w[1] > w[0]);
            let decreasing = self.grid.windows(2).all(|w| w[1] < w[0]);
            if !increasing && !decreasing {
                return Err(CliError::Config(format!(
                    "{}: axis grid must be strictly monotone",
                    self.id
                )));
            }
        }
        if self.evaluators.is_empty() {
            return Err(CliError::Config(format!(
                "{}: at least one evaluator required",
                self.id
            )));
        }
        if self.modes.is_empty() {
            return Err(CliError::Config(format!(
                "{}: at least one comparison mode required",
                self.id
            )));
        }
        match self.axis {
            SweepAxis::Tilt => {
                if self.grid.iter().any(|&b| !(0.0..=90.0).contains(&b)) {
                    return Err(CliError::Config(format!(
                        "{}: tilt grid values must lie in [0, 90] degrees",
                        self.id
                    )));
                }
                if self.modes.contains(&ComparisonMode::HeightBlind) {
                    return Err(CliError::Config(format!(
                        "{}: 3dbf_height_blind needs an axis that optimizes the tilt \
                         (sir_threshold_db or bs_density), not the tilt axis itself",
                        self.id
                    )));
                }
            }
            SweepAxis::SirThresholdDb => {
                if self.grid.iter().any(|t| !t.is_finite()) {
                    return Err(CliError::Config(format!(
                        "{}: threshold grid values must be finite",
                        self.id
                    )));
                }
            }
            SweepAxis::BsDensity => {
                if self.grid.iter().any(|&l| !(l > 0.0)) {
                    return Err(CliError::Config(format!(
                        "{}: density grid values must be positive",
                        self.id
                    )));
                }
            }
        }

        let quad = self.quadrature.resolve();
        quad.validate()
            .map_err(|e| CliError::Config(format!("{}: {e}", self.id)))?;

        let search = self.tilt_search;
        if !(search.grid_step_deg > 0.0 && search.grid_step_deg <= 90.0)
            || !(search.refine_tol_deg > 0.0)
        {
            return Err(CliError::Config(format!(
                "{}: invalid tilt search parameters",
                self.id
            )));
        }

        // every case must yield a valid network on every axis value
        for case in self.cases() {
            let mut network = self.network.clone();
            network.height_model.a = case.a;
            network.h0 = case.h0;
            let cfg = network.resolve();
            cfg.validate().map_err(|e| {
                CliError::Config(format!("{} case {}: {e}", self.id, case.label))
            })?;
            if self.evaluators.contains(&EvaluatorKind::Montecarlo) {
                self.campaign
                    .resolve()
                    .validate(&cfg)
                    .map_err(|e| CliError::Config(format!("{}: {e}", self.id)))?;
            }
        }
        Ok(())
    }
}
