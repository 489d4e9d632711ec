//! Coverage-maximizing tilt search: a grid sweep over `[0, 90]` degrees with
//! optional golden-section refinement around the best grid point.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{coverage_probability, QuadratureSpec};
use crate::error::{Error, Result};
use crate::geometry::NetworkConfig;
use crate::montecarlo::{estimate_coverage, McCampaign};

/// Which coverage evaluator drives the search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TiltEvaluator {
    Analytic(QuadratureSpec),
    MonteCarlo(McCampaign),
}

impl TiltEvaluator {
    /// Coverage of `cfg` at its configured threshold.
    pub fn coverage(&self, cfg: &NetworkConfig) -> Result<f64> {
        match self {
            TiltEvaluator::Analytic(quad) => Ok(coverage_probability(cfg, quad)?.p_cov),
            TiltEvaluator::MonteCarlo(campaign) => {
                let run = estimate_coverage(cfg, campaign, &[cfg.sir_threshold_db])?;
                Ok(run.estimates[0].p_cov_hat)
            }
        }
    }
}

/// Tilt search parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiltSearchSpec {
    /// Grid spacing in degrees.
    pub grid_step_deg: f64,
    /// Run golden-section refinement around the grid argmax.
    pub refine: bool,
    /// Terminate refinement when the bracket is narrower than this.
    pub refine_tol_deg: f64,
    /// Lower edge of the search interval, degrees.
    pub beta_min_deg: f64,
    /// Upper edge of the search interval, degrees.
    pub beta_max_deg: f64,
    pub evaluator: TiltEvaluator,
}

impl TiltSearchSpec {
    pub fn analytic(quad: QuadratureSpec) -> Self {
        TiltSearchSpec {
            grid_step_deg: 0.5,
            refine: true,
            refine_tol_deg: 0.05,
            beta_min_deg: 0.0,
            beta_max_deg: 90.0,
            evaluator: TiltEvaluator::Analytic(quad),
        }
    }

    pub fn monte_carlo(campaign: McCampaign) -> Self {
        TiltSearchSpec {
            grid_step_deg: 0.5,
            refine: true,
            refine_tol_deg: 0.05,
            beta_min_deg: 0.0,
            beta_max_deg: 90.0,
            evaluator: TiltEvaluator::MonteCarlo(campaign),
        }
    }

    pub fn with_grid_step(mut self, step_deg: f64) -> Self {
        self.grid_step_deg = step_deg;
        self
    }

    pub fn with_refine(mut self, refine: bool, tol_deg: f64) -> Self {
        self.refine = refine;
        self.refine_tol_deg = tol_deg;
        self
    }

    pub fn with_bounds(mut self, beta_min_deg: f64, beta_max_deg: f64) -> Self {
        self.beta_min_deg = beta_min_deg;
        self.beta_max_deg = beta_max_deg;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.grid_step_deg > 0.0 && self.grid_step_deg <= 90.0) {
            return Err(Error::config(format!(
                "grid step must lie in (0, 90] degrees, got {}",
                self.grid_step_deg
            )));
        }
        if !(self.refine_tol_deg > 0.0) {
            return Err(Error::config(format!(
                "refinement tolerance must be positive, got {}",
                self.refine_tol_deg
            )));
        }
        if !(0.0..=90.0).contains(&self.beta_min_deg)
            || !(0.0..=90.0).contains(&self.beta_max_deg)
            || self.beta_min_deg > self.beta_max_deg
        {
            return Err(Error::config(format!(
                "search interval [{}, {}] must lie inside [0, 90]",
                self.beta_min_deg, self.beta_max_deg
            )));
        }
        Ok(())
    }

    /// The tilt grid: `beta_min, beta_min + step, ...`, always including the
    /// upper edge.
    pub fn grid(&self) -> Vec<f64> {
        let mut betas = Vec::new();
        let mut k = 0u32;
        loop {
            let beta = self.beta_min_deg + k as f64 * self.grid_step_deg;
            if beta >= self.beta_max_deg - 1e-12 {
                break;
            }
            betas.push(beta);
            k += 1;
        }
        betas.push(self.beta_max_deg);
        betas
    }
}

/// Coverage profile over a tilt grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiltProfile {
    pub betas_deg: Vec<f64>,
    pub p_cov: Vec<f64>,
    pub beta_star_deg: f64,
    pub p_star: f64,
}

/// Coverage maximum at one threshold (output of the per-threshold sweep).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdOptimum {
    pub tau_db: f64,
    pub beta_star_deg: f64,
    pub p_star: f64,
}

/// Lexicographic argmax on `(p, -beta)`: the larger coverage wins and exact
/// ties break toward the smaller tilt, independent of evaluation order.
fn better(p_a: f64, beta_a: f64, p_b: f64, beta_b: f64) -> bool {
    p_a > p_b || (p_a == p_b && beta_a < beta_b)
}

/// Evaluate coverage at the given tilt grid. Grid points run on the rayon
/// pool; the argmax reduction is order independent.
pub fn sweep_tilt_grid(
    cfg: &NetworkConfig,
    betas_deg: &[f64],
    evaluator: &TiltEvaluator,
) -> Result<TiltProfile> {
    if betas_deg.is_empty() {
        return Err(Error::config("tilt grid must be non-empty"));
    }
    let p_cov: Vec<f64> = betas_deg
        .par_iter()
        .map(|&beta| {
            evaluator
                .coverage(&cfg.clone().with_tilt(beta))
                .map_err(|e| tag_beta(e, beta))
        })
        .collect::<Result<_>>()?;

    let (mut beta_star, mut p_star) = (betas_deg[0], p_cov[0]);
    for (&beta, &p) in betas_deg.iter().zip(&p_cov) {
        if better(p, beta, p_star, beta_star) {
            beta_star = beta;
            p_star = p;
        }
    }
    Ok(TiltProfile {
        betas_deg: betas_deg.to_vec(),
        p_cov,
        beta_star_deg: beta_star,
        p_star,
    })
}

fn tag_beta(e: Error, beta: f64) -> Error {
    match e {
        Error::Numerical { detail, partial } => Error::Numerical {
            detail: format!("at tilt {beta} deg: {detail}"),
            partial,
        },
        Error::Config(msg) => Error::Config(format!("at tilt {beta} deg: {msg}")),
        Error::Domain(msg) => Error::Domain(format!("at tilt {beta} deg: {msg}")),
    }
}

/// Sweep the coverage over the tilt grid defined by `spec`.
pub fn sweep_tilt(cfg: &NetworkConfig, spec: &TiltSearchSpec) -> Result<TiltProfile> {
    spec.validate()?;
    cfg.validate()?;
    sweep_tilt_grid(cfg, &spec.grid(), &spec.evaluator)
}

/// Find the coverage-maximizing tilt: grid argmax, then (optionally)
/// golden-section refinement on the bracketing interval. Refinement never
/// returns a value below the grid maximum.
pub fn optimize_tilt(cfg: &NetworkConfig, spec: &TiltSearchSpec) -> Result<(f64, f64)> {
    let profile = sweep_tilt(cfg, spec)?;
    if !spec.refine || profile.betas_deg.len() < 2 {
        return Ok((profile.beta_star_deg, profile.p_star));
    }

    let idx = profile
        .betas_deg
        .iter()
        .position(|&b| b == profile.beta_star_deg)
        .expect("argmax is a grid point");
    let lo = if idx == 0 { profile.betas_deg[0] } else { profile.betas_deg[idx - 1] };
    let hi = if idx + 1 == profile.betas_deg.len() {
        profile.betas_deg[idx]
    } else {
        profile.betas_deg[idx + 1]
    };

    let eval = |beta: f64| -> Result<f64> {
        spec.evaluator
            .coverage(&cfg.clone().with_tilt(beta))
            .map_err(|e| tag_beta(e, beta))
    };
    let (beta_ref, p_ref) = golden_section_max(&eval, lo, hi, spec.refine_tol_deg)?;

    if better(p_ref, beta_ref, profile.p_star, profile.beta_star_deg) {
        Ok((beta_ref, p_ref))
    } else {
        Ok((profile.beta_star_deg, profile.p_star))
    }
}

/// Golden-section maximization of `f` on `[a, b]`; ties break toward the
/// smaller abscissa.
fn golden_section_max(
    f: &dyn Fn(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let (mut best_x, mut best_f) = if better(f1, x1, f2, x2) { (x1, f1) } else { (x2, f2) };

    while b - a > tol {
        if better(f1, x1, f2, x2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        }
        for (x, fx) in [(x1, f1), (x2, f2)] {
            if better(fx, x, best_f, best_x) {
                best_x = x;
                best_f = fx;
            }
        }
    }
    Ok((best_x, best_f))
}

/// Maximize the tilt separately at each threshold of `tau_grid_db` (the
/// per-threshold optimum curve).
pub fn optimize_tilt_per_threshold(
    cfg: &NetworkConfig,
    spec: &TiltSearchSpec,
    tau_grid_db: &[f64],
) -> Result<Vec<ThresholdOptimum>> {
    if tau_grid_db.is_empty() {
        return Err(Error::config("threshold grid must be non-empty"));
    }
    tau_grid_db
        .iter()
        .map(|&tau_db| {
            let (beta_star_deg, p_star) =
                optimize_tilt(&cfg.clone().with_sir_threshold_db(tau_db), spec)?;
            Ok(ThresholdOptimum {
                tau_db,
                beta_star_deg,
                p_star,
            })
        })
        .collect()
}
