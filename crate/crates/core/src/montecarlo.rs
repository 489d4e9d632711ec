//! Stochastic oracle for the coverage probability.
//!
//! Each trial realizes the pilot-sharing interferer field as a Poisson point
//! process on an annulus around the serving base station, draws interferer
//! effective heights from the mixture model, forms the asymptotic SIR, and
//! coverage is estimated as the empirical exceedance frequency.
//!
//! Trials draw from per-trial ChaCha streams keyed by the trial index, and
//! exceedance counts reduce by integer addition, so estimates are bit-equal
//! for any degree of parallelism given the same seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{elevation_angle, sample_nearest_bs_distance, NetworkConfig};

/// Simulation campaign parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McCampaign {
    /// Number of independent realizations.
    pub trials: u64,
    /// Base seed; trial `i` uses stream `i` of the generator.
    pub seed: u64,
    /// Radius of the simulated interferer disc around the serving station,
    /// meters. `None` selects ten mean cell radii, `10 / sqrt(pi lambda)`.
    pub window_radius: Option<f64>,
    /// Keep the per-trial SIR samples (in dB) in the output.
    pub record_sir: bool,
}

impl McCampaign {
    pub fn new(trials: u64, seed: u64) -> Self {
        McCampaign {
            trials,
            seed,
            window_radius: None,
            record_sir: false,
        }
    }

    pub fn with_window_radius(mut self, window_radius: f64) -> Self {
        self.window_radius = Some(window_radius);
        self
    }

    pub fn with_record_sir(mut self, record: bool) -> Self {
        self.record_sir = record;
        self
    }

    /// The window radius actually used for `cfg`.
    pub fn resolved_window_radius(&self, cfg: &NetworkConfig) -> f64 {
        self.window_radius
            .unwrap_or_else(|| 10.0 * cfg.mean_cell_radius())
    }

    pub fn validate(&self, cfg: &NetworkConfig) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::config("campaign needs at least one trial"));
        }
        let w = self.resolved_window_radius(cfg);
        if !(w > cfg.exclusion_radius) {
            return Err(Error::config(format!(
                "window radius {w} must exceed the exclusion radius {}",
                cfg.exclusion_radius
            )));
        }
        Ok(())
    }
}

/// Empirical coverage at one threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub tau_db: f64,
    /// Fraction of trials with SIR above the threshold.
    pub p_cov_hat: f64,
    /// Normal-approximation 95% half-width,
    /// `1.96 sqrt(p (1 - p) / trials)`.
    pub ci_halfwidth_95: f64,
}

/// Output of one campaign: estimates share a single set of SIR samples
/// across the threshold grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McRun {
    pub estimates: Vec<McEstimate>,
    /// Per-trial SIR in dB when requested (`+inf` marks interference-free
    /// realizations).
    pub sir_samples_db: Option<Vec<f64>>,
}

/// Draw the interferer field: a Poisson number of points placed uniformly on
/// the annulus `[R_e, window_radius]` around the serving station, each with a
/// mixture-drawn effective height. Returns `(horizontal distance, height)`
/// pairs.
pub fn sample_interferers<R: Rng + ?Sized>(
    cfg: &NetworkConfig,
    rng: &mut R,
    window_radius: f64,
) -> Vec<(f64, f64)> {
    let r_e = cfg.exclusion_radius;
    let area = std::f64::consts::PI * (window_radius * window_radius - r_e * r_e);
    let mean = cfg.lambda_bs * area;
    let count = if mean > 0.0 {
        Poisson::new(mean).expect("positive mean").sample(rng) as u64
    } else {
        0
    };
    let mut interferers = Vec::with_capacity(count as usize);
    for _ in 0..count {
        // uniform on the annulus: r^2 uniform between the squared radii
        let u: f64 = rng.gen();
        let r = (r_e * r_e + u * (window_radius * window_radius - r_e * r_e)).sqrt();
        let h = cfg.height_model.sample(rng);
        interferers.push((r, h));
    }
    interferers
}

/// Asymptotic SIR of the typical user at serving distance `x` against the
/// given interferer field:
/// `G_0 (x^2 + h0^2)^(-v/2) / sum_l G_l (r_l^2 + h_l^2)^(-v/2)`.
/// The path-loss scale cancels. An empty field yields `+inf`, which counts
/// as covered for every finite threshold.
pub fn sir_linear(cfg: &NetworkConfig, x: f64, interferers: &[(f64, f64)]) -> f64 {
    let v_half = 0.5 * cfg.path_loss.exponent_v;
    let h0 = cfg.h0;
    let g0 = cfg.pattern.vertical_gain(elevation_angle(h0, x));
    let signal = g0 * (x * x + h0 * h0).powf(-v_half);
    let mut interference = 0.0;
    for &(r, h) in interferers {
        let g = cfg.pattern.vertical_gain(elevation_angle(h, r));
        interference += g * (r * r + h * h).powf(-v_half);
    }
    if interference == 0.0 {
        return f64::INFINITY;
    }
    signal / interference
}

/// Realize one trial: serving distance from the nearest-station law, then
/// the interferer field, then the SIR.
pub fn realize_sir<R: Rng + ?Sized>(cfg: &NetworkConfig, rng: &mut R, window_radius: f64) -> f64 {
    let x = sample_nearest_bs_distance(cfg.lambda_bs, rng);
    let interferers = sample_interferers(cfg, rng, window_radius);
    sir_linear(cfg, x, &interferers)
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Estimate coverage at every threshold of `tau_grid_db` from one shared set
/// of SIR realizations. Deterministic in `(cfg, campaign, tau_grid_db)`.
pub fn estimate_coverage(
    cfg: &NetworkConfig,
    campaign: &McCampaign,
    tau_grid_db: &[f64],
) -> Result<McRun> {
    cfg.validate()?;
    campaign.validate(cfg)?;
    if tau_grid_db.is_empty() {
        return Err(Error::config("threshold grid must be non-empty"));
    }
    let window = campaign.resolved_window_radius(cfg);
    let taus_lin: Vec<f64> = tau_grid_db.iter().map(|t| 10f64.powf(t / 10.0)).collect();
    let trials = campaign.trials;
    let seed = campaign.seed;

    let run_trial = |i: u64| -> f64 {
        let mut rng = trial_rng(seed, i);
        realize_sir(cfg, &mut rng, window)
    };

    let (counts, samples) = if campaign.record_sir {
        let sirs: Vec<f64> = (0..trials).into_par_iter().map(run_trial).collect();
        let mut counts = vec![0u64; taus_lin.len()];
        for &sir in &sirs {
            for (c, &tau) in counts.iter_mut().zip(&taus_lin) {
                if sir > tau {
                    *c += 1;
                }
            }
        }
        let db: Vec<f64> = sirs.iter().map(|s| 10.0 * s.log10()).collect();
        (counts, Some(db))
    } else {
        let counts = (0..trials)
            .into_par_iter()
            .fold(
                || vec![0u64; taus_lin.len()],
                |mut acc, i| {
                    let sir = run_trial(i);
                    for (c, &tau) in acc.iter_mut().zip(&taus_lin) {
                        if sir > tau {
                            *c += 1;
                        }
                    }
                    acc
                },
            )
            .reduce(
                || vec![0u64; taus_lin.len()],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(&b) {
                        *x += y;
                    }
                    a
                },
            );
        (counts, None)
    };

    let estimates = tau_grid_db
        .iter()
        .zip(&counts)
        .map(|(&tau_db, &c)| {
            let p = c as f64 / trials as f64;
            McEstimate {
                tau_db,
                p_cov_hat: p,
                ci_halfwidth_95: 1.96 * (p * (1.0 - p) / trials as f64).sqrt(),
            }
        })
        .collect();

    Ok(McRun {
        estimates,
        sir_samples_db: samples,
    })
}
