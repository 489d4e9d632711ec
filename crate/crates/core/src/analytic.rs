//! Deterministic evaluation of the coverage probability.
//!
//! The coverage expression is a three-level nest: an expectation over the
//! interferer effective height (fixed 64-point rule against the mixture
//! density), a radial integral that feeds the Poisson generating-functional
//! exponent, and an outer integral over the serving distance against the
//! nearest-station law, combined through an alternating binomial sum of
//! order `N` (the gamma approximation of the coverage indicator, with
//! `eta = N (N!)^(-1/N)`).
//!
//! For one serving distance `x` the exponent of every sum term `n` shares the
//! same radial kernel: the term index only scales the argument of the inner
//! exponential. The radial and outer integrals are therefore evaluated
//! vector-valued over `n`, which makes the whole sum cost barely more than a
//! single term.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{elevation_angle, nearest_bs_pdf, AntennaPattern, HeightModel, NetworkConfig};
use crate::quad::{adaptive_vec, geometric_edges, gl64, gl8, AdaptiveOpts};

/// Exponent magnitude beyond which `exp(-E)` (about 1e-20) is negligible
/// against every tolerance in play; the coverage integrand zeroes out there
/// and the radial integral stops refining.
const EXPONENT_CUTOFF: f64 = 46.0;

/// Maximum number of interval doublings of the radial upper limit.
const MAX_TAIL_SEGMENTS: u32 = 60;

/// Tolerances of the nested quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Per-panel relative tolerance of the adaptive integrals.
    pub rel_tol: f64,
    /// Absolute tolerance; also the scale for radial-tail truncation.
    pub abs_tol: f64,
    /// Probability mass of the serving-distance law allowed beyond the outer
    /// truncation point.
    pub outer_trunc_mass: f64,
    /// Multiplier setting the initial radial upper limit,
    /// `R1 = R_e + factor * (x + mean cell radius)`; the limit then doubles
    /// until the remaining tail is negligible.
    pub radial_trunc_factor: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-6,
            abs_tol: 1e-9,
            outer_trunc_mass: 1e-6,
            radial_trunc_factor: 4.0,
        }
    }
}

impl QuadratureSpec {
    /// Looser tolerances for parameter sweeps where each point only needs
    /// three or four significant digits.
    pub fn sweep() -> Self {
        QuadratureSpec {
            rel_tol: 1e-4,
            abs_tol: 1e-7,
            outer_trunc_mass: 1e-6,
            radial_trunc_factor: 4.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::config(format!("rel_tol out of (0, 1): {}", self.rel_tol)));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol < 1.0) {
            return Err(Error::config(format!("abs_tol out of (0, 1): {}", self.abs_tol)));
        }
        if !(self.outer_trunc_mass > 0.0 && self.outer_trunc_mass <= 1e-4) {
            return Err(Error::config(format!(
                "outer_trunc_mass out of (0, 1e-4]: {}",
                self.outer_trunc_mass
            )));
        }
        if !(self.radial_trunc_factor > 0.0) {
            return Err(Error::config(format!(
                "radial_trunc_factor must be positive: {}",
                self.radial_trunc_factor
            )));
        }
        Ok(())
    }
}

/// Coverage probability with quadrature diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageResult {
    /// Coverage probability, clamped to `[0, 1]`.
    pub p_cov: f64,
    /// Signed value of each term of the alternating sum, `n = 1..=N`.
    pub terms: Vec<f64>,
    /// Estimated numerical error (quadrature deltas plus truncated mass).
    pub err_estimate: f64,
    /// Radial plus serving-distance integrand evaluations.
    pub evals: u64,
}

/// `eta = N (N!)^(-1/N)`, evaluated in log space so large orders stay exact.
pub fn eta(n_order: u32) -> Result<f64> {
    if n_order == 0 {
        return Err(Error::domain("approximation order must be at least 1"));
    }
    let n = n_order as f64;
    let ln_factorial: f64 = (2..=n_order as u64).map(|k| (k as f64).ln()).sum();
    Ok((n.ln() - ln_factorial / n).exp())
}

/// Signed binomial coefficients `(-1)^(n+1) C(N, n)` for `n = 1..=N`.
pub fn signed_binomial_coeffs(n_order: u32) -> Vec<f64> {
    let nf = n_order as f64;
    let mut coeffs = Vec::with_capacity(n_order as usize);
    let mut c = 1.0;
    for n in 1..=n_order {
        c *= (nf - n as f64 + 1.0) / n as f64;
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        coeffs.push(sign * c);
    }
    coeffs
}

/// Neumaier-compensated sum; the alternating terms cancel heavily near
/// full coverage.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Assemble the alternating sum from the per-term expectations
/// `raw[n-1] = E_n`: returns the signed terms and their compensated total.
/// On scalar inputs `raw[n-1] = exp(-n s)` the total reproduces
/// `1 - (1 - exp(-s))^N` exactly up to rounding.
pub fn assemble_alternating_sum(n_order: u32, raw: &[f64]) -> (Vec<f64>, f64) {
    assert_eq!(raw.len(), n_order as usize);
    let coeffs = signed_binomial_coeffs(n_order);
    let terms: Vec<f64> = coeffs.iter().zip(raw).map(|(c, r)| c * r).collect();
    let total = compensated_sum(&terms);
    (terms, total)
}

/// Ratio of the interfering link gain to the serving link gain,
/// `G_l / G_0 = gain(atan(h/r)) / gain(atan(h0/x))`.
pub fn gain_ratio(cfg: &NetworkConfig, h: f64, r: f64, h0: f64, x: f64) -> f64 {
    let g_l = cfg.pattern.vertical_gain(elevation_angle(h, r));
    let g_0 = cfg.pattern.vertical_gain(elevation_angle(h0, x));
    g_l / g_0
}

/// Interference kernel `w(r, h) = gain(atan(h/r)) (r^2 + h^2)^(-v/2)`.
///
/// The inner exponential argument factors as `kappa(n, x) * w(r, h)`, which is
/// what lets every term of the alternating sum share one kernel evaluation.
#[inline]
fn interference_kernel(pattern: &AntennaPattern, v_half: f64, r: f64, h: f64) -> f64 {
    let g = pattern.vertical_gain(elevation_angle(h, r));
    g * (r * r + h * h).powf(-v_half)
}

/// Distances at which the gain toward a point at effective height `h`
/// changes regime: the boresight crossing `h / tan(beta)` and the side-lobe
/// clip boundaries `h / tan(beta +- theta3db sqrt(sll/12))`. Splitting
/// quadrature panels there spares the adaptive driver from rediscovering the
/// pattern kinks by bisection.
fn gain_regime_radii(pattern: &AntennaPattern, heights: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    if !pattern.enabled {
        return Vec::new();
    }
    let clip_offset = pattern.theta3db_deg * (pattern.sll_el_db / 12.0).sqrt();
    let mut radii = Vec::new();
    for &h in heights {
        for ang in [
            pattern.tilt_deg - clip_offset,
            pattern.tilt_deg,
            pattern.tilt_deg + clip_offset,
        ] {
            if ang > 0.05 && ang < 89.95 {
                let r = h / ang.to_radians().tan();
                if r > lo * (1.0 + 1e-9) && r < hi * (1.0 - 1e-9) {
                    radii.push(r);
                }
            }
        }
    }
    radii
}

/// Sorted, deduplicated union of panel edges.
fn merged_edges(mut edges: Vec<f64>, extra: Vec<f64>) -> Vec<f64> {
    edges.extend(extra);
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (a.abs() + b.abs()).max(1e-300));
    edges
}

/// Height nodes `(h, probability weight)` of the fixed inner rule: 64
/// Gauss-Legendre points against the renormalized linear density plus the
/// point mass. Weights sum to one.
fn height_nodes(model: &HeightModel) -> Vec<(f64, f64)> {
    let mut nodes = Vec::with_capacity(65);
    if model.a > 0.0 {
        let z = model.continuous_norm();
        for (h, w) in gl64().mapped(model.h_min, model.h_max) {
            nodes.push((h, model.a * w * (model.b * h + model.c) / z));
        }
    }
    if model.a < 1.0 {
        nodes.push((model.h_atom, 1.0 - model.a));
    }
    nodes
}

/// Serving-side scale: `kappa(n, x) = n eta tau (x^2 + h0^2)^(v/2) / G_0(x)`
/// without the leading `n`.
fn kappa_base(cfg: &NetworkConfig, eta: f64, tau_lin: f64, h0: f64, x: f64) -> f64 {
    let g0 = cfg.pattern.vertical_gain(elevation_angle(h0, x));
    eta * tau_lin * (x * x + h0 * h0).powf(0.5 * cfg.path_loss.exponent_v) / g0
}

/// Expectation over the interferer height of the per-point PGFL factor:
/// `F(h0, r, x, n, tau) = E_h[ exp(-n eta tau (G_l/G_0)
/// (sqrt(r^2+h^2)/sqrt(x^2+h0^2))^(-v)) ]`, in `(0, 1]`.
pub fn inner_expectation(
    cfg: &NetworkConfig,
    h0: f64,
    r: f64,
    x: f64,
    n: u32,
    tau_lin: f64,
) -> Result<f64> {
    let eta_n = eta(cfg.approx_order)?;
    let kappa = n as f64 * kappa_base(cfg, eta_n, tau_lin, h0, x);
    let v_half = 0.5 * cfg.path_loss.exponent_v;
    let mut f = 0.0;
    for (h, pw) in height_nodes(&cfg.height_model) {
        let w = interference_kernel(&cfg.pattern, v_half, r, h);
        f += pw * (-kappa * w).exp();
    }
    Ok(f)
}

struct RadialOutcome {
    exponents: Vec<f64>,
    err: f64,
    evals: u64,
    converged: bool,
}

/// Radial integral of the PGFL exponent for every `kappa` at once:
/// `E_k = 2 pi lambda \int_{R_e}^{inf} r (1 - F_k(r)) dr` where
/// `1 - F_k(r) = E_h[1 - exp(-kappa_k w(r, h))]` (evaluated through `expm1`
/// so the far tail keeps full relative precision).
///
/// With `allow_underflow_shortcut` the refinement stops as soon as every
/// exponent provably exceeds [`EXPONENT_CUTOFF`]; callers that consume
/// `exp(-E)` cannot tell the difference, but callers that need the exponent
/// itself must pass `false`.
fn radial_exponents(
    cfg: &NetworkConfig,
    quad: &QuadratureSpec,
    heights: &[(f64, f64)],
    kappas: &[f64],
    x: f64,
    allow_underflow_shortcut: bool,
) -> RadialOutcome {
    let dim = kappas.len();
    let two_pi_lambda = 2.0 * PI * cfg.lambda_bs;
    let kappa_max = kappas.iter().cloned().fold(0.0, f64::max);
    if kappa_max == 0.0 {
        return RadialOutcome {
            exponents: vec![0.0; dim],
            err: 0.0,
            evals: 0,
            converged: true,
        };
    }
    let v = cfg.path_loss.exponent_v;
    let v_half = 0.5 * v;
    let pattern = &cfg.pattern;

    let integrand = |r: f64, out: &mut [f64]| {
        out.fill(0.0);
        for &(h, pw) in heights {
            let w = interference_kernel(pattern, v_half, r, h);
            for (k, &kap) in kappas.iter().enumerate() {
                out[k] += pw * (-(-kap * w).exp_m1());
            }
        }
        for o in out.iter_mut() {
            *o *= r;
        }
    };

    let opts = AdaptiveOpts {
        rel_tol: quad.rel_tol,
        abs_tol: quad.abs_tol / two_pi_lambda,
        max_panels: 100_000,
    };

    let r_e = cfg.exclusion_radius;
    let r1 = r_e + quad.radial_trunc_factor * (x + cfg.mean_cell_radius());
    let kink_heights = [
        cfg.height_model.h_min,
        cfg.height_model.h_max,
        cfg.height_model.h_atom,
    ];
    let mut edges = merged_edges(
        geometric_edges(r_e.max(0.0), r1, 3),
        gain_regime_radii(pattern, &kink_heights, r_e, r1),
    );
    let mut totals = vec![0.0; dim];
    let mut err = vec![0.0; dim];
    let mut evals = 0u64;
    let mut converged = true;

    if allow_underflow_shortcut {
        // coarse single-panel probe: when even a crude estimate puts every
        // exponent far past underflow, the refined integral cannot matter
        let mut probe = vec![0.0; dim];
        let mut buf = vec![0.0; dim];
        for (r, w) in gl8().mapped(r_e.max(0.0), r1) {
            integrand(r, &mut buf);
            for (p, v) in probe.iter_mut().zip(&buf) {
                *p += w * v;
            }
        }
        let probe_min = two_pi_lambda * probe.iter().cloned().fold(f64::INFINITY, f64::min);
        if 0.5 * probe_min > EXPONENT_CUTOFF {
            return RadialOutcome {
                exponents: probe.iter().map(|&t| two_pi_lambda * t).collect(),
                err: 0.0,
                evals: 8,
                converged: true,
            };
        }
    }

    // stop once the analytic tail bound (gain <= 1, 1 - exp(-y) <= y) says
    // the rest of the axis cannot matter, once further refinement is below
    // both tolerances, or once the smallest exponent is already far past
    // underflow of exp(-E)
    let tail_tol = 0.5 * quad.abs_tol;
    let mut segment = 0u32;
    let mut seg_opts = opts;
    loop {
        let out = adaptive_vec(&integrand, dim, &edges, &seg_opts, false);
        evals += out.evals;
        converged &= out.converged;
        for i in 0..dim {
            totals[i] += out.values[i];
            err[i] += out.err[i];
        }
        let hi = edges[edges.len() - 1];
        let scaled_min = two_pi_lambda * totals.iter().cloned().fold(f64::INFINITY, f64::min);
        if allow_underflow_shortcut && scaled_min > EXPONENT_CUTOFF {
            break;
        }
        let seg_tol = tail_tol.max(0.25 * quad.rel_tol * scaled_min);
        let tail_bound = two_pi_lambda * kappa_max * hi.powf(2.0 - v) / (v - 2.0);
        let seg_contribution =
            two_pi_lambda * out.values.iter().cloned().fold(0.0, f64::max);
        if tail_bound < seg_tol || seg_contribution < seg_tol {
            break;
        }
        segment += 1;
        if segment > MAX_TAIL_SEGMENTS {
            converged = false;
            break;
        }
        edges = vec![hi, 2.0 * hi];
        // a tail segment only needs resolving relative to the exponent
        // already accumulated, not to its own magnitude
        seg_opts.abs_tol = (seg_tol / two_pi_lambda).max(opts.abs_tol);
    }

    let max_err = err.iter().cloned().fold(0.0, f64::max);
    RadialOutcome {
        exponents: totals.iter().map(|&t| two_pi_lambda * t).collect(),
        err: two_pi_lambda * max_err,
        evals,
        converged,
    }
}

/// PGFL exponent `2 pi lambda \int_{R_e}^{inf} r (1 - F(h0, r, x, n, tau)) dr`
/// for a single term index `n`. Nonnegative; nondecreasing in both `tau` and
/// `n`.
pub fn pgfl_exponent(
    cfg: &NetworkConfig,
    quad: &QuadratureSpec,
    x: f64,
    n: u32,
    tau_lin: f64,
) -> Result<f64> {
    cfg.validate()?;
    quad.validate()?;
    if !(x > 0.0) {
        return Err(Error::domain(format!("serving distance must be positive, got {x}")));
    }
    let eta_n = eta(cfg.approx_order)?;
    let heights = height_nodes(&cfg.height_model);
    let kappa = n as f64 * kappa_base(cfg, eta_n, tau_lin, cfg.h0, x);
    let out = radial_exponents(cfg, quad, &heights, &[kappa], x, false);
    if !out.converged {
        return Err(Error::Numerical {
            detail: format!("radial integral did not converge at x = {x}, n = {n}"),
            partial: out.exponents[0],
        });
    }
    Ok(out.exponents[0])
}

/// Coverage probability of the typical user:
/// `P_c = sum_{n=1}^{N} (-1)^(n+1) C(N, n) \int_0^inf exp(-E_n(x)) f_R(x) dx`.
///
/// The outer integral is truncated where the remaining serving-distance mass
/// equals `quad.outer_trunc_mass` and its panels are evaluated on the rayon
/// pool; panel reduction is ordered and compensated, so results do not depend
/// on thread count.
pub fn coverage_probability(cfg: &NetworkConfig, quad: &QuadratureSpec) -> Result<CoverageResult> {
    cfg.validate()?;
    quad.validate()?;
    let n_order = cfg.approx_order;
    let eta_n = eta(n_order)?;
    let tau_lin = cfg.tau_linear();
    let heights = height_nodes(&cfg.height_model);
    let lambda = cfg.lambda_bs;

    let x_up = (-(quad.outer_trunc_mass).ln() / (PI * lambda)).sqrt();
    let dim = n_order as usize;

    let radial_evals = AtomicU64::new(0);
    let radial_converged = AtomicBool::new(true);
    // worst radial-quadrature error across outer nodes; nonnegative f64 bits
    // order like u64, so fetch_max works
    let radial_err_bits = AtomicU64::new(0);

    let outer_integrand = |x: f64, out: &mut [f64]| {
        let base = kappa_base(cfg, eta_n, tau_lin, cfg.h0, x);
        let kappas: Vec<f64> = (1..=n_order).map(|n| n as f64 * base).collect();
        let radial = radial_exponents(cfg, quad, &heights, &kappas, x, true);
        radial_evals.fetch_add(radial.evals, Ordering::Relaxed);
        radial_err_bits.fetch_max(radial.err.to_bits(), Ordering::Relaxed);
        if !radial.converged {
            radial_converged.store(false, Ordering::Relaxed);
        }
        let f_r = nearest_bs_pdf(lambda, x);
        for (o, &e) in out.iter_mut().zip(&radial.exponents) {
            *o = if e > EXPONENT_CUTOFF { 0.0 } else { (-e).exp() * f_r };
        }
    };

    let opts = AdaptiveOpts {
        rel_tol: quad.rel_tol,
        abs_tol: quad.abs_tol,
        max_panels: 100_000,
    };
    // pre-split where the serving gain G_0(x) changes regime
    let edges = merged_edges(
        (0..=4).map(|k| x_up * k as f64 / 4.0).collect(),
        gain_regime_radii(&cfg.pattern, &[cfg.h0], 0.0, x_up),
    );
    let outer = adaptive_vec(&outer_integrand, dim, &edges, &opts, true);

    let (terms, sum) = assemble_alternating_sum(n_order, &outer.values);

    let coeff_mass: f64 = signed_binomial_coeffs(n_order).iter().map(|c| c.abs()).sum();
    let quad_err: f64 = signed_binomial_coeffs(n_order)
        .iter()
        .zip(&outer.err)
        .map(|(c, e)| c.abs() * e)
        .sum();
    // a radial-exponent error of eps perturbs exp(-E) by at most a relative
    // eps, hence the coverage by at most eps as well
    let radial_err = f64::from_bits(radial_err_bits.load(Ordering::Relaxed));
    let err_estimate = quad_err
        + coeff_mass * (quad.outer_trunc_mass + quad.abs_tol + radial_err + quad.rel_tol * 1e-2);

    let evals = outer.evals + radial_evals.load(Ordering::Relaxed);
    if !outer.converged || !radial_converged.load(Ordering::Relaxed) {
        return Err(Error::Numerical {
            detail: "quadrature budget exhausted before convergence".into(),
            partial: sum.clamp(0.0, 1.0),
        });
    }

    Ok(CoverageResult {
        p_cov: sum.clamp(0.0, 1.0),
        terms,
        err_estimate,
        evals,
    })
}
