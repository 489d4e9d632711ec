//! Gauss-Legendre quadrature with adaptive panel bisection.
//!
//! The coverage integrals are nested: a fixed-order rule handles the short,
//! smooth height expectation, while the radial and serving-distance integrals
//! use composite panels that bisect until a local error estimate passes.
//! The integrands are vector valued (one component per term of the
//! alternating approximation sum), so the adaptive driver refines on the
//! worst component and every component shares the same evaluation points.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rayon::prelude::*;

/// Nodes and weights of an `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Build the rule by Newton iteration on the Legendre polynomial roots.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 1..=m {
            let mut z = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() <= 1e-15 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i - 1] = -z;
            nodes[n - i] = z;
            weights[i - 1] = w;
            weights[n - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&t, &w)| (mid + half * t, half * w))
    }

    /// Integrate a scalar function over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let mut acc = 0.0;
        for (x, w) in self.mapped(a, b) {
            acc += w * f(x);
        }
        acc
    }

    /// Integrate a vector-valued function, accumulating into `out`.
    fn integrate_vec<F: Fn(f64, &mut [f64])>(&self, a: f64, b: f64, f: &F, out: &mut [f64]) {
        out.fill(0.0);
        let mut buf = vec![0.0; out.len()];
        for (x, w) in self.mapped(a, b) {
            f(x, &mut buf);
            for (o, v) in out.iter_mut().zip(&buf) {
                *o += w * v;
            }
        }
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for j in 2..=n {
        let jf = j as f64;
        let p_next = ((2.0 * jf - 1.0) * x * p - (jf - 1.0) * p_prev) / jf;
        p_prev = p;
        p = p_next;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    if n == 1 {
        return (x, 1.0);
    }
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Shared 8-point rule: the low half of the embedded error-estimation pair.
pub fn gl8() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(8))
}

/// Shared 16-point rule used as the panel base of the adaptive driver.
pub fn gl16() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

/// Shared 64-point rule used by the fixed-order height expectation.
pub fn gl64() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(64))
}

/// Tolerances and budget for [`adaptive_vec`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOpts {
    /// Per-panel relative tolerance against the refined panel value.
    pub rel_tol: f64,
    /// Absolute tolerance for the whole interval, distributed over panels
    /// proportionally to their length.
    pub abs_tol: f64,
    /// Hard cap on the number of accepted panels.
    pub max_panels: usize,
}

impl Default for AdaptiveOpts {
    fn default() -> Self {
        AdaptiveOpts {
            rel_tol: 1e-6,
            abs_tol: 1e-9,
            max_panels: 1_000_000,
        }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone)]
pub struct QuadOutcome {
    /// Integral per component.
    pub values: Vec<f64>,
    /// Accumulated per-component error estimate (sum of accepted panel deltas).
    pub err: Vec<f64>,
    /// Number of integrand evaluations (points times one vector call each).
    pub evals: u64,
    /// Number of accepted panels.
    pub panels: usize,
    /// False when the panel budget or depth limit cut refinement short.
    pub converged: bool,
}

struct PanelAcc {
    values: Vec<f64>,
    err: Vec<f64>,
    evals: u64,
    panels: usize,
    converged: bool,
}

const MAX_DEPTH: u32 = 48;

/// Adaptive composite Gauss-Legendre integration of a vector integrand over
/// the panels delimited by `edges` (ascending).
///
/// Two passes: a coarse GL8/GL16 pair on each initial panel first estimates
/// the magnitude of every component, then panels bisect until the pair
/// difference passes a per-component absolute tolerance
/// `max(abs_tol, rel_tol * |component|)` distributed over panel length.
/// Sizing the tolerance against the whole-interval magnitude (instead of the
/// local panel value) keeps far tails from being refined long past their
/// possible contribution.
///
/// When `parallel` is set the initial panels run on the rayon pool; results
/// are reduced in panel order with compensated summation, so the output is
/// identical for any number of threads.
pub fn adaptive_vec<F>(
    f: &F,
    dim: usize,
    edges: &[f64],
    opts: &AdaptiveOpts,
    parallel: bool,
) -> QuadOutcome
where
    F: Fn(f64, &mut [f64]) + Sync,
{
    assert!(edges.len() >= 2, "need at least one panel");
    assert!(dim >= 1);
    let total_len: f64 = edges[edges.len() - 1] - edges[0];
    if total_len <= 0.0 {
        return QuadOutcome {
            values: vec![0.0; dim],
            err: vec![0.0; dim],
            evals: 0,
            panels: 0,
            converged: true,
        };
    }
    let panel_budget = (opts.max_panels / (edges.len() - 1)).max(4);

    struct TopPanel {
        a: f64,
        b: f64,
        low: Vec<f64>,
        high: Vec<f64>,
    }

    let eval_pair = |a: f64, b: f64| -> (Vec<f64>, Vec<f64>) {
        let mut low = vec![0.0; dim];
        let mut high = vec![0.0; dim];
        gl8().integrate_vec(a, b, f, &mut low);
        gl16().integrate_vec(a, b, f, &mut high);
        (low, high)
    };

    let pairs: Vec<(f64, f64)> = edges.windows(2).map(|w| (w[0], w[1])).collect();
    let tops: Vec<TopPanel> = {
        let make = |&(a, b): &(f64, f64)| {
            let (low, high) = eval_pair(a, b);
            TopPanel { a, b, low, high }
        };
        if parallel {
            pairs.par_iter().map(make).collect()
        } else {
            pairs.iter().map(make).collect()
        }
    };

    // per-component tolerance per unit length from the coarse magnitudes
    let mut scale = vec![0.0; dim];
    for t in &tops {
        for i in 0..dim {
            scale[i] += t.high[i].abs();
        }
    }
    let tol_per_len: Vec<f64> = scale
        .iter()
        .map(|s| opts.abs_tol.max(opts.rel_tol * s) / total_len)
        .collect();

    let run_panel = |t: &TopPanel| -> PanelAcc {
        let mut acc = PanelAcc {
            values: vec![0.0; dim],
            err: vec![0.0; dim],
            evals: 24,
            panels: 0,
            converged: true,
        };
        refine(
            dim,
            t.a,
            t.b,
            &t.low,
            &t.high,
            &tol_per_len,
            &eval_pair,
            panel_budget,
            0,
            &mut acc,
        );
        acc
    };

    let results: Vec<PanelAcc> = if parallel {
        tops.par_iter().map(run_panel).collect()
    } else {
        tops.iter().map(run_panel).collect()
    };

    let mut values = vec![0.0; dim];
    let mut comp = vec![0.0; dim];
    let mut err = vec![0.0; dim];
    let mut evals = 0u64;
    let mut panels = 0usize;
    let mut converged = true;
    for acc in &results {
        for i in 0..dim {
            // Kahan-compensated accumulation in deterministic panel order.
            let y = acc.values[i] - comp[i];
            let t = values[i] + y;
            comp[i] = (t - values[i]) - y;
            values[i] = t;
            err[i] += acc.err[i];
        }
        evals += acc.evals;
        panels += acc.panels;
        converged &= acc.converged;
    }
    QuadOutcome {
        values,
        err,
        evals,
        panels,
        converged,
    }
}

#[allow(clippy::too_many_arguments)]
fn refine<E>(
    dim: usize,
    a: f64,
    b: f64,
    low: &[f64],
    high: &[f64],
    tol_per_len: &[f64],
    eval_pair: &E,
    panel_budget: usize,
    depth: u32,
    acc: &mut PanelAcc,
) where
    E: Fn(f64, f64) -> (Vec<f64>, Vec<f64>),
{
    // the GL8/GL16 difference estimates the GL8 error and bounds the (far
    // smaller) GL16 error on smooth panels
    let len = b - a;
    let ok = (0..dim).all(|i| (high[i] - low[i]).abs() <= tol_per_len[i] * len);
    let out_of_budget = depth >= MAX_DEPTH || acc.panels + 1 > panel_budget;
    if ok || out_of_budget {
        if !ok {
            acc.converged = false;
        }
        for i in 0..dim {
            acc.values[i] += high[i];
            acc.err[i] += (high[i] - low[i]).abs();
        }
        acc.panels += 1;
        return;
    }
    let mid = 0.5 * (a + b);
    let (l_low, l_high) = eval_pair(a, mid);
    let (r_low, r_high) = eval_pair(mid, b);
    acc.evals += 48;
    refine(
        dim, a, mid, &l_low, &l_high, tol_per_len, eval_pair, panel_budget, depth + 1, acc,
    );
    refine(
        dim, mid, b, &r_low, &r_high, tol_per_len, eval_pair, panel_budget, depth + 1, acc,
    );
}

/// Scalar convenience wrapper around [`adaptive_vec`].
pub fn adaptive<F>(f: F, a: f64, b: f64, opts: &AdaptiveOpts) -> QuadOutcome
where
    F: Fn(f64) -> f64 + Sync,
{
    let g = |x: f64, out: &mut [f64]| out[0] = f(x);
    adaptive_vec(&g, 1, &[a, b], opts, false)
}

/// Geometric partition of `[a, b]` into `n` panels (used to pre-split the
/// radial integral, whose integrand lives on several length scales).
pub fn geometric_edges(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 1 && b > a);
    if a <= 0.0 {
        // fall back to a uniform split when the lower end touches zero
        return (0..=n)
            .map(|k| a + (b - a) * k as f64 / n as f64)
            .collect();
    }
    let ratio = (b / a).powf(1.0 / n as f64);
    let mut edges: Vec<f64> = (0..=n).map(|k| a * ratio.powi(k as i32)).collect();
    edges[0] = a;
    edges[n] = b;
    edges
}
