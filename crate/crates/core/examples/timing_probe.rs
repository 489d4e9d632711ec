//! Rough wall-clock probe of the main entry points; handy when sizing
//! sweep grids. Run with `cargo run --release -p tiltcov-core --example
//! timing_probe`.

use std::time::Instant;

use tiltcov_core::{
    coverage_probability, estimate_coverage, McCampaign, NetworkConfig, QuadratureSpec,
};

fn time_coverage(label: &str, cfg: &NetworkConfig, quad: &QuadratureSpec) {
    let t = Instant::now();
    let r = coverage_probability(cfg, quad).unwrap();
    println!(
        "{label:<34} p={:.6} err={:.2e} evals={:>9} {:>8.1} ms",
        r.p_cov,
        r.err_estimate,
        r.evals,
        t.elapsed().as_secs_f64() * 1e3
    );
}

fn main() {
    let sparse = NetworkConfig::baseline(1e-6);
    let dense = NetworkConfig::baseline(5e-5);
    let strict = QuadratureSpec::default();
    let sweep = QuadratureSpec::sweep();

    for (name, cfg) in [("sparse", &sparse), ("dense", &dense)] {
        time_coverage(&format!("{name} a=1 default tol"), cfg, &strict);
        time_coverage(&format!("{name} a=1 sweep tol"), cfg, &sweep);
        let a0 = cfg.clone().with_height_weight(0.0);
        time_coverage(&format!("{name} a=0 sweep tol"), &a0, &sweep);
        let h10 = cfg.clone().with_h0(10.0);
        time_coverage(&format!("{name} a=1 h0=10 sweep tol"), &h10, &sweep);
    }

    let campaign = McCampaign::new(200_000, 42);
    let t = Instant::now();
    let run = estimate_coverage(&sparse, &campaign, &[4.0]).unwrap();
    println!(
        "mc sparse 2e5 trials             p={:.6} ci={:.4} {:>8.1} ms",
        run.estimates[0].p_cov_hat,
        run.estimates[0].ci_halfwidth_95,
        t.elapsed().as_secs_f64() * 1e3
    );
    let t = Instant::now();
    let run = estimate_coverage(&dense, &campaign, &[4.0]).unwrap();
    println!(
        "mc dense 2e5 trials              p={:.6} ci={:.4} {:>8.1} ms",
        run.estimates[0].p_cov_hat,
        run.estimates[0].ci_halfwidth_95,
        t.elapsed().as_secs_f64() * 1e3
    );
}
