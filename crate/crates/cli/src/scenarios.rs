//! The built-in scenario set: coverage versus tilt at both densities (four
//! height cases each, plus simulation companions for cross-validation) and
//! coverage versus SIR threshold with per-threshold optimized tilt (three
//! comparison modes).

use crate::config::{
    CampaignSection, ComparisonMode, EvaluatorKind, ExperimentSpec, HeightCase, NetworkSection,
    QuadratureSection, SweepAxis, TiltSearchSection,
};

const SPARSE_DENSITY: f64 = 1e-6;
const DENSE_DENSITY: f64 = 5e-5;
const BUILTIN_SEED: u64 = 42;

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let mut v = Vec::new();
    let mut k = 0u32;
    loop {
        let x = lo + k as f64 * step;
        if x >= hi - 1e-9 {
            break;
        }
        v.push(x);
        k += 1;
    }
    v.push(hi);
    v
}

fn network(lambda_bs: f64) -> NetworkSection {
    let mut n: NetworkSection = toml::from_str(&format!("lambda_bs = {lambda_bs:e}"))
        .expect("minimal network section");
    n.sir_threshold_db = 4.0;
    n
}

fn four_height_cases() -> Vec<HeightCase> {
    // interferers on the ground vs distributed, typical user high vs ground
    [(0.0, 10.0), (0.0, 30.5), (1.0, 10.0), (1.0, 30.5)]
        .into_iter()
        .map(|(a, h0)| HeightCase {
            label: format!("a{}_h{}", a as u32, h0),
            a,
            h0,
        })
        .collect()
}

fn sweep_quadrature() -> QuadratureSection {
    QuadratureSection {
        rel_tol: 1e-4,
        abs_tol: 1e-7,
        ..Default::default()
    }
}

fn tilt_figure(id: &str, lambda_bs: f64) -> ExperimentSpec {
    ExperimentSpec {
        id: id.into(),
        axis: SweepAxis::Tilt,
        grid: grid(0.0, 90.0, 1.0),
        evaluators: vec![EvaluatorKind::Analytic],
        modes: vec![ComparisonMode::HeightAware],
        network: network(lambda_bs),
        height_cases: four_height_cases(),
        campaign: CampaignSection::default(),
        quadrature: sweep_quadrature(),
        tilt_search: TiltSearchSection::default(),
        out: Some(format!("{id}.csv").into()),
    }
}

fn tilt_figure_mc(id: &str, lambda_bs: f64) -> ExperimentSpec {
    ExperimentSpec {
        grid: grid(0.0, 90.0, 5.0),
        evaluators: vec![EvaluatorKind::Montecarlo],
        campaign: CampaignSection {
            trials: 200_000,
            seed: BUILTIN_SEED,
            ..Default::default()
        },
        ..tilt_figure(id, lambda_bs)
    }
}

fn threshold_figure(id: &str, lambda_bs: f64) -> ExperimentSpec {
    let mut network = network(lambda_bs);
    // the truth here: typical user high up, interferers distributed in height
    network.h0 = 10.0;
    network.height_model.a = 1.0;
    ExperimentSpec {
        id: id.into(),
        axis: SweepAxis::SirThresholdDb,
        grid: grid(-10.0, 20.0, 1.0),
        evaluators: vec![EvaluatorKind::Analytic],
        modes: vec![
            ComparisonMode::HeightAware,
            ComparisonMode::HeightBlind,
            ComparisonMode::TwoDbf,
        ],
        network,
        height_cases: Vec::new(),
        campaign: CampaignSection::default(),
        quadrature: sweep_quadrature(),
        tilt_search: TiltSearchSection::default(),
        out: Some(format!("{id}.csv").into()),
    }
}

/// The six canonical experiments: tilt sweeps at both densities with their
/// simulation companions, and per-threshold-optimized coverage curves at
/// both densities.
pub fn emit_builtin_scenarios() -> Vec<ExperimentSpec> {
    vec![
        tilt_figure("fig3", SPARSE_DENSITY),
        tilt_figure("fig4", DENSE_DENSITY),
        threshold_figure("fig5", SPARSE_DENSITY),
        threshold_figure("fig6", DENSE_DENSITY),
        tilt_figure_mc("fig3_mc", SPARSE_DENSITY),
        tilt_figure_mc("fig4_mc", DENSE_DENSITY),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_builtin_scenarios_validate() {
        let specs = emit_builtin_scenarios();
        assert_eq!(specs.len(), 6);
        for spec in &specs {
            spec.validate().unwrap_or_else(|e| panic!("{}: {e}", spec.id));
        }
    }

    #[test]
    fn fig3_matches_its_caption() {
        let specs = emit_builtin_scenarios();
        let fig3 = specs.iter().find(|s| s.id == "fig3").unwrap();
        assert_eq!(fig3.network.lambda_bs, 1e-6);
        assert_eq!(fig3.network.sir_threshold_db, 4.0);
        assert_eq!(fig3.axis, SweepAxis::Tilt);
        assert_eq!(fig3.grid.first(), Some(&0.0));
        assert_eq!(fig3.grid.last(), Some(&90.0));
        assert_eq!(fig3.height_cases.len(), 4);
    }

    #[test]
    fn fig4_is_the_dense_network() {
        let specs = emit_builtin_scenarios();
        let fig4 = specs.iter().find(|s| s.id == "fig4").unwrap();
        assert_eq!(fig4.network.lambda_bs, 5e-5);
    }

    #[test]
    fn threshold_figures_carry_three_modes() {
        for id in ["fig5", "fig6"] {
            let specs = emit_builtin_scenarios();
            let s = specs.iter().find(|s| s.id == id).unwrap();
            assert_eq!(s.modes.len(), 3);
            assert_eq!(s.network.h0, 10.0);
            assert_eq!(s.grid.first(), Some(&-10.0));
            assert_eq!(s.grid.last(), Some(&20.0));
        }
    }
}
