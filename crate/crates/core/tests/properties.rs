//! Property tests over the pure primitives.

use proptest::prelude::*;

use tiltcov_core::{
    assemble_alternating_sum, elevation_angle, nearest_bs_cdf, nearest_bs_pdf, AntennaPattern,
    HeightModel,
};

fn arb_pattern() -> impl Strategy<Value = AntennaPattern> {
    (0.0..=90.0f64, 1.0..=30.0f64, 1.0..=40.0f64)
        .prop_map(|(tilt, bw, sll)| AntennaPattern::new(tilt, bw, sll).unwrap())
}

/// Height models built so the nominal linear density integrates to exactly 1.
fn arb_height_model() -> impl Strategy<Value = HeightModel> {
    (1.0..=40.0f64, 5.0..=40.0f64, -0.002..=0.008f64)
        .prop_map(|(h_min, span, b)| {
            let h_max = h_min + span;
            let c = (1.0 - 0.5 * b * (h_max * h_max - h_min * h_min)) / (h_max - h_min);
            HeightModel {
                a: 1.0,
                b,
                c,
                h_min,
                h_max,
                h_atom: h_max,
            }
        })
        .prop_filter("density nonnegative", |m| {
            m.b * m.h_min + m.c >= 0.0 && m.b * m.h_max + m.c >= 0.0
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn gain_bounded_and_peaked_at_tilt(pattern in arb_pattern(), theta in -90.0..=90.0f64) {
        let g = pattern.vertical_gain(theta);
        prop_assert!(g > 0.0 && g <= 1.0);
        prop_assert!(g >= pattern.floor_gain() - 1e-15);
        prop_assert!(g <= pattern.vertical_gain(pattern.tilt_deg));
    }

    #[test]
    fn gain_depends_only_on_offset(
        a in arb_pattern(),
        tilt_b in 0.0..=90.0f64,
        off in -60.0..=60.0f64,
    ) {
        let b = AntennaPattern { tilt_deg: tilt_b, ..a };
        let ta = (a.tilt_deg + off).clamp(-90.0, 90.0);
        let tb = tilt_b + (ta - a.tilt_deg);
        if (-90.0..=90.0).contains(&tb) {
            // the angles only enter through the offset; allow for the
            // rounding of the offset reconstruction itself
            let (ga, gb) = (a.vertical_gain(ta), b.vertical_gain(tb));
            prop_assert!((ga - gb).abs() <= 1e-12 * ga, "{} vs {}", ga, gb);
        }
    }

    #[test]
    fn gain_nonincreasing_in_offset(
        pattern in arb_pattern(),
        o1 in 0.0..=90.0f64,
        o2 in 0.0..=90.0f64,
    ) {
        // both offsets taken on the same side and inside the angle domain
        let (near, far) = if o1 <= o2 { (o1, o2) } else { (o2, o1) };
        let t_near = pattern.tilt_deg - near;
        let t_far = pattern.tilt_deg - far;
        if t_far >= -90.0 {
            prop_assert!(pattern.vertical_gain(t_near) >= pattern.vertical_gain(t_far));
        }
    }

    #[test]
    fn elevation_angle_in_range(h in 0.0..=100.0f64, r in 0.0..=10_000.0f64) {
        let theta = elevation_angle(h, r);
        prop_assert!((0.0..=90.0).contains(&theta));
    }

    #[test]
    fn height_mixture_mass_one_and_sampler_in_support(model in arb_height_model(), u in 0.0..1.0f64) {
        prop_assert!(model.validate().is_ok());
        // trapezoid over the continuous part plus the (empty) atom
        let n = 2_000;
        let dh = (model.h_max - model.h_min) / n as f64;
        let mut mass = 0.0;
        for i in 0..n {
            let h = model.h_min + (i as f64 + 0.5) * dh;
            mass += model.continuous_pdf(h) * dh;
        }
        prop_assert!((mass - 1.0).abs() < 1e-4, "mass {}", mass);

        let h = model.sample_continuous_at(u);
        prop_assert!(h >= model.h_min && h <= model.h_max);
        prop_assert!((model.continuous_cdf_unit(h) - u).abs() < 1e-9);
    }

    #[test]
    fn nearest_bs_cdf_consistent_with_pdf(lambda in 1e-7..=1e-4f64, x in 1.0..=2_000.0f64) {
        // centered finite difference of the CDF reproduces the density
        let eps = 1e-3 * x;
        let dcdf = (nearest_bs_cdf(lambda, x + eps) - nearest_bs_cdf(lambda, x - eps)) / (2.0 * eps);
        let pdf = nearest_bs_pdf(lambda, x);
        prop_assert!((dcdf - pdf).abs() <= 1e-6 + 1e-4 * pdf.abs(), "dcdf {} pdf {}", dcdf, pdf);
    }

    #[test]
    fn alternating_sum_identity_random(n_order in 1u32..=10, s in 1e-3..=20.0f64) {
        let raw: Vec<f64> = (1..=n_order).map(|n| (-(n as f64) * s).exp()).collect();
        let (terms, total) = assemble_alternating_sum(n_order, &raw);
        let want = 1.0 - (1.0 - (-s).exp()).powi(n_order as i32);
        prop_assert!((total - want).abs() < 1e-12);
        for (i, t) in terms.iter().enumerate() {
            prop_assert_eq!(*t > 0.0, i % 2 == 0);
        }
    }
}
