//! Property-based invariants over generated inputs.

use proptest::prelude::*;

use vandamp_core::problem::{
    ConvexProblem, DampingSchedule, NormTriple, ScalarNonlinearity, SourceFamily, SourceTerm,
};
use vandamp_core::runner;

fn finite_vec(n: usize, scale: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-scale..scale, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The embedding chain holds for every vector on every provided family.
    #[test]
    fn norm_chain_ordering(v in finite_vec(12, 50.0), wave in any::<bool>()) {
        let problem = if wave {
            ConvexProblem::wave(12, Some(ScalarNonlinearity::Cubic)).unwrap()
        } else {
            ConvexProblem::quadratic((1..=12).map(|i| i as f64 * 0.5).collect()).unwrap()
        };
        let norms = NormTriple::new(&problem);
        let h = norms.h_norm(&v);
        let vn = norms.v_norm(&v);
        let vp = norms.vprime_norm(&v).unwrap();
        prop_assert!(vp <= h * (1.0 + 1e-10) + 1e-12);
        prop_assert!(h <= vn * (1.0 + 1e-10) + 1e-12);
        // Interpolation with exponent 1/2 and constant 1.
        prop_assert!(h * h <= vp * vn * (1.0 + 1e-10) + 1e-12);
    }

    /// Gradient monotonicity of the convex potential.
    #[test]
    fn gradient_monotonicity(
        x in finite_vec(4, 5.0),
        y in finite_vec(4, 5.0),
        family in 0usize..3,
    ) {
        let problem = match family {
            0 => ConvexProblem::even_quartic(vec![1.0, 2.0, 0.5, 3.0]).unwrap(),
            1 => ConvexProblem::flat_basin(4, 1.0).unwrap(),
            _ => ConvexProblem::shifted_quartic(vec![1.0, 1.5, 2.0, 2.5], 1.0).unwrap(),
        };
        let gx = problem.grad_phi(&x).unwrap();
        let gy = problem.grad_phi(&y).unwrap();
        let mut pairing = 0.0;
        for i in 0..4 {
            pairing += (gx[i] - gy[i]) * (x[i] - y[i]);
        }
        prop_assert!(problem.mass_weight() * pairing >= -1e-12);
    }

    /// Power damping schedules satisfy both hypotheses on arbitrary grids.
    #[test]
    fn power_schedules_satisfy_hypotheses(
        k in 0.1f64..5.0,
        alpha in 0.0f64..0.95,
        scale in 1.0f64..3.0,
        mut grid in prop::collection::vec(0.0f64..500.0, 3..40),
    ) {
        grid.sort_by(f64::total_cmp);
        let schedule = DampingSchedule::scaled_power(k, alpha, 0.0, scale).unwrap();
        let report = schedule.check_hypotheses(&grid).unwrap();
        prop_assert!(report.all_hold(), "{report:?}");
    }

    /// The analytic finiteness classifier agrees with quadrature growth
    /// between two horizons for power sources.
    #[test]
    fn classifier_matches_quadrature_growth(
        beta in 0.3f64..3.0,
        r in 0.0f64..2.0,
        p in prop::sample::select(vec![1u32, 2u32]),
    ) {
        // Stay away from the divergence boundary where finite horizons
        // cannot distinguish log-divergence from convergence.
        let exponent = r - p as f64 * beta;
        prop_assume!((exponent + 1.0).abs() > 0.05);
        let source = SourceTerm::from_seed(
            SourceFamily::PowerDecay { c: 1.0, beta },
            2,
            1.0,
            9,
        ).unwrap();
        let early = source.weighted_integral(r, p, 1.0e4).unwrap();
        let late = source.weighted_integral(r, p, 1.0e6).unwrap();
        let finite = if p == 1 {
            source.l1_weight_finite(r)
        } else {
            source.l2_weight_finite(r)
        };
        prop_assert_eq!(late.converges(), finite);
        let growth = late.value - early.value;
        if finite {
            let bound = match early.tail {
                vandamp_core::problem::Tail::Finite(b) => b,
                _ => unreachable!(),
            };
            prop_assert!(growth <= bound * (1.0 + 1e-6) + 1e-12);
        } else {
            prop_assert!(growth > 0.02 * early.value.max(1e-9));
        }
    }

    /// CSV round-trips reproduce every value bit-exactly.
    #[test]
    fn csv_round_trip_bit_exact(values in prop::collection::vec(-1e12f64..1e12, 1..40)) {
        let n = values.len();
        let record = vandamp_core::diagnostics::EnergyRecord {
            alpha: 0.5,
            t: (0..n).map(|i| i as f64).collect(),
            energy: values.clone(),
            etilde: values.iter().map(|v| v * 1.5).collect(),
            etilde_is_plain: false,
            anchor: values.iter().map(|v| v.abs()).collect(),
            speed: values.iter().map(|v| v.abs().sqrt()).collect(),
            dist_v: values.iter().map(|v| v * 1e-14).collect(),
            gradnorm_vp: values.iter().map(|v| v * 1e14).collect(),
            source_pairing: vec![0.0; n],
            nu_list: vec![0.5],
            velocity_integrals: vec![values.clone()],
            grad_integral: vec![0.0; n],
            checkpoints: vec![],
            sup_h_norm: 0.0,
        };
        let mut buf = Vec::new();
        runner::write_csv(&record, &mut buf).unwrap();
        let parsed = runner::parse_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(parsed.energy, record.energy);
        prop_assert_eq!(parsed.etilde, record.etilde);
        prop_assert_eq!(parsed.speed, record.speed);
        prop_assert_eq!(parsed.dist_v, record.dist_v);
        prop_assert_eq!(parsed.gradnorm_vp, record.gradnorm_vp);
        prop_assert_eq!(parsed.velocity_integrals, record.velocity_integrals);
    }
}
