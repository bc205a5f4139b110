use proptest::prelude::*;
use vlasov1d_core::io::{read_measure_csv, read_trace_csv, write_measure_csv, write_trace_csv};
use vlasov1d_core::particles::forces;
use vlasov1d_core::vlasov_grid::field;
use vlasov1d_core::{
    w1_assignment_oracle, w1_exact, DensityProfile, DensityTrace, DiscreteMeasure, KernelKind,
    ParticleState, PhasePoint,
};

fn atoms(max: usize) -> impl Strategy<Value = Vec<PhasePoint>> {
    prop::collection::vec((-0.5f64..0.5, -2.0f64..2.0), 1..=max).prop_map(|v| {
        v.into_iter()
            .map(|(x, w)| PhasePoint::from_raw(x, w).unwrap())
            .collect()
    })
}

fn measure(max: usize) -> impl Strategy<Value = DiscreteMeasure> {
    atoms(max).prop_flat_map(|a| {
        let n = a.len();
        (Just(a), prop::collection::vec(0.01f64..1.0, n))
            .prop_map(|(a, w)| DiscreteMeasure::normalized(a, w).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn w1_metric_axioms(a in measure(32), b in measure(32), c in measure(32)) {
        let d = |x: &DiscreteMeasure, y: &DiscreteMeasure| w1_exact(x, y).unwrap().0;
        prop_assert!(d(&a, &a).abs() <= 1e-10);
        prop_assert!((d(&a, &b) - d(&b, &a)).abs() <= 1e-10);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-9);
    }

    #[test]
    fn w1_is_translation_covariant_in_v(a in measure(24), b in measure(24), dv in -3.0f64..3.0) {
        let base = w1_exact(&a, &b).unwrap().0;
        let moved = w1_exact(&a.shift_velocities(dv), &b.shift_velocities(dv)).unwrap().0;
        prop_assert!((base - moved).abs() <= 1e-10);
    }

    #[test]
    fn plans_are_feasible(a in measure(32), b in measure(32)) {
        let (w, plan) = w1_exact(&a, &b).unwrap();
        let (rows, cols) = plan.marginals(a.len(), b.len());
        for (r, x) in rows.iter().zip(a.weights()) {
            prop_assert!((r - x).abs() <= 1e-9);
        }
        for (c, y) in cols.iter().zip(b.weights()) {
            prop_assert!((c - y).abs() <= 1e-9);
        }
        prop_assert!(plan.entries.iter().all(|e| e.mass > 0.0));
        prop_assert!(plan.entries.len() < a.len() + b.len());
        let total: f64 = plan.cost_contributions(&a, &b).iter().map(|r| r.3).sum();
        prop_assert!((total - w).abs() <= 1e-12);
    }

    #[test]
    fn simplex_matches_assignment(a in atoms(40), seed in 0usize..1000) {
        let n = a.len();
        let b: Vec<PhasePoint> = (0..n)
            .map(|i| {
                let p = a[(i * 7 + seed) % n];
                PhasePoint::from_raw(p.x.value() * 0.5 + 0.1, -p.v + 0.3).unwrap()
            })
            .collect();
        let (mu, nu) = (DiscreteMeasure::uniform(a).unwrap(), DiscreteMeasure::uniform(b).unwrap());
        let exact = w1_exact(&mu, &nu).unwrap().0;
        prop_assert!((exact - w1_assignment_oracle(&mu, &nu).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn measure_csv_round_trips(a in measure(50)) {
        let dir = tempfile_dir();
        let p = dir.join(format!("m{}.csv", a.len()));
        write_measure_csv(&p, &a).unwrap();
        prop_assert_eq!(read_measure_csv(&p).unwrap(), a);
    }

    #[test]
    fn trace_csv_round_trips(r in prop::collection::vec(0.0f64..10.0, 1..40), dt in 1e-4f64..0.1) {
        let times: Vec<f64> = (0..r.len()).map(|k| k as f64 * dt).collect();
        let trace = DensityTrace::new(times, r).unwrap();
        let p = tempfile_dir().join(format!("t{}.csv", trace.len()));
        write_trace_csv(&p, &trace).unwrap();
        prop_assert_eq!(read_trace_csv(&p).unwrap(), trace);
    }

    #[test]
    fn forces_sum_to_zero(xs in prop::collection::vec(-0.5f64..0.5, 2..300), eps in 0.01f64..0.4) {
        let vs = vec![0.0; xs.len()];
        let s = ParticleState::from_raw(&xs, &vs).unwrap();
        for kind in [KernelKind::Exact, KernelKind::Mollified { epsilon: eps }] {
            let total: f64 = forces(&s, kind).iter().sum();
            prop_assert!(total.abs() <= 1e-14 * xs.len() as f64, "{kind}: {total}");
        }
    }

    #[test]
    fn field_has_mean_zero(raw in prop::collection::vec(0.0f64..3.0, 4..200)) {
        let n = raw.len() as f64;
        let s: f64 = raw.iter().sum::<f64>() / n;
        prop_assume!(s > 1e-3);
        let rho: Vec<f64> = raw.iter().map(|r| r / s).collect();
        let sup = rho.iter().copied().fold(0.0, f64::max);
        let e = field(&DensityProfile { rho, sup_norm: sup }).unwrap().e;
        prop_assert!((e.iter().sum::<f64>() / n).abs() <= 1e-12);
    }
}

fn tempfile_dir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("vlasov1d-props-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}
