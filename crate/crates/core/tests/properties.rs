use bosonic_core::analytic::{full_transform, rwa_transform, CouplingWeights, SystemConfig};
use bosonic_core::pulsedesign::{amplitude_error, ep_pulse, qst_pulse, speed_limit};
use proptest::prelude::*;

fn config(weights: Vec<f64>, gp: f64) -> SystemConfig<f64> {
    SystemConfig::with_effective_coupling(1.0, gp, CouplingWeights::new(weights).unwrap()).unwrap()
}

proptest! {
    #[test]
    fn transforms_stay_symplectic(
        weights in prop::collection::vec(0.1f64..3.0, 1..6),
        gp in 0.01f64..0.49,
        t in 0.0f64..60.0,
    ) {
        let r = full_transform(&config(weights, gp), t).unwrap().symplectic_residual();
        prop_assert!(r.max_abs() < 1e-10, "{r:?}");
    }

    #[test]
    fn unbounded_branch_is_symplectic_relative_to_its_growth(
        weights in prop::collection::vec(0.1f64..3.0, 1..4),
        gp in 0.51f64..1.5,
        t in 0.0f64..15.0,
    ) {
        let r = full_transform(&config(weights, gp), t).unwrap().symplectic_residual();
        prop_assert!(r.max_relative() < 1e-10, "{r:?}");
    }

    #[test]
    fn optimized_pulses_satisfy_their_constraints(m in 2u32..400) {
        for p in [qst_pulse::<f64>(m).unwrap(), ep_pulse::<f64>(m).unwrap()] {
            let (split, top) = p.constraint_residuals().unwrap();
            let scale = m as f64;
            prop_assert!(split.abs() < 1e-12 * scale && top.abs() < 1e-12 * scale, "m={m} {split} {top}");
        }
    }

    #[test]
    fn optimized_qst_pulses_decouple_creation_and_annihilation(m in 3u32..120) {
        let p = qst_pulse::<f64>(m).unwrap();
        let tr = full_transform(&p.config(1.0, CouplingWeights::uniform(2).unwrap()).unwrap(), p.tau).unwrap();
        prop_assert!(tr.is_number_conserving(1e-10), "m={m}");
        // Sender keeps exactly G(m) of its amplitude.
        prop_assert!((tr.u_a[[0, 0]].norm() - amplitude_error(m as f64)).abs() < 1e-10);
    }

    #[test]
    fn speed_limit_picks_the_smallest_admissible_index(e_tol in 1e-6f64..0.2, mean_n in 0.2f64..5.0) {
        let r = speed_limit(e_tol, mean_n).unwrap();
        let target = (e_tol / mean_n).sqrt();
        prop_assert!(amplitude_error(r.m_chosen as f64) < target);
        if r.m_chosen > 3 {
            prop_assert!(amplitude_error((r.m_chosen - 1) as f64) >= target * (1.0 - 1e-12));
        }
        prop_assert!(r.m_chosen as f64 >= r.m_th);
    }

    #[test]
    fn weak_coupling_approaches_the_rotating_wave_solution(gp in 1e-4f64..1e-3, t in 0.0f64..20.0) {
        let cfg = config(vec![1.0, 1.0], gp);
        let (full, rwa) = (full_transform(&cfg, t).unwrap(), rwa_transform(&cfg, t).unwrap());
        let diff = full.u_a.iter().zip(rwa.u_a.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        // Counter-rotating corrections are first order in g'/ω.
        prop_assert!(diff < 5.0 * gp, "{diff}");
    }
}
