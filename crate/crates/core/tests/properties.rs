//! Invariants of the reduction and of the integration oracle over random inputs.

use landau_kam::constants::c_omega;
use landau_kam::kam::{kam_reduce, kam_reduce_nondegenerate, make_schedule_scaled, DEFAULT_KAPPA_SCALE};
use landau_kam::oracle::{conjugation_residual, fundamental_matrix, integrate_flow_sampled, FlowSpec};
use landau_kam::quadham::{build_landau, build_symmetric, Modulation, PhasePoint};
use landau_kam::trigpoly::TrigPoly;
use landau_kam::Gauge;
use proptest::prelude::*;

fn forcing() -> TrigPoly<f64> {
    TrigPoly::sin(&[1], 1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    // ω kept away from 2 and 4, where k·ω meets the Landau level spacing
    #[test]
    fn reduction_conjugates_and_matches_slow_constant(
        w in 2.3f64..3.7,
        eps in 1e-3f64..1e-2,
        symmetric in any::<bool>(),
    ) {
        let sched = make_schedule_scaled::<f64>(eps, 1.0, 12, DEFAULT_KAPPA_SCALE).unwrap();
        let (sys, r) = if symmetric {
            let sys = build_symmetric(1.0, eps, &forcing()).unwrap();
            let r = kam_reduce_nondegenerate(&sys, &[w], &sched).unwrap();
            (sys, r)
        } else {
            let sys = build_landau(1.0, eps, &forcing()).unwrap();
            let r = kam_reduce(&sys, &[w], &sched).unwrap();
            (sys, r)
        };
        prop_assert!(r.status.is_converged(), "{:?}", r.status);
        prop_assert!(conjugation_residual(&sys, &r, 32).unwrap() < 1e-8);
        let c = c_omega(&forcing(), &[w], 1.0).unwrap();
        // the slow rate: c in the Landau gauge, ν₂ in the symmetric one
        let slow = if symmetric { r.normal_form.nu2() } else { r.normal_form.c };
        let ratio = slow / (eps * eps);
        prop_assert!((ratio.abs() / c.abs() - 1.0).abs() < 0.05, "{} vs {}", ratio, c);
    }

    #[test]
    fn flow_is_linear_and_follows_its_fundamental_matrix(
        w in 0.5f64..5.0,
        eps in 0.0f64..0.2,
        x in prop::array::uniform4(-1.0f64..1.0),
        y in prop::array::uniform4(-1.0f64..1.0),
    ) {
        let m = Modulation::new(1.0, eps, forcing(), vec![w]).unwrap();
        let spec = FlowSpec::new(Gauge::Landau, m);
        let (t, dt) = (5.0, spec.default_dt());
        let end = |v: [f64; 4]| {
            let p = PhasePoint::Cartesian { x: [v[0], v[1]], p: [v[2], v[3]] };
            *integrate_flow_sampled(&spec, p, t, dt, 2).unwrap().states.last().unwrap()
        };
        let sum = std::array::from_fn(|i| 2.0 * x[i] - 3.0 * y[i]);
        let (ex, ey, es) = (end(x), end(y), end(sum));
        let phi = fundamental_matrix(&spec, 0.0, t, dt).unwrap();
        prop_assert!(phi.symplectic_defect < 1e-9);
        prop_assert!((phi.det - 1.0).abs() < 1e-9);
        for i in 0..4 {
            prop_assert!((es[i] - (2.0 * ex[i] - 3.0 * ey[i])).abs() < 1e-10);
            let mx: f64 = (0..4).map(|j| phi.matrix[i][j] * x[j]).sum();
            prop_assert!((mx - ex[i]).abs() < 1e-10);
        }
    }
}
