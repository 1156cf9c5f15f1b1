use contact_limit_core::experiments::*;
use contact_limit_core::kernels::KernelClass;
use contact_limit_core::potentials::{CouplingSchedule, Potential};
use proptest::prelude::*;

proptest! {
    #[test]
    fn power_law_slope_is_recovered(c in 1e-3f64..10.0, s in 0.1f64..2.0, n in 4usize..12) {
        let samples: Vec<(f64, f64)> = (1..=n).map(|k| {
            let e = 0.5f64.powi(k as i32);
            (e, c * e.powf(s))
        }).collect();
        let fit = fit_rate(&samples).unwrap();
        prop_assert!((fit.slope - s).abs() < 1e-9);
        prop_assert!((fit.r_squared - 1.0).abs() < 1e-9);
        prop_assert!(fit.converging);
    }

    #[test]
    fn geometric_sequence_is_decreasing(a in 0i32..5, len in 1i32..10) {
        let e = geometric_eps(a, a + len);
        prop_assert_eq!(e.len() as i32, len + 1);
        prop_assert!(e.windows(2).all(|w| w[1] == 0.5 * w[0]));
    }
}

#[test]
fn floor_level_errors_are_refused() {
    let samples: Vec<(f64, f64)> = (1..8).map(|k| (0.5f64.powi(k), 1e-15)).collect();
    assert!(fit_rate(&samples).is_err());
}

#[test]
fn t_sweep_converges_at_first_order() {
    let mut plan = SweepPlan::new(SweepTarget::Kernel(KernelClass::T), Potential::unit_box());
    plan.eps = geometric_eps(2, 7);
    let reports = kernel_convergence_sweep(&plan).unwrap();
    let r = &reports[0];
    assert!(r.monotone);
    assert!(r.fit.slope > 0.9 && r.fit.slope < 1.1, "{}", r.fit.slope);
    assert_eq!(r.fit.meets_theory(0.15), Some(true));
}

#[test]
fn perturbed_schedule_caps_the_resolvent_rate() {
    let v = Potential::unit_box();
    let sched = CouplingSchedule::perturbed(1.0, 0.5).unwrap();
    let t = theory_rate(SweepTarget::ResolventN2, &v, &sched).unwrap();
    assert_eq!(t, 0.5);
    let t = theory_rate(SweepTarget::ResolventN2, &v, &CouplingSchedule::constant(1.0)).unwrap();
    assert_eq!(t, OPEN_INTERVAL_RATE);
}

#[test]
fn resolvent_sweep_rows_carry_grid_metadata() {
    let mut plan = SweepPlan::new(SweepTarget::ResolventN2, Potential::unit_box());
    plan.z = vec![4.0];
    plan.eps = geometric_eps(3, 6);
    let reports = resolvent_convergence_sweep_n2(&plan).unwrap();
    let r = &reports[0];
    assert_eq!(r.rows.len(), 4);
    assert!(r.rows.iter().all(|row| row.grid_l == 10.0 && row.grid_n > 0 && row.disc_err_est < row.error()));
    assert!(r.monotone);
}
