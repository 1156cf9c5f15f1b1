use contact_limit_core::experiments::kernel_difference;
use contact_limit_core::kernels::*;
use contact_limit_core::linalg::singular_values;
use contact_limit_core::potentials::{Potential, Shape};
use contact_limit_core::quadrature::QuadratureGrid;
use proptest::prelude::*;

/// `∫ G_λ(x) G_λ(x + δ) dx` for the one-dimensional kernel.
fn autocorrelation(lambda: f64, delta: f64) -> f64 {
    let k = lambda.sqrt();
    (delta.abs() + 1.0 / k) * (-k * delta.abs()).exp() / (4.0 * lambda)
}

/// `‖T_ε − T_0‖_HS` for the unit box, by Gauss–Legendre in `r`.
fn t_difference_box(eps: f64, z: f64) -> f64 {
    let lambda = 0.5 * z;
    let g = QuadratureGrid::gauss_legendre(-0.5, 0.5, 40).unwrap();
    let c0 = autocorrelation(lambda, 0.0);
    let acc = g.integrate(|r| 2.0 * (c0 - autocorrelation(lambda, eps * r)));
    (0.25 * acc).sqrt()
}

#[test]
fn t_difference_matches_autocorrelation_formula() {
    let v = Potential::unit_box();
    let spec = GridSpec { n_support: 256, n_free: 4096, half_width: 10.0 };
    for z in [1.0, 2.0, 4.0] {
        let k0 = Kernel::new(KernelClass::T, 0.0, z, 0.0, &v).unwrap();
        for eps in [0.5, 0.125, 1.0 / 64.0] {
            let (hs, _, _) = kernel_difference(&k0, eps, &spec, false).unwrap();
            let exact = t_difference_box(eps, z);
            assert!((hs - exact).abs() <= 2e-3 * exact, "z={z} ε={eps}: {hs} vs {exact}");
        }
    }
}

#[test]
fn phi12_at_zero_eps_is_rank_one_with_known_norm() {
    let v = Potential::unit_box();
    for z in [1.0, 4.0] {
        let k = Kernel::new(KernelClass::Phi12, 0.0, z, 0.0, &v).unwrap();
        let (t, s) = grids_for(KernelClass::Phi12, &v, &GridSpec::one_dimensional()).unwrap();
        let meta = KernelMeta { class: KernelClass::Phi12, eps: 0.0, z, q: 0.0, coarse: false };
        let op = discretize(&k, meta, &t, &s, DEFAULT_ENTRY_CAP).unwrap();
        let exact = norm_bound(KernelClass::Phi12, &v, z);
        let lanczos = op.op_norm().unwrap();
        assert!((lanczos - exact).abs() <= 1e-10 * exact, "{lanczos} vs {exact}");
    }
}

#[test]
fn lanczos_agrees_with_dense_singular_values() {
    let v = Potential::new(Shape::Exponential { amplitude: 0.5, rate: 1.0 }).unwrap();
    let spec = GridSpec { n_support: 40, n_free: 60, half_width: 6.0 };
    let k = Kernel::new(KernelClass::T, 0.3, 2.0, 0.0, &v).unwrap();
    let (t, s) = grids_for(KernelClass::T, &v, &spec).unwrap();
    let meta = KernelMeta { class: KernelClass::T, eps: 0.3, z: 2.0, q: 0.0, coarse: false };
    let op = discretize(&k, meta, &t, &s, DEFAULT_ENTRY_CAP).unwrap();
    let sv = singular_values(&op.weighted_matrix()).unwrap();
    let top = sv.iter().cloned().fold(0.0, f64::max);
    assert!((op.op_norm().unwrap() - top).abs() <= 1e-10 * top);
    assert!(op.op_norm().unwrap() <= op.hs_norm() * (1.0 + 1e-12));
}

#[test]
fn schur_tables_respect_their_bound() {
    for z in [1.0, 4.0] {
        let f = schur_table(KernelClass::SchurFFiber, z, 6.0, 120, DEFAULT_ENTRY_CAP).unwrap();
        assert!(f.op_norm().unwrap() <= schur_bound_f(z) * 1.05);
        let b = schur_table(KernelClass::SchurBFiber, z, 5.0, 24, DEFAULT_ENTRY_CAP).unwrap();
        assert!(b.op_norm().unwrap() <= schur_bound_b(z) * 1.05);
    }
}

#[test]
fn adjoint_has_the_same_norm() {
    let v = Potential::unit_box();
    let k = Kernel::new(KernelClass::Phi12, 0.25, 2.0, 0.0, &v).unwrap();
    let (t, s) = grids_for(KernelClass::Phi12, &v, &GridSpec { n_support: 32, n_free: 32, half_width: 4.0 }).unwrap();
    let meta = KernelMeta { class: KernelClass::Phi12, eps: 0.25, z: 2.0, q: 0.0, coarse: false };
    let op = discretize(&k, meta, &t, &s, DEFAULT_ENTRY_CAP).unwrap();
    let a = op.op_norm().unwrap();
    let b = op.adjoint().op_norm().unwrap();
    assert!((a - b).abs() <= 1e-10 * a);
}

#[test]
fn cutoff_changes_respect_their_bound() {
    let v = Potential::new(Shape::Exponential { amplitude: 1.0, rate: 1.0 }).unwrap();
    let cases = [
        (KernelClass::T, GridSpec { n_support: 96, n_free: 128, half_width: 8.0 }),
        (KernelClass::Phi12, GridSpec { n_support: 96, n_free: 96, half_width: 8.0 }),
        (KernelClass::Phi1jFiber, GridSpec { n_support: 16, n_free: 12, half_width: 4.0 }),
    ];
    for (class, spec) in cases {
        let (t, s) = grids_for(class, &v, &spec).unwrap();
        for k in [1.0, 2.5] {
            let vk = v.cutoff(k).unwrap();
            let tail = v.tail_l1(k);
            for eps in [0.0, 0.1, 1.0] {
                let z = 2.0;
                let meta = KernelMeta { class, eps, z, q: 0.0, coarse: false };
                let full = discretize(&Kernel::new(class, eps, z, 0.0, &v).unwrap(), meta, &t, &s, DEFAULT_ENTRY_CAP).unwrap();
                let cut = discretize(&Kernel::new(class, eps, z, 0.0, &vk).unwrap(), meta, &t, &s, DEFAULT_ENTRY_CAP).unwrap();
                let mut diff = full.clone();
                diff.values = full.values.sub(&cut.values).unwrap();
                let d = diff.op_norm().unwrap();
                let bound = cutoff_bound(class, &v, tail, z);
                assert!(d <= 1.05 * bound, "{} k={k} ε={eps}: {d} vs {bound}", class.name());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn phi12_norm_is_bounded(eps in 0.0f64..1.0, z in 0.5f64..6.0, rate in 0.5f64..3.0) {
        let v = Potential::new(Shape::Exponential { amplitude: 1.0, rate }).unwrap();
        let spec = GridSpec { n_support: 48, n_free: 48, half_width: 8.0 };
        let k = Kernel::new(KernelClass::Phi12, eps, z, 0.0, &v).unwrap();
        let (t, s) = grids_for(KernelClass::Phi12, &v, &spec).unwrap();
        let meta = KernelMeta { class: KernelClass::Phi12, eps, z, q: 0.0, coarse: false };
        let op = discretize(&k, meta, &t, &s, DEFAULT_ENTRY_CAP).unwrap();
        prop_assert!(op.op_norm().unwrap() <= norm_bound(KernelClass::Phi12, &v, z) * 1.05);
    }

    #[test]
    fn t_difference_grows_with_eps(z in 0.5f64..6.0, e in 0.01f64..0.5) {
        let v = Potential::unit_box();
        let spec = GridSpec { n_support: 64, n_free: 128, half_width: 8.0 };
        let k0 = Kernel::new(KernelClass::T, 0.0, z, 0.0, &v).unwrap();
        let (a, _, _) = kernel_difference(&k0, e, &spec, false).unwrap();
        let (b, _, _) = kernel_difference(&k0, 2.0 * e, &spec, false).unwrap();
        prop_assert!(a < b);
    }

    #[test]
    fn hs_norm_decreases_in_q(idx in 0usize..3, eps in 0.0f64..1.0, z in 0.5f64..4.0, q in 0.0f64..4.0, dq in 0.1f64..3.0) {
        let (class, spec) = [
            (KernelClass::T, GridSpec { n_support: 32, n_free: 64, half_width: 8.0 }),
            (KernelClass::Phi12, GridSpec { n_support: 32, n_free: 32, half_width: 8.0 }),
            (KernelClass::Phi1jFiber, GridSpec { n_support: 8, n_free: 8, half_width: 3.0 }),
        ][idx];
        let v = Potential::unit_box();
        let (t, s) = grids_for(class, &v, &spec).unwrap();
        let hs = |q: f64| {
            let meta = KernelMeta { class, eps, z, q, coarse: false };
            discretize(&Kernel::new(class, eps, z, q, &v).unwrap(), meta, &t, &s, DEFAULT_ENTRY_CAP).unwrap().hs_norm()
        };
        let (a, b) = (hs(q), hs(q + dq));
        prop_assert!(b <= a, "{}: HS {a} at Q={q}, {b} at Q={}", class.name(), q + dq);
    }
}
