use contact_limit_core::greens::*;
use contact_limit_core::quadrature::QuadratureGrid;
use proptest::prelude::*;

// K0 and K1 values from an external Bessel implementation.
const BESSEL: [(f64, f64, f64, f64); 4] = [
    (1.0, 0.3, 0.21843380283182703, 0.2580306083595424),
    (2.0, 1.0, 0.038060664938979485, 0.011255327609260398),
    (4.0, 2.5, 0.0005874565453011388, 8.196100433378542e-05),
    (0.5, 0.05, 0.5506173271342905, 10.107047874308329),
];

#[test]
fn even_dimensions_match_bessel_values() {
    for (z, r, g2, g4) in BESSEL {
        let a = green_radial(2, z, r).unwrap();
        let b = green_radial(4, z, r).unwrap();
        assert!((a - g2).abs() <= 1e-9 * g2, "d=2 z={z} r={r}: {a} vs {g2}");
        assert!((b - g4).abs() <= 1e-9 * g4, "d=4 z={z} r={r}: {b} vs {g4}");
    }
}

#[test]
fn radial_tables_match_bessel_values() {
    for (z, r, g2, g4) in BESSEL {
        let t2 = RadialGreen::standard(2, z).unwrap();
        let t4 = RadialGreen::standard(4, z).unwrap();
        assert!((t2.eval(r).unwrap() - g2).abs() <= 1e-7 * g2);
        assert!((t4.eval(r).unwrap() - g4).abs() <= 1e-7 * g4);
    }
}

#[test]
fn one_dimensional_closed_form() {
    let z: f64 = 3.0;
    let p = GreenParams::new(1, z).unwrap();
    for x in [0.0, 0.4, -1.7, 6.0] {
        let expect = (-z.sqrt() * f64::abs(x)).exp() / (2.0 * z.sqrt());
        assert!((green_closed(&p, &[x]).unwrap() - expect).abs() < 1e-15);
    }
}

#[test]
fn three_dimensional_marginal_is_one_dimensional() {
    for z in [0.5, 1.0, 4.0] {
        let grid = marginal_grid(z).unwrap();
        for x in [0.1, 0.7, 2.0] {
            let m = green_partial_integral(3, 1, z, &[x], &grid).unwrap();
            let g1 = closed_radial(1, z, x).unwrap();
            assert!((m - g1).abs() <= 1e-6 * g1, "z={z} x={x}: {m} vs {g1}");
        }
    }
}

#[test]
fn singular_point_is_refused() {
    let p = GreenParams::new(3, 1.0).unwrap();
    assert!(matches!(
        green_closed(&p, &[0.0, 0.0, 0.0]),
        Err(contact_limit_core::Error::SingularPoint { .. })
    ));
    assert!(GreenParams::new(5, 1.0).is_err());
    assert!(GreenParams::new(2, -1.0).is_err());
}

#[test]
fn shift_bound_on_a_fine_grid() {
    let grid = QuadratureGrid::trapezoid(40.0, 16001).unwrap();
    for lambda in [0.25, 1.0, 4.0] {
        for x in [0.05, 0.5, 3.0] {
            let (lhs, rhs) = check_shift_l2(lambda, x, &grid).unwrap();
            assert!(lhs <= rhs, "λ={lambda} x={x}: {lhs} > {rhs}");
        }
    }
}

#[test]
fn fourier_slice_of_the_planar_kernel() {
    // ∫ cos(p x₂) G²_z(x₁, x₂) dx₂ = e^{−√(z+p²)|x₁|} / (2√(z+p²)).
    let (z, x1) = (1.5, 0.4f64);
    let breaks: Vec<f64> = (0..=60).map(|k| 40.0 * (k as f64 / 60.0).powi(2)).collect();
    let grid = QuadratureGrid::composite_gauss(&breaks, 16).unwrap();
    for p in [0.0, 0.7, 2.0] {
        let lhs: f64 = 2.0
            * grid
                .nodes
                .iter()
                .zip(&grid.weights)
                .map(|(x2, w)| w * (p * x2).cos() * green_radial(2, z, x1.hypot(*x2)).unwrap())
                .sum::<f64>();
        let k = (z + p * p).sqrt();
        let rhs = (-k * x1).exp() / (2.0 * k);
        assert!((lhs - rhs).abs() <= 1e-8 * rhs, "p={p}: {lhs} vs {rhs}");
    }
}

#[test]
fn holder_shift_ratio_stays_bounded() {
    let mut planar = Vec::new();
    for d in 2..=4u32 {
        let ratios: Vec<f64> = [1.0, 1e-1, 1e-2, 1e-3]
            .iter()
            .map(|&b| {
                let mut y = vec![0.0; (d - 1) as usize];
                y[0] = b;
                let h = check_holder_shift_l1(d, 1.0, &y, 0.5, 8).unwrap();
                assert!(h.lhs > 0.0 && h.lhs <= h.power_form * 10.0, "d={d} |y|={b}: {h:?}");
                h.lhs / h.log_form
            })
            .collect();
        assert!(ratios.iter().all(|r| r.is_finite()));
        assert!(ratios[3] <= 1.25 * ratios[2], "d={d}: ratio grows as |y| → 0: {ratios:?}");
        // Integrating out the directions orthogonal to y leaves the planar kernel.
        if d == 2 {
            planar = ratios;
        } else {
            for (a, b) in ratios.iter().zip(&planar) {
                assert!((a - b).abs() <= 1e-5 * b, "d={d}: {a} vs planar {b}");
            }
        }
    }
    assert_eq!(check_holder_shift_l1(3, 1.0, &[0.0, 0.0], 0.5, 8).unwrap().lhs, 0.0);
}

#[test]
fn holder_shift_is_stable_under_refinement() {
    let y = [0.3, 0.4];
    let a = check_holder_shift_l1(3, 1.0, &y, 0.5, 8).unwrap().lhs;
    let b = check_holder_shift_l1(3, 1.0, &y, 0.5, 12).unwrap().lhs;
    assert!((a - b).abs() <= 1e-5 * b, "{a} vs {b}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn quadrature_agrees_with_closed_form(z in 0.2f64..8.0, x in 0.05f64..4.0, y in -3.0f64..3.0, d3 in any::<bool>()) {
        let (d, point) = if d3 { (3, vec![x, y, 0.5 * x]) } else { (1, vec![x + y.abs()]) };
        let p = GreenParams::new(d, z).unwrap();
        let spec = QuadSpec::for_tolerance(z, 1e-12);
        let a = green_quad(&p, &point, &spec).unwrap();
        let b = green_closed(&p, &point).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * b.max(1e-300) + 1e-14, "{a} vs {b}");
    }

    #[test]
    fn radial_profile_is_positive_and_decreasing(d in 1u32..=4, z in 0.2f64..8.0, r in 0.01f64..5.0) {
        let a = green_radial(d, z, r).unwrap();
        let b = green_radial(d, z, r * 1.1).unwrap();
        prop_assert!(a > 0.0 && b < a);
    }

    #[test]
    fn larger_spectral_parameter_gives_smaller_kernel(d in 1u32..=4, z in 0.2f64..8.0, r in 0.05f64..5.0) {
        prop_assert!(green_radial(d, z * 1.5, r).unwrap() < green_radial(d, z, r).unwrap());
    }
}
