use contact_limit_core::experiments::{form_convergence, geometric_eps};
use contact_limit_core::forms::*;
use contact_limit_core::potentials::{Potential, Shape};
use proptest::prelude::*;

fn gaussian(dim: usize) -> WaveFunction {
    let (l, n) = if dim == 2 { FAMILY_GRID_2D } else { FAMILY_GRID_3D };
    WaveFunction::sample(Profile::gaussian(dim).unwrap(), l, n).unwrap()
}

#[test]
fn gaussian_box_interaction_has_closed_form() {
    let psi = gaussian(2);
    for eps in [1.0, 0.25, 1.0 / 32.0] {
        let v = Potential::unit_box().scale(eps).unwrap();
        let exact = libm::erf(eps / (2.0 * std::f64::consts::SQRT_2)) / eps;
        let got = pair_interaction(&psi, &v, 0, 1).unwrap();
        assert!((got - exact).abs() < 1e-10, "ε={eps}: {got} vs {exact}");
    }
}

#[test]
fn three_particle_gaussian_traces() {
    let psi = gaussian(3);
    let expect = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        assert!((trace_norm_sq(&psi, i, j).unwrap() - expect).abs() < 1e-9);
    }
    assert!((psi.grad_norm_sq() - 1.5).abs() < 1e-9);
    let q = q_form(&psi, 1.0, 0.0).unwrap();
    assert!((q - (1.5 - 3.0 * expect)).abs() < 1e-8);
}

#[test]
fn shift_makes_both_forms_non_negative() {
    let v = Potential::unit_box();
    let c = sufficient_shift(&v, 1.0, 3);
    for psi in test_family(5).unwrap() {
        assert!(q_form(&psi, 1.0, c).unwrap() >= 0.0);
        for eps in [0.5, 0.05] {
            let ve = v.scale(eps).unwrap();
            assert!(q_eps_form(&psi, &ve, 1.0, c).unwrap() >= 0.0);
        }
    }
}

#[test]
fn heavy_tail_convergence_rate() {
    let v = Potential::new(Shape::HeavyTail { amplitude: 1.0, power: 2.2 }).unwrap();
    let psi = gaussian(2);
    let fit = form_convergence(&psi, &v, 1.0, &geometric_eps(1, 10)).unwrap();
    assert_eq!(fit.theory, Some(0.5));
    assert!(fit.slope >= 0.45, "slope {}", fit.slope);
}

#[test]
fn grid_refinement_leaves_the_form_unchanged() {
    for psi in test_family(11).unwrap().into_iter().take(4) {
        assert!(q_form_refinement_change(&psi, 1.0, 0.0).unwrap() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn family_satisfies_form_bounds(seed in 0u64..1000, mu in 0.1f64..2.0) {
        let v = Potential::new(Shape::Exponential { amplitude: 1.0, rate: 2.0 }).unwrap();
        for psi in test_family(seed).unwrap().into_iter().filter(|p| p.particles() == 2) {
            let r = check_form_bounds(&psi, &v, mu).unwrap();
            prop_assert!(r.all_hold(1e-9));
        }
    }

    #[test]
    fn q_eps_is_sandwiched(seed in 0u64..1000, eps in 0.01f64..1.0, a in 0.1f64..0.9) {
        let v = Potential::unit_box();
        let c = sufficient_shift(&v, 1.0, 2);
        let b = sandwich_constant(&v, 1.0, 2, a, c);
        let ve = v.scale(eps).unwrap();
        for psi in test_family(seed).unwrap().into_iter().filter(|p| p.particles() == 2).take(3) {
            let q = q_eps_form(&psi, &ve, 1.0, c).unwrap();
            let (lo, hi) = sandwich_sides(&psi, a, b);
            prop_assert!(lo <= q + 1e-12 && q <= hi + 1e-12);
        }
    }
}
