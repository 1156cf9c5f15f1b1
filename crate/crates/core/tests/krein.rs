use contact_limit_core::krein::*;
use contact_limit_core::linalg::Matrix;
use contact_limit_core::potentials::{coupling_for_alpha, Potential, Shape};
use contact_limit_core::quadrature::QuadratureGrid;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

fn instance(n: usize, m: usize, entries: &[f64], signs: &[bool], g: f64) -> (DiscreteHamiltonian, FactoredCoupling) {
    let x = Matrix::from_fn(n, n, |i, j| entries[i * n + j]);
    let h0 = x.transpose().matmul(&x).unwrap().scale(1.0 / n as f64);
    let h0 = Matrix::from_fn(n, n, |i, j| 0.5 * (h0[(i, j)] + h0[(j, i)]));
    let a = Matrix::from_fn(m, n, |i, j| entries[(n * n + i * n + j) % entries.len()]);
    let j = signs[..m].iter().map(|&s| if s { 1.0 } else { -1.0 }).collect();
    (DiscreteHamiltonian::new(h0).unwrap(), FactoredCoupling::new(a, j, g).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn krein_formula_matches_dense_inverse(
        n in 2usize..14,
        m in 1usize..5,
        entries in prop::collection::vec(-1.0f64..1.0, 400),
        signs in prop::collection::vec(any::<bool>(), 5),
        g in 0.05f64..1.0,
        z in 0.5f64..10.0,
    ) {
        let m = m.min(n);
        let (h0, c) = instance(n, m, &entries, &signs, g);
        let h = to_na(&h0.perturbed(&c).unwrap()) + DMatrix::identity(n, n) * z;
        let eig = h.clone().symmetric_eigen().eigenvalues;
        prop_assume!(eig.iter().all(|e| e.abs() > 1e-2));
        let oracle = h.try_inverse().unwrap();
        let report = krein_resolvent(&h0, &c, z).unwrap();
        prop_assert!(report.asymmetry < 1e-10);
        let krein = to_na(&report.table);
        let err = (&krein - &oracle).norm() / oracle.norm();
        prop_assert!(err < 1e-10, "relative error {err}");
        prop_assert!(inverse_identity_error(&h0, &c, z).unwrap() < 1e-10);
    }

    #[test]
    fn coupling_determinant_is_a_ratio_of_determinants(
        n in 2usize..10,
        m in 1usize..4,
        entries in prop::collection::vec(-1.0f64..1.0, 200),
        signs in prop::collection::vec(any::<bool>(), 4),
        g in 0.05f64..1.0,
        z in 0.5f64..5.0,
    ) {
        let m = m.min(n);
        let (h0, c) = instance(n, m, &entries, &signs, g);
        let id = DMatrix::identity(n, n) * z;
        let num = (to_na(&h0.perturbed(&c).unwrap()) + &id).determinant();
        let den = (to_na(h0.matrix()) + &id).determinant();
        let d = coupling_determinant(&h0, &c, z).unwrap();
        prop_assert!((d - num / den).abs() <= 1e-9 * (1.0 + d.abs()));
    }
}

#[test]
fn bisection_locates_a_bound_state() {
    let h0 = DiscreteHamiltonian::laplacian(8.0, 200, 2.0).unwrap();
    let n = h0.dim();
    let mid = n / 2;
    let a = Matrix::from_fn(1, n, |_, j| if j == mid { 1.0 } else { 0.0 });
    let c = FactoredCoupling::new(a, vec![1.0], 20.0).unwrap();
    let h = to_na(&h0.perturbed(&c).unwrap());
    let lowest = h.symmetric_eigen().eigenvalues.min();
    assert!(lowest < 0.0);
    let z = locate_singular_parameter(&h0, &c, 1e-3, 2.0 * lowest.abs(), 1e-12).unwrap();
    assert!((z + lowest).abs() < 1e-8 * lowest.abs(), "{z} vs {}", -lowest);
}

#[test]
fn selftest_is_reproducible_from_the_seed() {
    let opts = SelfTestOptions { trials: 12, max_dim: 20, seed: 99 };
    let a = krein_selftest(opts).unwrap();
    let b = krein_selftest(opts).unwrap();
    assert_eq!(a.max_krein_error(), b.max_krein_error());
    assert!(a.max_krein_error() < 1e-10 && a.max_identity_error() < 1e-10);
}

#[test]
fn contact_resolvent_on_the_line() {
    for (alpha, z) in [(1.0, 2.0), (-1.0, 0.5), (3.0, 4.0)] {
        let r = DeltaLimitN2::new(alpha, z).unwrap();
        let k = (0.5 * z).sqrt();
        let free = |x: f64, y: f64| 0.5 * (-k * f64::abs(x - y)).exp() / (2.0 * k);
        let phi = free(0.0, 0.0);
        assert!((r.phi() - phi).abs() < 1e-15);
        for (x, y) in [(0.0, 0.0), (0.3, -1.2), (2.0, 2.5)] {
            let expect = free(x, y) + alpha / (1.0 - alpha * phi) * free(x, 0.0) * free(0.0, y);
            assert!((r.kernel(x, y) - expect).abs() < 1e-14);
            assert!((r.kernel(x, y) - r.kernel(y, x)).abs() < 1e-15);
        }
    }
    assert!(matches!(
        DeltaLimitN2::new(1.0, 0.125),
        Err(contact_limit_core::Error::Pole { .. })
    ));
}

#[test]
fn limit_resolvent_depends_only_on_the_integral() {
    let grid = QuadratureGrid::gauss_legendre(-4.0, 4.0, 60).unwrap();
    let boxv = Potential::unit_box();
    let expv = Potential::new(Shape::Exponential { amplitude: 0.5, rate: 1.0 }).unwrap();
    let g1 = coupling_for_alpha(&boxv, 1.0).unwrap();
    let g2 = coupling_for_alpha(&expv, 1.0).unwrap();
    assert!(vfree_factor_check(&boxv, g1, &expv, g2, 4.0, &grid).unwrap() < 1e-8);

    let cos = Potential::new(Shape::CosineBox { amplitude: 1.0, half_width: 1.0 }).unwrap();
    let limit = factored_limit_resolvent(&cos, 1.0, 4.0, &auxiliary_grid(&cos, 12).unwrap(), &grid).unwrap();
    let free = delta_limit_resolvent_n2(0.0, 4.0, &grid).unwrap();
    let diff = limit.table.sub(&free.table).unwrap().frobenius_norm() / free.table.frobenius_norm();
    assert!(diff < 1e-8, "{diff}");
    for r in [&limit, &free, &delta_limit_resolvent_n2(1.0, 4.0, &grid).unwrap()] {
        assert!(r.asymmetry < 1e-10, "{:?} asymmetry {}", r.method, r.asymmetry);
    }
}

#[test]
fn pair_resolvent_approaches_the_contact_limit() {
    let v = Potential::unit_box();
    let mut last = f64::INFINITY;
    for m in [3, 5, 7] {
        let eps = 0.5f64.powi(m);
        let ve = v.scale(eps).unwrap();
        let grid = PairGrid::for_potential(&ve, 10.0, 0.004).unwrap();
        let h = build_pair_hamiltonian(&ve, 1.0, &grid).unwrap();
        let d = pair_resolvent_distance(&h, &DeltaLimitN2::walled(1.0, 4.0, 10.0).unwrap()).unwrap();
        assert!(d < last, "ε = {eps}: {d} ≥ {last}");
        last = d;
    }
    assert!(last < 1e-4);
}

#[test]
fn resolvent_difference_propagates_between_spectral_parameters() {
    let ve = Potential::unit_box().scale(1.0 / 16.0).unwrap();
    let grid = PairGrid::for_potential(&ve, 10.0, 0.004).unwrap();
    let h = build_pair_hamiltonian(&ve, 1.0, &grid).unwrap();
    for (z, z0) in [(1.0, 4.0), (6.0, 4.0)] {
        let (lhs, rhs) = resolvent_diff_propagation(&h, 1.0, z, z0).unwrap();
        assert!(lhs <= rhs, "z={z}: {lhs} > {rhs}");
    }
}

#[test]
fn even_sector_ground_state_matches_dense_spectrum() {
    let ve = Potential::unit_box().scale(0.25).unwrap();
    let grid = PairGrid::uniform(6.0, 240).unwrap();
    let h = build_pair_hamiltonian(&ve, 1.0, &grid).unwrap();
    let dense = to_na(&h.full().unwrap().to_dense());
    let lowest = dense.symmetric_eigen().eigenvalues.min();
    assert!((h.ground_energy_even().unwrap() - lowest).abs() < 1e-10);
}

#[test]
fn box_ground_state_matches_the_transcendental_equation() {
    // Even bound state of −2ψ'' − 4·1[|r| < 1/8]ψ, from k·tan(k/8) = κ.
    let exact = -0.12002892490558525;
    let ve = Potential::unit_box().scale(0.25).unwrap();
    let grid = PairGrid::uniform(40.0, 16000).unwrap();
    let e = build_pair_hamiltonian(&ve, 1.0, &grid).unwrap().ground_energy_even().unwrap();
    assert!((e - exact).abs() < 1e-4, "{e} vs {exact}");
}
