use std::f64::consts::PI;

use hillgap::model::{BoundaryCondition, DiracPotential, HillPotential, Potential};
use hillgap::monodromy::{discriminant, lowest_eigenvalues, solve_bc, Integration};
use hillgap::verify::check_shift_invariance;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn free_hill_roots() {
    let v: Potential = HillPotential::zero().into();
    let integ = Integration::double();
    for n in 1..=6 {
        let r = solve_bc(&v, BoundaryCondition::Dirichlet, n, &integ).unwrap();
        assert_eq!(r.roots.len(), 1);
        assert!((r.roots[0] - c((n * n) as f64, 0.0)).norm() < 1e-10, "{n}: {:?}", r.roots);
        let r = solve_bc(&v, BoundaryCondition::periodic_for(n), n, &integ).unwrap();
        assert_eq!(r.roots.len(), 2);
        for z in r.roots {
            assert!((z - c((n * n) as f64, 0.0)).norm() < 1e-6, "{n}: {z}");
        }
    }
}

#[test]
fn free_dirac_dirichlet_roots_are_integers() {
    let v: Potential = DiracPotential::zero().into();
    let integ = Integration::double();
    for n in -4..=4 {
        let r = solve_bc(&v, BoundaryCondition::Dirichlet, n, &integ).unwrap();
        assert_eq!(r.roots.len(), 1);
        assert!((r.roots[0] - c(n as f64, 0.0)).norm() < 1e-10);
    }
}

#[test]
fn free_discriminant_is_two_cos() {
    let v: Potential = HillPotential::zero().into();
    let integ = Integration::double();
    for lambda in [c(0.3, 0.0), c(7.5, 0.0), c(2.0, 1.5), c(-4.0, 0.0)] {
        let d = discriminant(&v, lambda, &integ).unwrap();
        let want = 2.0 * (PI * lambda.sqrt()).cos();
        assert!((d - want).norm() < 1e-11 * want.norm().max(1.0), "{lambda}: {d} vs {want}");
    }
}

#[test]
fn discriminant_mean_value_property() {
    let v: Potential = HillPotential::two_exp(c(1.0, 0.2), c(0.5, -1.0)).into();
    let integ = Integration::double();
    let (center, radius) = (c(5.0, 0.5), 0.7);
    let nodes = 64;
    let mean: Complex64 = (0..nodes)
        .map(|k| {
            let z = center + Complex64::from_polar(radius, 2.0 * PI * k as f64 / nodes as f64);
            discriminant(&v, z, &integ).unwrap()
        })
        .sum::<Complex64>()
        / nodes as f64;
    let at_center = discriminant(&v, center, &integ).unwrap();
    assert!((mean - at_center).norm() < 1e-10, "{mean} vs {at_center}");
}

#[test]
fn double_double_agrees_with_double() {
    let v: Potential = HillPotential::mathieu(1.0).into();
    for lambda in [c(3.9, 0.0), c(16.0, 0.1)] {
        let d = discriminant(&v, lambda, &Integration::double()).unwrap();
        let dd = discriminant(&v, lambda, &Integration::double_double()).unwrap();
        assert!((d - dd).norm() < 1e-11, "{d} vs {dd}");
    }
}

#[test]
fn hill_quasi_spectrum_is_even_in_t() {
    let v: Potential = HillPotential::two_exp(c(1.0, 0.0), c(0.5, 0.5)).into();
    let integ = Integration::double();
    let a = lowest_eigenvalues(&v, 0.7, 6, &integ).unwrap();
    let b = lowest_eigenvalues(&v, -0.7, 6, &integ).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).norm() < 1e-8, "{x} vs {y}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn quasi_spectrum_is_shift_invariant(a in -1.5..1.5f64, b in -1.5..1.5f64, zr in -1.0..1.0f64,
                                         zi in -0.3..0.3f64, t in -3.0..3.0f64) {
        let v: Potential = HillPotential::two_exp(c(a, b), c(b, 0.5)).into();
        let r = check_shift_invariance(&v, c(zr, zi), t, 6, &Integration::double()).unwrap();
        prop_assert!(r.ok, "deviation {}", r.max_deviation);
    }
}
