use hillgap::model::{
    label_pair, shift_potential, DiracPotential, FourierSeries, HillPotential, OperatorKind, Potential,
    SpectralTriangle,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = Complex64> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn series() -> impl Strategy<Value = FourierSeries> {
    prop::collection::vec((-4i64..=4, complex()), 1..6).prop_map(FourierSeries::new)
}

fn potential() -> impl Strategy<Value = Potential> {
    prop_oneof![
        series().prop_map(|v| HillPotential::new(v).into()),
        (series(), series()).prop_map(|(p, q)| DiracPotential::new(p, q).into()),
    ]
}

fn coefficients(p: &Potential) -> Vec<(i64, Complex64)> {
    match p {
        Potential::Hill(h) => h.v.iter().collect(),
        Potential::Dirac(d) => d.p.iter().chain(d.q.iter()).collect(),
    }
}

proptest! {
    #[test]
    fn shift_there_and_back(v in potential(), zeta in (-1.0..1.0f64, -0.5..0.5f64)) {
        let zeta = Complex64::new(zeta.0, zeta.1);
        let back = shift_potential(&shift_potential(&v, zeta), -zeta);
        let (a, b) = (coefficients(&v), coefficients(&back));
        prop_assert_eq!(a.len(), b.len());
        for ((k, x), (l, y)) in a.iter().zip(&b) {
            prop_assert_eq!(k, l);
            prop_assert!((x - y).norm() <= 1e-12 * x.norm().max(1.0), "{} vs {}", x, y);
        }
    }

    #[test]
    fn label_pair_ignores_argument_order(a in complex(), b in complex()) {
        let p = label_pair(a, b);
        prop_assert_eq!(p, label_pair(b, a));
        prop_assert_eq!(p, label_pair(p.0, p.1));
        prop_assert!(p.1.re > p.0.re || (p.1.re == p.0.re && p.1.im >= p.0.im));
    }

    #[test]
    fn triangle_fields_are_consistent(n in 1i64..20, a in complex(), b in complex(), mu in complex()) {
        let tri = SpectralTriangle::new(n, OperatorKind::Hill, (a, b), mu, None);
        prop_assert!((tri.gap - (tri.lambda_plus - tri.lambda_minus)).norm() < 1e-14);
        let mid = tri.deviation_plus + tri.gap / 2.0;
        prop_assert!((tri.midpoint_dev - mid).norm() < 1e-13);
        prop_assert_eq!(&tri, &SpectralTriangle::new(n, OperatorKind::Hill, (b, a), mu, None));
    }
}

#[test]
fn shifted_potential_agrees_pointwise() {
    let v: Potential = HillPotential::two_exp(Complex64::new(1.0, 0.5), Complex64::new(-2.0, 0.0)).into();
    let zeta = Complex64::new(0.3, 0.0);
    let Potential::Hill(s) = shift_potential(&v, zeta) else { unreachable!() };
    let Potential::Hill(h) = v else { unreachable!() };
    for i in 0..10 {
        let x = 0.3 * i as f64;
        assert!((s.v.eval(x) - h.v.eval(x + 0.3)).norm() < 1e-13);
    }
}

#[test]
fn mathieu_is_self_adjoint_and_two_exp_generally_not() {
    assert!(Potential::from(HillPotential::mathieu(1.5)).is_self_adjoint());
    let v = HillPotential::two_exp(Complex64::new(1.0, 0.0), Complex64::new(4.0, 0.0));
    assert!(!Potential::from(v).is_self_adjoint());
}
