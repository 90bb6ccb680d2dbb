use partdiv::cli::spec::{emit_spec, parse_spec, MeasureSpec};
use partdiv::cyclic;
use partdiv::dual;
use partdiv::{convolve, convolve_power, total_variation, GroupSpec, Measure, Rational};
use proptest::prelude::*;

fn atoms(points: std::ops::RangeInclusive<i64>) -> impl Strategy<Value = Vec<(i64, f64)>> {
    prop::collection::vec((points, 0.05f64..1.0), 1..=5).prop_map(|v| {
        let total: f64 = v.iter().map(|a| a.1).sum();
        v.into_iter().map(|(p, w)| (p, w / total)).collect()
    })
}

fn on_integers() -> impl Strategy<Value = Measure> {
    atoms(-4..=4).prop_map(|a| Measure::new(GroupSpec::Integers, &a).unwrap())
}

fn on_cyclic() -> impl Strategy<Value = Measure> {
    (2u64..=7).prop_flat_map(|n| {
        atoms(0..=n as i64 - 1).prop_map(move |a| Measure::new(GroupSpec::cyclic(n).unwrap(), &a).unwrap())
    })
}

fn zero_free(mu: &Measure) -> bool {
    dual::find_zeros(mu, dual::ZERO_TOL).map(|z| z.is_empty()).unwrap_or(false)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn convolution_commutes(a in on_integers(), b in on_integers()) {
        let ab = convolve(&a, &b).unwrap();
        let ba = convolve(&b, &a).unwrap();
        prop_assert!(total_variation(&ab, &ba).unwrap() < 1e-14);
    }

    #[test]
    fn convolution_associates(a in on_integers(), b in on_integers(), c in on_integers()) {
        let l = convolve(&convolve(&a, &b).unwrap(), &c).unwrap();
        let r = convolve(&a, &convolve(&b, &c).unwrap()).unwrap();
        prop_assert!(total_variation(&l, &r).unwrap() < 1e-13);
    }

    #[test]
    fn point_mass_at_zero_is_identity(a in on_cyclic()) {
        let id = Measure::dirac(a.group(), 0).unwrap();
        prop_assert!(total_variation(&convolve(&a, &id).unwrap(), &a).unwrap() < 1e-15);
    }

    #[test]
    fn powers_add(a in on_integers(), m in 1u64..4, n in 1u64..4) {
        let lhs = convolve_power(&a, m + n).unwrap();
        let rhs = convolve(&convolve_power(&a, m).unwrap(), &convolve_power(&a, n).unwrap()).unwrap();
        prop_assert!(total_variation(&lhs, &rhs).unwrap() < 1e-12);
    }

    #[test]
    fn fourier_transform_is_multiplicative(a in on_integers(), b in on_integers(), theta in 0.0..std::f64::consts::TAU) {
        let ab = convolve(&a, &b).unwrap();
        let err = (dual::char_fn(&ab, theta) - dual::char_fn(&a, theta) * dual::char_fn(&b, theta)).norm();
        prop_assert!(err < 1e-12);
    }

    #[test]
    fn cyclic_transform_is_multiplicative(a in on_cyclic(), w in prop::collection::vec(0.05f64..1.0, 7)) {
        let n = match a.group() { GroupSpec::Cyclic { order } => order, _ => unreachable!() };
        let total: f64 = w[..n as usize].iter().sum();
        let atoms: Vec<(i64, f64)> = (0..n as i64).map(|p| (p, w[p as usize] / total)).collect();
        let b = Measure::new(a.group(), &atoms).unwrap();
        let fa = cyclic::cyclic_char_fn(&a).unwrap();
        let fb = cyclic::cyclic_char_fn(&b).unwrap();
        let fab = cyclic::cyclic_char_fn(&convolve(&a, &b).unwrap()).unwrap();
        for j in 0..n as usize {
            prop_assert!((fab[j] - fa[j] * fb[j]).norm() < 1e-12);
        }
        let back = cyclic::cyclic_inverse(&fa);
        for (p, v) in back.iter().enumerate() {
            prop_assert!((v.re - a.weight(p as i64)).abs() < 1e-12 && v.im.abs() < 1e-12);
        }
    }

    #[test]
    fn winding_is_additive(a in on_integers(), b in on_integers()) {
        prop_assume!(zero_free(&a) && zero_free(&b));
        let ab = convolve(&a, &b).unwrap();
        let w = dual::winding_number(&ab).unwrap();
        prop_assert_eq!(w, dual::winding_number(&a).unwrap() + dual::winding_number(&b).unwrap());
    }

    #[test]
    fn lifting_reconstructs(a in on_integers()) {
        prop_assume!(zero_free(&a));
        let sc = dual::second_characteristic(&a, 256, None).unwrap();
        prop_assert!(sc.reconstruction_error().unwrap() < 1e-9);
        let origin = sc.psi_at_origin().unwrap();
        prop_assert!(origin.norm() < 1e-12);
    }

    #[test]
    fn spec_round_trips(a in prop_oneof![on_integers(), on_cyclic()]) {
        let spec = MeasureSpec::from_measure(&a);
        let text = emit_spec(&spec);
        prop_assert_eq!(parse_spec(text.as_bytes()).unwrap(), spec);
    }

    #[test]
    fn rationals_round_trip(m in 1u64..1000, n in 1u64..1000) {
        let q = Rational::new(m, n).unwrap();
        prop_assert_eq!(q.to_string().parse::<Rational>().unwrap(), q);
        prop_assert!((q.value() - m as f64 / n as f64).abs() < 1e-15);
    }
}
