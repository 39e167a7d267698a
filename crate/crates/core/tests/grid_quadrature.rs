use proptest::prelude::*;
use wextrap::grid_quadrature::*;
use wextrap::weight_classes::WeightSpec;

#[test]
fn family_counts() {
    let one = build_cube_family(1, 1.0, 0, 0, &[0.0]).unwrap();
    assert_eq!(one.len(), 1);
    let q = &one.cubes()[0];
    assert_eq!((q.lower(0), q.lower(0) + q.side), (-1.0, 1.0));
    assert_eq!(build_cube_family(1, 1.0, 0, 2, &[0.0]).unwrap().len(), 7);
    assert_eq!(build_cube_family(2, 1.0, 0, 1, &[0.0, 0.5]).unwrap().len(), 10);
}

#[test]
fn family_rejects_bad_dimension() {
    assert!(build_cube_family(3, 1.0, 0, 1, &[0.0]).is_err());
    assert!(build_cube_family(1, 1.0, 2, 1, &[0.0]).is_err());
    assert!(build_cube_family(1, -1.0, 0, 1, &[0.0]).is_err());
}

#[test]
fn average_examples() {
    let unit = Cube::new(&[0.5], 1.0).unwrap();
    assert_eq!(average(&|_: &[f64]| 7.0, &unit, 64).unwrap(), 7.0);
    assert!((average(&|x: &[f64]| x[0], &unit, 64).unwrap() - 0.5).abs() < 1e-14);
    let sqrt = average(&|x: &[f64]| x[0].sqrt(), &unit, 1 << 14).unwrap();
    assert!((sqrt - 2.0 / 3.0).abs() < 1e-6, "{sqrt}");
    let sym = Cube::new(&[0.0], 2.0).unwrap();
    assert!(average(&|x: &[f64]| 1.0 / x[0].abs(), &sym, 64).unwrap().is_infinite());
}

#[test]
fn lp_norm_examples() {
    let g = GridSpec::new(1, 1024, 1.0).unwrap();
    let one = WeightSpec::constant(1.0);
    let ones = GridFunction::from_fn(g, |_| 1.0);
    assert!((weighted_lp_norm(&ones, 2.0, &one).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    let zero = GridFunction::zeros(g);
    for p in [0.5, 1.0, 3.0] {
        assert_eq!(weighted_lp_norm(&zero, p, &WeightSpec::power(&[0.0], 0.3)).unwrap(), 0.0);
    }
    let x = GridFunction::from_fn(g, |x| x[0]);
    assert!((weighted_lp_norm(&x, 2.0, &one).unwrap() - (2.0f64 / 3.0).sqrt()).abs() < 1e-4);
}

#[test]
fn grid_rejects_non_power_of_two() {
    assert!(GridSpec::new(1, 100, 1.0).is_err());
    assert!(GridFunction::new(1, 8, 1.0, vec![0.0; 7]).is_err());
}

fn cube_strategy() -> impl Strategy<Value = Cube> {
    (-2.0f64..2.0, 0.1f64..2.0).prop_map(|(c, s)| Cube::new(&[c], s).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn average_is_linear(q in cube_strategy(), a in -3.0f64..3.0, b in -3.0f64..3.0, k in 0.5f64..4.0) {
        let f = |x: &[f64]| (k * x[0]).sin();
        let g = |x: &[f64]| x[0] * x[0];
        let lhs = average(&|x: &[f64]| a * f(x) + b * g(x), &q, 64).unwrap();
        let rhs = a * average(&f, &q, 64).unwrap() + b * average(&g, &q, 64).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn average_is_monotone(q in cube_strategy(), c in 0.0f64..2.0) {
        let f = |x: &[f64]| x[0].cos();
        let g = |x: &[f64]| x[0].cos() + c * x[0] * x[0];
        prop_assert!(average(&f, &q, 64).unwrap() <= average(&g, &q, 64).unwrap() + 1e-15);
    }

    #[test]
    fn lp_norm_scales(c in -5.0f64..5.0, p in 0.5f64..4.0, a in -0.5f64..0.5) {
        let g = GridSpec::new(1, 64, 2.0).unwrap();
        let f = GridFunction::from_fn(g, |x| (3.0 * x[0]).sin() + 0.2);
        let cf = GridFunction::from_fn(g, |x| c * ((3.0 * x[0]).sin() + 0.2));
        let w = WeightSpec::power(&[0.0], a);
        let lhs = weighted_lp_norm(&cf, p, &w).unwrap();
        let rhs = c.abs() * weighted_lp_norm(&f, p, &w).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
    }

    #[test]
    fn unweighted_l2_is_plain_quadrature(seed in 0u64..1000) {
        let g = GridSpec::new(2, 16, 1.0).unwrap();
        let f = GridFunction::from_fn(g, |x| ((seed as f64) * 0.37 + x[0] * 5.0 - x[1]).sin());
        let n = weighted_lp_norm(&f, 2.0, &WeightSpec::constant(1.0)).unwrap();
        let plain: f64 = f.values.iter().map(|v| v * v).sum::<f64>() * g.cell_volume();
        prop_assert!((n * n - plain).abs() <= 1e-12 * (1.0 + plain));
    }
}
