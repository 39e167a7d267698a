use proptest::prelude::*;
use wextrap::grid_quadrature::{CubeFamily, FamilySpec, QuadratureConfig};
use wextrap::numeric::rat;
use wextrap::weight_classes::*;

fn fam(half_width: f64, max_level: u32) -> CubeFamily {
    CubeFamily::from_spec(&FamilySpec::new(1, half_width, 0, max_level, vec![0.0, 0.5])).unwrap()
}

fn pw(a: f64) -> WeightSpec {
    WeightSpec::power_at_origin(1, a)
}

fn ev(items: &[&str]) -> ExponentVector {
    ExponentVector::parse(items).unwrap()
}

fn close(x: f64, y: f64, rel: f64) -> bool {
    if x.is_infinite() || y.is_infinite() {
        return x == y;
    }
    (x - y).abs() <= rel * x.abs().max(1.0)
}

fn q() -> QuadratureConfig {
    QuadratureConfig::default()
}

#[test]
fn nu_of_unit_weights_is_one() {
    let nu = nu_weight(&[WeightSpec::constant(1.0), WeightSpec::constant(1.0)], &ev(&["3", "3/2"])).unwrap();
    for x in [-2.0, 0.3, 1.7] {
        assert_eq!(nu.eval(&[x]), 1.0);
    }
}

#[test]
fn nu_of_equal_linear_powers() {
    let nu = nu_weight(&[pw(1.0), pw(1.0)], &ev(&["4", "4"])).unwrap();
    for x in [-2.0f64, 0.3, 1.7] {
        assert!((nu.eval(&[x]) - x.abs()).abs() < 1e-14);
    }
}

#[test]
fn nu_absorbs_constant_component() {
    let w = WeightSpec::power(&[0.5], 0.7);
    let p = ev(&["2", "3"]);
    let nu = nu_weight(&[w.clone(), WeightSpec::constant(1.0)], &p).unwrap();
    // p = 6/5, so the exponent on w is p/p1 = 3/5.
    for x in [-1.0, 0.2, 2.5] {
        let expect = w.eval(&[x]).powf(0.6);
        assert!((nu.eval(&[x]) - expect).abs() < 1e-13 * expect);
    }
}

#[test]
fn ap_examples() {
    let one = ap_constant(&WeightSpec::constant(1.0), 2.0, &fam(4.0, 6), &q()).unwrap();
    assert!((one.value.value() - 1.0).abs() < 1e-12);
    let stab = StabilityConfig::default();
    let spec = FamilySpec::new(1, 4.0, 0, 10, vec![0.0, 0.5]);
    let rep = membership(|f| ap_constant(&pw(0.5), 2.0, f, &q()), &spec, &stab).unwrap();
    assert_eq!(rep.verdict, Verdict::Member);
    assert!(rep.value.is_finite() && rep.extended_value.value() >= rep.value.value());
    assert!(!ap_constant(&pw(1.0), 2.0, &fam(4.0, 8), &q()).unwrap().value.is_finite());
    assert!(ap_constant(&pw(0.5), 0.5, &fam(4.0, 2), &q()).is_err());
}

#[test]
fn apq_examples() {
    for (p, qq) in [(1.5, 1.5), (2.0, 4.0), (3.0, 6.0)] {
        let c = apq_constant(&WeightSpec::constant(2.0), p, qq, &fam(4.0, 5), &q()).unwrap();
        assert!((c.value.value() - 1.0).abs() < 1e-12);
    }
    // Window for p = 2, q = 4 is (-1/4, 1/2).
    assert!(apq_constant(&pw(0.2), 2.0, 4.0, &fam(4.0, 8), &q()).unwrap().value.is_finite());
    assert!(apq_constant(&pw(-0.1), 2.0, 4.0, &fam(4.0, 8), &q()).unwrap().value.is_finite());
    assert!(!apq_constant(&pw(0.5), 2.0, 4.0, &fam(4.0, 8), &q()).unwrap().value.is_finite());
}

#[test]
fn multilinear_aps_examples() {
    let unit = [WeightSpec::constant(1.0), WeightSpec::constant(1.0)];
    let c = multilinear_aps_constant(&unit, &ev(&["3", "2"]), &ev(&["2", "1"]), &fam(4.0, 5), &q()).unwrap();
    assert!((c.value.value() - 1.0).abs() < 1e-12);
    let w = [pw(0.1), pw(0.1)];
    let c = multilinear_aps_constant(&w, &ev(&["2", "2"]), &ev(&["1", "1"]), &fam(4.0, 8), &q()).unwrap();
    assert!(c.value.is_finite() && c.value.value() >= 1.0 - 1e-9);
    // p1 = s1 uses the node infimum: finite away from the origin, infinite on cubes touching it.
    let w = [pw(0.5), WeightSpec::constant(1.0)];
    let (p, s) = (ev(&["2", "2"]), ev(&["2", "1"]));
    let away = fam(1.0, 4).translated(&[10.0]);
    assert!(multilinear_aps_constant(&w, &p, &s, &away, &q()).unwrap().value.is_finite());
    assert!(!multilinear_aps_constant(&w, &p, &s, &fam(1.0, 4), &q()).unwrap().value.is_finite());
}

#[test]
fn multilinear_apq_examples() {
    let unit = [WeightSpec::constant(1.0), WeightSpec::constant(1.0)];
    let c = multilinear_apq_constant(&unit, &ev(&["2", "2"]), &rat(2, 1), &fam(4.0, 5), &q()).unwrap();
    assert!((c.value.value() - 1.0).abs() < 1e-12);
    let w = [pw(0.1), pw(0.1)];
    let c = multilinear_apq_constant(&w, &ev(&["2", "2"]), &rat(2, 1), &fam(4.0, 8), &q()).unwrap();
    assert!(c.value.is_finite());
    // nu^{p*} = |x|^{-2} is not locally integrable.
    let w = [pw(-1.0), WeightSpec::constant(1.0)];
    let c = multilinear_apq_constant(&w, &ev(&["2", "2"]), &rat(2, 1), &fam(4.0, 8), &q()).unwrap();
    assert!(!c.value.is_finite());
}

#[test]
fn bmo_examples() {
    let c = bmo_norm(&|_: &[f64]| 3.0, &fam(4.0, 5), &q()).unwrap();
    assert_eq!(c.value.value(), 0.0);
    let small = bmo_norm(&|x: &[f64]| x[0], &fam(4.0, 3), &q()).unwrap().value.value();
    let large = bmo_norm(&|x: &[f64]| x[0], &fam(8.0, 3), &q()).unwrap().value.value();
    // The largest cube has side 2L, so the oscillation is L/2.
    assert!((small - 2.0).abs() < 1e-9 && (large - 4.0).abs() < 1e-9);
    let spec = FamilySpec::new(1, 4.0, 0, 10, vec![0.0, 0.5]);
    let log = |x: &[f64]| x[0].abs().ln();
    let rep = membership(|f| bmo_norm(&log, f, &q()), &spec, &StabilityConfig::default()).unwrap();
    assert_eq!(rep.verdict, Verdict::Member);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn constants_grow_with_the_family(a in -0.9f64..0.9, p in 1.2f64..3.0, k in 1u32..6) {
        let small = ap_constant(&pw(a), p, &fam(4.0, k), &q()).unwrap().value.value();
        let big = ap_constant(&pw(a), p, &fam(4.0, k + 1), &q()).unwrap().value.value();
        prop_assert!(small <= big);
    }

    #[test]
    fn holder_floor(a in -0.9f64..0.9, p in 1.2f64..3.0) {
        let c = ap_constant(&pw(a), p, &fam(4.0, 5), &q()).unwrap().value;
        prop_assume!(c.is_finite());
        prop_assert!(c.value() >= 1.0 - 1e-9);
        let m = multilinear_ap_constant(&[pw(a / 4.0), pw(-a / 4.0)], &ev(&["2", "3"]), &fam(4.0, 5), &q()).unwrap().value;
        prop_assert!(!m.is_finite() || m.value() >= 1.0 - 1e-9);
    }

    #[test]
    fn power_weights_are_dilation_invariant(a in -0.9f64..0.9, p in 1.5f64..3.0) {
        let v4 = ap_constant(&pw(a), p, &fam(4.0, 4), &q()).unwrap().value.value();
        let v8 = ap_constant(&pw(a), p, &fam(8.0, 4), &q()).unwrap().value.value();
        prop_assert!(close(v4, v8, 1e-9), "{} vs {}", v4, v8);
    }

    #[test]
    fn unit_s_reduces_to_multilinear_ap(a1 in -0.4f64..0.4, a2 in -0.4f64..0.4, p1 in 5i64..16, p2 in 5i64..16) {
        let p = ExponentVector::new(vec![rat(p1, 4), rat(p2, 4)]).unwrap();
        let w = [pw(a1), pw(a2)];
        let f = fam(4.0, 4);
        let x = multilinear_aps_constant(&w, &p, &ev(&["1", "1"]), &f, &q()).unwrap().value.value();
        let y = multilinear_ap_constant(&w, &p, &f, &q()).unwrap().value.value();
        prop_assert!(close(x, y, 1e-12), "{} vs {}", x, y);
    }

    #[test]
    fn bmo_is_translation_invariant(x0 in -3.0f64..3.0) {
        let f = fam(2.0, 4);
        let base = bmo_norm(&|x: &[f64]| x[0].abs().ln(), &f, &q()).unwrap().value.value();
        let moved = bmo_norm(&|x: &[f64]| (x[0] - x0).abs().ln(), &f.translated(&[x0]), &q()).unwrap().value.value();
        prop_assert!(close(base, moved, 1e-9), "{} vs {}", base, moved);
    }
}
