use proptest::prelude::*;
use wextrap::characterization::*;
use wextrap::grid_quadrature::{CubeFamily, FamilySpec, QuadratureConfig};
use wextrap::numeric::rat;
use wextrap::weight_classes::*;

fn ev(items: &[&str]) -> ExponentVector {
    ExponentVector::parse(items).unwrap()
}

fn pw(a: f64) -> WeightSpec {
    WeightSpec::power_at_origin(1, a)
}

fn spec(levels: u32) -> FamilySpec {
    FamilySpec::new(1, 4.0, 0, levels, vec![0.0, 0.5])
}

fn fam(levels: u32) -> CubeFamily {
    CubeFamily::from_spec(&spec(levels)).unwrap()
}

fn q() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn same_weight(a: &WeightSpec, b: &WeightSpec) {
    for x in [-3.1, -0.4, 0.05, 0.9, 2.7] {
        let (u, v) = (a.eval(&[x]), b.eval(&[x]));
        assert!((u - v).abs() <= 1e-13 * v.abs().max(1.0), "{u} vs {v} at {x}");
    }
}

fn class(p: (i64, i64)) -> ScalarClass {
    if p == (1, 1) {
        ScalarClass::A1
    } else {
        ScalarClass::Ap { p: rat(p.0, p.1) }
    }
}

fn assert_entries(c: &ComponentCriterion, w: &[WeightSpec], expect: &[(WeightSpec, (i64, i64))]) {
    assert_eq!(c.entries.len(), expect.len());
    for (e, (weight, p)) in c.entries.iter().zip(expect) {
        same_weight(&e.transform.apply(w).unwrap(), weight);
        assert_eq!(e.class, class(*p), "{}", e.label);
    }
}

#[test]
fn dual_weight_examples() {
    let (d, pp) = dual_weight(&WeightSpec::constant(1.0), 2.0).unwrap();
    same_weight(&d, &WeightSpec::constant(1.0));
    assert_eq!(pp, 2.0);
    let (d, pp) = dual_weight(&pw(0.5), 2.0).unwrap();
    same_weight(&d, &pw(-0.5));
    assert_eq!(pp, 2.0);
    let (d, pp) = dual_weight(&pw(0.8), 3.0).unwrap();
    same_weight(&d, &pw(-0.4));
    assert_eq!(pp, 1.5);
    assert!(dual_weight(&pw(0.5), 1.0).is_err());
}

// Hand-computed oracles use weights with distinct exponents so each transform is visible.
#[test]
fn rescaled_criterion_for_unit_s() {
    let w = [pw(0.3), pw(0.7)];
    let c = jiao_criterion(&ev(&["2", "2"]), &ev(&["1", "1"])).unwrap();
    // (p_j/s_j)' = 2, index 2·1/((1/2)·1) = 4; nu = w1^{1/2} w2^{1/2} in A_{1/(1/2)·... } = A_2.
    assert_entries(&c, &w, &[(pw(-0.3), (4, 1)), (pw(-0.7), (4, 1)), (pw(0.5), (2, 1))]);
}

#[test]
fn rescaled_criterion_equal_branch() {
    let w = [pw(0.3), pw(0.7)];
    let c = jiao_criterion(&ev(&["2", "3"]), &ev(&["2", "1"])).unwrap();
    // s = 2/3, p = 6/5: w1^{s/p1} = w1^{1/3} in A_1; w2^{1-(3)'} = w2^{-1/2} in A_{3/((2/3)·2)} = A_{9/4}.
    // nu = w1^{3/5} w2^{2/5} in A_{p/s} = A_{9/5}.
    let nu = WeightSpec::power_at_origin(1, 0.3 * 0.6 + 0.7 * 0.4);
    assert_entries(&c, &w, &[(pw(0.1), (1, 1)), (pw(-0.35), (9, 4)), (nu, (9, 5))]);
}

#[test]
fn unit_s_matches_plain_multilinear_criterion() {
    for p in [["2", "2"], ["3", "3/2"], ["5/2", "4"]] {
        let a = jiao_criterion(&ev(&p), &ev(&["1", "1"])).unwrap();
        let b = multilinear_ap_criterion(&ev(&p)).unwrap();
        let w = [pw(0.2), pw(-0.3)];
        assert_eq!(a.entries.len(), b.entries.len());
        for (x, y) in a.entries.iter().zip(&b.entries) {
            assert_eq!(x.class, y.class);
            same_weight(&x.transform.apply(&w).unwrap(), &y.transform.apply(&w).unwrap());
        }
    }
}

#[test]
fn scalar_rescaled_criterion_is_duality() {
    let w = [pw(0.4)];
    let c = jiao_criterion(&ev(&["3"]), &ev(&["1"])).unwrap();
    assert_entries(&c, &w, &[(pw(-0.2), (3, 2)), (pw(0.4), (3, 1))]);
}

#[test]
fn off_diagonal_criterion() {
    let w = [pw(0.3), pw(0.7)];
    let c = moen_criterion(&ev(&["2", "2"]), &rat(2, 1)).unwrap();
    // w_j^{-2} in A_4 and nu^2 = (w1 w2)^2 in A_4.
    assert_entries(&c, &w, &[(pw(-0.6), (4, 1)), (pw(-1.4), (4, 1)), (pw(2.0), (4, 1))]);
    // p1 = 1: w1^{1/2} in A_1. p = 2/3, p* = 1; w2^{-2} in A_4, nu in A_2.
    let c = moen_criterion(&ev(&["1", "2"]), &rat(1, 1)).unwrap();
    assert_entries(&c, &w, &[(pw(0.15), (1, 1)), (pw(-1.4), (4, 1)), (pw(1.0), (2, 1))]);
}

#[test]
fn single_component_off_diagonal_is_classical() {
    let f = fam(6);
    for (a, p, ps) in [(0.1, (2, 1), (3, 1)), (-0.2, (3, 2), (2, 1)), (0.3, (4, 1), (4, 1))] {
        let pv = ExponentVector::new(vec![rat(p.0, p.1)]).unwrap();
        let direct = multilinear_apq_constant(&[pw(a)], &pv, &rat(ps.0, ps.1), &f, &q()).unwrap().value.value();
        let pf = p.0 as f64 / p.1 as f64;
        let classical = apq_constant(&pw(a), pf, ps.0 as f64 / ps.1 as f64, &f, &q()).unwrap().value.value();
        assert!((direct - classical).abs() < 1e-12 * classical, "{direct} vs {classical}");
    }
}

#[test]
fn equivalence_examples() {
    let stab = StabilityConfig::default();
    let class = DirectClass::MultApS { p: ev(&["2", "2"]), s: ev(&["1", "1"]) };
    let crit = class.criterion().unwrap();
    let one = [WeightSpec::constant(1.0), WeightSpec::constant(1.0)];
    let r = verify_equivalence(&one, &crit, &class, &spec(8), &q(), &stab).unwrap();
    assert_eq!((r.direct.verdict, r.componentwise, r.agree), (Verdict::Member, Verdict::Member, Some(true)));
    let r = verify_equivalence(&[pw(0.3), pw(0.3)], &crit, &class, &spec(10), &q(), &stab).unwrap();
    assert_eq!(r.agree, Some(true));
    let r = verify_equivalence(&[pw(2.0), pw(2.0)], &crit, &class, &spec(8), &q(), &stab).unwrap();
    assert_eq!((r.direct.verdict, r.componentwise, r.agree), (Verdict::NonMember, Verdict::NonMember, Some(true)));
}

#[test]
fn reverse_holder_examples() {
    let grid = TGrid::default();
    let f = fam(8);
    let c = rhi_exponent(&WeightSpec::constant(2.0), &f, 1.0, &grid, &q()).unwrap();
    assert!((c.eta - 1.0).abs() < 1e-12);
    let half = rhi_exponent(&pw(0.5), &f, 2.0, &grid, &q()).unwrap();
    assert!(half.eta > 0.0);
    assert!(half.recheck(&q()).unwrap());
    let etas: Vec<f64> = [0.5, 0.8, 0.95].iter().map(|&a| rhi_exponent(&pw(a), &f, 2.0, &grid, &q()).unwrap().eta).collect();
    assert!(etas.windows(2).all(|e| e[1] <= e[0]), "{etas:?}");
}

#[test]
fn reverse_holder_rejects_small_constant() {
    assert!(rhi_exponent(&pw(0.5), &fam(3), 0.5, &TGrid::default(), &q()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn duality_identity(a in -0.9f64..1.9, p in 1.3f64..3.0) {
        let f = fam(6);
        let lhs = ap_constant(&pw(a), p, &f, &q()).unwrap().value;
        prop_assume!(lhs.is_finite());
        let (d, pp) = dual_weight(&pw(a), p).unwrap();
        let rhs = ap_constant(&d, pp, &f, &q()).unwrap().value;
        let expect = lhs.value().powf(1.0 / (p - 1.0));
        prop_assert!((rhs.value() - expect).abs() <= 1e-9 * expect, "{} vs {}", rhs.value(), expect);
    }

    #[test]
    fn reverse_holder_monotone_in_constant(a in -0.8f64..0.9, c in 1.0f64..3.0, dc in 0.0f64..2.0) {
        let f = fam(5);
        let g = TGrid { first: 1.05, step: 0.05, count: 20 };
        let lo = rhi_exponent(&pw(a), &f, c, &g, &q()).unwrap().eta;
        let hi = rhi_exponent(&pw(a), &f, c + dc, &g, &q()).unwrap().eta;
        prop_assert!(lo <= hi);
    }

    #[test]
    fn reverse_holder_antitone_in_family(a in -0.8f64..0.9, k in 2u32..6) {
        let g = TGrid { first: 1.05, step: 0.05, count: 20 };
        let small = rhi_exponent(&pw(a), &fam(k), 2.0, &g, &q()).unwrap().eta;
        let big = rhi_exponent(&pw(a), &fam(k + 2), 2.0, &g, &q()).unwrap().eta;
        prop_assert!(big <= small);
    }
}
