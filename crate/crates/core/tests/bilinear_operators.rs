use proptest::prelude::*;
use wextrap::bilinear_operators::*;
use wextrap::grid_quadrature::{GridFunction, GridSpec};

fn grid(n: usize, l: f64) -> GridSpec {
    GridSpec::new(1, n, l).unwrap()
}

fn indicator(g: GridSpec, lo: f64, hi: f64) -> GridFunction {
    ScalarFn::Indicator { lo, hi }.sample(g)
}

fn bump(g: GridSpec, c: f64, r: f64) -> GridFunction {
    ScalarFn::bump(c, r).sample(g)
}

fn gauss(g: GridSpec, c: f64, w: f64) -> GridFunction {
    ScalarFn::Gaussian { center: vec![c], width: w }.sample(g)
}

fn scale(f: &GridFunction, a: f64) -> GridFunction {
    let mut out = f.clone();
    out.values.iter_mut().for_each(|v| *v *= a);
    out
}

fn add(f: &GridFunction, g: &GridFunction) -> GridFunction {
    let mut out = f.clone();
    out.values.iter_mut().zip(&g.values).for_each(|(v, w)| *v += w);
    out
}

fn mul(f: &GridFunction, g: &GridFunction) -> GridFunction {
    let mut out = f.clone();
    out.values.iter_mut().zip(&g.values).for_each(|(v, w)| *v *= w);
    out
}

/// Linear interpolation between the two nodes around `x`.
fn interp(f: &GridFunction, x: f64) -> f64 {
    let g = f.grid();
    let h = g.spacing();
    let t = (x + g.half_width) / h - 0.5;
    let i = t.floor() as usize;
    let s = t - i as f64;
    f.values[i] * (1.0 - s) + f.values[i + 1] * s
}

fn frac(beta: f64, f1: &GridFunction, f2: &GridFunction) -> GridFunction {
    apply_fractional_integral(beta, FractionalConvention::Homogeneous, f1, f2).unwrap()
}

fn cz(kind: KernelKind) -> KernelSpec {
    KernelSpec::new(kind)
}

fn comm(base: OperatorSpec, alpha: MultiIndex, b1: ScalarFn, b2: ScalarFn) -> CommutatorSpec {
    CommutatorSpec {
        base,
        alpha,
        b: [CommutatorSymbol { function: b1, class: SymbolClass::Custom }, CommutatorSymbol { function: b2, class: SymbolClass::Custom }],
    }
}

fn i1() -> OperatorSpec {
    OperatorSpec::FractionalIntegral { beta: 1.0, convention: FractionalConvention::Homogeneous }
}

#[test]
fn fractional_integral_vanishes_on_zero_input() {
    let g = grid(64, 1.0);
    let f2 = gauss(g, 0.1, 0.3);
    for beta in [0.3, 1.0, 1.7] {
        let out = frac(beta, &GridFunction::zeros(g), &f2);
        assert_eq!(out.max_abs(), 0.0);
    }
}

#[test]
fn fractional_integral_is_homogeneous() {
    let g = grid(64, 1.0);
    let (f1, f2) = (gauss(g, 0.0, 0.4), bump(g, 0.2, 0.5));
    let base = frac(1.0, &f1, &f2);
    let scaled = frac(1.0, &scale(&f1, -2.5), &f2);
    assert!(scaled.max_abs_diff(&scale(&base, -2.5)) <= 1e-12 * base.max_abs());
    let scaled = frac(1.0, &f1, &scale(&f2, 3.0));
    assert!(scaled.max_abs_diff(&scale(&base, 3.0)) <= 1e-12 * base.max_abs());
}

#[test]
fn fractional_integral_of_indicators_is_positive_and_swap_symmetric() {
    let g = grid(256, 1.0);
    let f = indicator(g, 0.0, 0.25);
    let out = frac(1.0, &f, &f);
    assert!(out.values.iter().all(|v| *v > 0.0));
    let other = gauss(g, -0.3, 0.2);
    let ab = frac(1.0, &f, &other);
    let ba = frac(1.0, &other, &f);
    assert!(ab.max_abs_diff(&ba) <= 1e-12 * ab.max_abs());
}

#[test]
fn fractional_integral_is_consistent_across_resolutions() {
    let run = |n| {
        let g = grid(n, 1.0);
        let f = indicator(g, 0.0, 0.25);
        frac(1.0, &f, &f)
    };
    let (coarse, fine) = (run(128), run(256));
    let rel = (coarse.integral() - fine.integral()).abs() / fine.integral();
    assert!(rel < 0.05, "integral gap {rel}");
    for x in [-0.5, -0.1, 0.125, 0.3, 0.6] {
        let (a, b) = (interp(&coarse, x), interp(&fine, x));
        assert!((a - b).abs() / b < 0.05, "x = {x}: {a} vs {b}");
    }
}

#[test]
fn fractional_integral_rejects_beta_outside_range() {
    let g = grid(16, 1.0);
    let f = gauss(g, 0.0, 0.3);
    for beta in [0.0, -0.5, 2.0, 3.0, f64::NAN] {
        assert!(apply_fractional_integral(beta, FractionalConvention::Homogeneous, &f, &f).is_err(), "beta {beta}");
    }
    let g2 = GridSpec::new(2, 8, 1.0).unwrap();
    let f2 = GridFunction::from_fn(g2, |x| (-(x[0] * x[0] + x[1] * x[1])).exp());
    assert!(apply_fractional_integral(3.0, FractionalConvention::Homogeneous, &f2, &f2).is_ok());
    assert!(apply_fractional_integral(4.0, FractionalConvention::Homogeneous, &f2, &f2).is_err());
}

#[test]
fn cz_kernel_vanishes_on_zero_input_and_zero_kernel() {
    let g = grid(64, 1.0);
    let f = bump(g, 0.0, 0.5);
    let out = apply_cz_kernel(&cz(KernelKind::SignedModel), &GridFunction::zeros(g), &f).unwrap();
    assert_eq!(out.max_abs(), 0.0);
    let out = apply_cz_kernel(&cz(KernelKind::Zero), &f, &f).unwrap();
    assert_eq!(out.max_abs(), 0.0);
}

#[test]
fn cz_truncation_sweep_stays_within_tail_bound() {
    let g = grid(128, 1.0);
    let f = bump(g, 0.0, 0.5);
    let steps = truncation_sweep(&cz(KernelKind::SignedModel), &[16.0, 8.0, 4.0, 2.0], &f, &f).unwrap();
    assert_eq!(steps.len(), 3);
    for s in &steps {
        assert!(s.change > 0.0);
        assert!(s.change <= s.tail_bound * (1.0 + 1e-12), "{s:?}");
    }
}

#[test]
fn cz_rejects_truncation_below_one_cell() {
    let g = grid(32, 1.0);
    let f = bump(g, 0.0, 0.5);
    let spec = KernelSpec { truncation_cells: 1.0, ..cz(KernelKind::SignedModel) };
    assert!(apply_cz_kernel(&spec, &f, &f).is_err());
}

#[test]
fn identity_symbol_gives_pointwise_product() {
    let g = grid(256, 2.0);
    let f1 = GridFunction::from_fn(g, |x| (3.0 * x[0]).sin() + 0.2 * x[0]);
    let f2 = indicator(g, -0.5, 1.0);
    let out = apply_fourier_multiplier(&SymbolSpec::new(SymbolKind::Identity), &f1, &f2).unwrap();
    assert!(out.max_abs_diff(&mul(&f1, &f2)) < 1e-10);
}

#[test]
fn first_variable_symbol_factorizes() {
    let g = grid(128, 2.0);
    let (f1, f2) = (gauss(g, 0.3, 0.5), bump(g, -0.2, 1.0));
    for m in [ScalarMultiplier::Bessel { order: 1.5 }, ScalarMultiplier::Heat { t: 0.05 }] {
        let out = apply_fourier_multiplier(&SymbolSpec::new(SymbolKind::FirstVariable { multiplier: m.clone() }), &f1, &f2).unwrap();
        let expect = mul(&apply_scalar_multiplier(&m, &f1).unwrap(), &f2);
        assert!(out.max_abs_diff(&expect) < 1e-10);
        assert!(out.max_abs_diff(&mul(&f1, &f2)) > 1e-3);
    }
}

#[test]
fn zero_symbol_gives_zero() {
    let g = grid(64, 2.0);
    let f = gauss(g, 0.0, 0.5);
    let out = apply_fourier_multiplier(&SymbolSpec::new(SymbolKind::Zero), &f, &f).unwrap();
    assert!(out.max_abs() < 1e-15);
}

fn l_norm(f: &GridFunction, p: f64) -> f64 {
    (f.values.iter().map(|v| v.abs().powf(p)).sum::<f64>() * f.grid().cell_volume()).powf(1.0 / p)
}

#[test]
fn coifman_meyer_multiplier_is_bounded_and_bilinear() {
    let sigma = SymbolSpec::new(SymbolKind::CoifmanMeyer { decay: 1.0, cutoff: Some(8.0) });
    let mut ratios = Vec::new();
    for n in [64, 128, 256] {
        let g = grid(n, 2.0);
        let trials = [
            (gauss(g, 0.0, 0.3), gauss(g, 0.2, 0.6)),
            (indicator(g, -0.5, 0.5), bump(g, 0.0, 1.0)),
            (GridFunction::from_fn(g, |x| (5.0 * x[0]).cos()), indicator(g, 0.0, 1.0)),
        ];
        for (f1, f2) in &trials {
            let out = apply_fourier_multiplier(&sigma, f1, f2).unwrap();
            ratios.push(l_norm(&out, 2.0) / (l_norm(f1, 4.0) * l_norm(f2, 4.0)));
            let sum = apply_fourier_multiplier(&sigma, &add(f1, &scale(f2, 0.5)), f2).unwrap();
            let split = add(&out, &scale(&apply_fourier_multiplier(&sigma, f2, f2).unwrap(), 0.5));
            assert!(sum.max_abs_diff(&split) < 1e-10);
        }
    }
    assert!(ratios.iter().all(|r| r.is_finite() && *r > 0.0 && *r <= 1.0 + 1e-9), "{ratios:?}");
}

#[test]
fn multiplier_rejects_two_dimensional_grids() {
    let g = GridSpec::new(2, 8, 1.0).unwrap();
    let f = GridFunction::zeros(g);
    assert!(apply_fourier_multiplier(&SymbolSpec::new(SymbolKind::Identity), &f, &f).is_err());
}

#[test]
fn commutator_with_constant_symbol_vanishes() {
    let g = grid(64, 1.0);
    let (f1, f2) = (gauss(g, 0.0, 0.3), bump(g, 0.1, 0.4));
    let c = ScalarFn::Constant { value: 2.7 };
    let bases = [
        i1(),
        OperatorSpec::CalderonZygmund { kernel: cz(KernelKind::SignedModel) },
        OperatorSpec::FourierMultiplier { symbol: SymbolSpec::new(SymbolKind::CoifmanMeyer { decay: 1.0, cutoff: None }) },
    ];
    for base in bases {
        let scale = apply_operator(&base, &f1, &f2).unwrap().max_abs();
        let first = commutator(&comm(base.clone(), MultiIndex::First, c.clone(), ScalarFn::log_abs()), &f1, &f2).unwrap();
        assert!(first.max_abs() <= 1e-12 * scale.max(1.0), "{}", base.describe());
        let second = commutator(&comm(base.clone(), MultiIndex::Second, ScalarFn::log_abs(), c.clone()), &f1, &f2).unwrap();
        assert!(second.max_abs() <= 1e-12 * scale.max(1.0));
        let both = commutator(&comm(base.clone(), MultiIndex::Both, ScalarFn::bump(0.0, 0.3), c.clone()), &f1, &f2).unwrap();
        assert!(both.max_abs() <= 1e-12 * scale.max(1.0));
    }
}

#[test]
fn bump_commutator_reassociates_and_matches_kernel_form() {
    let g = grid(128, 1.0);
    let (f1, f2) = (gauss(g, 0.1, 0.3), indicator(g, -0.25, 0.25));
    let b = ScalarFn::bump(0.0, 0.25);
    let spec = CommutatorSpec {
        base: i1(),
        alpha: MultiIndex::First,
        b: [
            CommutatorSymbol { function: b.clone(), class: SymbolClass::CmoLike },
            CommutatorSymbol { function: b.clone(), class: SymbolClass::CmoLike },
        ],
    };
    let nested = commutator(&spec, &f1, &f2).unwrap();
    assert!(nested.max_abs() > 1e-3);
    let kernel = commutator_kernel_form(&spec, &f1, &f2).unwrap();
    assert!(nested.max_abs_diff(&kernel) < 1e-10, "{}", nested.max_abs_diff(&kernel));
    let bs = b.sample(g);
    let lhs = add(&nested, &frac(1.0, &mul(&bs, &f1), &f2));
    let rhs = mul(&bs, &frac(1.0, &f1, &f2));
    assert!(lhs.max_abs_diff(&rhs) < 1e-10);
}

#[test]
fn second_and_iterated_commutators_match_kernel_form() {
    let g = grid(64, 1.0);
    let (f1, f2) = (gauss(g, 0.0, 0.3), gauss(g, 0.2, 0.2));
    for alpha in [MultiIndex::Second, MultiIndex::Both] {
        let spec = comm(OperatorSpec::CalderonZygmund { kernel: cz(KernelKind::Model { constant: 1.0 }) }, alpha, ScalarFn::bump(0.1, 0.3), ScalarFn::bump(-0.1, 0.4));
        let nested = commutator(&spec, &f1, &f2).unwrap();
        let kernel = commutator_kernel_form(&spec, &f1, &f2).unwrap();
        assert!(nested.max_abs() > 1e-4);
        assert!(nested.max_abs_diff(&kernel) < 1e-10 * nested.max_abs().max(1.0));
    }
}

#[test]
fn commutator_class_tags_are_checked() {
    let g = grid(32, 1.0);
    let f = gauss(g, 0.0, 0.3);
    let mut spec = comm(i1(), MultiIndex::First, ScalarFn::log_abs(), ScalarFn::log_abs());
    spec.b[0].class = SymbolClass::CmoLike;
    assert!(commutator(&spec, &f, &f).is_err());
    spec.b[0].class = SymbolClass::BmoNotCmo;
    assert!(commutator(&spec, &f, &f).is_ok());
    assert!(serde_json::from_str::<MultiIndex>("[2,0]").is_err());
    assert_eq!(serde_json::from_str::<MultiIndex>("[1,1]").unwrap(), MultiIndex::Both);
}

fn sobolev(sigma: SymbolKind, reg: Regularity, j: (i32, i32)) -> SobolevReport {
    sobolev_symbol_norm(&SymbolSpec::new(sigma), &reg, j, &SobolevSettings::default()).unwrap()
}

#[test]
fn sobolev_norm_of_zero_symbol_is_zero() {
    assert_eq!(sobolev(SymbolKind::Zero, Regularity::Isotropic(1.5), (-3, 3)).sup, 0.0);
}

#[test]
fn sobolev_norm_of_unit_symbol_ignores_scale_range() {
    let a = sobolev(SymbolKind::Identity, Regularity::Isotropic(1.6), (-2, 2));
    let b = sobolev(SymbolKind::Identity, Regularity::Isotropic(1.6), (-7, 9));
    assert!(a.sup > 0.0);
    assert_eq!(a.sup, b.sup);
    assert!(b.per_scale.iter().all(|(_, v)| *v == a.sup));
    let p = sobolev(SymbolKind::Identity, Regularity::Product([0.8, 0.8]), (-1, 1));
    assert!(p.per_scale.iter().all(|(_, v)| *v == p.sup));
}

#[test]
fn coifman_meyer_sobolev_norm_is_stable_in_scale_range() {
    let cm = || SymbolKind::CoifmanMeyer { decay: 1.0, cutoff: None };
    let a = sobolev(cm(), Regularity::Isotropic(1.6), (-8, 8));
    let b = sobolev(cm(), Regularity::Isotropic(1.6), (-12, 12));
    assert!(a.sup.is_finite() && a.sup > 0.0);
    assert!((a.sup - b.sup).abs() / b.sup < 0.01, "{} vs {}", a.sup, b.sup);
}

#[test]
fn sobolev_norm_rejects_bad_inputs() {
    let s = SymbolSpec::new(SymbolKind::Identity);
    let r = Regularity::Isotropic(1.0);
    assert!(sobolev_symbol_norm(&s, &r, (2, 1), &SobolevSettings::default()).is_err());
    assert!(sobolev_symbol_norm(&s, &r, (0, 1), &SobolevSettings { samples: 100, ..Default::default() }).is_err());
    assert!(sobolev_symbol_norm(&s, &r, (0, 1), &SobolevSettings { box_half_width: 1.0, ..Default::default() }).is_err());
}

#[test]
fn model_kernel_saturates_size_bound() {
    for dim in [1, 2] {
        let rep = kernel_conditions_check(&cz(KernelKind::Model { constant: 2.5 }), dim, 2000, 7).unwrap();
        assert!((rep.size_max - 2.5).abs() < 1e-9 && (rep.size_min - 2.5).abs() < 1e-9, "{rep:?}");
        assert!(!rep.size_growth_flag);
    }
}

#[test]
fn holder_kernel_smoothness_ratio_is_bounded() {
    let spec = KernelSpec { smoothness: 0.5, ..cz(KernelKind::Holder { constant: 1.0, order: 0.5 }) };
    let small = kernel_conditions_check(&spec, 1, 1000, 3).unwrap();
    let large = kernel_conditions_check(&spec, 1, 32_000, 3).unwrap();
    assert!(large.samples >= 10_000);
    assert!(large.smoothness_max.is_finite() && large.smoothness_max < 100.0, "{large:?}");
    assert!(large.smoothness_max < 2.0 * small.smoothness_max.max(1.0));
    assert!(!large.size_growth_flag);
}

#[test]
fn log_kernel_is_flagged() {
    let rep = kernel_conditions_check(&cz(KernelKind::LogModel), 1, 2000, 11).unwrap();
    assert!(rep.size_growth_flag);
    let by_scale: Vec<f64> = rep.size_by_scale.iter().map(|s| s.max).collect();
    assert!(by_scale.last().unwrap() > &(2.0 * by_scale[0]), "{by_scale:?}");
}

#[test]
fn kernel_check_rejects_bad_arguments() {
    let spec = cz(KernelKind::Model { constant: 1.0 });
    assert!(kernel_conditions_check(&spec, 3, 100, 0).is_err());
    assert!(kernel_conditions_check(&spec, 1, 0, 0).is_err());
}

#[test]
fn cutoff_and_bump_shape() {
    assert_eq!(lp_cutoff(0.5), 1.0);
    assert_eq!(lp_cutoff(1.5), 0.0);
    let mid = lp_cutoff(1.2);
    assert!(mid > 0.0 && mid < 1.0);
    assert_eq!(lp_bump(0.1, 0.2), 0.0);
    assert_eq!(lp_bump(1.5, 1.0), 0.0);
    assert!(lp_bump(0.8, 0.0) > 0.0);
}

fn values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, n)
}

fn on(g: GridSpec, v: Vec<f64>) -> GridFunction {
    GridFunction::new(1, g.n, g.half_width, v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn operators_are_bilinear(a in values(32), b in values(32), c in values(32), s in -3.0..3.0f64) {
        let g = grid(32, 1.0);
        let (fa, fb, fc) = (on(g, a), on(g, b), on(g, c));
        let ops = [
            i1(),
            OperatorSpec::CalderonZygmund { kernel: cz(KernelKind::SignedModel) },
            OperatorSpec::FourierMultiplier { symbol: SymbolSpec::new(SymbolKind::CoifmanMeyer { decay: 1.0, cutoff: None }) },
        ];
        for op in &ops {
            let t = |x: &GridFunction, y: &GridFunction| apply_operator(op, x, y).unwrap();
            let base = t(&fa, &fc).max_abs() + t(&fb, &fc).max_abs() + 1.0;
            let lhs = t(&add(&fa, &scale(&fb, s)), &fc);
            let rhs = add(&t(&fa, &fc), &scale(&t(&fb, &fc), s));
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-10 * base);
            let lhs = t(&fc, &add(&fa, &scale(&fb, s)));
            let rhs = add(&t(&fc, &fa), &scale(&t(&fc, &fb), s));
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-10 * base);
        }
    }

    #[test]
    fn fractional_integral_preserves_positivity(a in prop::collection::vec(0.0..1.0f64, 32), b in prop::collection::vec(0.0..1.0f64, 32), beta in 0.2..1.8f64) {
        let g = grid(32, 1.0);
        let out = frac(beta, &on(g, a), &on(g, b));
        prop_assert!(out.values.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn translation_symbol_shifts_the_product(a in values(64), b in values(64), m in -20i64..20) {
        let g = grid(64, 2.0);
        let (f1, f2) = (on(g, a), on(g, b));
        let shift = m as f64 * g.spacing();
        let out = apply_fourier_multiplier(&SymbolSpec::new(SymbolKind::Translation { shift }), &f1, &f2).unwrap();
        let prod = mul(&f1, &f2);
        for i in 0..64 {
            let j = (i as i64 + m).rem_euclid(64) as usize;
            prop_assert!((out.values[i] - prod.values[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn littlewood_paley_bumps_partition_unity(jmax in 3i32..10, u in 0.0..1.0f64, angle in 0.0..std::f64::consts::TAU) {
        let lo = 2f64.powi(-jmax + 2);
        let hi = 2f64.powi(jmax - 2);
        let r = lo * (hi / lo).powf(u);
        let (x1, x2) = (r * angle.cos(), r * angle.sin());
        let total: f64 = (-jmax..=jmax).map(|j| {
            let s = 2f64.powi(-j);
            lp_bump(s * x1, s * x2)
        }).sum();
        prop_assert!((total - 1.0).abs() <= 1e-6, "{total}");
    }
}
