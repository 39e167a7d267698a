use serde::Serialize;

use super::{
    CharacterizeParams, Experiment, ExperimentConfig, OutputPaths, SolveParams, SymbolNormParams, WeightConstantParams,
};
use crate::bilinear_operators::{
    CommutatorSpec, CommutatorSymbol, KernelKind, KernelSpec, MultiIndex, OperatorSpec, Regularity, ScalarFn,
    SymbolClass, SymbolKind, SymbolSpec,
};
use crate::characterization::DirectClass;
use crate::compactness_lab::{ContrastConfig, MapTarget, SweepCase, SweepConfig};
use crate::grid_quadrature::{FamilySpec, QuadratureConfig};
use crate::interpolation_solver::{ExtrapolationCase, SolverSettings};
use crate::numeric::rat;
use crate::weight_classes::{ClassTag, ExponentVector, StabilityConfig, WeightSpec};

#[derive(Clone, Debug, Serialize)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub config: ExperimentConfig,
}

fn exps(items: &[&str]) -> ExponentVector {
    ExponentVector::parse(items).expect("preset exponents are valid")
}

fn pw(a: f64) -> WeightSpec {
    WeightSpec::power_at_origin(1, a)
}

fn config(name: &str, experiment: Experiment, csv: bool) -> ExperimentConfig {
    ExperimentConfig {
        experiment,
        seed: 0,
        output: OutputPaths {
            json: Some(format!("{name}.json")),
            csv: csv.then(|| format!("{name}.csv")),
        },
    }
}

fn diagonal(componentwise: bool) -> SolveParams {
    let s = exps(&["1", "1"]);
    SolveParams {
        case: if componentwise {
            ExtrapolationCase::DiagonalComponentwise { s }
        } else {
            ExtrapolationCase::DiagonalVector { s }
        },
        q: exps(&["3", "3"]),
        r: exps(&["5/2", "5/2"]),
        v: vec![pw(0.2), pw(0.2)],
        w: vec![pw(0.2), pw(0.2)],
        settings: SolverSettings::default(),
    }
}

fn off_diagonal(componentwise: bool) -> SolveParams {
    let alpha = rat(1, 4);
    SolveParams {
        case: if componentwise {
            ExtrapolationCase::OffDiagonalComponentwise { alpha }
        } else {
            ExtrapolationCase::OffDiagonalVector { alpha }
        },
        q: exps(&["2", "2"]),
        r: exps(&["4", "4"]),
        v: vec![pw(0.1), pw(0.1)],
        w: vec![pw(0.2), pw(0.2)],
        settings: SolverSettings::default(),
    }
}

fn contrast(base: OperatorSpec) -> ContrastConfig {
    ContrastConfig { base, ..ContrastConfig::default() }
}

fn sweep() -> SweepConfig {
    let base = OperatorSpec::FractionalIntegral { beta: 1.0, convention: Default::default() };
    let b = [
        CommutatorSymbol { function: ScalarFn::log_abs(), class: SymbolClass::BmoNotCmo },
        CommutatorSymbol { function: ScalarFn::Constant { value: 0.0 }, class: SymbolClass::Custom },
    ];
    let case = |label: &str, a: f64| SweepCase {
        label: label.into(),
        input_weights: [pw(a), pw(a)],
        output_weight: pw(2.0 * a * 2.0 / 3.0),
        class: Some(DirectClass::MultApQ { p: exps(&["3", "3"]), p_star: rat(3, 1) }),
    };
    SweepConfig {
        operator: MapTarget::Commutator { commutator: CommutatorSpec { base, alpha: MultiIndex::First, b } },
        exponents: [3.0, 3.0, 3.0],
        dim: 1,
        n: 128,
        half_width: 4.0,
        cases: vec![case("unweighted", 0.0), case("power-0.3", 0.3), case("power-1.5", 1.5)],
        trials: vec![
            [ScalarFn::bump(0.0, 1.0), ScalarFn::bump(0.0, 1.0)],
            [ScalarFn::bump(0.5, 0.5), ScalarFn::bump(-0.5, 0.5)],
            [ScalarFn::Indicator { lo: -0.25, hi: 0.25 }, ScalarFn::Indicator { lo: -1.0, hi: 1.0 }],
        ],
        family: FamilySpec::new(1, 4.0, 0, 8, vec![0.0, 0.5]),
        quadrature: QuadratureConfig::default(),
        stability: StabilityConfig::default(),
    }
}

/// The built-in experiment catalog.
pub fn presets() -> Vec<Preset> {
    let family = FamilySpec::new(1, 4.0, 0, 10, vec![0.0, 0.5]);
    let mut out = Vec::new();
    let mut add = |name: &'static str, description: &'static str, experiment: Experiment, csv: bool| {
        out.push(Preset { name, description, config: config(name, experiment, csv) });
    };
    add(
        "ap-power-weight",
        "A_2 constant of |x|^0.5 on the dyadic family of [-4, 4]",
        Experiment::WeightConstant(WeightConstantParams {
            weights: vec![pw(0.5)],
            class: ClassTag::Ap { p: 2.0 },
            family: family.clone(),
            quadrature: QuadratureConfig::default(),
            stability: StabilityConfig::default(),
        }),
        false,
    );
    add(
        "thm4.2-characterize",
        "Bilinear A_{p/s} membership against the componentwise criterion",
        Experiment::Characterize(CharacterizeParams {
            weights: vec![pw(0.4), pw(-0.3)],
            class: DirectClass::MultApS { p: exps(&["3", "2"]), s: exps(&["1", "1"]) },
            family: family.clone(),
            quadrature: QuadratureConfig::default(),
            stability: StabilityConfig::default(),
        }),
        false,
    );
    add(
        "thm4.3-characterize",
        "Bilinear A_{p,p*} membership against the componentwise criterion",
        Experiment::Characterize(CharacterizeParams {
            weights: vec![pw(0.2), pw(0.3)],
            class: DirectClass::MultApQ { p: exps(&["2", "2"]), p_star: rat(2, 1) },
            family,
            quadrature: QuadratureConfig::default(),
            stability: StabilityConfig::default(),
        }),
        false,
    );
    add(
        "thm4.5-sweep",
        "Weighted norm ratios of a fractional-integral commutator over power-weight cases",
        Experiment::BoundednessSweep(sweep()),
        false,
    );
    add(
        "lemma5.1-certificate",
        "Diagonal vector case: q = (3, 3), r = (5/2, 5/2), s = (1, 1), weights |x|^0.2",
        Experiment::SolveTheta(diagonal(false)),
        false,
    );
    add(
        "lemma5.1-product-bound",
        "Product-bound check for the diagonal vector certificate",
        Experiment::ProductBound(diagonal(false)),
        false,
    );
    add(
        "lemma5.2-offdiagonal",
        "Off-diagonal vector case: alpha = 1/4, q = (2, 2), r = (4, 4), v = |x|^0.1, w = |x|^0.2",
        Experiment::SolveTheta(off_diagonal(false)),
        false,
    );
    add(
        "lemma5.3-componentwise",
        "Diagonal componentwise case on the diagonal vector data",
        Experiment::SolveTheta(diagonal(true)),
        false,
    );
    add(
        "lemma5.4-componentwise",
        "Off-diagonal componentwise case on the off-diagonal vector data",
        Experiment::SolveTheta(off_diagonal(true)),
        false,
    );
    add(
        "thm6.4-contrast",
        "Approximation-number contrast for a truncated model Calderon-Zygmund kernel",
        Experiment::CompactnessContrast(contrast(OperatorSpec::CalderonZygmund {
            kernel: KernelSpec::new(KernelKind::Model { constant: 1.0 }),
        })),
        true,
    );
    add(
        "thm7.3-contrast",
        "Approximation-number contrast for I_1 in d = 1, CMO bump against log|x|",
        Experiment::CompactnessContrast(contrast(OperatorSpec::FractionalIntegral {
            beta: 1.0,
            convention: Default::default(),
        })),
        true,
    );
    add(
        "thm8.4-contrast",
        "Approximation-number contrast for a Coifman-Meyer multiplier, CMO bump against log|x|",
        Experiment::CompactnessContrast(contrast(OperatorSpec::FourierMultiplier {
            symbol: SymbolSpec::new(SymbolKind::CoifmanMeyer { decay: 1.0, cutoff: None }),
        })),
        true,
    );
    add(
        "thm8.1-symbol-norm",
        "Localized Sobolev norm of a Coifman-Meyer symbol",
        Experiment::SymbolNorm(SymbolNormParams {
            symbol: SymbolSpec::new(SymbolKind::CoifmanMeyer { decay: 1.0, cutoff: None }),
            regularity: Regularity::Isotropic(1.5),
            j_range: (-4, 4),
            settings: Default::default(),
        }),
        false,
    );
    out
}

pub fn preset(name: &str) -> Option<Preset> {
    presets().into_iter().find(|p| p.name == name)
}
