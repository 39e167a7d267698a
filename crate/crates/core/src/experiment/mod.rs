//! Experiment configs, the preset catalog and the single entry point used by the CLI.

mod format;
mod presets;

pub use format::{fmt_f64, to_json};
pub use presets::{preset, presets, Preset};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bilinear_operators::{sobolev_symbol_norm, Regularity, SobolevSettings, SymbolSpec};
use crate::characterization::{verify_equivalence, DirectClass};
use crate::compactness_lab::{boundedness_sweep, compactness_contrast, ContrastConfig, ContrastVerdict, SweepConfig};
use crate::error::{Error, Result};
use crate::grid_quadrature::{FamilySpec, QuadratureConfig};
use crate::interpolation_solver::{solve_theta, ExtrapolationCase, Problem, SolverSettings};
use crate::weight_classes::{
    ap_constant, apq_constant, bmo_norm, membership, multilinear_ap_constant, multilinear_apq_constant,
    multilinear_aps_constant, ClassTag, ExponentVector, StabilityConfig, Verdict, WeightSpec,
};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default)]
    pub json: Option<String>,
    #[serde(default)]
    pub csv: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightConstantParams {
    pub weights: Vec<WeightSpec>,
    pub class: ClassTag,
    #[serde(default = "default_family")]
    pub family: FamilySpec,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub stability: StabilityConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharacterizeParams {
    pub weights: Vec<WeightSpec>,
    pub class: DirectClass,
    #[serde(default = "default_family")]
    pub family: FamilySpec,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub stability: StabilityConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveParams {
    pub case: ExtrapolationCase,
    pub q: ExponentVector,
    pub r: ExponentVector,
    pub v: Vec<WeightSpec>,
    pub w: Vec<WeightSpec>,
    #[serde(default)]
    pub settings: SolverSettings,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolNormParams {
    pub symbol: SymbolSpec,
    pub regularity: Regularity,
    pub j_range: (i32, i32),
    #[serde(default)]
    pub settings: SobolevSettings,
}

fn default_family() -> FamilySpec {
    FamilySpec::new(1, 4.0, 0, 10, vec![0.0, 0.5])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", content = "params", rename_all = "kebab-case")]
pub enum Experiment {
    WeightConstant(WeightConstantParams),
    Characterize(CharacterizeParams),
    SolveTheta(SolveParams),
    ProductBound(SolveParams),
    BoundednessSweep(SweepConfig),
    CompactnessContrast(ContrastConfig),
    SymbolNorm(SymbolNormParams),
}

impl Experiment {
    pub fn tag(&self) -> &'static str {
        match self {
            Experiment::WeightConstant(_) => "weight-constant",
            Experiment::Characterize(_) => "characterize",
            Experiment::SolveTheta(_) => "solve-theta",
            Experiment::ProductBound(_) => "product-bound",
            Experiment::BoundednessSweep(_) => "boundedness-sweep",
            Experiment::CompactnessContrast(_) => "compactness-contrast",
            Experiment::SymbolNorm(_) => "symbol-norm",
        }
    }
}

/// Top-level config: `{"experiment": tag, "params": {...}, "seed": n, "output": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputPaths,
}

fn config_err(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

impl ExperimentConfig {
    pub fn from_value(v: Value) -> Result<Self> {
        if let Value::Object(map) = &v {
            if let Some(k) = map.keys().find(|k| !["experiment", "params", "seed", "output"].contains(&k.as_str())) {
                return Err(config_err(format!("unknown top-level field '{k}'")));
            }
        }
        let cfg: ExperimentConfig = serde_json::from_value(v).map_err(config_err)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_value(serde_json::from_str(text).map_err(config_err)?)
    }

    /// Structural checks that need no numerical work; failures are config errors.
    pub fn validate(&self) -> Result<()> {
        let check = |r: Result<()>| r.map_err(config_err);
        match &self.experiment {
            Experiment::WeightConstant(p) => {
                check(p.family.validate())?;
                check(p.quadrature.validate())?;
                if p.weights.is_empty() {
                    return Err(config_err("at least one weight is required"));
                }
                for w in &p.weights {
                    check(w.validate())?;
                }
                let scalar = matches!(p.class, ClassTag::Ap { .. } | ClassTag::Apq { .. } | ClassTag::Bmo);
                if scalar && p.weights.len() != 1 {
                    return Err(config_err("scalar classes take exactly one weight"));
                }
                if let ClassTag::MultAp { p: e } | ClassTag::MultApS { p: e, .. } | ClassTag::MultApQ { p: e, .. } = &p.class {
                    if e.len() != p.weights.len() {
                        return Err(config_err("exponent vector and weight vector lengths differ"));
                    }
                }
                Ok(())
            }
            Experiment::Characterize(p) => {
                check(p.family.validate())?;
                for w in &p.weights {
                    check(w.validate())?;
                }
                check(p.class.criterion().map(|_| ()))
            }
            Experiment::SolveTheta(p) | Experiment::ProductBound(p) => {
                check(p.settings.family.validate())?;
                check(p.settings.quadrature.validate())?;
                check(p.settings.t_grid.validate())?;
                check(Problem::new(p.case.clone(), p.q.clone(), p.r.clone(), p.v.clone(), p.w.clone()).map(|_| ()))
            }
            Experiment::BoundednessSweep(p) => {
                if p.cases.is_empty() || p.trials.is_empty() {
                    return Err(config_err("sweep needs at least one case and one trial"));
                }
                check(p.family.validate())
            }
            Experiment::CompactnessContrast(p) => {
                if p.n_list.is_empty() || p.n_list.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(config_err("n_list must be non-empty and increasing"));
                }
                if p.k_probe < 2 {
                    return Err(config_err("k_probe must be at least 2"));
                }
                check(p.bmo_family.validate())
            }
            Experiment::SymbolNorm(p) => {
                if p.j_range.0 > p.j_range.1 {
                    return Err(config_err("empty j_range"));
                }
                Ok(())
            }
        }
    }
}

/// Apply `key=value` overrides (dotted paths; values parsed as JSON, else taken as strings).
pub fn apply_overrides(mut doc: Value, overrides: &[String]) -> Result<Value> {
    for o in overrides {
        let (key, raw) = o.split_once('=').ok_or_else(|| config_err(format!("override '{o}' is not key=value")))?;
        let value: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        let mut cur = &mut doc;
        let parts: Vec<&str> = key.split('.').collect();
        for (i, part) in parts.iter().enumerate() {
            let last = i + 1 == parts.len();
            cur = match cur {
                Value::Object(map) => {
                    if last {
                        map.insert(part.to_string(), value.clone());
                        break;
                    }
                    map.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()))
                }
                Value::Array(items) => {
                    let idx: usize = part.parse().map_err(|_| config_err(format!("'{part}' is not an array index in '{key}'")))?;
                    let len = items.len();
                    let slot = items.get_mut(idx).ok_or_else(|| config_err(format!("index {idx} out of range ({len}) in '{key}'")))?;
                    if last {
                        *slot = value.clone();
                        break;
                    }
                    slot
                }
                _ => return Err(config_err(format!("cannot descend into '{part}' of '{key}'"))),
            };
        }
    }
    Ok(doc)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Success,
    Inconclusive,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Success => 0,
            RunStatus::Inconclusive => 4,
        }
    }
}

#[derive(Serialize)]
struct Document<'a> {
    experiment: &'static str,
    status: RunStatus,
    provenance: Provenance<'a>,
    result: Value,
}

#[derive(Serialize)]
struct Provenance<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a ExperimentConfig,
}

/// Rendered artifacts of one run, not yet written anywhere.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub status: RunStatus,
    pub json: String,
    pub csv: Option<String>,
}

fn verdict_status(v: Verdict) -> RunStatus {
    if v == Verdict::Inconclusive {
        RunStatus::Inconclusive
    } else {
        RunStatus::Success
    }
}

fn weight_constant(p: &WeightConstantParams) -> Result<(RunStatus, Value)> {
    let (w, cfg) = (&p.weights, &p.quadrature);
    let report = match &p.class {
        ClassTag::Ap { p: e } => membership(|f| ap_constant(&w[0], *e, f, cfg), &p.family, &p.stability)?,
        ClassTag::Apq { p: e, q } => membership(|f| apq_constant(&w[0], *e, *q, f, cfg), &p.family, &p.stability)?,
        ClassTag::Bmo => membership(|f| bmo_norm(&|x: &[f64]| w[0].eval(x), f, cfg), &p.family, &p.stability)?,
        ClassTag::MultAp { p: e } => {
            let e = ExponentVector::new(e.clone())?;
            membership(|f| multilinear_ap_constant(w, &e, f, cfg), &p.family, &p.stability)?
        }
        ClassTag::MultApS { p: e, s } => {
            let (e, s) = (ExponentVector::new(e.clone())?, ExponentVector::new(s.clone())?);
            membership(|f| multilinear_aps_constant(w, &e, &s, f, cfg), &p.family, &p.stability)?
        }
        ClassTag::MultApQ { p: e, p_star } => {
            let e = ExponentVector::new(e.clone())?;
            membership(|f| multilinear_apq_constant(w, &e, p_star, f, cfg), &p.family, &p.stability)?
        }
    };
    Ok((verdict_status(report.verdict), serde_json::to_value(&report)?))
}

fn solve(p: &SolveParams, bounds_only: bool) -> Result<(RunStatus, Value)> {
    let mut settings = p.settings.clone();
    if bounds_only {
        settings.product_bounds = true;
    }
    match solve_theta(p.case.clone(), p.q.clone(), p.r.clone(), p.v.clone(), p.w.clone(), &settings) {
        Ok(cert) => {
            cert.revalidate()?;
            let value = if bounds_only {
                serde_json::json!({
                    "theta": crate::numeric::fmt_rat(&cert.theta),
                    "product_bounds": cert.product_bounds,
                })
            } else {
                serde_json::to_value(&cert)?
            };
            Ok((RunStatus::Success, value))
        }
        Err(Error::NoAdmissibleTheta { min_exponent, closest }) => Ok((
            RunStatus::Inconclusive,
            serde_json::json!({ "failure": "no admissible theta", "min_exponent": min_exponent, "blocking_check": closest }),
        )),
        Err(e) => Err(e),
    }
}

/// Execute a validated config and render its artifacts.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let mut csv = None;
    let (status, result) = match &cfg.experiment {
        Experiment::WeightConstant(p) => weight_constant(p)?,
        Experiment::Characterize(p) => {
            let criterion = p.class.criterion()?;
            let rep = verify_equivalence(&p.weights, &criterion, &p.class, &p.family, &p.quadrature, &p.stability)?;
            let status = if rep.agree.is_none() { RunStatus::Inconclusive } else { RunStatus::Success };
            (status, serde_json::to_value(&rep)?)
        }
        Experiment::SolveTheta(p) => solve(p, false)?,
        Experiment::ProductBound(p) => solve(p, true)?,
        Experiment::BoundednessSweep(p) => (RunStatus::Success, serde_json::to_value(boundedness_sweep(p)?)?),
        Experiment::CompactnessContrast(p) => {
            let rep = compactness_contrast(p)?;
            csv = Some(rep.csv(fmt_f64));
            let status = if rep.verdict == ContrastVerdict::Inconclusive { RunStatus::Inconclusive } else { RunStatus::Success };
            (status, serde_json::to_value(&rep)?)
        }
        Experiment::SymbolNorm(p) => {
            (RunStatus::Success, serde_json::to_value(sobolev_symbol_norm(&p.symbol, &p.regularity, p.j_range, &p.settings)?)?)
        }
    };
    let doc = Document {
        experiment: cfg.experiment.tag(),
        status,
        provenance: Provenance { tool: "wextrap", version: env!("CARGO_PKG_VERSION"), config: cfg },
        result,
    };
    Ok(RunOutput { status, json: to_json(&doc)?, csv })
}
