//! Discretized bilinear operators and their commutators with multiplication symbols.

mod kernel;
mod multiplier;

pub use kernel::{kernel_conditions_check, FractionalConvention, KernelConditionsReport, KernelKind, KernelSpec, ScaleMax};
pub use multiplier::{
    apply_fourier_multiplier, apply_scalar_multiplier, lp_bump, lp_cutoff, sobolev_symbol_norm, Regularity,
    ScalarMultiplier, SobolevReport, SobolevSettings, SymbolKind, SymbolSpec,
};

pub(crate) use kernel::KernelOperator;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid_quadrature::{GridFunction, GridSpec};
use crate::weight_classes::WeightSpec;

fn radius(x: &[f64], c: &[f64]) -> f64 {
    x.iter().enumerate().map(|(i, a)| (a - c.get(i).copied().unwrap_or(0.0)).powi(2)).sum::<f64>().sqrt()
}

/// Pointwise functions used as inputs and commutator symbols.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScalarFn {
    Constant { value: f64 },
    /// `amplitude * exp(1 - 1/(1 - (|x - c|/r)^2))` inside the ball, zero outside.
    Bump { center: Vec<f64>, radius: f64, amplitude: f64 },
    /// `amplitude * ln |x - c|`.
    LogAbs { center: Vec<f64>, #[serde(default = "unit")] amplitude: f64 },
    /// Indicator of the box `[lo, hi]^d`.
    Indicator { lo: f64, hi: f64 },
    Gaussian { center: Vec<f64>, width: f64 },
    /// `cos(2 pi frequency x_1)`.
    Cosine { frequency: f64 },
    Weight { weight: WeightSpec },
    Scaled { factor: f64, inner: Box<ScalarFn> },
}

fn unit() -> f64 {
    1.0
}

impl ScalarFn {
    pub fn bump(center: f64, radius: f64) -> Self {
        ScalarFn::Bump { center: vec![center], radius, amplitude: 1.0 }
    }

    pub fn log_abs() -> Self {
        ScalarFn::LogAbs { center: vec![0.0], amplitude: 1.0 }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            ScalarFn::Scaled { factor: f, inner } => ScalarFn::Scaled { factor: f * factor, inner: inner.clone() },
            other => ScalarFn::Scaled { factor, inner: Box::new(other.clone()) },
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            ScalarFn::Constant { value } => *value,
            ScalarFn::Bump { center, radius: r, amplitude } => {
                let t = radius(x, center) / r;
                if t >= 1.0 {
                    0.0
                } else {
                    amplitude * (1.0 - 1.0 / (1.0 - t * t)).exp()
                }
            }
            ScalarFn::LogAbs { center, amplitude } => amplitude * radius(x, center).max(f64::MIN_POSITIVE).ln(),
            ScalarFn::Indicator { lo, hi } => {
                if x.iter().all(|v| v >= lo && v <= hi) {
                    1.0
                } else {
                    0.0
                }
            }
            ScalarFn::Gaussian { center, width } => (-(radius(x, center) / width).powi(2)).exp(),
            ScalarFn::Cosine { frequency } => (2.0 * std::f64::consts::PI * frequency * x[0]).cos(),
            ScalarFn::Weight { weight } => weight.eval(x),
            ScalarFn::Scaled { factor, inner } => factor * inner.eval(x),
        }
    }

    pub fn sample(&self, grid: GridSpec) -> GridFunction {
        GridFunction::from_fn(grid, |x| self.eval(x))
    }

    /// Smooth with compact support inside `[-L/2, L/2]^d`.
    pub fn is_cmo_like(&self, half_width: f64) -> bool {
        match self {
            ScalarFn::Constant { .. } => true,
            ScalarFn::Bump { center, radius: r, .. } => center.iter().all(|c| c.abs() + r <= half_width / 2.0),
            ScalarFn::Scaled { inner, .. } => inner.is_cmo_like(half_width),
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "operator", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OperatorSpec {
    Zero,
    FractionalIntegral {
        beta: f64,
        #[serde(default)]
        convention: FractionalConvention,
    },
    CalderonZygmund {
        kernel: KernelSpec,
    },
    FourierMultiplier {
        symbol: SymbolSpec,
    },
    /// `phi(x) <f1, psi1> <f2, psi2>`.
    RankOne {
        phi: ScalarFn,
        psi1: ScalarFn,
        psi2: ScalarFn,
    },
}

impl OperatorSpec {
    pub fn describe(&self) -> String {
        match self {
            OperatorSpec::Zero => "zero".into(),
            OperatorSpec::FractionalIntegral { beta, convention } => format!("I_{beta} ({convention:?})"),
            OperatorSpec::CalderonZygmund { kernel } => format!("CZ {:?} rho={} cells", kernel.kernel, kernel.truncation_cells),
            OperatorSpec::FourierMultiplier { symbol } => format!("T_sigma {:?}", symbol.symbol),
            OperatorSpec::RankOne { .. } => "rank-one".into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            OperatorSpec::FractionalIntegral { beta, .. } if !(*beta > 0.0) => invalid("beta must be positive"),
            OperatorSpec::CalderonZygmund { kernel } => kernel.validate(),
            _ => Ok(()),
        }
    }

    pub(crate) fn kernel_operator(&self, grid: GridSpec) -> Result<Option<KernelOperator>> {
        Ok(match self {
            OperatorSpec::FractionalIntegral { beta, convention } => Some(KernelOperator::fractional(*beta, *convention, grid)?),
            OperatorSpec::CalderonZygmund { kernel } => Some(KernelOperator::truncated(kernel, grid)?),
            _ => None,
        })
    }
}

fn check_pair(f1: &GridFunction, f2: &GridFunction) -> Result<()> {
    if !f1.same_grid(f2) {
        return invalid("inputs must share one grid");
    }
    Ok(())
}

pub fn apply_fractional_integral(
    beta: f64,
    convention: FractionalConvention,
    f1: &GridFunction,
    f2: &GridFunction,
) -> Result<GridFunction> {
    check_pair(f1, f2)?;
    Ok(KernelOperator::fractional(beta, convention, f1.grid())?.apply_with(f1, f2, None))
}

/// Truncated form `T_rho` with `rho = truncation_cells * h`.
pub fn apply_cz_kernel(kernel: &KernelSpec, f1: &GridFunction, f2: &GridFunction) -> Result<GridFunction> {
    check_pair(f1, f2)?;
    Ok(KernelOperator::truncated(kernel, f1.grid())?.apply_with(f1, f2, None))
}

pub fn apply_operator(op: &OperatorSpec, f1: &GridFunction, f2: &GridFunction) -> Result<GridFunction> {
    check_pair(f1, f2)?;
    op.validate()?;
    match op {
        OperatorSpec::Zero => Ok(GridFunction::zeros(f1.grid())),
        OperatorSpec::FractionalIntegral { beta, convention } => apply_fractional_integral(*beta, *convention, f1, f2),
        OperatorSpec::CalderonZygmund { kernel } => apply_cz_kernel(kernel, f1, f2),
        OperatorSpec::FourierMultiplier { symbol } => apply_fourier_multiplier(symbol, f1, f2),
        OperatorSpec::RankOne { phi, psi1, psi2 } => {
            let g = f1.grid();
            let pair = |f: &GridFunction, psi: &ScalarFn| {
                f.values.iter().enumerate().map(|(i, v)| v * psi.eval(&g.node(i)[..g.dim])).sum::<f64>() * g.cell_volume()
            };
            let c = pair(f1, psi1) * pair(f2, psi2);
            Ok(GridFunction::from_fn(g, |x| c * phi.eval(x)))
        }
    }
}

/// Multi-index of a commutator: `(1,0)`, `(0,1)` or `(1,1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "[u8; 2]", into = "[u8; 2]")]
pub enum MultiIndex {
    First,
    Second,
    Both,
}

impl TryFrom<[u8; 2]> for MultiIndex {
    type Error = String;
    fn try_from(a: [u8; 2]) -> std::result::Result<Self, String> {
        match a {
            [1, 0] => Ok(MultiIndex::First),
            [0, 1] => Ok(MultiIndex::Second),
            [1, 1] => Ok(MultiIndex::Both),
            other => Err(format!("multi-index must be [1,0], [0,1] or [1,1], got {other:?}")),
        }
    }
}

impl From<MultiIndex> for [u8; 2] {
    fn from(m: MultiIndex) -> Self {
        match m {
            MultiIndex::First => [1, 0],
            MultiIndex::Second => [0, 1],
            MultiIndex::Both => [1, 1],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymbolClass {
    /// Smooth, compactly supported inside `[-L/2, L/2]^d`.
    CmoLike,
    /// `log |x|`: in BMO, not in CMO.
    BmoNotCmo,
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommutatorSymbol {
    pub function: ScalarFn,
    pub class: SymbolClass,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommutatorSpec {
    pub base: OperatorSpec,
    pub alpha: MultiIndex,
    pub b: [CommutatorSymbol; 2],
}

impl CommutatorSpec {
    pub fn validate(&self, half_width: f64) -> Result<()> {
        self.base.validate()?;
        for (i, s) in self.b.iter().enumerate() {
            let ok = match s.class {
                SymbolClass::CmoLike => s.function.is_cmo_like(half_width),
                SymbolClass::BmoNotCmo => matches!(s.function, ScalarFn::LogAbs { .. })
                    || matches!(&s.function, ScalarFn::Scaled { inner, .. } if matches!(**inner, ScalarFn::LogAbs { .. })),
                SymbolClass::Custom => true,
            };
            if !ok {
                return invalid(format!("symbol b_{} does not match its class tag {:?}", i + 1, s.class));
            }
        }
        Ok(())
    }
}

fn times(b: &GridFunction, f: &GridFunction) -> GridFunction {
    let mut out = f.clone();
    out.values.iter_mut().zip(&b.values).for_each(|(v, w)| *v *= w);
    out
}

fn minus(a: &GridFunction, b: &GridFunction) -> GridFunction {
    let mut out = a.clone();
    out.values.iter_mut().zip(&b.values).for_each(|(v, w)| *v -= w);
    out
}

fn first_commutator(op: &OperatorSpec, b: &GridFunction, f1: &GridFunction, f2: &GridFunction) -> Result<GridFunction> {
    Ok(minus(&times(b, &apply_operator(op, f1, f2)?), &apply_operator(op, &times(b, f1), f2)?))
}

fn second_commutator(op: &OperatorSpec, b: &GridFunction, f1: &GridFunction, f2: &GridFunction) -> Result<GridFunction> {
    Ok(minus(&times(b, &apply_operator(op, f1, f2)?), &apply_operator(op, f1, &times(b, f2))?))
}

/// `[T, b]_alpha (f1, f2)` by composing operator applications with pointwise products.
pub fn commutator(spec: &CommutatorSpec, f1: &GridFunction, f2: &GridFunction) -> Result<GridFunction> {
    check_pair(f1, f2)?;
    spec.validate(f1.half_width)?;
    let g = f1.grid();
    let b1 = spec.b[0].function.sample(g);
    let b2 = spec.b[1].function.sample(g);
    match spec.alpha {
        MultiIndex::First => first_commutator(&spec.base, &b1, f1, f2),
        MultiIndex::Second => second_commutator(&spec.base, &b2, f1, f2),
        MultiIndex::Both => {
            // [[T, b]_{e1}, b]_{e2}
            let inner = first_commutator(&spec.base, &b1, f1, f2)?;
            let shifted = first_commutator(&spec.base, &b1, f1, &times(&b2, f2))?;
            Ok(minus(&times(&b2, &inner), &shifted))
        }
    }
}

/// Kernel-side modifier `(b1(x) - b1(y1))^{a1} (b2(x) - b2(y2))^{a2}` at node indices.
pub(crate) fn commutator_modifier(alpha: MultiIndex, b1: Vec<f64>, b2: Vec<f64>) -> impl Fn(usize, usize, usize) -> f64 + Sync {
    move |x, y1, y2| match alpha {
        MultiIndex::First => b1[x] - b1[y1],
        MultiIndex::Second => b2[x] - b2[y2],
        MultiIndex::Both => (b1[x] - b1[y1]) * (b2[x] - b2[y2]),
    }
}

/// Same commutator evaluated in one pass with the modified kernel; kernel operators only.
pub fn commutator_kernel_form(spec: &CommutatorSpec, f1: &GridFunction, f2: &GridFunction) -> Result<GridFunction> {
    check_pair(f1, f2)?;
    spec.validate(f1.half_width)?;
    let g = f1.grid();
    let Some(k) = spec.base.kernel_operator(g)? else {
        return invalid("kernel form needs a kernel operator");
    };
    let m = commutator_modifier(spec.alpha, spec.b[0].function.sample(g).values, spec.b[1].function.sample(g).values);
    Ok(k.apply_with(f1, f2, Some(&m)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationStep {
    pub cells: f64,
    /// Largest change from the previous radius.
    pub change: f64,
    /// Absolute contribution of the annulus between the two radii.
    pub tail_bound: f64,
}

/// Compare `T_rho` across truncation radii (in cells, decreasing).
pub fn truncation_sweep(kernel: &KernelSpec, cells: &[f64], f1: &GridFunction, f2: &GridFunction) -> Result<Vec<TruncationStep>> {
    check_pair(f1, f2)?;
    let g = f1.grid();
    let h = g.spacing();
    let mut out = Vec::new();
    let mut prev: Option<(f64, GridFunction)> = None;
    for &c in cells {
        let spec = KernelSpec { truncation_cells: c, ..kernel.clone() };
        let cur = apply_cz_kernel(&spec, f1, f2)?;
        if let Some((pc, pv)) = &prev {
            let (outer, inner) = ((pc * h).max(c * h), (pc * h).min(c * h));
            let op = KernelOperator::truncated(&KernelSpec { truncation_cells: inner / h, ..kernel.clone() }, g)?;
            let mut bound = 0.0f64;
            for xi in 0..g.len() {
                let xn = g.node(xi);
                let mut acc = 0.0;
                op.sweep(xi, |j1, j2, k| {
                    let (y1, y2) = (g.node(j1), g.node(j2));
                    let r2: f64 = (0..g.dim).map(|a| (xn[a] - y1[a]).powi(2) + (xn[a] - y2[a]).powi(2)).sum();
                    if r2 <= outer * outer {
                        acc += (k * f1.values[j1] * f2.values[j2]).abs();
                    }
                });
                bound = bound.max(acc);
            }
            out.push(TruncationStep { cells: c, change: cur.max_abs_diff(pv), tail_bound: bound });
        }
        prev = Some((c, cur));
    }
    Ok(out)
}
