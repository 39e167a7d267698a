//! Finite-dimensional surrogates of bilinear maps: approximation numbers, compactness
//! contrast between CMO-like and BMO symbols, and weighted boundedness sweeps.
//!
//! All approximation numbers are taken in weighted `L^2` norms: inputs and output are
//! rescaled by the square roots of their weights whatever the nominal exponents are.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bilinear_operators::{
    apply_operator, commutator, commutator_modifier, CommutatorSpec, CommutatorSymbol, MultiIndex, OperatorSpec, ScalarFn,
    SymbolClass,
};
use crate::characterization::DirectClass;
use crate::error::{invalid, Error, Result};
use crate::grid_quadrature::{weighted_lp_norm, CubeFamily, FamilySpec, GridFunction, GridSpec, QuadratureConfig};
use crate::weight_classes::{bmo_norm, MembershipReport, StabilityConfig, WeightSpec};

/// Input basis for each slot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "basis", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Basis {
    /// Indicators of `cells` equal subintervals (per axis) of the grid.
    Indicator { cells: usize },
    /// `1, cos(pi k x / L), sin(pi k x / L)` for `k = 1..modes`; `2 modes + 1` functions.
    Fourier { modes: usize },
}

impl Default for Basis {
    fn default() -> Self {
        Basis::Indicator { cells: 32 }
    }
}

impl Basis {
    pub fn size(&self, dim: usize) -> usize {
        match self {
            Basis::Indicator { cells } => cells.pow(dim as u32),
            Basis::Fourier { modes } => 2 * modes + 1,
        }
    }

    fn validate(&self, grid: &GridSpec) -> Result<()> {
        match self {
            Basis::Indicator { cells } => {
                if *cells == 0 || grid.n % cells != 0 {
                    return invalid(format!("indicator cells {cells} must divide the grid size {}", grid.n));
                }
            }
            Basis::Fourier { modes } => {
                if grid.dim != 1 {
                    return invalid("Fourier basis is one-dimensional");
                }
                if 2 * modes + 1 > grid.n {
                    return invalid("too many Fourier modes for the grid");
                }
            }
        }
        Ok(())
    }

    /// Coarse cell of node `i`, for indicator bases.
    fn cell_of(&self, grid: &GridSpec, i: usize) -> usize {
        let Basis::Indicator { cells } = self else { unreachable!() };
        let ratio = grid.n / cells;
        match grid.dim {
            1 => i / ratio,
            _ => (i / grid.n / ratio) * cells + (i % grid.n) / ratio,
        }
    }

    pub fn function(&self, grid: &GridSpec, k: usize) -> GridFunction {
        match self {
            Basis::Indicator { .. } => {
                let mut f = GridFunction::zeros(*grid);
                for i in 0..grid.len() {
                    if self.cell_of(grid, i) == k {
                        f.values[i] = 1.0;
                    }
                }
                f
            }
            Basis::Fourier { .. } => {
                let l = grid.half_width;
                GridFunction::from_fn(*grid, |x| {
                    let m = k.div_ceil(2) as f64;
                    let t = std::f64::consts::PI * m * x[0] / l;
                    match k {
                        0 => 1.0,
                        _ if k % 2 == 1 => t.cos(),
                        _ => t.sin(),
                    }
                })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "target", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MapTarget {
    Operator { operator: OperatorSpec },
    Commutator { commutator: CommutatorSpec },
}

impl MapTarget {
    pub fn describe(&self) -> String {
        match self {
            MapTarget::Operator { operator } => operator.describe(),
            MapTarget::Commutator { commutator } => {
                let a: [u8; 2] = commutator.alpha.into();
                format!("[{}, b]_({},{})", commutator.base.describe(), a[0], a[1])
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscretizeSettings {
    pub dim: usize,
    pub n: usize,
    pub half_width: f64,
    pub basis: Basis,
    pub input_weights: [WeightSpec; 2],
    pub output_weight: WeightSpec,
    /// Upper bound on `n1 * n2 * N^d`.
    pub budget: usize,
}

impl Default for DiscretizeSettings {
    fn default() -> Self {
        DiscretizeSettings {
            dim: 1,
            n: 64,
            half_width: 4.0,
            basis: Basis::default(),
            input_weights: [WeightSpec::constant(1.0), WeightSpec::constant(1.0)],
            output_weight: WeightSpec::constant(1.0),
            budget: 1 << 25,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DiscretizedBilinearMap {
    pub grid: GridSpec,
    pub basis: Basis,
    pub sizes: (usize, usize),
    /// Column `a * n2 + b` holds `T(phi_a, phi_b)` at the grid nodes.
    pub raw: DMatrix<f64>,
    /// Representation in the weighted `L^2` surrogate norms.
    pub scaled: DMatrix<f64>,
    pub descriptor: String,
}

impl DiscretizedBilinearMap {
    pub fn column(&self, a: usize, b: usize) -> Vec<f64> {
        self.raw.column(a * self.sizes.1 + b).iter().copied().collect()
    }
}

/// Lower Cholesky factor inverse-transposed: `c = L^{-T} e` maps Euclidean `e` onto coefficients.
fn gram_transform(basis: &Basis, grid: &GridSpec, w: &WeightSpec) -> Result<DMatrix<f64>> {
    let n = basis.size(grid.dim);
    let funcs: Vec<GridFunction> = (0..n).map(|k| basis.function(grid, k)).collect();
    let wv: Vec<f64> = (0..grid.len()).map(|i| w.eval(&grid.node(i)[..grid.dim])).collect();
    if wv.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return invalid("input weight must be positive and finite at every node");
    }
    let vol = grid.cell_volume();
    let gram = DMatrix::from_fn(n, n, |a, b| {
        funcs[a].values.iter().zip(&funcs[b].values).zip(&wv).map(|((x, y), w)| x * y * w).sum::<f64>() * vol
    });
    let chol = gram.cholesky().ok_or_else(|| Error::Degenerate("basis Gram matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv = l.try_inverse().ok_or_else(|| Error::Degenerate("singular Cholesky factor".into()))?;
    Ok(linv.transpose())
}

fn kernel_columns(
    op: &crate::bilinear_operators::KernelOperator,
    basis: &Basis,
    grid: &GridSpec,
    n2: usize,
    modifier: Option<&(dyn Fn(usize, usize, usize) -> f64 + Sync)>,
    cols: usize,
) -> DMatrix<f64> {
    let cells: Vec<usize> = (0..grid.len()).map(|i| basis.cell_of(grid, i)).collect();
    let rows: Vec<Vec<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|xi| {
            let mut row = vec![0.0; cols];
            match modifier {
                None => op.sweep(xi, |j1, j2, k| row[cells[j1] * n2 + cells[j2]] += k),
                Some(m) => op.sweep(xi, |j1, j2, k| row[cells[j1] * n2 + cells[j2]] += k * m(xi, j1, j2)),
            }
            row
        })
        .collect();
    DMatrix::from_fn(grid.len(), cols, |i, j| rows[i][j])
}

/// Linearize `(f1, f2) -> T(f1, f2)` on pairs of basis functions.
pub fn discretize(target: &MapTarget, settings: &DiscretizeSettings) -> Result<DiscretizedBilinearMap> {
    let grid = GridSpec::new(settings.dim, settings.n, settings.half_width)?;
    settings.basis.validate(&grid)?;
    let n1 = settings.basis.size(grid.dim);
    let n2 = n1;
    let cols = n1 * n2;
    if cols.saturating_mul(grid.len()) > settings.budget {
        return Err(Error::Budget(format!(
            "representation needs {} entries, budget is {}",
            cols.saturating_mul(grid.len()),
            settings.budget
        )));
    }
    let (base, comm) = match target {
        MapTarget::Operator { operator } => (operator, None),
        MapTarget::Commutator { commutator } => {
            commutator.validate(grid.half_width)?;
            (&commutator.base, Some(commutator))
        }
    };
    base.validate()?;
    let kernel = match settings.basis {
        Basis::Indicator { .. } => base.kernel_operator(grid)?,
        Basis::Fourier { .. } => None,
    };
    let raw = if let Some(k) = kernel {
        match comm {
            None => kernel_columns(&k, &settings.basis, &grid, n2, None, cols),
            Some(c) => {
                let m = commutator_modifier(c.alpha, c.b[0].function.sample(grid).values, c.b[1].function.sample(grid).values);
                kernel_columns(&k, &settings.basis, &grid, n2, Some(&m), cols)
            }
        }
    } else {
        let funcs: Vec<GridFunction> = (0..n1).map(|k| settings.basis.function(&grid, k)).collect();
        let columns: Vec<Vec<f64>> = (0..cols)
            .into_par_iter()
            .map(|c| {
                let (a, b) = (c / n2, c % n2);
                let out = match comm {
                    None => apply_operator(base, &funcs[a], &funcs[b])?,
                    Some(cs) => commutator(cs, &funcs[a], &funcs[b])?,
                };
                Ok(out.values)
            })
            .collect::<Result<_>>()?;
        DMatrix::from_fn(grid.len(), cols, |i, j| columns[j][i])
    };
    let m1 = gram_transform(&settings.basis, &grid, &settings.input_weights[0])?;
    let m2 = gram_transform(&settings.basis, &grid, &settings.input_weights[1])?;
    let vol = grid.cell_volume();
    let mut scaled = DMatrix::zeros(grid.len(), cols);
    for i in 0..grid.len() {
        let nu = settings.output_weight.eval(&grid.node(i)[..grid.dim]);
        if !(nu.is_finite() && nu > 0.0) {
            return invalid("output weight must be positive and finite at every node");
        }
        let r = DMatrix::from_fn(n1, n2, |a, b| raw[(i, a * n2 + b)]);
        let t = m1.transpose() * r * &m2;
        let d = (nu * vol).sqrt();
        for a in 0..n1 {
            for b in 0..n2 {
                scaled[(i, a * n2 + b)] = d * t[(a, b)];
            }
        }
    }
    Ok(DiscretizedBilinearMap { grid, basis: settings.basis.clone(), sizes: (n1, n2), raw, scaled, descriptor: target.describe() })
}

pub const NORM_CONVENTION: &str = "weighted-L2 surrogate";

/// Relative size `a_k / a_1` below which the tail counts as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxNumberReport {
    pub n: usize,
    /// `a_1 >= a_2 >= ...`, zero-padded past the rank of the representation.
    pub values: Vec<f64>,
    pub convention: String,
    pub descriptor: String,
}

impl ApproxNumberReport {
    /// `a_k / a_1` (1-based `k`); zero for the zero map.
    pub fn tail(&self, k: usize) -> f64 {
        let a1 = self.values.first().copied().unwrap_or(0.0);
        if a1 == 0.0 {
            0.0
        } else {
            self.values.get(k - 1).copied().unwrap_or(0.0) / a1
        }
    }
}

/// Singular values of an arbitrary matrix, descending.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn approximation_numbers(map: &DiscretizedBilinearMap, k_max: usize) -> ApproxNumberReport {
    let mut values = singular_values(&map.scaled);
    values.resize(k_max, 0.0);
    ApproxNumberReport { n: map.grid.n, values, convention: NORM_CONVENTION.into(), descriptor: map.descriptor.clone() }
}

/// Randomized power iteration for the largest singular value.
pub fn power_iteration_norm(m: &DMatrix<f64>, iterations: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = DVector::from_fn(m.ncols(), |_, _| rng.gen_range(-1.0..1.0));
    let mut est = 0.0;
    for _ in 0..iterations {
        let nv = v.norm();
        if nv == 0.0 {
            return 0.0;
        }
        v /= nv;
        let w = m.transpose() * (m * &v);
        est = w.norm().sqrt();
        v = w;
    }
    est
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContrastConfig {
    pub base: OperatorSpec,
    pub alpha: MultiIndex,
    pub b_cmo: ScalarFn,
    pub b_bmo: ScalarFn,
    pub n_list: Vec<usize>,
    pub k_probe: usize,
    pub discretization: DiscretizeSettings,
    pub contrast_factor: f64,
    /// Rescale `b_cmo` so both symbols have the same measured BMO norm.
    pub match_amplitude: bool,
    pub bmo_family: FamilySpec,
    pub quadrature: QuadratureConfig,
}

impl Default for ContrastConfig {
    fn default() -> Self {
        ContrastConfig {
            base: OperatorSpec::FractionalIntegral { beta: 1.0, convention: Default::default() },
            alpha: MultiIndex::First,
            b_cmo: ScalarFn::bump(0.0, 0.25),
            b_bmo: ScalarFn::log_abs(),
            n_list: vec![64, 128, 256],
            k_probe: 16,
            discretization: DiscretizeSettings::default(),
            contrast_factor: 2.0,
            match_amplitude: true,
            bmo_family: FamilySpec::new(1, 4.0, 0, 10, vec![0.0, 0.5]),
            quadrature: QuadratureConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContrastVerdict {
    Confirmed,
    Inconclusive,
    /// Both tails vanish (finite-rank commutators); nothing to compare.
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContrastRow {
    pub n: usize,
    pub cmo: ApproxNumberReport,
    pub bmo: ApproxNumberReport,
    pub cmo_tail: f64,
    pub bmo_tail: f64,
    /// `cmo_tail < bmo_tail / contrast_factor`.
    pub separated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContrastReport {
    pub rows: Vec<ContrastRow>,
    pub bmo_norm_cmo_symbol: f64,
    pub bmo_norm_bmo_symbol: f64,
    pub amplitude_factor: f64,
    pub cmo_tail_nonincreasing: bool,
    pub verdict: ContrastVerdict,
    pub convention: String,
}

impl ContrastReport {
    /// Rows `N,symbol_class,k,a_k,a_k_over_a1` with the given float formatter.
    pub fn csv(&self, fmt: impl Fn(f64) -> String) -> String {
        let mut s = String::from("N,symbol_class,k,a_k,a_k_over_a1\n");
        for row in &self.rows {
            for (class, rep) in [("cmo-like", &row.cmo), ("bmo-not-cmo", &row.bmo)] {
                for (k, a) in rep.values.iter().enumerate() {
                    s.push_str(&format!("{},{},{},{},{}\n", row.n, class, k + 1, fmt(*a), fmt(rep.tail(k + 1))));
                }
            }
        }
        s
    }
}

fn symbol_bmo(b: &ScalarFn, family: &CubeFamily, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(bmo_norm(&|x: &[f64]| b.eval(x), family, cfg)?.value.0)
}

pub fn compactness_contrast(cfg: &ContrastConfig) -> Result<ContrastReport> {
    if cfg.n_list.is_empty() || cfg.n_list.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("N list must be non-empty and increasing");
    }
    if cfg.k_probe < 2 {
        return invalid("k_probe must be at least 2");
    }
    if !(cfg.contrast_factor >= 1.0) {
        return invalid("contrast factor must be at least 1");
    }
    let family = CubeFamily::from_spec(&cfg.bmo_family)?;
    let bmo_cmo = symbol_bmo(&cfg.b_cmo, &family, &cfg.quadrature)?;
    let bmo_bmo = symbol_bmo(&cfg.b_bmo, &family, &cfg.quadrature)?;
    let factor = if cfg.match_amplitude && bmo_cmo > 0.0 && bmo_cmo.is_finite() && bmo_bmo.is_finite() { bmo_bmo / bmo_cmo } else { 1.0 };
    let b_cmo = if factor == 1.0 { cfg.b_cmo.clone() } else { cfg.b_cmo.scaled(factor) };
    let symbols = |f: &ScalarFn, class| [CommutatorSymbol { function: f.clone(), class }, CommutatorSymbol { function: f.clone(), class }];
    let cmo = CommutatorSpec { base: cfg.base.clone(), alpha: cfg.alpha, b: symbols(&b_cmo, SymbolClass::CmoLike) };
    let bmo = CommutatorSpec { base: cfg.base.clone(), alpha: cfg.alpha, b: symbols(&cfg.b_bmo, SymbolClass::BmoNotCmo) };
    let mut rows = Vec::with_capacity(cfg.n_list.len());
    for &n in &cfg.n_list {
        let settings = DiscretizeSettings { n, ..cfg.discretization.clone() };
        let a = approximation_numbers(&discretize(&MapTarget::Commutator { commutator: cmo.clone() }, &settings)?, cfg.k_probe);
        let b = approximation_numbers(&discretize(&MapTarget::Commutator { commutator: bmo.clone() }, &settings)?, cfg.k_probe);
        let (ct, bt) = (a.tail(cfg.k_probe), b.tail(cfg.k_probe));
        rows.push(ContrastRow { n, separated: ct * cfg.contrast_factor < bt, cmo_tail: ct, bmo_tail: bt, cmo: a, bmo: b });
    }
    let degenerate = rows.iter().all(|r| r.cmo_tail < RANK_TOLERANCE && r.bmo_tail < RANK_TOLERANCE);
    let nonincreasing = rows.windows(2).all(|w| w[1].cmo_tail <= w[0].cmo_tail);
    let verdict = if degenerate {
        ContrastVerdict::Degenerate
    } else if nonincreasing && rows.iter().all(|r| r.separated) {
        ContrastVerdict::Confirmed
    } else {
        ContrastVerdict::Inconclusive
    };
    Ok(ContrastReport {
        rows,
        bmo_norm_cmo_symbol: bmo_cmo,
        bmo_norm_bmo_symbol: bmo_bmo,
        amplitude_factor: factor,
        cmo_tail_nonincreasing: nonincreasing,
        verdict,
        convention: NORM_CONVENTION.into(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepCase {
    pub label: String,
    pub input_weights: [WeightSpec; 2],
    pub output_weight: WeightSpec,
    #[serde(default)]
    pub class: Option<DirectClass>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub operator: MapTarget,
    /// Nominal `(q1, q2, q)`.
    pub exponents: [f64; 3],
    pub dim: usize,
    pub n: usize,
    pub half_width: f64,
    pub cases: Vec<SweepCase>,
    pub trials: Vec<[ScalarFn; 2]>,
    pub family: FamilySpec,
    pub quadrature: QuadratureConfig,
    pub stability: StabilityConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub label: String,
    pub ratio: f64,
    pub per_trial: Vec<f64>,
    pub class: Option<MembershipReport>,
}

/// `max_trials ||T(f1, f2)||_{L^q(nu)} / (||f1||_{L^q1(v1)} ||f2||_{L^q2(v2)})` per weight case.
pub fn boundedness_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    let grid = GridSpec::new(cfg.dim, cfg.n, cfg.half_width)?;
    let [q1, q2, q] = cfg.exponents;
    if cfg.trials.is_empty() {
        return invalid("trial set is empty");
    }
    let outputs: Vec<(GridFunction, GridFunction, GridFunction)> = cfg
        .trials
        .iter()
        .map(|[a, b]| {
            let (f1, f2) = (a.sample(grid), b.sample(grid));
            let out = match &cfg.operator {
                MapTarget::Operator { operator } => apply_operator(operator, &f1, &f2)?,
                MapTarget::Commutator { commutator: c } => commutator(c, &f1, &f2)?,
            };
            Ok((f1, f2, out))
        })
        .collect::<Result<_>>()?;
    cfg.cases
        .iter()
        .map(|case| {
            let per_trial = outputs
                .iter()
                .map(|(f1, f2, out)| {
                    let den = weighted_lp_norm(f1, q1, &case.input_weights[0])? * weighted_lp_norm(f2, q2, &case.input_weights[1])?;
                    let num = weighted_lp_norm(out, q, &case.output_weight)?;
                    Ok(if den == 0.0 { 0.0 } else { num / den })
                })
                .collect::<Result<Vec<f64>>>()?;
            let class = match &case.class {
                Some(c) => Some(c.membership(&case.input_weights, &cfg.family, &cfg.quadrature, &cfg.stability)?),
                None => None,
            };
            Ok(SweepRow { label: case.label.clone(), ratio: per_trial.iter().copied().fold(0.0, f64::max), per_trial, class })
        })
        .collect()
}
