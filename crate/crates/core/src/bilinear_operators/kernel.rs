//! Kernel-based bilinear operators: fractional integrals and truncated Calderón–Zygmund forms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid_quadrature::{GridFunction, GridSpec};

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum FractionalConvention {
    /// `(|x - y1| + |x - y2|)^(beta - 2d)`, homogeneous of degree `beta - 2d`.
    #[default]
    Homogeneous,
    /// `(|x - y1|^2 + |x - y2|^2)^(-(2d - beta))`.
    AsPrinted,
}

/// Bilinear kernels `K(x, y1, y2)`; `S = |x - y1| + |x - y2|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum KernelKind {
    Zero,
    /// `c / S^(2d)`.
    Model { constant: f64 },
    /// `sgn(x - y1) / S^(2d)` (first coordinate), size-admissible but not smooth.
    SignedModel,
    /// `c (|x - y1| / S)^order / S^(2d)`.
    Holder { constant: f64, order: f64 },
    /// `(1 + |ln S|) / S^(2d)`, violates the size bound near the diagonal.
    LogModel,
    Fractional { beta: f64, #[serde(default)] convention: FractionalConvention },
}

impl KernelKind {
    pub fn eval(&self, x: &[f64], y1: &[f64], y2: &[f64]) -> f64 {
        let d = x.len() as i32;
        let r1 = dist(x, y1);
        let r2 = dist(x, y2);
        let s = r1 + r2;
        match self {
            KernelKind::Zero => 0.0,
            KernelKind::Model { constant } => constant / s.powi(2 * d),
            KernelKind::SignedModel => {
                let sg = (x[0] - y1[0]).signum();
                if x[0] == y1[0] {
                    0.0
                } else {
                    sg / s.powi(2 * d)
                }
            }
            KernelKind::Holder { constant, order } => constant * (r1 / s).powf(*order) / s.powi(2 * d),
            KernelKind::LogModel => (1.0 + s.ln().abs()) / s.powi(2 * d),
            KernelKind::Fractional { beta, convention } => match convention {
                FractionalConvention::Homogeneous => s.powf(beta - 2.0 * d as f64),
                FractionalConvention::AsPrinted => (r1 * r1 + r2 * r2).powf(-(2.0 * d as f64 - beta)),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub kernel: KernelKind,
    /// Hölder order used by the smoothness checks.
    #[serde(default = "default_smoothness")]
    pub smoothness: f64,
    #[serde(default = "one")]
    pub size_constant: f64,
    /// Truncation radius `rho` in grid cells.
    #[serde(default = "default_cells")]
    pub truncation_cells: f64,
}

fn default_smoothness() -> f64 {
    1.0
}

fn one() -> f64 {
    1.0
}

fn default_cells() -> f64 {
    4.0
}

impl KernelSpec {
    pub fn new(kernel: KernelKind) -> Self {
        KernelSpec { kernel, smoothness: 1.0, size_constant: 1.0, truncation_cells: 4.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.truncation_cells > 1.0 && self.truncation_cells.is_finite()) {
            return invalid("truncation radius must exceed one grid cell");
        }
        if !(self.smoothness > 0.0) {
            return invalid("kernel smoothness order must be positive");
        }
        Ok(())
    }
}

/// How the sum over `(y1, y2)` treats the diagonal `y1 = y2 = x`.
#[derive(Clone, Debug)]
pub(crate) enum Diagonal {
    /// Drop pairs with `|(y1 - x, y2 - x)| <= rho`.
    Truncate { rho: f64 },
    /// Replace the singular cell by the kernel averaged over an oversampled cell.
    CellAverage { value: f64 },
}

/// A kernel operator ready for evaluation on a fixed grid.
#[derive(Clone, Debug)]
pub(crate) struct KernelOperator {
    pub kernel: KernelKind,
    pub diagonal: Diagonal,
    pub grid: GridSpec,
}

/// Oversampling factor per axis for the singular cell.
const OVERSAMPLE: usize = 8;

pub(crate) fn singular_cell_average(kernel: &KernelKind, grid: &GridSpec) -> f64 {
    let d = grid.dim;
    let h = grid.spacing();
    let offs: Vec<f64> = (0..OVERSAMPLE).map(|k| ((k as f64 + 0.5) / OVERSAMPLE as f64 - 0.5) * h).collect();
    let x = vec![0.0; d];
    let total = OVERSAMPLE.pow(2 * d as u32);
    let mut sum = 0.0;
    let mut y1 = vec![0.0; d];
    let mut y2 = vec![0.0; d];
    for idx in 0..total {
        let mut r = idx;
        for a in 0..d {
            y1[a] = offs[r % OVERSAMPLE];
            r /= OVERSAMPLE;
        }
        for a in 0..d {
            y2[a] = offs[r % OVERSAMPLE];
            r /= OVERSAMPLE;
        }
        sum += kernel.eval(&x, &y1, &y2);
    }
    sum / total as f64
}

impl KernelOperator {
    pub fn fractional(beta: f64, convention: FractionalConvention, grid: GridSpec) -> Result<Self> {
        let d = grid.dim as f64;
        if !(beta > 0.0 && beta < 2.0 * d) {
            return invalid(format!("beta must lie in (0, 2d) = (0, {}), got {beta}", 2.0 * d));
        }
        let kernel = KernelKind::Fractional { beta, convention };
        let value = singular_cell_average(&kernel, &grid);
        Ok(KernelOperator { kernel, diagonal: Diagonal::CellAverage { value }, grid })
    }

    pub fn truncated(spec: &KernelSpec, grid: GridSpec) -> Result<Self> {
        spec.validate()?;
        let rho = spec.truncation_cells * grid.spacing();
        Ok(KernelOperator { kernel: spec.kernel.clone(), diagonal: Diagonal::Truncate { rho }, grid })
    }

    /// Visit every `(y1, y2)` contributing at output node `xi` with its quadrature weight `K h^{2d}`.
    #[inline]
    pub fn sweep(&self, xi: usize, mut visit: impl FnMut(usize, usize, f64)) {
        let g = &self.grid;
        let d = g.dim;
        let n = g.len();
        let vol2 = g.cell_volume() * g.cell_volume();
        let xn = g.node(xi);
        let x = &xn[..d];
        for j1 in 0..n {
            let y1n = g.node(j1);
            let y1 = &y1n[..d];
            let r1sq: f64 = x.iter().zip(y1).map(|(a, b)| (a - b) * (a - b)).sum();
            for j2 in 0..n {
                let y2n = g.node(j2);
                let y2 = &y2n[..d];
                let k = match &self.diagonal {
                    Diagonal::CellAverage { value } => {
                        if j1 == xi && j2 == xi {
                            *value
                        } else {
                            self.kernel.eval(x, y1, y2)
                        }
                    }
                    Diagonal::Truncate { rho } => {
                        let r2sq: f64 = x.iter().zip(y2).map(|(a, b)| (a - b) * (a - b)).sum();
                        if r1sq + r2sq <= rho * rho {
                            continue;
                        }
                        self.kernel.eval(x, y1, y2)
                    }
                };
                visit(j1, j2, k * vol2);
            }
        }
    }

    /// `sum K(x, y1, y2) m(x, y1, y2) f1(y1) f2(y2) h^{2d}` with an optional node-level modifier.
    pub fn apply_with(
        &self,
        f1: &GridFunction,
        f2: &GridFunction,
        modifier: Option<&(dyn Fn(usize, usize, usize) -> f64 + Sync)>,
    ) -> GridFunction {
        let n = self.grid.len();
        let a = &f1.values;
        let b = &f2.values;
        let values: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|xi| {
                let mut acc = 0.0;
                match modifier {
                    None => self.sweep(xi, |j1, j2, k| {
                        if a[j1] != 0.0 {
                            acc += k * a[j1] * b[j2];
                        }
                    }),
                    Some(m) => self.sweep(xi, |j1, j2, k| {
                        if a[j1] != 0.0 {
                            acc += k * m(xi, j1, j2) * a[j1] * b[j2];
                        }
                    }),
                }
                acc
            })
            .collect();
        GridFunction { dim: self.grid.dim, n: self.grid.n, half_width: self.grid.half_width, values }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleMax {
    pub scale: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelConditionsReport {
    pub samples: usize,
    pub smoothness_order: f64,
    /// `|K| S^{2d}`.
    pub size_max: f64,
    pub size_min: f64,
    pub size_by_scale: Vec<ScaleMax>,
    /// Size ratio grows by more than a factor 2 towards the diagonal.
    pub size_growth_flag: bool,
    /// `|K(.., y_j, ..) - K(.., z, ..)| S^{2d + eps} / |y_j - z|^eps`.
    pub smoothness_max: f64,
    /// `|K(x, ..) - K(z, ..)| S^{2d + eps} / tau^eps` inside the window `8|x - z| < min |x - y_j|`.
    pub kernel4_max: f64,
}

fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = norm(&v);
        if r > 1e-3 && r <= 1.0 {
            return v.into_iter().map(|a| a / r).collect();
        }
    }
}

fn offset(x: &[f64], dir: &[f64], r: f64) -> Vec<f64> {
    x.iter().zip(dir).map(|(a, b)| a + r * b).collect()
}

/// Randomized size and smoothness ratios of a kernel in dimension `dim`.
pub fn kernel_conditions_check(spec: &KernelSpec, dim: usize, sample_budget: usize, seed: u64) -> Result<KernelConditionsReport> {
    if !(1..=2).contains(&dim) {
        return invalid("kernel checks support dimension 1 or 2");
    }
    if sample_budget == 0 {
        return invalid("sample budget must be positive");
    }
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = &spec.kernel;
    let eps = spec.smoothness;
    let two_d = 2 * dim as i32;
    let scales: Vec<f64> = (0..7).map(|i| 10f64.powi(-i)).collect();
    let per_scale = (sample_budget / (3 * scales.len())).max(1);
    let mut size_max = 0.0f64;
    let mut size_min = f64::INFINITY;
    let mut smoothness_max = 0.0f64;
    let mut kernel4_max = 0.0f64;
    let mut size_by_scale = Vec::with_capacity(scales.len());
    let mut samples = 0;
    for &scale in &scales {
        let mut local = 0.0f64;
        for _ in 0..per_scale {
            let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r1 = scale * rng.gen_range(0.05..1.0);
            let r2 = scale * rng.gen_range(0.05..1.0);
            let y1 = offset(&x, &random_unit(&mut rng, dim), r1);
            let y2 = offset(&x, &random_unit(&mut rng, dim), r2);
            let s = dist(&x, &y1) + dist(&x, &y2);
            let kv = k.eval(&x, &y1, &y2);
            let size = kv.abs() * s.powi(two_d);
            local = local.max(size);
            size_min = size_min.min(size);

            // Smoothness in one y-slot.
            let big = dist(&x, &y1).max(dist(&x, &y2));
            let delta = 0.5 * big * rng.gen_range(0.01..1.0);
            let dir = random_unit(&mut rng, dim);
            let (a, b) = if rng.gen_bool(0.5) {
                let z = offset(&y1, &dir, delta);
                (kv, k.eval(&x, &z, &y2))
            } else {
                let z = offset(&y2, &dir, delta);
                (kv, k.eval(&x, &y1, &z))
            };
            smoothness_max = smoothness_max.max((a - b).abs() * s.powf(two_d as f64 + eps) / delta.powf(eps));

            // Variation in x with the auxiliary radius tau.
            let small = dist(&x, &y1).min(dist(&x, &y2));
            let dx = 0.99 * small / 8.0 * rng.gen_range(0.01..1.0);
            let z = offset(&x, &random_unit(&mut rng, dim), dx);
            let tau = 2.0 * dx * 1.001;
            let diff = (kv - k.eval(&z, &y1, &y2)).abs();
            kernel4_max = kernel4_max.max(diff * s.powf(two_d as f64 + eps) / tau.powf(eps));
            samples += 1;
        }
        size_max = size_max.max(local);
        size_by_scale.push(ScaleMax { scale, max: local });
    }
    let first = size_by_scale.first().map(|s| s.max).unwrap_or(0.0);
    let last = size_by_scale.last().map(|s| s.max).unwrap_or(0.0);
    Ok(KernelConditionsReport {
        samples,
        smoothness_order: eps,
        size_max,
        size_min,
        size_growth_flag: last > 2.0 * first,
        size_by_scale,
        smoothness_max,
        kernel4_max,
    })
}
