//! Cubes, dyadic cube families, midpoint quadrature with divergence detection,
//! and grid-sampled functions on `[-L, L]^d`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::weight_classes::WeightSpec;

/// Axis-parallel cube in dimension 1 or 2. Unused coordinates are zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    pub dim: usize,
    pub center: [f64; 2],
    pub side: f64,
    #[serde(default)]
    pub level: u32,
}

impl Cube {
    pub fn new(center: &[f64], side: f64) -> Result<Self> {
        let dim = center.len();
        if !(1..=2).contains(&dim) {
            return invalid(format!("cube dimension must be 1 or 2, got {dim}"));
        }
        if !(side > 0.0 && side.is_finite()) {
            return invalid(format!("cube side must be positive, got {side}"));
        }
        let mut c = [0.0; 2];
        c[..dim].copy_from_slice(center);
        Ok(Cube { dim, center: c, side, level: 0 })
    }

    pub fn volume(&self) -> f64 {
        self.side.powi(self.dim as i32)
    }

    pub fn lower(&self, axis: usize) -> f64 {
        self.center[axis] - 0.5 * self.side
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        (0..self.dim).all(|a| (x[a] - self.center[a]).abs() <= 0.5 * self.side)
    }

    /// Visit the midpoint nodes of the `m^d` congruent sub-cubes.
    pub fn for_each_node(&self, m: usize, mut visit: impl FnMut(&[f64])) {
        let h = self.side / m as f64;
        let lo0 = self.lower(0);
        match self.dim {
            1 => {
                for i in 0..m {
                    visit(&[lo0 + (i as f64 + 0.5) * h]);
                }
            }
            _ => {
                let lo1 = self.lower(1);
                for i in 0..m {
                    let x0 = lo0 + (i as f64 + 0.5) * h;
                    for j in 0..m {
                        visit(&[x0, lo1 + (j as f64 + 0.5) * h]);
                    }
                }
            }
        }
    }
}

/// Serializable descriptor of a dyadic family with shifted copies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub dim: usize,
    pub half_width: f64,
    pub min_level: u32,
    pub max_level: u32,
    pub shifts: Vec<f64>,
}

impl FamilySpec {
    pub fn new(dim: usize, half_width: f64, min_level: u32, max_level: u32, shifts: Vec<f64>) -> Self {
        FamilySpec { dim, half_width, min_level, max_level, shifts }
    }

    /// Same family with `extra` additional finer levels.
    pub fn extended(&self, extra: u32) -> Self {
        FamilySpec { max_level: self.max_level + extra, ..self.clone() }
    }

    /// Only the levels strictly beyond this family's finest level, up to `extra` more.
    pub fn refinement_band(&self, extra: u32) -> Self {
        FamilySpec { min_level: self.max_level + 1, max_level: self.max_level + extra, ..self.clone() }
    }

    pub fn cube_count(&self) -> usize {
        (self.min_level..=self.max_level)
            .map(|k| self.shifts.len() << (k as usize * self.dim))
            .sum()
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.dim) {
            return invalid(format!("family dimension must be 1 or 2, got {}", self.dim));
        }
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return invalid("family half-width must be positive");
        }
        if self.min_level > self.max_level {
            return invalid("family min_level exceeds max_level");
        }
        if self.max_level as usize * self.dim > 40 {
            return invalid("family too fine");
        }
        if self.shifts.is_empty() || self.shifts.iter().any(|s| !(0.0..1.0).contains(s)) {
            return invalid("family shifts must be non-empty and lie in [0, 1)");
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct CubeFamily {
    spec: FamilySpec,
    cubes: Vec<Cube>,
}

impl CubeFamily {
    pub fn from_spec(spec: &FamilySpec) -> Result<Self> {
        spec.validate()?;
        let l = spec.half_width;
        let mut cubes = Vec::with_capacity(spec.cube_count());
        for k in spec.min_level..=spec.max_level {
            let per_axis = 1usize << k;
            let side = 2.0 * l / per_axis as f64;
            for &s in &spec.shifts {
                // Shifted cubes that would leave [-L, L]^d are clamped back inside.
                let lower = |i: usize| (-l + (i as f64 + s) * side).min(l - side);
                match spec.dim {
                    1 => {
                        for i in 0..per_axis {
                            cubes.push(Cube { dim: 1, center: [lower(i) + 0.5 * side, 0.0], side, level: k });
                        }
                    }
                    _ => {
                        for i in 0..per_axis {
                            for j in 0..per_axis {
                                cubes.push(Cube {
                                    dim: 2,
                                    center: [lower(i) + 0.5 * side, lower(j) + 0.5 * side],
                                    side,
                                    level: k,
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(CubeFamily { spec: spec.clone(), cubes })
    }

    /// The same cubes moved by `offset`; the descriptor still names the untranslated family.
    pub fn translated(&self, offset: &[f64]) -> Self {
        let cubes = self
            .cubes
            .iter()
            .map(|q| {
                let mut c = *q;
                for (a, o) in offset.iter().enumerate().take(q.dim) {
                    c.center[a] += o;
                }
                c
            })
            .collect();
        CubeFamily { spec: self.spec.clone(), cubes }
    }

    pub fn spec(&self) -> &FamilySpec {
        &self.spec
    }

    pub fn cubes(&self) -> &[Cube] {
        &self.cubes
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }
}

pub fn build_cube_family(dim: usize, half_width: f64, min_level: u32, max_level: u32, shifts: &[f64]) -> Result<CubeFamily> {
    CubeFamily::from_spec(&FamilySpec::new(dim, half_width, min_level, max_level, shifts.to_vec()))
}

/// Midpoint quadrature settings and the thresholds of the divergence test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    /// Sub-cubes per axis at the finest resolution.
    pub resolution: usize,
    /// Per-doubling growth of the sums that signals divergence outright.
    pub divergence_ratio: f64,
    /// Ratio of successive increments at or above which the sums are taken to diverge.
    pub stall_ratio: f64,
    /// Lower edge of the band of increment ratios reported as borderline.
    pub borderline_ratio: f64,
    /// Relative size below which increments count as converged.
    pub increment_floor: f64,
    /// Total relative change across the four resolutions below which the sums count as converged.
    pub relative_change_floor: f64,
    /// Node displacement, in units of the sub-cube side, at non-evaluable nodes.
    pub perturbation: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            resolution: 64,
            divergence_ratio: 1.5,
            stall_ratio: 0.97,
            borderline_ratio: 0.95,
            increment_floor: 1e-9,
            relative_change_floor: 1e-2,
            perturbation: 1e-3,
        }
    }
}

impl QuadratureConfig {
    pub fn with_resolution(resolution: usize) -> Self {
        QuadratureConfig { resolution, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution == 0 {
            return invalid("quadrature resolution must be positive");
        }
        if !(self.borderline_ratio <= self.stall_ratio) {
            return invalid("borderline_ratio must not exceed stall_ratio");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convergence {
    Converged,
    Borderline,
    Diverged,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    /// Cube average at the finest resolution, `+inf` when divergence was detected.
    pub value: f64,
    pub status: Convergence,
}

fn node_value<F: Fn(&[f64]) -> f64 + ?Sized>(f: &F, x: &[f64], h: f64, eps: f64) -> Result<f64> {
    let v = f(x);
    if v.is_finite() {
        return Ok(v);
    }
    let mut y = [0.0; 2];
    for (a, yi) in y.iter_mut().enumerate().take(x.len()) {
        *yi = x[a] + eps * h * if a == 0 { 1.0 } else { 0.5 };
    }
    let v = f(&y[..x.len()]);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonEvaluable { point: x.to_vec() })
    }
}

/// Signed and absolute midpoint sums normalized by the cube volume.
fn midpoint_means<F: Fn(&[f64]) -> f64 + ?Sized>(f: &F, cube: &Cube, m: usize, eps: f64) -> Result<(f64, f64)> {
    let h = cube.side / m as f64;
    let mut s = 0.0;
    let mut a = 0.0;
    let mut err = None;
    cube.for_each_node(m, |x| {
        if err.is_some() {
            return;
        }
        match node_value(f, x, h, eps) {
            Ok(v) => {
                s += v;
                a += v.abs();
            }
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let n = (m as f64).powi(cube.dim as i32);
    Ok((s / n, a / n))
}

/// Cube average with divergence detection over three resolution doublings.
pub fn average_with<F: Fn(&[f64]) -> f64 + ?Sized>(f: &F, cube: &Cube, cfg: &QuadratureConfig) -> Result<QuadResult> {
    let m = cfg.resolution;
    if m < 8 {
        let (v, _) = midpoint_means(f, cube, m.max(1), cfg.perturbation)?;
        return Ok(QuadResult { value: v, status: Convergence::Converged });
    }
    let mut signed = [0.0; 4];
    let mut abs = [0.0; 4];
    for k in 0..4 {
        let (s, a) = midpoint_means(f, cube, m >> (3 - k), cfg.perturbation)?;
        signed[k] = s;
        abs[k] = a;
    }
    let status = divergence_status(&abs, cfg);
    let value = if status == Convergence::Diverged { f64::INFINITY } else { signed[3] };
    Ok(QuadResult { value, status })
}

/// Classify a sequence of four absolute means taken at successively doubled resolutions.
pub fn divergence_status(abs: &[f64; 4], cfg: &QuadratureConfig) -> Convergence {
    if abs.iter().any(|v| !v.is_finite()) {
        return Convergence::Diverged;
    }
    // Singular integrands grow or stall at a steady rate; erratic ratios are not evidence of divergence.
    let steady = |a: f64, b: f64| a.max(b) <= 2.0 * a.min(b);
    let g = [abs[1] / abs[0], abs[2] / abs[1], abs[3] / abs[2]];
    if abs[0] > 0.0 && g.iter().all(|&r| r > cfg.divergence_ratio) {
        return if steady(g[0], g[1]) && steady(g[1], g[2]) { Convergence::Diverged } else { Convergence::Borderline };
    }
    let d = [abs[1] - abs[0], abs[2] - abs[1], abs[3] - abs[2]];
    let floor = cfg.increment_floor * abs[3].abs();
    if d.iter().any(|&x| x <= floor) || abs[3] - abs[0] <= cfg.relative_change_floor * abs[3].abs() {
        return Convergence::Converged;
    }
    let (q1, q2) = (d[1] / d[0], d[2] / d[1]);
    let r = q1.min(q2);
    if r >= cfg.stall_ratio {
        if steady(q1, q2) {
            Convergence::Diverged
        } else {
            Convergence::Borderline
        }
    } else if r >= cfg.borderline_ratio {
        Convergence::Borderline
    } else {
        Convergence::Converged
    }
}

/// Average of `f` over `cube` at resolution `m`; `+inf` when divergence is detected.
pub fn average<F: Fn(&[f64]) -> f64 + ?Sized>(f: &F, cube: &Cube, m: usize) -> Result<f64> {
    Ok(average_with(f, cube, &QuadratureConfig::with_resolution(m))?.value)
}

/// Smallest and largest node values of `f` on `cube` at resolution `m`.
pub fn node_extrema<F: Fn(&[f64]) -> f64 + ?Sized>(f: &F, cube: &Cube, m: usize) -> Result<(f64, f64)> {
    let h = cube.side / m as f64;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut err = None;
    cube.for_each_node(m.max(1), |x| {
        if err.is_some() {
            return;
        }
        match node_value(f, x, h, 1e-3) {
            Ok(v) => {
                lo = lo.min(v);
                hi = hi.max(v);
            }
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok((lo, hi)),
    }
}

/// Function sampled at the midpoint nodes of a uniform `n^d` grid on `[-L, L]^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFunction {
    pub dim: usize,
    pub n: usize,
    pub half_width: f64,
    pub values: Vec<f64>,
}

/// Shape of a uniform grid without values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub n: usize,
    pub half_width: f64,
}

impl GridSpec {
    pub fn new(dim: usize, n: usize, half_width: f64) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return invalid(format!("grid dimension must be 1 or 2, got {dim}"));
        }
        if n < 2 || !n.is_power_of_two() {
            return invalid(format!("grid size must be a power of two >= 2, got {n}"));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return invalid("grid half-width must be positive");
        }
        Ok(GridSpec { dim, n, half_width })
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.spacing()
    }

    /// Node coordinates of flat index `idx` (row-major, axis 0 slowest).
    pub fn node(&self, idx: usize) -> [f64; 2] {
        match self.dim {
            1 => [self.coord(idx), 0.0],
            _ => [self.coord(idx / self.n), self.coord(idx % self.n)],
        }
    }

    pub fn nearest(&self, x: &[f64]) -> usize {
        let h = self.spacing();
        let ax = |v: f64| (((v + self.half_width) / h).floor().max(0.0) as usize).min(self.n - 1);
        match self.dim {
            1 => ax(x[0]),
            _ => ax(x[0]) * self.n + ax(x[1]),
        }
    }
}

impl GridFunction {
    pub fn new(dim: usize, n: usize, half_width: f64, values: Vec<f64>) -> Result<Self> {
        let g = GridSpec::new(dim, n, half_width)?;
        if values.len() != g.len() {
            return invalid(format!("expected {} grid values, got {}", g.len(), values.len()));
        }
        Ok(GridFunction { dim, n, half_width, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        GridFunction { dim: grid.dim, n: grid.n, half_width: grid.half_width, values: vec![0.0; grid.len()] }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.node(i)[..grid.dim])).collect();
        GridFunction { dim: grid.dim, n: grid.n, half_width: grid.half_width, values }
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec { dim: self.dim, n: self.n, half_width: self.half_width }
    }

    /// Nearest-node evaluation; points outside the grid use the closest boundary node.
    pub fn lookup(&self, x: &[f64]) -> f64 {
        self.values[self.grid().nearest(x)]
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid().cell_volume()
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        self.dim == other.dim && self.n == other.n && self.half_width == other.half_width
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `(sum_i |f_i|^p w(x_i) h^d)^(1/p)` over the grid nodes.
pub fn weighted_lp_norm(f: &GridFunction, p: f64, w: &WeightSpec) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return invalid(format!("exponent must be positive and finite, got {p}"));
    }
    let g = f.grid();
    let mut s = 0.0;
    for (i, v) in f.values.iter().enumerate() {
        if *v == 0.0 {
            continue;
        }
        let x = g.node(i);
        let wx = w.eval(&x[..g.dim]);
        if !wx.is_finite() {
            return Err(Error::NonEvaluable { point: x[..g.dim].to_vec() });
        }
        s += v.abs().powf(p) * wx;
    }
    Ok((s * g.cell_volume()).powf(1.0 / p))
}
