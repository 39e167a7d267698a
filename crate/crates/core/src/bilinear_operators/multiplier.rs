//! Bilinear Fourier multipliers on the periodic grid and dyadic Sobolev norms of symbols.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid_quadrature::GridFunction;

/// Scalar Fourier multiplier `g(xi)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScalarMultiplier {
    /// `(1 + |xi|^2)^(-order/2)`.
    Bessel { order: f64 },
    /// `exp(-t |xi|^2)`.
    Heat { t: f64 },
}

impl ScalarMultiplier {
    pub fn eval(&self, xi: f64) -> f64 {
        match self {
            ScalarMultiplier::Bessel { order } => (1.0 + xi * xi).powf(-order / 2.0),
            ScalarMultiplier::Heat { t } => (-t * xi * xi).exp(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SymbolKind {
    Zero,
    /// `sigma = 1`: the pointwise product.
    Identity,
    /// `exp(2 pi i (xi1 + xi2) h)`: translation of the product by `h`.
    Translation { shift: f64 },
    /// `g(xi1)`.
    FirstVariable { multiplier: ScalarMultiplier },
    /// `(1 + |xi1|^2 + |xi2|^2)^(-decay/2)`, optionally times `chi(|xi| / cutoff)`.
    CoifmanMeyer {
        #[serde(default = "default_decay")]
        decay: f64,
        #[serde(default)]
        cutoff: Option<f64>,
    },
    /// `-i xi1 / |xi|`, homogeneous of degree zero.
    RieszLike,
}

fn default_decay() -> f64 {
    1.0
}

/// Sobolev regularity target: isotropic `H^s` or product `H^{(s1, s2)}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Regularity {
    Isotropic(f64),
    Product([f64; 2]),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolSpec {
    pub symbol: SymbolKind,
    #[serde(default)]
    pub regularity: Option<Regularity>,
}

impl SymbolSpec {
    pub fn new(symbol: SymbolKind) -> Self {
        SymbolSpec { symbol, regularity: None }
    }

    /// `sigma(xi1, xi2)` for `d = 1`.
    pub fn eval(&self, xi1: f64, xi2: f64) -> Complex64 {
        match &self.symbol {
            SymbolKind::Zero => Complex64::new(0.0, 0.0),
            SymbolKind::Identity => Complex64::new(1.0, 0.0),
            SymbolKind::Translation { shift } => Complex64::from_polar(1.0, 2.0 * PI * (xi1 + xi2) * shift),
            SymbolKind::FirstVariable { multiplier } => Complex64::new(multiplier.eval(xi1), 0.0),
            SymbolKind::CoifmanMeyer { decay, cutoff } => {
                let r2 = xi1 * xi1 + xi2 * xi2;
                let mut v = (1.0 + r2).powf(-decay / 2.0);
                if let Some(c) = cutoff {
                    v *= lp_cutoff(r2.sqrt() / c);
                }
                Complex64::new(v, 0.0)
            }
            SymbolKind::RieszLike => {
                let r = (xi1 * xi1 + xi2 * xi2).sqrt();
                Complex64::new(0.0, if r == 0.0 { 0.0 } else { -xi1 / r })
            }
        }
    }
}

fn smooth_step(t: f64) -> f64 {
    // C-infinity transition from 0 (t <= 0) to 1 (t >= 1).
    let e = |s: f64| if s <= 0.0 { 0.0 } else { (-1.0 / s).exp() };
    let a = e(t);
    let b = e(1.0 - t);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// Smooth radial cutoff: 1 on `[0, 1]`, 0 on `[sqrt 2, inf)`.
pub fn lp_cutoff(t: f64) -> f64 {
    if t <= 1.0 {
        1.0
    } else if t >= SQRT_2 {
        0.0
    } else {
        1.0 - smooth_step((t - 1.0) / (SQRT_2 - 1.0))
    }
}

/// Littlewood–Paley bump `chi(|xi|) - chi(2|xi|)`, supported in `1/2 <= |xi| <= sqrt 2`.
pub fn lp_bump(xi1: f64, xi2: f64) -> f64 {
    let r = (xi1 * xi1 + xi2 * xi2).sqrt();
    lp_cutoff(r) - lp_cutoff(2.0 * r)
}

/// Frequencies `k / (2L)` for `k = -N/2 .. N/2 - 1` and the normalized coefficients of `f`.
fn coefficients(f: &GridFunction, planner: &mut FftPlanner<f64>) -> Vec<Complex64> {
    let n = f.n;
    let mut buf: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    let half = (n / 2) as i64;
    (-half..half)
        .map(|k| {
            let raw = buf[k.rem_euclid(n as i64) as usize];
            // Nodes sit at -L + (j + 1/2) h.
            let phase = Complex64::from_polar(1.0, PI * k as f64 - PI * k as f64 / n as f64);
            raw * phase / n as f64
        })
        .collect()
}

fn check_periodic_pair(f1: &GridFunction, f2: &GridFunction) -> Result<()> {
    if f1.dim != 1 {
        return invalid("Fourier multipliers are implemented for d = 1");
    }
    if !f1.same_grid(f2) {
        return invalid("inputs must share one grid");
    }
    Ok(())
}

/// Evaluate `sum_K G(K) exp(2 pi i K x / (2L))` at the nodes, `K = -N .. N - 2`.
fn synthesize(g: &[Complex64], f: &GridFunction) -> Vec<f64> {
    let n = f.n;
    let grid = f.grid();
    let l2 = 2.0 * f.half_width;
    (0..n)
        .map(|i| {
            let x = grid.coord(i);
            let step = Complex64::from_polar(1.0, 2.0 * PI * x / l2);
            let mut e = Complex64::from_polar(1.0, 2.0 * PI * (-(n as f64)) * x / l2);
            let mut acc = Complex64::new(0.0, 0.0);
            for gk in g {
                acc += gk * e;
                e *= step;
            }
            acc.re
        })
        .collect()
}

/// `T_sigma(f1, f2)` on the periodic grid.
pub fn apply_fourier_multiplier(sigma: &SymbolSpec, f1: &GridFunction, f2: &GridFunction) -> Result<GridFunction> {
    check_periodic_pair(f1, f2)?;
    let n = f1.n;
    let mut planner = FftPlanner::new();
    let c1 = coefficients(f1, &mut planner);
    let c2 = coefficients(f2, &mut planner);
    let half = (n / 2) as i64;
    let l2 = 2.0 * f1.half_width;
    let xi = |k: i64| k as f64 / l2;
    // Sum index K = k1 + k2 in [-N, N - 2], stored at K + N.
    let mut g = vec![Complex64::new(0.0, 0.0); 2 * n - 1];
    for (i1, a) in c1.iter().enumerate() {
        if a.norm_sqr() == 0.0 {
            continue;
        }
        let k1 = i1 as i64 - half;
        for (i2, b) in c2.iter().enumerate() {
            let k2 = i2 as i64 - half;
            g[(k1 + k2 + n as i64) as usize] += sigma.eval(xi(k1), xi(k2)) * a * b;
        }
    }
    let values = synthesize(&g, f1);
    GridFunction::new(1, n, f1.half_width, values)
}

/// Linear multiplier `g(D) f` on the periodic grid.
pub fn apply_scalar_multiplier(g: &ScalarMultiplier, f: &GridFunction) -> Result<GridFunction> {
    if f.dim != 1 {
        return invalid("Fourier multipliers are implemented for d = 1");
    }
    let n = f.n;
    let mut planner = FftPlanner::new();
    let c = coefficients(f, &mut planner);
    let half = (n / 2) as i64;
    let l2 = 2.0 * f.half_width;
    let mut full = vec![Complex64::new(0.0, 0.0); 2 * n - 1];
    for (i, a) in c.iter().enumerate() {
        let k = i as i64 - half;
        full[(k + n as i64) as usize] = a * g.eval(k as f64 / l2);
    }
    GridFunction::new(1, n, f.half_width, synthesize(&full, f))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SobolevSettings {
    /// Half-width of the frequency box `[-R, R]^2`.
    pub box_half_width: f64,
    /// Samples per axis (power of two).
    pub samples: usize,
}

impl Default for SobolevSettings {
    fn default() -> Self {
        SobolevSettings { box_half_width: 4.0, samples: 128 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolevReport {
    pub sup: f64,
    pub argmax: i32,
    pub per_scale: Vec<(i32, f64)>,
    pub regularity: Regularity,
}

/// `||g||_{H^s}` of a function sampled on `[-R, R]^2`.
fn sobolev_norm_2d(values: &[Complex64], m: usize, r: f64, reg: &Regularity, planner: &mut FftPlanner<f64>) -> f64 {
    let fft = planner.plan_fft_forward(m);
    let mut buf = values.to_vec();
    for row in buf.chunks_mut(m) {
        fft.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); m];
    for c in 0..m {
        for (i, v) in col.iter_mut().enumerate() {
            *v = buf[i * m + c];
        }
        fft.process(&mut col);
        for (i, v) in col.iter().enumerate() {
            buf[i * m + c] = *v;
        }
    }
    let dxi = 2.0 * r / m as f64;
    let deta = 1.0 / (2.0 * r);
    let freq = |i: usize| {
        let k = if i < m / 2 { i as f64 } else { i as f64 - m as f64 };
        k * deta
    };
    let mut total = 0.0;
    for i in 0..m {
        let e1 = freq(i);
        for j in 0..m {
            let e2 = freq(j);
            let w = match reg {
                Regularity::Isotropic(s) => (1.0 + e1 * e1 + e2 * e2).powf(*s),
                Regularity::Product([s1, s2]) => (1.0 + e1 * e1).powf(*s1) * (1.0 + e2 * e2).powf(*s2),
            };
            total += w * (buf[i * m + j] * dxi * dxi).norm_sqr();
        }
    }
    (total * deta * deta).sqrt()
}

/// `sup_j ||Phi sigma(2^j .)||_{H^s}` over `j` in `j_range` (inclusive).
pub fn sobolev_symbol_norm(
    sigma: &SymbolSpec,
    regularity: &Regularity,
    j_range: (i32, i32),
    settings: &SobolevSettings,
) -> Result<SobolevReport> {
    if j_range.0 > j_range.1 {
        return invalid("empty scale range");
    }
    let m = settings.samples;
    if m < 8 || !m.is_power_of_two() {
        return invalid("Sobolev sample count must be a power of two >= 8");
    }
    let r = settings.box_half_width;
    if r < 2.0 {
        return invalid("frequency box must contain the bump support");
    }
    let h = 2.0 * r / m as f64;
    let node = |i: usize| -r + (i as f64 + 0.5) * h;
    let mut planner = FftPlanner::new();
    let mut per_scale = Vec::new();
    let mut best = (f64::NEG_INFINITY, j_range.0);
    for j in j_range.0..=j_range.1 {
        let sc = 2f64.powi(j);
        let mut vals = Vec::with_capacity(m * m);
        for a in 0..m {
            for b in 0..m {
                let (x1, x2) = (node(a), node(b));
                let phi = lp_bump(x1, x2);
                vals.push(if phi == 0.0 { Complex64::new(0.0, 0.0) } else { sigma.eval(sc * x1, sc * x2) * phi });
            }
        }
        let v = sobolev_norm_2d(&vals, m, r, regularity, &mut planner);
        if v > best.0 {
            best = (v, j);
        }
        per_scale.push((j, v));
    }
    Ok(SobolevReport { sup: best.0, argmax: best.1, per_scale, regularity: regularity.clone() })
}
