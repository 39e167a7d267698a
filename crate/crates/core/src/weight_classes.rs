//! Weight descriptors, exponent vectors and class-constant evaluation over cube families.

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, precondition, Result};
use crate::grid_quadrature::{
    average_with, divergence_status, Convergence, Cube, CubeFamily, FamilySpec, GridFunction, QuadResult,
    QuadratureConfig,
};
use crate::numeric::{conj, fmt_rat, serde_rat_vec, to_f64, ExtReal, Rat};

/// Symbolic weight. Pointwise evaluation never needs grid context except for tabulated data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightSpec {
    Constant { value: f64 },
    /// `|x - center|^exponent`.
    Power { center: Vec<f64>, exponent: f64 },
    /// `1 + |log |x - center||`.
    Log { center: Vec<f64> },
    /// Nearest-node lookup into sampled values.
    Tabulated { grid: GridFunction },
    Product { factors: Vec<WeightSpec> },
    PowerOf { base: Box<WeightSpec>, exponent: f64 },
}

fn dist(x: &[f64], c: &[f64]) -> f64 {
    match x.len() {
        1 => (x[0] - c[0]).abs(),
        _ => x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(),
    }
}

#[derive(Default)]
struct Canon {
    constant: f64,
    powers: Vec<(Vec<f64>, f64)>,
    others: Vec<(WeightSpec, f64)>,
}

impl Canon {
    fn absorb(&mut self, w: &WeightSpec, e: f64) {
        match w {
            WeightSpec::Constant { value } => self.constant *= value.powf(e),
            WeightSpec::Power { center, exponent } => {
                let a = exponent * e;
                match self.powers.iter_mut().find(|(c, _)| c == center) {
                    Some((_, b)) => *b += a,
                    None => self.powers.push((center.clone(), a)),
                }
            }
            WeightSpec::Log { .. } | WeightSpec::Tabulated { .. } => {
                match self.others.iter_mut().find(|(b, _)| b == w) {
                    Some((_, b)) => *b += e,
                    None => self.others.push((w.clone(), e)),
                }
            }
            WeightSpec::Product { factors } => factors.iter().for_each(|f| self.absorb(f, e)),
            WeightSpec::PowerOf { base, exponent } => self.absorb(base, e * exponent),
        }
    }

    fn build(self) -> WeightSpec {
        let mut factors = Vec::new();
        if self.constant != 1.0 {
            factors.push(WeightSpec::Constant { value: self.constant });
        }
        for (center, exponent) in self.powers {
            if exponent != 0.0 {
                factors.push(WeightSpec::Power { center, exponent });
            }
        }
        for (base, exponent) in self.others {
            if exponent == 1.0 {
                factors.push(base);
            } else if exponent != 0.0 {
                factors.push(WeightSpec::PowerOf { base: Box::new(base), exponent });
            }
        }
        match factors.len() {
            0 => WeightSpec::Constant { value: 1.0 },
            1 => factors.pop().unwrap(),
            _ => WeightSpec::Product { factors },
        }
    }
}

impl WeightSpec {
    pub fn constant(c: f64) -> Self {
        WeightSpec::Constant { value: c }
    }

    pub fn power(center: &[f64], exponent: f64) -> Self {
        WeightSpec::Power { center: center.to_vec(), exponent }
    }

    /// `|x|^a` in dimension `dim`.
    pub fn power_at_origin(dim: usize, exponent: f64) -> Self {
        Self::power(&vec![0.0; dim], exponent)
    }

    pub fn log(center: &[f64]) -> Self {
        WeightSpec::Log { center: center.to_vec() }
    }

    pub fn tabulated(grid: GridFunction) -> Self {
        WeightSpec::Tabulated { grid }
    }

    /// Canonical form: powers with a common center merged, nested powers collapsed.
    pub fn simplify(&self) -> WeightSpec {
        self.pow(1.0)
    }

    pub fn pow(&self, e: f64) -> WeightSpec {
        let mut c = Canon { constant: 1.0, ..Default::default() };
        c.absorb(self, e);
        c.build()
    }

    pub fn mul(&self, other: &WeightSpec) -> WeightSpec {
        product_of_powers(&[(self, 1.0), (other, 1.0)])
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            WeightSpec::Constant { value } => *value,
            WeightSpec::Power { center, exponent } => dist(x, center).powf(*exponent),
            WeightSpec::Log { center } => 1.0 + dist(x, center).ln().abs(),
            WeightSpec::Tabulated { grid } => grid.lookup(x),
            WeightSpec::Product { factors } => factors.iter().map(|f| f.eval(x)).product(),
            WeightSpec::PowerOf { base, exponent } => base.eval(x).powf(*exponent),
        }
    }

    /// Spatial dimension implied by centers or tabulated data, if any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            WeightSpec::Constant { .. } => None,
            WeightSpec::Power { center, .. } | WeightSpec::Log { center } => Some(center.len()),
            WeightSpec::Tabulated { grid } => Some(grid.dim),
            WeightSpec::Product { factors } => factors.iter().find_map(|f| f.dim()),
            WeightSpec::PowerOf { base, .. } => base.dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            WeightSpec::Constant { value } => {
                if !(*value > 0.0 && value.is_finite()) {
                    return invalid(format!("constant weight must be positive, got {value}"));
                }
            }
            WeightSpec::Power { center, exponent } => {
                check_center(center)?;
                if !exponent.is_finite() {
                    return invalid("power exponent must be finite");
                }
            }
            WeightSpec::Log { center } => check_center(center)?,
            WeightSpec::Tabulated { grid } => {
                crate::grid_quadrature::GridSpec::new(grid.dim, grid.n, grid.half_width)?;
                if grid.values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                    return invalid("tabulated weight values must be positive and finite");
                }
            }
            WeightSpec::Product { factors } => {
                if factors.is_empty() {
                    return invalid("product weight needs at least one factor");
                }
                let mut d = None;
                for f in factors {
                    f.validate()?;
                    match (d, f.dim()) {
                        (Some(a), Some(b)) if a != b => return invalid("product factors disagree on dimension"),
                        (None, Some(b)) => d = Some(b),
                        _ => {}
                    }
                }
            }
            WeightSpec::PowerOf { base, exponent } => {
                base.validate()?;
                if !exponent.is_finite() {
                    return invalid("power exponent must be finite");
                }
            }
        }
        Ok(())
    }

    /// Short human-readable form, used in logs and CSV columns.
    pub fn describe(&self) -> String {
        match self {
            WeightSpec::Constant { value } => format!("{value}"),
            WeightSpec::Power { center, exponent } => format!("|x-{center:?}|^{exponent}"),
            WeightSpec::Log { center } => format!("(1+|log|x-{center:?}||)"),
            WeightSpec::Tabulated { grid } => format!("tab[{}^{}]", grid.n, grid.dim),
            WeightSpec::Product { factors } => {
                factors.iter().map(|f| f.describe()).collect::<Vec<_>>().join("*")
            }
            WeightSpec::PowerOf { base, exponent } => format!("({})^{exponent}", base.describe()),
        }
    }
}

fn check_center(c: &[f64]) -> Result<()> {
    if !(1..=2).contains(&c.len()) || c.iter().any(|v| !v.is_finite()) {
        return invalid("weight center must be a finite point in dimension 1 or 2");
    }
    Ok(())
}

/// Canonical `prod_j w_j^{e_j}`.
pub fn product_of_powers(parts: &[(&WeightSpec, f64)]) -> WeightSpec {
    let mut c = Canon { constant: 1.0, ..Default::default() };
    for (w, e) in parts {
        c.absorb(w, *e);
    }
    c.build()
}

pub type WeightVector = Vec<WeightSpec>;

/// Exponent vector with exact rational entries, each at least 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExponentVector {
    #[serde(with = "serde_rat_vec")]
    entries: Vec<Rat>,
}

impl ExponentVector {
    pub fn new(entries: Vec<Rat>) -> Result<Self> {
        if entries.is_empty() {
            return invalid("exponent vector must be non-empty");
        }
        if let Some(e) = entries.iter().find(|e| **e < Rat::one()) {
            return invalid(format!("exponent entries must be >= 1, got {}", fmt_rat(e)));
        }
        Ok(ExponentVector { entries })
    }

    pub fn parse(items: &[&str]) -> Result<Self> {
        Self::new(items.iter().map(|s| crate::numeric::parse_rat(s)).collect::<Result<_>>()?)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Rat] {
        &self.entries
    }

    pub fn get(&self, j: usize) -> &Rat {
        &self.entries[j]
    }

    /// `sum_j 1/p_j`, i.e. `1/p`.
    pub fn harmonic(&self) -> Rat {
        self.entries.iter().fold(Rat::zero(), |acc, e| acc + e.recip())
    }

    pub fn p(&self) -> Rat {
        self.harmonic().recip()
    }

    pub fn conj(&self, j: usize) -> Option<Rat> {
        conj(&self.entries[j])
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.entries.iter().map(to_f64).collect()
    }

    pub fn validate_against(&self, other: &ExponentVector, what: &str) -> Result<()> {
        if self.len() != other.len() {
            return invalid(format!("{what}: exponent vectors have different lengths"));
        }
        Ok(())
    }
}

/// `nu_{w,p} = prod_j w_j^{p/p_j}`.
pub fn nu_weight(w: &[WeightSpec], p: &ExponentVector) -> Result<WeightSpec> {
    if w.len() != p.len() {
        return invalid("weight and exponent vectors have different lengths");
    }
    let pp = p.p();
    let parts: Vec<(&WeightSpec, f64)> = w.iter().zip(p.entries()).map(|(wj, pj)| (wj, to_f64(&(&pp / pj)))).collect();
    Ok(product_of_powers(&parts))
}

/// `nu_w = prod_j w_j`.
pub fn nu_plain(w: &[WeightSpec]) -> WeightSpec {
    let parts: Vec<(&WeightSpec, f64)> = w.iter().map(|wj| (wj, 1.0)).collect();
    product_of_powers(&parts)
}

/// `w^{1-p'}`, the dual weight of `w` in `A_p`.
pub(crate) fn dual_weight(w: &WeightSpec, p: f64) -> Result<WeightSpec> {
    if !(p > 1.0) {
        return precondition(format!("dual weight needs p > 1, got {p}"));
    }
    Ok(w.pow(-1.0 / (p - 1.0)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ClassTag {
    Ap { p: f64 },
    Apq { p: f64, q: f64 },
    MultAp {
        #[serde(with = "serde_rat_vec")]
        p: Vec<Rat>,
    },
    MultApS {
        #[serde(with = "serde_rat_vec")]
        p: Vec<Rat>,
        #[serde(with = "serde_rat_vec")]
        s: Vec<Rat>,
    },
    MultApQ {
        #[serde(with = "serde_rat_vec")]
        p: Vec<Rat>,
        #[serde(with = "crate::numeric::serde_rat")]
        p_star: Rat,
    },
    Bmo,
}

/// Class constant measured over a finite family; a lower bound for the true supremum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassConstant {
    pub value: ExtReal,
    pub family: FamilySpec,
    pub class: ClassTag,
    pub borderline: bool,
}

#[derive(Clone, Copy, Debug)]
struct CubeValue {
    value: f64,
    borderline: bool,
}

impl CubeValue {
    fn from_parts(v: f64, parts: &[&QuadResult]) -> Self {
        let inf = parts.iter().any(|q| q.status == Convergence::Diverged || q.value.is_infinite());
        CubeValue {
            value: if inf { f64::INFINITY } else { v },
            borderline: parts.iter().any(|q| q.status == Convergence::Borderline),
        }
    }
}

fn sup_over<F>(family: &CubeFamily, per_cube: F) -> Result<(f64, bool)>
where
    F: Fn(&Cube) -> Result<CubeValue> + Sync,
{
    let vals: Vec<CubeValue> = family.cubes().par_iter().map(&per_cube).collect::<Result<_>>()?;
    let mut sup = 0.0f64;
    let mut borderline = false;
    for v in vals {
        if v.value.is_nan() {
            return Err(crate::error::Error::Degenerate("class constant evaluated to NaN".into()));
        }
        sup = sup.max(v.value);
        borderline |= v.borderline;
    }
    Ok((sup, borderline))
}

fn avg(w: &WeightSpec, q: &Cube, cfg: &QuadratureConfig) -> Result<QuadResult> {
    average_with(&|x: &[f64]| w.eval(x), q, cfg)
}

/// Essential infimum proxy: node minimum, with divergence of `1/min` under refinement detected.
pub fn node_infimum(w: &WeightSpec, q: &Cube, cfg: &QuadratureConfig) -> Result<QuadResult> {
    let m = cfg.resolution.max(1);
    let levels: Vec<usize> = if m >= 8 { (0..4).map(|k| m >> (3 - k)).collect() } else { vec![m] };
    let mut recips = [0.0; 4];
    let mut last = 0.0;
    for (k, &mk) in levels.iter().enumerate() {
        let (lo, _) = crate::grid_quadrature::node_extrema(&|x: &[f64]| w.eval(x), q, mk)?;
        last = lo;
        if k < 4 {
            recips[k] = if lo > 0.0 { 1.0 / lo } else { f64::INFINITY };
        }
    }
    if levels.len() < 4 {
        return Ok(QuadResult { value: last, status: Convergence::Converged });
    }
    let status = divergence_status(&recips, cfg);
    let value = if status == Convergence::Diverged || last <= 0.0 { 0.0 } else { last };
    Ok(QuadResult { value, status })
}

fn check_family(family: &CubeFamily, w: &WeightSpec) -> Result<()> {
    if let Some(d) = w.dim() {
        if d != family.spec().dim {
            return invalid(format!("weight dimension {d} does not match family dimension {}", family.spec().dim));
        }
    }
    Ok(())
}

/// `sup_Q <w>_Q <w^{-1/(p-1)}>_Q^{p-1}`; for `p = 1`, `sup_Q <w>_Q / inf_Q w`.
pub fn ap_constant(w: &WeightSpec, p: f64, family: &CubeFamily, cfg: &QuadratureConfig) -> Result<ClassConstant> {
    if !(p >= 1.0 && p.is_finite()) {
        return precondition(format!("A_p needs 1 <= p < inf, got {p}"));
    }
    check_family(family, w)?;
    let w = w.simplify();
    let (value, borderline) = if p == 1.0 {
        sup_over(family, |q| {
            let a = avg(&w, q, cfg)?;
            let m = node_infimum(&w, q, cfg)?;
            let v = if m.value > 0.0 { a.value / m.value } else { f64::INFINITY };
            Ok(CubeValue::from_parts(v, &[&a, &m]))
        })?
    } else {
        let sigma = w.pow(-1.0 / (p - 1.0));
        sup_over(family, |q| {
            let a = avg(&w, q, cfg)?;
            let b = avg(&sigma, q, cfg)?;
            Ok(CubeValue::from_parts(a.value * b.value.powf(p - 1.0), &[&a, &b]))
        })?
    };
    Ok(ClassConstant { value: ExtReal(value), family: family.spec().clone(), class: ClassTag::Ap { p }, borderline })
}

/// `sup_Q <w^q>^{1/q} <w^{-p'}>^{1/p'}`.
pub fn apq_constant(w: &WeightSpec, p: f64, q: f64, family: &CubeFamily, cfg: &QuadratureConfig) -> Result<ClassConstant> {
    if !(p > 1.0 && q >= p && q.is_finite()) {
        return precondition(format!("A_(p,q) needs 1 < p <= q < inf, got p = {p}, q = {q}"));
    }
    check_family(family, w)?;
    let pc = p / (p - 1.0);
    let wq = w.pow(q);
    let wd = w.pow(-pc);
    let (value, borderline) = sup_over(family, |c| {
        let a = avg(&wq, c, cfg)?;
        let b = avg(&wd, c, cfg)?;
        Ok(CubeValue::from_parts(a.value.powf(1.0 / q) * b.value.powf(1.0 / pc), &[&a, &b]))
    })?;
    Ok(ClassConstant { value: ExtReal(value), family: family.spec().clone(), class: ClassTag::Apq { p, q }, borderline })
}

/// One factor of a multilinear constant: either `<W>^e` or `(inf W)^e` with `e < 0`.
#[derive(Clone, Debug)]
enum Factor {
    Mean { weight: WeightSpec, exponent: f64 },
    Infimum { weight: WeightSpec, exponent: f64 },
}

fn product_sup(family: &CubeFamily, factors: &[Factor], cfg: &QuadratureConfig) -> Result<(f64, bool)> {
    sup_over(family, |q| {
        let mut v = 1.0;
        let mut parts = Vec::with_capacity(factors.len());
        for f in factors {
            match f {
                Factor::Mean { weight, exponent } => {
                    let a = avg(weight, q, cfg)?;
                    v *= a.value.powf(*exponent);
                    parts.push(a);
                }
                Factor::Infimum { weight, exponent } => {
                    let m = node_infimum(weight, q, cfg)?;
                    v *= if m.value > 0.0 { m.value.powf(*exponent) } else { f64::INFINITY };
                    parts.push(QuadResult { value: if m.value > 0.0 { 1.0 } else { f64::INFINITY }, status: m.status });
                }
            }
        }
        let refs: Vec<&QuadResult> = parts.iter().collect();
        Ok(CubeValue::from_parts(v, &refs))
    })
}

fn check_vectors(w: &[WeightSpec], p: &ExponentVector, family: &CubeFamily) -> Result<()> {
    if w.len() != p.len() {
        return invalid("weight and exponent vectors have different lengths");
    }
    w.iter().try_for_each(|wj| check_family(family, wj))
}

/// Multilinear `A_{p/s}` constant:
/// `sup_Q <nu_{w,p}>^{1/p} prod_j <w_j^{1-(p_j/s_j)'}>^{1/s_j - 1/p_j}`,
/// with `(inf_Q w_j)^{-1/p_j}` in place of the j-th mean when `p_j = s_j`.
pub fn multilinear_aps_constant(
    w: &[WeightSpec],
    p: &ExponentVector,
    s: &ExponentVector,
    family: &CubeFamily,
    cfg: &QuadratureConfig,
) -> Result<ClassConstant> {
    check_vectors(w, p, family)?;
    p.validate_against(s, "A_(p/s)")?;
    let pp = p.p();
    let mut factors = vec![Factor::Mean { weight: nu_weight(w, p)?, exponent: to_f64(&pp.recip()) }];
    for j in 0..p.len() {
        let (pj, sj) = (p.get(j), s.get(j));
        if sj > pj {
            return precondition(format!("A_(p/s) needs p_j >= s_j, got p_{j} = {}, s_{j} = {}", fmt_rat(pj), fmt_rat(sj)));
        }
        if pj == sj {
            factors.push(Factor::Infimum { weight: w[j].clone(), exponent: -to_f64(&pj.recip()) });
        } else {
            let ratio = pj / sj;
            let rc = conj(&ratio).expect("ratio exceeds 1");
            let e = Rat::one() - rc;
            factors.push(Factor::Mean { weight: w[j].pow(to_f64(&e)), exponent: to_f64(&(sj.recip() - pj.recip())) });
        }
    }
    let (value, borderline) = product_sup(family, &factors, cfg)?;
    Ok(ClassConstant {
        value: ExtReal(value),
        family: family.spec().clone(),
        class: ClassTag::MultApS { p: p.entries().to_vec(), s: s.entries().to_vec() },
        borderline,
    })
}

/// Multilinear `A_p` constant:
/// `sup_Q <nu_{w,p}>^{1/p} prod_j <w_j^{1-p_j'}>^{1/p_j'}`, with `(inf_Q w_j)^{-1}` when `p_j = 1`.
pub fn multilinear_ap_constant(
    w: &[WeightSpec],
    p: &ExponentVector,
    family: &CubeFamily,
    cfg: &QuadratureConfig,
) -> Result<ClassConstant> {
    check_vectors(w, p, family)?;
    let pp = p.p();
    let mut factors = vec![Factor::Mean { weight: nu_weight(w, p)?, exponent: to_f64(&pp.recip()) }];
    for j in 0..p.len() {
        match p.conj(j) {
            None => factors.push(Factor::Infimum { weight: w[j].clone(), exponent: -1.0 }),
            Some(pc) => factors.push(Factor::Mean {
                weight: w[j].pow(to_f64(&(Rat::one() - &pc))),
                exponent: to_f64(&pc.recip()),
            }),
        }
    }
    let (value, borderline) = product_sup(family, &factors, cfg)?;
    Ok(ClassConstant {
        value: ExtReal(value),
        family: family.spec().clone(),
        class: ClassTag::MultAp { p: p.entries().to_vec() },
        borderline,
    })
}

/// Multilinear `A_{p,p*}` constant:
/// `sup_Q <nu_w^{p*}>^{1/p*} prod_j <w_j^{-p_j'}>^{1/p_j'}`, with `(inf_Q w_j)^{-1}` when `p_j = 1`.
pub fn multilinear_apq_constant(
    w: &[WeightSpec],
    p: &ExponentVector,
    p_star: &Rat,
    family: &CubeFamily,
    cfg: &QuadratureConfig,
) -> Result<ClassConstant> {
    check_vectors(w, p, family)?;
    let m = Rat::from_integer((p.len() as i64).into());
    let pp = p.p();
    if !(pp > m.recip() && *p_star >= pp) {
        return precondition(format!(
            "A_(p,p*) needs 1/m < p <= p*, got p = {}, p* = {}",
            fmt_rat(&pp),
            fmt_rat(p_star)
        ));
    }
    let ps = to_f64(p_star);
    let mut factors = vec![Factor::Mean { weight: nu_plain(w).pow(ps), exponent: 1.0 / ps }];
    for j in 0..p.len() {
        match p.conj(j) {
            None => factors.push(Factor::Infimum { weight: w[j].clone(), exponent: -1.0 }),
            Some(pc) => {
                let pcf = to_f64(&pc);
                factors.push(Factor::Mean { weight: w[j].pow(-pcf), exponent: 1.0 / pcf });
            }
        }
    }
    let (value, borderline) = product_sup(family, &factors, cfg)?;
    Ok(ClassConstant {
        value: ExtReal(value),
        family: family.spec().clone(),
        class: ClassTag::MultApQ { p: p.entries().to_vec(), p_star: p_star.clone() },
        borderline,
    })
}

/// `sup_Q <|b - <b>_Q|>_Q`.
pub fn bmo_norm<B>(b: &B, family: &CubeFamily, cfg: &QuadratureConfig) -> Result<ClassConstant>
where
    B: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    let (value, borderline) = sup_over(family, |q| {
        let mean = average_with(b, q, cfg)?;
        if !mean.value.is_finite() {
            return Ok(CubeValue { value: f64::INFINITY, borderline: false });
        }
        let osc = average_with(&|x: &[f64]| (b(x) - mean.value).abs(), q, cfg)?;
        Ok(CubeValue::from_parts(osc.value, &[&mean, &osc]))
    })?;
    Ok(ClassConstant { value: ExtReal(value), family: family.spec().clone(), class: ClassTag::Bmo, borderline })
}

/// Stability proxy for membership: finite value that grows by less than `tolerance`
/// when `extra_levels` finer levels are added to the family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityConfig {
    pub extra_levels: u32,
    pub tolerance: f64,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        StabilityConfig { extra_levels: 2, tolerance: 0.01 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Member,
    NonMember,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub class: ClassTag,
    pub value: ExtReal,
    pub extended_value: ExtReal,
    pub family: FamilySpec,
    pub extended_family: FamilySpec,
    pub borderline: bool,
    pub verdict: Verdict,
}

impl MembershipReport {
    pub fn is_member(&self) -> bool {
        self.verdict == Verdict::Member
    }
}

/// Evaluate a class constant on `spec` and on the refinement band, and classify.
pub fn membership<F>(compute: F, spec: &FamilySpec, stab: &StabilityConfig) -> Result<MembershipReport>
where
    F: Fn(&CubeFamily) -> Result<ClassConstant>,
{
    let base = compute(&CubeFamily::from_spec(spec)?)?;
    let band = if stab.extra_levels > 0 {
        Some(compute(&CubeFamily::from_spec(&spec.refinement_band(stab.extra_levels))?)?)
    } else {
        None
    };
    let ext = band.as_ref().map_or(base.value.0, |b| base.value.0.max(b.value.0));
    let borderline = base.borderline || band.as_ref().is_some_and(|b| b.borderline);
    let verdict = if !base.value.is_finite() || !ext.is_finite() {
        Verdict::NonMember
    } else if borderline || ext > base.value.0 * (1.0 + stab.tolerance) {
        Verdict::Inconclusive
    } else {
        Verdict::Member
    };
    Ok(MembershipReport {
        class: base.class,
        value: base.value,
        extended_value: ExtReal(ext),
        family: spec.clone(),
        extended_family: spec.extended(stab.extra_levels),
        borderline,
        verdict,
    })
}
