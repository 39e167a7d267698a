//! Componentwise characterizations of the multilinear classes, scalar duality,
//! and reverse Hölder exponent estimation.

use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, precondition, Result};
use crate::grid_quadrature::{average_with, Convergence, CubeFamily, FamilySpec, QuadratureConfig};
use crate::numeric::{conj, fmt_rat, int, serde_rat, serde_rat_vec, to_f64, Rat};
use crate::weight_classes::{
    ap_constant, membership, multilinear_ap_constant, multilinear_apq_constant, multilinear_aps_constant,
    product_of_powers, ExponentVector, MembershipReport, StabilityConfig, Verdict, WeightSpec,
};

/// `(w^{1-p'}, p')`.
pub fn dual_weight(w: &WeightSpec, p: f64) -> Result<(WeightSpec, f64)> {
    let d = crate::weight_classes::dual_weight(w, p)?;
    Ok((d, p / (p - 1.0)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScalarClass {
    A1,
    Ap {
        #[serde(with = "serde_rat")]
        p: Rat,
    },
}

impl ScalarClass {
    fn ap(p: Rat) -> Self {
        if p.is_one() {
            ScalarClass::A1
        } else {
            ScalarClass::Ap { p }
        }
    }

    pub fn index(&self) -> f64 {
        match self {
            ScalarClass::A1 => 1.0,
            ScalarClass::Ap { p } => to_f64(p),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ScalarClass::A1 => "A_1".into(),
            ScalarClass::Ap { p } => format!("A_{}", fmt_rat(p)),
        }
    }
}

/// Transform of a weight vector into a scalar weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightTransform {
    /// `w_index^exponent`.
    Component {
        index: usize,
        #[serde(with = "serde_rat")]
        exponent: Rat,
    },
    /// `prod_j w_j^{exponents[j]}`.
    Nu {
        #[serde(with = "serde_rat_vec")]
        exponents: Vec<Rat>,
    },
}

impl WeightTransform {
    pub fn apply(&self, w: &[WeightSpec]) -> Result<WeightSpec> {
        match self {
            WeightTransform::Component { index, exponent } => {
                let wj = w.get(*index).ok_or_else(|| crate::Error::InvalidInput(format!("no component {index}")))?;
                Ok(wj.pow(to_f64(exponent)))
            }
            WeightTransform::Nu { exponents } => {
                if exponents.len() != w.len() {
                    return invalid("transform length does not match weight vector");
                }
                let parts: Vec<(&WeightSpec, f64)> = w.iter().zip(exponents).map(|(wj, e)| (wj, to_f64(e))).collect();
                Ok(product_of_powers(&parts))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionEntry {
    pub label: String,
    pub transform: WeightTransform,
    pub class: ScalarClass,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriterionKind {
    /// Componentwise description of `A_{p/s}`.
    RescaledAp,
    /// Componentwise description of `A_{p,p*}`.
    OffDiagonal,
    /// Componentwise description of the plain multilinear `A_p`.
    MultilinearAp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentCriterion {
    pub kind: CriterionKind,
    pub entries: Vec<CriterionEntry>,
}

fn m_of(p: &ExponentVector) -> Rat {
    int(p.len() as i64)
}

/// Entries `w_j^{1-(p_j/s_j)'} in A_{p_j s_j/(s(p_j-s_j))}` (or `w_j^{s/p_j} in A_1` when
/// `p_j = s_j`) and `nu_{w,p} in A_{p/s}`.
pub fn jiao_criterion(p: &ExponentVector, s: &ExponentVector) -> Result<ComponentCriterion> {
    p.validate_against(s, "rescaled criterion")?;
    let s_h = s.p();
    let pp = p.p();
    let mut entries = Vec::with_capacity(p.len() + 1);
    for j in 0..p.len() {
        let (pj, sj) = (p.get(j), s.get(j));
        if sj > pj {
            return precondition(format!("need s_j <= p_j, got s_{j} = {}, p_{j} = {}", fmt_rat(sj), fmt_rat(pj)));
        }
        if pj == sj {
            entries.push(CriterionEntry {
                label: format!("w_{}^(s/p_{})", j + 1, j + 1),
                transform: WeightTransform::Component { index: j, exponent: &s_h / pj },
                class: ScalarClass::A1,
            });
        } else {
            let rc = conj(&(pj / sj)).expect("p_j/s_j > 1");
            entries.push(CriterionEntry {
                label: format!("w_{}^(1-(p_{}/s_{})')", j + 1, j + 1, j + 1),
                transform: WeightTransform::Component { index: j, exponent: Rat::one() - rc },
                class: ScalarClass::ap(pj * sj / (&s_h * (pj - sj))),
            });
        }
    }
    entries.push(CriterionEntry {
        label: "nu_(w,p)".into(),
        transform: WeightTransform::Nu { exponents: p.entries().iter().map(|pj| &pp / pj).collect() },
        class: ScalarClass::ap(&pp / &s_h),
    });
    Ok(ComponentCriterion { kind: CriterionKind::RescaledAp, entries })
}

/// Entries `w_j^{-p_j'} in A_{m p_j'}` (or `w_j^{1/m} in A_1` when `p_j = 1`) and
/// `nu_w^{p*} in A_{m p*}`.
pub fn moen_criterion(p: &ExponentVector, p_star: &Rat) -> Result<ComponentCriterion> {
    let m = m_of(p);
    let pp = p.p();
    if pp < m.recip() || *p_star < pp {
        return precondition(format!("need 1/m <= p <= p*, got p = {}, p* = {}", fmt_rat(&pp), fmt_rat(p_star)));
    }
    let mut entries = Vec::with_capacity(p.len() + 1);
    for j in 0..p.len() {
        match p.conj(j) {
            None => entries.push(CriterionEntry {
                label: format!("w_{}^(1/m)", j + 1),
                transform: WeightTransform::Component { index: j, exponent: m.recip() },
                class: ScalarClass::A1,
            }),
            Some(pc) => entries.push(CriterionEntry {
                label: format!("w_{}^(-p_{}')", j + 1, j + 1),
                transform: WeightTransform::Component { index: j, exponent: -pc.clone() },
                class: ScalarClass::ap(&m * pc),
            }),
        }
    }
    entries.push(CriterionEntry {
        label: "nu_w^(p*)".into(),
        transform: WeightTransform::Nu { exponents: vec![p_star.clone(); p.len()] },
        class: ScalarClass::ap(&m * p_star),
    });
    Ok(ComponentCriterion { kind: CriterionKind::OffDiagonal, entries })
}

/// Entries `w_j^{1-p_j'} in A_{m p_j'}` (or `w_j^{1/m} in A_1`) and `nu_{w,p} in A_{mp}`.
pub fn multilinear_ap_criterion(p: &ExponentVector) -> Result<ComponentCriterion> {
    let m = m_of(p);
    let pp = p.p();
    let mut entries = Vec::with_capacity(p.len() + 1);
    for j in 0..p.len() {
        match p.conj(j) {
            None => entries.push(CriterionEntry {
                label: format!("w_{}^(1/m)", j + 1),
                transform: WeightTransform::Component { index: j, exponent: m.recip() },
                class: ScalarClass::A1,
            }),
            Some(pc) => entries.push(CriterionEntry {
                label: format!("w_{}^(1-p_{}')", j + 1, j + 1),
                transform: WeightTransform::Component { index: j, exponent: Rat::one() - &pc },
                class: ScalarClass::ap(&m * pc),
            }),
        }
    }
    entries.push(CriterionEntry {
        label: "nu_(w,p)".into(),
        transform: WeightTransform::Nu { exponents: p.entries().iter().map(|pj| &pp / pj).collect() },
        class: ScalarClass::ap(&m * pp),
    });
    Ok(ComponentCriterion { kind: CriterionKind::MultilinearAp, entries })
}

/// The multilinear class measured directly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DirectClass {
    MultAp {
        p: ExponentVector,
    },
    MultApS {
        p: ExponentVector,
        s: ExponentVector,
    },
    MultApQ {
        p: ExponentVector,
        #[serde(with = "serde_rat")]
        p_star: Rat,
    },
}

impl DirectClass {
    pub fn membership(
        &self,
        w: &[WeightSpec],
        spec: &FamilySpec,
        cfg: &QuadratureConfig,
        stab: &StabilityConfig,
    ) -> Result<MembershipReport> {
        match self {
            DirectClass::MultAp { p } => membership(|f| multilinear_ap_constant(w, p, f, cfg), spec, stab),
            DirectClass::MultApS { p, s } => membership(|f| multilinear_aps_constant(w, p, s, f, cfg), spec, stab),
            DirectClass::MultApQ { p, p_star } => {
                membership(|f| multilinear_apq_constant(w, p, p_star, f, cfg), spec, stab)
            }
        }
    }

    pub fn criterion(&self) -> Result<ComponentCriterion> {
        match self {
            DirectClass::MultAp { p } => multilinear_ap_criterion(p),
            DirectClass::MultApS { p, s } => jiao_criterion(p, s),
            DirectClass::MultApQ { p, p_star } => moen_criterion(p, p_star),
        }
    }
}

/// Membership of a single transformed weight in its scalar class.
pub fn scalar_membership(
    w: &WeightSpec,
    class: &ScalarClass,
    spec: &FamilySpec,
    cfg: &QuadratureConfig,
    stab: &StabilityConfig,
) -> Result<MembershipReport> {
    let p = class.index();
    membership(|f| ap_constant(w, p, f, cfg), spec, stab)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryReport {
    pub label: String,
    pub weight: WeightSpec,
    pub class: ScalarClass,
    pub membership: MembershipReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub direct: MembershipReport,
    pub entries: Vec<EntryReport>,
    pub componentwise: Verdict,
    /// `None` when either side is inconclusive.
    pub agree: Option<bool>,
}

fn conjunction(vs: impl IntoIterator<Item = Verdict>) -> Verdict {
    let mut out = Verdict::Member;
    for v in vs {
        match v {
            Verdict::NonMember => return Verdict::NonMember,
            Verdict::Inconclusive => out = Verdict::Inconclusive,
            Verdict::Member => {}
        }
    }
    out
}

/// Compare the direct multilinear verdict with the conjunction of componentwise verdicts.
pub fn verify_equivalence(
    w: &[WeightSpec],
    criterion: &ComponentCriterion,
    direct: &DirectClass,
    spec: &FamilySpec,
    cfg: &QuadratureConfig,
    stab: &StabilityConfig,
) -> Result<EquivalenceReport> {
    let direct_report = direct.membership(w, spec, cfg, stab)?;
    let mut entries = Vec::with_capacity(criterion.entries.len());
    for e in &criterion.entries {
        let weight = e.transform.apply(w)?;
        let membership = scalar_membership(&weight, &e.class, spec, cfg, stab)?;
        entries.push(EntryReport { label: e.label.clone(), weight, class: e.class.clone(), membership });
    }
    // A single non-member entry settles the conjunction even if others are unclear.
    let componentwise = conjunction(entries.iter().map(|e| e.membership.verdict));
    let agree = match (direct_report.verdict, componentwise) {
        (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => None,
        (a, b) => Some(a == b),
    };
    Ok(EquivalenceReport { direct: direct_report, entries, componentwise, agree })
}

/// Uniform grid of reverse Hölder exponents `first, first + step, ...`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TGrid {
    pub first: f64,
    pub step: f64,
    pub count: usize,
}

impl Default for TGrid {
    fn default() -> Self {
        TGrid { first: 1.01, step: 0.01, count: 100 }
    }
}

impl TGrid {
    pub fn point(&self, k: usize) -> f64 {
        // Computed from integers so that, e.g., the default grid hits 2.00 exactly.
        let scale = (1.0 / self.step).round();
        if (scale * self.step - 1.0).abs() < 1e-12 {
            ((self.first * scale).round() + k as f64) / scale
        } else {
            self.first + k as f64 * self.step
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 || !(self.first > 1.0) || !(self.step > 0.0) {
            return invalid("reverse Hölder grid must be non-empty, start above 1 and increase");
        }
        Ok(())
    }
}

/// Largest ratio `<W^t>^{1/t} / <W>` over the family, and whether any cube was borderline.
pub fn rhi_ratio(w: &WeightSpec, t: f64, family: &CubeFamily, cfg: &QuadratureConfig) -> Result<(f64, bool)> {
    let w = w.simplify();
    let wt = w.pow(t);
    let vals: Vec<(f64, bool)> = family
        .cubes()
        .par_iter()
        .map(|q| {
            let a = average_with(&|x: &[f64]| w.eval(x), q, cfg)?;
            let b = average_with(&|x: &[f64]| wt.eval(x), q, cfg)?;
            let border = a.status == Convergence::Borderline || b.status == Convergence::Borderline;
            if !a.value.is_finite() || !b.value.is_finite() {
                return Ok((f64::INFINITY, border));
            }
            Ok((b.value.powf(1.0 / t) / a.value, border))
        })
        .collect::<Result<_>>()?;
    Ok(vals.into_iter().fold((0.0, false), |(m, bd), (v, b)| (m.max(v), bd || b)))
}

/// Relative rounding allowance in the reverse Hölder comparison.
const RHI_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhiCertificate {
    pub weight: WeightSpec,
    pub t_grid: TGrid,
    pub eta: f64,
    pub constant: f64,
    pub family: FamilySpec,
    /// Measured ratio at `t = 1 + eta`; absent when no grid point passes.
    pub ratio_at_eta: Option<f64>,
}

impl RhiCertificate {
    /// Re-evaluate the inequality at `1 + eta` over the recorded family.
    pub fn recheck(&self, cfg: &QuadratureConfig) -> Result<bool> {
        if self.eta == 0.0 {
            return Ok(true);
        }
        let fam = CubeFamily::from_spec(&self.family)?;
        let (r, _) = rhi_ratio(&self.weight, 1.0 + self.eta, &fam, cfg)?;
        Ok(r <= self.constant * (1.0 + RHI_SLACK))
    }
}

/// `eta = max { t - 1 : <w^t>^{1/t} <= C <w>` on every cube `}` over the grid; 0 if none passes.
///
/// The per-cube ratio is nondecreasing in `t`, so the grid is bisected.
pub fn rhi_exponent(
    w: &WeightSpec,
    family: &CubeFamily,
    c: f64,
    t_grid: &TGrid,
    cfg: &QuadratureConfig,
) -> Result<RhiCertificate> {
    if !(c >= 1.0) {
        return precondition(format!("reverse Hölder constant must be >= 1, got {c}"));
    }
    t_grid.validate()?;
    let passes = |k: usize| -> Result<Option<f64>> {
        let (r, _) = rhi_ratio(w, t_grid.point(k), family, cfg)?;
        Ok((r <= c * (1.0 + RHI_SLACK)).then_some(r))
    };
    let mut best: Option<(usize, f64)> = None;
    let (mut lo, mut hi) = (0usize, t_grid.count);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        match passes(mid)? {
            Some(r) => {
                best = Some((mid, r));
                lo = mid + 1;
            }
            None => hi = mid,
        }
    }
    let (eta, ratio_at_eta) = match best {
        Some((k, r)) => (t_grid.point(k) - 1.0, Some(r)),
        None => (0.0, None),
    };
    Ok(RhiCertificate {
        weight: w.clone(),
        t_grid: t_grid.clone(),
        eta,
        constant: c,
        family: family.spec().clone(),
        ratio_at_eta,
    })
}
