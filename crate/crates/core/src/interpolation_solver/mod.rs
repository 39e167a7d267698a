//! Interpolation certificates: given target data `(q, v)` and `(r, w)`, find `theta`,
//! intermediate exponents `p(theta)` and weights `u(theta)` with `u` in the matching class.

mod algebra;

pub use algebra::*;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::characterization::{rhi_exponent, rhi_ratio, DirectClass, RhiCertificate, TGrid};
use crate::error::{invalid, precondition, Error, Result};
use crate::grid_quadrature::{CubeFamily, FamilySpec, QuadratureConfig};
use crate::numeric::{fmt_rat, int, serde_rat, serde_rat_opt, serde_rat_vec, to_f64, ExtReal, Rat};
use crate::weight_classes::{
    ap_constant, membership, ExponentVector, MembershipReport, StabilityConfig, Verdict, WeightSpec,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExtrapolationCase {
    DiagonalVector {
        s: ExponentVector,
    },
    DiagonalComponentwise {
        s: ExponentVector,
    },
    OffDiagonalVector {
        #[serde(with = "serde_rat")]
        alpha: Rat,
    },
    OffDiagonalComponentwise {
        #[serde(with = "serde_rat")]
        alpha: Rat,
    },
}

impl ExtrapolationCase {
    pub fn is_componentwise(&self) -> bool {
        matches!(self, ExtrapolationCase::DiagonalComponentwise { .. } | ExtrapolationCase::OffDiagonalComponentwise { .. })
    }

    pub fn alpha(&self) -> Option<&Rat> {
        match self {
            ExtrapolationCase::OffDiagonalVector { alpha } | ExtrapolationCase::OffDiagonalComponentwise { alpha } => {
                Some(alpha)
            }
            _ => None,
        }
    }
}

/// Geometric schedule `2^-1, 2^-2, ..., 2^-max_exponent`, searched from the largest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaSchedule {
    pub max_exponent: u32,
}

impl Default for ThetaSchedule {
    fn default() -> Self {
        ThetaSchedule { max_exponent: 20 }
    }
}

impl ThetaSchedule {
    pub fn thetas(&self) -> impl Iterator<Item = Rat> {
        (1..=self.max_exponent).map(|k| Rat::new(1.into(), num_bigint::BigInt::from(2).pow(k)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub family: FamilySpec,
    pub quadrature: QuadratureConfig,
    pub stability: StabilityConfig,
    pub c_rhi: f64,
    pub t_grid: TGrid,
    pub schedule: ThetaSchedule,
    pub residual_tolerance: f64,
    pub identity_samples: usize,
    pub product_bounds: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            family: FamilySpec::new(1, 4.0, 0, 8, vec![0.0, 0.5]),
            quadrature: QuadratureConfig::default(),
            stability: StabilityConfig::default(),
            c_rhi: 2.0,
            t_grid: TGrid::default(),
            schedule: ThetaSchedule::default(),
            residual_tolerance: 1e-10,
            identity_samples: 1000,
            product_bounds: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum PartKind {
    Diagonal { s: ExponentVector },
    OffDiagonal { alpha: Rat },
}

/// A vector problem the lemmas treat in one piece: the whole input for the vector cases,
/// or a single component (with `m = 1`) for the componentwise cases.
#[derive(Clone, Debug)]
struct Part {
    kind: PartKind,
    q: ExponentVector,
    r: ExponentVector,
    v: Vec<WeightSpec>,
    w: Vec<WeightSpec>,
}

fn star(x_inv: &Rat, alpha: &Rat) -> Rat {
    (x_inv - alpha).recip()
}

impl Part {
    fn m(&self) -> usize {
        self.q.len()
    }

    fn hypothesis_class(&self, x: &ExponentVector) -> DirectClass {
        match &self.kind {
            PartKind::Diagonal { s } => DirectClass::MultApS { p: x.clone(), s: s.clone() },
            PartKind::OffDiagonal { alpha } => {
                DirectClass::MultApQ { p: x.clone(), p_star: star(&x.harmonic(), alpha) }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let m = self.m();
        if m == 0 || self.r.len() != m || self.v.len() != m || self.w.len() != m {
            return invalid("q, r, v, w must have the same positive length");
        }
        let one = Rat::one();
        match &self.kind {
            PartKind::Diagonal { s } => {
                if s.len() != m {
                    return invalid("s must have the same length as q");
                }
                for j in 0..m {
                    if self.q.get(j) <= s.get(j) || self.r.get(j) <= s.get(j) {
                        return precondition(format!("need q_j, r_j > s_j (component {})", j + 1));
                    }
                }
                if self.q.harmonic() >= one || self.r.harmonic() >= one {
                    return precondition(format!(
                        "need 1/q < 1 and 1/r < 1, got 1/q = {}, 1/r = {}",
                        fmt_rat(&self.q.harmonic()),
                        fmt_rat(&self.r.harmonic())
                    ));
                }
            }
            PartKind::OffDiagonal { alpha } => {
                if alpha.is_negative() {
                    return invalid("alpha must be non-negative");
                }
                for j in 0..m {
                    if *self.q.get(j) <= one || *self.r.get(j) <= one {
                        return precondition(format!("need q_j, r_j > 1 (component {})", j + 1));
                    }
                }
                for (name, h) in [("q", self.q.harmonic()), ("r", self.r.harmonic())] {
                    if h <= *alpha || h >= alpha + &one {
                        return precondition(format!(
                            "need 1/{name} in (alpha, alpha + 1), got 1/{name} = {}, alpha = {}",
                            fmt_rat(&h),
                            fmt_rat(alpha)
                        ));
                    }
                }
            }
        }
        for x in self.v.iter().chain(&self.w) {
            x.validate()?;
        }
        Ok(())
    }

    /// `None` when admissible, otherwise the reason.
    fn admissibility(&self, p: &[Rat]) -> Option<String> {
        let one = Rat::one();
        let h = p.iter().fold(Rat::zero(), |a, x| a + x.recip());
        match &self.kind {
            PartKind::Diagonal { s } => {
                for (j, pj) in p.iter().enumerate() {
                    if pj <= s.get(j) {
                        return Some(format!("p_{} = {} not above s_{}", j + 1, fmt_rat(pj), j + 1));
                    }
                }
                (h >= one).then(|| format!("1/p = {} not below 1", fmt_rat(&h)))
            }
            PartKind::OffDiagonal { alpha } => {
                for (j, pj) in p.iter().enumerate() {
                    if *pj <= one {
                        return Some(format!("p_{} = {} not above 1", j + 1, fmt_rat(pj)));
                    }
                }
                (h <= *alpha || h >= alpha + &one)
                    .then(|| format!("1/p = {} outside (alpha, alpha + 1)", fmt_rat(&h)))
            }
        }
    }

    fn intermediate_weights(&self, theta: &Rat) -> Result<Vec<WeightSpec>> {
        match self.kind {
            PartKind::Diagonal { .. } => intermediate_weights_diagonal(&self.w, &self.v, &self.r, &self.q, theta),
            PartKind::OffDiagonal { .. } => intermediate_weights_offdiagonal(&self.w, &self.v, theta),
        }
    }

    /// Labels, split exponents and check weights of every check at `theta`.
    fn checks(&self, theta: &Rat, p: &[Rat], u: &[WeightSpec]) -> Result<Vec<(String, SplitExponents, CheckWeights)>> {
        let m = self.m();
        let mut out = Vec::with_capacity(m + 1);
        match &self.kind {
            PartKind::Diagonal { s } => {
                for j in 0..m {
                    let sp = SplitExponents::diagonal_component(&self.r, &self.q, s, theta, j)?;
                    let cw = diagonal_component_weights(&sp, &u[j], &self.w[j], &self.v[j]);
                    out.push((format!("component-{}", j + 1), sp, cw));
                }
                let sp = SplitExponents::diagonal_nu(&self.r, &self.q, s, theta)?;
                let pv = ExponentVector::new(p.to_vec())?;
                let cw = diagonal_nu_weights(u, &self.w, &self.v, &pv, &self.r, &self.q)?;
                out.push(("nu".into(), sp, cw));
            }
            PartKind::OffDiagonal { alpha } => {
                for j in 0..m {
                    let sp = SplitExponents::offdiagonal_component(&self.r, &self.q, theta, j, m)?;
                    let cw = offdiagonal_component_weights(&sp, &u[j], &self.w[j], &self.v[j]);
                    out.push((format!("component-{}", j + 1), sp, cw));
                }
                let sp = SplitExponents::offdiagonal_nu(&self.r, &self.q, alpha, theta, m)?;
                let cw = offdiagonal_nu_weights(&sp, u, &self.w, &self.v);
                out.push(("nu".into(), sp, cw));
            }
        }
        Ok(out)
    }

    fn identity_kind(&self) -> IdentityKind {
        match self.kind {
            PartKind::Diagonal { .. } => IdentityKind::Diagonal,
            PartKind::OffDiagonal { .. } => IdentityKind::OffDiagonal,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhiCheck {
    pub role: String,
    pub certificate: RhiCertificate,
    /// `max(rho, tau) <= 1 + eta`.
    pub passed: bool,
    /// Largest `<W^t>^{1/t} / <W>` over the family at `t = max(rho, tau)`.
    pub ratio_at_t: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub label: String,
    pub exponents: SplitExponents,
    pub split: HolderSplit,
    pub functions: CheckFunctions,
    /// `|rho - sigma|` and `|tau - phi|` evaluated in floating point.
    pub residual_rho_sigma: f64,
    pub residual_tau_phi: f64,
    /// `max(rho, tau)` in floating point.
    pub t: f64,
    pub weights: CheckWeights,
    pub rhi: Vec<RhiCheck>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypotheses {
    pub v: MembershipReport,
    pub w: MembershipReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartCertificate {
    pub q: ExponentVector,
    pub r: ExponentVector,
    #[serde(with = "serde_rat_vec")]
    pub p: Vec<Rat>,
    /// `1/p`.
    #[serde(with = "serde_rat")]
    pub p_inverse: Rat,
    #[serde(with = "serde_rat_opt")]
    pub p_star: Option<Rat>,
    pub u: Vec<WeightSpec>,
    pub checks: Vec<CheckRecord>,
    pub u_membership: MembershipReport,
    pub identity: IdentityReport,
    pub hypotheses: Hypotheses,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductBound {
    pub label: String,
    pub lhs: ExtReal,
    pub w_constant: ExtReal,
    #[serde(with = "serde_rat")]
    pub w_exponent: Rat,
    pub v_constant: ExtReal,
    #[serde(with = "serde_rat")]
    pub v_exponent: Rat,
    pub rhs: ExtReal,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaCertificate {
    pub case: ExtrapolationCase,
    #[serde(with = "serde_rat")]
    pub theta: Rat,
    pub q: ExponentVector,
    pub r: ExponentVector,
    pub v: Vec<WeightSpec>,
    pub w: Vec<WeightSpec>,
    #[serde(with = "serde_rat_vec")]
    pub p: Vec<Rat>,
    #[serde(with = "serde_rat")]
    pub p_inverse: Rat,
    #[serde(with = "serde_rat_opt")]
    pub p_star: Option<Rat>,
    pub u: Vec<WeightSpec>,
    pub parts: Vec<PartCertificate>,
    pub product_bounds: Option<Vec<ProductBound>>,
    pub settings: SolverSettings,
}

/// Validated input of the solver.
#[derive(Clone, Debug)]
pub struct Problem {
    pub case: ExtrapolationCase,
    pub q: ExponentVector,
    pub r: ExponentVector,
    pub v: Vec<WeightSpec>,
    pub w: Vec<WeightSpec>,
    parts: Vec<Part>,
}

impl Problem {
    pub fn new(case: ExtrapolationCase, q: ExponentVector, r: ExponentVector, v: Vec<WeightSpec>, w: Vec<WeightSpec>) -> Result<Self> {
        let m = q.len();
        let whole = |kind| Part { kind, q: q.clone(), r: r.clone(), v: v.clone(), w: w.clone() };
        let single = |j: usize, kind| -> Result<Part> {
            Ok(Part {
                kind,
                q: ExponentVector::new(vec![q.get(j).clone()])?,
                r: ExponentVector::new(vec![r.get(j).clone()])?,
                v: vec![v[j].clone()],
                w: vec![w[j].clone()],
            })
        };
        // The componentwise cases must satisfy the vector hypotheses on exponents too.
        let top = match &case {
            ExtrapolationCase::DiagonalVector { s } | ExtrapolationCase::DiagonalComponentwise { s } => {
                whole(PartKind::Diagonal { s: s.clone() })
            }
            ExtrapolationCase::OffDiagonalVector { alpha } | ExtrapolationCase::OffDiagonalComponentwise { alpha } => {
                whole(PartKind::OffDiagonal { alpha: alpha.clone() })
            }
        };
        top.validate()?;
        let parts = match &case {
            ExtrapolationCase::DiagonalVector { .. } | ExtrapolationCase::OffDiagonalVector { .. } => vec![top],
            ExtrapolationCase::DiagonalComponentwise { s } => (0..m)
                .map(|j| single(j, PartKind::Diagonal { s: ExponentVector::new(vec![s.get(j).clone()])? }))
                .collect::<Result<_>>()?,
            ExtrapolationCase::OffDiagonalComponentwise { alpha } => {
                let a = alpha / int(m as i64);
                (0..m).map(|j| single(j, PartKind::OffDiagonal { alpha: a.clone() })).collect::<Result<_>>()?
            }
        };
        for p in &parts {
            p.validate()?;
        }
        Ok(Problem { case, q, r, v, w, parts })
    }

    fn top_admissibility(&self, p: &[Rat]) -> Option<String> {
        let one = Rat::one();
        let h = p.iter().fold(Rat::zero(), |a, x| a + x.recip());
        match self.case.alpha() {
            None => (h >= one).then(|| format!("1/p = {} not below 1", fmt_rat(&h))),
            Some(alpha) => (h <= *alpha || h >= alpha + &one)
                .then(|| format!("1/p = {} outside (alpha, alpha + 1)", fmt_rat(&h))),
        }
    }
}

/// Theta-independent data of a part: verified hypotheses and reverse Hölder exponents.
struct PartContext {
    part: Part,
    hypotheses: Hypotheses,
    rhi: Vec<Vec<(String, RhiCertificate)>>,
}

fn require_member(report: &MembershipReport, what: &str) -> Result<()> {
    match report.verdict {
        Verdict::Member => Ok(()),
        v => precondition(format!("{what} is not certified as a member of its class ({v:?}, value {})", report.value)),
    }
}

impl PartContext {
    fn new(part: Part, settings: &SolverSettings) -> Result<Self> {
        let cfg = &settings.quadrature;
        let v_report = part.hypothesis_class(&part.q).membership(&part.v, &settings.family, cfg, &settings.stability)?;
        require_member(&v_report, "v")?;
        let w_report = part.hypothesis_class(&part.r).membership(&part.w, &settings.family, cfg, &settings.stability)?;
        require_member(&w_report, "w")?;
        let family = CubeFamily::from_spec(&settings.family)?;
        let zero = Rat::zero();
        let checks = part.checks(&zero, part.r.entries(), &part.w)?;
        let mut rhi = Vec::with_capacity(checks.len());
        for (_, sp, cw) in &checks {
            let mut certs = Vec::with_capacity(4);
            for (role, weight) in rhi_weights(sp, cw) {
                let cert = rhi_exponent(&weight, &family, settings.c_rhi, &settings.t_grid, cfg)?;
                certs.push((role.to_string(), cert));
            }
            rhi.push(certs);
        }
        Ok(PartContext { part, hypotheses: Hypotheses { v: v_report, w: w_report }, rhi })
    }

    /// Certificate of this part at `theta`, or the reason it fails.
    fn evaluate(&self, theta: &Rat, settings: &SolverSettings) -> Result<std::result::Result<PartCertificate, String>> {
        let part = &self.part;
        let p = match intermediate_exponents(&part.r, &part.q, theta) {
            Ok(p) => p,
            Err(Error::Degenerate(msg)) => return Ok(Err(msg)),
            Err(e) => return Err(e),
        };
        if let Some(reason) = part.admissibility(&p) {
            return Ok(Err(reason));
        }
        let u = part.intermediate_weights(theta)?;
        let samples = identity_sample_points(settings.family.dim, settings.family.half_width, settings.identity_samples);
        let identity =
            interpolation_identity_check(theta, &p, &part.q, &part.r, &u, &part.v, &part.w, part.identity_kind(), &samples)?;
        if identity.max() >= settings.residual_tolerance {
            return Ok(Err(format!("identity residual {} above tolerance", identity.max())));
        }
        let checks = match part.checks(theta, &p, &u) {
            Ok(c) => c,
            Err(Error::Degenerate(msg)) => return Ok(Err(msg)),
            Err(e) => return Err(e),
        };
        let tf = to_f64(theta);
        let mut records = Vec::with_capacity(checks.len());
        for ((label, sp, cw), rhi) in checks.into_iter().zip(&self.rhi) {
            let split = sp.holder_split(theta);
            let functions = sp.check_functions(theta, &split);
            let fl = sp.check_functions_f64(tf, to_f64(&split.eps), to_f64(&split.delta));
            let t = fl[0].max(fl[2]);
            let mut rhi_checks = Vec::with_capacity(4);
            let mut failed = None;
            for (role, cert) in rhi {
                let passed = t <= 1.0 + cert.eta + 1e-12;
                if !passed && failed.is_none() {
                    failed = Some(format!("{label}/{role}: max(rho, tau) = {t} exceeds 1 + eta = {}", 1.0 + cert.eta));
                }
                rhi_checks.push(RhiCheck { role: role.clone(), certificate: cert.clone(), passed, ratio_at_t: None });
            }
            if let Some(reason) = failed {
                return Ok(Err(reason));
            }
            records.push(CheckRecord {
                label,
                exponents: sp,
                split,
                functions,
                residual_rho_sigma: (fl[0] - fl[1]).abs(),
                residual_tau_phi: (fl[2] - fl[3]).abs(),
                t,
                weights: cw,
                rhi: rhi_checks,
            });
        }
        let u_membership =
            part.hypothesis_class(&ExponentVector::new(p.clone())?).membership(&u, &settings.family, &settings.quadrature, &settings.stability)?;
        if u_membership.verdict != Verdict::Member {
            return Ok(Err(format!("u not certified in its class ({:?}, value {})", u_membership.verdict, u_membership.value)));
        }
        let p_inverse = p.iter().fold(Rat::zero(), |a, x| a + x.recip());
        let p_star = match &part.kind {
            PartKind::OffDiagonal { alpha } => Some(star(&p_inverse, alpha)),
            PartKind::Diagonal { .. } => None,
        };
        Ok(Ok(PartCertificate {
            q: part.q.clone(),
            r: part.r.clone(),
            p,
            p_inverse,
            p_star,
            u,
            checks: records,
            u_membership,
            identity,
            hypotheses: self.hypotheses.clone(),
        }))
    }
}

/// Direct reverse Hölder ratios at the exponent each check actually uses.
fn attach_direct_ratios(part: &mut PartCertificate, settings: &SolverSettings) -> Result<()> {
    let family = CubeFamily::from_spec(&settings.family)?;
    for rec in &mut part.checks {
        for chk in &mut rec.rhi {
            let (r, _) = rhi_ratio(&chk.certificate.weight, rec.t, &family, &settings.quadrature)?;
            chk.ratio_at_t = Some(r);
        }
    }
    Ok(())
}

/// Outcome of evaluating every check at one `theta`.
pub enum Attempt {
    Certified(Box<ThetaCertificate>),
    Failed(String),
}

struct Solver {
    problem: Problem,
    contexts: Vec<PartContext>,
    settings: SolverSettings,
}

impl Solver {
    fn new(problem: Problem, settings: &SolverSettings) -> Result<Self> {
        settings.family.validate()?;
        settings.quadrature.validate()?;
        settings.t_grid.validate()?;
        if !(settings.c_rhi >= 1.0) {
            return invalid("c_rhi must be at least 1");
        }
        for x in problem.v.iter().chain(&problem.w) {
            if let Some(d) = x.dim() {
                if d != settings.family.dim {
                    return invalid(format!("weight dimension {d} differs from family dimension {}", settings.family.dim));
                }
            }
        }
        let contexts = problem.parts.iter().map(|p| PartContext::new(p.clone(), settings)).collect::<Result<_>>()?;
        Ok(Solver { problem, contexts, settings: settings.clone() })
    }

    fn attempt(&self, theta: &Rat) -> Result<Attempt> {
        let mut parts = Vec::with_capacity(self.contexts.len());
        for (i, ctx) in self.contexts.iter().enumerate() {
            match ctx.evaluate(theta, &self.settings)? {
                Ok(c) => parts.push(c),
                Err(reason) => {
                    let prefix = if self.contexts.len() > 1 { format!("component {}: ", i + 1) } else { String::new() };
                    return Ok(Attempt::Failed(format!("theta = {}: {prefix}{reason}", fmt_rat(theta))));
                }
            }
        }
        let p: Vec<Rat> = parts.iter().flat_map(|c| c.p.iter().cloned()).collect();
        if let Some(reason) = self.problem.top_admissibility(&p) {
            return Ok(Attempt::Failed(format!("theta = {}: {reason}", fmt_rat(theta))));
        }
        for part in &mut parts {
            attach_direct_ratios(part, &self.settings)?;
        }
        let p_inverse = p.iter().fold(Rat::zero(), |a, x| a + x.recip());
        let p_star = self.problem.case.alpha().map(|a| star(&p_inverse, a));
        let mut cert = ThetaCertificate {
            case: self.problem.case.clone(),
            theta: theta.clone(),
            q: self.problem.q.clone(),
            r: self.problem.r.clone(),
            v: self.problem.v.clone(),
            w: self.problem.w.clone(),
            p,
            p_inverse,
            p_star,
            u: parts.iter().flat_map(|c| c.u.iter().cloned()).collect(),
            parts,
            product_bounds: None,
            settings: self.settings.clone(),
        };
        if self.settings.product_bounds {
            cert.product_bounds = Some(product_bound_check(&cert)?);
        }
        Ok(Attempt::Certified(Box::new(cert)))
    }
}

/// Largest `theta` in the schedule at which every check passes.
pub fn solve_theta(
    case: ExtrapolationCase,
    q: ExponentVector,
    r: ExponentVector,
    v: Vec<WeightSpec>,
    w: Vec<WeightSpec>,
    settings: &SolverSettings,
) -> Result<ThetaCertificate> {
    let solver = Solver::new(Problem::new(case, q, r, v, w)?, settings)?;
    let mut last = String::from("empty schedule");
    for theta in settings.schedule.thetas() {
        match solver.attempt(&theta)? {
            Attempt::Certified(c) => return Ok(*c),
            Attempt::Failed(reason) => last = reason,
        }
    }
    Err(Error::NoAdmissibleTheta { min_exponent: settings.schedule.max_exponent, closest: last })
}

/// Evaluate all checks at one given `theta` (no search).
pub fn certify_at(
    case: ExtrapolationCase,
    q: ExponentVector,
    r: ExponentVector,
    v: Vec<WeightSpec>,
    w: Vec<WeightSpec>,
    theta: &Rat,
    settings: &SolverSettings,
) -> Result<Attempt> {
    let solver = Solver::new(Problem::new(case, q, r, v, w)?, settings)?;
    solver.attempt(theta)
}

/// Outcomes of every `theta` in the schedule, largest first.
pub fn scan_schedule(
    case: ExtrapolationCase,
    q: ExponentVector,
    r: ExponentVector,
    v: Vec<WeightSpec>,
    w: Vec<WeightSpec>,
    settings: &SolverSettings,
) -> Result<Vec<(Rat, bool)>> {
    let solver = Solver::new(Problem::new(case, q, r, v, w)?, settings)?;
    settings
        .schedule
        .thetas()
        .map(|t| Ok((t.clone(), matches!(solver.attempt(&t)?, Attempt::Certified(_)))))
        .collect()
}

/// Evaluate `[W_u] <~ [W_w]^a [W_v]^b` for every check of the certificate.
pub fn product_bound_check(cert: &ThetaCertificate) -> Result<Vec<ProductBound>> {
    let family = CubeFamily::from_spec(&cert.settings.family)?;
    let cfg = &cert.settings.quadrature;
    let multi = cert.parts.len() > 1;
    let mut out = Vec::new();
    for (i, part) in cert.parts.iter().enumerate() {
        for rec in &part.checks {
            let sp = &rec.exponents;
            let (a, b) = sp.product_exponents(&cert.theta);
            let lhs = ap_constant(&rec.weights.u, to_f64(&sp.class_u()), &family, cfg)?.value;
            let wc = ap_constant(&rec.weights.w, to_f64(&sp.class_w()), &family, cfg)?.value;
            let vc = ap_constant(&rec.weights.v, to_f64(&sp.class_v()), &family, cfg)?.value;
            let rhs = ExtReal(wc.0.powf(to_f64(&a)) * vc.0.powf(to_f64(&b)));
            let label = if multi { format!("part-{}/{}", i + 1, rec.label) } else { rec.label.clone() };
            out.push(ProductBound {
                label,
                lhs,
                w_constant: wc,
                w_exponent: a,
                v_constant: vc,
                v_exponent: b,
                rhs,
                ratio: lhs.0 / rhs.0,
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdentityKind {
    /// `w_j^{1/r_j} = u_j^{(1-theta)/p_j} v_j^{theta/q_j}` and the nu analogue.
    Diagonal,
    /// `w_j = u_j^{1-theta} v_j^theta` and `nu_w = nu_u^{1-theta} nu_v^theta`.
    OffDiagonal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub exponent_residual: f64,
    pub nu_exponent_residual: f64,
    pub weight_residual: f64,
    pub nu_residual: f64,
    pub samples: usize,
}

impl IdentityReport {
    pub fn max(&self) -> f64 {
        self.exponent_residual.max(self.nu_exponent_residual).max(self.weight_residual).max(self.nu_residual)
    }
}

/// Deterministic low-discrepancy points in `[-L, L]^d`.
pub fn identity_sample_points(dim: usize, half_width: f64, n: usize) -> Vec<Vec<f64>> {
    let g1 = 0.618_033_988_749_894_9_f64;
    let g2 = 0.754_877_666_246_692_7_f64;
    (0..n)
        .map(|i| {
            let k = (i + 1) as f64;
            let a = (k * g1).fract();
            if dim == 1 {
                vec![-half_width + 2.0 * half_width * a]
            } else {
                vec![-half_width + 2.0 * half_width * a, -half_width + 2.0 * half_width * (k * g2).fract()]
            }
        })
        .collect()
}

fn rel(lhs: f64, rhs: f64) -> f64 {
    if lhs == rhs {
        0.0
    } else {
        (rhs / lhs - 1.0).abs()
    }
}

/// Residuals of the exponent and weight identities linking `(p, u)` to `(r, w)` and `(q, v)`.
#[allow(clippy::too_many_arguments)]
pub fn interpolation_identity_check(
    theta: &Rat,
    p: &[Rat],
    q: &ExponentVector,
    r: &ExponentVector,
    u: &[WeightSpec],
    v: &[WeightSpec],
    w: &[WeightSpec],
    kind: IdentityKind,
    samples: &[Vec<f64>],
) -> Result<IdentityReport> {
    let m = p.len();
    if q.len() != m || r.len() != m || u.len() != m || v.len() != m || w.len() != m {
        return invalid("identity check inputs have different lengths");
    }
    let th = to_f64(theta);
    let om = 1.0 - th;
    let exponent_residual = (0..m)
        .map(|j| (to_f64(&r.get(j).recip()) - to_f64(&((Rat::one() - theta) / &p[j])) - to_f64(&(theta / q.get(j)))).abs())
        .fold(0.0, f64::max);
    let p_inv = p.iter().fold(Rat::zero(), |a, x| a + x.recip());
    let nu_exponent_residual =
        (to_f64(&r.harmonic()) - to_f64(&((Rat::one() - theta) * &p_inv)) - to_f64(&(theta * q.harmonic()))).abs();
    let pf: Vec<f64> = p.iter().map(to_f64).collect();
    let qf = q.to_f64();
    let rf = r.to_f64();
    let (pp, qq, rr) = (1.0 / to_f64(&p_inv), 1.0 / to_f64(&q.harmonic()), 1.0 / to_f64(&r.harmonic()));
    let mut weight_residual = 0.0f64;
    let mut nu_residual = 0.0f64;
    for x in samples {
        let uv: Vec<f64> = u.iter().map(|f| f.eval(x)).collect();
        let vv: Vec<f64> = v.iter().map(|f| f.eval(x)).collect();
        let wv: Vec<f64> = w.iter().map(|f| f.eval(x)).collect();
        if uv.iter().chain(&vv).chain(&wv).any(|z| !(z.is_finite() && *z > 0.0)) {
            continue;
        }
        match kind {
            IdentityKind::Diagonal => {
                for j in 0..m {
                    let lhs = wv[j].powf(1.0 / rf[j]);
                    let rhs = uv[j].powf(om / pf[j]) * vv[j].powf(th / qf[j]);
                    weight_residual = weight_residual.max(rel(lhs, rhs));
                }
                let nu = |vals: &[f64], e: &[f64], h: f64| (0..m).map(|j| vals[j].powf(h / e[j])).product::<f64>();
                let lhs = nu(&wv, &rf, rr).powf(1.0 / rr);
                let rhs = nu(&uv, &pf, pp).powf(om / pp) * nu(&vv, &qf, qq).powf(th / qq);
                nu_residual = nu_residual.max(rel(lhs, rhs));
            }
            IdentityKind::OffDiagonal => {
                for j in 0..m {
                    let rhs = uv[j].powf(om) * vv[j].powf(th);
                    weight_residual = weight_residual.max(rel(wv[j], rhs));
                }
                let lhs: f64 = wv.iter().product();
                let rhs = uv.iter().product::<f64>().powf(om) * vv.iter().product::<f64>().powf(th);
                nu_residual = nu_residual.max(rel(lhs, rhs));
            }
        }
    }
    Ok(IdentityReport { exponent_residual, nu_exponent_residual, weight_residual, nu_residual, samples: samples.len() })
}

impl ThetaCertificate {
    /// Re-check the exact algebra and the recorded pass/fail decisions of a (deserialized) certificate.
    pub fn revalidate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(format!("certificate does not re-validate: {msg}")));
        if !(self.theta.is_positive() && self.theta < Rat::one()) {
            return bad("theta outside (0, 1)".into());
        }
        let problem = Problem::new(self.case.clone(), self.q.clone(), self.r.clone(), self.v.clone(), self.w.clone())?;
        let p = intermediate_exponents(&self.r, &self.q, &self.theta)?;
        if p != self.p {
            return bad("p(theta) mismatch".into());
        }
        if let Some(reason) = problem.top_admissibility(&p) {
            return bad(reason);
        }
        for (part, pc) in problem.parts.iter().zip(&self.parts) {
            if part.admissibility(&pc.p).is_some() {
                return bad("part exponents not admissible".into());
            }
            let u = part.intermediate_weights(&self.theta)?;
            if u != pc.u {
                return bad("u(theta) mismatch".into());
            }
            let checks = part.checks(&self.theta, &pc.p, &u)?;
            if checks.len() != pc.checks.len() {
                return bad("check count mismatch".into());
            }
            for ((label, sp, _), rec) in checks.iter().zip(&pc.checks) {
                let split = sp.holder_split(&self.theta);
                let f = sp.check_functions(&self.theta, &split);
                if *label != rec.label || split != rec.split || f != rec.functions {
                    return bad(format!("{label}: split or check functions mismatch"));
                }
                if f.sigma.as_ref() != Some(&f.rho) || f.phi.as_ref() != Some(&f.tau) {
                    return bad(format!("{label}: rho != sigma or tau != phi"));
                }
                if rec.rhi.iter().any(|c| !c.passed || rec.t > 1.0 + c.certificate.eta + 1e-12) {
                    return bad(format!("{label}: reverse Hölder check not satisfied"));
                }
            }
            if pc.u_membership.verdict != Verdict::Member {
                return bad("u not a certified member".into());
            }
            if pc.identity.max() >= self.settings.residual_tolerance {
                return bad("identity residual above tolerance".into());
            }
        }
        Ok(())
    }
}

/// Membership of a scalar weight in `A_p` with the solver's settings; convenience for reports.
pub fn scalar_class_membership(w: &WeightSpec, p: f64, settings: &SolverSettings) -> Result<MembershipReport> {
    membership(|f| ap_constant(w, p, f, &settings.quadrature), &settings.family, &settings.stability)
}
