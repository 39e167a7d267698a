//! Exact exponent algebra: intermediate exponents and weights, Hölder splits and check functions.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{conj, fmt_rat, int, serde_rat, to_f64, Rat};
use crate::weight_classes::{nu_plain, nu_weight, product_of_powers, ExponentVector, WeightSpec};

fn check_theta(theta: &Rat) -> Result<()> {
    if theta.is_negative() || *theta >= Rat::one() {
        return Err(Error::Degenerate(format!("theta must lie in [0, 1), got {}", fmt_rat(theta))));
    }
    Ok(())
}

/// `p(theta) = (1 - theta) / (1/r - theta/q)`.
pub fn intermediate_exponent(r: &Rat, q: &Rat, theta: &Rat) -> Result<Rat> {
    check_theta(theta)?;
    let den = r.recip() - theta / q;
    if !den.is_positive() {
        return Err(Error::Degenerate(format!(
            "1/r - theta/q = {} is not positive (r = {}, q = {}, theta = {})",
            fmt_rat(&den),
            fmt_rat(r),
            fmt_rat(q),
            fmt_rat(theta)
        )));
    }
    Ok((Rat::one() - theta) / den)
}

pub fn intermediate_exponents(r: &ExponentVector, q: &ExponentVector, theta: &Rat) -> Result<Vec<Rat>> {
    r.validate_against(q, "intermediate exponents")?;
    r.entries().iter().zip(q.entries()).map(|(rj, qj)| intermediate_exponent(rj, qj, theta)).collect()
}

/// `u_j = w_j^{p_j/(r_j(1-theta))} v_j^{-p_j theta/(q_j(1-theta))}`.
pub fn intermediate_weights_diagonal(
    w: &[WeightSpec],
    v: &[WeightSpec],
    r: &ExponentVector,
    q: &ExponentVector,
    theta: &Rat,
) -> Result<Vec<WeightSpec>> {
    if w.len() != r.len() || v.len() != q.len() {
        return Err(Error::InvalidInput("weight and exponent vectors have different lengths".into()));
    }
    let p = intermediate_exponents(r, q, theta)?;
    let one_m = Rat::one() - theta;
    Ok((0..p.len())
        .map(|j| {
            let ew = &p[j] / (r.get(j) * &one_m);
            let ev = -(&p[j] * theta) / (q.get(j) * &one_m);
            product_of_powers(&[(&w[j], to_f64(&ew)), (&v[j], to_f64(&ev))])
        })
        .collect())
}

/// `u_j = w_j^{1/(1-theta)} v_j^{-theta/(1-theta)}`.
pub fn intermediate_weights_offdiagonal(w: &[WeightSpec], v: &[WeightSpec], theta: &Rat) -> Result<Vec<WeightSpec>> {
    check_theta(theta)?;
    if w.len() != v.len() {
        return Err(Error::InvalidInput("weight vectors have different lengths".into()));
    }
    let one_m = Rat::one() - theta;
    let ew = to_f64(&one_m.recip());
    let ev = to_f64(&(-(theta / &one_m)));
    Ok(w.iter().zip(v).map(|(wj, vj)| product_of_powers(&[(wj, ew), (vj, ev)])).collect())
}

/// Which Hölder split a check uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitKind {
    DiagonalComponent,
    DiagonalNu,
    OffDiagonalComponent,
    OffDiagonalNu,
}

/// The four exponents a single check depends on: the intermediate, endpoint and target
/// exponents `(x_p, x_r, x_q)` in the check's own normalization, and the class multiplier `m`.
/// The check weight `W_u = ...` lives in `A_{m x_p}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitExponents {
    pub kind: SplitKind,
    #[serde(with = "serde_rat")]
    pub xp: Rat,
    #[serde(with = "serde_rat")]
    pub xr: Rat,
    #[serde(with = "serde_rat")]
    pub xq: Rat,
    #[serde(with = "serde_rat")]
    pub m: Rat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderSplit {
    #[serde(with = "serde_rat")]
    pub eps: Rat,
    #[serde(with = "serde_rat")]
    pub delta: Rat,
}

/// Evaluated check functions. `sigma` and `phi` are undefined at `theta = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckFunctions {
    #[serde(with = "serde_rat")]
    pub rho: Rat,
    #[serde(with = "crate::numeric::serde_rat_opt")]
    pub sigma: Option<Rat>,
    #[serde(with = "serde_rat")]
    pub tau: Rat,
    #[serde(with = "crate::numeric::serde_rat_opt")]
    pub phi: Option<Rat>,
}

fn degenerate(what: &str) -> Error {
    Error::Degenerate(what.into())
}

fn need_conj(x: &Rat, what: &str) -> Result<Rat> {
    conj(x).ok_or_else(|| degenerate(&format!("{what} equals 1, its conjugate is infinite")))
}

fn s_harmonic(s: &ExponentVector) -> Rat {
    s.harmonic()
}

impl SplitExponents {
    /// Component `j` of the diagonal case, in rescaled variables `x/s_j`, conjugated.
    pub fn diagonal_component(r: &ExponentVector, q: &ExponentVector, s: &ExponentVector, theta: &Rat, j: usize) -> Result<Self> {
        let (rj, qj, sj) = (r.get(j), q.get(j), s.get(j));
        let pj = intermediate_exponent(rj, qj, theta)?;
        let xr = need_conj(&(rj / sj), "r_j/s_j")?;
        let xq = need_conj(&(qj / sj), "q_j/s_j")?;
        let xp = need_conj(&(&pj / sj), "p_j/s_j")?;
        let m = sj * s_harmonic(s);
        Self::checked(SplitKind::DiagonalComponent, xp, xr, xq, m)
    }

    /// The nu-check of the diagonal case: `x = (p, r, q)`, `m = 1/s`.
    pub fn diagonal_nu(r: &ExponentVector, q: &ExponentVector, s: &ExponentVector, theta: &Rat) -> Result<Self> {
        let (rr, qq) = (r.p(), q.p());
        let pp = intermediate_exponent(&rr, &qq, theta)?;
        Self::checked(SplitKind::DiagonalNu, pp, rr, qq, s_harmonic(s))
    }

    /// Component `j` of the off-diagonal case: conjugates `(p_j', r_j', q_j')`, multiplier `m`.
    pub fn offdiagonal_component(r: &ExponentVector, q: &ExponentVector, theta: &Rat, j: usize, m: usize) -> Result<Self> {
        let (rj, qj) = (r.get(j), q.get(j));
        let pj = intermediate_exponent(rj, qj, theta)?;
        let xr = need_conj(rj, "r_j")?;
        let xq = need_conj(qj, "q_j")?;
        let xp = need_conj(&pj, "p_j")?;
        Self::checked(SplitKind::OffDiagonalComponent, xp, xr, xq, int(m as i64))
    }

    /// The nu-check of the off-diagonal case: starred exponents `(p*, r*, q*)`, multiplier `m`.
    pub fn offdiagonal_nu(r: &ExponentVector, q: &ExponentVector, alpha: &Rat, theta: &Rat, m: usize) -> Result<Self> {
        let star = |x: Rat| -> Result<Rat> {
            let inv = x.recip() - alpha;
            if !inv.is_positive() {
                return Err(degenerate("1/x - alpha must be positive"));
            }
            Ok(inv.recip())
        };
        let (rr, qq) = (r.p(), q.p());
        let pp = intermediate_exponent(&rr, &qq, theta)?;
        Self::checked(SplitKind::OffDiagonalNu, star(pp)?, star(rr)?, star(qq)?, int(m as i64))
    }

    fn checked(kind: SplitKind, xp: Rat, xr: Rat, xq: Rat, m: Rat) -> Result<Self> {
        let one = Rat::one();
        if &m * &xr == one {
            return Err(degenerate("m x_r = 1"));
        }
        if &m * &xq == one {
            return Err(degenerate("m x_q = 1"));
        }
        if &m * &xp == one {
            return Err(degenerate("m x_p = 1"));
        }
        Ok(SplitExponents { kind, xp, xr, xq, m })
    }

    /// The `(eps, delta)` pair in the form each check states it.
    pub fn holder_split(&self, theta: &Rat) -> HolderSplit {
        let one = Rat::one();
        let eps = match self.kind {
            SplitKind::DiagonalNu => theta * &self.xr * (&self.m - self.xq.recip()),
            _ => theta * &self.xr * (&self.m * &self.xq - &one) / &self.xq,
        };
        let delta = theta * &self.xr / (&self.xq * (&self.m * &self.xr - &one));
        HolderSplit { eps, delta }
    }

    /// `rho, sigma, tau, phi` at `(theta, eps, delta)`.
    pub fn check_functions(&self, theta: &Rat, split: &HolderSplit) -> CheckFunctions {
        let one = Rat::one();
        let (xp, xr, xq, m) = (&self.xp, &self.xr, &self.xq, &self.m);
        let om = &one - theta;
        let (eps, delta) = (&split.eps, &split.delta);
        let mp1 = m * xp - &one;
        let rho = xp * (&one + eps) / (xr * &om);
        let tau = xp * (m * xr - &one) * (&one + delta) / (xr * &om * &mp1);
        let sigma = (!eps.is_zero()).then(|| theta * xp * (m * xq - &one) * (&one + eps) / (xq * eps * &om));
        let phi = (!delta.is_zero()).then(|| theta * xp * (&one + delta) / (xq * delta * &om * &mp1));
        CheckFunctions { rho, sigma, tau, phi }
    }

    /// Check functions in floating point from the floating-point inputs, for residuals.
    pub fn check_functions_f64(&self, theta: f64, eps: f64, delta: f64) -> [f64; 4] {
        let (xp, xr, xq, m) = (to_f64(&self.xp), to_f64(&self.xr), to_f64(&self.xq), to_f64(&self.m));
        let om = 1.0 - theta;
        let mp1 = m * xp - 1.0;
        [
            xp * (1.0 + eps) / (xr * om),
            theta * xp * (m * xq - 1.0) * (1.0 + eps) / (xq * eps * om),
            xp * (m * xr - 1.0) * (1.0 + delta) / (xr * om * mp1),
            theta * xp * (1.0 + delta) / (xq * delta * om * mp1),
        ]
    }

    /// Exponents of `[W_w]` and `[W_v]` in the product bound for `[W_u]`.
    pub fn product_exponents(&self, theta: &Rat) -> (Rat, Rat) {
        let om = Rat::one() - theta;
        (&self.xp / (&self.xr * &om), theta * &self.xp / (&self.xq * &om))
    }

    pub fn class_u(&self) -> Rat {
        &self.m * &self.xp
    }

    pub fn class_w(&self) -> Rat {
        &self.m * &self.xr
    }

    pub fn class_v(&self) -> Rat {
        &self.m * &self.xq
    }
}

/// The three scalar weights a check is built from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckWeights {
    pub u: WeightSpec,
    pub w: WeightSpec,
    pub v: WeightSpec,
}

/// Check weights of diagonal component `j`: `x_j^{1 - (x_j/s_j)'}`.
pub fn diagonal_component_weights(
    split: &SplitExponents,
    u: &WeightSpec,
    w: &WeightSpec,
    v: &WeightSpec,
) -> CheckWeights {
    let one = Rat::one();
    CheckWeights {
        u: u.pow(to_f64(&(&one - &split.xp))),
        w: w.pow(to_f64(&(&one - &split.xr))),
        v: v.pow(to_f64(&(&one - &split.xq))),
    }
}

/// Check weights of the diagonal nu-check: `nu_{x, exponent}`.
pub fn diagonal_nu_weights(
    u: &[WeightSpec],
    w: &[WeightSpec],
    v: &[WeightSpec],
    p: &ExponentVector,
    r: &ExponentVector,
    q: &ExponentVector,
) -> Result<CheckWeights> {
    Ok(CheckWeights { u: nu_weight(u, p)?, w: nu_weight(w, r)?, v: nu_weight(v, q)? })
}

/// Check weights of off-diagonal component `j`: `x_j^{-x_j'}`.
pub fn offdiagonal_component_weights(split: &SplitExponents, u: &WeightSpec, w: &WeightSpec, v: &WeightSpec) -> CheckWeights {
    CheckWeights {
        u: u.pow(-to_f64(&split.xp)),
        w: w.pow(-to_f64(&split.xr)),
        v: v.pow(-to_f64(&split.xq)),
    }
}

/// Check weights of the off-diagonal nu-check: `nu_x^{x*}`.
pub fn offdiagonal_nu_weights(split: &SplitExponents, u: &[WeightSpec], w: &[WeightSpec], v: &[WeightSpec]) -> CheckWeights {
    CheckWeights {
        u: nu_plain(u).pow(to_f64(&split.xp)),
        w: nu_plain(w).pow(to_f64(&split.xr)),
        v: nu_plain(v).pow(to_f64(&split.xq)),
    }
}

/// The four weights that must satisfy a reverse Hölder inequality:
/// `W_w`, its dual `W_w^{-1/(m x_r - 1)}`, `W_v`, and `W_v^{-1/(m x_q - 1)}`.
pub fn rhi_weights(split: &SplitExponents, cw: &CheckWeights) -> Vec<(&'static str, WeightSpec)> {
    let one = Rat::one();
    let dw = -(&split.m * &split.xr - &one).recip();
    let dv = -(&split.m * &split.xq - &one).recip();
    vec![
        ("w", cw.w.clone()),
        ("w-dual", cw.w.pow(to_f64(&dw))),
        ("v", cw.v.clone()),
        ("v-dual", cw.v.pow(to_f64(&dv))),
    ]
}
