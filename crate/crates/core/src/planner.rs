//! Exact-rational precision planning: the target precision from the Weil
//! bounds, valuation profiles of lifts and expansions, and the residue
//! window constants.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::laurent::BoundProfile;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error("genus must be at least 1")]
    ZeroGenus,
    #[error("profile slope must be positive, got {0}")]
    DegenerateProfile(String),
    #[error("lift estimate needs a >= 1, b >= 1 and at least one S-degree")]
    BadLiftInput,
    #[error("no admissible nu gives a positive slope")]
    NoValidNu,
    #[error("plan validation failed: {0}")]
    Invalid(String),
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn ri(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    let mut r = BigUint::one();
    for i in 0..k {
        r = r * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    r
}

/// Whether p^r >= x for a rational r and a positive integer x, i.e.
/// r >= log_p(x), decided by integer powering.
pub fn pow_ge(p: u64, r: &BigRational, x: &BigUint) -> bool {
    if x.is_zero() {
        return true;
    }
    if r.is_negative() {
        return x.is_zero();
    }
    let num = r.numer().to_biguint().unwrap();
    let den = r.denom().to_biguint().unwrap();
    // p^r >= 2^r and r >= bits(x) settles it cheaply
    if num >= &den * BigUint::from(x.bits()) {
        return true;
    }
    let num = num.to_u32().expect("bounded by the bit test");
    let den = den.to_u32().unwrap_or(u32::MAX);
    if den == u32::MAX {
        return x.is_one();
    }
    BigUint::from(p).pow(num) >= x.pow(den)
}

/// Target precision for the numerator coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZetaPrecision {
    pub g: u32,
    pub p: u64,
    pub l: u32,
    pub q: BigUint,
    /// ⌈log_p(2·C(2g,g)·q^(g/2))⌉
    pub n_min: u32,
    pub margin: u32,
    pub n: u32,
}

impl ZetaPrecision {
    /// The bound C(2g,i)·q^(i/2) as an integer floor.
    pub fn weil_bound(&self, i: u32) -> BigUint {
        weil_bound(self.g, &self.q, i)
    }
}

/// Largest integer B with B^2 <= C(2g,i)^2 q^i.
pub fn weil_bound(g: u32, q: &BigUint, i: u32) -> BigUint {
    let c = binomial(2 * g as u64, i as u64);
    (&c * &c * q.pow(i)).sqrt()
}

pub fn weil_precision(g: u32, p: u64, l: u32, margin: u32) -> Result<ZetaPrecision, PlanError> {
    if g == 0 {
        return Err(PlanError::ZeroGenus);
    }
    let q = BigUint::from(p).pow(l);
    let c = binomial(2 * g as u64, g as u64) * 2u32;
    let target = &c * &c * q.pow(g);
    let pb = BigUint::from(p);
    let mut n = 0u32;
    while pb.pow(2 * n) < target {
        n += 1;
    }
    Ok(ZetaPrecision {
        g,
        p,
        l,
        q,
        n_min: n,
        margin,
        n: n + margin,
    })
}

/// min over the strictly positive entries; `None` when there are none.
pub fn min_plus(xs: impl IntoIterator<Item = BigRational>) -> Option<BigRational> {
    xs.into_iter().filter(|x| x.is_positive()).min()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftEstimate {
    pub a: u32,
    pub b: u32,
    /// Pole orders d_0..d_N per S-degree.
    pub d: Vec<i64>,
    pub nu: BigRational,
    /// `None` means the slope is unbounded.
    pub alpha_nu: Option<BigRational>,
    pub beta: BigRational,
    pub crude_nu: BigRational,
    pub crude_alpha: Option<BigRational>,
}

impl LiftEstimate {
    pub fn profile(&self, cap: &BigRational) -> BoundProfile {
        let a = self.alpha_nu.clone().unwrap_or_else(|| cap.clone());
        BoundProfile::new(a.min(cap.clone()), self.beta.clone())
    }
}

/// (1/e) min⁺{ b/d1, (a-ν)/d0, ν/d2, 2ν/d3, ..., (N-1)ν/dN } with e = 1.
pub fn alpha_nu(a: u32, b: u32, d: &[i64], nu: &BigRational) -> Option<BigRational> {
    let mut xs = Vec::new();
    if let Some(&d0) = d.first() {
        if d0 > 0 {
            xs.push((ri(a as i64) - nu) / ri(d0));
        }
    }
    if let Some(&d1) = d.get(1) {
        if d1 > 0 {
            xs.push(rat(b as i64, d1));
        }
    }
    for (l, &dl) in d.iter().enumerate().skip(2) {
        if dl > 0 {
            xs.push(nu * ri(l as i64 - 1) / ri(dl));
        }
    }
    min_plus(xs)
}

fn better(a: &Option<BigRational>, b: &Option<BigRational>) -> bool {
    match (a, b) {
        (None, Some(_)) => true,
        (Some(x), Some(y)) => x > y,
        _ => false,
    }
}

/// Optimizes α_ν over ν in (0, a): the function is a minimum of linear
/// pieces, so its maximum sits at a breakpoint; a grid is added as a guard.
pub fn local_lift_bound(a: u32, b: u32, d: &[i64]) -> Result<LiftEstimate, PlanError> {
    if a == 0 || b == 0 || d.len() < 2 {
        return Err(PlanError::BadLiftInput);
    }
    let av = ri(a as i64);
    let mut cands: Vec<BigRational> = (1..64).map(|k| &av * rat(k, 64)).collect();
    let d0 = d[0];
    for (l, &dl) in d.iter().enumerate().skip(2) {
        if d0 > 0 && dl > 0 {
            // (a-ν)/d0 = (l-1)ν/dl
            cands.push(&av * ri(dl) / ri(dl + (l as i64 - 1) * d0));
        }
    }
    let (crude_nu, crude_alpha) = crude_estimate(a, b, d);
    cands.push(crude_nu.clone());
    let mut best: Option<(BigRational, Option<BigRational>)> = None;
    for nu in cands {
        if !nu.is_positive() || nu >= av {
            continue;
        }
        let al = alpha_nu(a, b, d, &nu);
        let replace = match &best {
            None => true,
            Some((bn, ba)) => better(&al, ba) || (al == *ba && nu > *bn),
        };
        if replace {
            best = Some((nu, al));
        }
    }
    let (nu, alpha) = best.ok_or(PlanError::NoValidNu)?;
    Ok(LiftEstimate {
        a,
        b,
        d: d.to_vec(),
        beta: nu.clone(),
        nu,
        alpha_nu: alpha,
        crude_nu,
        crude_alpha,
    })
}

/// γ, δ covering d_l <= (l-1)γ + δ with γ + δ as small as possible, then
/// ν̃ and α̃ in closed form.
fn crude_estimate(a: u32, b: u32, d: &[i64]) -> (BigRational, Option<BigRational>) {
    let av = ri(a as i64);
    let d2 = ri(d.get(2).copied().unwrap_or(0).max(0));
    let mut gamma = BigRational::zero();
    for (l, &dl) in d.iter().enumerate().skip(3) {
        let need = (ri(dl) - &d2) / ri(l as i64 - 2);
        if need > gamma {
            gamma = need;
        }
    }
    let mut delta = &d2 - &gamma;
    if delta.is_negative() {
        delta = BigRational::zero();
        gamma = d
            .iter()
            .enumerate()
            .skip(2)
            .map(|(l, &dl)| ri(dl) / ri(l as i64 - 1))
            .max()
            .unwrap_or_default();
    }
    let gd = &gamma + &delta;
    let d0 = ri(d[0]);
    let d1 = d[1];
    let b_term = if d1 > 0 {
        Some(rat(b as i64, d1))
    } else {
        None
    };
    if d[0] > 0 {
        let nu = &av * &gd / (&d0 + &gd);
        let alpha = min_plus(b_term.into_iter().chain(std::iter::once(&av / (&d0 + &gd))));
        (nu, alpha)
    } else {
        let alpha = if gd.is_positive() {
            min_plus(b_term.into_iter().chain(std::iter::once(&av / &gd)))
        } else {
            min_plus(b_term)
        };
        (av, alpha)
    }
}

/// One coefficient a_i t^i (i < 0) of the S^l part of H, with v(a_i).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoeffValuation {
    pub l: u32,
    pub i: i64,
    pub v: u32,
}

/// Slope from the actual coefficients of π^-ν H(π^ν S): the minimum of
/// (v + (l-1)ν)/(-i) over negative exponents i; `None` when some entry
/// is not positive (that ν is unusable).
pub fn refined_alpha(coeffs: &[CoeffValuation], nu: &BigRational) -> Option<Option<BigRational>> {
    let mut best: Option<BigRational> = None;
    for c in coeffs {
        if c.i >= 0 {
            continue;
        }
        let x = (ri(c.v as i64) + nu * ri(c.l as i64 - 1)) / ri(-c.i);
        if !x.is_positive() {
            return None;
        }
        if best.as_ref().is_none_or(|b| &x < b) {
            best = Some(x);
        }
    }
    Some(best)
}

/// Best refined profile over ν in [0, a) on a grid; the profile is (α_ν, ν).
pub fn refined_lift_bound(
    coeffs: &[CoeffValuation],
    a: u32,
) -> Option<(BigRational, Option<BigRational>)> {
    let av = ri(a as i64);
    let mut best: Option<(BigRational, Option<BigRational>)> = None;
    for k in 0..128 {
        let nu = &av * rat(k, 128);
        let Some(al) = refined_alpha(coeffs, &nu) else {
            continue;
        };
        let replace = match &best {
            None => true,
            Some((bn, ba)) => better(&al, ba) || (al == *ba && &nu > bn),
        };
        if replace {
            best = Some((nu, al));
        }
    }
    best
}

/// Profile of ξ(g) for g with v(a_I) >= D·I + δ.
pub enum EndShape<'a> {
    /// t-orders of the ξ(x_i)
    Orders(&'a [i64]),
    /// common α and per-variable β_i of the ξ(x_i)
    Profiles {
        alpha: &'a BigRational,
        betas: &'a [BigRational],
    },
}

/// Returns γ (None = unbounded) and δ.
pub fn expansion_bound(
    dvec: &[BigRational],
    delta: &BigRational,
    shape: EndShape<'_>,
) -> (Option<BigRational>, BigRational) {
    match shape {
        EndShape::Orders(ords) => {
            let g = dvec
                .iter()
                .zip(ords)
                .filter(|(_, &o)| o < 0)
                .map(|(d, &o)| d / ri(-o))
                .min();
            (g, delta.clone())
        }
        EndShape::Profiles { alpha, betas } => {
            let gp = dvec
                .iter()
                .zip(betas)
                .filter(|(_, b)| b.is_negative())
                .map(|(d, b)| d * alpha / (-b))
                .min();
            let g = match gp {
                Some(gp) => gp.min(alpha.clone()),
                None => alpha.clone(),
            };
            (Some(g), delta.clone())
        }
    }
}

/// Smallest rational c* with c*/(2(d+1)p) + 1/2 >= N (zero when N <= 1/2).
pub fn global_lift_bound(d: &BigRational, p: u64, n: &BigRational) -> BigRational {
    let half = rat(1, 2);
    if n <= &half {
        return BigRational::zero();
    }
    (n - half) * ri(2) * (d + ri(1)) * ri(p as i64)
}

// ---------------------------------------------------------------------
// profile calculus (products and sums of R_{α,β} members)

pub fn prof_mul(a: &BoundProfile, b: &BoundProfile) -> BoundProfile {
    BoundProfile::new(a.alpha.clone().min(b.alpha.clone()), &a.beta + &b.beta)
}

pub fn prof_add(a: &BoundProfile, b: &BoundProfile) -> BoundProfile {
    BoundProfile::new(
        a.alpha.clone().min(b.alpha.clone()),
        a.beta.clone().min(b.beta.clone()),
    )
}

/// d/dt lowers every exponent by one.
pub fn prof_derivative(a: &BoundProfile) -> BoundProfile {
    BoundProfile::new(a.alpha.clone(), &a.beta - &a.alpha)
}

/// A series with integral coefficients vanishing below t^lo.
pub fn prof_finite(alpha: &BigRational, lo: i64) -> BoundProfile {
    BoundProfile::new(alpha.clone(), alpha * ri(lo))
}

/// Profile of (t^d u (1 + c))^-1 with u a unit power series and c ≡ 0 mod p
/// in R_{α_c, β_c}: the geometric series lies in R_{α_c/(1-min(β_c,0)), 0}.
pub fn prof_inverse_denominator(d: i64, c: &BoundProfile) -> BoundProfile {
    let bc = c.beta.clone().min(BigRational::zero());
    let a = &c.alpha / (ri(1) - bc);
    BoundProfile::new(a.clone(), -&a * ri(d))
}

// ---------------------------------------------------------------------
// residue plan

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResiduePlan {
    pub alpha1: BigRational,
    pub beta1: BigRational,
    pub alpha2: BigRational,
    pub beta2: BigRational,
    pub n: u32,
    pub m_plus: i64,
    pub m_minus: i64,
    /// M_log = log_p(m_log_arg)
    pub m_log_arg: u64,
    pub l1: i64,
    pub l2: i64,
    pub n1: u32,
    pub n2: u32,
}

impl fmt::Display for ResiduePlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "alpha1={} beta1={} alpha2={} beta2={} N={} M+={} M-={} M_log=log_p({}) L1={} L2={} N1={} N2={}",
            self.alpha1,
            self.beta1,
            self.alpha2,
            self.beta2,
            self.n,
            self.m_plus,
            self.m_minus,
            self.m_log_arg,
            self.l1,
            self.l2,
            self.n1,
            self.n2
        )
    }
}

/// -α m + β
fn lin(alpha: &BigRational, beta: &BigRational, m: i64) -> BigRational {
    beta - alpha * ri(m)
}

fn f_of(alpha: &BigRational, beta: &BigRational, m: i64) -> BigRational {
    lin(alpha, beta, m).max(BigRational::zero())
}

/// expr >= N + log_p(x)
fn ge_n_log(expr: &BigRational, n: u32, x: u64, p: u64) -> bool {
    pow_ge(p, &(expr - ri(n as i64)), &BigUint::from(x))
}

fn vp(p: u64, mut x: u64) -> u32 {
    let mut v = 0;
    while x > 0 && x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

/// Most extreme m (scanning outward from `start` in direction `dir`) at
/// which the tail inequality fails. Past |m+1| >= 1/α the left-hand side
/// minus log_p|m+1| is monotone, so the scan stops at the first success there.
fn tail_edge(alpha: &BigRational, ok: impl Fn(i64) -> bool, start: i64, dir: i64) -> i64 {
    let mono = (ri(1) / alpha)
        .ceil()
        .to_integer()
        .to_i64()
        .unwrap_or(i64::MAX / 4)
        + 2;
    let mut last_fail = start - dir;
    let mut m = start;
    loop {
        if !ok(m) {
            last_fail = m;
        } else if (m + 1).abs() >= mono {
            // holds, and the left-hand side only grows from here on
            break;
        }
        m += dir;
    }
    last_fail
}

/// Window and precision constants for Res(ω ∫η) with η in R_{α1,β1} and ω
/// in R_{α2,β2}, positive β clamped to 0.
pub fn residue_plan(
    eta: &BoundProfile,
    omega: &BoundProfile,
    n: u32,
    p: u64,
) -> Result<ResiduePlan, PlanError> {
    for a in [&eta.alpha, &omega.alpha] {
        if !a.is_positive() {
            return Err(PlanError::DegenerateProfile(a.to_string()));
        }
    }
    let zero = BigRational::zero();
    let (a1, b1) = (eta.alpha.clone(), eta.beta.clone().min(zero.clone()));
    let (a2, b2) = (omega.alpha.clone(), omega.beta.clone().min(zero.clone()));
    let tail1 = |m: i64| ge_n_log(&lin(&a1, &b1, m), n, (m + 1).unsigned_abs(), p);
    let tail2 = |m: i64| ge_n_log(&lin(&a2, &b2, -m - 2), n, (m + 1).unsigned_abs(), p);
    // conditions hold for m < M- and m > M+
    let m_minus = tail_edge(&a1, tail1, -2, -1).min(-2);
    let m_plus = tail_edge(&a2, tail2, 0, 1).max(0);
    let m_log_arg = ((m_plus + 1) as u64).max((-m_minus - 1) as u64).max(1);
    let target = |e: &BigRational| ge_n_log(e, n, m_log_arg, p);
    // (a)
    let m0 = {
        let mut m = (&b1 / &a1).ceil().to_integer().to_i64().unwrap();
        if m == -1 {
            m = 0;
        }
        m
    };
    let mut l2 = search_min(|l| target(&lin(&a2, &b2, -m0 - 2 - l)));
    // (b)
    let m1 = {
        let mut m = (ri(-2) - &b2 / &a2).floor().to_integer().to_i64().unwrap();
        if m == -1 {
            m = -2;
        }
        m
    };
    let mut l1 = search_min(|l| target(&lin(&a1, &b1, m1 - l)));
    // (c)
    if a2 > a1 {
        let c = search_min(|l| target(&(lin(&a1, &b1, m_minus) + lin(&a2, &b2, -m_minus - 2 - l))));
        l2 = l2.max(c);
    }
    // (d)
    if a1 > a2 {
        let c = search_min(|l| target(&(lin(&a1, &b1, m_plus - l) + lin(&a2, &b2, -m_plus - 2))));
        l1 = l1.max(c);
    }
    // (e)
    let mut n1 = n;
    while !pow_ge(p, &ri((n1 - n) as i64), &BigUint::from(m_log_arg)) {
        n1 += 1;
    }
    Ok(ResiduePlan {
        alpha1: a1,
        beta1: b1,
        alpha2: a2,
        beta2: b2,
        n,
        m_plus,
        m_minus,
        m_log_arg,
        l1,
        l2,
        n1,
        n2: n1,
    })
}

/// Smallest positive integer L satisfying a condition monotone in L.
fn search_min(ok: impl Fn(i64) -> bool) -> i64 {
    let mut hi = 1i64;
    while !ok(hi) {
        hi *= 2;
        if hi > 1 << 40 {
            return hi;
        }
    }
    let mut lo = 0i64;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Independent re-check of a plan: tail conditions beyond the scanned
/// range, the window conditions for every m in [M-, M+], the factorization
/// inequality with the exact v(m+1), and the working precision.
pub fn validate_plan(plan: &ResiduePlan, p: u64) -> Result<(), PlanError> {
    let (a1, b1, a2, b2) = (&plan.alpha1, &plan.beta1, &plan.alpha2, &plan.beta2);
    let n = plan.n;
    let fail = |s: String| Err(PlanError::Invalid(s));
    // tails, checked out to where the left side is monotone
    let reach = |a: &BigRational| (ri(2) / a).ceil().to_integer().to_i64().unwrap_or(1 << 30) + 2;
    for m in (plan.m_minus - reach(a1) - (plan.m_plus - plan.m_minus))..plan.m_minus {
        if m == -1 {
            continue;
        }
        let lhs = lin(a1, b1, m);
        if !pow_ge(
            p,
            &(lhs - ri(n as i64)),
            &BigUint::from((m + 1).unsigned_abs()),
        ) {
            return fail(format!("lower tail fails at m={m}"));
        }
    }
    for m in (plan.m_plus + 1)..=(plan.m_plus + reach(a2) + (plan.m_plus - plan.m_minus)) {
        let lhs = lin(a2, b2, -m - 2);
        if !pow_ge(p, &(lhs - ri(n as i64)), &BigUint::from((m + 1) as u64)) {
            return fail(format!("upper tail fails at m={m}"));
        }
    }
    let n1 = plan.n1 as i64;
    let n2 = plan.n2 as i64;
    if !pow_ge(p, &ri(n1 - n as i64), &BigUint::from(plan.m_log_arg)) {
        return fail("N1 below N + M_log".into());
    }
    let cap = |x: BigRational, c: i64| x.min(ri(c));
    for m in plan.m_minus..=plan.m_plus {
        if m == -1 {
            continue;
        }
        let c1 = f_of(a1, b1, m - plan.l1) + f_of(a2, b2, -m - 2);
        let c2 = f_of(a1, b1, m) + f_of(a2, b2, -m - 2 - plan.l2);
        if !ge_n_log(&c1, n, plan.m_log_arg, p) || !ge_n_log(&c2, n, plan.m_log_arg, p) {
            return fail(format!("window condition fails at m={m}"));
        }
        let g1 = f_of(a1, b1, m).max(cap(f_of(a1, b1, m - plan.l1), n1));
        let g2 = f_of(a2, b2, -m - 2).max(cap(f_of(a2, b2, -m - 2 - plan.l2), n2));
        let lhs = (g1 + f_of(a2, b2, -m - 2)).min(f_of(a1, b1, m) + g2);
        let need = ri(n as i64 + vp(p, (m + 1).unsigned_abs()) as i64);
        if lhs < need {
            return fail(format!("factorization inequality fails at m={m}"));
        }
    }
    Ok(())
}

/// Exact t-window requirements of the residue sum over [M-, M+]:
/// η must be known below M+ + 1 and ω below -M- - 1.
pub fn pairing_windows(plan: &ResiduePlan) -> (i64, i64) {
    (plan.m_plus + 1, -plan.m_minus - 1)
}

/// max v_p(m+1) over m in [M-, M+], m != -1.
pub fn max_log_valuation(plan: &ResiduePlan, p: u64) -> u32 {
    let mut best = 0;
    let mut pk = p;
    let mut k = 1;
    while pk <= plan.m_log_arg {
        best = k;
        k += 1;
        pk = pk.saturating_mul(p);
    }
    best
}

/// ceil(x) for a positive rational as u32.
pub fn ceil_u32(x: &BigRational) -> u32 {
    x.ceil().to_integer().to_u32().unwrap_or(u32::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_weil_precision_elliptic() {
        let z = weil_precision(1, 5, 1, 0).unwrap();
        assert_eq!(z.n, 2);
        assert_eq!(z.weil_bound(1), BigUint::from(4u32));
        assert_eq!(weil_precision(0, 5, 1, 0), Err(PlanError::ZeroGenus));
    }

    #[test]
    fn test_pow_ge() {
        assert!(pow_ge(5, &rat(2, 1), &BigUint::from(25u32)));
        assert!(!pow_ge(5, &rat(2, 1), &BigUint::from(26u32)));
        // 5^(3/2) ≈ 11.18
        assert!(pow_ge(5, &rat(3, 2), &BigUint::from(11u32)));
        assert!(!pow_ge(5, &rat(3, 2), &BigUint::from(12u32)));
    }

    #[test]
    fn test_global_bound_running_example() {
        assert_eq!(global_lift_bound(&rat(1, 2), 5, &rat(2, 1)), rat(45, 2));
        assert_eq!(global_lift_bound(&rat(1, 2), 5, &rat(1, 2)), rat(0, 1));
    }

    #[test]
    fn test_expansion_bound_running_example() {
        let d = vec![rat(1, 30), rat(1, 30)];
        let (g, delta) = expansion_bound(&d, &rat(1, 2), EndShape::Orders(&[-1, -1]));
        assert_eq!(g, Some(rat(1, 30)));
        assert_eq!(delta, rat(1, 2));
        let (g, _) = expansion_bound(&d, &rat(1, 2), EndShape::Orders(&[0, 2]));
        assert_eq!(g, None);
        let (g, _) = expansion_bound(
            &d,
            &rat(1, 2),
            EndShape::Profiles {
                alpha: &rat(1, 100),
                betas: &[rat(-1, 100), rat(-1, 100)],
            },
        );
        assert_eq!(g, Some(rat(1, 100)));
        let (g, _) = expansion_bound(
            &d,
            &rat(1, 2),
            EndShape::Profiles {
                alpha: &rat(1, 100),
                betas: &[rat(-1, 1), rat(-1, 1)],
            },
        );
        assert_eq!(g, Some(rat(1, 3000)));
    }

    #[test]
    fn test_alpha_nu_case1() {
        // only ∞ removed, localized model: H_2 with d0 = 2p(2g+1), d1 <= 0, d2 = 0-ish
        let p = 5;
        let g = 1;
        let d0 = 2 * p * (2 * g + 1);
        let est = local_lift_bound(1, 1, &[d0, 0, 0]).unwrap();
        // ν -> a is not admissible, the supremum is approached on the grid
        assert!(est.alpha_nu.clone().unwrap() <= rat(1, d0));
        assert_eq!(est.crude_alpha, Some(rat(1, d0)));
    }

    #[test]
    fn test_full_model_alpha() {
        let (p, g) = (5i64, 1i64);
        let d: Vec<i64> = std::iter::once(2 * p * (2 * g + 1))
            .chain(std::iter::once(8 * p * g))
            .chain((2..=2 * g + 1).map(|l| 2 * p * ((l - 1) * (2 * g - 1) + 4 * g)))
            .collect();
        let est = local_lift_bound(1, 1, &d).unwrap();
        assert!(est.alpha_nu.clone().unwrap() >= rat(1, 16 * p * g));
        assert_eq!(est.crude_alpha, Some(rat(1, 16 * p * g)));
        assert_eq!(est.crude_nu, rat(6 * g - 1, 8 * g));
    }

    #[test]
    fn test_refined_running_example() {
        // A = 1 + 5t^-2 ... with p = 5: H_0 = A - 1, H_1 = A, H_2 = A/4
        let p = 5u32;
        let mut cs = Vec::new();
        for l in 0..3 {
            cs.push(CoeffValuation {
                l,
                i: -(2 * p as i64 - 2),
                v: 1,
            });
            cs.push(CoeffValuation { l, i: -2, v: 1 });
        }
        let (nu, al) = refined_lift_bound(&cs, 1).unwrap();
        assert_eq!(nu, rat(0, 1));
        assert_eq!(al, Some(rat(1, 8)));
    }

    #[test]
    fn test_plan_validates() {
        let eta = BoundProfile::from_ints(1, 8, 0, 1);
        let om = BoundProfile::from_ints(1, 8, 0, 1);
        let plan = residue_plan(&eta, &om, 2, 5).unwrap();
        validate_plan(&plan, 5).unwrap();
        assert_eq!(plan.l1, plan.l2);
        let wide = residue_plan(
            &BoundProfile::from_ints(1, 2, 0, 1),
            &BoundProfile::from_ints(1, 2, 0, 1),
            2,
            5,
        )
        .unwrap();
        assert!(wide.m_plus - wide.m_minus < plan.m_plus - plan.m_minus);
    }
}
