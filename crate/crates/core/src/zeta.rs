//! From curve data to P1(T): plan the precision per end, lift Frobenius,
//! pair, form M = M1^-1 M2, take det(1 - T M') and lift the coefficients
//! into the Weil range.

use std::convert::Infallible;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::frobenius::{
    build_local, check_local_lift, expand_frobenius, find_end, newton_solve_local, FrobError,
    FrobeniusImage, LocalLift, LocalLiftProblem,
};
use crate::laurent::{profile_violation, BoundProfile, LaurentError, LaurentSeries};
use crate::model::{CurveSpec, Family, ModelError};
use crate::padic::{PadicError, ZqElement};
use crate::pairing::{
    expand_bounded, frob_form_expand, pair_full, pair_window, DifferentialForm, PairingError,
};
use crate::planner::{
    local_lift_bound, prof_add, prof_derivative, prof_finite, prof_inverse_denominator, prof_mul,
    rat, refined_lift_bound, residue_plan, validate_plan, weil_bound, weil_precision, PlanError,
    ResiduePlan,
};
use crate::poly::{eval_generic, mp_eval_series, mp_psi, MultiPoly, PolyError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ZetaError {
    #[error("M1 is not invertible over Z_q")]
    SingularM1,
    #[error("coefficient a_{index} has {candidates} candidates in the Weil range")]
    AmbiguousLift { index: usize, candidates: usize },
    #[error("coefficient a_{index} is not in Z_p")]
    NotGaloisInvariant { index: usize },
    #[error("working precision p^{have} is below the required p^{need}")]
    PrecisionTooLow { need: u32, have: u32 },
    #[error("expansion at end {label} is known below t^{hi}, t^{needed} is needed")]
    InsufficientExpansion { label: String, hi: i64, needed: i64 },
    #[error("lift at end {label} violates its planned profile at t^{exponent}")]
    ProfileViolated { label: String, exponent: i64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Frob(#[from] FrobError),
    #[error(transparent)]
    Pairing(#[from] PairingError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Laurent(#[from] LaurentError),
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

pub type Matrix = Vec<Vec<ZqElement>>;

/// Slope standing in for "no constraint" in profiles of series that are
/// integral and bounded below.
pub const ALPHA_CAP: i64 = 1024;

#[derive(Debug, Clone)]
pub struct ZetaOptions {
    pub margin: u32,
    pub threads: Option<usize>,
    pub depth_guard: i64,
    /// Replaces the Weil precision (for experiments; may make the lift ambiguous).
    pub precision_override: Option<u32>,
}

impl Default for ZetaOptions {
    fn default() -> Self {
        ZetaOptions {
            margin: 0,
            threads: None,
            depth_guard: 8,
            precision_override: None,
        }
    }
}

/// Lift bound and residue plan at one end.
#[derive(Debug, Clone)]
pub struct EndPlan {
    pub label: String,
    /// v(H(0)), the linear-term valuation and the pole orders per S-degree.
    pub a: u32,
    pub b: u32,
    pub d: Vec<i64>,
    /// Profile of s̃: v(s_m) >= -α m + ν.
    pub lift_profile: BoundProfile,
    pub eta: BoundProfile,
    pub omega: BoundProfile,
    pub plan: ResiduePlan,
}

#[derive(Debug, Clone)]
pub struct EndReport {
    pub label: String,
    pub iterations: u32,
    pub depth: i64,
    pub s: Vec<LaurentSeries>,
}

#[derive(Debug, Clone)]
pub struct ZetaResult {
    pub genus: u32,
    pub q: BigUint,
    pub n: u32,
    pub plans: Vec<EndPlan>,
    pub ends: Vec<EndReport>,
    pub m1: Matrix,
    pub m2: Matrix,
    pub m: Matrix,
    pub m_prime: Matrix,
    /// det(1 - T M') modulo p^N, lowest degree first.
    pub charpoly: Vec<ZqElement>,
    /// P1(T), lowest degree first.
    pub p1: Vec<BigInt>,
    /// Predicted #C(F_{q^k}) for k = 1..=max(g, 1) + 1.
    pub counts: Vec<BigInt>,
}

// ---------------------------------------------------------------------
// linear algebra over Z_q

/// Solves A X = B by Gaussian elimination with unit pivots.
pub fn solve_matrix(a: &Matrix, b: &Matrix) -> Result<Matrix, ZetaError> {
    let n = a.len();
    let mut a = a.clone();
    let mut b = b.clone();
    for col in 0..n {
        let piv = (col..n)
            .find(|&r| a[r][col].is_unit())
            .ok_or(ZetaError::SingularM1)?;
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = a[col][col].inv()?;
        for x in a[col].iter_mut().chain(b[col].iter_mut()) {
            *x = x.mul(&inv)?;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..n {
                a[r][c] = a[r][c].sub(&f.mul(&a[col][c])?)?;
            }
            for c in 0..b[r].len() {
                b[r][c] = b[r][c].sub(&f.mul(&b[col][c])?)?;
            }
        }
    }
    Ok(b)
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Result<Matrix, ZetaError> {
    let n = a.len();
    let m = b.first().map_or(0, |r| r.len());
    let ctx = a[0][0].ctx();
    let prec = a[0][0].prec().min(b[0][0].prec());
    let mut out = vec![vec![ctx.zero(prec); m]; n];
    for i in 0..n {
        for j in 0..m {
            let mut acc = ctx.zero(prec);
            for (k, bk) in b.iter().enumerate() {
                acc = acc.add(&a[i][k].mul(&bk[j])?)?;
            }
            out[i][j] = acc;
        }
    }
    Ok(out)
}

pub fn mat_sigma(a: &Matrix, k: usize) -> Matrix {
    a.iter()
        .map(|r| r.iter().map(|x| x.sigma(k)).collect())
        .collect()
}

/// σ^(l-1)(M) ··· σ(M) M: the q-power Frobenius from the σ-semilinear one.
pub fn twisted_product(m: &Matrix, l: usize) -> Result<Matrix, ZetaError> {
    let mut acc = m.clone();
    for k in 1..l {
        acc = mat_mul(&mat_sigma(m, k), &acc)?;
    }
    Ok(acc)
}

/// det(1 - T A) by Berkowitz's division-free algorithm, lowest degree first.
pub fn charpoly_berkowitz(a: &Matrix) -> Result<Vec<ZqElement>, ZetaError> {
    let n = a.len();
    let ctx = a[0][0].ctx();
    let prec = a.iter().flatten().map(|x| x.prec()).min().unwrap_or(1);
    let mut vect = vec![ctx.one(prec), a[0][0].neg()];
    for r in 1..n {
        // t = (1, -a_rr, -R C, -R A C, ..., -R A^(r-1) C)
        let mut t = vec![ctx.one(prec), a[r][r].neg()];
        let mut c: Vec<ZqElement> = (0..r).map(|i| a[i][r].clone()).collect();
        for _ in 0..r {
            let mut rc = ctx.zero(prec);
            for (k, ck) in c.iter().enumerate() {
                rc = rc.add(&a[r][k].mul(ck)?)?;
            }
            t.push(rc.neg());
            let mut next = Vec::with_capacity(r);
            for row in a.iter().take(r) {
                let mut acc = ctx.zero(prec);
                for (k, ck) in c.iter().enumerate() {
                    acc = acc.add(&row[k].mul(ck)?)?;
                }
                next.push(acc);
            }
            c = next;
        }
        let mut out = Vec::with_capacity(r + 2);
        for i in 0..r + 2 {
            let mut acc = ctx.zero(prec);
            for (j, v) in vect.iter().enumerate() {
                if j <= i {
                    acc = acc.add(&t[i - j].mul(v)?)?;
                }
            }
            out.push(acc);
        }
        vect = out;
    }
    Ok(vect)
}

/// The unique integer in [-bound, bound] congruent to `c` modulo p^n.
pub fn weil_lift(
    c: &ZqElement,
    bound: &BigUint,
    n: u32,
    index: usize,
) -> Result<BigInt, ZetaError> {
    if !c.is_rational() {
        return Err(ZetaError::NotGaloisInvariant { index });
    }
    let modulus = BigInt::from(c.ctx().p_pow(n));
    let r = BigInt::from(c.truncate(n).constant_residue());
    let b = BigInt::from(bound.clone());
    let first = -&b + (&r + &b).mod_floor(&modulus);
    let mut candidates = Vec::new();
    let mut k = first;
    while k <= b {
        candidates.push(k.clone());
        if candidates.len() > 2 {
            break;
        }
        k += &modulus;
    }
    if candidates.len() != 1 {
        return Err(ZetaError::AmbiguousLift {
            index,
            candidates: candidates.len(),
        });
    }
    Ok(candidates.pop().unwrap())
}

/// P1(T) from det(1 - T M') modulo p^n: a_1..a_g lifted into the Weil
/// range, a_(2g-i) = q^(g-i) a_i.
pub fn zeta_numerator(
    charpoly: &[ZqElement],
    g: u32,
    q: &BigUint,
    n: u32,
) -> Result<Vec<BigInt>, ZetaError> {
    let g = g as usize;
    let mut a = vec![BigInt::zero(); 2 * g + 1];
    a[0] = BigInt::one();
    for i in 1..=g {
        a[i] = weil_lift(&charpoly[i], &weil_bound(g as u32, q, i as u32), n, i)?;
    }
    let qi = BigInt::from(q.clone());
    for i in 0..g {
        a[2 * g - i] = qi.pow((g - i) as u32) * &a[i];
    }
    Ok(a)
}

/// #C(F_{q^k}) = q^k + 1 - Σ α^k for k = 1..=count, by Newton's identities.
pub fn predicted_counts(p1: &[BigInt], q: &BigUint, count: usize) -> Vec<BigInt> {
    let deg = p1.len() - 1;
    // P1 = Π (1 - α T) = Σ (-1)^i e_i T^i
    let e: Vec<BigInt> = (0..=deg)
        .map(|i| if i % 2 == 0 { p1[i].clone() } else { -&p1[i] })
        .collect();
    let mut s: Vec<BigInt> = vec![BigInt::zero(); count + 1];
    for k in 1..=count {
        let mut acc = BigInt::zero();
        for i in 1..k.min(deg + 1) {
            let term = &e[i] * &s[k - i];
            if i % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        if k <= deg {
            let term = &e[k] * BigInt::from(k);
            if k % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        s[k] = acc;
    }
    let qi = BigInt::from(q.clone());
    (1..=count).map(|k| qi.pow(k as u32) + 1 - &s[k]).collect()
}

// ---------------------------------------------------------------------
// planning

fn finite(alpha: &BigRational, s: &LaurentSeries) -> BoundProfile {
    prof_finite(alpha, s.leading_exponent().unwrap_or(0))
}

/// Profile of f evaluated at series with the given profiles; coefficients
/// are integral.
fn poly_profile(f: &MultiPoly, args: &[BoundProfile], alpha: &BigRational) -> BoundProfile {
    let one = prof_finite(alpha, 0);
    let r: Result<BoundProfile, Infallible> = eval_generic(
        f,
        args,
        one,
        |a, b| Ok(prof_mul(a, b)),
        |a, b| Ok(prof_add(a, b)),
        |a, _| Ok(a.clone()),
    );
    r.unwrap()
}

/// Profiles of φ(x_i) and 1/φ(x_i) from the profile of s̃.
fn frobenius_profiles(
    spec: &CurveSpec,
    xi: &[LaurentSeries],
    s_prof: &BoundProfile,
    alpha: &BigRational,
) -> Result<(Vec<BoundProfile>, Vec<BoundProfile>), ZetaError> {
    let p = spec.ctx.p() as u32;
    let mut phi = Vec::new();
    let mut inv = Vec::new();
    for (i, row) in spec.p_mat.iter().enumerate() {
        let d = xi[i].leading_exponent().unwrap_or(0) * p as i64;
        let base = prof_finite(alpha, d);
        let mut corr: Option<BoundProfile> = None;
        for f in row {
            if f.is_zero() {
                continue;
            }
            let c = mp_eval_series(&mp_psi(f), xi)?;
            let term = prof_mul(&finite(alpha, &c), s_prof);
            corr = Some(match corr {
                None => term,
                Some(x) => prof_add(&x, &term),
            });
        }
        let (ph, c) = match corr {
            None => (base, BoundProfile::new(alpha.clone(), BigRational::zero())),
            Some(corr) => (
                prof_add(&base, &corr),
                prof_mul(&prof_finite(alpha, -d), &corr),
            ),
        };
        phi.push(ph);
        inv.push(prof_inverse_denominator(d, &c));
    }
    Ok((phi, inv))
}

fn form_profile(
    form: &DifferentialForm,
    phi: &[BoundProfile],
    inv: &[BoundProfile],
    alpha: &BigRational,
) -> Result<BoundProfile, ZetaError> {
    let mut acc: Option<BoundProfile> = None;
    for t in &form.terms {
        let num = poly_profile(&t.num, phi, alpha);
        if t.den.terms().len() != 1 {
            return Err(ZetaError::Unsupported(
                "planning needs monomial denominators".into(),
            ));
        }
        let (e, _) = t.den.terms().iter().next().unwrap();
        let mut den = prof_finite(alpha, 0);
        for (i, &k) in e.iter().enumerate() {
            for _ in 0..k {
                den = prof_mul(&den, &inv[i]);
            }
        }
        let term = prof_mul(&prof_mul(&num, &den), &prof_derivative(&phi[t.dvar]));
        acc = Some(match acc {
            None => term,
            Some(x) => prof_add(&x, &term),
        });
    }
    Ok(acc.unwrap_or_else(|| prof_finite(alpha, 0)))
}

fn worst(ps: &[BoundProfile]) -> BoundProfile {
    let a = ps.iter().map(|p| p.alpha.clone()).min().unwrap();
    let b = ps.iter().map(|p| p.beta.clone()).min().unwrap();
    BoundProfile::new(a, b)
}

/// Lift profile and residue plan at every end for target precision n.
pub fn plan_ends(spec: &CurveSpec, n: u32, depth_guard: i64) -> Result<Vec<EndPlan>, ZetaError> {
    let ctx = &spec.ctx;
    let prec = (n + 2).min(ctx.n_work());
    let cap = rat(ALPHA_CAP, 1);
    let mut out = Vec::new();
    for end in &spec.ends {
        let depth = 32 + depth_guard;
        let xi = end.expansions(depth, prec)?;
        let prob = build_local(spec, &end.label, &xi, prec)?;
        let a = prob.constant_valuation();
        let b = prob.linear_valuation();
        let d = prob.pole_orders();
        let coeffs = prob.coefficient_valuations();
        let (nu, alpha) = match refined_lift_bound(&coeffs, a) {
            Some((nu, Some(al))) => (nu, al.min(cap.clone())),
            Some((nu, None)) => (nu, cap.clone()),
            None => {
                let est = local_lift_bound(a, b, &d)?;
                (
                    est.nu.clone(),
                    est.alpha_nu.clone().unwrap_or(cap.clone()).min(cap.clone()),
                )
            }
        };
        let lift_profile = BoundProfile::new(alpha.clone(), nu);
        let (phi, inv) = frobenius_profiles(spec, &xi, &lift_profile, &alpha)?;
        let omegas: Vec<BoundProfile> = spec
            .basis
            .iter()
            .map(|f| form_profile(f, &phi, &inv, &alpha))
            .collect::<Result<_, _>>()?;
        let forms = expand_bounded(&spec.basis, &xi)?;
        let etas: Vec<BoundProfile> = forms.iter().map(|(_, lo)| prof_finite(&cap, *lo)).collect();
        let (eta, omega) = (worst(&etas), worst(&omegas));
        let plan = residue_plan(&eta, &omega, n, ctx.p())?;
        validate_plan(&plan, ctx.p())?;
        out.push(EndPlan {
            label: end.label.clone(),
            a,
            b,
            d,
            lift_profile,
            eta,
            omega,
            plan,
        });
    }
    Ok(out)
}

/// Local lift at one end: H at precision n from expansions known below
/// t^depth, Newton's solution and the Frobenius image.
pub fn lift_at_end(
    spec: &CurveSpec,
    label: &str,
    n: u32,
    depth: i64,
) -> Result<
    (
        Vec<LaurentSeries>,
        LocalLiftProblem,
        LocalLift,
        FrobeniusImage,
    ),
    ZetaError,
> {
    let end = find_end(spec, label)?;
    let xi = end.expansions(depth, n)?;
    let prob = build_local(spec, label, &xi, n)?;
    let lift = newton_solve_local(&prob, n)?;
    let img = expand_frobenius(spec, &xi, &lift.s)?;
    Ok((xi, prob, lift, img))
}

struct EndSeries {
    forms: Vec<(LaurentSeries, i64)>,
    frob: Vec<LaurentSeries>,
    report: EndReport,
}

/// Expansions of the basis and of its Frobenius image at one end, with
/// the y-depth doubled until the planned windows are covered.
fn end_series(spec: &CurveSpec, ep: &EndPlan, depth_guard: i64) -> Result<EndSeries, ZetaError> {
    let end = find_end(spec, &ep.label)?;
    let n1 = ep.plan.n1;
    let g = spec.genus as i64;
    let need_e = ep.plan.m_plus + 1;
    let need_w = -ep.plan.m_minus - 1;
    let mut depth = need_e.max(need_w) + 2 * g + 4 + depth_guard;
    loop {
        let attempt = (|| -> Result<EndSeries, ZetaError> {
            let (xi, _prob, lift, img) = lift_at_end(spec, &ep.label, n1, depth)?;
            if let Some(m) = lift
                .s
                .iter()
                .find_map(|s| profile_violation(s, &ep.lift_profile))
            {
                return Err(ZetaError::ProfileViolated {
                    label: ep.label.clone(),
                    exponent: m,
                });
            }
            let forms = expand_bounded(&spec.basis, &xi)?;
            let frob: Vec<LaurentSeries> = spec
                .basis
                .iter()
                .map(|f| frob_form_expand(f, &img))
                .collect::<Result<_, _>>()?;
            for (e, _) in &forms {
                if e.hi() < need_e {
                    return Err(ZetaError::InsufficientExpansion {
                        label: ep.label.clone(),
                        hi: e.hi(),
                        needed: need_e,
                    });
                }
            }
            for w in &frob {
                if w.hi() < need_w {
                    return Err(ZetaError::InsufficientExpansion {
                        label: ep.label.clone(),
                        hi: w.hi(),
                        needed: need_w,
                    });
                }
            }
            Ok(EndSeries {
                forms,
                frob,
                report: EndReport {
                    label: ep.label.clone(),
                    iterations: lift.iterations,
                    depth,
                    s: lift.s,
                },
            })
        })();
        match attempt {
            Err(
                ZetaError::InsufficientExpansion { .. }
                | ZetaError::Laurent(LaurentError::EmptyWindow { .. }),
            ) if end.regenerable() && depth < 1 << 20 => {
                depth *= 2;
            }
            Err(ZetaError::Pairing(PairingError::Laurent(LaurentError::EmptyWindow {
                ..
            }))) if end.regenerable() && depth < 1 << 20 => {
                depth *= 2;
            }
            other => return other,
        }
    }
}

/// M1 and M2 summed over the ends.
fn pairing_matrices(
    spec: &CurveSpec,
    plans: &[EndPlan],
    series: &[EndSeries],
    n: u32,
) -> Result<(Matrix, Matrix), ZetaError> {
    let dim = spec.basis.len();
    let idx: Vec<(usize, usize)> = (0..dim)
        .flat_map(|i| (0..dim).map(move |j| (i, j)))
        .collect();
    let entries: Vec<(ZqElement, ZqElement)> = idx
        .par_iter()
        .map(|&(i, j)| -> Result<(ZqElement, ZqElement), ZetaError> {
            let mut m1 = spec.ctx.zero(n);
            let mut m2 = spec.ctx.zero(n);
            for (ep, es) in plans.iter().zip(series) {
                let ((wj, wj_lo), (ei, ei_lo)) = (&es.forms[j], &es.forms[i]);
                let a = pair_full(wj, *wj_lo, ei, *ei_lo)?;
                m1 = m1.add(&a.truncate(n))?;
                let b = pair_window(&es.frob[j], ei, ep.plan.m_minus, ep.plan.m_plus, n)?;
                m2 = m2.add(&b)?;
            }
            Ok((m1, m2))
        })
        .collect::<Result<_, _>>()?;
    let mut m1 = vec![Vec::with_capacity(dim); dim];
    let mut m2 = vec![Vec::with_capacity(dim); dim];
    for ((i, _), (a, b)) in idx.into_iter().zip(entries) {
        m1[i].push(a);
        m2[i].push(b);
    }
    Ok((m1, m2))
}

fn genus_zero(spec: &CurveSpec) -> ZetaResult {
    let q = spec.ctx.q();
    let p1 = vec![BigInt::one()];
    let counts = predicted_counts(&p1, &q, 2);
    ZetaResult {
        genus: 0,
        q,
        n: 0,
        plans: Vec::new(),
        ends: Vec::new(),
        m1: Vec::new(),
        m2: Vec::new(),
        m: Vec::new(),
        m_prime: Vec::new(),
        charpoly: Vec::new(),
        p1,
        counts,
    }
}

pub fn compute_zeta(spec: &CurveSpec, opts: &ZetaOptions) -> Result<ZetaResult, ZetaError> {
    match opts.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| ZetaError::Unsupported(e.to_string()))?;
            pool.install(|| compute_zeta_inner(spec, opts))
        }
        None => compute_zeta_inner(spec, opts),
    }
}

fn compute_zeta_inner(spec: &CurveSpec, opts: &ZetaOptions) -> Result<ZetaResult, ZetaError> {
    if spec.genus == 0 {
        return Ok(genus_zero(spec));
    }
    if let Family::Hyperelliptic {
        localized: true, ..
    } = spec.family
    {
        return Err(ZetaError::Unsupported(
            "the localized model is for lifting only".into(),
        ));
    }
    let ctx = &spec.ctx;
    let l = ctx.l();
    let zp = weil_precision(spec.genus, ctx.p(), l as u32, opts.margin)?;
    let n = opts.precision_override.unwrap_or(zp.n);
    let plans = plan_ends(spec, n, opts.depth_guard)?;
    let need = plans.iter().map(|e| e.plan.n1).max().unwrap_or(n);
    if need > ctx.n_work() {
        return Err(ZetaError::PrecisionTooLow {
            need,
            have: ctx.n_work(),
        });
    }
    let series: Vec<EndSeries> = plans
        .par_iter()
        .map(|ep| end_series(spec, ep, opts.depth_guard))
        .collect::<Result<_, _>>()?;
    let (m1, m2) = pairing_matrices(spec, &plans, &series, n)?;
    let m = solve_matrix(&m1, &m2)?;
    let m_prime = twisted_product(&m, l)?;
    let charpoly = charpoly_berkowitz(&m_prime)?;
    let q = ctx.q();
    let p1 = zeta_numerator(&charpoly, spec.genus, &q, n)?;
    let counts = predicted_counts(&p1, &q, spec.genus.max(1) as usize + 1);
    let ends = series.into_iter().map(|s| s.report).collect();
    Ok(ZetaResult {
        genus: spec.genus,
        q,
        n,
        plans,
        ends,
        m1,
        m2,
        m,
        m_prime,
        charpoly,
        p1,
        counts,
    })
}

/// Runs the defining congruences of the local lift at every end.
pub fn check_lifts(spec: &CurveSpec, n: u32, depth: i64) -> Result<(), ZetaError> {
    for end in &spec.ends {
        let (_, prob, lift, img) = lift_at_end(spec, &end.label, n, depth)?;
        check_local_lift(spec, &prob, &lift, &img)?;
    }
    Ok(())
}
