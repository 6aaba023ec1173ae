//! Frobenius lifts. At an end, s̃ solves H(S) = 0 where H(S) is
//! f^σ(x^p + ψ(P) S) reduced modulo the equations and expanded in t. On a
//! plane curve the global s solves G(S) = 0 in Z_q[x, y], truncated by
//! polytope cost.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::laurent::{ls_derivative, ls_inv, ls_mul, LaurentError, LaurentSeries, EXACT_HI};
use crate::model::{CurveSpec, ModelError};
use crate::padic::{Ctx, PadicError, Valuation, ZqElement};
use crate::planner::{global_lift_bound, CoeffValuation};
use crate::poly::{mp_eval_series, mp_psi, normal_form, pb_cost, MultiPoly, PolyError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrobError {
    #[error("Newton iteration stalled at p^{valuation} after {iterations} steps")]
    NoConvergence { iterations: u32, valuation: u32 },
    #[error("coefficients of cost above {cutoff} reach valuation {valuation} only")]
    CutoffUnsound { cutoff: String, valuation: u32 },
    #[error("lift system fails a congruence: {0}")]
    Invariant(String),
    #[error("the global lift needs a plane curve whose polytope bounds both variables")]
    NotPlane,
    #[error("no end labelled {0}")]
    UnknownEnd(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Laurent(#[from] LaurentError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Padic(#[from] PadicError),
}

/// ⌈log2 n⌉ + 2 Newton steps suffice from a solution modulo p.
pub fn newton_cap(n: u32) -> u32 {
    let mut k = 0;
    while (1u64 << k) < n as u64 {
        k += 1;
    }
    k + 2
}

fn exact_zero(ctx: &Ctx, prec: u32) -> LaurentSeries {
    LaurentSeries::zero(ctx, prec, EXACT_HI)
}

fn exact_one(ctx: &Ctx, prec: u32) -> LaurentSeries {
    LaurentSeries::one(ctx, prec, EXACT_HI)
}

/// a^k by repeated squaring.
pub fn ls_pow(a: &LaurentSeries, k: u32) -> Result<LaurentSeries, LaurentError> {
    let mut acc = exact_one(a.ctx(), a.prec());
    let mut base = a.clone();
    let mut k = k;
    while k > 0 {
        if k & 1 == 1 {
            acc = ls_mul(&acc, &base)?;
        }
        k >>= 1;
        if k > 0 {
            base = ls_mul(&base, &base)?;
        }
    }
    Ok(acc)
}

fn valuation_of(v: Valuation, prec: u32) -> u32 {
    match v {
        Valuation::Exact(v) => v,
        Valuation::AtLeast(_) => prec,
    }
}

/// Inverse of a series congruent to a unit constant c modulo p, as
/// c^-1 Σ_k (1 - c^-1 a)^k; exact inputs give exact inverses. Other series
/// go through the general inverse.
pub fn inv_near_unit(a: &LaurentSeries) -> Result<LaurentSeries, LaurentError> {
    let prec = a.prec();
    let c = a.coeff(0)?;
    if c.is_unit() {
        let cinv = c.inv()?;
        let e = exact_one(a.ctx(), prec).sub(&a.scale(&cinv)?)?;
        if !e.is_zero() && e.divisible_by_p_pow(1) {
            let mut acc = exact_one(a.ctx(), prec).with_hi_unchecked(e.hi());
            let mut term = acc.clone();
            for _ in 1..prec {
                term = ls_mul(&term, &e)?;
                if term.is_zero() {
                    break;
                }
                acc = acc.add(&term)?;
            }
            return acc.scale(&cinv);
        } else if e.is_zero() {
            return Ok(LaurentSeries::constant(&cinv, a.hi()));
        }
    }
    ls_inv(a)
}

/// Solves J x = h by Gaussian elimination with unit pivots.
pub fn solve_series_system(
    j: &[Vec<LaurentSeries>],
    h: &[LaurentSeries],
) -> Result<Vec<LaurentSeries>, LaurentError> {
    let k = h.len();
    let mut a: Vec<Vec<LaurentSeries>> = j.to_vec();
    let mut b: Vec<LaurentSeries> = h.to_vec();
    for col in 0..k {
        let piv = (col..k)
            .find(|&r| a[r][col].coeff(0).map(|c| c.is_unit()).unwrap_or(false))
            .or_else(|| (col..k).find(|&r| ls_inv(&a[r][col]).is_ok()))
            .ok_or(LaurentError::NotInvertible)?;
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = inv_near_unit(&a[col][col])?;
        for c in col..k {
            a[col][c] = ls_mul(&a[col][c], &inv)?;
        }
        b[col] = ls_mul(&b[col], &inv)?;
        for r in 0..k {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in col..k {
                a[r][c] = a[r][c].sub(&ls_mul(&f, &a[col][c])?)?;
            }
            b[r] = b[r].sub(&ls_mul(&f, &b[col])?)?;
        }
    }
    Ok(b)
}

/// Polynomial in S_1..S_k with Laurent series coefficients.
#[derive(Debug, Clone)]
pub struct SeriesPoly {
    pub k: usize,
    pub terms: BTreeMap<Vec<u32>, LaurentSeries>,
}

impl SeriesPoly {
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Coefficient of the monomial `e`, if present.
    pub fn coeff(&self, e: &[u32]) -> Option<&LaurentSeries> {
        self.terms.get(e)
    }

    pub fn derivative(&self, m: usize) -> SeriesPoly {
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            if e[m] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[m] -= 1;
            terms.insert(e2, c.mul_int(e[m] as i64));
        }
        SeriesPoly { k: self.k, terms }
    }

    pub fn eval(
        &self,
        ctx: &Ctx,
        s: &[LaurentSeries],
        prec: u32,
    ) -> Result<LaurentSeries, LaurentError> {
        let mut powers: Vec<Vec<LaurentSeries>> = Vec::with_capacity(self.k);
        for (m, sm) in s.iter().enumerate() {
            let d = self.terms.keys().map(|e| e[m]).max().unwrap_or(0);
            let sm = sm.with_prec(prec);
            let mut pw = vec![exact_one(ctx, prec)];
            for i in 1..=d as usize {
                let next = ls_mul(&pw[i - 1], &sm)?;
                pw.push(next);
            }
            powers.push(pw);
        }
        let mut acc = exact_zero(ctx, prec);
        for (e, c) in &self.terms {
            let mut t = c.with_prec(prec);
            for (m, &d) in e.iter().enumerate() {
                if d > 0 {
                    t = ls_mul(&t, &powers[m][d as usize])?;
                }
            }
            acc = acc.add(&t)?;
        }
        Ok(acc)
    }
}

/// The local system at one end.
#[derive(Debug, Clone)]
pub struct LocalLiftProblem {
    pub label: String,
    pub xi: Vec<LaurentSeries>,
    /// H_j for each equation f_j.
    pub h: Vec<SeriesPoly>,
    pub prec: u32,
}

/// x_i^p + Σ_k ψ(P_ik) S_k in the ring with variables x_1..x_n, S_1..S_k.
fn frobenius_arguments(spec: &CurveSpec, prec: u32) -> Vec<MultiPoly> {
    let ctx = &spec.ctx;
    let n = spec.nvars();
    let k = n - 1;
    let tot = n + k;
    let p = ctx.p() as u32;
    (0..n)
        .map(|i| {
            let mut a = MultiPoly::var(ctx, tot, i, prec).pow(p);
            for m in 0..k {
                let psi = mp_psi(&spec.p_mat[i][m].with_prec(prec)).extend_vars(tot);
                a = a.add(&psi.mul(&MultiPoly::var(ctx, tot, n + m, prec)));
            }
            a
        })
        .collect()
}

/// Splits a polynomial in x_1..x_n, S_1..S_k by its S-monomials.
fn group_by_s(f: &MultiPoly, n: usize) -> BTreeMap<Vec<u32>, MultiPoly> {
    let mut groups: BTreeMap<Vec<u32>, MultiPoly> = BTreeMap::new();
    for (e, c) in f.terms() {
        let (xe, se) = e.split_at(n);
        groups
            .entry(se.to_vec())
            .or_insert_with(|| MultiPoly::zero(f.ctx(), n, f.prec()))
            .add_term(xe.to_vec(), c.clone());
    }
    groups
}

pub fn find_end<'a>(
    spec: &'a CurveSpec,
    label: &str,
) -> Result<&'a crate::model::EndData, FrobError> {
    spec.ends
        .iter()
        .find(|e| e.label == label)
        .ok_or_else(|| FrobError::UnknownEnd(label.into()))
}

/// Builds H at the end `label` from the expansions `xi`, and checks
/// H(0) ≡ 0 and H'(0) ≡ Id modulo p.
pub fn build_local(
    spec: &CurveSpec,
    label: &str,
    xi: &[LaurentSeries],
    prec: u32,
) -> Result<LocalLiftProblem, FrobError> {
    let ctx = &spec.ctx;
    let n = spec.nvars();
    let k = n - 1;
    let args = frobenius_arguments(spec, prec);
    let eqs: Vec<MultiPoly> = spec.equations.iter().map(|f| f.with_prec(prec)).collect();
    let xi: Vec<LaurentSeries> = xi.iter().map(|s| s.with_prec(prec)).collect();
    let mut h = Vec::with_capacity(eqs.len());
    for (j, f) in eqs.iter().enumerate() {
        let hp = normal_form(&f.sigma(1).compose(&args)?, &eqs);
        let mut terms = BTreeMap::new();
        for (se, poly) in group_by_s(&hp, n) {
            let v = mp_eval_series(&poly, &xi)?;
            if !v.is_zero() {
                terms.insert(se, v);
            }
        }
        let hj = SeriesPoly { k, terms };
        let zero_e = vec![0u32; k];
        if let Some(c) = hj.coeff(&zero_e) {
            if !c.divisible_by_p_pow(1) {
                return Err(FrobError::Invariant(format!(
                    "H_{}(0) is not divisible by p at end {}",
                    j + 2,
                    label
                )));
            }
        }
        for m in 0..k {
            let mut e = zero_e.clone();
            e[m] = 1;
            let target = if m == j {
                exact_one(ctx, prec)
            } else {
                exact_zero(ctx, prec)
            };
            let c = hj
                .coeff(&e)
                .cloned()
                .unwrap_or_else(|| exact_zero(ctx, prec));
            if !c.sub(&target)?.divisible_by_p_pow(1) {
                return Err(FrobError::Invariant(format!(
                    "∂H_{}/∂S_{} is not congruent to {} modulo p at end {}",
                    j + 2,
                    m + 1,
                    u8::from(m == j),
                    label
                )));
            }
        }
        h.push(hj);
    }
    Ok(LocalLiftProblem {
        label: label.into(),
        xi,
        h,
        prec,
    })
}

impl LocalLiftProblem {
    pub fn ctx(&self) -> &Ctx {
        self.xi[0].ctx()
    }

    pub fn k(&self) -> usize {
        self.h.len()
    }

    pub fn eval(&self, s: &[LaurentSeries], prec: u32) -> Result<Vec<LaurentSeries>, LaurentError> {
        self.h
            .iter()
            .map(|hj| hj.eval(self.ctx(), s, prec))
            .collect()
    }

    /// Valuation a of H(0).
    pub fn constant_valuation(&self) -> u32 {
        let zero_e = vec![0u32; self.k()];
        self.h
            .iter()
            .filter_map(|hj| hj.coeff(&zero_e))
            .map(|c| valuation_of(c.min_valuation(), self.prec))
            .min()
            .unwrap_or(self.prec)
    }

    /// Smallest valuation among the negative-exponent coefficients of the
    /// linear terms.
    pub fn linear_valuation(&self) -> u32 {
        let mut b = self.prec;
        for hj in &self.h {
            for (e, c) in &hj.terms {
                if e.iter().sum::<u32>() != 1 {
                    continue;
                }
                for (i, x) in c.terms() {
                    if i < 0 {
                        b = b.min(valuation_of(x.valuation(), self.prec));
                    }
                }
            }
        }
        b
    }

    /// Pole order d_l of the S-degree l part, for l up to the degree.
    pub fn pole_orders(&self) -> Vec<i64> {
        let deg = self.h.iter().map(|hj| hj.degree()).max().unwrap_or(0) as usize;
        let mut d = vec![0i64; deg + 1];
        for hj in &self.h {
            for (e, c) in &hj.terms {
                let l = e.iter().sum::<u32>() as usize;
                if let Some(lo) = c.leading_exponent() {
                    d[l] = d[l].max(-lo);
                }
            }
        }
        d
    }

    /// Every nonzero negative-exponent coefficient of every H_j.
    pub fn coefficient_valuations(&self) -> Vec<CoeffValuation> {
        let mut out = Vec::new();
        for hj in &self.h {
            for (e, c) in &hj.terms {
                let l = e.iter().sum::<u32>();
                for (i, x) in c.terms() {
                    if i >= 0 {
                        continue;
                    }
                    if let Valuation::Exact(v) = x.valuation() {
                        out.push(CoeffValuation { l, i, v });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct LocalLift {
    pub label: String,
    pub s: Vec<LaurentSeries>,
    pub iterations: u32,
    pub prec: u32,
}

/// Newton's iteration from s = 0; each step doubles the p-adic accuracy.
pub fn newton_solve_local(prob: &LocalLiftProblem, n: u32) -> Result<LocalLift, FrobError> {
    let ctx = prob.ctx().clone();
    let n = n.min(prob.prec);
    let k = prob.k();
    let cap = newton_cap(n);
    let mut s = vec![exact_zero(&ctx, n); k];
    let mut iterations = 0;
    let mut prev = 0;
    loop {
        let hv = prob.eval(&s, n)?;
        let v = hv
            .iter()
            .map(|h| valuation_of(h.min_valuation(), n))
            .min()
            .unwrap_or(n);
        if v >= n {
            break;
        }
        if v <= prev || iterations >= cap {
            return Err(FrobError::NoConvergence {
                iterations,
                valuation: v,
            });
        }
        let c2 = (2 * v).min(n);
        let r = c2 - v;
        let hq: Vec<LaurentSeries> = hv
            .iter()
            .map(|h| h.with_prec(c2).div_p_pow(v))
            .collect::<Result<_, _>>()?;
        let mut jac = vec![Vec::with_capacity(k); k];
        for (j, hj) in prob.h.iter().enumerate() {
            for m in 0..k {
                jac[j].push(hj.derivative(m).eval(&ctx, &s, r)?);
            }
        }
        let delta = solve_series_system(&jac, &hq)?;
        for (sm, dm) in s.iter_mut().zip(&delta) {
            *sm = sm.sub(&dm.raise_by_p_pow(v))?.with_prec_unchecked(n);
        }
        iterations += 1;
        prev = v;
    }
    Ok(LocalLift {
        label: prob.label.clone(),
        s,
        iterations,
        prec: n,
    })
}

/// P_ik / x_i when every term of P_ik contains x_i.
fn divide_by_var(f: &MultiPoly, i: usize) -> Option<MultiPoly> {
    let mut r = MultiPoly::zero(f.ctx(), f.nvars(), f.prec());
    for (e, c) in f.terms() {
        if e[i] == 0 {
            return None;
        }
        let mut e2 = e.clone();
        e2[i] -= 1;
        r.add_term(e2, c.clone());
    }
    Some(r)
}

/// φ(x_i) at an end. When the row P_i is divisible by x_i, φ(x_i) is kept
/// as ξ(x_i)^p times the unit 1 + Σ_k ψ(P_ik / x_i) s̃_k, which inverts
/// without losing window.
#[derive(Debug, Clone)]
pub struct FrobeniusImage {
    pub phi: Vec<LaurentSeries>,
    pub dphi: Vec<LaurentSeries>,
    parts: Vec<Option<(LaurentSeries, LaurentSeries)>>,
}

impl FrobeniusImage {
    /// 1/φ(x_i).
    pub fn inverse(&self, i: usize) -> Result<LaurentSeries, LaurentError> {
        if let Some((base, unit)) = &self.parts[i] {
            if let Ok(ui) = inv_near_unit(unit) {
                return ls_mul(&ls_inv(base)?, &ui);
            }
        }
        ls_inv(&self.phi[i])
    }
}

pub fn expand_frobenius(
    spec: &CurveSpec,
    xi: &[LaurentSeries],
    s: &[LaurentSeries],
) -> Result<FrobeniusImage, FrobError> {
    let ctx = &spec.ctx;
    let p = ctx.p() as u32;
    let prec = s.iter().map(|x| x.prec()).min().unwrap_or(ctx.n_work());
    let xi: Vec<LaurentSeries> = xi.iter().map(|x| x.with_prec(prec)).collect();
    let mut phi = Vec::with_capacity(xi.len());
    let mut parts = Vec::with_capacity(xi.len());
    for (i, row) in spec.p_mat.iter().enumerate() {
        let base = ls_pow(&xi[i], p)?;
        let quotients: Option<Vec<MultiPoly>> = row
            .iter()
            .map(|f| divide_by_var(&f.with_prec(prec), i))
            .collect();
        match quotients {
            Some(qs) => {
                let mut unit = exact_one(ctx, prec);
                for (q, sk) in qs.iter().zip(s) {
                    if q.is_zero() {
                        continue;
                    }
                    let c = mp_eval_series(&mp_psi(q), &xi)?;
                    unit = unit.add(&ls_mul(&c, sk)?)?;
                }
                phi.push(ls_mul(&base, &unit)?);
                parts.push(Some((base, unit)));
            }
            None => {
                let mut acc = base;
                for (f, sk) in row.iter().zip(s) {
                    let c = mp_eval_series(&mp_psi(&f.with_prec(prec)), &xi)?;
                    acc = acc.add(&ls_mul(&c, sk)?)?;
                }
                phi.push(acc);
                parts.push(None);
            }
        }
    }
    let dphi = phi.iter().map(ls_derivative).collect();
    Ok(FrobeniusImage { phi, dphi, parts })
}

/// The defining congruences of a local lift: H(s̃) ≡ 0 mod p^N, s̃ ≡ 0 mod
/// p, φ(x_i) ≡ ξ(x_i)^p mod p and f_j^σ(φ(x)) ≡ 0 mod p^N.
pub fn check_local_lift(
    spec: &CurveSpec,
    prob: &LocalLiftProblem,
    lift: &LocalLift,
    image: &FrobeniusImage,
) -> Result<(), FrobError> {
    let n = lift.prec;
    let p = spec.ctx.p() as u32;
    for (j, h) in prob.eval(&lift.s, n)?.iter().enumerate() {
        if !h.is_zero() {
            return Err(FrobError::Invariant(format!(
                "H_{}(s) is not zero modulo p^{}",
                j + 2,
                n
            )));
        }
    }
    if lift.s.iter().any(|s| !s.divisible_by_p_pow(1)) {
        return Err(FrobError::Invariant("s is not divisible by p".into()));
    }
    for (i, (x, f)) in prob.xi.iter().zip(&image.phi).enumerate() {
        let xp = ls_pow(x, p)?;
        if !xp.congruent(f, 1) {
            return Err(FrobError::Invariant(format!(
                "φ(x_{}) is not ξ(x_{})^p modulo p",
                i + 1,
                i + 1
            )));
        }
    }
    for (j, f) in spec.equations.iter().enumerate() {
        let v = mp_eval_series(&f.sigma(1).with_prec(n), &image.phi)?;
        if !v.is_zero() {
            return Err(FrobError::Invariant(format!(
                "f_{}^σ(φ(x)) is not zero modulo p^{}",
                j + 2,
                n
            )));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------
// global lift on plane curves

/// Dense storage of bivariate polynomials truncated at a polytope cost: x^i
/// y^j sits at exponent i + w j of a Laurent series, with w large enough
/// that products of kept monomials never alias.
struct CostGrid {
    w: i64,
    imax: Vec<i64>,
}

impl CostGrid {
    fn new(spec: &CurveSpec, cutoff: &BigRational) -> Result<CostGrid, FrobError> {
        let mut imax = Vec::new();
        for j in 0.. {
            let mut best: Option<i64> = None;
            for d in &spec.pb.dvecs {
                let room = cutoff - &d[1] * BigRational::from_integer(BigInt::from(j));
                if room < BigRational::zero() {
                    best = Some(-1);
                    break;
                }
                if d[0].is_zero() {
                    continue;
                }
                let i = (room / &d[0])
                    .floor()
                    .to_integer()
                    .to_i64()
                    .ok_or(FrobError::NotPlane)?;
                best = Some(best.map_or(i, |b| b.min(i)));
            }
            match best {
                None => return Err(FrobError::NotPlane),
                Some(i) if i < 0 => break,
                Some(i) => imax.push(i),
            }
            if j > 1 << 20 {
                return Err(FrobError::NotPlane);
            }
        }
        let xmax = imax.iter().copied().max().unwrap_or(0);
        Ok(CostGrid {
            w: 2 * xmax + 1,
            imax,
        })
    }

    fn keeps(&self, m: i64) -> bool {
        let (j, i) = (m.div_euclid(self.w), m.rem_euclid(self.w));
        (j as usize) < self.imax.len() && i <= self.imax[j as usize]
    }

    fn encode(&self, f: &MultiPoly, prec: u32) -> Result<LaurentSeries, FrobError> {
        let ctx = f.ctx();
        let mut acc = exact_zero(ctx, prec);
        let mut coeffs: Vec<(i64, ZqElement)> = Vec::new();
        for (e, c) in f.terms() {
            let m = e[0] as i64 + self.w * e[1] as i64;
            if self.keeps(m) {
                coeffs.push((m, c.truncate(prec)));
            }
        }
        if let (Some(lo), Some(hi)) = (
            coeffs.iter().map(|x| x.0).min(),
            coeffs.iter().map(|x| x.0).max(),
        ) {
            let mut dense = vec![ctx.zero(prec); (hi - lo + 1) as usize];
            for (m, c) in coeffs {
                dense[(m - lo) as usize] = c;
            }
            acc = LaurentSeries::new(ctx, lo, EXACT_HI, prec, &dense)?;
        }
        Ok(acc)
    }

    fn decode(&self, s: &LaurentSeries) -> MultiPoly {
        let mut f = MultiPoly::zero(s.ctx(), 2, s.prec());
        for (m, c) in s.terms() {
            f.add_term(
                vec![m.rem_euclid(self.w) as u32, m.div_euclid(self.w) as u32],
                c,
            );
        }
        f
    }

    fn mul(&self, a: &LaurentSeries, b: &LaurentSeries) -> Result<LaurentSeries, LaurentError> {
        Ok(ls_mul(a, b)?.filter_exponents(|m| self.keeps(m)))
    }
}

#[derive(Debug, Clone)]
pub struct GlobalLift {
    pub cutoff: BigRational,
    pub prec: u32,
    /// s in Z_q[x, y], monomials of cost at most the cutoff.
    pub s: MultiPoly,
    /// φ(x_i) - x_i^p = ψ(P_i) s.
    pub phi_minus_power: Vec<MultiPoly>,
    pub iterations: u32,
}

/// G(S) = f^σ(x^p + ψ(P_1) S, y^p + ψ(P_2) S) - f^p - f^p ψ(Δ) S as
/// polynomials in x, y per power of S.
fn global_system(spec: &CurveSpec, prec: u32) -> Result<Vec<MultiPoly>, FrobError> {
    if spec.nvars() != 2 {
        return Err(FrobError::NotPlane);
    }
    let ctx = &spec.ctx;
    let p = ctx.p() as u32;
    let args = frobenius_arguments(spec, prec);
    let f = spec.equations[0].with_prec(prec);
    let fp = f.pow(p).extend_vars(3);
    let s = MultiPoly::var(ctx, 3, 2, prec);
    let delta = mp_psi(&spec.delta[0][0][0].with_prec(prec)).extend_vars(3);
    let g = f
        .sigma(1)
        .compose(&args)?
        .sub(&fp)
        .sub(&fp.mul(&delta).mul(&s));
    let groups = group_by_s(&g, 2);
    let deg = groups.keys().map(|e| e[0]).max().unwrap_or(0) as usize;
    let mut out = vec![MultiPoly::zero(ctx, 2, prec); deg + 1];
    for (e, poly) in groups {
        out[e[0] as usize] = poly;
    }
    Ok(out)
}

/// Solves G(s) = 0 modulo p^n keeping monomials of cost at most
/// cutoff + 2(d+1)p; the extra band must vanish modulo p^n.
pub fn solve_global(
    spec: &CurveSpec,
    n: u32,
    cutoff: &BigRational,
) -> Result<GlobalLift, FrobError> {
    let ctx = &spec.ctx;
    let n = n.min(ctx.n_work());
    let p = ctx.p();
    let band = (&spec.d + BigRational::from_integer(1.into()))
        * BigRational::from_integer(BigInt::from(2 * p));
    let ext = cutoff + &band;
    let grid = CostGrid::new(spec, &ext)?;
    let gs: Vec<LaurentSeries> = global_system(spec, n)?
        .iter()
        .map(|g| grid.encode(g, n))
        .collect::<Result<_, _>>()?;
    let horner = |coeffs: &[LaurentSeries],
                  s: &LaurentSeries,
                  prec: u32|
     -> Result<LaurentSeries, LaurentError> {
        let s = s.with_prec(prec);
        let mut acc = exact_zero(ctx, prec);
        for c in coeffs.iter().rev() {
            acc = grid.mul(&acc, &s)?.add(&c.with_prec(prec))?;
        }
        Ok(acc)
    };
    let dgs: Vec<LaurentSeries> = gs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(m, g)| g.mul_int(m as i64))
        .collect();
    let cap = newton_cap(n);
    let mut s = exact_zero(ctx, n);
    let mut iterations = 0;
    let mut prev = 0;
    loop {
        let gv = horner(&gs, &s, n)?;
        let v = valuation_of(gv.min_valuation(), n);
        if v >= n {
            break;
        }
        if v <= prev || iterations >= cap {
            return Err(FrobError::NoConvergence {
                iterations,
                valuation: v,
            });
        }
        let c2 = (2 * v).min(n);
        let r = c2 - v;
        let hq = gv.with_prec(c2).div_p_pow(v)?;
        let jac = horner(&dgs, &s, r)?;
        let e = exact_one(ctx, r).sub(&jac)?;
        if !e.divisible_by_p_pow(1) {
            return Err(FrobError::Invariant(
                "G'(s) is not congruent to 1 modulo p".into(),
            ));
        }
        let mut acc = hq.clone();
        let mut term = hq;
        for _ in 1..r {
            term = grid.mul(&e, &term)?;
            acc = acc.add(&term)?;
        }
        s = s.sub(&acc.raise_by_p_pow(v))?.with_prec_unchecked(n);
        iterations += 1;
        prev = v;
    }
    let full = grid.decode(&s);
    let mut kept = MultiPoly::zero(ctx, 2, n);
    let mut worst: Option<u32> = None;
    for (e, c) in full.terms() {
        if &pb_cost(&spec.pb, e) <= cutoff {
            kept.add_term(e.clone(), c.clone());
        } else {
            let v = valuation_of(c.valuation(), n);
            worst = Some(worst.map_or(v, |w| w.min(v)));
        }
    }
    if let Some(valuation) = worst {
        return Err(FrobError::CutoffUnsound {
            cutoff: cutoff.to_string(),
            valuation,
        });
    }
    let phi_minus_power = spec
        .p_mat
        .iter()
        .map(|row| mp_psi(&row[0].with_prec(n)).mul(&kept))
        .collect();
    Ok(GlobalLift {
        cutoff: cutoff.clone(),
        prec: n,
        s: kept,
        phi_minus_power,
        iterations,
    })
}

/// The global lift at the cutoff making the tail bound reach p^n, widening
/// the cutoff by one band up to four times when the band check fails.
pub fn global_lift(spec: &CurveSpec, n: u32) -> Result<GlobalLift, FrobError> {
    let p = spec.ctx.p();
    let mut cutoff = global_lift_bound(&spec.d, p, &BigRational::from_integer(BigInt::from(n)));
    let band = (&spec.d + BigRational::from_integer(1.into()))
        * BigRational::from_integer(BigInt::from(2 * p));
    let mut last = None;
    for _ in 0..5 {
        match solve_global(spec, n, &cutoff) {
            Err(e @ FrobError::CutoffUnsound { .. }) => {
                last = Some(e);
                cutoff += &band;
            }
            other => return other,
        }
    }
    Err(last.expect("at least one attempt"))
}

/// ξ(s) at an end for a polynomial s in x, y: Σ_j (Σ_i s_ij ξ(x)^i) ξ(y)^j.
pub fn expand_global(s: &MultiPoly, xi: &[LaurentSeries]) -> Result<LaurentSeries, FrobError> {
    let ctx = s.ctx();
    let prec = s.prec().min(xi[0].prec()).min(xi[1].prec());
    let mut by_j: BTreeMap<u32, MultiPoly> = BTreeMap::new();
    for (e, c) in s.terms() {
        by_j.entry(e[1])
            .or_insert_with(|| MultiPoly::zero(ctx, 2, prec))
            .add_term(vec![e[0], 0], c.clone());
    }
    let y = xi[1].with_prec(prec);
    let mut ypow = exact_one(ctx, prec);
    let mut have = 0;
    let mut acc = exact_zero(ctx, prec);
    for (j, cj) in by_j {
        while have < j {
            ypow = ls_mul(&ypow, &y)?;
            have += 1;
        }
        let c = mp_eval_series(&cj, &[xi[0].with_prec(prec), exact_one(ctx, prec)])?;
        acc = acc.add(&ls_mul(&c, &ypow)?)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_elliptic_plane, build_hyperbola, build_hyperelliptic};
    use crate::padic::PrecisionContext;

    fn ints(ctx: &Ctx, v: &[i64]) -> Vec<ZqElement> {
        v.iter().map(|&c| ctx.int(c, ctx.n_work())).collect()
    }

    fn local(
        spec: &CurveSpec,
        n: u32,
        depth: i64,
    ) -> (LocalLiftProblem, LocalLift, FrobeniusImage) {
        let end = &spec.ends[0];
        let xi = end.expansions(depth, n).unwrap();
        let prob = build_local(spec, &end.label, &xi, n).unwrap();
        let lift = newton_solve_local(&prob, n).unwrap();
        let img = expand_frobenius(spec, &xi, &lift.s).unwrap();
        (prob, lift, img)
    }

    #[test]
    fn test_newton_cap() {
        assert_eq!(newton_cap(1), 2);
        assert_eq!(newton_cap(2), 3);
        assert_eq!(newton_cap(5), 5);
    }

    #[test]
    fn test_hyperelliptic_local_lift() {
        let c = PrecisionContext::new(5, 1, 4, None).unwrap();
        let spec = build_hyperelliptic(&ints(&c, &[1, 0, 0, 1]), false).unwrap();
        let (prob, lift, img) = local(&spec, 4, 60);
        assert!(lift.s[0].is_exact());
        assert!(lift.s[0].support_end() <= 1);
        check_local_lift(&spec, &prob, &lift, &img).unwrap();
        assert!(lift.iterations <= newton_cap(4));
    }

    #[test]
    fn test_hyperbola_local_matches_first_step() {
        let c = PrecisionContext::new(5, 1, 3, None).unwrap();
        let spec = build_hyperbola(&c).unwrap();
        let (prob, lift, img) = local(&spec, 3, 40);
        check_local_lift(&spec, &prob, &lift, &img).unwrap();
        // H(S) = A (1 + S/2)^2 - 1 with A = x^2p - y^2p
        let x = &prob.xi[0];
        let y = &prob.xi[1];
        let a = ls_pow(x, 5).unwrap().sub(&ls_pow(y, 5).unwrap()).unwrap();
        let a = ls_mul(
            &a,
            &ls_pow(x, 5).unwrap().add(&ls_pow(y, 5).unwrap()).unwrap(),
        )
        .unwrap();
        let h0 = prob.h[0].coeff(&[0]).unwrap();
        assert!(h0.congruent(&a.sub(&exact_one(&c, 3)).unwrap(), 3));
        // H(0) ≡ 0 mod p, so the first Newton step (1 - A)/A is already right mod p^2
        let s1 = ls_mul(&exact_one(&c, 3).sub(&a).unwrap(), &ls_inv(&a).unwrap()).unwrap();
        assert!(lift.s[0].congruent(&s1, 2));
    }

    #[test]
    fn test_global_matches_local() {
        let c = PrecisionContext::new(5, 1, 2, None).unwrap();
        for spec in [
            build_hyperbola(&c).unwrap(),
            build_elliptic_plane(&c).unwrap(),
        ] {
            let g = global_lift(&spec, 2).unwrap();
            for end in &spec.ends {
                let xi = end.expansions(400, 2).unwrap();
                let prob = build_local(&spec, &end.label, &xi, 2).unwrap();
                let lift = newton_solve_local(&prob, 2).unwrap();
                let e = expand_global(&g.s, &xi).unwrap();
                assert!(e.hi() > 0);
                assert!(e.congruent(&lift.s[0], 2), "end {}", end.label);
            }
        }
    }
}
