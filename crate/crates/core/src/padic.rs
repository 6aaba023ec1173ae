//! Finite-precision arithmetic in Z_q = Z_p[g]/(m(g)), the unramified
//! extension of degree l, with its Frobenius automorphism.

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::fp;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PadicError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("field degree must be at least 1")]
    ZeroDegree,
    #[error("working precision must be positive")]
    ZeroPrecision,
    #[error("modulus must be monic of degree {0}")]
    BadModulus(usize),
    #[error("modulus is reducible modulo p")]
    ReducibleModulus,
    #[error("operands come from different precision contexts")]
    ContextMismatch,
    #[error("element is not a unit")]
    NonUnit,
    #[error("precision {requested} exceeds working precision {work}")]
    PrecisionTooHigh { requested: u32, work: u32 },
    #[error("element is not divisible by p^{0} at the available precision")]
    NotDivisible(u32),
}

pub type Ctx = Arc<PrecisionContext>;

/// Shared parameters of Z_q: the prime, the degree, the working precision,
/// the defining modulus and the precomputed image of the generator under σ.
pub struct PrecisionContext {
    p: u64,
    l: usize,
    n_work: u32,
    modulus: Vec<u64>,
    modulus_big: Vec<BigUint>,
    sigma_powers: Vec<Vec<BigUint>>,
    p_pows: Vec<BigUint>,
}

impl fmt::Debug for PrecisionContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PrecisionContext")
            .field("p", &self.p)
            .field("l", &self.l)
            .field("n_work", &self.n_work)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl PartialEq for PrecisionContext {
    fn eq(&self, o: &Self) -> bool {
        self.same_field(o)
    }
}

impl Eq for PrecisionContext {}

/// Valuation of an element known modulo p^prec.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    Exact(u32),
    /// The representative is zero: only `v >= prec` is known.
    AtLeast(u32),
}

impl Valuation {
    /// A sound lower bound.
    pub fn lower_bound(self) -> u32 {
        match self {
            Valuation::Exact(v) | Valuation::AtLeast(v) => v,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Exact(v) => write!(f, "{v}"),
            Valuation::AtLeast(v) => write!(f, ">= {v}"),
        }
    }
}

impl PrecisionContext {
    /// Builds a context. With `modulus = None` the smallest monic irreducible
    /// of degree `l` is used (ordered by the integer `sum c_i p^i`).
    /// A supplied modulus lists `l + 1` coefficients, lowest degree first.
    pub fn new(
        p: u64,
        l: usize,
        n_work: u32,
        modulus: Option<Vec<u64>>,
    ) -> Result<Ctx, PadicError> {
        if !fp::is_prime(p) {
            return Err(PadicError::NotPrime(p));
        }
        if l == 0 {
            return Err(PadicError::ZeroDegree);
        }
        if n_work == 0 {
            return Err(PadicError::ZeroPrecision);
        }
        let modulus = match modulus {
            Some(m) => {
                let m: Vec<u64> = m.iter().map(|c| c % p).collect();
                if m.len() != l + 1 || m[l] != 1 {
                    return Err(PadicError::BadModulus(l));
                }
                if !fp::is_irreducible(&m, p) {
                    return Err(PadicError::ReducibleModulus);
                }
                m
            }
            None => fp::smallest_irreducible(l, p),
        };
        let pb = BigUint::from(p);
        let mut p_pows = Vec::with_capacity(n_work as usize + 1);
        let mut acc = BigUint::one();
        for _ in 0..=n_work {
            p_pows.push(acc.clone());
            acc *= &pb;
        }
        let mut ctx = PrecisionContext {
            p,
            l,
            n_work,
            modulus_big: modulus.iter().map(|&c| BigUint::from(c)).collect(),
            modulus,
            sigma_powers: Vec::new(),
            p_pows,
        };
        let sigma_image = ctx.compute_sigma_image();
        let pk = ctx.p_pow(n_work);
        let mut powers = vec![ctx.one_raw()];
        for i in 1..l {
            let next = ctx.mul_raw(&powers[i - 1], &sigma_image, &pk);
            powers.push(next);
        }
        ctx.sigma_powers = powers;
        Ok(Arc::new(ctx))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn n_work(&self) -> u32 {
        self.n_work
    }

    /// q = p^l.
    pub fn q(&self) -> BigUint {
        BigUint::from(self.p).pow(self.l as u32)
    }

    /// Monic modulus, lowest degree first.
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn p_pow(&self, k: u32) -> BigUint {
        match self.p_pows.get(k as usize) {
            Some(v) => v.clone(),
            None => BigUint::from(self.p).pow(k),
        }
    }

    /// Same field: prime, degree and modulus agree.
    pub fn same_field(&self, other: &PrecisionContext) -> bool {
        self.p == other.p && self.l == other.l && self.modulus == other.modulus
    }

    /// Image of the generator under σ at working precision.
    pub fn sigma_image(self: &Arc<Self>) -> ZqElement {
        if self.l == 1 {
            // σ is the identity on Z_p
            return self.generator(self.n_work);
        }
        ZqElement {
            ctx: self.clone(),
            coeffs: self.sigma_powers[1].clone(),
            prec: self.n_work,
        }
    }

    fn one_raw(&self) -> Vec<BigUint> {
        let mut v = vec![BigUint::zero(); self.l];
        v[0] = BigUint::one();
        v
    }

    /// Reduces a coefficient vector of any length modulo the modulus and `pk`.
    pub(crate) fn reduce_raw(&self, mut v: Vec<BigUint>, pk: &BigUint) -> Vec<BigUint> {
        let l = self.l;
        for c in v.iter_mut() {
            if &*c >= pk {
                *c %= pk;
            }
        }
        if v.len() > l {
            for u in (l..v.len()).rev() {
                let c = std::mem::take(&mut v[u]);
                if c.is_zero() {
                    continue;
                }
                for k in 0..l {
                    let m = &self.modulus_big[k];
                    if m.is_zero() {
                        continue;
                    }
                    let idx = u - l + k;
                    let t = (&c * (pk - m)) % pk;
                    v[idx] += t;
                    if &v[idx] >= pk {
                        v[idx] -= pk;
                    }
                }
            }
            v.truncate(l);
        }
        v.resize(l, BigUint::zero());
        v
    }

    pub(crate) fn mul_raw(&self, a: &[BigUint], b: &[BigUint], pk: &BigUint) -> Vec<BigUint> {
        let l = self.l;
        if l == 1 {
            return vec![(&a[0] * &b[0]) % pk];
        }
        let mut prod = vec![BigUint::zero(); 2 * l - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                prod[i + j] += x * y;
            }
        }
        self.reduce_raw(prod, pk)
    }

    /// σ applied once to a raw coefficient vector.
    pub(crate) fn sigma_raw(&self, a: &[BigUint], pk: &BigUint) -> Vec<BigUint> {
        if self.l == 1 {
            return a.to_vec();
        }
        let mut out = vec![BigUint::zero(); self.l];
        for (i, c) in a.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (k, s) in self.sigma_powers[i].iter().enumerate() {
                out[k] += c * s;
            }
        }
        for c in out.iter_mut() {
            *c %= pk;
        }
        out
    }

    fn raw_mod_p(&self, a: &[BigUint]) -> Vec<u64> {
        let pb = BigUint::from(self.p);
        fp::trim(a.iter().map(|c| (c % &pb).to_u64().unwrap()).collect())
    }

    /// Inverse of a unit given as raw coefficients, at precision `prec`.
    pub(crate) fn inv_raw(&self, a: &[BigUint], prec: u32) -> Option<Vec<BigUint>> {
        let abar = self.raw_mod_p(a);
        if abar.is_empty() {
            return None;
        }
        let (g, s, _) = fp::xgcd(&abar, &self.modulus, self.p);
        if g != vec![1] {
            return None;
        }
        let mut x: Vec<BigUint> = (0..self.l)
            .map(|i| BigUint::from(s.get(i).copied().unwrap_or(0)))
            .collect();
        let mut cur = 1u32;
        while cur < prec {
            cur = (cur * 2).min(prec);
            let pk = self.p_pow(cur);
            let ax = self.mul_raw(a, &x, &pk);
            let mut two_minus: Vec<BigUint> = ax.iter().map(|c| (&pk - c) % &pk).collect();
            two_minus[0] = (&two_minus[0] + BigUint::from(2u32)) % &pk;
            x = self.mul_raw(&x, &two_minus, &pk);
        }
        let pk = self.p_pow(prec);
        Some(x.into_iter().map(|c| c % &pk).collect())
    }

    /// Newton lift of the root of m congruent to g^p modulo p.
    fn compute_sigma_image(&self) -> Vec<BigUint> {
        let l = self.l;
        let p1 = self.p_pow(1);
        let mut gen = vec![BigUint::zero(); l];
        if l == 1 {
            return vec![(&p1 - &self.modulus_big[0]) % &p1];
        }
        gen[1] = BigUint::one();
        // g^p mod (m, p)
        let mut r = self.one_raw();
        let mut base = gen;
        let mut e = self.p;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul_raw(&r, &base, &p1);
            }
            base = self.mul_raw(&base, &base, &p1);
            e >>= 1;
        }
        let mut cur = 1u32;
        while cur < self.n_work {
            cur = (cur * 2).min(self.n_work);
            let pk = self.p_pow(cur);
            // m(r) and m'(r) by Horner
            let mut mv = vec![BigUint::zero(); l];
            let mut dv = vec![BigUint::zero(); l];
            for k in (0..=l).rev() {
                dv = self.mul_raw(&dv, &r, &pk);
                dv = add_raw(&dv, &mv, &pk);
                mv = self.mul_raw(&mv, &r, &pk);
                mv[0] = (&mv[0] + &self.modulus_big[k]) % &pk;
            }
            let dinv = self.inv_raw(&dv, cur).expect("modulus is separable");
            let step = self.mul_raw(&mv, &dinv, &pk);
            r = sub_raw(&r, &step, &pk);
        }
        let pk = self.p_pow(self.n_work);
        r.into_iter().map(|c| c % &pk).collect()
    }

    fn check_prec(&self, prec: u32) -> u32 {
        prec.min(self.n_work)
    }

    pub fn zero(self: &Arc<Self>, prec: u32) -> ZqElement {
        let prec = self.check_prec(prec);
        ZqElement {
            ctx: self.clone(),
            coeffs: vec![BigUint::zero(); self.l],
            prec,
        }
    }

    pub fn one(self: &Arc<Self>, prec: u32) -> ZqElement {
        self.int(1, prec)
    }

    pub fn int(self: &Arc<Self>, v: i64, prec: u32) -> ZqElement {
        self.from_bigint(&BigInt::from(v), prec)
    }

    pub fn from_bigint(self: &Arc<Self>, v: &BigInt, prec: u32) -> ZqElement {
        self.elem(std::slice::from_ref(v), prec)
    }

    /// Element from integer coefficients of 1, g, g^2, ...; longer vectors are
    /// reduced by the modulus.
    pub fn elem(self: &Arc<Self>, coeffs: &[BigInt], prec: u32) -> ZqElement {
        let prec = self.check_prec(prec);
        let pk = self.p_pow(prec);
        let pki = BigInt::from(pk.clone());
        let raw: Vec<BigUint> = coeffs
            .iter()
            .map(|c| c.mod_floor(&pki).to_biguint().unwrap())
            .collect();
        let coeffs = self.reduce_raw(raw, &pk);
        ZqElement {
            ctx: self.clone(),
            coeffs,
            prec,
        }
    }

    pub(crate) fn from_raw(self: &Arc<Self>, coeffs: Vec<BigUint>, prec: u32) -> ZqElement {
        ZqElement {
            ctx: self.clone(),
            coeffs,
            prec,
        }
    }

    /// The class of g (for l = 1, the root of the linear modulus).
    pub fn generator(self: &Arc<Self>, prec: u32) -> ZqElement {
        if self.l == 1 {
            return self.elem(&[-BigInt::from(self.modulus[0])], prec);
        }
        let mut c = vec![BigInt::zero(); self.l];
        c[1] = BigInt::one();
        self.elem(&c, prec)
    }
}

fn add_raw(a: &[BigUint], b: &[BigUint], pk: &BigUint) -> Vec<BigUint> {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let s = x + y;
            if &s >= pk {
                s % pk
            } else {
                s
            }
        })
        .collect()
}

fn sub_raw(a: &[BigUint], b: &[BigUint], pk: &BigUint) -> Vec<BigUint> {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let x = x % pk;
            let y = y % pk;
            if x >= y {
                x - y
            } else {
                x + pk - y
            }
        })
        .collect()
}

/// An element of Z_q known modulo p^prec; coefficients of 1, g, ..., g^(l-1)
/// reduced into [0, p^prec).
#[derive(Clone)]
pub struct ZqElement {
    ctx: Ctx,
    coeffs: Vec<BigUint>,
    prec: u32,
}

impl fmt::Debug for ZqElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod p^{})", self, self.prec)
    }
}

impl PartialEq for ZqElement {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.same_field(&other.ctx) && self.prec == other.prec && self.coeffs == other.coeffs
    }
}

impl Eq for ZqElement {}

impl fmt::Display for ZqElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nz: Vec<(usize, &BigUint)> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .collect();
        match nz.as_slice() {
            [] => write!(f, "0"),
            [(0, c)] => write!(f, "{c}"),
            _ => {
                write!(f, "(")?;
                for (k, (i, c)) in nz.iter().enumerate() {
                    if k > 0 {
                        write!(f, "+")?;
                    }
                    match i {
                        0 => write!(f, "{c}")?,
                        1 => write!(f, "{c}*g")?,
                        _ => write!(f, "{c}*g^{i}")?,
                    }
                }
                write!(f, ")")
            }
        }
    }
}

fn same(a: &ZqElement, b: &ZqElement) -> Result<(), PadicError> {
    if Arc::ptr_eq(&a.ctx, &b.ctx) || a.ctx.same_field(&b.ctx) {
        Ok(())
    } else {
        Err(PadicError::ContextMismatch)
    }
}

pub fn zq_add(a: &ZqElement, b: &ZqElement) -> Result<ZqElement, PadicError> {
    same(a, b)?;
    let prec = a.prec.min(b.prec);
    let pk = a.ctx.p_pow(prec);
    let coeffs = a
        .coeffs
        .iter()
        .zip(&b.coeffs)
        .map(|(x, y)| (x + y) % &pk)
        .collect();
    Ok(ZqElement {
        ctx: a.ctx.clone(),
        coeffs,
        prec,
    })
}

pub fn zq_sub(a: &ZqElement, b: &ZqElement) -> Result<ZqElement, PadicError> {
    same(a, b)?;
    let prec = a.prec.min(b.prec);
    let pk = a.ctx.p_pow(prec);
    Ok(ZqElement {
        ctx: a.ctx.clone(),
        coeffs: sub_raw(&a.coeffs, &b.coeffs, &pk),
        prec,
    })
}

pub fn zq_neg(a: &ZqElement) -> ZqElement {
    let pk = a.ctx.p_pow(a.prec);
    let coeffs = a
        .coeffs
        .iter()
        .map(|c| {
            if c.is_zero() {
                BigUint::zero()
            } else {
                &pk - c
            }
        })
        .collect();
    ZqElement {
        ctx: a.ctx.clone(),
        coeffs,
        prec: a.prec,
    }
}

pub fn zq_mul(a: &ZqElement, b: &ZqElement) -> Result<ZqElement, PadicError> {
    same(a, b)?;
    let prec = a.prec.min(b.prec);
    let pk = a.ctx.p_pow(prec);
    Ok(ZqElement {
        ctx: a.ctx.clone(),
        coeffs: a.ctx.mul_raw(&a.coeffs, &b.coeffs, &pk),
        prec,
    })
}

pub fn zq_inv(a: &ZqElement) -> Result<ZqElement, PadicError> {
    let coeffs = a
        .ctx
        .inv_raw(&a.coeffs, a.prec)
        .ok_or(PadicError::NonUnit)?;
    Ok(ZqElement {
        ctx: a.ctx.clone(),
        coeffs,
        prec: a.prec,
    })
}

/// σ^k(a).
pub fn zq_sigma(a: &ZqElement, k: usize) -> ZqElement {
    let l = a.ctx.l;
    let pk = a.ctx.p_pow(a.prec);
    let mut c = a.coeffs.clone();
    for _ in 0..(k % l) {
        c = a.ctx.sigma_raw(&c, &pk);
    }
    ZqElement {
        ctx: a.ctx.clone(),
        coeffs: c,
        prec: a.prec,
    }
}

pub fn zq_valuation(a: &ZqElement) -> Valuation {
    let p = BigUint::from(a.ctx.p);
    let mut best: Option<u32> = None;
    for c in &a.coeffs {
        if c.is_zero() {
            continue;
        }
        let mut v = 0u32;
        let mut x = c.clone();
        loop {
            let (q, r) = x.div_rem(&p);
            if !r.is_zero() {
                break;
            }
            v += 1;
            x = q;
        }
        best = Some(best.map_or(v, |b: u32| b.min(v)));
    }
    match best {
        Some(v) if v < a.prec => Valuation::Exact(v),
        _ => Valuation::AtLeast(a.prec),
    }
}

impl ZqElement {
    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn coeffs(&self) -> &[BigUint] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_unit(&self) -> bool {
        matches!(self.valuation(), Valuation::Exact(0))
    }

    pub fn valuation(&self) -> Valuation {
        zq_valuation(self)
    }

    /// Reduction to precision `n` (no-op when `n >= prec`).
    pub fn truncate(&self, n: u32) -> ZqElement {
        if n >= self.prec {
            return self.clone();
        }
        let pk = self.ctx.p_pow(n);
        ZqElement {
            ctx: self.ctx.clone(),
            coeffs: self.coeffs.iter().map(|c| c % &pk).collect(),
            prec: n,
        }
    }

    pub fn add(&self, o: &ZqElement) -> Result<ZqElement, PadicError> {
        zq_add(self, o)
    }

    pub fn sub(&self, o: &ZqElement) -> Result<ZqElement, PadicError> {
        zq_sub(self, o)
    }

    pub fn mul(&self, o: &ZqElement) -> Result<ZqElement, PadicError> {
        zq_mul(self, o)
    }

    pub fn neg(&self) -> ZqElement {
        zq_neg(self)
    }

    pub fn inv(&self) -> Result<ZqElement, PadicError> {
        zq_inv(self)
    }

    pub fn sigma(&self, k: usize) -> ZqElement {
        zq_sigma(self, k)
    }

    pub fn mul_int(&self, c: i64) -> ZqElement {
        let pk = BigInt::from(self.ctx.p_pow(self.prec));
        let c = BigInt::from(c);
        let coeffs = self
            .coeffs
            .iter()
            .map(|x| {
                (BigInt::from(x.clone()) * &c)
                    .mod_floor(&pk)
                    .to_biguint()
                    .unwrap()
            })
            .collect();
        ZqElement {
            ctx: self.ctx.clone(),
            coeffs,
            prec: self.prec,
        }
    }

    /// Exact division by p^k; the result is known to precision `prec - k`.
    pub fn div_p_pow(&self, k: u32) -> Result<ZqElement, PadicError> {
        if k > self.prec {
            return Err(PadicError::NotDivisible(k));
        }
        let d = self.ctx.p_pow(k);
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            let (q, r) = c.div_rem(&d);
            if !r.is_zero() {
                return Err(PadicError::NotDivisible(k));
            }
            out.push(q);
        }
        Ok(ZqElement {
            ctx: self.ctx.clone(),
            coeffs: out,
            prec: self.prec - k,
        })
    }

    /// Multiplication by p^k, keeping the precision.
    pub fn mul_p_pow(&self, k: u32) -> ZqElement {
        let d = self.ctx.p_pow(k);
        let pk = self.ctx.p_pow(self.prec);
        ZqElement {
            ctx: self.ctx.clone(),
            coeffs: self.coeffs.iter().map(|c| (c * &d) % &pk).collect(),
            prec: self.prec,
        }
    }

    /// True when the element lies in Z_p, i.e. only the constant coefficient
    /// is nonzero.
    pub fn is_rational(&self) -> bool {
        self.coeffs.iter().skip(1).all(|c| c.is_zero())
    }

    /// Constant coefficient as a residue in [0, p^prec).
    pub fn constant_residue(&self) -> BigUint {
        self.coeffs[0].clone()
    }

    /// Coefficients as signed integers in the symmetric range.
    pub fn signed_coeffs(&self) -> Vec<BigInt> {
        let pk = BigInt::from(self.ctx.p_pow(self.prec));
        let half = &pk / 2;
        self.coeffs
            .iter()
            .map(|c| {
                let c = BigInt::from(c.clone());
                if c > half {
                    c - &pk
                } else {
                    c
                }
            })
            .collect()
    }
}

/// Signed view of a residue modulo m, used in formatting.
pub fn symmetric(c: &BigUint, m: &BigUint) -> BigInt {
    let c = BigInt::from_biguint(Sign::Plus, c.clone());
    let m = BigInt::from(m.clone());
    if &c * 2 > m {
        c - m
    } else {
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_two_times_63() {
        let ctx = PrecisionContext::new(5, 1, 3, None).unwrap();
        let r = zq_mul(&ctx.int(2, 3), &ctx.int(63, 3)).unwrap();
        assert_eq!(r, ctx.int(1, 3));
    }

    #[test]
    fn test_inverse_of_two() {
        let ctx = PrecisionContext::new(5, 1, 3, None).unwrap();
        assert_eq!(zq_inv(&ctx.int(2, 3)).unwrap(), ctx.int(63, 3));
        assert_eq!(zq_inv(&ctx.int(1, 3)).unwrap(), ctx.int(1, 3));
        assert_eq!(zq_inv(&ctx.int(10, 3)), Err(PadicError::NonUnit));
    }

    #[test]
    fn test_additive_inverse() {
        let ctx = PrecisionContext::new(5, 2, 4, None).unwrap();
        let a = ctx.elem(&[BigInt::from(17), BigInt::from(-3)], 4);
        assert!(zq_add(&a, &zq_neg(&a)).unwrap().is_zero());
    }

    #[test]
    fn test_generator_square_reduces() {
        // smallest irreducible of degree 2 over F_5 is g^2 + 2
        let ctx = PrecisionContext::new(5, 2, 3, None).unwrap();
        let g = ctx.generator(3);
        assert_eq!(zq_mul(&g, &g).unwrap(), ctx.int(-2, 3));
        let gi = zq_inv(&g).unwrap();
        assert_eq!(zq_mul(&g, &gi).unwrap(), ctx.one(3));
    }

    #[test]
    fn test_sigma_properties() {
        let ctx = PrecisionContext::new(5, 2, 6, None).unwrap();
        let g = ctx.generator(6);
        assert_eq!(zq_sigma(&g, 2), g);
        // σ(g) ≡ g^p mod p
        let mut gp = ctx.one(1);
        for _ in 0..5 {
            gp = zq_mul(&gp, &g.truncate(1)).unwrap();
        }
        assert_eq!(zq_sigma(&g, 1).truncate(1), gp);
        // the image is a root of the modulus
        let s = ctx.sigma_image();
        let m = ctx.modulus();
        let mut acc = ctx.zero(6);
        for k in (0..m.len()).rev() {
            acc = zq_add(&zq_mul(&acc, &s).unwrap(), &ctx.int(m[k] as i64, 6)).unwrap();
        }
        assert!(acc.is_zero());
        let c = PrecisionContext::new(5, 1, 3, None).unwrap();
        assert_eq!(zq_sigma(&c.int(7, 3), 1), c.int(7, 3));
    }

    #[test]
    fn test_valuations() {
        let ctx = PrecisionContext::new(5, 1, 6, None).unwrap();
        assert_eq!(zq_valuation(&ctx.int(50, 6)), Valuation::Exact(2));
        assert_eq!(zq_valuation(&ctx.int(3, 6)), Valuation::Exact(0));
        assert_eq!(zq_valuation(&ctx.int(0, 4)), Valuation::AtLeast(4));
        assert_eq!(format!("{}", zq_valuation(&ctx.int(0, 4))), ">= 4");
    }

    #[test]
    fn test_context_mismatch() {
        let a = PrecisionContext::new(5, 1, 3, None).unwrap();
        let b = PrecisionContext::new(7, 1, 3, None).unwrap();
        assert_eq!(
            zq_add(&a.int(1, 3), &b.int(1, 3)),
            Err(PadicError::ContextMismatch)
        );
    }

    #[test]
    fn test_bad_contexts() {
        assert_eq!(
            PrecisionContext::new(6, 1, 3, None).unwrap_err(),
            PadicError::NotPrime(6)
        );
        assert_eq!(
            PrecisionContext::new(5, 2, 3, Some(vec![1, 0, 1])).unwrap_err(),
            PadicError::ReducibleModulus
        );
    }
}
