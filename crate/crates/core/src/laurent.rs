//! Truncated Laurent series over Z_q.
//!
//! A series stores coefficients on `[lo, lo + count)`; coefficients in
//! `[lo + count, hi)` are zero, coefficients below `lo` are zero modulo
//! p^prec (the negative part is finite at any fixed precision) and
//! coefficients at `hi` and above are unknown. A window ending at or beyond
//! `EXACT_HI / 2` marks a Laurent polynomial known to every order.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::padic::{Ctx, PadicError, PrecisionContext, Valuation, ZqElement};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LaurentError {
    #[error("empty window [{lo}, {hi})")]
    EmptyWindow { lo: i64, hi: i64 },
    #[error("exponent {exponent} is outside the known window (< {hi})")]
    WindowMiss { exponent: i64, hi: i64 },
    #[error("series has no unit coefficient in its window")]
    NotInvertible,
    #[error("form has a nonzero residue")]
    NonzeroResidue,
    #[error("series must start with constant term 1 and p must be odd")]
    BadLeadingTerm,
    #[error("coefficient at t^{exponent} is not divisible by the integration denominator")]
    NonIntegral { exponent: i64 },
    #[error("division by exponents exhausts the precision")]
    PrecisionExhausted,
    #[error("term t^{exponent} is known to p^{available}, below the target p^{target}")]
    PlanViolation {
        exponent: i64,
        available: i64,
        target: u32,
    },
    #[error("residue sum is not integral")]
    NonIntegralResidue,
    #[error("operation needs a finite window but the series is exact")]
    Unbounded,
    #[error(transparent)]
    Padic(#[from] PadicError),
}

/// Window end used for series known exactly (Laurent polynomials).
pub const EXACT_HI: i64 = 1 << 40;

/// Valuation profile v(a_m) >= -alpha*m + beta.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundProfile {
    pub alpha: BigRational,
    pub beta: BigRational,
}

impl BoundProfile {
    pub fn new(alpha: BigRational, beta: BigRational) -> Self {
        BoundProfile { alpha, beta }
    }

    pub fn from_ints(an: i64, ad: i64, bn: i64, bd: i64) -> Self {
        BoundProfile {
            alpha: BigRational::new(an.into(), ad.into()),
            beta: BigRational::new(bn.into(), bd.into()),
        }
    }

    /// ⌈-alpha*m + beta⌉.
    pub fn bound_at(&self, m: i64) -> BigInt {
        (-&self.alpha * BigInt::from(m) + &self.beta)
            .ceil()
            .to_integer()
    }
}

impl fmt::Display for BoundProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.alpha, self.beta)
    }
}

#[derive(Clone)]
pub struct LaurentSeries {
    ctx: Ctx,
    lo: i64,
    hi: i64,
    prec: u32,
    data: Vec<BigUint>,
}

impl fmt::Debug for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [window {}..{}, p^{}]",
            self, self.lo, self.hi, self.prec
        )
    }
}

impl fmt::Display for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (m, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}*t^{m}")?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(t^{})", self.hi)
    }
}

impl PartialEq for LaurentSeries {
    fn eq(&self, o: &Self) -> bool {
        self.ctx.same_field(&o.ctx)
            && self.prec == o.prec
            && self.hi == o.hi
            && self.terms_raw().eq(o.terms_raw())
    }
}

impl Eq for LaurentSeries {}

fn is_zero_block(b: &[BigUint]) -> bool {
    b.iter().all(|c| c.is_zero())
}

/// Largest k with p^k dividing a nonzero integer in [a, b].
fn max_val_in_range(p: u64, a: i64, b: i64) -> u32 {
    if a > b {
        return 0;
    }
    let mut k = 0u32;
    let mut pk: i128 = 1;
    loop {
        let next = pk * p as i128;
        // any nonzero multiple of next in [a, b]?
        let lo = (a as i128).div_euclid(next) * next;
        let mut found = false;
        let mut c = lo;
        while c <= b as i128 {
            if c >= a as i128 && c != 0 {
                found = true;
                break;
            }
            c += next;
            if c > b as i128 {
                break;
            }
        }
        if !found {
            return k;
        }
        k += 1;
        pk = next;
    }
}

pub(crate) fn vp_i64(p: u64, mut n: i64) -> u32 {
    debug_assert!(n != 0);
    let mut v = 0;
    while n % p as i64 == 0 {
        n /= p as i64;
        v += 1;
    }
    v
}

/// Inverse of the integer `u` (prime to p) modulo `pk`.
fn int_inv_mod(u: i64, pk: &BigUint) -> BigUint {
    let m = BigInt::from(pk.clone());
    let e = BigInt::from(u).extended_gcd(&m);
    e.x.mod_floor(&m).to_biguint().unwrap()
}

// ---------------------------------------------------------------------
// multiplication kernel

fn pack(words: &mut [u64], pos: usize, v: &BigUint) {
    let mut pos = pos;
    for d in v.iter_u64_digits() {
        let (w, sh) = (pos / 64, pos % 64);
        words[w] |= d << sh;
        if sh > 0 {
            words[w + 1] |= d >> (64 - sh);
        }
        pos += 64;
    }
}

fn extract(words: &[u64], start: usize, bits: usize) -> BigUint {
    let nw = bits.div_ceil(64);
    let (w0, sh) = (start / 64, start % 64);
    let mut out = Vec::with_capacity(2 * nw);
    for k in 0..nw {
        let lo = words.get(w0 + k).copied().unwrap_or(0);
        let hi = words.get(w0 + k + 1).copied().unwrap_or(0);
        let mut v = if sh == 0 {
            lo
        } else {
            (lo >> sh) | (hi << (64 - sh))
        };
        let rem = bits - k * 64;
        if rem < 64 {
            v &= (1u64 << rem) - 1;
        }
        out.push(v as u32);
        out.push((v >> 32) as u32);
    }
    BigUint::new(out)
}

fn to_biguint(words: Vec<u64>) -> BigUint {
    let mut d = Vec::with_capacity(words.len() * 2);
    for w in words {
        d.push(w as u32);
        d.push((w >> 32) as u32);
    }
    BigUint::new(d)
}

/// Product of coefficient blocks (l residues per exponent), first `out_len`
/// exponents, reduced modulo `pk` and the modulus.
pub(crate) fn kmul(
    ctx: &PrecisionContext,
    a: &[BigUint],
    b: &[BigUint],
    out_len: usize,
    pk: &BigUint,
) -> Vec<BigUint> {
    let l = ctx.l();
    let ca = (a.len() / l).min(out_len);
    let cb = (b.len() / l).min(out_len);
    let mut out = vec![BigUint::zero(); out_len * l];
    if ca == 0 || cb == 0 {
        return out;
    }
    let full = (ca + cb - 1).min(out_len);
    if ca.min(cb) <= 3 {
        let mut acc: Vec<Vec<BigUint>> = vec![vec![BigUint::zero(); 2 * l - 1]; full];
        for i in 0..ca {
            let ai = &a[i * l..(i + 1) * l];
            if is_zero_block(ai) {
                continue;
            }
            for j in 0..cb.min(full.saturating_sub(i)) {
                let bj = &b[j * l..(j + 1) * l];
                for (u, x) in ai.iter().enumerate() {
                    if x.is_zero() {
                        continue;
                    }
                    for (v, y) in bj.iter().enumerate() {
                        if !y.is_zero() {
                            acc[i + j][u + v] += x * y;
                        }
                    }
                }
            }
        }
        for (k, v) in acc.into_iter().enumerate() {
            let r = ctx.reduce_raw(v, pk);
            out[k * l..(k + 1) * l].clone_from_slice(&r);
        }
        return out;
    }
    let stride = 2 * l - 1;
    let terms = (ca.min(cb) * l) as u64;
    let bits = (2 * pk.bits() + (64 - terms.leading_zeros()) as u64 + 1) as usize;
    let pack_all = |src: &[BigUint], cnt: usize| {
        let mut words = vec![0u64; (cnt * stride * bits) / 64 + 3];
        for i in 0..cnt {
            for u in 0..l {
                let v = &src[i * l + u];
                if !v.is_zero() {
                    pack(&mut words, (i * stride + u) * bits, v);
                }
            }
        }
        to_biguint(words)
    };
    let pa = pack_all(a, ca);
    let pb = pack_all(b, cb);
    let prod = pa * pb;
    let words = prod.to_u64_digits();
    drop(prod);
    for k in 0..full {
        if l == 1 {
            let c = extract(&words, k * bits, bits);
            out[k] = if &c >= pk { c % pk } else { c };
        } else {
            let v: Vec<BigUint> = (0..stride)
                .map(|w| extract(&words, (k * stride + w) * bits, bits))
                .collect();
            let r = ctx.reduce_raw(v, pk);
            out[k * l..(k + 1) * l].clone_from_slice(&r);
        }
    }
    out
}

/// Inverse of a power series with unit constant term, first `n` coefficients.
fn ps_inv_raw(
    ctx: &PrecisionContext,
    u: &[BigUint],
    n: usize,
    prec: u32,
) -> Result<Vec<BigUint>, LaurentError> {
    let l = ctx.l();
    let pk = ctx.p_pow(prec);
    let c0 = ctx
        .inv_raw(&u[0..l], prec)
        .ok_or(LaurentError::NotInvertible)?;
    let mut x = c0;
    let mut len = 1usize;
    while len < n {
        let len2 = (2 * len).min(n);
        let ulen = (u.len() / l).min(len2);
        let ux = kmul(ctx, &u[..ulen * l], &x, len2, &pk);
        // e = 1 - u*x, which vanishes below t^len
        let mut e: Vec<BigUint> = ux[len * l..]
            .iter()
            .map(|c| {
                if c.is_zero() {
                    BigUint::zero()
                } else {
                    &pk - c
                }
            })
            .collect();
        let corr_len = len2 - len;
        e.truncate(corr_len * l);
        let xe = kmul(ctx, &x, &e, corr_len, &pk);
        x.resize(len2 * l, BigUint::zero());
        for (i, c) in xe.into_iter().enumerate() {
            x[len * l + i] = c;
        }
        len = len2;
    }
    Ok(x)
}

impl LaurentSeries {
    pub(crate) fn from_raw(
        ctx: &Ctx,
        lo: i64,
        hi: i64,
        prec: u32,
        data: Vec<BigUint>,
    ) -> LaurentSeries {
        let mut s = LaurentSeries {
            ctx: ctx.clone(),
            lo,
            hi,
            prec,
            data,
        };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        let l = self.ctx.l();
        let max_count = (self.hi - self.lo).max(0) as usize;
        if self.data.len() > max_count * l {
            self.data.truncate(max_count * l);
        }
        let count = self.data.len() / l;
        let first = (0..count).find(|&i| !is_zero_block(&self.data[i * l..(i + 1) * l]));
        match first {
            None => {
                self.data.clear();
                self.lo = self.hi - 1;
            }
            Some(f) => {
                if f > 0 {
                    self.data.drain(..f * l);
                    self.lo += f as i64;
                }
                let count = self.data.len() / l;
                let last = (0..count)
                    .rev()
                    .find(|&i| !is_zero_block(&self.data[i * l..(i + 1) * l]))
                    .unwrap();
                self.data.truncate((last + 1) * l);
            }
        }
    }

    /// Series with coefficients `coeffs` starting at t^lo, known below t^hi.
    pub fn new(
        ctx: &Ctx,
        lo: i64,
        hi: i64,
        prec: u32,
        coeffs: &[ZqElement],
    ) -> Result<LaurentSeries, LaurentError> {
        if hi <= lo {
            return Err(LaurentError::EmptyWindow { lo, hi });
        }
        let prec = prec.min(ctx.n_work());
        let l = ctx.l();
        let n = coeffs.len().min((hi - lo) as usize);
        let mut data = Vec::with_capacity(n * l);
        for c in &coeffs[..n] {
            if !c.ctx().same_field(ctx) {
                return Err(PadicError::ContextMismatch.into());
            }
            if c.prec() < prec {
                return Err(LaurentError::PlanViolation {
                    exponent: lo,
                    available: c.prec() as i64,
                    target: prec,
                });
            }
            data.extend(c.truncate(prec).coeffs().iter().cloned());
        }
        Ok(Self::from_raw(ctx, lo, hi, prec, data))
    }

    pub fn from_ints(
        ctx: &Ctx,
        lo: i64,
        coeffs: &[i64],
        hi: i64,
        prec: u32,
    ) -> Result<LaurentSeries, LaurentError> {
        let c: Vec<ZqElement> = coeffs.iter().map(|&c| ctx.int(c, prec)).collect();
        Self::new(ctx, lo, hi, prec, &c)
    }

    pub fn zero(ctx: &Ctx, prec: u32, hi: i64) -> LaurentSeries {
        Self::from_raw(ctx, hi - 1, hi, prec.min(ctx.n_work()), Vec::new())
    }

    pub fn constant(c: &ZqElement, hi: i64) -> LaurentSeries {
        Self::monomial(c, 0, hi)
    }

    pub fn one(ctx: &Ctx, prec: u32, hi: i64) -> LaurentSeries {
        Self::constant(&ctx.one(prec), hi)
    }

    /// c*t^m, known below t^hi (requires hi > m for a nonzero result).
    pub fn monomial(c: &ZqElement, m: i64, hi: i64) -> LaurentSeries {
        if hi <= m {
            return Self::zero(c.ctx(), c.prec(), hi);
        }
        Self::from_raw(c.ctx(), m, hi, c.prec(), c.coeffs().to_vec())
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    /// Lowest stored exponent; everything below is zero.
    pub fn lo(&self) -> i64 {
        self.lo
    }

    /// Exclusive upper end of the known window.
    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// Known to every order (a Laurent polynomial).
    pub fn is_exact(&self) -> bool {
        self.hi >= EXACT_HI / 2
    }

    /// The same Laurent polynomial, declared exact.
    pub fn exact(&self) -> LaurentSeries {
        let mut s = self.clone();
        s.hi = EXACT_HI;
        s
    }

    fn count(&self) -> usize {
        self.data.len() / self.ctx.l()
    }

    pub fn is_zero(&self) -> bool {
        self.data.is_empty()
    }

    /// Lowest exponent with a nonzero coefficient.
    pub fn leading_exponent(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.lo)
        }
    }

    /// Exponent just past the last nonzero coefficient.
    pub fn support_end(&self) -> i64 {
        self.lo + self.count() as i64
    }

    pub(crate) fn raw_at(&self, m: i64) -> Option<&[BigUint]> {
        let l = self.ctx.l();
        if m < self.lo || m >= self.support_end() {
            return None;
        }
        let i = (m - self.lo) as usize;
        Some(&self.data[i * l..(i + 1) * l])
    }

    pub fn coeff(&self, m: i64) -> Result<ZqElement, LaurentError> {
        if m >= self.hi {
            return Err(LaurentError::WindowMiss {
                exponent: m,
                hi: self.hi,
            });
        }
        Ok(match self.raw_at(m) {
            Some(r) => self.ctx.from_raw(r.to_vec(), self.prec),
            None => self.ctx.zero(self.prec),
        })
    }

    fn terms_raw(&self) -> impl Iterator<Item = (i64, &[BigUint])> + '_ {
        let l = self.ctx.l();
        self.data
            .chunks(l)
            .enumerate()
            .filter(|(_, c)| !is_zero_block(c))
            .map(move |(i, c)| (self.lo + i as i64, c))
    }

    /// Nonzero terms in increasing exponent order.
    pub fn terms(&self) -> Vec<(i64, ZqElement)> {
        self.terms_raw()
            .map(|(m, c)| (m, self.ctx.from_raw(c.to_vec(), self.prec)))
            .collect()
    }

    fn check(&self, o: &LaurentSeries) -> Result<(), LaurentError> {
        if self.ctx.same_field(&o.ctx) {
            Ok(())
        } else {
            Err(PadicError::ContextMismatch.into())
        }
    }

    fn combine(&self, o: &LaurentSeries, sub: bool) -> Result<LaurentSeries, LaurentError> {
        self.check(o)?;
        let l = self.ctx.l();
        let prec = self.prec.min(o.prec);
        let pk = self.ctx.p_pow(prec);
        let hi = self.hi.min(o.hi);
        let lo = self.lo.min(o.lo).min(hi - 1);
        let end = [self, o]
            .iter()
            .filter(|s| !s.is_zero())
            .map(|s| s.support_end())
            .max()
            .unwrap_or(lo)
            .min(hi)
            .max(lo);
        let n = (end - lo) as usize;
        let mut data = vec![BigUint::zero(); n * l];
        for (m, c) in self.terms_raw() {
            if m >= hi {
                break;
            }
            let i = (m - lo) as usize;
            for u in 0..l {
                data[i * l + u] = &c[u] % &pk;
            }
        }
        for (m, c) in o.terms_raw() {
            if m >= hi {
                break;
            }
            let i = (m - lo) as usize;
            for u in 0..l {
                let y = &c[u] % &pk;
                let x = &mut data[i * l + u];
                if sub {
                    if *x >= y {
                        *x -= y;
                    } else {
                        *x += &pk;
                        *x -= y;
                    }
                } else {
                    *x += y;
                    if *x >= pk {
                        *x -= &pk;
                    }
                }
            }
        }
        Ok(Self::from_raw(&self.ctx, lo, hi, prec, data))
    }

    pub fn add(&self, o: &LaurentSeries) -> Result<LaurentSeries, LaurentError> {
        self.combine(o, false)
    }

    pub fn sub(&self, o: &LaurentSeries) -> Result<LaurentSeries, LaurentError> {
        self.combine(o, true)
    }

    pub fn neg(&self) -> LaurentSeries {
        let pk = self.ctx.p_pow(self.prec);
        let data = self
            .data
            .iter()
            .map(|c| {
                if c.is_zero() {
                    BigUint::zero()
                } else {
                    &pk - c
                }
            })
            .collect();
        Self::from_raw(&self.ctx, self.lo, self.hi, self.prec, data)
    }

    pub fn mul(&self, o: &LaurentSeries) -> Result<LaurentSeries, LaurentError> {
        ls_mul(self, o)
    }

    /// Multiplication by a constant.
    pub fn scale(&self, c: &ZqElement) -> Result<LaurentSeries, LaurentError> {
        if !c.ctx().same_field(&self.ctx) {
            return Err(PadicError::ContextMismatch.into());
        }
        let l = self.ctx.l();
        let prec = self.prec.min(c.prec());
        let pk = self.ctx.p_pow(prec);
        let mut data = Vec::with_capacity(self.data.len());
        for blk in self.data.chunks(l) {
            if is_zero_block(blk) {
                data.extend(std::iter::repeat_n(BigUint::zero(), l));
            } else {
                data.extend(self.ctx.mul_raw(blk, c.coeffs(), &pk));
            }
        }
        Ok(Self::from_raw(&self.ctx, self.lo, self.hi, prec, data))
    }

    pub fn mul_int(&self, c: i64) -> LaurentSeries {
        let pk = BigInt::from(self.ctx.p_pow(self.prec));
        let c = BigInt::from(c);
        let data = self
            .data
            .iter()
            .map(|x| {
                (BigInt::from(x.clone()) * &c)
                    .mod_floor(&pk)
                    .to_biguint()
                    .unwrap()
            })
            .collect();
        Self::from_raw(&self.ctx, self.lo, self.hi, self.prec, data)
    }

    /// Multiplication by t^k.
    pub fn shift(&self, k: i64) -> LaurentSeries {
        LaurentSeries {
            ctx: self.ctx.clone(),
            lo: self.lo + k,
            hi: self.hi + k,
            prec: self.prec,
            data: self.data.clone(),
        }
    }

    /// Forget coefficients at t^h and above.
    pub fn truncate_hi(&self, h: i64) -> LaurentSeries {
        if h >= self.hi {
            return self.clone();
        }
        let l = self.ctx.l();
        let keep = (h - self.lo).max(0) as usize;
        let mut data = self.data.clone();
        data.truncate(keep * l);
        Self::from_raw(&self.ctx, self.lo.min(h - 1), h, self.prec, data)
    }

    /// Reduction to precision `n` (no-op when `n >= prec`).
    pub fn with_prec(&self, n: u32) -> LaurentSeries {
        if n >= self.prec {
            return self.clone();
        }
        let pk = self.ctx.p_pow(n);
        let data = self.data.iter().map(|c| c % &pk).collect();
        Self::from_raw(&self.ctx, self.lo, self.hi, n, data)
    }

    /// The same representatives read at a higher nominal precision; used
    /// when the caller takes them as the next approximation.
    pub(crate) fn with_prec_unchecked(&self, n: u32) -> LaurentSeries {
        let mut s = self.clone();
        s.prec = n.min(self.ctx.n_work());
        s
    }

    /// Declare the window larger; only valid when the caller knows the
    /// series is exact there (e.g. polynomials).
    pub(crate) fn with_hi_unchecked(&self, hi: i64) -> LaurentSeries {
        let mut s = self.clone();
        if hi > s.hi {
            s.hi = hi;
        }
        s
    }

    /// Keeps only the coefficients whose exponent passes `keep`.
    pub(crate) fn filter_exponents(&self, keep: impl Fn(i64) -> bool) -> LaurentSeries {
        let l = self.ctx.l();
        let mut data = self.data.clone();
        for (i, blk) in data.chunks_mut(l).enumerate() {
            if !keep(self.lo + i as i64) {
                blk.iter_mut().for_each(|c| *c = BigUint::zero());
            }
        }
        Self::from_raw(&self.ctx, self.lo, self.hi, self.prec, data)
    }

    /// Coefficientwise σ^k.
    pub fn sigma(&self, k: usize) -> LaurentSeries {
        if self.ctx.l() == 1 || k % self.ctx.l() == 0 {
            return self.clone();
        }
        let l = self.ctx.l();
        let pk = self.ctx.p_pow(self.prec);
        let mut data = Vec::with_capacity(self.data.len());
        for blk in self.data.chunks(l) {
            let mut c = blk.to_vec();
            for _ in 0..k % l {
                c = self.ctx.sigma_raw(&c, &pk);
            }
            data.extend(c);
        }
        Self::from_raw(&self.ctx, self.lo, self.hi, self.prec, data)
    }

    pub fn derivative(&self) -> LaurentSeries {
        ls_derivative(self)
    }

    /// Minimum valuation over the stored coefficients.
    pub fn min_valuation(&self) -> Valuation {
        let mut best = Valuation::AtLeast(self.prec);
        for (_, c) in self.terms() {
            if let Valuation::Exact(v) = c.valuation() {
                best = match best {
                    Valuation::Exact(b) => Valuation::Exact(b.min(v)),
                    Valuation::AtLeast(_) => Valuation::Exact(v),
                };
            }
        }
        best
    }

    /// Every coefficient divisible by p^k.
    pub fn divisible_by_p_pow(&self, k: u32) -> bool {
        let d = self.ctx.p_pow(k);
        self.data.iter().all(|c| (c % &d).is_zero())
    }

    /// Exact division by p^k; precision drops by k.
    pub fn div_p_pow(&self, k: u32) -> Result<LaurentSeries, LaurentError> {
        if k > self.prec || !self.divisible_by_p_pow(k) {
            return Err(PadicError::NotDivisible(k).into());
        }
        let d = self.ctx.p_pow(k);
        let data = self.data.iter().map(|c| c / &d).collect();
        Ok(Self::from_raw(
            &self.ctx,
            self.lo,
            self.hi,
            self.prec - k,
            data,
        ))
    }

    /// Multiplication by p^k; precision rises by k (capped at the working precision).
    pub fn raise_by_p_pow(&self, k: u32) -> LaurentSeries {
        let prec = (self.prec + k).min(self.ctx.n_work());
        let pk = self.ctx.p_pow(prec);
        let m = self.ctx.p_pow(k);
        let data = self.data.iter().map(|c| (c * &m) % &pk).collect();
        Self::from_raw(&self.ctx, self.lo, self.hi, prec, data)
    }

    /// Agreement with `o` modulo p^n on the common window.
    pub fn congruent(&self, o: &LaurentSeries, n: u32) -> bool {
        let h = self.hi.min(o.hi);
        let n = n.min(self.prec).min(o.prec);
        match self
            .truncate_hi(h)
            .with_prec(n)
            .sub(&o.truncate_hi(h).with_prec(n))
        {
            Ok(d) => d.is_zero(),
            Err(_) => false,
        }
    }
}

/// Product; the window ends where either operand's unknown part could enter.
pub fn ls_mul(a: &LaurentSeries, b: &LaurentSeries) -> Result<LaurentSeries, LaurentError> {
    a.check(b)?;
    let prec = a.prec.min(b.prec);
    let lo = a.lo + b.lo;
    let hi = (a.lo + b.hi).min(b.lo + a.hi);
    if hi <= lo {
        return Err(LaurentError::EmptyWindow { lo, hi });
    }
    let pk = a.ctx.p_pow(prec);
    let out_len = ((hi - lo) as usize).min((a.count() + b.count()).saturating_sub(1));
    let data = kmul(&a.ctx, &a.data, &b.data, out_len, &pk);
    Ok(LaurentSeries::from_raw(&a.ctx, lo, hi, prec, data))
}

/// Inverse: with d the first exponent carrying a unit, a = t^d (U + E) with U
/// a power series with unit constant term and E p-small with negative
/// exponents; then a^-1 = t^-d U^-1 Σ_k (-E U^-1)^k.
pub fn ls_inv(a: &LaurentSeries) -> Result<LaurentSeries, LaurentError> {
    let ctx = &a.ctx;
    let l = ctx.l();
    let prec = a.prec;
    let d = (0..a.count())
        .find(|&i| {
            let blk = &a.data[i * l..(i + 1) * l];
            ctx.inv_raw(blk, 1).is_some()
        })
        .ok_or(LaurentError::NotInvertible)?;
    let dexp = a.lo + d as i64;
    let uinv = if a.count() == d + 1 {
        // U is a constant: its inverse is exact
        let c = ctx
            .inv_raw(&a.data[d * l..], prec)
            .ok_or(LaurentError::NotInvertible)?;
        LaurentSeries::from_raw(ctx, 0, a.hi - dexp, prec, c)
    } else {
        if a.is_exact() {
            return Err(LaurentError::Unbounded);
        }
        let n = (a.hi - dexp) as usize;
        LaurentSeries::from_raw(
            ctx,
            0,
            n as i64,
            prec,
            ps_inv_raw(ctx, &a.data[d * l..], n, prec)?,
        )
    };
    let n = a.hi - dexp;
    if d == 0 {
        return Ok(uinv.shift(-dexp));
    }
    let e = LaurentSeries::from_raw(ctx, a.lo - dexp, n, prec, a.data[..d * l].to_vec());
    let x = ls_mul(&e, &uinv)?.neg();
    // Σ_{k < 2^J} X^k = Π_j (1 + X^(2^j)), X ≡ 0 mod p
    let mut sum = LaurentSeries::one(ctx, prec, x.hi).add(&x)?;
    let mut xp = x;
    let mut reach = 2u32;
    while reach < prec {
        xp = ls_mul(&xp, &xp)?;
        if xp.is_zero() {
            break;
        }
        let one = LaurentSeries::one(ctx, prec, xp.hi);
        sum = ls_mul(&sum, &one.add(&xp)?)?;
        reach = reach.saturating_mul(2);
    }
    Ok(ls_mul(&uinv, &sum)?.shift(-dexp))
}

/// Square root with constant term 1 by Newton's iteration s <- (s + a/s)/2.
pub fn ls_sqrt(a: &LaurentSeries) -> Result<LaurentSeries, LaurentError> {
    let ctx = &a.ctx;
    let l = ctx.l();
    if ctx.p() == 2 || a.lo != 0 || a.hi <= 0 {
        return Err(LaurentError::BadLeadingTerm);
    }
    if a.is_exact() {
        return Err(LaurentError::Unbounded);
    }
    let c0 = a.raw_at(0).ok_or(LaurentError::BadLeadingTerm)?;
    if !(c0[0].is_one() && c0[1..].iter().all(|c| c.is_zero())) {
        return Err(LaurentError::BadLeadingTerm);
    }
    let prec = a.prec;
    let pk = ctx.p_pow(prec);
    let half = ctx
        .inv_raw(
            &{
                let mut v = vec![BigUint::zero(); l];
                v[0] = BigUint::from(2u32);
                v
            },
            prec,
        )
        .ok_or(LaurentError::BadLeadingTerm)?;
    let n = a.hi as usize;
    let mut s = vec![BigUint::zero(); l];
    s[0] = BigUint::one();
    let mut len = 1usize;
    while len < n {
        let len2 = (2 * len).min(n);
        let sinv = ps_inv_raw(ctx, &s, len2, prec)?;
        let alen = a.count().min(len2);
        let q = kmul(ctx, &a.data[..alen * l], &sinv, len2, &pk);
        s.resize(len2 * l, BigUint::zero());
        let mut next = Vec::with_capacity(len2 * l);
        for k in 0..len2 {
            let blk: Vec<BigUint> = (0..l)
                .map(|u| (&s[k * l + u] + &q[k * l + u]) % &pk)
                .collect();
            next.extend(ctx.mul_raw(&blk, &half, &pk));
        }
        s = next;
        len = len2;
    }
    Ok(LaurentSeries::from_raw(ctx, 0, a.hi, prec, s))
}

pub fn ls_derivative(a: &LaurentSeries) -> LaurentSeries {
    let l = a.ctx.l();
    let pk = BigInt::from(a.ctx.p_pow(a.prec));
    let mut data = Vec::with_capacity(a.data.len());
    for (i, blk) in a.data.chunks(l).enumerate() {
        let m = BigInt::from(a.lo + i as i64);
        for c in blk {
            data.push(
                (BigInt::from(c.clone()) * &m)
                    .mod_floor(&pk)
                    .to_biguint()
                    .unwrap(),
            );
        }
    }
    LaurentSeries::from_raw(&a.ctx, a.lo - 1, a.hi - 1, a.prec, data)
}

/// Antiderivative with zero constant term. The uniform precision of the
/// result is the smallest per-term precision prec - v(m+1) over the window.
pub fn ls_integrate(w: &LaurentSeries) -> Result<LaurentSeries, LaurentError> {
    let ctx = &w.ctx;
    let l = ctx.l();
    let p = ctx.p();
    if let Some(r) = w.raw_at(-1) {
        if !is_zero_block(r) {
            return Err(LaurentError::NonzeroResidue);
        }
    }
    let kmax = max_val_in_range(p, w.lo + 1, w.hi);
    if kmax >= w.prec {
        return Err(LaurentError::PrecisionExhausted);
    }
    let out_prec = w.prec - kmax;
    let pk = ctx.p_pow(out_prec);
    let mut data = Vec::with_capacity(w.data.len());
    for (i, blk) in w.data.chunks(l).enumerate() {
        let m = w.lo + i as i64;
        if m == -1 || is_zero_block(blk) {
            data.extend(std::iter::repeat_n(BigUint::zero(), l));
            continue;
        }
        let k = vp_i64(p, m + 1);
        let u = (m + 1) / (p as i64).pow(k);
        let d = ctx.p_pow(k);
        let uinv = int_inv_mod(u, &pk);
        for c in blk {
            let (q, r) = c.div_rem(&d);
            if !r.is_zero() {
                return Err(LaurentError::NonIntegral { exponent: m });
            }
            data.push((q * &uinv) % &pk);
        }
    }
    Ok(LaurentSeries::from_raw(
        ctx,
        w.lo + 1,
        w.hi + 1,
        out_prec,
        data,
    ))
}

/// Coefficient of t^-1.
pub fn ls_residue(w: &LaurentSeries) -> Result<ZqElement, LaurentError> {
    w.coeff(-1)
}

/// Σ' a_m b_{-m-2}/(m+1) over every m that can contribute, with a from `e`
/// and b from `w`; this is Res(w ∫e). The leading stored coefficients are
/// taken to be the true orders; see `ls_res_pair_bounded` otherwise.
pub fn ls_res_pair(w: &LaurentSeries, e: &LaurentSeries) -> Result<ZqElement, LaurentError> {
    ls_res_pair_bounded(w, w.lo, e, e.lo)
}

/// Res(w ∫e) given lower bounds on the true orders of w and e. Terms below
/// the stored windows vanish only modulo p^prec, and can still reach the
/// residue through a division by m + 1, so the window runs from the bounds.
pub fn ls_res_pair_bounded(
    w: &LaurentSeries,
    w_lo: i64,
    e: &LaurentSeries,
    e_lo: i64,
) -> Result<ZqElement, LaurentError> {
    let m_minus = e_lo.min(e.lo);
    let m_plus = -w_lo.min(w.lo) - 2;
    if m_plus < m_minus {
        return Ok(w.ctx.zero(w.prec.min(e.prec)));
    }
    let kmax = max_val_in_range(w.ctx.p(), m_minus + 1, m_plus + 1);
    let avail = w.prec.min(e.prec) as i64 - kmax as i64;
    if avail <= 0 {
        return Err(LaurentError::PrecisionExhausted);
    }
    ls_res_pair_range(w, e, m_minus, m_plus, avail as u32)
}

/// The pairing sum restricted to m in [m_minus, m_plus], at precision
/// `target`. Individual terms may carry denominators; the sum is formed
/// over p^-K with K the largest v(m+1) and must be integral.
pub fn ls_res_pair_range(
    w: &LaurentSeries,
    e: &LaurentSeries,
    m_minus: i64,
    m_plus: i64,
    target: u32,
) -> Result<ZqElement, LaurentError> {
    w.check(e)?;
    let ctx = &w.ctx;
    let l = ctx.l();
    let p = ctx.p();
    let base = w.prec.min(e.prec);
    if m_plus >= e.hi {
        return Err(LaurentError::WindowMiss {
            exponent: m_plus,
            hi: e.hi,
        });
    }
    if -m_minus - 2 >= w.hi {
        return Err(LaurentError::WindowMiss {
            exponent: -m_minus - 2,
            hi: w.hi,
        });
    }
    let kmax = max_val_in_range(p, m_minus + 1, m_plus + 1);
    for m in m_minus..=m_plus {
        if m == -1 {
            continue;
        }
        let avail = base as i64 - vp_i64(p, m + 1) as i64;
        if avail < target as i64 {
            return Err(LaurentError::PlanViolation {
                exponent: m,
                available: avail,
                target,
            });
        }
    }
    let big = ctx.p_pow(base);
    let mut acc = vec![BigUint::zero(); l];
    let lo = m_minus.max(e.lo);
    let hi = m_plus.min(-w.lo - 2);
    for m in lo..=hi {
        if m == -1 {
            continue;
        }
        let (Some(a), Some(b)) = (e.raw_at(m), w.raw_at(-m - 2)) else {
            continue;
        };
        let prod = ctx.mul_raw(a, b, &big);
        if is_zero_block(&prod) {
            continue;
        }
        let k = vp_i64(p, m + 1);
        let u = (m + 1) / (p as i64).pow(k);
        let scale = int_inv_mod(u, &big) * ctx.p_pow(kmax - k);
        for (x, y) in acc.iter_mut().zip(prod) {
            *x = (&*x + y * &scale) % &big;
        }
    }
    let sum = ctx.from_raw(acc, base);
    let q = sum
        .div_p_pow(kmax)
        .map_err(|_| LaurentError::NonIntegralResidue)?;
    Ok(q.truncate(target))
}

/// Whether every stored coefficient obeys v(a_m) >= ⌈-alpha*m + beta⌉,
/// capped at the precision (a coefficient is only known modulo p^prec).
pub fn ls_profile_check(s: &LaurentSeries, pb: &BoundProfile) -> bool {
    profile_violation(s, pb).is_none()
}

/// First exponent violating the profile, if any.
pub fn profile_violation(s: &LaurentSeries, pb: &BoundProfile) -> Option<i64> {
    let prec = BigInt::from(s.prec);
    for (m, c) in s.terms() {
        let bound = pb.bound_at(m);
        if !bound.is_positive() {
            continue;
        }
        let need = if bound > prec {
            s.prec
        } else {
            bound.to_u32().unwrap()
        };
        if c.valuation().lower_bound() < need {
            return Some(m);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PrecisionContext;

    fn ctx5() -> Ctx {
        PrecisionContext::new(5, 1, 3, None).unwrap()
    }

    #[test]
    fn test_mul_small() {
        let c = ctx5();
        let a = LaurentSeries::from_ints(&c, -1, &[1, 1], 20, 3).unwrap();
        let b = LaurentSeries::from_ints(&c, 0, &[-1, 1], 20, 3).unwrap();
        let p = ls_mul(&a, &b).unwrap();
        let want = LaurentSeries::from_ints(&c, -1, &[-1, 0, 1], 19, 3).unwrap();
        assert_eq!(p, want);
    }

    #[test]
    fn test_mul_kronecker_matches_schoolbook() {
        let c = PrecisionContext::new(7, 2, 5, None).unwrap();
        let mk = |seed: i64, n: usize| {
            let v: Vec<ZqElement> = (0..n)
                .map(|i| {
                    c.elem(
                        &[
                            BigInt::from(seed * 31 + i as i64 * 17),
                            BigInt::from(i as i64 * seed - 3),
                        ],
                        5,
                    )
                })
                .collect();
            LaurentSeries::new(&c, -3, 40, 5, &v).unwrap()
        };
        let a = mk(3, 30);
        let b = mk(5, 25);
        let p = ls_mul(&a, &b).unwrap();
        for m in p.lo()..p.hi() {
            let mut acc = c.zero(5);
            for i in a.lo()..a.hi() {
                let j = m - i;
                if j < b.lo() || j >= b.hi() {
                    continue;
                }
                acc = acc
                    .add(&a.coeff(i).unwrap().mul(&b.coeff(j).unwrap()).unwrap())
                    .unwrap();
            }
            assert_eq!(p.coeff(m).unwrap(), acc, "m = {m}");
        }
    }

    #[test]
    fn test_inverse_geometric() {
        let c = ctx5();
        let a = LaurentSeries::from_ints(&c, 0, &[1, -1], 10, 3).unwrap();
        let i = ls_inv(&a).unwrap();
        assert_eq!(i, LaurentSeries::from_ints(&c, 0, &[1; 10], 10, 3).unwrap());
        let t2 = LaurentSeries::from_ints(&c, 2, &[1], 10, 3).unwrap();
        assert_eq!(ls_inv(&t2).unwrap().terms(), vec![(-2, c.one(3))]);
        let two = LaurentSeries::from_ints(&c, -1, &[2], 10, 3).unwrap();
        assert_eq!(ls_inv(&two).unwrap().terms(), vec![(1, c.int(63, 3))]);
    }

    #[test]
    fn test_inverse_with_small_tail() {
        let c = ctx5();
        // 5 t^-3 + 1 + t
        let a = LaurentSeries::from_ints(&c, -3, &[5, 0, 0, 1, 1], 60, 3).unwrap();
        let i = ls_inv(&a).unwrap();
        let prod = ls_mul(&a, &i).unwrap();
        let one = LaurentSeries::one(&c, 3, prod.hi());
        assert!(prod.congruent(&one, 3), "{prod:?}");
        assert!(prod.hi() > 20);
    }

    #[test]
    fn test_not_invertible() {
        let c = ctx5();
        let a = LaurentSeries::from_ints(&c, 0, &[5, 10], 10, 3).unwrap();
        assert_eq!(ls_inv(&a).unwrap_err(), LaurentError::NotInvertible);
    }

    #[test]
    fn test_sqrt_running_example() {
        let c = PrecisionContext::new(5, 1, 4, None).unwrap();
        let a = LaurentSeries::from_ints(&c, 0, &[1, 0, -1], 10, 4).unwrap();
        let s = ls_sqrt(&a).unwrap();
        let half = c.int(2, 4).inv().unwrap();
        let eighth = c.int(8, 4).inv().unwrap();
        let sixteenth = c.int(16, 4).inv().unwrap();
        assert_eq!(s.coeff(0).unwrap(), c.one(4));
        assert_eq!(s.coeff(2).unwrap(), half.neg());
        assert_eq!(s.coeff(4).unwrap(), eighth.neg());
        assert_eq!(s.coeff(6).unwrap(), sixteenth.neg());
        assert!(ls_mul(&s, &s).unwrap().congruent(&a, 4));
        let one = LaurentSeries::one(&c, 4, 10);
        assert_eq!(ls_sqrt(&one).unwrap(), one);
        let bad = LaurentSeries::from_ints(&c, 0, &[2, 1], 10, 4).unwrap();
        assert_eq!(ls_sqrt(&bad).unwrap_err(), LaurentError::BadLeadingTerm);
    }

    #[test]
    fn test_integrate_power_rule() {
        let c = ctx5();
        let w = LaurentSeries::from_ints(&c, -3, &[1], 10, 3).unwrap();
        let i = ls_integrate(&w).unwrap();
        assert_eq!(i.coeff(-2).unwrap(), c.int(-2, i.prec()).inv().unwrap());
        let w = LaurentSeries::from_ints(&c, 1, &[1], 3, 3).unwrap();
        let i = ls_integrate(&w).unwrap();
        assert_eq!(i.coeff(2).unwrap(), c.int(2, 3).inv().unwrap());
        let w = LaurentSeries::from_ints(&c, -1, &[1], 3, 3).unwrap();
        assert_eq!(ls_integrate(&w).unwrap_err(), LaurentError::NonzeroResidue);
    }

    #[test]
    fn test_residue() {
        let c = ctx5();
        let w = LaurentSeries::from_ints(&c, -2, &[3, 5, 7], 10, 3).unwrap();
        assert_eq!(ls_residue(&w).unwrap(), c.int(5, 3));
        let w = LaurentSeries::from_ints(&c, -1, &[1], 10, 3).unwrap();
        assert_eq!(ls_residue(&w).unwrap(), c.one(3));
        let g = LaurentSeries::from_ints(&c, -4, &[1, 2, 3, 4, 5, 6], 10, 3).unwrap();
        assert!(ls_residue(&g.derivative()).unwrap().is_zero());
        let w = LaurentSeries::from_ints(&c, -5, &[1], -2, 3).unwrap();
        assert!(matches!(
            ls_residue(&w),
            Err(LaurentError::WindowMiss { .. })
        ));
    }

    #[test]
    fn test_res_pair_examples() {
        let c = ctx5();
        let w = LaurentSeries::from_ints(&c, -3, &[1], 10, 3).unwrap();
        let e = LaurentSeries::from_ints(&c, 1, &[1], 10, 3).unwrap();
        assert_eq!(ls_res_pair(&w, &e).unwrap(), c.int(2, 3).inv().unwrap());
        let e2 = LaurentSeries::from_ints(&c, 2, &[1], 10, 3).unwrap();
        assert!(ls_res_pair(&w, &e2).unwrap().is_zero());
    }

    #[test]
    fn test_profile_check() {
        let c = ctx5();
        let pb = BoundProfile::from_ints(1, 8, 0, 1);
        let s = LaurentSeries::from_ints(&c, -8, &[5], 10, 3).unwrap();
        assert!(ls_profile_check(&s, &pb));
        let s = LaurentSeries::from_ints(&c, -8, &[1], 10, 3).unwrap();
        assert!(!ls_profile_check(&s, &pb));
        let vac = BoundProfile::from_ints(1, 8, -1000, 1);
        assert!(ls_profile_check(&s, &vac));
    }

    #[test]
    fn test_max_val_in_range() {
        assert_eq!(max_val_in_range(5, 1, 4), 0);
        assert_eq!(max_val_in_range(5, -30, 4), 2);
        assert_eq!(max_val_in_range(5, 0, 0), 0);
        assert_eq!(max_val_in_range(5, 124, 126), 3);
    }
}
