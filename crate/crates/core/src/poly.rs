//! Multivariate polynomials over Z_q and Newton-polytope cost functions.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::laurent::{LaurentError, LaurentSeries};
use crate::padic::{Ctx, PadicError, ZqElement};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("expected {expected} arguments, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("polytope vector {index} has the wrong length or a negative entry")]
    BadPolytope { index: usize },
    #[error("exponent {exponent:?} lies outside V_D for polytope vector {index}")]
    OutsidePolytope { index: usize, exponent: Vec<u32> },
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error(transparent)]
    Laurent(#[from] LaurentError),
}

/// Sparse polynomial: exponent vector to nonzero coefficient.
#[derive(Clone, PartialEq, Eq)]
pub struct MultiPoly {
    ctx: Ctx,
    nvars: usize,
    prec: u32,
    terms: BTreeMap<Vec<u32>, ZqElement>,
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display(&default_names(self.nvars)))
    }
}

pub fn default_names(n: usize) -> Vec<String> {
    match n {
        1 => vec!["x".into()],
        2 => vec!["x".into(), "y".into()],
        3 => vec!["x".into(), "y".into(), "z".into()],
        _ => (0..n).map(|i| format!("x{}", i + 1)).collect(),
    }
}

impl MultiPoly {
    pub fn zero(ctx: &Ctx, nvars: usize, prec: u32) -> MultiPoly {
        MultiPoly {
            ctx: ctx.clone(),
            nvars,
            prec: prec.min(ctx.n_work()),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: &ZqElement, nvars: usize) -> MultiPoly {
        let mut p = Self::zero(c.ctx(), nvars, c.prec());
        p.add_term(vec![0; nvars], c.clone());
        p
    }

    pub fn int(ctx: &Ctx, nvars: usize, c: i64, prec: u32) -> MultiPoly {
        Self::constant(&ctx.int(c, prec), nvars)
    }

    pub fn var(ctx: &Ctx, nvars: usize, i: usize, prec: u32) -> MultiPoly {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(&ctx.one(prec), e)
    }

    pub fn monomial(c: &ZqElement, exps: Vec<u32>) -> MultiPoly {
        let mut p = Self::zero(c.ctx(), exps.len(), c.prec());
        p.add_term(exps, c.clone());
        p
    }

    /// Univariate polynomial from integer coefficients, lowest degree first.
    pub fn univariate(ctx: &Ctx, coeffs: &[i64], prec: u32) -> MultiPoly {
        let mut p = Self::zero(ctx, 1, prec);
        for (i, &c) in coeffs.iter().enumerate() {
            p.add_term(vec![i as u32], ctx.int(c, prec));
        }
        p
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, ZqElement> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: &[u32]) -> ZqElement {
        self.terms
            .get(e)
            .cloned()
            .unwrap_or_else(|| self.ctx.zero(self.prec))
    }

    /// Adds c*x^e in place (the precision drops to c's if lower).
    pub fn add_term(&mut self, e: Vec<u32>, c: ZqElement) {
        assert_eq!(e.len(), self.nvars, "exponent length");
        if c.prec() < self.prec {
            self.set_prec(c.prec());
        }
        let c = c.truncate(self.prec);
        let sum = match self.terms.remove(&e) {
            Some(old) => old.add(&c).expect("same field"),
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(e, sum);
        }
    }

    fn set_prec(&mut self, n: u32) {
        self.prec = n;
        let terms = std::mem::take(&mut self.terms);
        for (e, c) in terms {
            let c = c.truncate(n);
            if !c.is_zero() {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn with_prec(&self, n: u32) -> MultiPoly {
        let mut p = self.clone();
        if n < p.prec {
            p.set_prec(n);
        }
        p
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|e| e[i]).max().unwrap_or(0)
    }

    pub fn add(&self, o: &MultiPoly) -> MultiPoly {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), c.clone());
        }
        if o.prec < r.prec {
            r.set_prec(o.prec);
        }
        r
    }

    pub fn neg(&self) -> MultiPoly {
        let mut r = self.clone();
        for c in r.terms.values_mut() {
            *c = c.neg();
        }
        r
    }

    pub fn sub(&self, o: &MultiPoly) -> MultiPoly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &MultiPoly) -> MultiPoly {
        let prec = self.prec.min(o.prec);
        let mut r = Self::zero(&self.ctx, self.nvars, prec);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                r.add_term(e, c1.mul(c2).expect("same field"));
            }
        }
        r
    }

    pub fn scale(&self, c: &ZqElement) -> MultiPoly {
        let mut r = Self::zero(&self.ctx, self.nvars, self.prec.min(c.prec()));
        for (e, x) in &self.terms {
            r.add_term(e.clone(), x.mul(c).expect("same field"));
        }
        r
    }

    pub fn pow(&self, k: u32) -> MultiPoly {
        let mut r = Self::int(&self.ctx, self.nvars, 1, self.prec);
        let mut b = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                r = r.mul(&b);
            }
            k >>= 1;
            if k > 0 {
                b = b.mul(&b);
            }
        }
        r
    }

    /// ∂/∂x_i.
    pub fn derivative(&self, i: usize) -> MultiPoly {
        let mut r = Self::zero(&self.ctx, self.nvars, self.prec);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            r.add_term(e2, c.mul_int(e[i] as i64));
        }
        r
    }

    /// Coefficientwise σ^k.
    pub fn sigma(&self, k: usize) -> MultiPoly {
        let mut r = Self::zero(&self.ctx, self.nvars, self.prec);
        for (e, c) in &self.terms {
            r.add_term(e.clone(), c.sigma(k));
        }
        r
    }

    /// Same polynomial in more variables (new variables appended).
    pub fn extend_vars(&self, n: usize) -> MultiPoly {
        let mut r = Self::zero(&self.ctx, n, self.prec);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2.resize(n, 0);
            r.add_term(e2, c.clone());
        }
        r
    }

    /// Substitutes polynomials for the variables.
    pub fn compose(&self, args: &[MultiPoly]) -> Result<MultiPoly, PolyError> {
        if args.len() != self.nvars {
            return Err(PolyError::Arity {
                expected: self.nvars,
                got: args.len(),
            });
        }
        let n = args.first().map(|a| a.nvars).unwrap_or(0);
        let one = Self::int(&self.ctx, n, 1, self.prec);
        eval_generic(
            self,
            args,
            one,
            |a, b| Ok(a.mul(b)),
            |a, b| Ok(a.add(b)),
            |a, c| Ok(a.scale(c)),
        )
    }

    pub fn eval(&self, args: &[ZqElement]) -> Result<ZqElement, PolyError> {
        if args.len() != self.nvars {
            return Err(PolyError::Arity {
                expected: self.nvars,
                got: args.len(),
            });
        }
        eval_generic(
            self,
            args,
            self.ctx.one(self.prec),
            |a, b| Ok(a.mul(b)?),
            |a, b| Ok(a.add(b)?),
            |a, c| Ok(a.mul(c)?),
        )
    }

    /// Univariate coefficients (lowest first) in variable 0; requires nvars = 1.
    pub fn univariate_coeffs(&self) -> Vec<ZqElement> {
        let d = self.degree_in(0) as usize;
        (0..=d).map(|i| self.coeff(&[i as u32])).collect()
    }

    pub fn display(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (k, (e, c)) in self.terms.iter().rev().enumerate() {
            if k > 0 {
                out.push_str(" + ");
            }
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &d)| d > 0)
                .map(|(i, &d)| {
                    if d == 1 {
                        names[i].clone()
                    } else {
                        format!("{}^{}", names[i], d)
                    }
                })
                .collect();
            let cs = c.to_string();
            if mono.is_empty() {
                out.push_str(&cs);
            } else if cs == "1" {
                out.push_str(&mono.join("*"));
            } else {
                out.push_str(&format!("{}*{}", cs, mono.join("*")));
            }
        }
        out
    }
}

/// Evaluation in any algebra given by closures; powers of each argument are
/// built once and shared across terms.
pub fn eval_generic<T: Clone, E>(
    f: &MultiPoly,
    args: &[T],
    one: T,
    mul: impl Fn(&T, &T) -> Result<T, E>,
    add: impl Fn(&T, &T) -> Result<T, E>,
    scale: impl Fn(&T, &ZqElement) -> Result<T, E>,
) -> Result<T, E> {
    let mut powers: Vec<Vec<T>> = Vec::with_capacity(args.len());
    for (i, a) in args.iter().enumerate() {
        let d = f.degree_in(i) as usize;
        let mut pw = vec![one.clone()];
        for k in 1..=d {
            let next = if k == 1 {
                a.clone()
            } else {
                mul(&pw[k - 1], a)?
            };
            pw.push(next);
        }
        powers.push(pw);
    }
    let mut acc: Option<T> = None;
    for (e, c) in &f.terms {
        let mut t: Option<T> = None;
        for (i, &d) in e.iter().enumerate() {
            if d == 0 {
                continue;
            }
            let pw = &powers[i][d as usize];
            t = Some(match t {
                None => pw.clone(),
                Some(x) => mul(&x, pw)?,
            });
        }
        let term = scale(&t.unwrap_or_else(|| one.clone()), c)?;
        acc = Some(match acc {
            None => term,
            Some(x) => add(&x, &term)?,
        });
    }
    match acc {
        Some(a) => Ok(a),
        None => scale(&one, &f.ctx.zero(f.prec)),
    }
}

/// ξ applied to a polynomial: substitution of Laurent series.
pub fn mp_eval_series(f: &MultiPoly, args: &[LaurentSeries]) -> Result<LaurentSeries, PolyError> {
    if args.len() != f.nvars {
        return Err(PolyError::Arity {
            expected: f.nvars,
            got: args.len(),
        });
    }
    let hi = args.iter().map(|a| a.hi()).max().unwrap_or(1).max(1);
    let prec = args
        .iter()
        .map(|a| a.prec())
        .min()
        .unwrap_or(f.prec)
        .min(f.prec);
    let one = LaurentSeries::one(&f.ctx, prec, hi);
    Ok(eval_generic(
        f,
        args,
        one,
        |a, b| a.mul(b),
        |a, b| a.add(b),
        |a, c| a.scale(c),
    )?)
}

/// Matrix of partial derivatives: entry (j, i) = ∂f_j/∂x_{vars[i]}.
pub fn mp_jacobian(fs: &[MultiPoly], vars: &[usize]) -> Vec<Vec<MultiPoly>> {
    fs.iter()
        .map(|f| vars.iter().map(|&i| f.derivative(i)).collect())
        .collect()
}

/// ψ: exponents times p, coefficients through σ.
pub fn mp_psi(f: &MultiPoly) -> MultiPoly {
    let p = f.ctx.p() as u32;
    let mut r = MultiPoly::zero(&f.ctx, f.nvars, f.prec);
    for (e, c) in &f.terms {
        r.add_term(e.iter().map(|&d| d * p).collect(), c.sigma(1));
    }
    r
}

/// Reduction rule from an equation: its leading monomial (largest in the
/// lexicographic order read from the last variable) with unit coefficient.
fn rule_of(f: &MultiPoly) -> Option<(Vec<u32>, MultiPoly)> {
    let (lead, c) = f
        .terms
        .iter()
        .max_by(|a, b| a.0.iter().rev().cmp(b.0.iter().rev()))?;
    let cinv = c.inv().ok()?;
    let mut tail = f.clone();
    tail.terms.remove(lead);
    // lead = -tail / c
    Some((lead.clone(), tail.scale(&cinv).neg()))
}

/// Remainder of `f` after rewriting with every equation whose leading
/// monomial has a unit coefficient; equal to `f` modulo the equations.
pub fn normal_form(f: &MultiPoly, eqs: &[MultiPoly]) -> MultiPoly {
    let rules: Vec<(Vec<u32>, MultiPoly)> = eqs
        .iter()
        .filter_map(|e| rule_of(&e.extend_vars(f.nvars)))
        .collect();
    // keyed by reversed exponents so the largest term in the rule order pops
    // first; rewriting only produces smaller terms, so each is visited once
    let rev = |e: &[u32]| e.iter().rev().copied().collect::<Vec<u32>>();
    let mut work: BTreeMap<Vec<u32>, ZqElement> =
        f.terms.iter().map(|(e, c)| (rev(e), c.clone())).collect();
    let mut out = MultiPoly::zero(&f.ctx, f.nvars, f.prec);
    while let Some((re, c)) = work.pop_last() {
        let e = rev(&re);
        let hit = rules
            .iter()
            .find(|(lead, _)| lead.iter().zip(&e).all(|(a, b)| a <= b));
        match hit {
            None => out.add_term(e, c),
            Some((lead, repl)) => {
                let rest: Vec<u32> = e.iter().zip(lead).map(|(a, b)| a - b).collect();
                for (e2, c2) in &repl.terms {
                    let ex: Vec<u32> = rest.iter().zip(e2).map(|(a, b)| a + b).collect();
                    let key = rev(&ex);
                    let v = c.mul(c2).expect("same field");
                    let sum = match work.remove(&key) {
                        Some(old) => old.add(&v).expect("same field"),
                        None => v,
                    };
                    if !sum.is_zero() {
                        work.insert(key, sum);
                    }
                }
            }
        }
    }
    out
}

/// Finite family of vectors D with D·v <= 1 on the defining exponents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolytopeBounds {
    pub dvecs: Vec<Vec<BigRational>>,
}

impl PolytopeBounds {
    pub fn new(dvecs: Vec<Vec<BigRational>>) -> Self {
        PolytopeBounds { dvecs }
    }

    /// From integer numerators over a common denominator per vector.
    pub fn from_fracs(vecs: &[(&[i64], i64)]) -> Self {
        PolytopeBounds {
            dvecs: vecs
                .iter()
                .map(|(nums, den)| {
                    nums.iter()
                        .map(|&n| BigRational::new(n.into(), (*den).into()))
                        .collect()
                })
                .collect(),
        }
    }

    /// Checks D >= 0, the length, and D·v <= 1 for every exponent v of `fs`.
    pub fn validate(&self, fs: &[MultiPoly]) -> Result<(), PolyError> {
        for (k, d) in self.dvecs.iter().enumerate() {
            for f in fs {
                if d.len() != f.nvars || d.iter().any(|x| x < &BigRational::zero()) {
                    return Err(PolyError::BadPolytope { index: k });
                }
                for e in f.terms.keys() {
                    if dot(d, e) > BigRational::one() {
                        return Err(PolyError::OutsidePolytope {
                            index: k,
                            exponent: e.clone(),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

fn dot(d: &[BigRational], e: &[u32]) -> BigRational {
    d.iter().zip(e).fold(BigRational::zero(), |acc, (x, &k)| {
        acc + x * BigRational::from_integer(BigInt::from(k))
    })
}

/// max over D of D·I: the smallest c with I in cΓ.
pub fn pb_cost(pb: &PolytopeBounds, e: &[u32]) -> BigRational {
    pb.dvecs
        .iter()
        .map(|d| dot(d, e))
        .max()
        .unwrap_or_else(BigRational::zero)
}
