//! Curve data: equations, the lift data P and Δ, basis forms, ends with
//! their local expansions, and the built-in families.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::laurent::{ls_inv, ls_sqrt, LaurentError, LaurentSeries, EXACT_HI};
use crate::padic::{Ctx, PadicError, ZqElement};
use crate::pairing::{DifferentialForm, FormTerm};
use crate::poly::{
    default_names, mp_eval_series, mp_jacobian, pb_cost, MultiPoly, PolyError, PolytopeBounds,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("Q is not squarefree modulo p")]
    NotSquarefree,
    #[error("Q must have odd degree, got {0}")]
    EvenDegree(u32),
    #[error("p = 2 is not supported")]
    EvenCharacteristic,
    #[error("missing section [{0}]")]
    NamedSection(String),
    #[error("expansions at end {label} violate equation {equation} at t^{exponent}")]
    EndInconsistent {
        label: String,
        equation: usize,
        exponent: i64,
    },
    #[error("Jac_f P differs from Id + Σ f_j Δ^j modulo p at entry ({row}, {col})")]
    CongruenceFails { row: usize, col: usize },
    #[error("basis has {got} forms, expected {expected}")]
    BasisSize { got: usize, expected: usize },
    #[error("malformed curve data: {0}")]
    Shape(String),
    #[error(
        "expansion of variable {var} at end {label} is known below t^{hi}, t^{needed} is needed"
    )]
    InsufficientExpansion {
        label: String,
        var: usize,
        hi: i64,
        needed: i64,
    },
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error(transparent)]
    Laurent(#[from] LaurentError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// How ξ(x_i) is obtained at an end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VarExpansion {
    /// A Laurent polynomial known to every order.
    Exact(LaurentSeries),
    /// An explicit truncated series.
    Fixed(LaurentSeries),
    /// sign * t^-shift * sqrt(t^(2 shift) radicand), the radicand evaluated
    /// at the earlier variables.
    Sqrt {
        radicand: MultiPoly,
        shift: i64,
        sign: i64,
    },
    /// 1/den, den evaluated at the earlier variables.
    Reciprocal { den: MultiPoly },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndData {
    pub label: String,
    pub vars: Vec<VarExpansion>,
}

impl EndData {
    /// Whether every expansion can be regenerated to any depth.
    pub fn regenerable(&self) -> bool {
        !self
            .vars
            .iter()
            .any(|v| matches!(v, VarExpansion::Fixed(_)))
    }

    /// ξ(x_i) at precision `prec`; generated series are known at least below t^depth.
    pub fn expansions(&self, depth: i64, prec: u32) -> Result<Vec<LaurentSeries>, ModelError> {
        let mut out: Vec<LaurentSeries> = Vec::with_capacity(self.vars.len());
        for v in &self.vars {
            let s = match v {
                VarExpansion::Exact(s) => s.with_prec(prec).exact(),
                VarExpansion::Fixed(s) => s.with_prec(prec),
                VarExpansion::Sqrt {
                    radicand,
                    shift,
                    sign,
                } => {
                    let r = eval_prefix(radicand, &out, prec)?.shift(2 * shift);
                    let r = if r.is_exact() {
                        r.truncate_hi(depth + shift)
                    } else {
                        r
                    };
                    let root = ls_sqrt(&r)?.shift(-shift);
                    if *sign < 0 {
                        root.neg()
                    } else {
                        root
                    }
                }
                VarExpansion::Reciprocal { den } => {
                    let d = eval_prefix(den, &out, prec)?;
                    let d = if d.is_exact() {
                        d.truncate_hi(depth)
                    } else {
                        d
                    };
                    ls_inv(&d)?
                }
            };
            out.push(s);
        }
        Ok(out)
    }
}

/// Evaluates a polynomial in all variables using only the ones computed so far.
fn eval_prefix(
    f: &MultiPoly,
    known: &[LaurentSeries],
    prec: u32,
) -> Result<LaurentSeries, ModelError> {
    let n = f.nvars();
    for i in known.len()..n {
        if f.degree_in(i) > 0 {
            return Err(ModelError::Shape(format!(
                "expansion refers to variable {} before it is defined",
                i + 1
            )));
        }
    }
    let ctx = f.ctx();
    let mut args: Vec<LaurentSeries> = known.to_vec();
    while args.len() < n {
        args.push(LaurentSeries::zero(ctx, prec, EXACT_HI));
    }
    Ok(mp_eval_series(&f.with_prec(prec), &args)?)
}

/// Which point-count oracle applies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Family {
    /// y^2 = Q(x) with deg Q odd; the model may be localized.
    Hyperelliptic { q: MultiPoly, localized: bool },
    /// Smooth projective closure of the plane curve f(x, y) = 0.
    Plane,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecOptions {
    pub margin: u32,
    pub depth_guard: i64,
}

impl Default for SpecOptions {
    fn default() -> Self {
        SpecOptions {
            margin: 0,
            depth_guard: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveSpec {
    pub ctx: Ctx,
    pub names: Vec<String>,
    /// f_2, ..., f_n.
    pub equations: Vec<MultiPoly>,
    /// n rows, n - 1 columns.
    pub p_mat: Vec<Vec<MultiPoly>>,
    /// Δ^2, ..., Δ^n, each (n-1) x (n-1).
    pub delta: Vec<Vec<Vec<MultiPoly>>>,
    pub genus: u32,
    pub basis: Vec<DifferentialForm>,
    pub ends: Vec<EndData>,
    pub pb: PolytopeBounds,
    pub d: BigRational,
    pub family: Family,
    pub options: SpecOptions,
}

impl CurveSpec {
    pub fn nvars(&self) -> usize {
        self.names.len()
    }

    /// Shape checks, the congruence, the basis size and the polytope.
    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.nvars();
        if n < 2 || self.equations.len() != n - 1 {
            return Err(ModelError::Shape(format!(
                "{} variables need {} equations",
                n,
                n.saturating_sub(1)
            )));
        }
        if self.p_mat.len() != n || self.p_mat.iter().any(|r| r.len() != n - 1) {
            return Err(ModelError::Shape("P must be n x (n-1)".into()));
        }
        if self.delta.len() != n - 1
            || self
                .delta
                .iter()
                .any(|m| m.len() != n - 1 || m.iter().any(|r| r.len() != n - 1))
        {
            return Err(ModelError::NamedSection("delta".into()));
        }
        if self.basis.len() != 2 * self.genus as usize {
            return Err(ModelError::BasisSize {
                got: self.basis.len(),
                expected: 2 * self.genus as usize,
            });
        }
        if let Err((row, col)) = verify_congruence(self) {
            return Err(ModelError::CongruenceFails { row, col });
        }
        self.pb.validate(&self.equations)?;
        for e in &self.ends {
            if e.vars.len() != n {
                return Err(ModelError::Shape(format!(
                    "end {} lists {} expansions",
                    e.label,
                    e.vars.len()
                )));
            }
        }
        Ok(())
    }

    /// Every defining equation vanishes on the expansions of every end below
    /// t^depth, modulo p^prec.
    pub fn check_ends(&self, depth: i64, prec: u32) -> Result<(), ModelError> {
        for e in &self.ends {
            let xi = e.expansions(depth, prec)?;
            for (j, f) in self.equations.iter().enumerate() {
                let v = mp_eval_series(&f.with_prec(prec), &xi)?;
                if let Some((m, _)) = v.terms().first() {
                    return Err(ModelError::EndInconsistent {
                        label: e.label.clone(),
                        equation: j + 2,
                        exponent: *m,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Jac_f P ≡ Id + Σ_j f_j Δ^j modulo p; on failure the first bad entry.
pub fn verify_congruence(spec: &CurveSpec) -> Result<(), (usize, usize)> {
    let n = spec.nvars();
    let vars: Vec<usize> = (0..n).collect();
    let jac = mp_jacobian(&spec.equations, &vars);
    let ctx = &spec.ctx;
    for r in 0..n - 1 {
        for c in 0..n - 1 {
            let mut lhs = MultiPoly::zero(ctx, n, 1);
            for (k, row) in spec.p_mat.iter().enumerate() {
                lhs = lhs.add(&jac[r][k].mul(&row[c]));
            }
            if r == c {
                lhs = lhs.sub(&MultiPoly::int(ctx, n, 1, 1));
            }
            for (j, dm) in spec.delta.iter().enumerate() {
                lhs = lhs.sub(&spec.equations[j].mul(&dm[r][c]));
            }
            if !lhs.with_prec(1).is_zero() {
                return Err((r + 1, c + 1));
            }
        }
    }
    Ok(())
}

/// Largest polytope cost among the monomials of P and the Δ^j.
pub fn pdelta_scale(
    pb: &PolytopeBounds,
    p_mat: &[Vec<MultiPoly>],
    delta: &[Vec<Vec<MultiPoly>>],
) -> BigRational {
    let mut d = BigRational::zero();
    let entries = p_mat
        .iter()
        .flatten()
        .chain(delta.iter().flatten().flatten());
    for f in entries {
        for e in f.terms().keys() {
            let c = pb_cost(pb, e);
            if c > d {
                d = c;
            }
        }
    }
    d
}

// ---------------------------------------------------------------------
// univariate algebra over F_q (elements at precision 1)

fn fq_trim(mut a: Vec<ZqElement>) -> Vec<ZqElement> {
    while a.last().is_some_and(|c| c.is_zero()) {
        a.pop();
    }
    a
}

fn fq_sub(a: &[ZqElement], b: &[ZqElement], ctx: &Ctx) -> Vec<ZqElement> {
    let n = a.len().max(b.len());
    let z = ctx.zero(1);
    fq_trim(
        (0..n)
            .map(|i| a.get(i).unwrap_or(&z).sub(b.get(i).unwrap_or(&z)).unwrap())
            .collect(),
    )
}

fn fq_mul(a: &[ZqElement], b: &[ZqElement], ctx: &Ctx) -> Vec<ZqElement> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut r = vec![ctx.zero(1); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            r[i + j] = r[i + j].add(&x.mul(y).unwrap()).unwrap();
        }
    }
    fq_trim(r)
}

fn fq_divrem(a: &[ZqElement], b: &[ZqElement], ctx: &Ctx) -> (Vec<ZqElement>, Vec<ZqElement>) {
    let db = b.len() - 1;
    let inv = b[db].inv().expect("nonzero leading coefficient");
    let mut r = fq_trim(a.to_vec());
    if r.len() <= db {
        return (Vec::new(), r);
    }
    let mut q = vec![ctx.zero(1); r.len() - db];
    while r.len() > db {
        let dr = r.len() - 1;
        let c = r[dr].mul(&inv).unwrap();
        for (j, bj) in b.iter().enumerate() {
            r[dr - db + j] = r[dr - db + j].sub(&c.mul(bj).unwrap()).unwrap();
        }
        q[dr - db] = c;
        r = fq_trim(r);
    }
    (fq_trim(q), r)
}

/// s, t with s a + t b = 1 over F_q, or `None` when gcd(a, b) != 1.
fn fq_bezout(
    a: &[ZqElement],
    b: &[ZqElement],
    ctx: &Ctx,
) -> Option<(Vec<ZqElement>, Vec<ZqElement>)> {
    let (mut r0, mut r1) = (fq_trim(a.to_vec()), fq_trim(b.to_vec()));
    let (mut s0, mut s1) = (vec![ctx.one(1)], Vec::new());
    let (mut t0, mut t1) = (Vec::new(), vec![ctx.one(1)]);
    while !r1.is_empty() {
        let (q, r) = fq_divrem(&r0, &r1, ctx);
        let s2 = fq_sub(&s0, &fq_mul(&q, &s1, ctx), ctx);
        let t2 = fq_sub(&t0, &fq_mul(&q, &t1, ctx), ctx);
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if r0.len() != 1 {
        return None;
    }
    let inv = r0[0].inv().ok()?;
    let sc = |v: Vec<ZqElement>| {
        v.into_iter()
            .map(|c| c.mul(&inv).unwrap())
            .collect::<Vec<_>>()
    };
    Some((sc(s0), sc(t0)))
}

/// Univariate polynomial in variable `var` of an n-variable ring.
fn poly_in(ctx: &Ctx, coeffs: &[ZqElement], nvars: usize, var: usize, prec: u32) -> MultiPoly {
    let mut f = MultiPoly::zero(ctx, nvars, prec);
    for (i, c) in coeffs.iter().enumerate() {
        let mut e = vec![0; nvars];
        e[var] = i as u32;
        f.add_term(e, lift(c, prec));
    }
    f
}

/// Lifts a precision-1 element to precision `prec` through its residues.
fn lift(c: &ZqElement, prec: u32) -> ZqElement {
    let coeffs: Vec<BigInt> = c.coeffs().iter().map(|x| BigInt::from(x.clone())).collect();
    c.ctx().elem(&coeffs, prec)
}

// ---------------------------------------------------------------------
// built-in families

/// y^2 = Q(x); `q` lists the coefficients of Q, lowest first. The full model
/// has n = 2, P = (a, y b/2), Δ = (b) with b Q - a Q' ≡ 1; the localized
/// model adds z with 2yz = 1.
pub fn build_hyperelliptic(q: &[ZqElement], localized: bool) -> Result<CurveSpec, ModelError> {
    let ctx = q.first().ok_or(ModelError::EvenDegree(0))?.ctx().clone();
    if ctx.p() == 2 {
        return Err(ModelError::EvenCharacteristic);
    }
    let prec = ctx.n_work();
    let qbar = fq_trim(q.iter().map(|c| c.truncate(1)).collect());
    if qbar.is_empty() || (qbar.len() - 1) % 2 == 0 {
        return Err(ModelError::EvenDegree(qbar.len().saturating_sub(1) as u32));
    }
    if qbar.len() != q.len() {
        return Err(ModelError::Shape(
            "leading coefficient of Q vanishes modulo p".into(),
        ));
    }
    let deg = qbar.len() - 1;
    let genus = ((deg - 1) / 2) as u32;
    let dq: Vec<ZqElement> = fq_trim(
        qbar.iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c.mul_int(i as i64))
            .collect(),
    );
    let (b, t) = fq_bezout(&qbar, &dq, &ctx).ok_or(ModelError::NotSquarefree)?;
    // b Q + t Q' = 1, so a = -t
    let a: Vec<ZqElement> = t.iter().map(|c| c.neg()).collect();
    let n = if localized { 3 } else { 2 };
    let names = default_names(n);
    let var = |i: usize| MultiPoly::var(&ctx, n, i, prec);
    let qx = poly_in(&ctx, q, n, 0, prec);
    let half = ctx.int(2, prec).inv()?;
    let f2 = var(1).pow(2).sub(&qx);
    let zero = MultiPoly::zero(&ctx, n, prec);
    let mut equations = vec![f2];
    let (p_mat, delta) = if localized {
        let z = var(2);
        equations.push(
            var(1)
                .mul(&z)
                .scale(&ctx.int(2, prec))
                .sub(&MultiPoly::int(&ctx, n, 1, prec)),
        );
        let p_mat = vec![
            vec![zero.clone(), zero.clone()],
            vec![z.clone(), zero.clone()],
            vec![z.pow(3).scale(&ctx.int(-2, prec)), z.clone()],
        ];
        let one = MultiPoly::int(&ctx, n, 1, prec);
        let d2 = vec![
            vec![zero.clone(), zero.clone()],
            vec![zero.clone(), zero.clone()],
        ];
        let d3 = vec![
            vec![one.clone(), zero.clone()],
            vec![z.pow(2).scale(&ctx.int(-2, prec)), one],
        ];
        (p_mat, vec![d2, d3])
    } else {
        let ax = poly_in(&ctx, &a, n, 0, prec);
        let bx = poly_in(&ctx, &b, n, 0, prec);
        let p_mat = vec![vec![ax], vec![var(1).mul(&bx).scale(&half)]];
        (p_mat, vec![vec![vec![bx]]])
    };
    let basis = (0..2 * genus)
        .map(|i| DifferentialForm {
            terms: vec![FormTerm {
                num: var(0).pow(i),
                den: var(1).scale(&ctx.int(2, prec)),
                dvar: 0,
            }],
        })
        .collect();
    let shift = deg as i64;
    let mut vars = vec![
        VarExpansion::Exact(LaurentSeries::monomial(&ctx.one(prec), -2, EXACT_HI)),
        VarExpansion::Sqrt {
            radicand: qx.clone(),
            shift,
            sign: 1,
        },
    ];
    if localized {
        vars.push(VarExpansion::Reciprocal {
            den: var(1).scale(&ctx.int(2, prec)),
        });
    }
    let mut dvec = vec![
        BigRational::new(BigInt::one(), BigInt::from(deg)),
        BigRational::new(1.into(), 2.into()),
    ];
    if localized {
        dvec.push(BigRational::new(1.into(), 2.into()));
    }
    let pb = PolytopeBounds::new(vec![dvec]);
    let d = pdelta_scale(&pb, &p_mat, &delta);
    let spec = CurveSpec {
        ctx: ctx.clone(),
        names,
        equations,
        p_mat,
        delta,
        genus,
        basis,
        ends: vec![EndData {
            label: "inf".into(),
            vars,
        }],
        pb,
        d,
        family: Family::Hyperelliptic {
            q: poly_in(&ctx, q, 1, 0, prec),
            localized,
        },
        options: SpecOptions::default(),
    };
    spec.validate()?;
    Ok(spec)
}

/// Plane curve with Δ = (1) and ends at infinity where x = t^-x_order and
/// y = ±t^-shift sqrt(t^(2 shift) R(x)).
fn build_plane_sqrt(
    ctx: &Ctx,
    f: MultiPoly,
    r: MultiPoly,
    p_mat: Vec<Vec<MultiPoly>>,
    x_order: i64,
    shift: i64,
    signs: &[(i64, &str)],
    genus: u32,
    basis: Vec<DifferentialForm>,
    pb: PolytopeBounds,
) -> Result<CurveSpec, ModelError> {
    let prec = ctx.n_work();
    let one = MultiPoly::int(ctx, 2, 1, prec);
    let delta = vec![vec![vec![one]]];
    let ends = signs
        .iter()
        .map(|(s, label)| EndData {
            label: (*label).into(),
            vars: vec![
                VarExpansion::Exact(LaurentSeries::monomial(&ctx.one(prec), -x_order, EXACT_HI)),
                VarExpansion::Sqrt {
                    radicand: r.clone(),
                    shift,
                    sign: *s,
                },
            ],
        })
        .collect();
    let d = pdelta_scale(&pb, &p_mat, &delta);
    let spec = CurveSpec {
        ctx: ctx.clone(),
        names: default_names(2),
        equations: vec![f],
        p_mat,
        delta,
        genus,
        basis,
        ends,
        pb,
        d,
        family: Family::Plane,
        options: SpecOptions::default(),
    };
    spec.validate()?;
    Ok(spec)
}

/// The hyperbola x^2 - y^2 - 1 with P = (x/2, y/2), Δ = (1) and its two
/// ends at infinity, parametrized by t = 1/x.
pub fn build_hyperbola(ctx: &Ctx) -> Result<CurveSpec, ModelError> {
    let prec = ctx.n_work();
    let x = MultiPoly::var(ctx, 2, 0, prec);
    let y = MultiPoly::var(ctx, 2, 1, prec);
    let one = MultiPoly::int(ctx, 2, 1, prec);
    let f = x.pow(2).sub(&y.pow(2)).sub(&one);
    let half = ctx.int(2, prec).inv()?;
    let p_mat = vec![vec![x.scale(&half)], vec![y.scale(&half)]];
    let r = x.pow(2).sub(&one);
    let pb = PolytopeBounds::from_fracs(&[(&[1, 1], 2)]);
    build_plane_sqrt(
        ctx,
        f,
        r,
        p_mat,
        1,
        1,
        &[(1, "plus"), (-1, "minus")],
        0,
        Vec::new(),
        pb,
    )
}

/// y^2 = x^3 + 1 as a plane curve with P = (x/3, y/2), Δ = (1), basis
/// dx/(2y), x dx/(2y) and the end at infinity.
pub fn build_elliptic_plane(ctx: &Ctx) -> Result<CurveSpec, ModelError> {
    let prec = ctx.n_work();
    let x = MultiPoly::var(ctx, 2, 0, prec);
    let y = MultiPoly::var(ctx, 2, 1, prec);
    let one = MultiPoly::int(ctx, 2, 1, prec);
    let r = x.pow(3).add(&one);
    let f = y.pow(2).sub(&r);
    let p_mat = vec![
        vec![x.scale(&ctx.int(3, prec).inv()?)],
        vec![y.scale(&ctx.int(2, prec).inv()?)],
    ];
    let basis = (0..2)
        .map(|i| DifferentialForm {
            terms: vec![FormTerm {
                num: x.pow(i),
                den: y.scale(&ctx.int(2, prec)),
                dvar: 0,
            }],
        })
        .collect();
    let pb = PolytopeBounds::from_fracs(&[(&[2, 3], 6)]);
    build_plane_sqrt(ctx, f, r, p_mat, 2, 3, &[(1, "inf")], 1, basis, pb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PrecisionContext;

    fn ints(ctx: &Ctx, v: &[i64]) -> Vec<ZqElement> {
        v.iter().map(|&c| ctx.int(c, ctx.n_work())).collect()
    }

    #[test]
    fn test_elliptic_congruence() {
        let c = PrecisionContext::new(5, 1, 6, None).unwrap();
        let s = build_hyperelliptic(&ints(&c, &[1, 0, 0, 1]), false).unwrap();
        assert_eq!(s.genus, 1);
        assert_eq!(verify_congruence(&s), Ok(()));
        s.check_ends(30, 4).unwrap();
        let pl = build_elliptic_plane(&c).unwrap();
        assert_eq!(pl.d, BigRational::new(1.into(), 2.into()));
        pl.check_ends(30, 4).unwrap();
    }

    #[test]
    fn test_genus2_and_localized() {
        let c = PrecisionContext::new(5, 1, 6, None).unwrap();
        let s = build_hyperelliptic(&ints(&c, &[1, 1, 0, 0, 0, 1]), false).unwrap();
        assert_eq!(s.basis.len(), 4);
        let loc = build_hyperelliptic(&ints(&c, &[1, 1, 0, 0, 0, 1]), true).unwrap();
        loc.check_ends(40, 4).unwrap();
    }

    #[test]
    fn test_bad_inputs() {
        let c = PrecisionContext::new(5, 1, 6, None).unwrap();
        assert_eq!(
            build_hyperelliptic(&ints(&c, &[0, 0, 1]), false).unwrap_err(),
            ModelError::EvenDegree(2)
        );
        // x^3 - 3x + 2 = (x-1)^2 (x+2)
        assert_eq!(
            build_hyperelliptic(&ints(&c, &[2, -3, 0, 1]), false).unwrap_err(),
            ModelError::NotSquarefree
        );
    }

    #[test]
    fn test_corrupted_p_is_located() {
        let c = PrecisionContext::new(5, 1, 6, None).unwrap();
        let mut s = build_hyperbola(&c).unwrap();
        s.p_mat[1][0] = s.p_mat[1][0].scale(&c.int(2, 6));
        assert_eq!(verify_congruence(&s), Err((1, 1)));
        s.check_ends(20, 3).unwrap();
    }

    #[test]
    fn test_inconsistent_end() {
        let c = PrecisionContext::new(5, 1, 6, None).unwrap();
        let mut s = build_elliptic_plane(&c).unwrap();
        s.ends[0].vars[1] =
            VarExpansion::Fixed(LaurentSeries::from_ints(&c, -3, &[1, 0, 0, 1], 5, 4).unwrap());
        assert!(matches!(
            s.check_ends(5, 4),
            Err(ModelError::EndInconsistent { .. })
        ));
    }
}
