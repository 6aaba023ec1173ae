//! Differential forms, their expansions at the ends, and the residue pairing
//! ⟨ω, η⟩ = Σ_ends Res(ω ∫η).

use num_bigint::BigInt;
use rand::Rng;
use thiserror::Error;

use crate::frobenius::FrobeniusImage;
use crate::laurent::{
    ls_inv, ls_mul, ls_res_pair_bounded, ls_res_pair_range, LaurentError, LaurentSeries, EXACT_HI,
};
use crate::padic::{Ctx, PadicError, ZqElement};
use crate::poly::{mp_eval_series, MultiPoly, PolyError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PairingError {
    #[error("form expansion at end {label} is known below t^{hi}, t^{needed} is needed")]
    Window { label: String, hi: i64, needed: i64 },
    #[error(transparent)]
    Laurent(#[from] LaurentError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Padic(#[from] PadicError),
}

/// (num / den) d x_dvar
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormTerm {
    pub num: MultiPoly,
    pub den: MultiPoly,
    pub dvar: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifferentialForm {
    pub terms: Vec<FormTerm>,
}

impl DifferentialForm {
    /// dg = Σ_i ∂g/∂x_i dx_i.
    pub fn exact(g: &MultiPoly) -> DifferentialForm {
        let one = MultiPoly::int(g.ctx(), g.nvars(), 1, g.prec());
        DifferentialForm {
            terms: (0..g.nvars())
                .map(|i| FormTerm {
                    num: g.derivative(i),
                    den: one.clone(),
                    dvar: i,
                })
                .filter(|t| !t.num.is_zero())
                .collect(),
        }
    }

    pub fn add(&self, o: &DifferentialForm) -> DifferentialForm {
        DifferentialForm {
            terms: self.terms.iter().chain(&o.terms).cloned().collect(),
        }
    }

    pub fn scale(&self, c: &ZqElement) -> DifferentialForm {
        DifferentialForm {
            terms: self
                .terms
                .iter()
                .map(|t| FormTerm {
                    num: t.num.scale(c),
                    den: t.den.clone(),
                    dvar: t.dvar,
                })
                .collect(),
        }
    }
}

/// c x^e when `f` is a single term.
fn as_monomial(f: &MultiPoly) -> Option<(&Vec<u32>, &ZqElement)> {
    if f.terms().len() == 1 {
        f.terms().iter().next()
    } else {
        None
    }
}

/// ξ(form) / dt from the expansions ξ(x_i) and their t-derivatives.
pub fn form_expand(
    form: &DifferentialForm,
    xi: &[LaurentSeries],
    dxi: &[LaurentSeries],
) -> Result<LaurentSeries, PairingError> {
    let prec = xi.iter().map(|x| x.prec()).min().unwrap_or(1);
    let ctx = xi[0].ctx();
    let mut acc = LaurentSeries::zero(ctx, prec, EXACT_HI);
    for t in &form.terms {
        let num = mp_eval_series(&t.num.with_prec(prec), xi)?;
        let den = match as_monomial(&t.den) {
            Some((e, c)) if e.iter().all(|&d| d == 0) => {
                LaurentSeries::constant(&c.truncate(prec).inv()?, EXACT_HI)
            }
            _ => ls_inv(&mp_eval_series(&t.den.with_prec(prec), xi)?)?,
        };
        acc = acc.add(&ls_mul(&ls_mul(&num, &den)?, &dxi[t.dvar])?)?;
    }
    Ok(acc)
}

/// φ*(form) / dt: num^σ(φ(x)) / den^σ(φ(x)) dφ(x_dvar). Monomial
/// denominators invert through the factored φ(x_i).
pub fn frob_form_expand(
    form: &DifferentialForm,
    img: &FrobeniusImage,
) -> Result<LaurentSeries, PairingError> {
    let prec = img.phi.iter().map(|x| x.prec()).min().unwrap_or(1);
    let ctx = img.phi[0].ctx();
    let mut acc = LaurentSeries::zero(ctx, prec, EXACT_HI);
    for t in &form.terms {
        let num = mp_eval_series(&t.num.sigma(1).with_prec(prec), &img.phi)?;
        let den = match as_monomial(&t.den) {
            Some((e, c)) => {
                let mut d = LaurentSeries::constant(&c.sigma(1).truncate(prec).inv()?, EXACT_HI);
                for (i, &k) in e.iter().enumerate() {
                    if k > 0 {
                        let inv = img.inverse(i)?;
                        for _ in 0..k {
                            d = ls_mul(&d, &inv)?;
                        }
                    }
                }
                d
            }
            None => ls_inv(&mp_eval_series(&t.den.sigma(1).with_prec(prec), &img.phi)?)?,
        };
        acc = acc.add(&ls_mul(&ls_mul(&num, &den)?, &img.dphi[t.dvar])?)?;
    }
    Ok(acc)
}

/// Lower bound on the order in t of ξ(form) / dt. Stored leading terms of
/// a form expansion can vanish modulo p^N while the true ones do not, so
/// pairings take their windows from this bound. The coordinate expansions
/// have unit leading coefficients, and the apparent order of a denominator
/// bounds its true order from above.
pub fn form_pole_bound(form: &DifferentialForm, xi: &[LaurentSeries]) -> Result<i64, PairingError> {
    let prec = xi.iter().map(|x| x.prec()).min().unwrap_or(1);
    let mut lo = i64::MAX;
    for t in &form.terms {
        let Some(num) = t
            .num
            .terms()
            .iter()
            .map(|(e, _)| {
                e.iter()
                    .zip(xi)
                    .map(|(&k, x)| k as i64 * x.lo())
                    .sum::<i64>()
            })
            .min()
        else {
            continue;
        };
        let den = match as_monomial(&t.den) {
            Some((e, _)) => e.iter().zip(xi).map(|(&k, x)| k as i64 * x.lo()).sum(),
            None => mp_eval_series(&t.den.with_prec(prec), xi)?.lo(),
        };
        lo = lo.min(num + xi[t.dvar].lo() - 1 - den);
    }
    Ok(lo)
}

/// Res(w ∫e) over every m that can contribute, from lower bounds on the
/// orders of w and e; both windows must cover it.
pub fn pair_full(
    w: &LaurentSeries,
    w_lo: i64,
    e: &LaurentSeries,
    e_lo: i64,
) -> Result<ZqElement, PairingError> {
    Ok(ls_res_pair_bounded(w, w_lo, e, e_lo)?)
}

/// Res(w ∫e) restricted to m in [m_minus, m_plus] at precision `target`.
pub fn pair_window(
    w: &LaurentSeries,
    e: &LaurentSeries,
    m_minus: i64,
    m_plus: i64,
    target: u32,
) -> Result<ZqElement, PairingError> {
    Ok(ls_res_pair_range(w, e, m_minus, m_plus, target)?)
}

/// Σ_ends Res(a ∫b) with full windows, from per-end expansions of a and b
/// paired with lower bounds on their orders.
pub fn cup_product(
    a: &[(LaurentSeries, i64)],
    b: &[(LaurentSeries, i64)],
) -> Result<ZqElement, PairingError> {
    let mut acc: Option<ZqElement> = None;
    for ((w, w_lo), (e, e_lo)) in a.iter().zip(b) {
        let r = pair_full(w, *w_lo, e, *e_lo)?;
        acc = Some(match acc {
            None => r,
            Some(x) => {
                let prec = x.prec().min(r.prec());
                x.truncate(prec).add(&r.truncate(prec))?
            }
        });
    }
    Ok(acc.expect("at least one end"))
}

/// Expansions of the basis forms at one end, as needed for pairing matrices.
pub fn expand_basis(
    basis: &[DifferentialForm],
    xi: &[LaurentSeries],
) -> Result<Vec<LaurentSeries>, PairingError> {
    let dxi: Vec<LaurentSeries> = xi.iter().map(|x| x.derivative()).collect();
    basis.iter().map(|f| form_expand(f, xi, &dxi)).collect()
}

/// Checks that `s` is known below t^needed at end `label`.
pub fn require_window(s: &LaurentSeries, needed: i64, label: &str) -> Result<(), PairingError> {
    if s.hi() < needed {
        return Err(PairingError::Window {
            label: label.into(),
            hi: s.hi(),
            needed,
        });
    }
    Ok(())
}

/// Random element of Z_q modulo p^prec, built digit by digit.
pub fn random_element<R: Rng + ?Sized>(ctx: &Ctx, prec: u32, rng: &mut R) -> ZqElement {
    let p = ctx.p();
    let coeffs: Vec<BigInt> = (0..ctx.l())
        .map(|_| (0..prec).fold(BigInt::from(0), |acc, _| acc * p + rng.gen_range(0..p)))
        .collect();
    ctx.elem(&coeffs, prec)
}

/// Random polynomial of total degree at most `deg` in `nvars` variables.
pub fn random_poly<R: Rng + ?Sized>(
    ctx: &Ctx,
    nvars: usize,
    deg: u32,
    prec: u32,
    rng: &mut R,
) -> MultiPoly {
    let mut f = MultiPoly::zero(ctx, nvars, prec);
    for _ in 0..=deg + 1 {
        let mut left = rng.gen_range(0..=deg);
        let mut e = vec![0u32; nvars];
        for slot in e.iter_mut() {
            let k = rng.gen_range(0..=left);
            *slot = k;
            left -= k;
        }
        f.add_term(e, random_element(ctx, prec, rng));
    }
    f
}

/// ⟨dg, ω_i⟩ for every basis form, from per-end expansions of the
/// variables.
pub fn exact_form_pairings(
    g: &MultiPoly,
    basis: &[DifferentialForm],
    xi: &[Vec<LaurentSeries>],
) -> Result<Vec<ZqElement>, PairingError> {
    let dg = [DifferentialForm::exact(g)];
    let bounded =
        |forms: &[DifferentialForm]| -> Result<Vec<Vec<(LaurentSeries, i64)>>, PairingError> {
            xi.iter().map(|x| expand_bounded(forms, x)).collect()
        };
    let per_end: Vec<(LaurentSeries, i64)> =
        bounded(&dg)?.into_iter().map(|mut v| v.remove(0)).collect();
    let basis = bounded(basis)?;
    (0..basis.first().map_or(0, Vec::len))
        .map(|i| {
            let col: Vec<(LaurentSeries, i64)> = basis.iter().map(|b| b[i].clone()).collect();
            cup_product(&per_end, &col)
        })
        .collect()
}

/// `expand_basis` with each expansion's order bound.
pub fn expand_bounded(
    forms: &[DifferentialForm],
    xi: &[LaurentSeries],
) -> Result<Vec<(LaurentSeries, i64)>, PairingError> {
    let series = expand_basis(forms, xi)?;
    forms
        .iter()
        .zip(series)
        .map(|(f, s)| Ok((s, form_pole_bound(f, xi)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_hyperelliptic;
    use crate::padic::{Ctx, PrecisionContext};

    fn ints(ctx: &Ctx, v: &[i64]) -> Vec<ZqElement> {
        v.iter().map(|&c| ctx.int(c, ctx.n_work())).collect()
    }

    #[test]
    fn test_exact_form_pairs_to_zero() {
        let c = PrecisionContext::new(5, 1, 4, None).unwrap();
        let spec = build_hyperelliptic(&ints(&c, &[1, 0, 0, 1]), false).unwrap();
        let xi = spec.ends[0].expansions(60, 4).unwrap();
        let basis = expand_bounded(&spec.basis, &xi).unwrap();
        let x = MultiPoly::var(&c, 2, 0, 4);
        let y = MultiPoly::var(&c, 2, 1, 4);
        let g = x.pow(2).mul(&y).add(&x);
        let dg = expand_bounded(&[DifferentialForm::exact(&g)], &xi).unwrap();
        for b in &basis {
            assert!(cup_product(&dg, std::slice::from_ref(b)).unwrap().is_zero());
        }
        let m01 = cup_product(&basis[..1], &basis[1..2]).unwrap();
        let m10 = cup_product(&basis[1..2], &basis[..1]).unwrap();
        assert!(m01.add(&m10).unwrap().is_zero());
        assert!(m01.is_unit());
    }

    /// The t^-6 term of d(15xy) vanishes mod 25 but still meets the 1/5 in
    /// ∫ x dx/y, so only one digit of the pairing survives.
    #[test]
    fn test_vanishing_leading_term_costs_precision() {
        let c = PrecisionContext::new(5, 1, 4, None).unwrap();
        let spec = build_hyperelliptic(&ints(&c, &[1, 0, 0, 1]), false).unwrap();
        let xi = spec.ends[0].expansions(60, 2).unwrap();
        let x = MultiPoly::var(&c, 2, 0, 2);
        let y = MultiPoly::var(&c, 2, 1, 2);
        let g = x.mul(&y).scale(&c.int(15, 2)).add(&x.scale(&c.int(8, 2)));
        let dg = expand_bounded(&[DifferentialForm::exact(&g)], &xi).unwrap();
        assert_eq!(dg[0].0.lo(), -3);
        assert_eq!(dg[0].1, -6);
        let r = exact_form_pairings(&g, &spec.basis, &[xi]).unwrap();
        assert!(r.iter().all(|v| v.prec() == 1 && v.is_zero()), "{r:?}");
    }
}
