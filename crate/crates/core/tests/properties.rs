//! Randomized invariants of the arithmetic layers and of the pipeline glue.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use zetalift::laurent::{
    ls_derivative, ls_integrate, ls_inv, ls_mul, ls_res_pair, ls_residue, ls_sqrt, BoundProfile,
    LaurentSeries,
};
use zetalift::model::build_hyperelliptic;
use zetalift::oracle::{count_points, from_spec, zeta_from_counts};
use zetalift::padic::{Ctx, PrecisionContext, ZqElement};
use zetalift::planner::{rat, residue_plan, validate_plan, weil_bound, weil_precision};
use zetalift::poly::MultiPoly;
use zetalift::specfile::{parse_spec, serialize_spec};
use zetalift::zeta::{charpoly_berkowitz, predicted_counts, weil_lift, Matrix};

fn elem(ctx: &Ctx, c: &[i64], prec: u32) -> ZqElement {
    let v: Vec<BigInt> = c.iter().map(|&x| BigInt::from(x)).collect();
    ctx.elem(&v, prec)
}

fn series(ctx: &Ctx, lo: i64, c: &[i64], prec: u32) -> LaurentSeries {
    LaurentSeries::from_ints(ctx, lo, c, lo + c.len() as i64, prec).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zq_ring_and_frobenius(a in prop::collection::vec(-1000i64..1000, 2),
                             b in prop::collection::vec(-1000i64..1000, 2),
                             c in prop::collection::vec(-1000i64..1000, 2)) {
        let ctx = PrecisionContext::new(5, 2, 5, None).unwrap();
        let (a, b, c) = (elem(&ctx, &a, 5), elem(&ctx, &b, 5), elem(&ctx, &c, 5));
        let lhs = a.add(&b).unwrap().mul(&c).unwrap();
        let rhs = a.mul(&c).unwrap().add(&b.mul(&c).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(a.mul(&b).unwrap().sigma(1), a.sigma(1).mul(&b.sigma(1)).unwrap());
        prop_assert_eq!(a.sigma(2), a.clone());
        if a.is_unit() {
            prop_assert_eq!(a.mul(&a.inv().unwrap()).unwrap(), ctx.one(5));
        }
    }

    #[test]
    fn laurent_inverse_and_leibniz(lo in -4i64..3, c in prop::collection::vec(-50i64..50, 2..10),
                                  d in prop::collection::vec(-50i64..50, 2..10), lead in 1i64..4) {
        let ctx = PrecisionContext::new(7, 1, 5, None).unwrap();
        let mut c = c;
        c[0] = lead;
        let a = series(&ctx, lo, &c, 5);
        let b = series(&ctx, -1, &d, 5);
        let inv = ls_inv(&a).unwrap();
        let one = ls_mul(&a, &inv).unwrap();
        prop_assert!(one.congruent(&LaurentSeries::one(&ctx, 5, one.hi()), 5));
        let prod = ls_mul(&a, &b).unwrap();
        let lhs = ls_derivative(&prod);
        let rhs = ls_mul(&ls_derivative(&a), &b).unwrap().add(&ls_mul(&a, &ls_derivative(&b)).unwrap()).unwrap();
        prop_assert!(lhs.congruent(&rhs, 5));
        prop_assert!(ls_mul(&a, &b).unwrap().congruent(&ls_mul(&b, &a).unwrap(), 5));
    }

    #[test]
    fn laurent_sqrt_squares_back(c in prop::collection::vec(-50i64..50, 1..12)) {
        let ctx = PrecisionContext::new(5, 1, 6, None).unwrap();
        let mut v = vec![1];
        v.extend(c);
        let a = series(&ctx, 0, &v, 6);
        let s = ls_sqrt(&a).unwrap();
        prop_assert!(ls_mul(&s, &s).unwrap().congruent(&a, 6));
    }

    /// Res(w ∫e) by the pairing formula equals the residue of the product.
    #[test]
    fn res_pair_is_residue_of_product(elo in -6i64..1, wlo in -6i64..1,
                                      ec in prop::collection::vec(-40i64..40, 12),
                                      wc in prop::collection::vec(-40i64..40, 12)) {
        let p = 5i64;
        let ctx = PrecisionContext::new(p as u64, 1, 5, None).unwrap();
        // keep ∫e integral: no t^m with p | m + 1
        let ec: Vec<i64> = ec.iter().enumerate().map(|(i, &x)| if (elo + i as i64 + 1) % p == 0 { 0 } else { x }).collect();
        let ehi = (-wlo - 1).max(elo + 1);
        let whi = (-elo - 1).max(wlo + 1);
        let e = LaurentSeries::from_ints(&ctx, elo, &ec[..(ehi - elo).min(12) as usize], ehi, 5).unwrap();
        let w = LaurentSeries::from_ints(&ctx, wlo, &wc[..(whi - wlo).min(12) as usize], whi, 5).unwrap();
        let direct = ls_residue(&ls_mul(&w, &ls_integrate(&e).unwrap()).unwrap()).unwrap();
        let paired = ls_res_pair(&w, &e).unwrap();
        prop_assert_eq!(paired.truncate(5), direct.truncate(5));
    }

    #[test]
    fn compose_commutes_with_eval(f in prop::collection::vec((0u32..3, 0u32..3, -9i64..9), 1..6),
                                  x in -20i64..20, y in -20i64..20) {
        let ctx = PrecisionContext::new(7, 1, 4, None).unwrap();
        let mut poly = MultiPoly::zero(&ctx, 2, 4);
        for (i, j, c) in f {
            poly.add_term(vec![i, j], ctx.int(c, 4));
        }
        let xv = MultiPoly::var(&ctx, 2, 0, 4);
        let yv = MultiPoly::var(&ctx, 2, 1, 4);
        // (x, y) -> (x + y, x y)
        let args = vec![xv.add(&yv), xv.mul(&yv)];
        let comp = poly.compose(&args).unwrap();
        let pt = [ctx.int(x, 4), ctx.int(y, 4)];
        let inner = [args[0].eval(&pt).unwrap(), args[1].eval(&pt).unwrap()];
        prop_assert_eq!(comp.eval(&pt).unwrap(), poly.eval(&inner).unwrap());
    }

    /// Every integer in the Weil range is recovered from its class modulo p^N.
    #[test]
    fn weil_lift_recovers(g in 1u32..3, pi in 0usize..3, l in 1usize..3, frac in 0.0f64..1.0, neg in any::<bool>()) {
        let p = [5u64, 7, 11][pi];
        let ctx = PrecisionContext::new(p, l, 8, None).unwrap();
        let zp = weil_precision(g, p, l as u32, 0).unwrap();
        let q = ctx.q();
        for i in 1..=g {
            let bound = weil_bound(g, &q, i);
            let mag = BigInt::from((frac * bound.to_string().parse::<f64>().unwrap()).floor() as i64);
            let a = if neg { -mag } else { mag };
            let c = ctx.from_bigint(&a, zp.n);
            prop_assert_eq!(weil_lift(&c, &bound, zp.n, i as usize).unwrap(), a);
        }
    }

    /// Counts predicted from P1 give P1 back.
    #[test]
    fn counts_round_trip(qi in 0usize..4, a1f in -1.0f64..1.0, a2f in -1.0f64..1.0, g in 1u32..3) {
        let q = [5u64, 7, 25, 11][qi];
        let qb = BigUint::from(q);
        let b1 = weil_bound(g, &qb, 1).to_string().parse::<f64>().unwrap();
        let mut p1 = vec![BigInt::one(), BigInt::from((a1f * b1) as i64)];
        if g == 2 {
            let b2 = weil_bound(g, &qb, 2).to_string().parse::<f64>().unwrap();
            p1.push(BigInt::from((a2f * b2) as i64));
        }
        let gi = g as usize;
        let mut full = vec![BigInt::zero(); 2 * gi + 1];
        full[..=gi].clone_from_slice(&p1[..=gi]);
        for i in 0..gi {
            full[2 * gi - i] = BigInt::from(q).pow((gi - i) as u32) * &full[i];
        }
        let counts: Vec<u64> = predicted_counts(&full, &qb, gi).iter().map(|c| u64::try_from(c).unwrap_or(0)).collect();
        prop_assume!(predicted_counts(&full, &qb, gi).iter().all(|c| c.is_positive()));
        prop_assert_eq!(zeta_from_counts(g, q, &counts).unwrap(), full);
    }

    /// det(1 - T A): the T coefficient is -tr A and the top one (-1)^n det A.
    #[test]
    fn charpoly_trace_and_det(m in prop::collection::vec(-30i64..30, 9)) {
        let ctx = PrecisionContext::new(11, 1, 4, None).unwrap();
        let a: Matrix = (0..3).map(|i| (0..3).map(|j| ctx.int(m[3 * i + j], 4)).collect()).collect();
        let cp = charpoly_berkowitz(&a).unwrap();
        let tr = m[0] + m[4] + m[8];
        let det = m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) + m[2] * (m[3] * m[7] - m[4] * m[6]);
        prop_assert_eq!(cp[0].clone(), ctx.int(1, 4));
        prop_assert_eq!(cp[1].clone(), ctx.int(-tr, 4));
        prop_assert_eq!(cp[3].clone(), ctx.int(-det, 4));
    }

    /// Every plan the planner emits passes the independent validator.
    #[test]
    fn plans_validate(num in 1i64..10, den in 50i64..400, beta in -20i64..1, n in 1u32..4, pi in 0usize..3) {
        let p = [5u64, 7, 13][pi];
        let eta = BoundProfile::new(rat(1024, 1), rat(-2048, 1));
        let omega = BoundProfile::new(rat(num, den), rat(beta, 4));
        if let Ok(plan) = residue_plan(&eta, &omega, n, p) {
            prop_assert!(validate_plan(&plan, p).is_ok(), "{}", plan);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Random cubics and quintics survive serialization, and their point
    /// counts obey the Weil bound.
    #[test]
    fn spec_round_trip_and_weil_bound(c in prop::collection::vec(0i64..7, 5), quintic in any::<bool>(), pi in 0usize..2) {
        let p = [5u64, 7][pi];
        let ctx = PrecisionContext::new(p, 1, 6, None).unwrap();
        let mut q: Vec<i64> = if quintic { c.clone() } else { c[..3].to_vec() };
        q.push(1);
        let coeffs: Vec<ZqElement> = q.iter().map(|&x| ctx.int(x, 6)).collect();
        let Ok(spec) = build_hyperelliptic(&coeffs, false) else { return Ok(()) };
        let text = serialize_spec(&spec);
        prop_assert_eq!(parse_spec(&text).unwrap(), spec.clone());
        let (field, curve) = from_spec(&spec);
        let n1 = count_points(&field, &curve, 1).unwrap() as f64;
        let qf = p as f64;
        prop_assert!((n1 - qf - 1.0).abs() <= 2.0 * spec.genus as f64 * qf.sqrt());
    }
}
