//! The pipeline against brute-force counts on small curves.

use std::time::Instant;

use zetalift::model::{build_hyperelliptic, ModelError};
use zetalift::oracle::{from_spec, oracle_p1};
use zetalift::padic::{PrecisionContext, ZqElement};
use zetalift::zeta::{compute_zeta, ZetaOptions};

fn check(p: u64, q: &[i64], work: u32) {
    let c = PrecisionContext::new(p, 1, work, None).unwrap();
    let coeffs: Vec<ZqElement> = q.iter().map(|&x| c.int(x, work)).collect();
    let spec = build_hyperelliptic(&coeffs, false).unwrap();
    let t = Instant::now();
    let z = compute_zeta(&spec, &ZetaOptions::default()).unwrap();
    let (field, curve) = from_spec(&spec);
    let (_, want) = oracle_p1(&field, &curve, spec.genus).unwrap();
    eprintln!(
        "p={p} Q={q:?} P1={:?} in {:?} plan={}",
        z.p1,
        t.elapsed(),
        z.plans[0].plan
    );
    assert_eq!(z.p1, want, "p={p} Q={q:?}");
}

#[test]
fn elliptic_curves_agree() {
    for p in [5, 7, 11, 13] {
        check(p, &[1, 1, 0, 1], 10);
        check(p, &[2, 3, 0, 1], 10);
    }
}

#[test]
fn genus_two_agrees() {
    check(5, &[1, 1, 0, 0, 0, 1], 12);
    check(7, &[1, 2, 0, 0, 0, 1], 12);
}

#[test]
fn repeated_root_is_rejected() {
    // x^5 + x + 1 = (x - 4)^2 (...) over F_7
    let c = PrecisionContext::new(7, 1, 12, None).unwrap();
    let coeffs: Vec<ZqElement> = [1, 1, 0, 0, 0, 1].iter().map(|&x| c.int(x, 12)).collect();
    assert!(matches!(
        build_hyperelliptic(&coeffs, false),
        Err(ModelError::NotSquarefree)
    ));
}
