//! Small dense polynomial helpers over F_p with machine-word coefficients.
//!
//! Polynomials are coefficient vectors, lowest degree first, with trailing
//! zeros trimmed. Used for context setup and builder-side algebra only.

pub(crate) fn inv_mod(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return None;
    }
    Some(pow_mod(a, p - 2, p))
}

pub(crate) fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = ((r as u128 * b as u128) % p as u128) as u64;
        }
        b = ((b as u128 * b as u128) % p as u128) as u64;
        e >>= 1;
    }
    r
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn trim(mut a: Vec<u64>) -> Vec<u64> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

pub(crate) fn deg(a: &[u64]) -> Option<usize> {
    a.iter().rposition(|&c| c != 0)
}

pub(crate) fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut r = vec![0u64; n];
    for (i, slot) in r.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        *slot = (x + p - y % p) % p;
    }
    trim(r)
}

pub(crate) fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut r = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            r[i + j] = ((r[i + j] as u128 + x as u128 * y as u128) % p as u128) as u64;
        }
    }
    trim(r)
}

pub(crate) fn scale(a: &[u64], c: u64, p: u64) -> Vec<u64> {
    trim(
        a.iter()
            .map(|&x| ((x as u128 * c as u128) % p as u128) as u64)
            .collect(),
    )
}

/// Quotient and remainder; `b` must be nonzero.
pub(crate) fn divrem(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    let db = deg(b).expect("division by zero polynomial");
    let lead_inv = inv_mod(b[db], p).expect("leading coefficient not invertible");
    let mut r = trim(a.to_vec());
    if r.len() <= db {
        return (Vec::new(), r);
    }
    let mut q = vec![0u64; r.len() - db];
    while let Some(dr) = deg(&r) {
        if dr < db {
            break;
        }
        let c = ((r[dr] as u128 * lead_inv as u128) % p as u128) as u64;
        q[dr - db] = c;
        for (j, &bj) in b.iter().enumerate().take(db + 1) {
            let t = ((c as u128 * bj as u128) % p as u128) as u64;
            r[dr - db + j] = (r[dr - db + j] + p - t) % p;
        }
        r = trim(r);
    }
    (trim(q), r)
}

pub(crate) fn rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    divrem(a, b, p).1
}

/// Extended gcd: returns monic `g` and `s`, `t` with `s*a + t*b = g`.
pub(crate) fn xgcd(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>, Vec<u64>) {
    let (mut r0, mut r1) = (trim(a.to_vec()), trim(b.to_vec()));
    let (mut s0, mut s1) = (vec![1u64], Vec::new());
    let (mut t0, mut t1) = (Vec::new(), vec![1u64]);
    while !r1.is_empty() {
        let (q, r) = divrem(&r0, &r1, p);
        let s2 = sub(&s0, &mul(&q, &s1, p), p);
        let t2 = sub(&t0, &mul(&q, &t1, p), p);
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    match deg(&r0) {
        None => (r0, s0, t0),
        Some(d) => {
            let c = inv_mod(r0[d], p).unwrap();
            (scale(&r0, c, p), scale(&s0, c, p), scale(&t0, c, p))
        }
    }
}

/// Irreducibility by exhaustive search for a monic factor of degree at most deg/2.
pub(crate) fn is_irreducible(f: &[u64], p: u64) -> bool {
    let d = match deg(f) {
        Some(d) if d >= 1 => d,
        _ => return false,
    };
    for k in 1..=d / 2 {
        let count = (p as u128).pow(k as u32);
        for code in 0..count {
            let mut g = vec![0u64; k + 1];
            let mut c = code;
            for slot in g.iter_mut().take(k) {
                *slot = (c % p as u128) as u64;
                c /= p as u128;
            }
            g[k] = 1;
            if rem(f, &g, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// Smallest monic irreducible of degree `l`, ordered by the integer `sum c_i p^i`.
pub(crate) fn smallest_irreducible(l: usize, p: u64) -> Vec<u64> {
    let count = (p as u128).pow(l as u32);
    for code in 0..count {
        let mut f = vec![0u64; l + 1];
        let mut c = code;
        for slot in f.iter_mut().take(l) {
            *slot = (c % p as u128) as u64;
            c /= p as u128;
        }
        f[l] = 1;
        if is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_xgcd_identity() {
        let p = 5;
        let q = vec![1, 0, 0, 1];
        let dq = vec![0, 0, 3];
        let (g, s, t) = xgcd(&q, &dq, p);
        assert_eq!(g, vec![1]);
        let lhs = trim(
            (0..6)
                .map(|i| {
                    let a = mul(&s, &q, p).get(i).copied().unwrap_or(0);
                    let b = mul(&t, &dq, p).get(i).copied().unwrap_or(0);
                    (a + b) % p
                })
                .collect(),
        );
        assert_eq!(lhs, vec![1]);
    }

    #[test]
    fn test_smallest_irreducible() {
        assert_eq!(smallest_irreducible(2, 5), vec![2, 0, 1]);
        assert!(is_irreducible(&[2, 0, 1], 5));
        assert!(!is_irreducible(&[1, 0, 1], 5));
        assert_eq!(smallest_irreducible(1, 7), vec![0, 1]);
    }
}
