//! Dense polynomials over the prime field `F_p`, used to pick the canonical
//! modulus and to seed Hensel/Newton lifts.
//!
//! Coefficients are stored low degree first and kept trimmed (no trailing
//! zeros); the zero polynomial is the empty vector.

pub(crate) type Poly = Vec<u64>;

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub(crate) fn inv(a: u64, p: u64) -> u64 {
    // p is prime, a != 0 mod p
    pow(a % p, p - 2, p)
}

fn pow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, b, p);
        }
        b = mulmod(b, b, p);
        e >>= 1;
    }
    acc
}

pub(crate) fn trim(mut a: Poly) -> Poly {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

pub(crate) fn sub(a: &[u64], b: &[u64], p: u64) -> Poly {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(out)
}

pub(crate) fn mul(a: &[u64], b: &[u64], p: u64) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mulmod(x, y, p)) % p;
        }
    }
    trim(out)
}

/// Quotient and remainder of `a` by non-zero `b`.
pub(crate) fn divrem(a: &[u64], b: &[u64], p: u64) -> (Poly, Poly) {
    let b = trim(b.to_vec());
    assert!(!b.is_empty(), "division by zero polynomial");
    let mut r = trim(a.to_vec());
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let lead_inv = inv(*b.last().unwrap(), p);
    let mut q = vec![0u64; r.len() - b.len() + 1];
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let c = mulmod(*r.last().unwrap(), lead_inv, p);
        q[shift] = c;
        for (j, &bj) in b.iter().enumerate() {
            let t = mulmod(c, bj, p);
            r[shift + j] = (r[shift + j] + p - t) % p;
        }
        r = trim(r);
    }
    (trim(q), r)
}

pub(crate) fn rem(a: &[u64], b: &[u64], p: u64) -> Poly {
    divrem(a, b, p).1
}

pub(crate) fn mulmod_poly(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Poly {
    rem(&mul(a, b, p), f, p)
}

/// `base^e mod f`.
pub(crate) fn powmod(base: &[u64], mut e: u128, f: &[u64], p: u64) -> Poly {
    let mut acc = rem(&[1], f, p);
    let mut b = rem(base, f, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod_poly(&acc, &b, f, p);
        }
        e >>= 1;
        if e > 0 {
            b = mulmod_poly(&b, &b, f, p);
        }
    }
    acc
}

pub(crate) fn gcd(a: &[u64], b: &[u64], p: u64) -> Poly {
    let mut x = trim(a.to_vec());
    let mut y = trim(b.to_vec());
    while !y.is_empty() {
        let r = rem(&x, &y, p);
        x = y;
        y = r;
    }
    x
}

/// Inverse of `a` modulo an irreducible `f`, or `None` when `a ≡ 0`.
pub(crate) fn inv_mod(a: &[u64], f: &[u64], p: u64) -> Option<Poly> {
    // extended Euclid tracking the coefficient of a
    let mut r0 = trim(f.to_vec());
    let mut r1 = rem(a, f, p);
    if r1.is_empty() {
        return None;
    }
    let mut s0: Poly = Vec::new();
    let mut s1: Poly = vec![1];
    while !r1.is_empty() {
        let (q, r) = divrem(&r0, &r1, p);
        let s = sub(&s0, &mul(&q, &s1, p), p);
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s;
    }
    // r0 is a non-zero constant
    if r0.len() != 1 {
        return None;
    }
    let c = inv(r0[0], p);
    Some(rem(&mul(&s0, &[c], p), f, p))
}

fn prime_factors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Rabin's irreducibility test for a monic `f` of degree `m ≥ 1`.
pub(crate) fn is_irreducible(f: &[u64], p: u64) -> bool {
    let m = f.len() - 1;
    if m == 1 {
        return true;
    }
    let x: Poly = vec![0, 1];
    let pm = (p as u128).pow(m as u32);
    let full = powmod(&x, pm, f, p);
    if sub(&full, &x, p).iter().any(|&c| c != 0) {
        return false;
    }
    for q in prime_factors(m) {
        let e = (p as u128).pow((m / q) as u32);
        let h = sub(&powmod(&x, e, f, p), &x, p);
        let g = gcd(f, &h, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

/// First monic irreducible polynomial of degree `m`, ordering candidates by
/// the tuple `(c_{m-1}, ..., c_0)` of lower coefficients.
pub(crate) fn first_irreducible(m: usize, p: u64) -> Poly {
    let total = (p as u128).pow(m as u32);
    let mut code: u128 = 0;
    while code < total {
        let mut f = Vec::with_capacity(m + 1);
        let mut k = code;
        for _ in 0..m {
            f.push((k % p as u128) as u64);
            k /= p as u128;
        }
        f.push(1);
        if is_irreducible(&f, p) {
            return f;
        }
        code += 1;
    }
    unreachable!("an irreducible polynomial of every degree exists over F_p")
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}
