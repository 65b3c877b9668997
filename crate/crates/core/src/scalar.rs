//! Integer coefficient types backing the truncated Witt-vector arithmetic.
//!
//! Every residue mod `p^N` is stored as a [`Coeff`]. Machine integers are
//! fast but only admit small precisions; [`BigInt`] admits any precision and
//! is what the crate-root aliases use.

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{FromPrimitive, Signed, ToPrimitive};

/// A signed integer type usable as the residue type of a [`PrimeContext`].
///
/// [`PrimeContext`]: crate::witt::PrimeContext
pub trait Coeff:
    Integer + Signed + Clone + Debug + Display + Hash + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    fn add_ref(&self, rhs: &Self) -> Self {
        self.clone() + rhs.clone()
    }

    fn sub_ref(&self, rhs: &Self) -> Self {
        self.clone() - rhs.clone()
    }

    fn mul_ref(&self, rhs: &Self) -> Self {
        self.clone() * rhs.clone()
    }

    /// Least non-negative residue modulo `m > 0`.
    fn reduce(&self, m: &Self) -> Self {
        self.mod_floor(m)
    }

    /// Whether `terms` products of residues below `p^n` can be summed without
    /// overflow.
    fn admits(p: u64, n: u32, terms: usize) -> bool;

    fn from_bigint(v: &BigInt) -> Option<Self>;

    fn to_bigint(&self) -> BigInt;

    fn from_u64_checked(v: u64) -> Option<Self> {
        Self::from_u64(v)
    }
}

fn fits_bits(p: u64, n: u32, terms: usize, bits: u32) -> bool {
    // need terms * p^(2n) < 2^bits
    let logp = (p as f64).log2();
    let need = 2.0 * (n as f64) * logp + (terms.max(1) as f64).log2();
    need + 1.0 < bits as f64
}

impl Coeff for i64 {
    fn admits(p: u64, n: u32, terms: usize) -> bool {
        fits_bits(p, n, terms, 62)
    }

    fn from_bigint(v: &BigInt) -> Option<Self> {
        v.to_i64()
    }

    fn to_bigint(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl Coeff for i128 {
    fn admits(p: u64, n: u32, terms: usize) -> bool {
        fits_bits(p, n, terms, 126)
    }

    fn from_bigint(v: &BigInt) -> Option<Self> {
        v.to_i128()
    }

    fn to_bigint(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl Coeff for BigInt {
    fn add_ref(&self, rhs: &Self) -> Self {
        self + rhs
    }

    fn sub_ref(&self, rhs: &Self) -> Self {
        self - rhs
    }

    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn reduce(&self, m: &Self) -> Self {
        let r = self % m;
        if r.is_negative() {
            r + m
        } else {
            r
        }
    }

    fn admits(_p: u64, _n: u32, _terms: usize) -> bool {
        true
    }

    fn from_bigint(v: &BigInt) -> Option<Self> {
        Some(v.clone())
    }

    fn to_bigint(&self) -> BigInt {
        self.clone()
    }
}

/// p-adic valuation of `x` if it is below `cap`; `None` for zero or when
/// the valuation reaches `cap`.
pub fn valuation_below<T: Coeff>(x: &T, p: &T, cap: u32) -> Option<u32> {
    if x.is_zero() {
        return None;
    }
    let mut v = 0;
    let mut cur = x.clone();
    while v < cap {
        let (q, r) = cur.div_rem(p);
        if !r.is_zero() {
            return Some(v);
        }
        cur = q;
        v += 1;
    }
    None
}

/// `base^exp` in the coefficient type.
pub fn pow<T: Coeff>(base: &T, exp: u32) -> T {
    let mut acc = T::one();
    let mut b = base.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.mul_ref(&b);
        }
        e >>= 1;
        if e > 0 {
            b = b.mul_ref(&b);
        }
    }
    acc
}

/// p-adic valuation of a non-zero integer; `None` for zero.
pub fn valuation_of<T: Coeff>(x: &T, p: &T) -> Option<u32> {
    if x.is_zero() {
        return None;
    }
    let mut v = 0;
    let mut cur = x.clone();
    loop {
        let (q, r) = cur.div_rem(p);
        if !r.is_zero() {
            return Some(v);
        }
        cur = q;
        v += 1;
    }
}
