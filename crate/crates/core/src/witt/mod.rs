//! Truncated Witt vectors `W(F_{p^m}) / p^N` with the Frobenius automorphism.
//!
//! The ring is modelled as `(Z / p^N)[x] / (f)` where `f` is a monic lift of
//! the first irreducible polynomial of degree `m` over `F_p`. Elements are
//! kept in canonical form: `m` coefficients, each in `[0, p^N)`.

mod fp;

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{self, Coeff};

static NEXT_CONTEXT_ID: AtomicU64 = AtomicU64::new(1);

/// p-adic valuation of a truncated element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Valuation {
    /// `p^v` times a unit, with `v < N`.
    Exact(u32),
    /// Indistinguishable from zero at precision `N`.
    AtLeast(u32),
}

impl Valuation {
    pub fn exact(self) -> Option<u32> {
        match self {
            Valuation::Exact(v) => Some(v),
            Valuation::AtLeast(_) => None,
        }
    }

    /// Lower bound usable for ordering; `AtLeast(N)` sorts after every exact value.
    pub fn floor(self) -> u32 {
        match self {
            Valuation::Exact(v) | Valuation::AtLeast(v) => v,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Valuation::Exact(_))
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let key = |v: &Valuation| match *v {
            Valuation::Exact(x) => (x, 0u8),
            Valuation::AtLeast(x) => (x, 1u8),
        };
        key(self).cmp(&key(other))
    }
}

/// An element of `W(F_{p^m})` known modulo `p^N`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct WittApprox<T: Coeff> {
    coeffs: Vec<T>,
    ctx_id: u64,
}

impl<T: Coeff> WittApprox<T> {
    /// Coefficients of the representing polynomial in `x`, lowest degree first.
    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn ctx_id(&self) -> u64 {
        self.ctx_id
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }
}

impl<T: Coeff> fmt::Debug for WittApprox<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.len() == 1 {
            write!(f, "{}", self.coeffs[0])
        } else {
            write!(f, "{:?}", self.coeffs)
        }
    }
}

/// The computational model of `W(F_{p^m})` at precision `p^N`.
#[derive(Debug)]
pub struct PrimeContext<T: Coeff> {
    id: u64,
    p: u64,
    m: usize,
    precision: u32,
    prime: T,
    p_to_n: T,
    /// Monic, `m + 1` coefficients.
    modulus: Vec<T>,
    frob_image: Vec<T>,
    /// `sigma_tables[k][i]` holds `σ^k(x^i)` for `0 ≤ k < m`.
    sigma_tables: Vec<Vec<Vec<T>>>,
}

impl<T: Coeff> PrimeContext<T> {
    /// Builds the model of `W(F_{p^m}) / p^N`.
    ///
    /// The modulus is the first monic irreducible polynomial of degree `m`
    /// over `F_p` (coefficients in `[0, p)`, ordered from `x^{m-1}` down to
    /// the constant term); the Frobenius image of `x` is the root of the
    /// modulus congruent to `x^p` mod `p`, found by Newton iteration.
    pub fn new(p: u64, m: usize, precision: u32) -> Result<Self> {
        if !fp::is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if m == 0 {
            return Err(Error::BadParameters("residue degree m must be at least 1".into()));
        }
        if precision == 0 {
            return Err(Error::BadParameters("precision N must be at least 1".into()));
        }
        if !T::admits(p, precision, 2 * m + 2) {
            return Err(Error::CoefficientOverflow { p, precision });
        }
        let prime = T::from_u64_checked(p).ok_or(Error::CoefficientOverflow { p, precision })?;
        let p_to_n = scalar::pow(&prime, precision);
        let modulus_fp = fp::first_irreducible(m, p);
        let modulus = modulus_fp
            .iter()
            .map(|&c| T::from_u64(c).expect("residue below p"))
            .collect();
        let mut ctx = PrimeContext {
            id: NEXT_CONTEXT_ID.fetch_add(1, Ordering::Relaxed),
            p,
            m,
            precision,
            prime,
            p_to_n,
            modulus,
            frob_image: Vec::new(),
            sigma_tables: Vec::new(),
        };
        ctx.frob_image = ctx.lift_frobenius(&modulus_fp)?;
        ctx.sigma_tables = ctx.build_sigma_tables();
        Ok(ctx)
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn prime(&self) -> &T {
        &self.prime
    }

    /// Residue-field degree `m`.
    pub fn degree(&self) -> usize {
        self.m
    }

    /// Number of trusted p-adic digits `N`.
    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// `p^N`.
    pub fn p_to_n(&self) -> &T {
        &self.p_to_n
    }

    /// Monic modulus coefficients, lowest degree first (length `m + 1`).
    pub fn modulus(&self) -> &[T] {
        &self.modulus
    }

    pub fn frob_image(&self) -> &[T] {
        &self.frob_image
    }

    /// Human-readable modulus, e.g. `x^2 + x + 1`.
    pub fn modulus_string(&self) -> String {
        let mut terms = Vec::new();
        for (i, c) in self.modulus.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "x".to_string(),
                _ => format!("x^{i}"),
            };
            let term = if mono.is_empty() {
                c.to_string()
            } else if c.is_one() {
                mono
            } else {
                format!("{c}*{mono}")
            };
            terms.push(term);
        }
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }

    fn element(&self, coeffs: Vec<T>) -> WittApprox<T> {
        WittApprox { coeffs, ctx_id: self.id }
    }

    pub fn zero(&self) -> WittApprox<T> {
        self.element(vec![T::zero(); self.m])
    }

    pub fn one(&self) -> WittApprox<T> {
        self.from_int(1)
    }

    pub fn from_int(&self, v: i64) -> WittApprox<T> {
        let c = T::from_i64(v).expect("i64 fits every coefficient type");
        let mut coeffs = vec![T::zero(); self.m];
        coeffs[0] = c.reduce(&self.p_to_n);
        self.element(coeffs)
    }

    /// The element `x` (the generator of the residue extension).
    pub fn generator(&self) -> WittApprox<T> {
        let mut coeffs = vec![T::zero(); self.m + 1];
        coeffs[1] = T::one();
        self.from_coeffs(coeffs)
    }

    /// Canonical element from arbitrary integer coefficients of a polynomial
    /// in `x` (any length; reduced modulo the modulus and `p^N`).
    pub fn from_coeffs(&self, coeffs: Vec<T>) -> WittApprox<T> {
        self.element(self.reduce_poly(coeffs))
    }

    /// `p^k` (zero when `k ≥ N`).
    pub fn p_power(&self, k: u32) -> WittApprox<T> {
        let mut coeffs = vec![T::zero(); self.m];
        if k < self.precision {
            coeffs[0] = scalar::pow(&self.prime, k);
        }
        self.element(coeffs)
    }

    fn check(&self, a: &WittApprox<T>) -> Result<()> {
        if a.ctx_id == self.id {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }

    fn reduce_poly(&self, mut c: Vec<T>) -> Vec<T> {
        let m = self.m;
        for v in c.iter_mut() {
            *v = v.reduce(&self.p_to_n);
        }
        while c.len() > m {
            let top = c.pop().unwrap();
            if top.is_zero() {
                continue;
            }
            let shift = c.len() - m;
            for j in 0..m {
                let t = top.mul_ref(&self.modulus[j]);
                c[shift + j] = c[shift + j].sub_ref(&t).reduce(&self.p_to_n);
            }
        }
        c.resize(m, T::zero());
        c
    }

    pub fn add(&self, a: &WittApprox<T>, b: &WittApprox<T>) -> Result<WittApprox<T>> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.add_unchecked(a, b))
    }

    pub fn sub(&self, a: &WittApprox<T>, b: &WittApprox<T>) -> Result<WittApprox<T>> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.sub_unchecked(a, b))
    }

    pub fn mul(&self, a: &WittApprox<T>, b: &WittApprox<T>) -> Result<WittApprox<T>> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul_unchecked(a, b))
    }

    pub fn neg(&self, a: &WittApprox<T>) -> WittApprox<T> {
        let coeffs = a.coeffs.iter().map(|c| (-c.clone()).reduce(&self.p_to_n)).collect();
        self.element(coeffs)
    }

    pub(crate) fn add_unchecked(&self, a: &WittApprox<T>, b: &WittApprox<T>) -> WittApprox<T> {
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| {
                let s = x.add_ref(y);
                if s >= self.p_to_n {
                    s.sub_ref(&self.p_to_n)
                } else {
                    s
                }
            })
            .collect();
        self.element(coeffs)
    }

    pub(crate) fn sub_unchecked(&self, a: &WittApprox<T>, b: &WittApprox<T>) -> WittApprox<T> {
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| {
                let s = x.sub_ref(y);
                if s.is_negative() {
                    s.add_ref(&self.p_to_n)
                } else {
                    s
                }
            })
            .collect();
        self.element(coeffs)
    }

    pub(crate) fn mul_unchecked(&self, a: &WittApprox<T>, b: &WittApprox<T>) -> WittApprox<T> {
        if self.m == 1 {
            let c = a.coeffs[0].mul_ref(&b.coeffs[0]).reduce(&self.p_to_n);
            return self.element(vec![c]);
        }
        let mut prod = vec![T::zero(); 2 * self.m - 1];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                prod[i + j] = prod[i + j].add_ref(&x.mul_ref(y)).reduce(&self.p_to_n);
            }
        }
        self.element(self.reduce_poly(prod))
    }

    /// `a · p^k`.
    pub fn mul_p_power(&self, a: &WittApprox<T>, k: u32) -> WittApprox<T> {
        if k == 0 {
            return a.clone();
        }
        let pk = scalar::pow(&self.prime, k.min(self.precision));
        let coeffs = a.coeffs.iter().map(|c| c.mul_ref(&pk).reduce(&self.p_to_n)).collect();
        self.element(coeffs)
    }

    /// `σ^k(a)`; `k` is reduced modulo `m`.
    pub fn frobenius_power(&self, a: &WittApprox<T>, k: u64) -> Result<WittApprox<T>> {
        self.check(a)?;
        Ok(self.frobenius_unchecked(a, k))
    }

    pub(crate) fn frobenius_unchecked(&self, a: &WittApprox<T>, k: u64) -> WittApprox<T> {
        let k = (k % self.m as u64) as usize;
        if k == 0 {
            return a.clone();
        }
        let table = &self.sigma_tables[k];
        let mut out = vec![T::zero(); self.m];
        for (i, c) in a.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (o, t) in out.iter_mut().zip(&table[i]) {
                *o = o.add_ref(&c.mul_ref(t)).reduce(&self.p_to_n);
            }
        }
        self.element(out)
    }

    pub fn valuation(&self, a: &WittApprox<T>) -> Valuation {
        a.coeffs
            .iter()
            .filter_map(|c| scalar::valuation_of(c, &self.prime))
            .min()
            .map(Valuation::Exact)
            .unwrap_or(Valuation::AtLeast(self.precision))
    }

    /// Valuation of `a` if it is strictly below `cap`.
    pub fn valuation_below(&self, a: &WittApprox<T>, cap: u32) -> Option<u32> {
        let mut best: Option<u32> = None;
        for c in &a.coeffs {
            let bound = best.unwrap_or(cap);
            if let Some(v) = scalar::valuation_below(c, &self.prime, bound) {
                best = Some(v);
                if v == 0 {
                    break;
                }
            }
        }
        best
    }

    /// Whether `a` is a unit (valuation 0).
    pub fn is_unit(&self, a: &WittApprox<T>) -> bool {
        a.coeffs.iter().any(|c| !c.is_multiple_of(&self.prime))
    }

    /// `a / p^k` for `a` with valuation at least `k`. The result is only
    /// determined modulo `p^{N-k}`; its canonical lift is returned.
    pub fn div_p_power(&self, a: &WittApprox<T>, k: u32) -> WittApprox<T> {
        if k == 0 {
            return a.clone();
        }
        let pk = scalar::pow(&self.prime, k);
        let coeffs = a
            .coeffs
            .iter()
            .map(|c| {
                let (q, r) = c.div_rem(&pk);
                debug_assert!(r.is_zero(), "div_p_power: valuation below {k}");
                q
            })
            .collect();
        self.element(coeffs)
    }

    fn reduce_mod_p(&self, a: &WittApprox<T>) -> Vec<u64> {
        fp::trim(
            a.coeffs
                .iter()
                .map(|c| c.reduce(&self.prime).to_u64().expect("residue below p"))
                .collect(),
        )
    }

    fn modulus_mod_p(&self) -> Vec<u64> {
        self.modulus.iter().map(|c| c.to_u64().expect("modulus digit")).collect()
    }

    fn lift_fp(&self, c: &[u64]) -> WittApprox<T> {
        let coeffs = c.iter().map(|&v| T::from_u64(v).expect("residue below p")).collect();
        self.from_coeffs(coeffs)
    }

    /// Inverse of a unit, by inversion in `F_{p^m}` followed by Newton lifting.
    pub fn unit_inverse(&self, a: &WittApprox<T>) -> Result<WittApprox<T>> {
        self.check(a)?;
        let f = self.modulus_mod_p();
        let abar = self.reduce_mod_p(a);
        let binv = fp::inv_mod(&abar, &f, self.p)
            .ok_or_else(|| Error::BadParameters("element is not a unit".into()))?;
        let mut b = self.lift_fp(&binv);
        let two = self.from_int(2);
        let mut correct = 1u32;
        while correct < self.precision {
            let ab = self.mul_unchecked(a, &b);
            b = self.mul_unchecked(&b, &self.sub_unchecked(&two, &ab));
            correct = correct.saturating_mul(2);
        }
        debug_assert_eq!(self.mul_unchecked(a, &b), self.one());
        Ok(b)
    }

    fn eval_modulus(&self, y: &WittApprox<T>) -> WittApprox<T> {
        // Horner
        let mut acc = self.zero();
        for c in self.modulus.iter().rev() {
            acc = self.mul_unchecked(&acc, y);
            acc = self.add_unchecked(&acc, &self.from_coeffs(vec![c.clone()]));
        }
        acc
    }

    fn eval_modulus_derivative(&self, y: &WittApprox<T>) -> WittApprox<T> {
        let mut acc = self.zero();
        for (i, c) in self.modulus.iter().enumerate().skip(1).rev() {
            acc = self.mul_unchecked(&acc, y);
            let k = T::from_usize(i).expect("small index").mul_ref(c);
            acc = self.add_unchecked(&acc, &self.from_coeffs(vec![k]));
        }
        acc
    }

    fn lift_frobenius(&self, f: &[u64]) -> Result<Vec<T>> {
        let x_p = fp::powmod(&[0, 1], self.p as u128, f, self.p);
        let mut y = self.lift_fp(&x_p);
        for _ in 0..64 {
            let fy = self.eval_modulus(&y);
            if fy.is_zero() {
                return Ok(y.coeffs);
            }
            let dfy = self.eval_modulus_derivative(&y);
            let inv = self
                .unit_inverse(&dfy)
                .map_err(|_| Error::HenselFailure("derivative of modulus is not a unit".into()))?;
            y = self.sub_unchecked(&y, &self.mul_unchecked(&fy, &inv));
        }
        Err(Error::HenselFailure("Newton iteration did not converge".into()))
    }

    /// Substitutes `image` for `x` in `a`.
    fn substitute(&self, a: &[T], image: &WittApprox<T>) -> WittApprox<T> {
        let mut acc = self.zero();
        for c in a.iter().rev() {
            acc = self.mul_unchecked(&acc, image);
            acc = self.add_unchecked(&acc, &self.from_coeffs(vec![c.clone()]));
        }
        acc
    }

    fn build_sigma_tables(&self) -> Vec<Vec<Vec<T>>> {
        let frob = self.element(self.frob_image.clone());
        let mut tables = Vec::with_capacity(self.m);
        // σ^k(x) for k = 0..m
        let mut image = self.generator();
        for _ in 0..self.m {
            let mut row = Vec::with_capacity(self.m);
            let mut pw = self.one();
            for _ in 0..self.m {
                row.push(pw.coeffs.clone());
                pw = self.mul_unchecked(&pw, &image);
            }
            tables.push(row);
            image = self.substitute(&image.coeffs, &frob);
        }
        tables
    }

    /// Uniform element drawn digit by digit.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> WittApprox<T> {
        let coeffs = (0..self.m).map(|_| self.random_residue(rng)).collect();
        self.element(coeffs)
    }

    /// Uniform unit.
    pub fn random_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> WittApprox<T> {
        loop {
            let a = self.random_element(rng);
            if self.is_unit(&a) {
                return a;
            }
        }
    }

    fn random_residue<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let mut acc = T::zero();
        for _ in 0..self.precision {
            let d = T::from_u64(rng.gen_range(0..self.p)).expect("digit below p");
            acc = acc.mul_ref(&self.prime).add_ref(&d);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ints(v: &[i64]) -> Vec<i64> {
        v.to_vec()
    }

    #[test]
    fn m1_context_has_identity_frobenius() {
        let ctx = PrimeContext::<i64>::new(5, 1, 8).unwrap();
        assert_eq!(ctx.modulus(), &[0, 1]);
        assert_eq!(ctx.modulus_string(), "x");
        let a = ctx.from_int(123);
        for k in 0..5 {
            assert_eq!(ctx.frobenius_power(&a, k).unwrap(), a);
        }
    }

    #[test]
    fn frob_image_reduces_to_x_pow_p() {
        let ctx = PrimeContext::<i64>::new(2, 2, 10).unwrap();
        let f = ctx.frob_image();
        // x^2 mod (x^2 + x + 1, 2) = x + 1
        let reduced: Vec<i64> = f.iter().map(|c| c.rem_euclid(2)).collect();
        assert_eq!(reduced, ints(&[1, 1]));
        let x = ctx.generator();
        let fx = ctx.frobenius_power(&x, 1).unwrap();
        let x2 = ctx.mul(&x, &x).unwrap();
        let diff = ctx.sub(&fx, &x2).unwrap();
        assert!(ctx.valuation(&diff).floor() >= 1);
    }

    #[test]
    fn frobenius_squared_is_identity_for_m2() {
        // substitute frob_image into itself and reduce
        let ctx = PrimeContext::<i64>::new(3, 2, 6).unwrap();
        let y = ctx.element(ctx.frob_image().to_vec());
        let yy = ctx.substitute(ctx.frob_image(), &y);
        assert_eq!(yy, ctx.generator());
        // and the modulus vanishes at the image
        assert!(ctx.eval_modulus(&y).is_zero());
    }

    #[test]
    fn frobenius_has_order_m() {
        let ctx = PrimeContext::<i128>::new(2, 3, 20).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let a = ctx.random_element(&mut rng);
            assert_eq!(ctx.frobenius_power(&a, 3).unwrap(), a);
            let s1 = ctx.frobenius_power(&a, 1).unwrap();
            let s2 = ctx.frobenius_power(&s1, 1).unwrap();
            assert_eq!(s2, ctx.frobenius_power(&a, 2).unwrap());
            assert_ne!(s1, a, "σ is not the identity on random elements");
        }
    }

    #[test]
    fn arithmetic_examples() {
        let ctx = PrimeContext::<i64>::new(5, 1, 8).unwrap();
        let seven = ctx.from_int(7);
        assert_eq!(ctx.mul(&seven, &seven).unwrap(), ctx.from_int(49));
        assert_eq!(ctx.mul(&seven, &ctx.one()).unwrap(), seven);
        assert_eq!(ctx.valuation(&ctx.from_int(25)), Valuation::Exact(2));
        assert_eq!(ctx.valuation(&ctx.zero()), Valuation::AtLeast(8));
        assert_eq!(ctx.from_int(-1).coeffs(), &[390_624]);
    }

    #[test]
    fn x_squared_reduces_by_modulus() {
        // x^2 ≡ -x - 1 mod x^2 + x + 1, i.e. coefficients (p^N - 1, p^N - 1)
        let ctx = PrimeContext::<i64>::new(2, 2, 10).unwrap();
        let x = ctx.generator();
        let x2 = ctx.mul(&x, &x).unwrap();
        assert_eq!(x2.coeffs(), &[1023, 1023]);
    }

    #[test]
    fn valuation_of_mixed_element() {
        let ctx = PrimeContext::<i64>::new(3, 2, 6).unwrap();
        let a = ctx.from_coeffs(vec![9, 3]);
        assert_eq!(ctx.valuation(&a), Valuation::Exact(1));
    }

    #[test]
    fn context_mismatch_is_reported() {
        let c1 = PrimeContext::<i64>::new(5, 1, 4).unwrap();
        let c2 = PrimeContext::<i64>::new(5, 1, 4).unwrap();
        let a = c1.one();
        let b = c2.one();
        assert_eq!(c1.add(&a, &b), Err(Error::ContextMismatch));
    }

    #[test]
    fn bad_contexts() {
        assert_eq!(PrimeContext::<i64>::new(4, 1, 5).unwrap_err(), Error::NotPrime(4));
        assert!(matches!(
            PrimeContext::<i64>::new(5, 1, 30).unwrap_err(),
            Error::CoefficientOverflow { .. }
        ));
        assert!(PrimeContext::<BigInt>::new(5, 1, 300).is_ok());
    }

    #[test]
    fn unit_inverse_round_trip() {
        let ctx = PrimeContext::<BigInt>::new(7, 3, 25).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..5 {
            let u = ctx.random_unit(&mut rng);
            let inv = ctx.unit_inverse(&u).unwrap();
            assert_eq!(ctx.mul(&u, &inv).unwrap(), ctx.one());
        }
        assert!(ctx.unit_inverse(&ctx.p_power(1)).is_err());
    }

    #[test]
    fn div_p_power_inverts_mul() {
        let ctx = PrimeContext::<i64>::new(3, 2, 8).unwrap();
        let a = ctx.from_coeffs(vec![5, 7]);
        let b = ctx.mul_p_power(&a, 3);
        assert_eq!(ctx.valuation(&b), Valuation::Exact(3));
        let back = ctx.div_p_power(&b, 3);
        // equal modulo p^(N-3)
        let diff = ctx.sub(&back, &a).unwrap();
        assert!(ctx.valuation(&diff).floor() >= 5);
    }
}
