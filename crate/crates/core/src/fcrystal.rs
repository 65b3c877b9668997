//! F-crystals presented by the matrix of a σ-linear map.
//!
//! Column `j` of the matrix holds the coordinates of `φ(v_j)`, so the matrix
//! of `φ^q` is `A · σ(A) · ... · σ^{q-1}(A)`. Iterates are memoized per
//! crystal.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_integer::Integer;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dvr_linalg::{
    char_poly, elementary_divisor_valuations, matrix_multiply, newton_polygon_slopes, scaled_inverse,
    sigma_twist, Slope, ValList, WMatrix,
};
use crate::error::{Error, Result};
use crate::scalar::Coeff;
use crate::witt::PrimeContext;

/// Hodge and Newton invariants of an F-crystal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlopeData {
    /// Hodge slopes `e_1 ≤ ... ≤ e_r`.
    pub hodge: ValList,
    /// `h_i = #{j : e_j = i}` for every `i` that occurs.
    pub hodge_numbers: BTreeMap<u32, usize>,
    /// Newton slopes with multiplicity, ascending.
    pub newton: Vec<Slope>,
    pub isoclinic: bool,
    /// The unique Newton slope, when isoclinic.
    pub lambda: Option<Slope>,
    /// Hodge polygon is a straight line.
    pub ordinary: bool,
}

impl SlopeData {
    pub fn from_parts(hodge: ValList, newton: Vec<Slope>) -> Self {
        let mut hodge_numbers = BTreeMap::new();
        for &e in hodge.as_slice() {
            *hodge_numbers.entry(e).or_insert(0) += 1;
        }
        let isoclinic = newton.windows(2).all(|w| w[0] == w[1]);
        let lambda = if isoclinic { newton.first().copied() } else { None };
        let ordinary = hodge.min() == hodge.max();
        SlopeData { hodge, hodge_numbers, newton, isoclinic, lambda, ordinary }
    }

    pub fn rank(&self) -> usize {
        self.hodge.len()
    }

    pub fn hodge_sum(&self) -> u64 {
        self.hodge.sum()
    }

    /// `h_i`, zero when `i` does not occur.
    pub fn hodge_number(&self, i: u32) -> usize {
        self.hodge_numbers.get(&i).copied().unwrap_or(0)
    }

    /// `Σ_{i < x} h_i`.
    pub fn count_below(&self, x: Slope) -> usize {
        self.hodge.as_slice().iter().filter(|&&e| Ratio::from_integer(e as i64) < x).count()
    }

    /// `Σ_{i > x} h_i`.
    pub fn count_above(&self, x: Slope) -> usize {
        self.hodge.as_slice().iter().filter(|&&e| Ratio::from_integer(e as i64) > x).count()
    }

    /// The same data after rescaling so that the smallest Hodge slope is 0.
    pub fn normalized(&self) -> SlopeData {
        let shift = self.hodge.min();
        let hodge = ValList::new(self.hodge.as_slice().iter().map(|e| e - shift).collect());
        let s = Ratio::from_integer(shift as i64);
        let newton = self.newton.iter().map(|l| l - s).collect();
        SlopeData::from_parts(hodge, newton)
    }

    /// Newton polygon lies on or above the Hodge polygon with equal endpoints.
    pub fn newton_above_hodge(&self) -> bool {
        let mut hs = Ratio::from_integer(0i64);
        let mut ns = Ratio::from_integer(0i64);
        for (e, l) in self.hodge.as_slice().iter().zip(&self.newton) {
            hs += Ratio::from_integer(*e as i64);
            ns += l;
            if ns < hs {
                return false;
            }
        }
        ns == hs
    }
}

/// `α_M(q)`, `β_M(q)` and their difference: the smallest and largest
/// elementary divisor valuations of `φ^q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AlphaBetaDelta {
    pub q: u64,
    pub alpha: i64,
    pub beta: i64,
    pub delta: i64,
}

impl AlphaBetaDelta {
    pub fn new(q: u64, alpha: i64, beta: i64) -> Self {
        AlphaBetaDelta { q, alpha, beta, delta: beta - alpha }
    }
}

/// A free module of rank `r` over the truncated Witt vectors with a
/// σ-linear endomorphism.
pub struct FCrystal<T: Coeff> {
    ctx: Arc<PrimeContext<T>>,
    matrix: WMatrix<T>,
    hodge: ValList,
    summands: Option<Vec<usize>>,
    iterates: Mutex<HashMap<u64, Arc<WMatrix<T>>>>,
    divisors: Mutex<HashMap<u64, ValList>>,
    slopes: OnceLock<SlopeData>,
}

impl<T: Coeff> Clone for FCrystal<T> {
    fn clone(&self) -> Self {
        let cache = self.iterates.lock().expect("iterate cache poisoned").clone();
        let divisors = self.divisors.lock().expect("divisor cache poisoned").clone();
        FCrystal {
            ctx: Arc::clone(&self.ctx),
            matrix: self.matrix.clone(),
            hodge: self.hodge.clone(),
            summands: self.summands.clone(),
            iterates: Mutex::new(cache),
            divisors: Mutex::new(divisors),
            slopes: self.slopes.clone(),
        }
    }
}

impl<T: Coeff> std::fmt::Debug for FCrystal<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FCrystal")
            .field("p", &self.ctx.p())
            .field("m", &self.ctx.degree())
            .field("precision", &self.ctx.precision())
            .field("hodge", &self.hodge)
            .field("summands", &self.summands)
            .field("matrix", &self.matrix)
            .finish()
    }
}

impl<T: Coeff> FCrystal<T> {
    /// Validates a square matrix as the matrix of an injective σ-linear map.
    pub fn new(ctx: Arc<PrimeContext<T>>, matrix: WMatrix<T>) -> Result<Self> {
        if matrix.ctx_id() != ctx.id() {
            return Err(Error::ContextMismatch);
        }
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch("crystal matrix must be square".into()));
        }
        let hodge = elementary_divisor_valuations(&ctx, &matrix)?;
        Ok(FCrystal { ctx, matrix, hodge, summands: None,
            iterates: Mutex::new(HashMap::new()),
            divisors: Mutex::new(HashMap::new()),
            slopes: OnceLock::new(),
        })
    }

    /// Declares a block-diagonal direct-sum structure with the given block sizes.
    pub fn with_summands(mut self, sizes: Vec<usize>) -> Result<Self> {
        if sizes.iter().sum::<usize>() != self.rank() || sizes.contains(&0) {
            return Err(Error::BadParameters(format!(
                "block sizes {sizes:?} do not partition rank {}",
                self.rank()
            )));
        }
        let block_of = block_index(&sizes);
        for i in 0..self.rank() {
            for j in 0..self.rank() {
                if block_of[i] != block_of[j] && !self.matrix.get(i, j).is_zero() {
                    return Err(Error::BadParameters(format!(
                        "entry ({i}, {j}) lies outside the declared blocks"
                    )));
                }
            }
        }
        self.summands = if sizes.len() > 1 { Some(sizes) } else { None };
        Ok(self)
    }

    pub fn ctx(&self) -> &Arc<PrimeContext<T>> {
        &self.ctx
    }

    pub fn matrix(&self) -> &WMatrix<T> {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.matrix.rows()
    }

    pub fn hodge(&self) -> &ValList {
        &self.hodge
    }

    /// Declared block sizes, if any.
    pub fn summand_sizes(&self) -> Option<&[usize]> {
        self.summands.as_deref()
    }

    /// The declared summands as standalone crystals (a single-element list
    /// when no structure is declared).
    pub fn summands(&self) -> Result<Vec<FCrystal<T>>> {
        let Some(sizes) = &self.summands else {
            return Ok(vec![self.clone()]);
        };
        let mut out = Vec::with_capacity(sizes.len());
        let mut start = 0;
        for &len in sizes {
            let block = self.matrix.principal_block(start, len);
            out.push(FCrystal::new(Arc::clone(&self.ctx), block)?);
            start += len;
        }
        Ok(out)
    }

    /// Precision needed to trust every elementary divisor of `φ^q`.
    pub fn precision_needed(&self, q: u64) -> u32 {
        (q * self.hodge.max() as u64 + 2).min(u32::MAX as u64) as u32
    }

    fn check_precision(&self, q: u64) -> Result<()> {
        let needed = self.precision_needed(q);
        if needed > self.ctx.precision() {
            Err(Error::PrecisionExhausted { needed, available: self.ctx.precision() })
        } else {
            Ok(())
        }
    }

    /// The matrix of `φ^q`.
    pub fn iterate_matrix(&self, q: u64) -> Result<Arc<WMatrix<T>>> {
        if q == 0 {
            return Err(Error::BadParameters("iterates start at q = 1".into()));
        }
        self.check_precision(q)?;
        self.iterate_unchecked(q)
    }

    fn cached(&self, q: u64) -> Option<Arc<WMatrix<T>>> {
        self.iterates.lock().expect("iterate cache poisoned").get(&q).cloned()
    }

    fn iterate_unchecked(&self, q: u64) -> Result<Arc<WMatrix<T>>> {
        if q == 1 {
            return Ok(Arc::new(self.matrix.clone()));
        }
        if let Some(m) = self.cached(q) {
            return Ok(m);
        }
        // φ^{a+b} = φ^a · σ^a(φ^b)
        let (a, b) = if self.cached(q - 1).is_some() || q < 4 { (q - 1, 1) } else { (q / 2, q - q / 2) };
        let left = self.iterate_unchecked(a)?;
        let right = self.iterate_unchecked(b)?;
        let twisted = sigma_twist(&self.ctx, &right, a)?;
        let prod = Arc::new(matrix_multiply(&self.ctx, &left, &twisted)?);
        let mut cache = self.iterates.lock().expect("iterate cache poisoned");
        Ok(Arc::clone(cache.entry(q).or_insert(prod)))
    }

    /// Elementary divisor valuations of `φ^q` (the Hodge slopes of the iterate).
    pub fn iterate_hodge(&self, q: u64) -> Result<ValList> {
        if let Some(v) = self.divisors.lock().expect("divisor cache poisoned").get(&q) {
            return Ok(v.clone());
        }
        let it = self.iterate_matrix(q)?;
        let vals = elementary_divisor_valuations(&self.ctx, &it).map_err(|e| match e {
            Error::SingularAtPrecision => Error::PrecisionExhausted {
                needed: self.precision_needed(q),
                available: self.ctx.precision(),
            },
            other => other,
        })?;
        self.divisors.lock().expect("divisor cache poisoned").insert(q, vals.clone());
        Ok(vals)
    }

    pub fn alpha_beta_delta(&self, q: u64) -> Result<AlphaBetaDelta> {
        let vals = self.iterate_hodge(q)?;
        Ok(AlphaBetaDelta::new(q, vals.min() as i64, vals.max() as i64))
    }

    /// `α, β, δ` for `q = 1..=upto`. The Smith reductions run in parallel.
    pub fn trace(&self, upto: u64) -> Result<Vec<AlphaBetaDelta>> {
        self.check_precision(upto)?;
        // build the chain of iterates first so workers only hit the cache
        for q in 1..=upto {
            self.iterate_unchecked(q)?;
        }
        (1..=upto).into_par_iter().map(|q| self.alpha_beta_delta(q)).collect()
    }

    /// Hodge data plus Newton slopes from the characteristic polynomial of
    /// `φ^m` (a linear map, since `σ^m = id`), divided by `m`.
    pub fn slope_data(&self) -> Result<SlopeData> {
        if let Some(sd) = self.slopes.get() {
            return Ok(sd.clone());
        }
        let m = self.ctx.degree() as u64;
        let it = self.iterate_matrix(m)?;
        let pv = char_poly(&self.ctx, &it)?;
        let newton = newton_polygon_slopes(&pv, m as u32, self.ctx.precision())?;
        Ok(self.slopes.get_or_init(|| SlopeData::from_parts(self.hodge.clone(), newton)).clone())
    }

    /// The crystal `(M, p^t φ)`; requires `t ≥ -e_1`.
    pub fn rescale(&self, t: i64) -> Result<FCrystal<T>> {
        if t == 0 {
            return Ok(self.clone());
        }
        let matrix = if t > 0 {
            self.matrix.scale_p_power(&self.ctx, t as u32)
        } else {
            let k = t.unsigned_abs() as u32;
            if k > self.hodge.min() {
                return Err(Error::NonIntegralRescale(t));
            }
            self.matrix.div_p_power(&self.ctx, k).ok_or(Error::NonIntegralRescale(t))?
        };
        let out = FCrystal::new(Arc::clone(&self.ctx), matrix)?;
        match &self.summands {
            Some(s) => out.with_summands(s.clone()),
            None => Ok(out),
        }
    }

    /// Rescaled so the smallest Hodge slope is 0.
    pub fn normalized(&self) -> Result<FCrystal<T>> {
        if self.hodge.min() == 0 {
            return Ok(self.clone());
        }
        self.rescale(-(self.hodge.min() as i64))
    }

    /// The twisted dual `(M^*, p^e φ)` of the normalized crystal, where `e`
    /// is its largest Hodge slope. Its matrix is `p^e · (A^{-1})^T`.
    pub fn dual_twisted(&self) -> Result<FCrystal<T>> {
        let base = self.normalized()?;
        let e = base.hodge.max();
        let inv = scaled_inverse(&self.ctx, &base.matrix, e)?;
        let out = FCrystal::new(Arc::clone(&self.ctx), inv.transpose())?;
        match &self.summands {
            Some(s) => out.with_summands(s.clone()),
            None => Ok(out),
        }
    }

    /// Block-diagonal sum recording the block structure.
    pub fn direct_sum(parts: &[FCrystal<T>]) -> Result<FCrystal<T>> {
        let first = parts.first().ok_or_else(|| Error::BadParameters("empty direct sum".into()))?;
        if parts.len() == 1 {
            return Ok(first.clone());
        }
        let ctx = Arc::clone(&first.ctx);
        if parts.iter().any(|c| c.ctx.id() != ctx.id()) {
            return Err(Error::ContextMismatch);
        }
        let blocks: Vec<&WMatrix<T>> = parts.iter().map(|c| &c.matrix).collect();
        let matrix = WMatrix::block_diagonal(&ctx, &blocks)?;
        let sizes = parts.iter().map(FCrystal::rank).collect();
        FCrystal::new(ctx, matrix)?.with_summands(sizes)
    }

    /// Smallest `T ≤ horizon` with `φ^T(M) = p^s M`, returned as `(T, s)`.
    pub fn detect_period(&self, horizon: u64) -> Result<Option<(u64, u64)>> {
        self.detect_period_multiple_of(horizon, 1)
    }

    /// As [`detect_period`](Self::detect_period), testing only multiples of
    /// `step`. For an isoclinic crystal of slope `a/b` every period is a
    /// multiple of `b`.
    pub fn detect_period_multiple_of(&self, horizon: u64, step: u64) -> Result<Option<(u64, u64)>> {
        for t in (step.max(1)..=horizon).step_by(step.max(1) as usize) {
            let vals = self.iterate_hodge(t)?;
            if vals.min() == vals.max() {
                return Ok(Some((t, vals.min() as u64)));
            }
        }
        Ok(None)
    }
}

fn block_index(sizes: &[usize]) -> Vec<usize> {
    sizes.iter().enumerate().flat_map(|(b, &len)| std::iter::repeat(b).take(len)).collect()
}

/// `lcm` of two positive periods.
pub fn lcm(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type C = FCrystal<BigInt>;

    fn ctx(p: u64, m: usize, n: u32) -> Arc<PrimeContext<BigInt>> {
        Arc::new(PrimeContext::new(p, m, n).unwrap())
    }

    /// φ(v_i) = p^{e_i} v_{π(i)}, 0-based π.
    fn monomial(c: &Arc<PrimeContext<BigInt>>, pi: &[usize], e: &[u32]) -> C {
        let n = pi.len();
        let mut m = WMatrix::zeros(c, n, n);
        for i in 0..n {
            m.set(pi[i], i, c.p_power(e[i]));
        }
        FCrystal::new(Arc::clone(c), m).unwrap()
    }

    fn r(a: i64, b: i64) -> Slope {
        Ratio::new(a, b)
    }

    #[test]
    fn identity_crystal() {
        let c = ctx(5, 1, 20);
        let m = FCrystal::new(Arc::clone(&c), WMatrix::identity(&c, 3)).unwrap();
        let sd = m.slope_data().unwrap();
        assert_eq!(sd.hodge.as_slice(), &[0, 0, 0]);
        assert_eq!(sd.newton, vec![r(0, 1); 3]);
        assert!(sd.isoclinic && sd.ordinary);
        assert_eq!(m.detect_period(4).unwrap(), Some((1, 0)));
    }

    #[test]
    fn zero_matrix_is_rejected() {
        let c = ctx(5, 1, 20);
        let err = FCrystal::new(Arc::clone(&c), WMatrix::zeros(&c, 2, 2)).unwrap_err();
        assert_eq!(err, Error::SingularAtPrecision);
    }

    #[test]
    fn cyclic_rank3_slopes() {
        let c = ctx(3, 1, 40);
        let m = monomial(&c, &[1, 2, 0], &[0, 1, 2]);
        let sd = m.slope_data().unwrap();
        assert_eq!(sd.hodge.as_slice(), &[0, 1, 2]);
        assert_eq!(sd.newton, vec![r(1, 1); 3]);
        assert_eq!(sd.lambda, Some(r(1, 1)));
        assert!(!sd.ordinary);
        assert_eq!(m.detect_period(10).unwrap(), Some((3, 3)));
    }

    #[test]
    fn rank2_upper_triangular_is_not_isoclinic() {
        let c = ctx(5, 1, 40);
        let a = WMatrix::from_ints(&c, &[vec![5, 1], vec![0, 25]]).unwrap();
        let m = FCrystal::new(Arc::clone(&c), a).unwrap();
        let sd = m.slope_data().unwrap();
        assert_eq!(sd.hodge.as_slice(), &[0, 3]);
        assert_eq!(sd.newton, vec![r(1, 1), r(2, 1)]);
        assert!(!sd.isoclinic);
        assert_eq!(m.detect_period(8).unwrap(), None);
    }

    #[test]
    fn iterates_of_diagonal() {
        let c = ctx(5, 1, 20);
        let m = FCrystal::new(Arc::clone(&c), WMatrix::p_power_diagonal(&c, &[1, 2])).unwrap();
        assert_eq!(*m.iterate_matrix(1).unwrap(), *m.matrix());
        assert_eq!(*m.iterate_matrix(3).unwrap(), WMatrix::p_power_diagonal(&c, &[3, 6]));
        assert!(matches!(m.iterate_matrix(10), Err(Error::PrecisionExhausted { needed: 22, .. })));
    }

    fn random_crystal(c: &Arc<PrimeContext<BigInt>>, n: usize, rng: &mut ChaCha8Rng) -> C {
        loop {
            let entries = (0..n * n)
                .map(|_| {
                    let v = rng.gen_range(0..3);
                    c.mul_p_power(&c.random_element(rng), v)
                })
                .collect();
            let a = WMatrix::from_entries(c, n, n, entries).unwrap();
            if let Ok(m) = FCrystal::new(Arc::clone(c), a) {
                if m.hodge().max() <= 6 {
                    return m;
                }
            }
        }
    }

    #[test]
    fn iterate_cocycle_identity() {
        let c = ctx(3, 2, 80);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..4 {
            let m = random_crystal(&c, 3, &mut rng);
            let fresh = m.clone();
            for q1 in 1..=4u64 {
                for q2 in 1..=4u64 {
                    if m.precision_needed(q1 + q2) > c.precision() {
                        continue;
                    }
                    let lhs = fresh.iterate_matrix(q1 + q2).unwrap();
                    let a = m.iterate_matrix(q1).unwrap();
                    let b = sigma_twist(&c, &m.iterate_matrix(q2).unwrap(), q1).unwrap();
                    assert_eq!(*lhs, matrix_multiply(&c, &a, &b).unwrap());
                }
            }
        }
    }

    #[test]
    fn alpha_beta_delta_examples() {
        let c = ctx(2, 1, 60);
        let m = monomial(&c, &[1, 0], &[0, 3]);
        assert_eq!(m.alpha_beta_delta(1).unwrap(), AlphaBetaDelta::new(1, 0, 3));
        assert_eq!(m.alpha_beta_delta(2).unwrap(), AlphaBetaDelta::new(2, 3, 3));
        let m3 = monomial(&c, &[1, 2, 0], &[0, 1, 5]);
        assert_eq!(m3.alpha_beta_delta(2).unwrap(), AlphaBetaDelta::new(2, 1, 6));
    }

    #[test]
    fn rescale_shifts_alpha_beta() {
        let c = ctx(3, 2, 80);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = random_crystal(&c, 3, &mut rng);
        assert_eq!(m.rescale(0).unwrap().matrix(), m.matrix());
        let up = m.rescale(1).unwrap();
        for q in 1..=5 {
            let a = m.alpha_beta_delta(q).unwrap();
            let b = up.alpha_beta_delta(q).unwrap();
            assert_eq!(b.alpha, a.alpha + q as i64);
            assert_eq!(b.beta, a.beta + q as i64);
            assert_eq!(b.delta, a.delta);
        }
        let back = up.rescale(-1).unwrap();
        assert_eq!(back.hodge(), m.hodge());
        let id = FCrystal::new(Arc::clone(&c), WMatrix::identity(&c, 2)).unwrap();
        assert_eq!(id.rescale(1).unwrap().hodge().as_slice(), &[1, 1]);
        assert_eq!(id.rescale(-1).unwrap_err(), Error::NonIntegralRescale(-1));
    }

    #[test]
    fn dual_of_identity_is_identity() {
        let c = ctx(5, 1, 20);
        let id = FCrystal::new(Arc::clone(&c), WMatrix::identity(&c, 3)).unwrap();
        assert_eq!(id.dual_twisted().unwrap().matrix(), id.matrix());
    }

    #[test]
    fn dual_reflects_hodge_and_alpha_beta() {
        let c = ctx(2, 2, 80);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..5 {
            let m = random_crystal(&c, 3, &mut rng).normalized().unwrap();
            let e = m.hodge().max() as i64;
            let d = m.dual_twisted().unwrap();
            let mut want: Vec<u32> = m.hodge().as_slice().iter().map(|&x| e as u32 - x).collect();
            want.sort();
            assert_eq!(d.hodge().as_slice(), want.as_slice());
            for q in 1..=4u64 {
                if m.precision_needed(q) > c.precision() {
                    break;
                }
                let a = m.alpha_beta_delta(q).unwrap();
                let b = d.alpha_beta_delta(q).unwrap();
                assert_eq!(a.alpha + b.beta, q as i64 * e);
                assert_eq!(b.alpha + a.beta, q as i64 * e);
            }
        }
    }

    #[test]
    fn direct_sum_merges_invariants() {
        let c = ctx(3, 1, 60);
        let a = monomial(&c, &[1, 0], &[0, 1]);
        let b = FCrystal::new(
            Arc::clone(&c),
            WMatrix::from_ints(&c, &[vec![3, 1], vec![0, 9]]).unwrap(),
        )
        .unwrap();
        let single = FCrystal::direct_sum(std::slice::from_ref(&a)).unwrap();
        assert_eq!(single.matrix(), a.matrix());
        assert!(single.summand_sizes().is_none());
        let s = FCrystal::direct_sum(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(s.summand_sizes(), Some(&[2, 2][..]));
        assert_eq!(s.hodge().as_slice(), &[0, 0, 1, 3]);
        let sd = s.slope_data().unwrap();
        assert_eq!(sd.newton, vec![r(1, 2), r(1, 2), r(1, 1), r(2, 1)]);
        let parts = s.summands().unwrap();
        assert_eq!(parts[1].matrix(), b.matrix());
    }

    #[test]
    fn summands_must_match_block_structure() {
        let c = ctx(3, 1, 20);
        let a = WMatrix::from_ints(&c, &[vec![3, 1], vec![0, 9]]).unwrap();
        let m = FCrystal::new(Arc::clone(&c), a).unwrap();
        assert!(m.clone().with_summands(vec![1, 1]).is_err());
        assert!(m.with_summands(vec![3]).is_err());
    }

    #[test]
    fn slope_data_invariants_on_random_crystals() {
        let c = ctx(5, 2, 120);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..6 {
            let m = random_crystal(&c, 3, &mut rng);
            let sd = m.slope_data().unwrap();
            assert!(sd.newton_above_hodge(), "{sd:?}");
            let total: i64 = sd.hodge.as_slice().iter().map(|&e| e as i64).sum();
            let nsum: Slope = sd.newton.iter().sum();
            assert_eq!(nsum, Ratio::from_integer(total));
        }
    }
}
