//! Constructors for the explicit families: permutational and cyclic
//! crystals, K3-type crystals, rank-2 crystals and supersingular-like
//! crystals, plus the combinatorial oracles that go with them.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dvr_linalg::{matrix_multiply, WMatrix};
use crate::error::{Error, Result};
use crate::fcrystal::{AlphaBetaDelta, FCrystal};
use crate::scalar::Coeff;
use crate::witt::PrimeContext;

/// A permutation `π` of `{1, ..., r}` together with sorted exponents `e`,
/// describing `φ(v_i) = p^{e_i} v_{π(i)}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PermSpec {
    pi: Vec<usize>,
    e: Vec<u32>,
}

impl PermSpec {
    /// `pi` is one-based: `pi[i - 1] = π(i)`.
    pub fn new(pi: Vec<usize>, e: Vec<u32>) -> Result<Self> {
        let r = pi.len();
        if r == 0 || e.len() != r {
            return Err(Error::BadParameters(format!("permutation of length {r} with {} exponents", e.len())));
        }
        let mut seen = vec![false; r];
        for &x in &pi {
            if x == 0 || x > r || seen[x - 1] {
                return Err(Error::BadParameters(format!("{pi:?} is not a permutation of 1..={r}")));
            }
            seen[x - 1] = true;
        }
        if e.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::BadParameters(format!("exponents {e:?} are not sorted")));
        }
        Ok(PermSpec { pi, e })
    }

    /// The full cycle `(1 2 ... r)` with the given (sorted) exponents.
    pub fn full_cycle(e: Vec<u32>) -> Result<Self> {
        let r = e.len();
        PermSpec::new((1..=r).map(|i| i % r + 1).collect(), e)
    }

    pub fn rank(&self) -> usize {
        self.pi.len()
    }

    pub fn pi(&self) -> &[usize] {
        &self.pi
    }

    pub fn e(&self) -> &[u32] {
        &self.e
    }

    /// Cycles as lists of zero-based indices, each starting at its smallest
    /// element, ordered by that element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let r = self.rank();
        let mut seen = vec![false; r];
        let mut out = Vec::new();
        for start in 0..r {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cycle.push(i);
                i = self.pi[i] - 1;
            }
            out.push(cycle);
        }
        out
    }

    pub fn is_single_cycle(&self) -> bool {
        self.cycles().len() == 1
    }
}

/// `φ(v_i) = p^{exps[i]} v_{targets[i]}` with zero-based targets and
/// exponents in any order.
pub fn make_monomial<T: Coeff>(ctx: &Arc<PrimeContext<T>>, targets: &[usize], exps: &[u32]) -> Result<FCrystal<T>> {
    let r = targets.len();
    if exps.len() != r {
        return Err(Error::DimensionMismatch("one exponent per basis vector".into()));
    }
    let mut m = WMatrix::zeros(ctx, r, r);
    for (i, (&t, &e)) in targets.iter().zip(exps).enumerate() {
        if t >= r {
            return Err(Error::BadParameters(format!("target {t} out of range")));
        }
        m.set(t, i, ctx.p_power(e));
    }
    FCrystal::new(Arc::clone(ctx), m)
}

/// The crystal `φ(v_i) = p^{e_i} v_{π(i)}`.
pub fn make_permutational<T: Coeff>(ctx: &Arc<PrimeContext<T>>, spec: &PermSpec) -> Result<FCrystal<T>> {
    let targets: Vec<usize> = spec.pi.iter().map(|&x| x - 1).collect();
    make_monomial(ctx, &targets, &spec.e)
}

/// The permutational crystal split along the cycles of `π`, one cyclic
/// summand per cycle (in the order of [`PermSpec::cycles`]).
pub fn permutational_summands<T: Coeff>(ctx: &Arc<PrimeContext<T>>, spec: &PermSpec) -> Result<Vec<FCrystal<T>>> {
    spec.cycles()
        .into_iter()
        .map(|cycle| {
            let len = cycle.len();
            let targets: Vec<usize> = (0..len).map(|k| (k + 1) % len).collect();
            let exps: Vec<u32> = cycle.iter().map(|&i| spec.e[i]).collect();
            make_monomial(ctx, &targets, &exps)
        })
        .collect()
}

/// The same crystal as [`make_permutational`], rearranged into cycle blocks
/// with the block structure declared.
pub fn make_permutational_sum<T: Coeff>(ctx: &Arc<PrimeContext<T>>, spec: &PermSpec) -> Result<FCrystal<T>> {
    FCrystal::direct_sum(&permutational_summands(ctx, spec)?)
}

/// `α`, `β`, `δ` of `φ^q` for a cyclic crystal, read off from the window
/// sums `e_l + e_{π(l)} + ... + e_{π^{q-1}(l)}`.
pub fn cyclic_window_oracle(spec: &PermSpec, q: u64) -> Result<AlphaBetaDelta> {
    if !spec.is_single_cycle() {
        return Err(Error::NotACycle);
    }
    if q == 0 {
        return Err(Error::BadParameters("q must be positive".into()));
    }
    let (mut lo, mut hi) = (i64::MAX, i64::MIN);
    for start in 0..spec.rank() {
        let mut i = start;
        let mut sum = 0i64;
        for _ in 0..q {
            sum += spec.e[i] as i64;
            i = spec.pi[i] - 1;
        }
        lo = lo.min(sum);
        hi = hi.max(sum);
    }
    Ok(AlphaBetaDelta::new(q, lo, hi))
}

/// `Σ_{i ≤ ⌊r/2⌋} (e_{r-i+1} − e_i)`.
pub fn permutational_closed_bound(e: &[u32]) -> u64 {
    let mut e = e.to_vec();
    e.sort_unstable();
    let r = e.len();
    (0..r / 2).map(|i| (e[r - 1 - i] - e[i]) as u64).sum()
}

/// Full cycle of rank `2d` with exponents `(0^d, e^d)`: isoclinic of slope
/// `e/2` with `n_M = de`.
pub fn make_supersingular_like<T: Coeff>(ctx: &Arc<PrimeContext<T>>, d: usize, e: u32) -> Result<FCrystal<T>> {
    if d == 0 || e == 0 {
        return Err(Error::BadParameters("need d ≥ 1 and e ≥ 1".into()));
    }
    let exps: Vec<u32> = std::iter::repeat(0).take(d).chain(std::iter::repeat(e).take(d)).collect();
    make_permutational(ctx, &PermSpec::full_cycle(exps)?)
}

/// Full cycle with exponents `(0, 1, ..., 1, 2)`: isoclinic K3 type of
/// slope 1.
pub fn make_k3_isoclinic<T: Coeff>(ctx: &Arc<PrimeContext<T>>, r: usize) -> Result<FCrystal<T>> {
    if r < 3 {
        return Err(Error::RankTooSmall(r));
    }
    let mut exps = vec![1u32; r];
    exps[0] = 0;
    exps[r - 1] = 2;
    make_permutational(ctx, &PermSpec::full_cycle(exps)?)
}

/// Non-isoclinic K3 type as a declared sum of three blocks:
/// `x_i ↦ p x_{i+1}`, `x_{r1+1} ↦ x_1`; `y_i ↦ p y_i` (rank `mid`, omitted when
/// 0); `z_i ↦ p z_{i+1}`, `z_{r2+1} ↦ p² z_1`.
pub fn make_k3_nonisoclinic<T: Coeff>(
    ctx: &Arc<PrimeContext<T>>,
    r1: usize,
    mid: usize,
    r2: usize,
) -> Result<FCrystal<T>> {
    FCrystal::direct_sum(&k3_nonisoclinic_blocks(ctx, r1, mid, r2)?)
}

/// The isoclinic blocks of [`make_k3_nonisoclinic`].
pub fn k3_nonisoclinic_blocks<T: Coeff>(
    ctx: &Arc<PrimeContext<T>>,
    r1: usize,
    mid: usize,
    r2: usize,
) -> Result<Vec<FCrystal<T>>> {
    if r1 == 0 || r2 == 0 {
        return Err(Error::BadParameters("need r1 ≥ 1 and r2 ≥ 1".into()));
    }
    let cycle = |n: usize| -> Vec<usize> { (0..n).map(|k| (k + 1) % n).collect() };
    let mut blocks = Vec::with_capacity(3);
    let mut e1 = vec![1u32; r1 + 1];
    e1[r1] = 0;
    blocks.push(make_monomial(ctx, &cycle(r1 + 1), &e1)?);
    if mid > 0 {
        blocks.push(FCrystal::new(Arc::clone(ctx), WMatrix::p_power_diagonal(ctx, &vec![1; mid]))?);
    }
    let mut e3 = vec![1u32; r2 + 1];
    e3[r2] = 2;
    blocks.push(make_monomial(ctx, &cycle(r2 + 1), &e3)?);
    Ok(blocks)
}

/// The unit used by [`make_rank2`] for a given seed: drawn from a ChaCha8
/// stream seeded with `seed`.
pub fn seeded_unit<T: Coeff>(ctx: &PrimeContext<T>, seed: u64) -> crate::witt::WittApprox<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ctx.random_unit(&mut rng)
}

/// `[[p^{l1}, u], [0, p^{l2}]]` with `u` a seeded unit, `0 < l1 < l2`.
pub fn make_rank2<T: Coeff>(ctx: &Arc<PrimeContext<T>>, l1: u32, l2: u32, unit_seed: u64) -> Result<FCrystal<T>> {
    if l1 == 0 {
        return Err(Error::BadParameters(
            "l1 = 0 is the split case; build the direct sum of two rank-1 crystals instead".into(),
        ));
    }
    if l1 >= l2 {
        return Err(Error::BadParameters(format!("need l1 < l2, got {l1} and {l2}")));
    }
    let mut m = WMatrix::zeros(ctx, 2, 2);
    m.set(0, 0, ctx.p_power(l1));
    m.set(0, 1, seeded_unit(ctx, unit_seed));
    m.set(1, 1, ctx.p_power(l2));
    FCrystal::new(Arc::clone(ctx), m)
}

/// The rank-1 crystal `φ(v) = p^e v`.
pub fn make_rank1<T: Coeff>(ctx: &Arc<PrimeContext<T>>, e: u32) -> Result<FCrystal<T>> {
    make_monomial(ctx, &[0], &[e])
}

fn random_unimodular<T: Coeff, R: rand::Rng>(ctx: &PrimeContext<T>, r: usize, rng: &mut R) -> Result<WMatrix<T>> {
    loop {
        let entries = (0..r * r).map(|_| ctx.random_element(rng)).collect();
        let u = WMatrix::from_entries(ctx, r, r, entries)?;
        if crate::dvr_linalg::elementary_divisor_valuations(ctx, &u).is_ok_and(|v| v.max() == 0) {
            return Ok(u);
        }
    }
}

/// `U · diag(p^{e_i}) · V` with random invertible `U`, `V`: a generic crystal
/// with the given Hodge slopes.
pub fn random_with_hodge<T: Coeff, R: rand::Rng>(
    ctx: &Arc<PrimeContext<T>>,
    hodge: &[u32],
    rng: &mut R,
) -> Result<FCrystal<T>> {
    let r = hodge.len();
    let u = random_unimodular(ctx, r, rng)?;
    let v = random_unimodular(ctx, r, rng)?;
    let d = WMatrix::p_power_diagonal(ctx, hodge);
    let a = matrix_multiply(ctx, &matrix_multiply(ctx, &u, &d)?, &v)?;
    FCrystal::new(Arc::clone(ctx), a)
}

/// A named family with its parameters; the unit seed only matters for
/// `Rank2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Family {
    Permutational { pi: Vec<usize>, e: Vec<u32> },
    Cyclic { e: Vec<u32> },
    K3Isoclinic { r: usize },
    K3Nonisoclinic { r1: usize, mid: usize, r2: usize },
    Rank2 { l1: u32, l2: u32, seed: u64 },
    Supersingular { d: usize, e: u32 },
}

impl Family {
    pub fn rank(&self) -> usize {
        match self {
            Family::Permutational { pi, .. } => pi.len(),
            Family::Cyclic { e } => e.len(),
            Family::K3Isoclinic { r } => *r,
            Family::K3Nonisoclinic { r1, mid, r2 } => r1 + mid + r2 + 2,
            Family::Rank2 { .. } => 2,
            Family::Supersingular { d, .. } => 2 * d,
        }
    }

    /// Largest Hodge slope of the constructed crystal.
    pub fn max_hodge(&self) -> u32 {
        match self {
            Family::Permutational { e, .. } | Family::Cyclic { e } => e.iter().copied().max().unwrap_or(0),
            Family::K3Isoclinic { .. } | Family::K3Nonisoclinic { .. } => 2,
            Family::Rank2 { l1, l2, .. } => l1 + l2,
            Family::Supersingular { e, .. } => *e,
        }
    }

    pub fn build<T: Coeff>(&self, ctx: &Arc<PrimeContext<T>>) -> Result<FCrystal<T>> {
        match self {
            Family::Permutational { pi, e } => make_permutational(ctx, &PermSpec::new(pi.clone(), e.clone())?),
            Family::Cyclic { e } => make_permutational(ctx, &PermSpec::full_cycle(e.clone())?),
            Family::K3Isoclinic { r } => make_k3_isoclinic(ctx, *r),
            Family::K3Nonisoclinic { r1, mid, r2 } => make_k3_nonisoclinic(ctx, *r1, *mid, *r2),
            Family::Rank2 { l1, l2, seed } => make_rank2(ctx, *l1, *l2, *seed),
            Family::Supersingular { d, e } => make_supersingular_like(ctx, *d, *e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn ctx(p: u64, n: u32) -> Arc<PrimeContext<BigInt>> {
        Arc::new(PrimeContext::new(p, 1, n).unwrap())
    }

    #[test]
    fn perm_spec_validation() {
        assert!(PermSpec::new(vec![2, 1], vec![0, 3]).is_ok());
        assert!(PermSpec::new(vec![1, 1], vec![0, 3]).is_err());
        assert!(PermSpec::new(vec![2, 1], vec![3, 0]).is_err());
        assert!(PermSpec::new(vec![2, 3], vec![0, 0]).is_err());
        assert_eq!(PermSpec::full_cycle(vec![0, 1, 2]).unwrap().pi(), &[2, 3, 1]);
    }

    #[test]
    fn transposition_matrix() {
        let c = ctx(2, 20);
        let m = make_permutational(&c, &PermSpec::new(vec![2, 1], vec![0, 3]).unwrap()).unwrap();
        assert_eq!(*m.matrix(), WMatrix::from_ints(&c, &[vec![0, 8], vec![1, 0]]).unwrap());
    }

    #[test]
    fn identity_permutation() {
        let c = ctx(3, 10);
        let m = make_permutational(&c, &PermSpec::new(vec![1, 2, 3], vec![0; 3]).unwrap()).unwrap();
        assert_eq!(*m.matrix(), WMatrix::identity(&c, 3));
    }

    #[test]
    fn window_oracle_examples() {
        let s = PermSpec::new(vec![2, 1], vec![0, 3]).unwrap();
        assert_eq!(cyclic_window_oracle(&s, 1).unwrap(), AlphaBetaDelta::new(1, 0, 3));
        let s = PermSpec::full_cycle(vec![0, 1, 5]).unwrap();
        assert_eq!(cyclic_window_oracle(&s, 2).unwrap(), AlphaBetaDelta::new(2, 1, 6));
        assert_eq!(cyclic_window_oracle(&s, 3).unwrap(), AlphaBetaDelta::new(3, 6, 6));
        let split = PermSpec::new(vec![2, 1, 3], vec![0, 1, 1]).unwrap();
        assert_eq!(cyclic_window_oracle(&split, 1).unwrap_err(), Error::NotACycle);
    }

    #[test]
    fn closed_bound_examples() {
        assert_eq!(permutational_closed_bound(&[0, 3]), 3);
        assert_eq!(permutational_closed_bound(&[0, 1, 2]), 2);
        assert_eq!(permutational_closed_bound(&[0, 0, 4, 4]), 8);
    }

    #[test]
    fn cycles_of_permutation() {
        let s = PermSpec::new(vec![4, 3, 2, 1], vec![0, 1, 1, 2]).unwrap();
        assert_eq!(s.cycles(), vec![vec![0, 3], vec![1, 2]]);
        assert!(PermSpec::full_cycle(vec![0; 5]).unwrap().is_single_cycle());
    }

    #[test]
    fn k3_shapes() {
        let c = ctx(3, 60);
        assert_eq!(make_k3_isoclinic(&c, 2).unwrap_err(), Error::RankTooSmall(2));
        let m = make_k3_isoclinic(&c, 5).unwrap();
        assert_eq!(m.hodge().as_slice(), &[0, 1, 1, 1, 2]);
        let n = make_k3_nonisoclinic(&c, 1, 1, 1).unwrap();
        assert_eq!(n.summand_sizes(), Some(&[2, 1, 2][..]));
        assert_eq!(n.hodge().as_slice(), &[0, 1, 1, 1, 2]);
        let n = make_k3_nonisoclinic(&c, 2, 0, 1).unwrap();
        assert_eq!(n.summand_sizes(), Some(&[3, 2][..]));
        assert!(make_k3_nonisoclinic(&c, 0, 1, 1).is_err());
    }

    #[test]
    fn rank2_refuses_split_and_unordered() {
        let c = ctx(5, 30);
        assert!(make_rank2(&c, 0, 2, 1).is_err());
        assert!(make_rank2(&c, 2, 2, 1).is_err());
        let m = make_rank2(&c, 1, 2, 7).unwrap();
        assert!(c.is_unit(m.matrix().get(0, 1)));
        assert_eq!(m.hodge().as_slice(), &[0, 3]);
        // same seed, same unit
        assert_eq!(make_rank2(&c, 1, 2, 7).unwrap().matrix(), m.matrix());
    }

    #[test]
    fn family_ranks_and_hodge() {
        let c = ctx(2, 60);
        for f in [
            Family::Cyclic { e: vec![0, 3] },
            Family::K3Isoclinic { r: 4 },
            Family::K3Nonisoclinic { r1: 1, mid: 1, r2: 1 },
            Family::Rank2 { l1: 1, l2: 3, seed: 0 },
            Family::Supersingular { d: 2, e: 3 },
        ] {
            let m = f.build(&c).unwrap();
            assert_eq!(m.rank(), f.rank(), "{f:?}");
            assert_eq!(m.hodge().max(), f.max_hodge(), "{f:?}");
        }
    }
}
