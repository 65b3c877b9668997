//! End-to-end checks of the published results on constructed instances.
//!
//! Each check is deterministic (fixed seeds) and exact. The acceptance test
//! target and the `verify-paper` command both run these.

use std::collections::HashMap;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dvr_linalg::{elementary_divisor_valuations, Slope, WMatrix};
use crate::error::{Error, Result};
use crate::families::{
    cyclic_window_oracle, k3_nonisoclinic_blocks, make_k3_isoclinic, make_k3_nonisoclinic, make_permutational,
    make_rank1, make_rank2, make_supersingular_like, permutational_closed_bound, permutational_summands,
    random_with_hodge, PermSpec,
};
use crate::fcrystal::FCrystal;
use crate::level_torsion::{
    default_horizon, direct_sum_estimate, isomorphism_number, level_torsion_isoclinic, level_torsion_sum,
    pdiv_bound, quasi_special_bound, theorem12_bound, theorem12_from_hodge, Certificate, LevelTorsionResult,
    NStatus,
};
use crate::scalar::valuation_of;
use crate::witt::PrimeContext;

type Ctx = Arc<PrimeContext<BigInt>>;
type Crystal = FCrystal<BigInt>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subset {
    All,
    K3,
    Rank2,
    QuasiSpecial,
    Bounds,
}

impl FromStr for Subset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Subset::All),
            "k3" => Ok(Subset::K3),
            "rank2" => Ok(Subset::Rank2),
            "quasi-special" => Ok(Subset::QuasiSpecial),
            "bounds" => Ok(Subset::Bounds),
            other => Err(Error::BadParameters(format!("unknown subset {other:?}"))),
        }
    }
}

impl Subset {
    pub fn check_ids(self) -> Vec<u32> {
        match self {
            Subset::All => (1..=13).collect(),
            Subset::K3 => vec![1, 2, 3],
            Subset::Rank2 => vec![4],
            Subset::QuasiSpecial => vec![5, 7, 8],
            Subset::Bounds => vec![6, 9, 10, 12, 13],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_ms: u128,
    pub limit_ms: Option<u128>,
}

impl CheckOutcome {
    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let limit = self.limit_ms.map(|l| format!(" (limit {l} ms)")).unwrap_or_default();
        format!(
            "[{status}] {:>2}. {} — {} [{} ms{limit}]",
            self.id, self.title, self.detail, self.elapsed_ms
        )
    }
}

struct CheckDef {
    id: u32,
    title: &'static str,
    limit: Option<Duration>,
    run: fn() -> Result<String>,
}

fn defs() -> [CheckDef; 13] {
    let secs = |s| Some(Duration::from_secs(s));
    [
        CheckDef { id: 1, title: "isoclinic K3 crystals have n = 2", limit: secs(5), run: check_k3_isoclinic },
        CheckDef { id: 2, title: "non-isoclinic K3 crystals have n = 1", limit: secs(5), run: check_k3_nonisoclinic },
        CheckDef { id: 3, title: "mixed K3 sums have n = 2", limit: None, run: check_k3_mixed },
        CheckDef { id: 4, title: "rank-2 crystals", limit: None, run: check_rank2 },
        CheckDef { id: 5, title: "supersingular-like crystals attain de", limit: secs(10), run: check_supersingular },
        CheckDef { id: 6, title: "Hodge-slope bound dominates ℓ", limit: None, run: check_theorem12_sweep },
        CheckDef { id: 7, title: "quasi-special bound", limit: None, run: check_quasi_special },
        CheckDef { id: 8, title: "permutational closed bound", limit: secs(60), run: check_permutational },
        CheckDef { id: 9, title: "twisted-dual identities", limit: None, run: check_duality },
        CheckDef { id: 10, title: "slope estimate and α ≤ qλ ≤ β", limit: None, run: check_katz },
        CheckDef { id: 11, title: "oracle equivalence", limit: secs(60), run: check_oracles },
        CheckDef { id: 12, title: "direct-sum estimate", limit: None, run: check_direct_sum_estimate },
        CheckDef { id: 13, title: "p-divisible bound agrees with Hodge bound", limit: None, run: check_pdiv },
    ]
}

/// Runs one check by number (1 to 13).
pub fn run_check(id: u32) -> Result<CheckOutcome> {
    let defs = defs();
    let def = defs
        .iter()
        .find(|d| d.id == id)
        .ok_or_else(|| Error::BadParameters(format!("no check numbered {id}")))?;
    let start = Instant::now();
    let result = (def.run)();
    let elapsed = start.elapsed();
    let in_time = def.limit.is_none_or(|l| elapsed <= l);
    let (passed, detail) = match result {
        Ok(d) if in_time => (true, d),
        Ok(d) => (false, format!("{d}; too slow")),
        Err(e) => (false, e.to_string()),
    };
    Ok(CheckOutcome {
        id,
        title: def.title,
        passed,
        detail,
        elapsed_ms: elapsed.as_millis(),
        limit_ms: def.limit.map(|l| l.as_millis()),
    })
}

/// Runs the checks of a subset in order.
pub fn run_subset(subset: Subset) -> Vec<CheckOutcome> {
    subset.check_ids().into_iter().map(|id| run_check(id).expect("known id")).collect()
}

fn fail(msg: String) -> Error {
    Error::BadParameters(msg)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(fail(msg()))
    }
}

fn ctx(p: u64, n: u32) -> Result<Ctx> {
    Ok(Arc::new(PrimeContext::new(p, 1, n)?))
}

fn certified(res: &LevelTorsionResult) -> Result<u64> {
    res.value()
        .ok_or_else(|| fail(format!("not certified: [{}, {}] {}", res.lower, res.upper, res.certificate)))
}

fn horizon_of(m: &Crystal) -> Result<u64> {
    Ok(default_horizon(&m.slope_data()?))
}

fn check_k3_isoclinic() -> Result<String> {
    let cases: Vec<(u64, usize)> = [2u64, 3, 5].iter().flat_map(|&p| [3usize, 4, 5, 8, 21].map(|r| (p, r))).collect();
    cases.par_iter().try_for_each(|&(p, r)| {
        // slopes 0..2 and period r: iterates up to r need r·2 + 2 digits
        let c = ctx(p, 2 * r as u32 + 4)?;
        let m = make_k3_isoclinic(&c, r)?;
        let report = isomorphism_number(&m, horizon_of(&m)?)?;
        let res = report.ell.as_ref().ok_or_else(|| fail(format!("r={r}: no level torsion")))?;
        ensure(
            report.n_status == NStatus::Equal
                && report.n_value() == Some(2)
                && res.certificate == Certificate::Period(r as u64),
            || format!("p={p} r={r}: got [{}, {}] {}", res.lower, res.upper, res.certificate),
        )
    })?;
    Ok(format!("{} instances, n = 2 with Period(r)", cases.len()))
}

fn check_k3_nonisoclinic() -> Result<String> {
    let shapes = [(1, 0, 1), (1, 1, 1), (2, 0, 1), (2, 2, 3)];
    for p in [2u64, 3, 5] {
        let c = ctx(p, 64)?;
        for (r1, mid, r2) in shapes {
            let blocks = k3_nonisoclinic_blocks(&c, r1, mid, r2)?;
            let res = level_torsion_sum(&blocks, 24)?;
            ensure(res.value() == Some(1), || format!("p={p} {:?}: {:?}", (r1, mid, r2), res))?;
            let whole = make_k3_nonisoclinic(&c, r1, mid, r2)?;
            let report = isomorphism_number(&whole, 24)?;
            ensure(report.n_status == NStatus::Equal && report.n_value() == Some(1), || {
                format!("p={p} {:?}: dispatch gave {:?}", (r1, mid, r2), report.n_status)
            })?;
            ensure(!report.slope_data.isoclinic, || "sum reported as isoclinic".into())?;
        }
    }
    Ok("4 shapes × 3 primes, n = 1".into())
}

fn check_k3_mixed() -> Result<String> {
    let mut count = 0;
    for p in [2u64, 3] {
        // common periods reach lcm(5, 3, 4) = 60
        let c = ctx(p, 128)?;
        for r_iso in [3usize, 4, 5] {
            for (r1, mid, r2) in [(1, 0, 1), (1, 1, 1), (2, 2, 3)] {
                let mut parts = vec![make_k3_isoclinic(&c, r_iso)?];
                parts.extend(k3_nonisoclinic_blocks(&c, r1, mid, r2)?);
                let res = level_torsion_sum(&parts, 24)?;
                ensure(res.value() == Some(2), || {
                    format!("p={p} iso r={r_iso} + {:?}: {:?}", (r1, mid, r2), res)
                })?;
                count += 1;
            }
        }
    }
    Ok(format!("{count} sums, n = 2"))
}

fn check_rank2() -> Result<String> {
    let c = ctx(5, 64)?;
    for e in 1..=5u32 {
        let sum = FCrystal::direct_sum(&[make_rank1(&c, 0)?, make_rank1(&c, e)?])?;
        let report = isomorphism_number(&sum, 24)?;
        ensure(report.n_value() == Some(1), || format!("split e={e}: {report:?}"))?;

        let cyc = make_permutational(&c, &PermSpec::full_cycle(vec![0, e])?)?;
        let res = level_torsion_isoclinic(&cyc, horizon_of(&cyc)?)?;
        ensure(res.value() == Some(e as u64), || format!("cyclic (0,{e}): {res:?}"))?;
    }
    for (a, b) in [(1u32, 2u32), (1, 3), (2, 3)] {
        let m = make_rank2(&c, a, b, 0x5eed)?;
        let report = isomorphism_number(&m, 24)?;
        let newton = &report.slope_data.newton;
        ensure(*newton == vec![Ratio::from_integer(a as i64), Ratio::from_integer(b as i64)], || {
            format!("({a},{b}) Newton slopes {newton:?}")
        })?;
        ensure(report.n_status == NStatus::UpperBoundOnly(2 * a as u64), || {
            format!("({a},{b}): {:?}", report.n_status)
        })?;
    }
    Ok("split n = 1, cyclic n = e, non-split bound 2a".into())
}

fn check_supersingular() -> Result<String> {
    let grid: Vec<(usize, u32)> = (1..=4).flat_map(|d| (1..=4).map(move |e| (d, e))).collect();
    grid.par_iter().try_for_each(|&(d, e)| {
        let c = ctx(3, 2 * d as u32 * e + 4)?;
        let m = make_supersingular_like(&c, d, e)?;
        let sd = m.slope_data()?;
        let report = isomorphism_number(&m, default_horizon(&sd))?;
        let want = d as u64 * e as u64;
        ensure(report.n_value() == Some(want) && theorem12_bound(&sd)? == want, || {
            format!("d={d} e={e}: {:?}", report.ell)
        })
    })?;
    Ok("16 instances, n = de = Hodge bound".into())
}

/// A seeded random cycle on `r` points: a one-based permutation.
fn random_cycle<R: Rng>(r: usize, rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = (0..r).collect();
    order.shuffle(rng);
    let mut pi = vec![0; r];
    for k in 0..r {
        pi[order[k]] = order[(k + 1) % r] + 1;
    }
    pi
}

fn random_sorted<R: Rng>(r: usize, max: u32, rng: &mut R) -> Vec<u32> {
    let mut e: Vec<u32> = (0..r).map(|_| rng.gen_range(0..=max)).collect();
    e.sort_unstable();
    e
}

struct SweepEntry {
    p: u64,
    spec: PermSpec,
    crystal: Crystal,
    ell: u64,
}

struct Sweep {
    entries: Vec<SweepEntry>,
}

/// Sweep precision: iterates up to `q = 60` (the longest common period of
/// three sweep crystals) with slopes ≤ 5.
const SWEEP_PRECISION: u32 = 320;

fn sweep() -> Result<&'static Sweep> {
    static SWEEP: OnceLock<std::result::Result<Sweep, Error>> = OnceLock::new();
    SWEEP.get_or_init(build_sweep).as_ref().map_err(Clone::clone)
}

fn build_sweep() -> Result<Sweep> {
    let ctxs: HashMap<u64, Ctx> = [2u64, 5].iter().map(|&p| Ok((p, ctx(p, SWEEP_PRECISION)?))).collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x00c1_c11c);
    let specs: Vec<(u64, PermSpec)> = (0..200)
        .map(|k| {
            let p = if k % 2 == 0 { 2 } else { 5 };
            let r = rng.gen_range(2..=6);
            let pi = random_cycle(r, &mut rng);
            let e = random_sorted(r, 5, &mut rng);
            (p, PermSpec::new(pi, e).expect("valid cycle"))
        })
        .collect();
    let entries = specs
        .into_par_iter()
        .map(|(p, spec)| {
            let crystal = make_permutational(&ctxs[&p], &spec)?;
            let res = level_torsion_isoclinic(&crystal, horizon_of(&crystal)?.min(spec.rank() as u64))?;
            let ell = certified(&res)?;
            Ok(SweepEntry { p, spec, crystal, ell })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Sweep { entries })
}

fn check_theorem12_sweep() -> Result<String> {
    let sweep = sweep()?;
    for entry in &sweep.entries {
        let bound = theorem12_bound(&entry.crystal.slope_data()?)?;
        ensure(entry.ell <= bound, || format!("{:?}: ℓ = {} > {bound}", entry.spec, entry.ell))?;
    }
    let lambda = Ratio::from_integer(2);
    ensure(theorem12_from_hodge(&[0, 1, 5], lambda)? == 7, || "bound for (0,1,5) is not 7".into())?;
    let c = ctx(2, 32)?;
    let m = make_permutational(&c, &PermSpec::full_cycle(vec![0, 1, 5])?)?;
    let res = level_torsion_isoclinic(&m, 3)?;
    ensure(res.value() == Some(5), || format!("cyclic (0,1,5): {res:?}"))?;
    Ok(format!("{} cyclic crystals; (0,1,5): ℓ = 5 < 7", sweep.entries.len()))
}

fn check_quasi_special() -> Result<String> {
    let sweep = sweep()?;
    for entry in &sweep.entries {
        let bound = quasi_special_bound(&entry.crystal.slope_data()?);
        ensure(entry.ell <= bound, || format!("{:?}: ℓ = {} > {bound}", entry.spec, entry.ell))?;
    }
    let c = ctx(3, 48)?;
    let mut count = 0;
    for r in 2..=5usize {
        for top in 1..=4u32 {
            let mut e = vec![0; r];
            e[r - 1] = top;
            let m = make_permutational(&c, &PermSpec::full_cycle(e)?)?;
            let res = level_torsion_isoclinic(&m, r as u64)?;
            ensure(res.value() == Some(top as u64), || format!("r={r} e_r={top}: {res:?}"))?;
            count += 1;
        }
    }
    Ok(format!("{} sweep crystals; {count} instances with s = e_r attain e_r", sweep.entries.len()))
}

fn permutations(r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (1..=r).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (1..r).rev().find(|&i| cur[i - 1] < cur[i]) else { break };
        let j = (i..r).rev().find(|&j| cur[j] > cur[i - 1]).expect("successor exists");
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

fn sorted_vectors(r: usize, max: u32) -> Vec<Vec<u32>> {
    if r == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for tail in sorted_vectors(r - 1, max) {
        let start = tail.last().copied().unwrap_or(0);
        for x in start..=max {
            let mut v = tail.clone();
            v.push(x);
            out.push(v);
        }
    }
    out
}

/// Certified `n` of a permutational crystal through its cycle decomposition.
pub fn permutational_n(c: &Ctx, spec: &PermSpec, horizon: u64) -> Result<(u64, Vec<u64>)> {
    let parts = permutational_summands(c, spec)?;
    let n = certified(&level_torsion_sum(&parts, horizon)?)?;
    let each = parts
        .iter()
        .map(|m| certified(&level_torsion_isoclinic(m, horizon)?))
        .collect::<Result<Vec<_>>>()?;
    Ok((n, each))
}

fn check_permutational() -> Result<String> {
    let c = ctx(2, 40)?;
    let cases: Vec<PermSpec> = (1..=5usize)
        .flat_map(|r| {
            let es = sorted_vectors(r, 3);
            permutations(r)
                .into_iter()
                .flat_map(move |pi| es.clone().into_iter().map(move |e| PermSpec::new(pi.clone(), e)))
        })
        .collect::<Result<_>>()?;
    cases.par_iter().try_for_each(|spec| {
        let (n, _) = permutational_n(&c, spec, 12)?;
        let bound = permutational_closed_bound(spec.e());
        ensure(n <= bound, || format!("{spec:?}: n = {n} > {bound}"))?;
        let full = spec.pi().iter().enumerate().all(|(i, &x)| x == (i + 1) % spec.rank() + 1);
        ensure(!full || n == bound, || format!("{spec:?}: full cycle n = {n} ≠ {bound}"))
    })?;
    Ok(format!("{} permutational crystals of rank ≤ 5", cases.len()))
}

/// `Σ_{i<x} h_i` of a Hodge slope list.
fn count_below(hodge: &[u32], x: Slope) -> usize {
    hodge.iter().filter(|&&e| Ratio::from_integer(e as i64) < x).count()
}

fn count_above(hodge: &[u32], x: Slope) -> usize {
    hodge.iter().filter(|&&e| Ratio::from_integer(e as i64) > x).count()
}

fn check_duality() -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xd0a1);
    let mut cases = Vec::new();
    for k in 0..100 {
        let p = [2u64, 3, 5][k % 3];
        let m = if k % 4 == 3 { 2 } else { 1 };
        let r = rng.gen_range(2..=4);
        let mut hodge = random_sorted(r, 3, &mut rng);
        hodge[0] = 0;
        if hodge[r - 1] == 0 {
            hodge[r - 1] = 1;
        }
        cases.push((p, m, hodge, rng.gen::<u64>()));
    }
    cases.par_iter().try_for_each(|(p, m, hodge, seed)| {
        let c = Arc::new(PrimeContext::<BigInt>::new(*p, *m, 30)?);
        let mut rng = ChaCha8Rng::seed_from_u64(*seed);
        let crystal = random_with_hodge(&c, hodge, &mut rng)?;
        let dual = crystal.dual_twisted()?;
        let e = crystal.hodge().max() as i64;
        for q in 1..=8u64 {
            let a = crystal.alpha_beta_delta(q)?;
            let b = dual.alpha_beta_delta(q)?;
            ensure(a.alpha + b.beta == q as i64 * e && b.alpha + a.beta == q as i64 * e, || {
                format!("p={p} hodge={hodge:?} q={q}: {a:?} vs dual {b:?}")
            })?;
        }
        let dh = dual.hodge().as_slice();
        for lambda in [Ratio::new(1, 2), Ratio::from_integer(1), Ratio::new(3, 2)] {
            if lambda <= Ratio::from_integer(0) || lambda >= Ratio::from_integer(e) {
                continue;
            }
            let lhs = count_below(dh, Ratio::from_integer(e) - lambda);
            let rhs = count_above(hodge, lambda);
            ensure(lhs == rhs, || format!("hodge={hodge:?} λ={lambda}: {lhs} ≠ {rhs}"))?;
        }
        Ok(())
    })?;
    Ok("100 crystals, q ≤ 8".into())
}

fn ceil(x: Slope) -> i64 {
    x.ceil().to_integer()
}

/// The slope estimate for `λ` = smallest Newton slope, and for isoclinic
/// crystals `α(q) ≤ qλ ≤ β(q)` with simultaneous equality.
fn katz_checks(m: &Crystal, label: &str) -> Result<()> {
    let sd = m.slope_data()?;
    let lambda = sd.newton[0];
    let below = sd.count_below(lambda) as u64;
    for n in 1..=8u64 {
        let a = m.alpha_beta_delta(n + below)?;
        ensure(a.alpha >= ceil(lambda * n as i64), || format!("{label}: α({}) = {} < ⌈{n}·{lambda}⌉", n + below, a.alpha))?;
    }
    if sd.isoclinic {
        for q in 1..=8u64 {
            let t = m.alpha_beta_delta(q)?;
            let ql = lambda * q as i64;
            let lo = Ratio::from_integer(t.alpha);
            let hi = Ratio::from_integer(t.beta);
            ensure(lo <= ql && ql <= hi, || format!("{label}: q={q} {t:?} vs qλ = {ql}"))?;
            ensure((lo == ql) == (hi == ql), || format!("{label}: q={q} one-sided equality {t:?}"))?;
        }
    }
    Ok(())
}

fn check_katz() -> Result<String> {
    let sweep = sweep()?;
    sweep
        .entries
        .par_iter()
        .try_for_each(|entry| katz_checks(&entry.crystal, &format!("{:?}", entry.spec)))?;
    let c = ctx(3, 64)?;
    let mut extra: Vec<(String, Crystal)> = Vec::new();
    for r in [3, 4, 5] {
        extra.push((format!("K3 r={r}"), make_k3_isoclinic(&c, r)?));
    }
    for (d, e) in [(1, 1), (2, 3), (3, 2)] {
        extra.push((format!("supersingular d={d} e={e}"), make_supersingular_like(&c, d, e)?));
    }
    extra.push(("K3 non-isoclinic (1,1,1)".into(), make_k3_nonisoclinic(&c, 1, 1, 1)?));
    extra.push(("rank 2 (1,3)".into(), make_rank2(&c, 1, 3, 3)?));
    let mut rng = ChaCha8Rng::seed_from_u64(0x6a72);
    for k in 0..20 {
        let hodge = random_sorted(3, 2, &mut rng);
        extra.push((format!("random #{k} {hodge:?}"), random_with_hodge(&c, &hodge, &mut rng)?));
    }
    extra.par_iter().try_for_each(|(label, m)| katz_checks(m, label))?;
    Ok(format!("{} crystals, n ≤ 8", sweep.entries.len() + extra.len()))
}

/// Exact integer determinant by fraction-free elimination.
fn bareiss(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    let mut sign = BigInt::from(1);
    let mut prev = BigInt::from(1);
    for k in 0..n {
        if a[k][k].is_zero() {
            let Some(s) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else { return BigInt::zero() };
            a.swap(k, s);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|&i| m & (1 << i) != 0).collect())
        .collect()
}

/// Elementary divisor valuations from the gcds of `k × k` minors; `None`
/// when the matrix is singular.
pub fn determinantal_divisor_oracle(a: &[Vec<BigInt>], p: u64) -> Option<Vec<u32>> {
    let n = a.len();
    let pb = BigInt::from(p);
    let mut d = vec![0u32];
    for k in 1..=n {
        let mut g = BigInt::zero();
        for rows in subsets(n, k) {
            for cols in subsets(n, k) {
                let minor = rows.iter().map(|&i| cols.iter().map(|&j| a[i][j].clone()).collect()).collect();
                g = g.gcd(&bareiss(minor));
            }
        }
        d.push(valuation_of(&g, &pb)?);
    }
    Some(d.windows(2).map(|w| w[1] - w[0]).collect())
}

fn check_oracles() -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0a11);
    let ctxs: HashMap<u64, Ctx> =
        [2u64, 3, 5, 7].iter().map(|&p| Ok((p, ctx(p, 64)?))).collect::<Result<_>>()?;
    let triples: Vec<(u64, PermSpec, u64)> = (0..500)
        .map(|_| {
            let p = [2u64, 3, 5, 7][rng.gen_range(0..4)];
            let r = rng.gen_range(2..=6);
            let spec = PermSpec::new(random_cycle(r, &mut rng), random_sorted(r, 5, &mut rng)).expect("valid");
            let q = rng.gen_range(1..=2 * r as u64);
            (p, spec, q)
        })
        .collect();
    triples.par_iter().try_for_each(|(p, spec, q)| {
        let m = make_permutational(&ctxs[p], spec)?;
        let got = m.alpha_beta_delta(*q)?;
        let want = cyclic_window_oracle(spec, *q)?;
        ensure(got == want, || format!("{spec:?} q={q}: matrix {got:?} vs windows {want:?}"))
    })?;

    let mats: Vec<(u64, Vec<Vec<BigInt>>)> = (0..100)
        .map(|k| {
            let p = if k % 2 == 0 { 2u64 } else { 7 };
            let a = (0..4)
                .map(|_| {
                    (0..4)
                        .map(|_| {
                            let v = rng.gen_range(0..3);
                            let base: i64 = if rng.gen_bool(0.15) { 0 } else { rng.gen_range(-40..=40) };
                            BigInt::from(base) * BigInt::from(p).pow(v)
                        })
                        .collect()
                })
                .collect();
            (p, a)
        })
        .collect();
    let mut singular = 0;
    for (p, a) in &mats {
        let c = &ctxs[p];
        let entries = a.iter().flatten().map(|x| c.from_coeffs(vec![x.mod_floor(c.p_to_n())])).collect();
        let w = WMatrix::from_entries(c, 4, 4, entries)?;
        let got = elementary_divisor_valuations(c, &w);
        match determinantal_divisor_oracle(a, *p) {
            Some(want) => {
                let got = got?;
                ensure(got.as_slice() == want.as_slice(), || format!("p={p} {a:?}: {got:?} vs {want:?}"))?;
            }
            None => {
                singular += 1;
                ensure(matches!(got, Err(Error::SingularAtPrecision)), || format!("p={p} singular {a:?}: {got:?}"))?;
            }
        }
    }
    ensure(mats.iter().all(|(_, a)| a.iter().flatten().all(|x| x.abs() < BigInt::from(1u64 << 20))), || {
        "entries too large".into()
    })?;
    Ok(format!("500 window triples; 100 Smith forms ({singular} singular)"))
}

fn check_direct_sum_estimate() -> Result<String> {
    let sweep = sweep()?;
    let mut checked = 0;
    for p in [2u64, 5] {
        let group: Vec<&SweepEntry> = sweep.entries.iter().filter(|e| e.p == p).collect();
        for pair in group.chunks(2) {
            if pair.len() < 2 {
                continue;
            }
            let parts = [pair[0].crystal.clone(), pair[1].crystal.clone()];
            let res = level_torsion_sum(&parts, 16)?;
            let n = certified(&res)?;
            let est = direct_sum_estimate(&[pair[0].ell, pair[1].ell])?;
            ensure(n <= est, || format!("{:?} ⊕ {:?}: {n} > {est}", pair[0].spec, pair[1].spec))?;
            ensure(n >= pair[0].ell.max(pair[1].ell), || format!("sum below a summand: {n}"))?;
            checked += 1;
        }
        for triple in group.chunks(3).take(20) {
            if triple.len() < 3 {
                continue;
            }
            let parts: Vec<Crystal> = triple.iter().map(|e| e.crystal.clone()).collect();
            let n = certified(&level_torsion_sum(&parts, 16)?)?;
            let vals: Vec<u64> = triple.iter().map(|e| e.ell).collect();
            let est = direct_sum_estimate(&vals)?;
            ensure(n <= est, || format!("triple {vals:?}: {n} > {est}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} sums of certified summands"))
}

fn check_pdiv() -> Result<String> {
    for c in 1..=12u64 {
        for d in 1..=12u64 {
            let hodge: Vec<u32> = std::iter::repeat(0).take(c as usize).chain(std::iter::repeat(1).take(d as usize)).collect();
            let lambda = Ratio::new(d as i64, (c + d) as i64);
            let t12 = theorem12_from_hodge(&hodge, lambda)?;
            let pd = pdiv_bound(c, d)?;
            ensure(t12 == pd, || format!("c={c} d={d}: {t12} ≠ {pd}"))?;
        }
    }
    Ok("144 shapes".into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_enumeration() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(5).len(), 120);
        assert_eq!(sorted_vectors(5, 3).len(), 56);
    }

    #[test]
    fn oracle_on_diagonal() {
        let a: Vec<Vec<BigInt>> = [[1, 0, 0], [0, 2, 0], [0, 0, 8]]
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        assert_eq!(determinantal_divisor_oracle(&a, 2), Some(vec![0, 1, 3]));
        let s: Vec<Vec<BigInt>> = [[1, 2], [2, 4]].iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        assert_eq!(determinantal_divisor_oracle(&s, 3), None);
    }

    #[test]
    fn random_cycles_are_cycles() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for r in 1..7 {
            let pi = random_cycle(r, &mut rng);
            assert!(PermSpec::new(pi, vec![0; r]).unwrap().is_single_cycle());
        }
    }
}
