//! Level torsion `ℓ_M` and the isomorphism number `n_M`.
//!
//! For isoclinic crystals `ℓ_M = max_q δ_M(q)`; a period `φ^T(M) = p^s M`
//! makes `δ` periodic, so scanning `q = 1..T` is a certificate. Direct sums of
//! isoclinic crystals combine diagonal and cross terms. Every closed-form
//! upper bound lives here too.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dvr_linalg::Slope;
use crate::error::{Error, Result};
use crate::families::permutational_closed_bound;
use crate::fcrystal::{AlphaBetaDelta, FCrystal, SlopeData};
use crate::scalar::Coeff;

/// Why a level-torsion value is (or is not) exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Certificate {
    /// `δ` (or the cross difference) is periodic with this period and was
    /// scanned over one full period.
    Period(u64),
    /// The scanned maximum reached a proven upper bound.
    BoundAttained,
    /// A zero level torsion of a direct sum was resolved by whether the sum is
    /// isoclinic ordinary.
    EpsilonRule,
    /// No period up to this horizon; the value is an interval.
    HorizonExhausted(u64),
}

impl Certificate {
    fn strength(&self) -> u8 {
        match self {
            Certificate::Period(_) => 0,
            Certificate::EpsilonRule => 1,
            Certificate::BoundAttained => 2,
            Certificate::HorizonExhausted(_) => 3,
        }
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Certificate::Period(t) => write!(f, "Period({t})"),
            Certificate::BoundAttained => f.write_str("BoundAttained"),
            Certificate::EpsilonRule => f.write_str("EpsilonRule"),
            Certificate::HorizonExhausted(q) => write!(f, "HorizonExhausted({q})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelTorsionResult {
    pub lower: u64,
    pub upper: u64,
    pub exact: bool,
    pub certificate: Certificate,
    pub trace: Vec<AlphaBetaDelta>,
}

impl LevelTorsionResult {
    fn exact(value: u64, certificate: Certificate, trace: Vec<AlphaBetaDelta>) -> Self {
        LevelTorsionResult { lower: value, upper: value, exact: true, certificate, trace }
    }

    fn interval(lower: u64, upper: u64, horizon: u64, trace: Vec<AlphaBetaDelta>) -> Self {
        let upper = upper.max(lower);
        if lower == upper {
            return Self::exact(lower, Certificate::BoundAttained, trace);
        }
        LevelTorsionResult { lower, upper, exact: false, certificate: Certificate::HorizonExhausted(horizon), trace }
    }

    /// The certified value, if exact.
    pub fn value(&self) -> Option<u64> {
        self.exact.then_some(self.lower)
    }
}

/// How the isomorphism number relates to the reported level torsion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum NStatus {
    /// `n_M = ℓ_M` (direct sums of isoclinic crystals).
    Equal,
    /// Only an upper bound is known.
    UpperBoundOnly(u64),
    /// Value given by a closed formula for a recognized family.
    FamilyFormula(u64),
    /// Not recognized; an isoclinic decomposition must be supplied.
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsoReport {
    pub slope_data: SlopeData,
    pub ell: Option<LevelTorsionResult>,
    pub n_status: NStatus,
    pub bounds: BTreeMap<String, u64>,
    pub note: Option<String>,
}

impl IsoReport {
    /// `n_M` when it is pinned down exactly.
    pub fn n_value(&self) -> Option<u64> {
        match &self.n_status {
            NStatus::Equal => self.ell.as_ref().and_then(LevelTorsionResult::value),
            NStatus::FamilyFormula(v) => Some(*v),
            _ => None,
        }
    }
}

fn floor_nonneg(x: Slope) -> u64 {
    x.floor().to_integer().max(0) as u64
}

/// `⌊e·l_2 + (l_1 − l_2)·λ⌋` for Hodge slopes `hodge` (any order) and a
/// slope `λ`, after shifting so the smallest slope is 0. `l_1` (`l_2`) counts
/// slopes below (above) `λ`.
pub fn theorem12_from_hodge(hodge: &[u32], lambda: Slope) -> Result<u64> {
    let (Some(&lo), Some(&hi)) = (hodge.iter().min(), hodge.iter().max()) else {
        return Err(Error::BadParameters("empty Hodge slope list".into()));
    };
    let shift = Ratio::from_integer(lo as i64);
    let lambda = lambda - shift;
    let e = (hi - lo) as i64;
    if lambda < Ratio::from_integer(0) || lambda > Ratio::from_integer(e) {
        return Err(Error::BadParameters(format!("slope {} outside the Hodge range", lambda + shift)));
    }
    let (mut l1, mut l2) = (0i64, 0i64);
    for &h in hodge {
        let h = Ratio::from_integer((h - lo) as i64);
        if h < lambda {
            l1 += 1;
        } else if h > lambda {
            l2 += 1;
        }
    }
    Ok(floor_nonneg(Ratio::from_integer(e * l2) + lambda * (l1 - l2)))
}

/// The Hodge-slope bound on `n_M` for an isoclinic crystal.
pub fn theorem12_bound(sd: &SlopeData) -> Result<u64> {
    let lambda = sd.lambda.ok_or(Error::NotIsoclinic)?;
    theorem12_from_hodge(sd.hodge.as_slice(), lambda)
}

/// `⌊2cd/(c+d)⌋` for a p-divisible group of codimension `c` and dimension `d`.
pub fn pdiv_bound(c: u64, d: u64) -> Result<u64> {
    if c == 0 || d == 0 {
        return Err(Error::BadParameters("codimension and dimension must be positive".into()));
    }
    Ok(2 * c * d / (c + d))
}

/// `min{s, r·e_r − s}` with `s = Σe_i`, on slopes shifted so `e_1 = 0`.
pub fn quasi_special_from_hodge(hodge: &[u32]) -> u64 {
    let Some(&lo) = hodge.iter().min() else { return 0 };
    let r = hodge.len() as u64;
    let s: u64 = hodge.iter().map(|&e| (e - lo) as u64).sum();
    let er = (*hodge.iter().max().unwrap() - lo) as u64;
    s.min(r * er - s)
}

pub fn quasi_special_bound(sd: &SlopeData) -> u64 {
    quasi_special_from_hodge(sd.hodge.as_slice())
}

/// `max{1, n_i, n_i + n_j − 1 : i ≠ j}`; a single value is returned as is.
pub fn direct_sum_estimate(values: &[u64]) -> Result<u64> {
    match values {
        [] => Err(Error::BadParameters("no summand values".into())),
        [v] => Ok(*v),
        _ => {
            let mut sorted = values.to_vec();
            sorted.sort_unstable_by(|a, b| b.cmp(a));
            let pair = (sorted[0] + sorted[1]).saturating_sub(1);
            Ok(1.max(sorted[0]).max(pair))
        }
    }
}

/// Default scan horizon `Q = 4·r·(e_r + 1)` on normalized Hodge slopes.
pub fn default_horizon(sd: &SlopeData) -> u64 {
    default_horizon_from_hodge(sd.hodge.as_slice())
}

pub fn default_horizon_from_hodge(hodge: &[u32]) -> u64 {
    let (Some(&lo), Some(&hi)) = (hodge.iter().min(), hodge.iter().max()) else { return 0 };
    4 * hodge.len() as u64 * ((hi - lo) as u64 + 1)
}

fn require_isoclinic<T: Coeff>(m: &FCrystal<T>) -> Result<(SlopeData, Slope)> {
    let sd = m.slope_data()?;
    let lambda = sd.lambda.ok_or(Error::NotIsoclinic)?;
    Ok((sd, lambda))
}

fn shift_trace(trace: &mut [AlphaBetaDelta], shift: u32) {
    for t in trace {
        t.alpha += t.q as i64 * shift as i64;
        t.beta += t.q as i64 * shift as i64;
    }
}

fn max_delta(trace: &[AlphaBetaDelta]) -> u64 {
    trace.iter().map(|t| t.delta.max(0) as u64).max().unwrap_or(0)
}

/// `ℓ_M = max_q δ_M(q)` for an isoclinic crystal, scanning up to `horizon`.
pub fn level_torsion_isoclinic<T: Coeff>(m: &FCrystal<T>, horizon: u64) -> Result<LevelTorsionResult> {
    let (sd, lambda) = require_isoclinic(m)?;
    let bound = theorem12_bound(&sd)?;
    let shift = m.hodge().min();
    let base = m.normalized()?;
    let period = base.detect_period_multiple_of(horizon, *lambda.denom() as u64)?;
    let scan = period.map_or(horizon, |(t, _)| t);
    let mut trace = base.trace(scan)?;
    let lower = max_delta(&trace);
    shift_trace(&mut trace, shift);
    Ok(match period {
        Some((t, _)) => LevelTorsionResult::exact(lower, Certificate::Period(t), trace),
        None => LevelTorsionResult::interval(lower, bound, horizon, trace),
    })
}

fn check_order(lj: Slope, li: Slope) -> Result<()> {
    if lj > li {
        return Err(Error::SlopeOrderViolated(lj.to_string(), li.to_string()));
    }
    Ok(())
}

/// `ℓ(j, i) = max{0, β_{M_j}(q) − α_{M_i}(q)}` for isoclinic `M_j`, `M_i`
/// with `λ_j ≤ λ_i`. The trace records `(α_{M_i}(q), β_{M_j}(q))`.
pub fn cross_level<T: Coeff>(mj: &FCrystal<T>, mi: &FCrystal<T>, horizon: u64) -> Result<LevelTorsionResult> {
    let (_, lj) = require_isoclinic(mj)?;
    let (_, li) = require_isoclinic(mi)?;
    check_order(lj, li)?;
    // a common rescaling leaves β_j − α_i unchanged
    let shift = mj.hodge().min().min(mi.hodge().min());
    let nj = mj.rescale(-(shift as i64))?;
    let ni = mi.rescale(-(shift as i64))?;
    let tj = nj.detect_period_multiple_of(horizon, *lj.denom() as u64)?;
    let ti = ni.detect_period_multiple_of(horizon, *li.denom() as u64)?;
    let common = match (tj, ti) {
        (Some((a, _)), Some((b, _))) => Some(a.lcm(&b)),
        _ => None,
    };
    let scan = common.unwrap_or(horizon);
    let (aj, ai) = rayon::join(|| nj.trace(scan), || ni.trace(scan));
    let (aj, ai) = (aj?, ai?);
    let mut trace: Vec<AlphaBetaDelta> =
        aj.iter().zip(&ai).map(|(j, i)| AlphaBetaDelta::new(j.q, i.alpha, j.beta)).collect();
    let lower = max_delta(&trace);
    shift_trace(&mut trace, shift);
    if let Some(t) = common {
        return Ok(LevelTorsionResult::exact(lower, Certificate::Period(t), trace));
    }
    let (rj, ri) = (level_torsion_isoclinic(mj, horizon)?, level_torsion_isoclinic(mi, horizon)?);
    let upper = if rj.upper == 0 && ri.upper == 0 { 0 } else { rj.upper + ri.upper - 1 };
    Ok(LevelTorsionResult::interval(lower, upper, horizon, trace))
}

fn merge_certificate(a: Certificate, b: Certificate) -> Certificate {
    match (a, b) {
        (Certificate::Period(x), Certificate::Period(y)) => Certificate::Period(x.lcm(&y)),
        (a, b) if a.strength() >= b.strength() => a,
        (_, b) => b,
    }
}

/// Level torsion of the direct sum of isoclinic `summands`.
///
/// `ℓ = max{ε, ℓ(j, i) : λ_j ≤ λ_i}`. The flag `ε ∈ {0, 1}` is only decisive
/// when every `ℓ(j, i)` is 0; then `ℓ = 0` exactly when the whole sum is
/// isoclinic ordinary.
pub fn level_torsion_sum<T: Coeff>(summands: &[FCrystal<T>], horizon: u64) -> Result<LevelTorsionResult> {
    let Some(first) = summands.first() else {
        return Err(Error::BadParameters("empty direct sum".into()));
    };
    if summands.len() == 1 {
        return level_torsion_isoclinic(first, horizon);
    }
    let slopes = summands
        .iter()
        .map(|m| require_isoclinic(m).map(|(_, l)| l))
        .collect::<Result<Vec<_>>>()?;
    let shift = summands.iter().map(|m| m.hodge().min()).min().unwrap_or(0);
    let parts = summands
        .iter()
        .map(|m| m.rescale(-(shift as i64)))
        .collect::<Result<Vec<_>>>()?;

    let k = parts.len();
    let pairs: Vec<(usize, usize)> =
        (0..k).flat_map(|j| (0..k).map(move |i| (j, i))).filter(|&(j, i)| slopes[j] <= slopes[i]).collect();
    let terms = pairs
        .par_iter()
        .map(|&(j, i)| {
            if i == j {
                level_torsion_isoclinic(&parts[i], horizon)
            } else {
                cross_level(&parts[j], &parts[i], horizon)
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let l0_lower = terms.iter().map(|t| t.lower).max().unwrap_or(0);
    let l0_upper = terms.iter().map(|t| t.upper).max().unwrap_or(0);
    let combined = terms.iter().map(|t| t.certificate).reduce(merge_certificate).expect("at least one term");

    let all_hodge: Vec<u32> = parts.iter().flat_map(|m| m.hodge().as_slice().to_vec()).collect();
    let ordinary = all_hodge.iter().all(|&e| e == all_hodge[0]);
    let eps = u64::from(!ordinary);

    let periods: Vec<u64> = terms
        .iter()
        .filter_map(|t| match t.certificate {
            Certificate::Period(p) => Some(p),
            _ => None,
        })
        .collect();
    let scan = if periods.len() == terms.len() { periods.iter().fold(1, |a, &b| a.lcm(&b)) } else { horizon };
    let mut trace = sum_trace(&parts, scan)?;
    shift_trace(&mut trace, shift);

    let lower = l0_lower.max(eps);
    let upper = l0_upper.max(lower);
    if lower != upper {
        return Ok(LevelTorsionResult {
            lower,
            upper,
            exact: false,
            certificate: Certificate::HorizonExhausted(horizon),
            trace,
        });
    }
    let certificate = if l0_upper == 0 { Certificate::EpsilonRule } else { combined };
    let certificate = match certificate {
        Certificate::HorizonExhausted(_) => Certificate::BoundAttained,
        c => c,
    };
    Ok(LevelTorsionResult::exact(lower, certificate, trace))
}

/// `α`/`β` of the whole sum: the extreme values over the summands.
fn sum_trace<T: Coeff>(parts: &[FCrystal<T>], upto: u64) -> Result<Vec<AlphaBetaDelta>> {
    let traces = parts.par_iter().map(|m| m.trace(upto)).collect::<Result<Vec<_>>>()?;
    Ok((0..upto as usize)
        .map(|k| {
            let alpha = traces.iter().map(|t| t[k].alpha).min().unwrap_or(0);
            let beta = traces.iter().map(|t| t[k].beta).max().unwrap_or(0);
            AlphaBetaDelta::new(k as u64 + 1, alpha, beta)
        })
        .collect())
}

/// Whether every row and column has exactly one non-zero entry.
fn is_monomial<T: Coeff>(m: &FCrystal<T>) -> bool {
    let a = m.matrix();
    let r = a.rows();
    let mut col_hits = vec![0usize; r];
    for i in 0..r {
        let mut row_hits = 0;
        for (j, hits) in col_hits.iter_mut().enumerate() {
            if !a.get(i, j).is_zero() {
                row_hits += 1;
                *hits += 1;
            }
        }
        if row_hits != 1 {
            return false;
        }
    }
    col_hits.iter().all(|&h| h == 1)
}

fn collect_bounds<T: Coeff>(m: &FCrystal<T>, sd: &SlopeData, ell: Option<&LevelTorsionResult>) -> BTreeMap<String, u64> {
    let mut bounds = BTreeMap::new();
    let norm = sd.normalized();
    if sd.isoclinic {
        if let Ok(b) = theorem12_bound(sd) {
            bounds.insert("theorem12".to_string(), b);
        }
        let h0 = norm.hodge_number(0) as u64;
        let h1 = norm.hodge_number(1) as u64;
        if h0 > 0 && h1 > 0 && h0 + h1 == sd.rank() as u64 {
            bounds.insert("pdiv".to_string(), 2 * h0 * h1 / (h0 + h1));
        }
    }
    let r = sd.rank() as u64;
    let quasi_special = matches!(ell.map(|l| l.certificate), Some(Certificate::Period(t)) if r % t == 0);
    if quasi_special || is_monomial(m) {
        bounds.insert("quasi_special".to_string(), quasi_special_bound(sd));
    }
    if is_monomial(m) {
        bounds.insert("permutational".to_string(), permutational_closed_bound(sd.hodge.as_slice()));
    }
    bounds
}

/// Level torsion and the isomorphism number, dispatched on the shape of `m`.
pub fn isomorphism_number<T: Coeff>(m: &FCrystal<T>, horizon: u64) -> Result<IsoReport> {
    let sd = m.slope_data()?;

    if m.summand_sizes().is_some() {
        let parts = m.summands()?;
        let mut all_isoclinic = true;
        for part in &parts {
            all_isoclinic &= part.slope_data()?.isoclinic;
        }
        if all_isoclinic {
            let ell = level_torsion_sum(&parts, horizon)?;
            let bounds = collect_bounds(m, &sd, Some(&ell));
            return Ok(IsoReport { slope_data: sd, ell: Some(ell), n_status: NStatus::Equal, bounds, note: None });
        }
    }

    if sd.isoclinic {
        let ell = level_torsion_isoclinic(m, horizon)?;
        let bounds = collect_bounds(m, &sd, Some(&ell));
        return Ok(IsoReport { slope_data: sd, ell: Some(ell), n_status: NStatus::Equal, bounds, note: None });
    }

    let mut bounds = collect_bounds(m, &sd, None);
    let norm = sd.normalized();
    let r = sd.rank();
    let (n_status, note) = if r == 2 {
        let l1 = norm.newton[0];
        if l1 == Ratio::from_integer(0) {
            (NStatus::FamilyFormula(1), Some("rank 2, split into two rank-1 crystals".to_string()))
        } else {
            let b = floor_nonneg(l1 * 2);
            bounds.insert("rank2".to_string(), b);
            (NStatus::UpperBoundOnly(b), Some("rank 2, non-split and non-isoclinic".to_string()))
        }
    } else if r >= 3
        && norm.hodge_number(0) == 1
        && norm.hodge_number(2) == 1
        && norm.hodge_number(1) == r - 2
    {
        (NStatus::FamilyFormula(1), Some("K3 type, non-isoclinic".to_string()))
    } else {
        (
            NStatus::Unresolved,
            Some("non-isoclinic crystal of unrecognized shape; declare an isoclinic direct-sum decomposition".to_string()),
        )
    };
    Ok(IsoReport { slope_data: sd, ell: None, n_status, bounds, note })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64) -> Slope {
        Ratio::new(a, b)
    }

    #[test]
    fn theorem12_examples() {
        assert_eq!(theorem12_from_hodge(&[0, 1, 1, 2], r(1, 1)).unwrap(), 2);
        assert_eq!(theorem12_from_hodge(&[0, 1, 5], r(2, 1)).unwrap(), 7);
        assert_eq!(theorem12_from_hodge(&[3, 3, 3], r(3, 1)).unwrap(), 0);
        assert_eq!(theorem12_from_hodge(&[0, 0, 3, 3], r(3, 2)).unwrap(), 6);
        // shifted input gives the same value
        assert_eq!(theorem12_from_hodge(&[2, 3, 7], r(4, 1)).unwrap(), 7);
        assert!(theorem12_from_hodge(&[0, 1], r(2, 1)).is_err());
    }

    #[test]
    fn pdiv_examples() {
        assert_eq!(pdiv_bound(4, 4).unwrap(), 4);
        assert_eq!(pdiv_bound(2, 1).unwrap(), 1);
        assert_eq!(pdiv_bound(3, 3).unwrap(), 3);
        assert!(pdiv_bound(0, 2).is_err());
    }

    #[test]
    fn quasi_special_examples() {
        assert_eq!(quasi_special_from_hodge(&[0, 3]), 3);
        assert_eq!(quasi_special_from_hodge(&[4, 4, 4]), 0);
        assert_eq!(quasi_special_from_hodge(&[0, 0, 0, 1, 1]), 2);
    }

    #[test]
    fn direct_sum_estimate_examples() {
        assert_eq!(direct_sum_estimate(&[0]).unwrap(), 0);
        assert_eq!(direct_sum_estimate(&[2, 2]).unwrap(), 3);
        assert_eq!(direct_sum_estimate(&[1, 0]).unwrap(), 1);
        assert_eq!(direct_sum_estimate(&[0, 0]).unwrap(), 1);
        assert_eq!(direct_sum_estimate(&[1, 3, 2]).unwrap(), 4);
        assert!(direct_sum_estimate(&[]).is_err());
    }

    #[test]
    fn certificate_merge_prefers_weakest() {
        use Certificate::*;
        assert_eq!(merge_certificate(Period(2), Period(3)), Period(6));
        assert_eq!(merge_certificate(Period(2), BoundAttained), BoundAttained);
        assert_eq!(merge_certificate(HorizonExhausted(9), BoundAttained), HorizonExhausted(9));
        assert_eq!(Period(5).to_string(), "Period(5)");
    }
}
