//! Matrix algebra over the truncated DVR `W(F_{p^m}) / p^N`.
//!
//! Elementary divisors are computed by Smith reduction that only ever divides
//! by units; characteristic polynomials use the division-free Berkowitz
//! recurrence, so coefficient valuations are trustworthy up to `N`.

use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Coeff;
use crate::witt::{PrimeContext, Valuation, WittApprox};

/// Exact rational slope.
pub type Slope = Ratio<i64>;

/// A dense matrix over the truncated Witt vectors, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct WMatrix<T: Coeff> {
    rows: usize,
    cols: usize,
    entries: Vec<WittApprox<T>>,
    ctx_id: u64,
}

impl<T: Coeff> std::fmt::Debug for WMatrix<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "WMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", &self.entries[i * self.cols..(i + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

impl<T: Coeff> WMatrix<T> {
    pub fn from_entries(
        ctx: &PrimeContext<T>,
        rows: usize,
        cols: usize,
        entries: Vec<WittApprox<T>>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch("matrices must be non-empty".into()));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if entries.iter().any(|e| e.ctx_id() != ctx.id()) {
            return Err(Error::ContextMismatch);
        }
        Ok(WMatrix { rows, cols, entries, ctx_id: ctx.id() })
    }

    /// Matrix of small integers (rows of equal length).
    pub fn from_ints(ctx: &PrimeContext<T>, rows: &[Vec<i64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let entries = rows.iter().flatten().map(|&v| ctx.from_int(v)).collect();
        Self::from_entries(ctx, r, c, entries)
    }

    pub fn zeros(ctx: &PrimeContext<T>, rows: usize, cols: usize) -> Self {
        WMatrix { rows, cols, entries: vec![ctx.zero(); rows * cols], ctx_id: ctx.id() }
    }

    pub fn identity(ctx: &PrimeContext<T>, n: usize) -> Self {
        let mut m = Self::zeros(ctx, n, n);
        for i in 0..n {
            m.entries[i * n + i] = ctx.one();
        }
        m
    }

    /// `diag(p^{e_1}, ..., p^{e_n})`.
    pub fn p_power_diagonal(ctx: &PrimeContext<T>, exps: &[u32]) -> Self {
        let n = exps.len();
        let mut m = Self::zeros(ctx, n, n);
        for (i, &e) in exps.iter().enumerate() {
            m.entries[i * n + i] = ctx.p_power(e);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn ctx_id(&self) -> u64 {
        self.ctx_id
    }

    pub fn get(&self, i: usize, j: usize) -> &WittApprox<T> {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: WittApprox<T>) {
        assert_eq!(v.ctx_id(), self.ctx_id, "entry from a foreign context");
        self.entries[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[WittApprox<T>] {
        &self.entries
    }

    pub fn transpose(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(self.get(i, j).clone());
            }
        }
        WMatrix { rows: self.cols, cols: self.rows, entries, ctx_id: self.ctx_id }
    }

    /// Every entry multiplied by `p^k`.
    pub fn scale_p_power(&self, ctx: &PrimeContext<T>, k: u32) -> Self {
        let entries = self.entries.iter().map(|e| ctx.mul_p_power(e, k)).collect();
        WMatrix { entries, ..self.clone() }
    }

    /// Every entry divided by `p^k`; `None` if some entry has valuation below `k`.
    pub fn div_p_power(&self, ctx: &PrimeContext<T>, k: u32) -> Option<Self> {
        let mut entries = Vec::with_capacity(self.entries.len());
        for e in &self.entries {
            if !e.is_zero() && ctx.valuation_below(e, k).is_some() {
                return None;
            }
            entries.push(ctx.div_p_power(e, k));
        }
        Some(WMatrix { entries, ..self.clone() })
    }

    /// Minimum entry valuation.
    pub fn min_valuation(&self, ctx: &PrimeContext<T>) -> Valuation {
        self.entries
            .iter()
            .map(|e| ctx.valuation(e))
            .min()
            .unwrap_or(Valuation::AtLeast(ctx.precision()))
    }

    /// Block-diagonal matrix with the given square blocks.
    pub fn block_diagonal(ctx: &PrimeContext<T>, blocks: &[&WMatrix<T>]) -> Result<Self> {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        if blocks.iter().any(|b| !b.is_square()) {
            return Err(Error::DimensionMismatch("blocks must be square".into()));
        }
        if blocks.iter().any(|b| b.ctx_id != ctx.id()) {
            return Err(Error::ContextMismatch);
        }
        let mut out = Self::zeros(ctx, n, n);
        let mut off = 0;
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out.entries[(off + i) * n + off + j] = b.get(i, j).clone();
                }
            }
            off += b.rows;
        }
        Ok(out)
    }

    /// Square sub-block on rows and columns `start..start + len`.
    pub fn principal_block(&self, start: usize, len: usize) -> Self {
        let mut entries = Vec::with_capacity(len * len);
        for i in start..start + len {
            for j in start..start + len {
                entries.push(self.get(i, j).clone());
            }
        }
        WMatrix { rows: len, cols: len, entries, ctx_id: self.ctx_id }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.entries.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// `row[target] -= factor * row[source]`, restricted to columns `from..`.
    fn row_axpy(&mut self, ctx: &PrimeContext<T>, target: usize, source: usize, factor: &WittApprox<T>, from: usize) {
        for j in from..self.cols {
            let s = self.get(source, j);
            if s.is_zero() {
                continue;
            }
            let t = ctx.mul_unchecked(factor, s);
            let idx = target * self.cols + j;
            self.entries[idx] = ctx.sub_unchecked(&self.entries[idx], &t);
        }
    }

    fn col_axpy(&mut self, ctx: &PrimeContext<T>, target: usize, source: usize, factor: &WittApprox<T>, from: usize) {
        for i in from..self.rows {
            let s = self.get(i, source);
            if s.is_zero() {
                continue;
            }
            let t = ctx.mul_unchecked(factor, s);
            let idx = i * self.cols + target;
            self.entries[idx] = ctx.sub_unchecked(&self.entries[idx], &t);
        }
    }
}

fn check_ctx<T: Coeff>(ctx: &PrimeContext<T>, m: &WMatrix<T>) -> Result<()> {
    if m.ctx_id == ctx.id() {
        Ok(())
    } else {
        Err(Error::ContextMismatch)
    }
}

pub fn matrix_multiply<T: Coeff>(ctx: &PrimeContext<T>, a: &WMatrix<T>, b: &WMatrix<T>) -> Result<WMatrix<T>> {
    check_ctx(ctx, a)?;
    check_ctx(ctx, b)?;
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} times {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut entries = Vec::with_capacity(a.rows * b.cols);
    for i in 0..a.rows {
        for j in 0..b.cols {
            let mut acc = ctx.zero();
            for k in 0..a.cols {
                let x = a.get(i, k);
                if x.is_zero() {
                    continue;
                }
                let y = b.get(k, j);
                if y.is_zero() {
                    continue;
                }
                acc = ctx.add_unchecked(&acc, &ctx.mul_unchecked(x, y));
            }
            entries.push(acc);
        }
    }
    Ok(WMatrix { rows: a.rows, cols: b.cols, entries, ctx_id: ctx.id() })
}

/// Entrywise `σ^k`.
pub fn sigma_twist<T: Coeff>(ctx: &PrimeContext<T>, a: &WMatrix<T>, k: u64) -> Result<WMatrix<T>> {
    check_ctx(ctx, a)?;
    if ctx.degree() == 1 || k % ctx.degree() as u64 == 0 {
        return Ok(a.clone());
    }
    let entries = a.entries.iter().map(|e| ctx.frobenius_unchecked(e, k)).collect();
    Ok(WMatrix { entries, ..a.clone() })
}

/// Sorted list of elementary divisor valuations (Hodge slopes of a lattice
/// quotient).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ValList(Vec<u32>);

impl ValList {
    pub fn new(mut vals: Vec<u32>) -> Self {
        vals.sort_unstable();
        ValList(vals)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> u32 {
        self.0.first().copied().unwrap_or(0)
    }

    pub fn max(&self) -> u32 {
        self.0.last().copied().unwrap_or(0)
    }

    pub fn sum(&self) -> u64 {
        self.0.iter().map(|&v| v as u64).sum()
    }
}

impl From<ValList> for Vec<u32> {
    fn from(v: ValList) -> Self {
        v.0
    }
}

/// Smith reduction `L · A · R = diag(p^{e_i} · u_i)` with unimodular `L`, `R`.
pub(crate) struct SmithReduction<T: Coeff> {
    /// Diagonal valuations in pivot order (nondecreasing).
    pub divisors: Vec<Valuation>,
    /// Unit parts of the pivots.
    pub pivot_units: Vec<WittApprox<T>>,
    pub left: Option<WMatrix<T>>,
    pub right: Option<WMatrix<T>>,
}

/// Smith reduction over the truncated DVR. Pivots are minimum-valuation
/// entries, ties broken by smallest `(row, col)`.
pub(crate) fn smith_reduce<T: Coeff>(
    ctx: &PrimeContext<T>,
    a: &WMatrix<T>,
    with_transforms: bool,
) -> Result<SmithReduction<T>> {
    check_ctx(ctx, a)?;
    if !a.is_square() {
        return Err(Error::DimensionMismatch("Smith reduction needs a square matrix".into()));
    }
    let n = a.rows;
    let big_n = ctx.precision();
    let mut w = a.clone();
    let mut left = with_transforms.then(|| WMatrix::identity(ctx, n));
    let mut right = with_transforms.then(|| WMatrix::identity(ctx, n));
    let mut divisors = Vec::with_capacity(n);
    let mut pivot_units = Vec::with_capacity(n);
    let mut floor_v = 0u32;

    for k in 0..n {
        // minimum valuation in the trailing block; divisors are nondecreasing,
        // so an entry at the previous pivot's valuation is already minimal
        let mut best: Option<(u32, usize, usize)> = None;
        'scan: for i in k..n {
            for j in k..n {
                let e = w.get(i, j);
                if e.is_zero() {
                    continue;
                }
                let cap = best.map_or(big_n, |b| b.0);
                if let Some(v) = ctx.valuation_below(e, cap) {
                    best = Some((v, i, j));
                    if v <= floor_v {
                        break 'scan;
                    }
                }
            }
        }
        let Some((v, pi, pj)) = best else {
            for _ in k..n {
                divisors.push(Valuation::AtLeast(big_n));
            }
            break;
        };
        floor_v = v;
        w.swap_rows(k, pi);
        w.swap_cols(k, pj);
        if let Some(l) = left.as_mut() {
            l.swap_rows(k, pi);
        }
        if let Some(r) = right.as_mut() {
            r.swap_cols(k, pj);
        }
        let pivot = w.get(k, k).clone();
        let unit = ctx.div_p_power(&pivot, v);
        let unit_inv = ctx.unit_inverse(&unit)?;
        for i in k + 1..n {
            let e = w.get(i, k);
            if e.is_zero() {
                continue;
            }
            let factor = ctx.mul_unchecked(&ctx.div_p_power(e, v), &unit_inv);
            w.row_axpy(ctx, i, k, &factor, k);
            if let Some(l) = left.as_mut() {
                l.row_axpy(ctx, i, k, &factor, 0);
            }
        }
        for j in k + 1..n {
            let e = w.get(k, j);
            if e.is_zero() {
                continue;
            }
            let factor = ctx.mul_unchecked(&ctx.div_p_power(e, v), &unit_inv);
            w.col_axpy(ctx, j, k, &factor, k);
            if let Some(r) = right.as_mut() {
                r.col_axpy(ctx, j, k, &factor, 0);
            }
        }
        divisors.push(Valuation::Exact(v));
        pivot_units.push(unit);
    }
    Ok(SmithReduction { divisors, pivot_units, left, right })
}

/// Valuations `e_1 ≤ ... ≤ e_r` of the Smith normal form `diag(p^{e_i})`.
///
/// Errors with `SingularAtPrecision` when some divisor is indistinguishable
/// from zero and with `PrecisionExhausted` when a divisor reaches `N - 1`.
pub fn elementary_divisor_valuations<T: Coeff>(ctx: &PrimeContext<T>, a: &WMatrix<T>) -> Result<ValList> {
    let red = smith_reduce(ctx, a, false)?;
    vals_from_divisors(ctx, &red.divisors)
}

fn vals_from_divisors<T: Coeff>(ctx: &PrimeContext<T>, divisors: &[Valuation]) -> Result<ValList> {
    let n = ctx.precision();
    let mut out = Vec::with_capacity(divisors.len());
    for d in divisors {
        match *d {
            Valuation::AtLeast(_) => return Err(Error::SingularAtPrecision),
            Valuation::Exact(v) if v + 1 >= n => {
                return Err(Error::PrecisionExhausted { needed: v + 2, available: n })
            }
            Valuation::Exact(v) => out.push(v),
        }
    }
    Ok(ValList::new(out))
}

/// Coefficient valuations of a monic polynomial, indexed by the power of `t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyVal {
    pub coeff_vals: Vec<(usize, Valuation)>,
}

impl PolyVal {
    pub fn degree(&self) -> usize {
        self.coeff_vals.iter().map(|c| c.0).max().unwrap_or(0)
    }

    pub fn valuation_at(&self, power: usize) -> Option<Valuation> {
        self.coeff_vals.iter().find(|c| c.0 == power).map(|c| c.1)
    }
}

/// Coefficients of `det(tI - A)`, lowest power first (length `n + 1`, monic).
pub fn char_poly_coeffs<T: Coeff>(ctx: &PrimeContext<T>, a: &WMatrix<T>) -> Result<Vec<WittApprox<T>>> {
    check_ctx(ctx, a)?;
    if !a.is_square() {
        return Err(Error::DimensionMismatch("characteristic polynomial needs a square matrix".into()));
    }
    let n = a.rows;
    // Berkowitz: poly of the leading k×k block, highest degree first
    let mut poly: Vec<WittApprox<T>> = vec![ctx.one()];
    for k in 0..n {
        // Toeplitz column: 1, -a_kk, -R C, -R A_k C, ..., -R A_k^{k-1} C
        let mut col = Vec::with_capacity(k + 2);
        col.push(ctx.one());
        col.push(ctx.neg(a.get(k, k)));
        // vec = C (column k, rows 0..k)
        let mut vec: Vec<WittApprox<T>> = (0..k).map(|i| a.get(i, k).clone()).collect();
        for _ in 0..k {
            let mut dot = ctx.zero();
            for (j, x) in vec.iter().enumerate() {
                dot = ctx.add_unchecked(&dot, &ctx.mul_unchecked(a.get(k, j), x));
            }
            col.push(ctx.neg(&dot));
            // vec = A_k * vec
            let next: Vec<WittApprox<T>> = (0..k)
                .map(|i| {
                    let mut s = ctx.zero();
                    for (j, x) in vec.iter().enumerate() {
                        s = ctx.add_unchecked(&s, &ctx.mul_unchecked(a.get(i, j), x));
                    }
                    s
                })
                .collect();
            vec = next;
        }
        // new poly = T · poly, T lower-triangular Toeplitz (k+2)×(k+1)
        let mut next = Vec::with_capacity(k + 2);
        for i in 0..k + 2 {
            let mut s = ctx.zero();
            for (j, c) in poly.iter().enumerate() {
                if j > i {
                    break;
                }
                if i - j < col.len() {
                    s = ctx.add_unchecked(&s, &ctx.mul_unchecked(&col[i - j], c));
                }
            }
            next.push(s);
        }
        poly = next;
    }
    poly.reverse();
    Ok(poly)
}

/// Valuations of the coefficients of `det(tI - A)`.
pub fn char_poly<T: Coeff>(ctx: &PrimeContext<T>, a: &WMatrix<T>) -> Result<PolyVal> {
    let coeffs = char_poly_coeffs(ctx, a)?;
    Ok(PolyVal {
        coeff_vals: coeffs.iter().enumerate().map(|(i, c)| (i, ctx.valuation(c))).collect(),
    })
}

/// `det(A)`, as `(-1)^n` times the constant term of the characteristic polynomial.
pub fn determinant<T: Coeff>(ctx: &PrimeContext<T>, a: &WMatrix<T>) -> Result<WittApprox<T>> {
    let coeffs = char_poly_coeffs(ctx, a)?;
    let c0 = coeffs[0].clone();
    Ok(if a.rows % 2 == 0 { c0 } else { ctx.neg(&c0) })
}

/// Slopes of the lower convex hull of the coefficient-valuation points of a
/// monic polynomial, each divided by `denominator`, with multiplicity.
///
/// The returned slopes are the valuations of the roots, ascending.
pub fn newton_polygon_slopes(pv: &PolyVal, denominator: u32, precision: u32) -> Result<Vec<Slope>> {
    if denominator == 0 {
        return Err(Error::BadParameters("denominator must be positive".into()));
    }
    let r = pv.degree();
    if pv.valuation_at(r) != Some(Valuation::Exact(0)) {
        return Err(Error::BadParameters("polynomial is not monic".into()));
    }
    // points (k, v(c_{r-k})): start at (0, 0), end at (r, v(c_0))
    let mut pts: Vec<(i64, i64)> = Vec::new();
    let mut unknown: Vec<i64> = Vec::new();
    for k in 0..=r {
        match pv.valuation_at(r - k) {
            Some(Valuation::Exact(v)) => pts.push((k as i64, v as i64)),
            _ => unknown.push(k as i64),
        }
    }
    if pts.last().map(|p| p.0) != Some(r as i64) {
        // constant term is not known; no end point
        return Err(Error::PrecisionExhausted {
            needed: precision.saturating_add(1),
            available: precision,
        });
    }
    let hull = lower_hull(&pts);
    // points lost to truncation must sit on or above the hull
    for k in unknown {
        let at = hull_value(&hull, k);
        if at > Ratio::from_integer(precision as i64) {
            let needed = at.ceil().to_integer() as u32 + 1;
            return Err(Error::PrecisionExhausted { needed, available: precision });
        }
    }
    let mut slopes = Vec::with_capacity(r);
    for w in hull.windows(2) {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        let s = Ratio::new(y1 - y0, (x1 - x0) * denominator as i64);
        for _ in 0..(x1 - x0) {
            slopes.push(s);
        }
    }
    Ok(slopes)
}

fn lower_hull(pts: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for &p in pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // remove b if it lies on or above segment a→p
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

fn hull_value(hull: &[(i64, i64)], x: i64) -> Ratio<i64> {
    for w in hull.windows(2) {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        if x0 <= x && x <= x1 {
            return Ratio::from_integer(y0) + Ratio::new((y1 - y0) * (x - x0), x1 - x0);
        }
    }
    Ratio::zero()
}

/// `p^shift · A^{-1}` computed through the Smith reduction
/// `A^{-1} = R · diag(p^{-e_i} u_i^{-1}) · L`; requires `shift ≥ e_r`.
pub(crate) fn scaled_inverse<T: Coeff>(ctx: &PrimeContext<T>, a: &WMatrix<T>, shift: u32) -> Result<WMatrix<T>> {
    let red = smith_reduce(ctx, a, true)?;
    let vals = vals_from_divisors(ctx, &red.divisors)?;
    if vals.max() > shift {
        return Err(Error::BadParameters(format!(
            "p^{shift} · A^-1 is not integral (largest divisor p^{})",
            vals.max()
        )));
    }
    let n = a.rows;
    let left = red.left.expect("transforms requested");
    let right = red.right.expect("transforms requested");
    let mut mid = WMatrix::zeros(ctx, n, n);
    for (i, (d, u)) in red.divisors.iter().zip(&red.pivot_units).enumerate() {
        let v = d.exact().expect("checked above");
        let inv = ctx.unit_inverse(u)?;
        mid.set(i, i, ctx.mul_p_power(&inv, shift - v));
    }
    let tmp = matrix_multiply(ctx, &right, &mid)?;
    matrix_multiply(ctx, &tmp, &left)
}
