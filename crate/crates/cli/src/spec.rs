//! Crystal specification files.

use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use fcrystal::dvr_linalg::{elementary_divisor_valuations, WMatrix};
use fcrystal::families::Family;
use fcrystal::{Context, Crystal, Error, ValList};

use crate::CliError;

/// An integer written either as a JSON number or as a decimal string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IntLit {
    Num(i64),
    Str(String),
}

impl IntLit {
    fn to_bigint(&self) -> Result<BigInt, CliError> {
        match self {
            IntLit::Num(v) => Ok(BigInt::from(*v)),
            IntLit::Str(s) => {
                BigInt::from_str(s.trim()).map_err(|_| CliError::Parse(format!("not an integer: {s:?}")))
            }
        }
    }
}

/// A matrix entry: the coefficients of a polynomial in `x` (constant term
/// first), or a bare integer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Scalar(IntLit),
    Poly(Vec<IntLit>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalSpecFile {
    pub p: u64,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
    pub rank: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<Entry>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summands: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
}

impl CrystalSpecFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let spec: CrystalSpecFile =
            serde_json::from_str(text).map_err(|e| CliError::Parse(format!("bad spec file: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn read(path: &str) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("cannot read {path}: {e}")))?;
        Self::parse(&text)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Parse(msg));
        if self.rank == 0 {
            return bad("rank must be positive".into());
        }
        match (&self.matrix, &self.family) {
            (Some(_), Some(_)) => return bad("give either a matrix or a family, not both".into()),
            (None, None) => return bad("spec needs a matrix or a family".into()),
            (Some(rows), None) => {
                if rows.len() != self.rank || rows.iter().any(|row| row.len() != self.rank) {
                    return bad(format!("matrix must be {0}x{0}", self.rank));
                }
                for entry in rows.iter().flatten() {
                    if let Entry::Poly(c) = entry {
                        if c.is_empty() || c.len() > self.m {
                            return bad(format!("entries are lists of 1 to {} coefficients", self.m));
                        }
                    }
                }
            }
            (None, Some(f)) => {
                if f.rank() != self.rank {
                    return bad(format!("family has rank {}, spec says {}", f.rank(), self.rank));
                }
            }
        }
        if let Some(s) = &self.summands {
            if s.iter().sum::<usize>() != self.rank || s.contains(&0) {
                return bad(format!("summand sizes {s:?} do not partition rank {}", self.rank));
            }
        }
        Ok(())
    }

    pub fn context(&self, precision: u32) -> Result<Arc<Context>, CliError> {
        Ok(Arc::new(Context::new(self.p, self.m, precision)?))
    }

    fn matrix_at(&self, ctx: &Arc<Context>) -> Result<Option<WMatrix<BigInt>>, CliError> {
        let Some(rows) = &self.matrix else { return Ok(None) };
        let mut entries = Vec::with_capacity(self.rank * self.rank);
        for entry in rows.iter().flatten() {
            let coeffs = match entry {
                Entry::Scalar(v) => vec![v.to_bigint()?],
                Entry::Poly(c) => c.iter().map(IntLit::to_bigint).collect::<Result<_, _>>()?,
            };
            entries.push(ctx.from_coeffs(coeffs));
        }
        Ok(Some(WMatrix::from_entries(ctx, self.rank, self.rank, entries)?))
    }

    /// The crystal at precision `N`.
    pub fn build(&self, precision: u32) -> Result<Crystal, CliError> {
        let ctx = self.context(precision)?;
        let crystal = match (self.matrix_at(&ctx)?, &self.family) {
            (Some(a), _) => Crystal::new(Arc::clone(&ctx), a)?,
            (None, Some(f)) => f.build(&ctx)?,
            (None, None) => unreachable!("validated"),
        };
        Ok(match &self.summands {
            Some(s) => crystal.with_summands(s.clone())?,
            None => crystal,
        })
    }

    /// Elementary divisor valuations of the matrix at precision `N`.
    pub fn smith(&self, precision: u32) -> Result<ValList, CliError> {
        let ctx = self.context(precision)?;
        match self.matrix_at(&ctx)? {
            Some(a) => Ok(elementary_divisor_valuations(&ctx, &a)?),
            None => Ok(self.build(precision)?.hodge().clone()),
        }
    }
}

/// Precisions tried, in order, when the Hodge slopes are not yet known.
pub const PROBE_PRECISIONS: [u32; 7] = [32, 64, 128, 256, 512, 1024, 2048];

/// Runs `f` at increasing precision until the matrix is no longer singular.
pub fn probe<R>(mut f: impl FnMut(u32) -> Result<R, CliError>) -> Result<R, CliError> {
    for n in PROBE_PRECISIONS {
        match f(n) {
            Err(CliError::Numeric(Error::SingularAtPrecision)) => continue,
            other => return other,
        }
    }
    Err(CliError::Numeric(Error::SingularAtPrecision))
}

/// `N = max(Q·e_r, m·Σe) + 2`: enough for `Q` iterates and for the
/// characteristic polynomial of `φ^m`.
pub fn auto_precision(hodge: &[u32], m: usize, horizon: u64) -> u64 {
    let er = hodge.iter().copied().max().unwrap_or(0) as u64;
    let s: u64 = hodge.iter().map(|&e| e as u64).sum();
    (horizon * er).max(m as u64 * s) + 2
}

/// Parses an inline matrix `"a,b;c,d"` of integers (rows separated by `;`).
pub fn inline_matrix(text: &str, p: u64) -> Result<CrystalSpecFile, CliError> {
    let rows: Vec<Vec<Entry>> = text
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|v| {
                    let v = v.trim();
                    BigInt::from_str(v)
                        .map(|_| Entry::Scalar(IntLit::Str(v.to_string())))
                        .map_err(|_| CliError::Parse(format!("not an integer: {v:?}")))
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let spec = CrystalSpecFile { p, m: 1, precision: None, rank: rows.len(), matrix: Some(rows), summands: None, family: None };
    spec.validate()?;
    Ok(spec)
}
