//! Exact p-adic linear algebra for F-crystals over the Witt vectors of a
//! finite field, with level torsion and isomorphism numbers.
//!
//! Everything is generic over the residue type ([`scalar::Coeff`]); the
//! aliases below fix it to [`BigInt`], which admits any precision. The
//! `*128` aliases trade range for speed.
//!
//! ```
//! use std::sync::Arc;
//! use fcrystal::{families, level_torsion, Context};
//!
//! let ctx = Arc::new(Context::new(3, 1, 40).unwrap());
//! let k3 = families::make_k3_isoclinic(&ctx, 5).unwrap();
//! let report = level_torsion::isomorphism_number(&k3, 20).unwrap();
//! assert_eq!(report.n_value(), Some(2));
//! ```

pub mod dvr_linalg;
pub mod error;
pub mod families;
pub mod fcrystal;
pub mod level_torsion;
pub mod scalar;
pub mod verify;
pub mod witt;

use num_bigint::BigInt;

pub use dvr_linalg::{Slope, ValList};
pub use error::{Error, Result};
pub use fcrystal::{AlphaBetaDelta, SlopeData};
pub use level_torsion::{Certificate, IsoReport, LevelTorsionResult, NStatus};
pub use witt::Valuation;

pub type Context = witt::PrimeContext<BigInt>;
pub type Witt = witt::WittApprox<BigInt>;
pub type Matrix = dvr_linalg::WMatrix<BigInt>;
pub type Crystal = fcrystal::FCrystal<BigInt>;

pub type Context128 = witt::PrimeContext<i128>;
pub type Witt128 = witt::WittApprox<i128>;
pub type Matrix128 = dvr_linalg::WMatrix<i128>;
pub type Crystal128 = fcrystal::FCrystal<i128>;
