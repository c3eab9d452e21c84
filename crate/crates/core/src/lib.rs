//! Sieve-theoretic tools for mod-`l` image statistics in families of curves.

pub mod arith;
pub mod brun;
pub mod census;
pub mod chebotarev;
pub mod curves;
pub mod error;
pub mod ffield;
pub mod groups;
pub mod heights;
pub mod poly;
pub mod scalar;
pub mod sieve;

pub use error::{Error, Result};
pub use scalar::SieveScalar;

/// Exact scalar used by every report that is compared against an oracle.
pub type Exact = num_rational::BigRational;
/// Floating scalar for quick estimates.
pub type Approx = f64;

pub type ExactSieveReport = sieve::SieveReport<Exact>;
pub type ApproxSieveReport = sieve::SieveReport<Approx>;
