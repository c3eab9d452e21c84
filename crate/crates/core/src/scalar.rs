//! Scalar abstraction for sieve densities, sums and bounds.
//!
//! Everything that the sieve modules accumulate (local densities, `L(Q)`,
//! Bonferroni sums, main terms) is written against [`SieveScalar`]. The exact
//! instance is [`BigRational`]; `f64` is available for quick estimates and for
//! checking that the floating path tracks the exact one.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};

pub trait SieveScalar:
    Num + Signed + Clone + PartialOrd + Debug + Send + Sync + 'static
{
    /// The value `num / den`; `den` must be nonzero.
    fn from_ratio(num: i128, den: i128) -> Self;

    fn from_bigint(n: &BigInt) -> Self;

    fn to_f64(&self) -> f64;

    /// Wire form used in JSON reports.
    fn to_wire(&self) -> String;

    fn from_u64(n: u64) -> Self {
        Self::from_ratio(n as i128, 1)
    }

    /// `self^e` for small nonnegative `e`.
    fn powu(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = acc * self.clone();
        }
        acc
    }

    fn max_of(a: Self, b: Self) -> Self {
        if a >= b {
            a
        } else {
            b
        }
    }
}

impl SieveScalar for BigRational {
    fn from_ratio(num: i128, den: i128) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_bigint(n: &BigInt) -> Self {
        BigRational::from_integer(n.clone())
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            // numerator and denominator may individually overflow f64
            let n = self.numer().bits() as i64;
            let d = self.denom().bits() as i64;
            let shift = (n - d).clamp(-1000, 1000);
            let scaled = if shift > 0 {
                BigRational::new(self.numer().clone(), self.denom() << shift as usize)
            } else {
                BigRational::new(self.numer() << (-shift) as usize, self.denom().clone())
            };
            ToPrimitive::to_f64(&scaled).unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
        })
    }

    fn to_wire(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }
}

impl SieveScalar for f64 {
    fn from_ratio(num: i128, den: i128) -> Self {
        num as f64 / den as f64
    }

    fn from_bigint(n: &BigInt) -> Self {
        ToPrimitive::to_f64(n).unwrap_or(f64::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_wire(&self) -> String {
        format!("{self}")
    }
}

/// Parse the `"num/den"` wire form back into an exact rational.
pub fn parse_wire_rational(s: &str) -> Option<BigRational> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(BigRational::new(n, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_round_trip() {
        let x = BigRational::from_ratio(-6, 4);
        assert_eq!(x.to_wire(), "-3/2");
        assert_eq!(parse_wire_rational(&x.to_wire()), Some(x));
        assert_eq!(BigRational::from_ratio(3, 1).to_wire(), "3/1");
    }

    #[test]
    fn huge_rational_to_f64() {
        let big = BigInt::from(10u32).pow(400);
        let x = BigRational::new(big.clone() * 3, big * 2);
        assert!((SieveScalar::to_f64(&x) - 1.5).abs() < 1e-12);
    }
}
