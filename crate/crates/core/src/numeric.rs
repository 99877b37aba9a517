//! Shared numeric helpers: logarithms of big integers, careful big-rational
//! to float conversion, and exact `rational * pi^k` values.

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

/// Relative tolerance documented for every real-valued (logarithmic) output.
pub const REAL_RELATIVE_TOL: f64 = 1e-12;

/// Natural logarithm of `|n|` for a nonzero big integer.
///
/// Uses the top 64 bits of the integer plus the bit length, accurate to a few
/// ulps regardless of magnitude.
pub fn ln_abs_bigint(n: &BigInt) -> f64 {
    assert!(!n.is_zero(), "ln of zero");
    let bits = n.bits();
    if bits <= 63 {
        let v = n.abs().to_u64().expect("fits in u64");
        return (v as f64).ln();
    }
    let shift = bits - 63;
    let top: BigInt = n.abs() >> shift;
    let m = top.to_u64().expect("63 bits fit in u64");
    (m as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

/// Converts a big rational to `f64`, shifting out magnitude first so that
/// values far outside the `f64` integer range still convert accurately.
pub fn big_ratio_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let num = r.numer();
    let den = r.denom();
    let nb = num.bits() as i64;
    let db = den.bits() as i64;
    // Keep ~500 bits on each side; the quotient keeps full f64 precision.
    let shift_n = (nb - 500).max(0) as u64;
    let shift_d = (db - 500).max(0) as u64;
    let n_red: BigInt = num >> shift_n;
    let d_red: BigInt = den >> shift_d;
    let nf = n_red.to_f64().unwrap_or(f64::INFINITY * sign_f(num));
    let df = d_red.to_f64().unwrap_or(f64::INFINITY);
    (nf / df) * 2f64.powi((shift_n as i64 - shift_d as i64) as i32)
}

fn sign_f(n: &BigInt) -> f64 {
    match n.sign() {
        Sign::Minus => -1.0,
        _ => 1.0,
    }
}

/// An exact value of the form `coeff * pi^pi_pow` with `coeff` rational.
///
/// All explicit constants of the bound machinery that are free of logarithms
/// have this shape; keeping them exact makes the constant identities checkable
/// as equalities of rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiRat {
    pub coeff: BigRational,
    pub pi_pow: i32,
}

impl PiRat {
    pub fn one() -> Self {
        PiRat {
            coeff: BigRational::one(),
            pi_pow: 0,
        }
    }

    pub fn from_int(n: i64) -> Self {
        PiRat {
            coeff: BigRational::from_integer(BigInt::from(n)),
            pi_pow: 0,
        }
    }

    pub fn from_bigint(n: BigInt) -> Self {
        PiRat {
            coeff: BigRational::from_integer(n),
            pi_pow: 0,
        }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        PiRat {
            coeff: BigRational::new(BigInt::from(num), BigInt::from(den)),
            pi_pow: 0,
        }
    }

    pub fn from_rational(coeff: BigRational) -> Self {
        PiRat { coeff, pi_pow: 0 }
    }

    pub fn with_pi_pow(coeff: BigRational, pi_pow: i32) -> Self {
        PiRat { coeff, pi_pow }
    }

    pub fn mul(&self, other: &PiRat) -> PiRat {
        PiRat {
            coeff: &self.coeff * &other.coeff,
            pi_pow: self.pi_pow + other.pi_pow,
        }
    }

    pub fn div(&self, other: &PiRat) -> PiRat {
        PiRat {
            coeff: &self.coeff / &other.coeff,
            pi_pow: self.pi_pow - other.pi_pow,
        }
    }

    pub fn pow(&self, k: u32) -> PiRat {
        let mut coeff = BigRational::one();
        for _ in 0..k {
            coeff *= &self.coeff;
        }
        PiRat {
            coeff,
            pi_pow: self.pi_pow * k as i32,
        }
    }

    pub fn scale_int(&self, n: i64) -> PiRat {
        PiRat {
            coeff: &self.coeff * BigRational::from_integer(BigInt::from(n)),
            pi_pow: self.pi_pow,
        }
    }

    /// Adds two values with the same power of pi.
    pub fn add_same_pow(&self, other: &PiRat) -> PiRat {
        assert_eq!(self.pi_pow, other.pi_pow, "pi powers differ in addition");
        PiRat {
            coeff: &self.coeff + &other.coeff,
            pi_pow: self.pi_pow,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.coeff.is_positive()
    }

    pub fn to_f64(&self) -> f64 {
        big_ratio_to_f64(&self.coeff) * std::f64::consts::PI.powi(self.pi_pow)
    }
}

impl std::fmt::Display for PiRat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.pi_pow == 0 {
            write!(f, "{}/{}", self.coeff.numer(), self.coeff.denom())
        } else {
            write!(
                f,
                "{}/{} * pi^{}",
                self.coeff.numer(),
                self.coeff.denom(),
                self.pi_pow
            )
        }
    }
}

/// Serializable snapshot of a [`PiRat`]: exact numerator/denominator strings,
/// the power of pi, and the float approximation.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct PiRatRecord {
    pub numerator: String,
    pub denominator: String,
    pub pi_pow: i32,
    pub approx: f64,
}

impl From<&PiRat> for PiRatRecord {
    fn from(v: &PiRat) -> Self {
        PiRatRecord {
            numerator: v.coeff.numer().to_string(),
            denominator: v.coeff.denom().to_string(),
            pi_pow: v.pi_pow,
            approx: v.to_f64(),
        }
    }
}

/// Formats a real with 15 significant digits (the documented print precision).
pub fn fmt_real(x: f64) -> String {
    format!("{x:.14e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::FromPrimitive;

    #[test]
    fn ln_of_large_integer_matches_f64_path() {
        let n = BigInt::from(123_456_789_u64);
        assert!((ln_abs_bigint(&n) - 123_456_789f64.ln()).abs() < 1e-12);
        let big = BigInt::from(7u8).pow(500);
        let expected = 500.0 * 7f64.ln();
        assert!((ln_abs_bigint(&big) - expected).abs() / expected < 1e-14);
    }

    #[test]
    fn big_ratio_conversion_handles_huge_values() {
        let r = BigRational::new(BigInt::from(3u8).pow(700), BigInt::from(2u8).pow(600));
        let expected = (700.0 * 3f64.ln() - 600.0 * 2f64.ln()).exp();
        let got = big_ratio_to_f64(&r);
        assert!((got - expected).abs() / expected < 1e-10);
        let small = BigRational::from_f64(0.125).unwrap();
        assert_eq!(big_ratio_to_f64(&small), 0.125);
    }

    #[test]
    fn pirat_arithmetic() {
        let a = PiRat::with_pi_pow(BigRational::new(BigInt::from(3), BigInt::from(2)), 1);
        let b = a.pow(2);
        assert_eq!(b.pi_pow, 2);
        assert_eq!(b.coeff, BigRational::new(BigInt::from(9), BigInt::from(4)));
        assert!((b.to_f64() - 2.25 * std::f64::consts::PI.powi(2)).abs() < 1e-12);
    }
}
