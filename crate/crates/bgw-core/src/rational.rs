//! Exact rational scalars and the small combinatorial factors used throughout:
//! factorials, odd double factorials, and rising factorials of integers.
//!
//! All arithmetic is arbitrary precision (`num::BigRational`); values are kept
//! normalized (gcd 1, positive denominator) by construction.

use num::bigint::Sign;
use num::{BigInt, BigRational, One, Signed, Zero};
use std::fmt;

/// The scalar ground field: arbitrary-precision rationals, always normalized.
pub type Rat = BigRational;

/// Shorthand for an integer rational.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Shorthand for the fraction `p/q`. Panics on `q == 0`.
pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// One half, the offset appearing in every Pochhammer symbol of this engine.
pub fn one_half() -> Rat {
    rat(1, 2)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FactorialError {
    /// Double factorial is defined here only for odd arguments `>= -1`.
    InvalidDoubleFactorial(i64),
}

impl fmt::Display for FactorialError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactorialError::InvalidDoubleFactorial(m) => {
                write!(f, "double factorial requires odd m >= -1, got {}", m)
            }
        }
    }
}

impl std::error::Error for FactorialError {}

/// `n!` as a big integer.
pub fn factorial(n: u64) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    acc
}

/// Odd double factorial `m!! = m (m-2) ... 1` with the convention `(-1)!! = 1`.
///
/// Even or sub-`-1` arguments are rejected: only odd double factorials occur
/// in the correlator formulae.
pub fn double_factorial(m: i64) -> Result<BigInt, FactorialError> {
    if m < -1 || m % 2 == 0 {
        return Err(FactorialError::InvalidDoubleFactorial(m));
    }
    let mut acc = BigInt::one();
    let mut k = m;
    while k >= 2 {
        acc *= BigInt::from(k);
        k -= 2;
    }
    Ok(acc)
}

/// Rising factorial `(base)_k = base (base+1) ... (base+k-1)` of an integer base.
pub fn rising_factorial_int(base: i64, k: u32) -> BigInt {
    let mut acc = BigInt::one();
    for j in 0..k as i64 {
        acc *= BigInt::from(base + j);
    }
    acc
}

/// `2^e` as a rational, `e` of either sign.
pub fn pow2(e: i64) -> Rat {
    let two = BigInt::from(2);
    if e >= 0 {
        Rat::from_integer(two.pow(e as u32))
    } else {
        Rat::new(BigInt::one(), two.pow((-e) as u32))
    }
}

/// Canonical string form: `p/q` for non-integers, plain `p` otherwise.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse `p/q` or a bare integer; the result is normalized.
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    let parse_int = |t: &str| -> Result<BigInt, String> {
        t.trim()
            .parse::<BigInt>()
            .map_err(|e| format!("invalid integer {:?}: {}", t, e))
    };
    match s.split_once('/') {
        Some((p, q)) => {
            let num = parse_int(p)?;
            let den = parse_int(q)?;
            if den.is_zero() {
                return Err(format!("zero denominator in {:?}", s));
            }
            Ok(Rat::new(num, den))
        }
        None => Ok(Rat::from_integer(parse_int(s)?)),
    }
}

/// True if the stored representation is normalized: gcd 1, positive denominator.
pub fn is_normalized(r: &Rat) -> bool {
    if r.numer().is_zero() {
        return r.denom().is_one();
    }
    r.denom().sign() == Sign::Plus && num::Integer::gcd(r.numer(), r.denom()).abs().is_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_factorials() {
        assert_eq!(double_factorial(-1).unwrap(), BigInt::from(1));
        assert_eq!(double_factorial(1).unwrap(), BigInt::from(1));
        assert_eq!(double_factorial(5).unwrap(), BigInt::from(15));
        assert_eq!(double_factorial(9).unwrap(), BigInt::from(945));
        assert!(double_factorial(4).is_err());
        assert!(double_factorial(-3).is_err());
    }

    #[test]
    fn factorials() {
        assert_eq!(factorial(0), BigInt::one());
        assert_eq!(factorial(5), BigInt::from(120));
    }

    #[test]
    fn rising_factorial_of_integers() {
        assert_eq!(rising_factorial_int(4, 0), BigInt::one());
        assert_eq!(rising_factorial_int(4, 2), BigInt::from(20));
        assert_eq!(rising_factorial_int(1, 3), BigInt::from(6));
    }

    #[test]
    fn format_and_parse_round_trip() {
        for s in ["63/512", "-1/128", "0", "7", "-3/4"] {
            let r = parse_rat(s).unwrap();
            assert!(is_normalized(&r));
            assert_eq!(format_rat(&r), s);
        }
        // non-canonical input normalizes
        assert_eq!(format_rat(&parse_rat("21/96").unwrap()), "7/32");
        assert_eq!(format_rat(&parse_rat("4/-6").unwrap()), "-2/3");
        assert!(parse_rat("1/0").is_err());
    }

    #[test]
    fn construction_normalizes() {
        let r = rat(6, -8);
        assert!(is_normalized(&r));
        assert_eq!(r, rat(-3, 4));
    }
}
