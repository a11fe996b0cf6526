//! Exact big-integer / big-rational helpers.
//!
//! All trigonometric phases in this crate are reduced modulo 1 in exact
//! rational arithmetic before any conversion to floating point. Stage bases
//! grow geometrically, so naive float phases lose every significant digit
//! within a handful of levels.

use num::bigint::{BigInt, Sign};
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};

use crate::scalar::{Scalar, C};

/// A frequency carried exactly as a reduced big rational.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactFrequency(pub BigRational);

impl ExactFrequency {
    pub fn from_int(v: impl Into<BigInt>) -> Self {
        ExactFrequency(BigRational::from_integer(v.into()))
    }

    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Self {
        ExactFrequency(BigRational::new(numer.into(), denom.into()))
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }
}

impl From<BigRational> for ExactFrequency {
    fn from(r: BigRational) -> Self {
        ExactFrequency(r)
    }
}

/// Fractional part of `r`, exact, in `[0, 1)`.
pub fn frac_part(r: &BigRational) -> BigRational {
    r - r.floor()
}

/// `e^{2 pi i r}` with the phase reduced modulo 1 exactly first.
pub fn unit_phase<F: Scalar>(r: &BigRational) -> C<F> {
    let frac = frac_part(r);
    let t = rational_to_f64(&frac);
    let angle = F::from_f64(t) * F::TAU();
    C::new(angle.cos(), angle.sin())
}

/// `e^{-2 pi i r}`, exact mod-1 reduction.
pub fn unit_phase_neg<F: Scalar>(r: &BigRational) -> C<F> {
    unit_phase::<F>(&-r)
}

/// Big rational to f64. `BigRational::to_f64` handles magnitudes beyond the
/// f64 range by returning infinities, which is the behaviour we want for
/// truncation bounds.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Natural log of a positive big integer, robust to values far beyond the
/// f64 range.
pub fn log_big(n: &BigInt) -> f64 {
    assert!(n.is_positive(), "log of non-positive integer");
    if let Some(x) = n.to_f64() {
        if x.is_finite() {
            return x.ln();
        }
    }
    // Top 64 bits give the mantissa, the rest is a power of two.
    let bits = n.bits();
    let shift = bits - 64;
    let top = (n >> shift).to_f64().expect("64-bit mantissa");
    top.ln() + (shift as f64) * std::f64::consts::LN_2
}

/// Deterministic Miller-Rabin primality test for u64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    // These witnesses are deterministic for all n < 2^64.
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Parse a decimal string (optionally signed) into a big integer.
pub fn parse_big_int(s: &str) -> Option<BigInt> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let (sign, digits) = match s.strip_prefix('-') {
        Some(rest) => (Sign::Minus, rest),
        None => (Sign::Plus, s.strip_prefix('+').unwrap_or(s)),
    };
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let mag = digits.bytes().fold(BigInt::zero(), |acc, b| {
        acc * 10 + BigInt::from(b - b'0')
    });
    Some(if sign == Sign::Minus { -mag } else { mag })
}

pub fn big(v: i64) -> BigInt {
    BigInt::from(v)
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(big(n), big(d))
}

pub fn one_rational() -> BigRational {
    BigRational::one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::complex::Complex64;

    #[test]
    fn frac_part_handles_negatives() {
        assert_eq!(frac_part(&ratio(-1, 3)), ratio(2, 3));
        assert_eq!(frac_part(&ratio(7, 3)), ratio(1, 3));
        assert_eq!(frac_part(&ratio(4, 2)), ratio(0, 1));
    }

    #[test]
    fn unit_phase_quarter_turn() {
        let z: Complex64 = unit_phase(&ratio(1, 4));
        assert!((z - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn unit_phase_reduces_huge_arguments() {
        // 7^9 + 1/3 and 1/3 must give the same phase.
        let huge = BigRational::from_integer(big(7).pow(9)) + ratio(1, 3);
        let za: Complex64 = unit_phase(&huge);
        let zb: Complex64 = unit_phase(&ratio(1, 3));
        assert!((za - zb).norm() < 1e-12);
    }

    #[test]
    fn primality_small_cases() {
        assert!(is_prime_u64(2));
        assert!(is_prime_u64(7));
        assert!(is_prime_u64(104729));
        assert!(!is_prime_u64(1));
        assert!(!is_prime_u64(49));
        assert!(!is_prime_u64(561)); // Carmichael
    }

    #[test]
    fn parse_big_decimal_strings() {
        assert_eq!(parse_big_int("12345"), Some(big(12345)));
        assert_eq!(parse_big_int("-7"), Some(big(-7)));
        assert_eq!(
            parse_big_int("123456789012345678901234567890").map(|v| v.to_string()),
            Some("123456789012345678901234567890".to_string())
        );
        assert_eq!(parse_big_int("12x"), None);
        assert_eq!(parse_big_int(""), None);
    }

    #[test]
    fn log_big_matches_f64_and_scales() {
        let n = big(7).pow(9);
        assert!((log_big(&n) - 9.0 * 7f64.ln()).abs() < 1e-9);
        let huge = big(7).pow(2500);
        assert!((log_big(&huge) - 2500.0 * 7f64.ln()).abs() < 1e-6 * 2500.0 * 7f64.ln());
    }
}
