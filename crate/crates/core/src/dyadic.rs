//! Exact nonnegative binary fractions `numerator / 2^exponent`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::bits::BitString;

/// A nonnegative dyadic rational kept in lowest terms (odd numerator, or
/// zero with exponent 0).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct DyadicRational {
    numerator: BigUint,
    exponent: u32,
}

impl DyadicRational {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self { numerator: BigUint::one(), exponent: 0 }
    }

    pub fn new(numerator: BigUint, exponent: u32) -> Self {
        let mut d = Self { numerator, exponent };
        d.normalize();
        d
    }

    /// `2^{-k}`.
    pub fn pow2_neg(k: u32) -> Self {
        Self { numerator: BigUint::one(), exponent: k }
    }

    /// Value of the binary expansion `0.b₁b₂…bₙ`.
    pub fn from_expansion(bits: &BitString) -> Self {
        let mut num = BigUint::zero();
        for &b in bits.bits() {
            num <<= 1u32;
            if b {
                num += 1u32;
            }
        }
        Self::new(num, bits.len() as u32)
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    fn normalize(&mut self) {
        if self.numerator.is_zero() {
            self.exponent = 0;
            return;
        }
        let tz = self.numerator.trailing_zeros().unwrap_or(0).min(self.exponent as u64) as u32;
        if tz > 0 {
            self.numerator >>= tz;
            self.exponent -= tz;
        }
    }

    fn scaled_to(&self, exponent: u32) -> BigUint {
        debug_assert!(exponent >= self.exponent);
        &self.numerator << (exponent - self.exponent)
    }

    /// First `n` bits of the binary expansion after the point, i.e.
    /// `⌊x · 2^n⌋ mod 2^n` written in `n` bits (integer part dropped).
    pub fn expansion_prefix(&self, n: usize) -> BitString {
        let n32 = n as u32;
        let scaled = if n32 >= self.exponent {
            &self.numerator << (n32 - self.exponent)
        } else {
            &self.numerator >> (self.exponent - n32)
        };
        (0..n).rev().map(|i| scaled.bit(i as u64)).collect()
    }

    /// `⌊x · 2^n⌋ / 2^n`.
    pub fn truncate(&self, n: u32) -> Self {
        if self.exponent <= n {
            return self.clone();
        }
        Self::new(&self.numerator >> (self.exponent - n), n)
    }

    pub fn to_f64(&self) -> f64 {
        let shift = self.numerator.bits().saturating_sub(64);
        let top = (&self.numerator >> shift).to_f64().unwrap_or(f64::INFINITY);
        top * 2f64.powf(shift as f64 - self.exponent as f64)
    }

    pub fn numerator_hex(&self) -> String {
        self.numerator.to_str_radix(16)
    }
}

impl Add for &DyadicRational {
    type Output = DyadicRational;

    fn add(self, rhs: &DyadicRational) -> DyadicRational {
        let e = self.exponent.max(rhs.exponent);
        DyadicRational::new(self.scaled_to(e) + rhs.scaled_to(e), e)
    }
}

impl AddAssign<&DyadicRational> for DyadicRational {
    fn add_assign(&mut self, rhs: &DyadicRational) {
        *self = &*self + rhs;
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exponent.max(other.exponent);
        self.scaled_to(e).cmp(&other.scaled_to(e))
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.numerator, self.exponent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sums_are_exact_and_normalized() {
        let mut acc = DyadicRational::zero();
        for k in 1..=60 {
            acc += &DyadicRational::pow2_neg(k);
        }
        assert_eq!(acc.exponent(), 60);
        assert_eq!(acc.numerator(), &((BigUint::one() << 60u32) - 1u32));
        acc += &DyadicRational::pow2_neg(60);
        assert_eq!(acc, DyadicRational::one());
    }

    #[test]
    fn expansion_round_trip() {
        let b: BitString = "0110100111".parse().unwrap();
        let d = DyadicRational::from_expansion(&b);
        assert_eq!(d.expansion_prefix(10), b);
        assert_eq!(d.expansion_prefix(4).to_string(), "0110");
        assert_eq!(d.truncate(4), DyadicRational::from_expansion(&"0110".parse().unwrap()));
        assert!(d.truncate(4) <= d);
    }

    #[test]
    fn ordering_across_exponents() {
        let half = DyadicRational::pow2_neg(1);
        let three_eighths = DyadicRational::new(BigUint::from(3u32), 3);
        assert!(three_eighths < half);
        assert_eq!(DyadicRational::new(BigUint::from(4u32), 3), half);
        assert!((three_eighths.to_f64() - 0.375).abs() < 1e-15);
    }
}
