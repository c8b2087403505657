//! Computable measures on infinite binary sequences, given by their cylinder
//! masses `µ(Γ_x)`.

use std::fmt;

use num_bigint::BigUint;

use crate::bits::BitString;
use crate::dyadic::DyadicRational;

pub trait RecursiveMeasure: fmt::Debug + Send + Sync {
    fn name(&self) -> String;

    /// `µ(Γ_x)`, exact.
    fn cylinder_mass(&self, x: &BitString) -> DyadicRational;

    /// `µ(b | x) = µ(Γ_{xb}) / µ(Γ_x)` as a float, for sampling.
    fn next_prob(&self, x: &BitString, bit: bool) -> f64 {
        let mut xb = x.clone();
        xb.push(bit);
        self.cylinder_mass(&xb).to_f64() / self.cylinder_mass(x).to_f64()
    }
}

/// Uniform (Lebesgue) measure `λ(Γ_x) = 2^{-l(x)}`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Uniform;

impl RecursiveMeasure for Uniform {
    fn name(&self) -> String {
        "uniform".into()
    }

    fn cylinder_mass(&self, x: &BitString) -> DyadicRational {
        DyadicRational::pow2_neg(x.len() as u32)
    }

    fn next_prob(&self, _x: &BitString, _bit: bool) -> f64 {
        0.5
    }
}

/// I.i.d. bits with `P(1) = ones / 2^precision`.
#[derive(Clone, Copy, Debug)]
pub struct Bernoulli {
    ones: u64,
    precision: u32,
}

impl Bernoulli {
    pub fn new(ones: u64, precision: u32) -> Self {
        assert!(precision < 64 && ones <= 1 << precision, "probability must lie in [0, 1]");
        Self { ones, precision }
    }

    pub fn p_one(&self) -> f64 {
        self.ones as f64 / (1u64 << self.precision) as f64
    }
}

impl RecursiveMeasure for Bernoulli {
    fn name(&self) -> String {
        format!("bernoulli({})", self.p_one())
    }

    fn cylinder_mass(&self, x: &BitString) -> DyadicRational {
        let ones = x.count_ones() as u32;
        let zeros = x.len() as u32 - ones;
        let num = BigUint::from(self.ones).pow(ones) * BigUint::from((1u64 << self.precision) - self.ones).pow(zeros);
        DyadicRational::new(num, self.precision * x.len() as u32)
    }

    fn next_prob(&self, _x: &BitString, bit: bool) -> f64 {
        if bit {
            self.p_one()
        } else {
            1.0 - self.p_one()
        }
    }
}

/// All mass on the sequence `000…`.
#[derive(Clone, Copy, Debug, Default)]
pub struct PointZeros;

impl RecursiveMeasure for PointZeros {
    fn name(&self) -> String {
        "point(0^inf)".into()
    }

    fn cylinder_mass(&self, x: &BitString) -> DyadicRational {
        if x.count_ones() == 0 {
            DyadicRational::one()
        } else {
            DyadicRational::zero()
        }
    }
}

/// Checks `µ(Γ_ε) = 1` and `µ(Γ_x) = µ(Γ_{x0}) + µ(Γ_{x1})` for all `x` up
/// to `depth` bits.
pub fn check_additivity(mu: &dyn RecursiveMeasure, depth: usize) -> bool {
    if mu.cylinder_mass(&BitString::new()) != DyadicRational::one() {
        return false;
    }
    (0..depth).flat_map(BitString::all_of_length).all(|x| {
        let mut x0 = x.clone();
        x0.push(false);
        let mut x1 = x.clone();
        x1.push(true);
        mu.cylinder_mass(&x) == &mu.cylinder_mass(&x0) + &mu.cylinder_mass(&x1)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_measures_are_additive() {
        assert!(check_additivity(&Uniform, 10));
        assert!(check_additivity(&Bernoulli::new(3, 2), 10));
        assert!(check_additivity(&PointZeros, 10));
    }

    #[test]
    fn bernoulli_masses() {
        let b = Bernoulli::new(3, 2);
        let x: BitString = "110".parse().unwrap();
        assert_eq!(b.cylinder_mass(&x), DyadicRational::new(BigUint::from(9u32), 6));
        assert!((b.next_prob(&x, true) - 0.75).abs() < 1e-15);
    }
}
