//! Martin-Löf tests.
//!
//! A finite test maps a string to an integer level `m`; the string is
//! rejected at significance `2^{-m}`. Under the uniform distribution a test
//! must satisfy `#{x : l(x) = n, level(x) ≥ m} ≤ 2^{n-m}` for all `n, m`,
//! which [`check_axiom`] verifies by exhaustive count.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::bits::{from_index, BitString, LexIndex};
use crate::complexity::{ComplexityKind, ComplexityTable, Estimator};
use crate::dyadic::DyadicRational;
use crate::error::{Error, Result};
use crate::measure::RecursiveMeasure;
use crate::sources::BitSource;

/// Level at which the default battery reports a rejection.
pub const DEFAULT_REJECT_LEVEL: u32 = 16;

pub trait FiniteTest: Send + Sync {
    fn name(&self) -> &'static str;
    fn level(&self, x: &BitString) -> u32;
}

/// Rejects at level `m` when the first `m` bits are all zero, i.e. when
/// `0.x` falls in `[0, 2^{-m})`.
#[derive(Clone, Copy, Debug, Default)]
pub struct LeadingZeros;

impl FiniteTest for LeadingZeros {
    fn name(&self) -> &'static str {
        "leading_zeros"
    }

    fn level(&self, x: &BitString) -> u32 {
        x.bits().iter().take_while(|&&b| !b).count() as u32
    }
}

/// `δ(x) = max{i : x₁ = x₃ = … = x_{2i−1} = 1}`, and 0 when `x₁ = 0`.
#[derive(Clone, Copy, Debug, Default)]
pub struct OddPositions;

impl FiniteTest for OddPositions {
    fn name(&self) -> &'static str {
        "odd_positions"
    }

    fn level(&self, x: &BitString) -> u32 {
        x.bits().iter().step_by(2).take_while(|&&b| b).count() as u32
    }
}

fn binomial_row_prefix_sum(n: usize, upto: usize) -> BigUint {
    let mut sum = BigUint::zero();
    let mut c = BigUint::one();
    for k in 0..=upto.min(n) {
        sum += &c;
        c = c * (n - k) / (k + 1);
    }
    sum
}

/// `#{y : l(y) = n, |2·#ones(y) − n| ≥ d}`, exactly.
pub fn deviation_tail(n: usize, d: usize) -> BigUint {
    if d == 0 {
        return BigUint::one() << n;
    }
    if d > n {
        return BigUint::zero();
    }
    // |2k − n| ≥ d  ⇔  k ≤ (n − d)/2  or  k ≥ (n + d)/2, symmetric halves.
    binomial_row_prefix_sum(n, (n - d) / 2) * 2u32
}

/// `g(n, m)`: the least `t` such that at most `2^{n−m}` strings of length `n`
/// have `|2f − n| > t`. Returns −1 when every string qualifies.
pub fn frequency_threshold(n: usize, m: usize) -> i64 {
    let allowed = if m > n { BigUint::zero() } else { BigUint::one() << (n - m) };
    let mut t: i64 = -1;
    loop {
        if deviation_tail(n, (t + 1) as usize) <= allowed {
            return t;
        }
        t += 1;
    }
}

/// Rejects at level `m` when `|2f_n − n| > g(n, m)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Frequency;

impl Frequency {
    pub fn deviation(x: &BitString) -> usize {
        (2 * x.count_ones()).abs_diff(x.len())
    }
}

impl FiniteTest for Frequency {
    fn name(&self) -> &'static str {
        "frequency"
    }

    /// The largest `m` with `|2f − n| > g(n, m)`. Since `g(n, m) < d` iff
    /// `#{y : dev(y) ≥ d} ≤ 2^{n−m}`, this is `n − ⌈log₂ T⌉` with `T` the
    /// tail count at the observed deviation `d`.
    fn level(&self, x: &BitString) -> u32 {
        let n = x.len();
        let tail = deviation_tail(n, Self::deviation(x));
        let ceil_log = (tail - 1u32).bits() as usize;
        n.saturating_sub(ceil_log) as u32
    }
}

/// `n − C_upper(x | n) − 1`: a lower bound on the universal test.
pub fn universal_test_lower(x: &BitString, estimator: &Estimator) -> i64 {
    let n = x.len();
    let c = estimator.c_upper(x, &from_index(LexIndex(n as u64))).value;
    n as i64 - c as i64 - 1
}

/// [`universal_test_lower`] clamped at zero, with one enumeration per length.
#[derive(Debug, Default)]
pub struct UniversalLower {
    estimator: Estimator,
    tables: Mutex<HashMap<usize, Arc<ComplexityTable>>>,
}

impl UniversalLower {
    pub fn new(estimator: Estimator) -> Self {
        Self { estimator, tables: Mutex::new(HashMap::new()) }
    }

    pub fn estimator(&self) -> &Estimator {
        &self.estimator
    }

    fn table(&self, n: usize) -> Arc<ComplexityTable> {
        if let Some(t) = self.tables.lock().expect("table cache").get(&n) {
            return t.clone();
        }
        let t = Arc::new(self.estimator.table(ComplexityKind::C, n, &from_index(LexIndex(n as u64))));
        self.tables.lock().expect("table cache").entry(n).or_insert(t).clone()
    }

    pub fn raw_level(&self, x: &BitString) -> i64 {
        let n = x.len();
        if n > 24 {
            return universal_test_lower(x, &self.estimator);
        }
        n as i64 - self.table(n).value(x) as i64 - 1
    }
}

impl FiniteTest for UniversalLower {
    fn name(&self) -> &'static str {
        "universal_lower"
    }

    fn level(&self, x: &BitString) -> u32 {
        self.raw_level(x).max(0) as u32
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub test: String,
    pub n: usize,
    /// `counts[m] = #{x : l(x) = n, level(x) ≥ m}`.
    pub counts: Vec<u64>,
    pub holds: bool,
}

/// Exhaustive check of the counting axiom at length `n`.
pub fn check_axiom(test: &dyn FiniteTest, n: usize) -> AxiomReport {
    let mut hist = vec![0u64; n + 2];
    for x in BitString::all_of_length(n) {
        let lvl = (test.level(&x) as usize).min(n + 1);
        hist[lvl] += 1;
    }
    let mut counts = vec![0u64; n + 2];
    let mut acc = 0;
    for m in (0..n + 2).rev() {
        acc += hist[m];
        counts[m] = acc;
    }
    let holds = counts.iter().enumerate().all(|(m, &c)| m > n || c <= 1u64 << (n - m)) && counts[n + 1] == 0;
    AxiomReport { test: test.name().to_string(), n, counts, holds }
}

/// Largest `level_other(x) − level_universal(x)` over all `x` with
/// `l(x) ≤ n_max`: the additive constant by which the universal lower bound
/// dominates `other` at desk scale.
pub fn dominance_constant(universal: &UniversalLower, other: &dyn FiniteTest, n_max: usize) -> i64 {
    (0..=n_max)
        .flat_map(BitString::all_of_length)
        .map(|x| other.level(&x) as i64 - universal.raw_level(&x))
        .max()
        .unwrap_or(0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestRecord {
    pub name: String,
    pub n: usize,
    pub level: u32,
    pub significance: f64,
    pub certificate: String,
}

/// One report record; the certificate is SHA-256 over test name, level and
/// the input bits.
pub fn record(test: &dyn FiniteTest, x: &BitString) -> TestRecord {
    let level = test.level(x);
    let mut h = Sha256::new();
    h.update(test.name().as_bytes());
    h.update(level.to_le_bytes());
    h.update((x.len() as u64).to_le_bytes());
    h.update(x.to_string().as_bytes());
    TestRecord {
        name: test.name().to_string(),
        n: x.len(),
        level,
        significance: 0.5f64.powi(level as i32),
        certificate: hex::encode(h.finalize()),
    }
}

/// The shipped finite tests.
pub fn default_battery(estimator: Estimator) -> Vec<Box<dyn FiniteTest>> {
    vec![
        Box::new(LeadingZeros),
        Box::new(Frequency),
        Box::new(OddPositions),
        Box::new(UniversalLower::new(estimator)),
    ]
}

pub trait SequentialTest: Send + Sync {
    fn name(&self) -> &'static str;
    /// `γ` on a finite prefix.
    fn gamma(&self, prefix: &BitString) -> u64;
}

/// `γ(ω_{1:n}) = n` when all even positions are 0, else 0.
#[derive(Clone, Copy, Debug, Default)]
pub struct EvenOnes;

impl SequentialTest for EvenOnes {
    fn name(&self) -> &'static str {
        "even_ones"
    }

    fn gamma(&self, prefix: &BitString) -> u64 {
        if prefix.bits().iter().skip(1).step_by(2).any(|&b| b) {
            0
        } else {
            prefix.len() as u64
        }
    }
}

pub fn sequential_even_ones(prefix: &BitString) -> u64 {
    EvenOnes.gamma(prefix)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SequentialOutcome {
    pub horizon: usize,
    /// `sup_{n ≤ horizon} γ(ω_{1:n})`.
    pub sup: u64,
    /// `sup` after each prefix length `1..=horizon`.
    pub running: Vec<u64>,
    /// The sup grew during the second half of the horizon: reported as
    /// "rejected, level ∞ at horizon".
    pub climbing: bool,
}

pub fn run_sequential(test: &dyn SequentialTest, source: &mut BitSource, horizon: usize) -> SequentialOutcome {
    let prefix = source.take(horizon);
    let mut running = Vec::with_capacity(prefix.len());
    let mut sup = 0u64;
    let mut cur = BitString::new();
    for &b in prefix.bits() {
        cur.push(b);
        sup = sup.max(test.gamma(&cur));
        running.push(sup);
    }
    let half = running.get(prefix.len() / 2).copied().unwrap_or(0);
    let climbing = !running.is_empty() && sup > half;
    SequentialOutcome { horizon: prefix.len(), sup, running, climbing }
}

/// `λ{ω : sup_{n ≤ depth} γ(ω_{1:n}) ≥ m}`, exactly, by summing minimal
/// rejected cylinders.
pub fn sequential_measure(test: &dyn SequentialTest, m: u64, depth: usize) -> DyadicRational {
    fn walk(test: &dyn SequentialTest, x: &mut BitString, m: u64, depth: usize, acc: &mut DyadicRational) {
        if test.gamma(x) >= m {
            *acc += &DyadicRational::pow2_neg(x.len() as u32);
            return;
        }
        if x.len() == depth {
            return;
        }
        for b in [false, true] {
            x.push(b);
            walk(test, x, m, depth, acc);
            let mut bits = std::mem::take(x).into_bits();
            bits.pop();
            *x = BitString::from_bits(bits);
        }
    }
    let mut acc = DyadicRational::zero();
    walk(test, &mut BitString::new(), m, depth, &mut acc);
    acc
}

/// `max_k (−K_upper(x_{1:k}) − log₂ µ(Γ_{x_{1:k}}))`: a lower bound on the
/// universal integral µ-test.
pub fn integral_test_lower(prefix: &BitString, mu: &dyn RecursiveMeasure, estimator: &Estimator) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    for k in 0..=prefix.len() {
        let x = prefix.slice(0, k);
        let mass = mu.cylinder_mass(&x);
        if mass.is_zero() {
            return Err(Error::ZeroMass(x.to_string()));
        }
        let neg_log = neg_log2(&mass);
        let k_upper = estimator.k_upper(&x, &BitString::new()).value as f64;
        best = best.max(neg_log - k_upper);
    }
    Ok(best)
}

fn neg_log2(d: &DyadicRational) -> f64 {
    let num_bits = d.numerator().bits() as f64;
    let shift = d.numerator().bits().saturating_sub(52);
    let top = DyadicRational::new(d.numerator() >> shift, 0).to_f64();
    -(top.log2() + shift as f64 - d.exponent() as f64).max(-num_bits - d.exponent() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexity::DEFAULT_STEP_BUDGET;
    use crate::measure::{PointZeros, Uniform};

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn leading_zeros_examples() {
        assert_eq!(LeadingZeros.level(&bs("0001")), 3);
        assert_eq!(LeadingZeros.level(&bs("000110")), 3);
        assert_eq!(LeadingZeros.level(&bs("1000")), 0);
        assert_eq!(LeadingZeros.level(&bs("0000")), 4);
        assert_eq!(LeadingZeros.level(&BitString::new()), 0);
    }

    #[test]
    fn odd_positions_examples() {
        let cases = [("01111", 0), ("10011", 1), ("11011", 1), ("10100", 2), ("11111", 3)];
        for (x, want) in cases {
            assert_eq!(OddPositions.level(&bs(x)), want, "{x}");
        }
    }

    #[test]
    fn frequency_threshold_table_n8() {
        // Tail counts for n = 8 from the binomial row 1 8 28 56 70 56 28 8 1.
        let golden = [-1, 2, 4, 4, 6, 6, 6, 6, 8, 8];
        for (m, &g) in golden.iter().enumerate() {
            assert_eq!(frequency_threshold(8, m), g, "m={m}");
        }
        // Independent oracle: count strings directly.
        for m in 0..=9usize {
            let allowed = if m > 8 { 0 } else { 1u64 << (8 - m) };
            let count_above = |t: i64| {
                BitString::all_of_length(8).filter(|x| Frequency::deviation(x) as i64 > t).count() as u64
            };
            let least = (-1..=8).find(|&t| count_above(t) <= allowed).unwrap();
            assert_eq!(frequency_threshold(8, m), least);
        }
    }

    #[test]
    fn frequency_level_matches_threshold_definition() {
        for n in 0..=12 {
            for x in BitString::all_of_length(n) {
                let dev = Frequency::deviation(&x) as i64;
                let by_g = (0..=n + 1).filter(|&m| dev > frequency_threshold(n, m)).max().unwrap_or(0);
                assert_eq!(Frequency.level(&x) as usize, by_g, "{x:?}");
            }
        }
    }

    #[test]
    fn frequency_extreme_is_maximal() {
        for n in 1..=16 {
            let top = Frequency.level(&BitString::zeros(n));
            assert_eq!(top as usize, n - 1);
            assert!(BitString::all_of_length(n).all(|x| Frequency.level(&x) <= top));
        }
    }

    #[test]
    fn axioms_hold_small() {
        for n in 0..=12 {
            assert!(check_axiom(&LeadingZeros, n).holds);
            assert!(check_axiom(&OddPositions, n).holds);
            assert!(check_axiom(&Frequency, n).holds);
        }
    }

    #[test]
    fn universal_lower_examples() {
        let e = Estimator::new(DEFAULT_STEP_BUDGET, 16);
        let u = UniversalLower::new(e.clone());
        assert!(universal_test_lower(&BitString::zeros(12), &e) > 0);
        assert_eq!(u.raw_level(&BitString::zeros(12)), universal_test_lower(&BitString::zeros(12), &e));
        let report = check_axiom(&u, 12);
        assert!(report.holds, "{report:?}");
        let levels: Vec<i64> = BitString::all_of_length(12).map(|x| u.raw_level(&x)).collect();
        assert!(levels.iter().any(|&l| l < 0));
        assert!(levels.iter().all(|&l| l >= -(e.c_literal() as i64) - 1));
    }

    #[test]
    fn nesting_of_critical_regions() {
        let r = check_axiom(&Frequency, 10);
        assert!(r.counts.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn records_carry_certificates() {
        let r = record(&LeadingZeros, &bs("0001"));
        assert_eq!(r.level, 3);
        assert_eq!(r.significance, 0.125);
        assert_eq!(r.certificate.len(), 64);
        assert_ne!(r.certificate, record(&LeadingZeros, &bs("0000")).certificate);
    }

    #[test]
    fn even_ones_rejects_zero_even_positions() {
        let zeta = BitSource::new(crate::sources::SourceKind::Periodic(bs("10")));
        let out = run_sequential(&EvenOnes, &mut zeta.clone(), 100);
        assert_eq!(out.sup, 100);
        assert!(out.climbing);
        let mut eta = BitSource::finite(bs("01"));
        let out = run_sequential(&EvenOnes, &mut eta, 100);
        assert_eq!(out.sup, 1);
        let eta_long = BitSource::finite(bs("01").concat(&BitString::zeros(98)));
        let out = run_sequential(&EvenOnes, &mut eta_long.clone(), 100);
        assert_eq!(out.sup, 1);
        assert!(!out.climbing);
        assert!(out.running.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn even_ones_counts() {
        // Exactly 2^{⌈n/2⌉} strings of length n have zeros at all even
        // positions; that is within 2^{n−m} only for m ≤ ⌊n/2⌋.
        for n in 1..=20usize {
            for m in 1..=n as u64 {
                let count = BitString::all_of_length(n).filter(|x| sequential_even_ones(x) >= m).count();
                assert_eq!(count, 1 << n.div_ceil(2));
                assert_eq!(count <= 1 << (n - m as usize), m as usize <= n / 2, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn even_ones_cylinder_measure() {
        // λ{δ ≥ m} is 2^{-⌊m/2⌋}, which exceeds 2^{-m} once m ≥ 2.
        for m in 1..=10u64 {
            let mass = sequential_measure(&EvenOnes, m, 14);
            assert_eq!(mass, DyadicRational::pow2_neg((m / 2) as u32));
        }
    }

    #[test]
    fn integral_test_examples() {
        let e = Estimator::new(DEFAULT_STEP_BUDGET, 16);
        let s = integral_test_lower(&BitString::zeros(16), &Uniform, &e).unwrap();
        assert!(s > 0.0);
        let p = integral_test_lower(&BitString::zeros(12), &PointZeros, &e).unwrap();
        assert!(p <= 0.0);
        assert!(matches!(integral_test_lower(&bs("01"), &PointZeros, &e), Err(Error::ZeroMass(_))));
        let mut last = f64::NEG_INFINITY;
        let x = bs("0000000011111111");
        for k in 0..=x.len() {
            let v = integral_test_lower(&x.slice(0, k), &Uniform, &e).unwrap();
            assert!(v >= last);
            last = v;
        }
    }
}
