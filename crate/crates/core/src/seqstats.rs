//! Statistics of finite strings of high complexity: ones count, block
//! counts with wraparound, runs, and the Monte-Carlo drivers that check the
//! bounds against PRNG strings.

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use num_integer::Roots;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::sources::prng_stream;

/// Default `c` in the ones and block bounds.
pub const DEFAULT_C: f64 = 2.0;
/// Default `c₁`, the cost of recovering `n, δ(n)` from `n − δ(n)`.
pub const DEFAULT_C1: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DeficiencyFunction {
    Log,
    Sqrt,
    LogLog,
    Constant(u64),
}

fn ceil_log2(n: u64) -> u64 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros() as u64
    }
}

impl DeficiencyFunction {
    /// `δ(n)`, base-2 logs rounded up, 0 where undefined.
    pub fn eval(self, n: u64) -> u64 {
        match self {
            DeficiencyFunction::Log => ceil_log2(n),
            DeficiencyFunction::Sqrt => {
                let r = n.sqrt();
                if r * r == n {
                    r
                } else {
                    r + 1
                }
            }
            DeficiencyFunction::LogLog => {
                if n <= 2 {
                    0
                } else {
                    ((n as f64).log2().log2()).ceil().max(0.0) as u64
                }
            }
            DeficiencyFunction::Constant(k) => k,
        }
    }
}

impl fmt::Display for DeficiencyFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeficiencyFunction::Log => f.write_str("log"),
            DeficiencyFunction::Sqrt => f.write_str("sqrt"),
            DeficiencyFunction::LogLog => f.write_str("loglog"),
            DeficiencyFunction::Constant(k) => write!(f, "const:{k}"),
        }
    }
}

impl FromStr for DeficiencyFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log" => Ok(Self::Log),
            "sqrt" => Ok(Self::Sqrt),
            "loglog" => Ok(Self::LogLog),
            _ => s
                .strip_prefix("const:")
                .and_then(|k| k.parse().ok())
                .map(Self::Constant)
                .ok_or_else(|| Error::Config(format!("unknown deficiency function `{s}`"))),
        }
    }
}

pub fn count_ones(x: &BitString) -> usize {
    x.count_ones()
}

/// Occurrences of `y` in `x` starting at each of the `n` positions, reading
/// past the end of `x` back into its start.
pub fn count_block_wrap(x: &BitString, y: &BitString) -> Result<usize> {
    let n = x.len();
    if y.len() > n {
        return Err(Error::BlockTooLong { block: y.len(), string: n });
    }
    let xb = x.bits();
    let yb = y.bits();
    Ok((0..n).filter(|&s| yb.iter().enumerate().all(|(j, &b)| xb[(s + j) % n] == b)).count())
}

/// All `2^l` wraparound block counts in one pass, indexed by the block's
/// big-endian value.
pub fn block_histogram(x: &BitString, l: usize) -> Result<Vec<usize>> {
    let n = x.len();
    if l > n {
        return Err(Error::BlockTooLong { block: l, string: n });
    }
    if l > 24 {
        return Err(Error::Precondition(format!("block length {l} too large for a histogram")));
    }
    let xb = x.bits();
    let mask = (1usize << l) - 1;
    let mut hist = vec![0usize; 1 << l];
    if n == 0 {
        return Ok(hist);
    }
    let mut w = 0usize;
    for j in 0..l {
        w = (w << 1) | xb[j % n] as usize;
    }
    for s in 0..n {
        hist[w] += 1;
        w = ((w << 1) | xb[(s + l) % n] as usize) & mask;
    }
    if l == 0 {
        hist[0] = n;
    }
    Ok(hist)
}

/// `√((δ(n) + c) · n · ln 2)`.
pub fn ones_bound(n: u64, delta: DeficiencyFunction, c: f64) -> f64 {
    ((delta.eval(n) as f64 + c) * n as f64 * LN_2).max(0.0).sqrt()
}

/// `2·exp(−m² / 4npq)`.
pub fn chernoff_tail(n: u64, p: f64, m: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::DegenerateProbability(p));
    }
    let q = 1.0 - p;
    Ok(2.0 * (-(m * m) / (4.0 * n as f64 * p * q)).exp())
}

/// `√(α n p)` with `α = [K(y|n) + log l + δ(n) + c](1 − p) · l · 4 ln 2` and
/// `p = 2^{−l}`.
pub fn block_bound(n: u64, y: &BitString, k_y_upper: usize, delta: DeficiencyFunction, c: f64) -> Result<f64> {
    let l = y.len();
    if l == 0 || (l as f64) > (n as f64).log2() {
        return Err(Error::Precondition(format!("block length {l} outside 1..=log2({n})")));
    }
    let p = 0.5f64.powi(l as i32);
    let alpha = (k_y_upper as f64 + (l as f64).log2() + delta.eval(n) as f64 + c) * (1.0 - p) * l as f64 * 4.0 * LN_2;
    Ok((alpha * n as f64 * p).sqrt())
}

/// Longest run of `bit`, without wraparound.
pub fn longest_run(x: &BitString, bit: bool) -> usize {
    let mut best = 0;
    let mut cur = 0;
    for &b in x.bits() {
        if b == bit {
            cur += 1;
            best = best.max(cur);
        } else {
            cur = 0;
        }
    }
    best
}

/// Blocks of length `l` that never occur in `x` (with wraparound), in
/// lexicographic order.
pub fn all_blocks_present(x: &BitString, l: usize) -> Result<Vec<BitString>> {
    let n = x.len() as f64;
    if l as f64 > n.log2() {
        return Err(Error::Precondition(format!("block length {l} exceeds log2 of {}", x.len())));
    }
    let hist = block_histogram(x, l)?;
    Ok(hist
        .iter()
        .enumerate()
        .filter(|(_, &c)| c == 0)
        .map(|(v, _)| BitString::from_u64(v as u64, l))
        .collect())
}

/// `⌊log₂ n − 2 log₂ log₂ n⌋`.
pub fn all_blocks_length(n: u64) -> usize {
    let ln = (n as f64).log2();
    (ln - 2.0 * ln.log2()).floor().max(1.0) as usize
}

/// `log₂ n − log₂ log₂ n`.
pub fn zero_run_center(n: u64) -> f64 {
    let ln = (n as f64).log2();
    ln - ln.log2()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McRecord {
    pub seed: u64,
    pub n: u64,
    pub name: String,
    pub statistic: f64,
    pub bound: f64,
    pub satisfied: bool,
}

/// `|#ones − n/2|` against [`ones_bound`], one record per seed.
pub fn mc_ones(seeds: std::ops::Range<u64>, n: usize, delta: DeficiencyFunction, c: f64) -> Vec<McRecord> {
    let bound = ones_bound(n as u64, delta, c);
    seeds
        .into_par_iter()
        .map(|seed| {
            let x = prng_stream(seed, n);
            let stat = (x.count_ones() as f64 - n as f64 / 2.0).abs();
            McRecord { seed, n: n as u64, name: "ones".into(), statistic: stat, bound, satisfied: stat < bound }
        })
        .collect()
}

/// Block bound over every block of length `1..=max_l`, one record per seed
/// reporting the worst ratio `|#y − np| / bound`; `k_upper(y)` supplies
/// `K(y|n)`.
pub fn mc_blocks<F>(
    seeds: std::ops::Range<u64>,
    n: usize,
    max_l: usize,
    delta: DeficiencyFunction,
    c: f64,
    k_upper: F,
) -> Result<Vec<McRecord>>
where
    F: Fn(&BitString) -> usize + Sync,
{
    let mut bounds = Vec::new();
    for l in 1..=max_l {
        for y in BitString::all_of_length(l) {
            let b = block_bound(n as u64, &y, k_upper(&y), delta, c)?;
            bounds.push((l, y.as_u64().unwrap_or(0) as usize, b));
        }
    }
    seeds
        .into_par_iter()
        .map(|seed| {
            let x = prng_stream(seed, n);
            let hists: Vec<Vec<usize>> = (1..=max_l).map(|l| block_histogram(&x, l)).collect::<Result<_>>()?;
            let mut worst = 0.0f64;
            let mut satisfied = true;
            for &(l, v, b) in &bounds {
                let np = n as f64 * 0.5f64.powi(l as i32);
                let dev = (hists[l - 1][v] as f64 - np).abs();
                satisfied &= dev < b;
                worst = worst.max(dev / b);
            }
            Ok(McRecord { seed, n: n as u64, name: format!("blocks<={max_l}"), statistic: worst, bound: 1.0, satisfied })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChernoffPoint {
    pub m: f64,
    pub empirical: f64,
    pub bound: f64,
    pub satisfied: bool,
}

/// Empirical `Pr(|s_n − np| ≥ m)` from `samples` draws against the bound.
pub fn mc_chernoff(n: u64, p: f64, grid: &[f64], samples: usize, seed: u64) -> Result<Vec<ChernoffPoint>> {
    chernoff_tail(n, p, 0.0)?;
    let devs: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let s = (0..n).filter(|_| rng.gen_bool(p)).count() as f64;
            (s - n as f64 * p).abs()
        })
        .collect();
    grid.iter()
        .map(|&m| {
            let empirical = devs.iter().filter(|&&d| d >= m).count() as f64 / samples as f64;
            let bound = chernoff_tail(n, p, m)?;
            Ok(ChernoffPoint { m, empirical, bound, satisfied: empirical <= bound })
        })
        .collect()
}

pub fn mc_longest_zero_run(seeds: std::ops::Range<u64>, n: usize) -> Vec<McRecord> {
    let center = zero_run_center(n as u64);
    seeds
        .into_par_iter()
        .map(|seed| {
            let run = longest_run(&prng_stream(seed, n), false) as f64;
            McRecord {
                seed,
                n: n as u64,
                name: "longest_zero_run".into(),
                statistic: run,
                bound: center,
                satisfied: (run - center).abs() <= 2.0,
            }
        })
        .collect()
}

pub fn mc_all_blocks(seeds: std::ops::Range<u64>, n: usize) -> Result<Vec<McRecord>> {
    let l = all_blocks_length(n as u64);
    seeds
        .into_par_iter()
        .map(|seed| {
            let missing = all_blocks_present(&prng_stream(seed, n), l)?;
            Ok(McRecord {
                seed,
                n: n as u64,
                name: format!("all_blocks_l{l}"),
                statistic: missing.len() as f64,
                bound: 0.0,
                satisfied: missing.is_empty(),
            })
        })
        .collect()
}
