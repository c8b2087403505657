//! Tournaments and their transitive subtournaments, as an exercise in the
//! incompressibility method.
//!
//! Nodes are `0..n`. The encoding `E(T)` has one bit per pair `i < j` in the
//! order `(0,1), (0,2), …, (0,n−1), (1,2), …`; the bit is 1 iff `j`
//! dominates `i`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bits::BitString;
use crate::error::{Error, Result};

/// Largest `n` accepted by [`largest_transitive`].
pub const EXACT_MAX_NODES: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Tournament {
    n: usize,
    /// `beats[i]` has bit `j` set iff `i` dominates `j`.
    beats: Vec<u64>,
}

pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// `⌈log₂ n⌉`, the width of a node label.
pub fn label_width(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

impl Tournament {
    /// All edges point up: `j` dominates `i` whenever `i < j`.
    pub fn transitive(n: usize) -> Self {
        Self::decode(&BitString::ones(pair_count(n)), n).expect("length matches")
    }

    pub fn random<R: Rng>(n: usize, rng: &mut R) -> Self {
        let bits: BitString = (0..pair_count(n)).map(|_| rng.gen::<bool>()).collect();
        Self::decode(&bits, n).expect("length matches")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dominates(&self, i: usize, j: usize) -> bool {
        self.beats[i] >> j & 1 == 1
    }

    pub fn encode(&self) -> BitString {
        let mut out = BitString::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                out.push(self.dominates(j, i));
            }
        }
        out
    }

    pub fn decode(bits: &BitString, n: usize) -> Result<Self> {
        if n > 64 {
            return Err(Error::SizeLimit { max: 64, got: n });
        }
        if bits.len() != pair_count(n) {
            return Err(Error::LengthMismatch { expected: pair_count(n), got: bits.len() });
        }
        let mut beats = vec![0u64; n];
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                if bits.bits()[k] {
                    beats[j] |= 1 << i;
                } else {
                    beats[i] |= 1 << j;
                }
                k += 1;
            }
        }
        Ok(Self { n, beats })
    }

    /// Whether `order` lists distinct nodes, each dominating all later ones.
    pub fn is_transitive_order(&self, order: &[usize]) -> bool {
        let mut seen = 0u64;
        for (a, &u) in order.iter().enumerate() {
            if u >= self.n || seen >> u & 1 == 1 {
                return false;
            }
            seen |= 1 << u;
            if !order[a + 1..].iter().all(|&v| self.dominates(u, v)) {
                return false;
            }
        }
        true
    }
}

/// Nodes of a transitive subtournament, dominant node first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TransitiveWitness {
    pub order: Vec<usize>,
}

impl TransitiveWitness {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// A maximum transitive subtournament by exhaustive subset search. Among
/// maximum sets the one whose sorted node list is lexicographically least
/// is returned.
pub fn largest_transitive(t: &Tournament) -> Result<TransitiveWitness> {
    let n = t.n;
    if n > EXACT_MAX_NODES {
        return Err(Error::SizeLimit { max: EXACT_MAX_NODES, got: n });
    }
    // A set is transitive iff it has a node beating the rest and the rest is
    // transitive; `top[mask]` records that node.
    let mut top = vec![usize::MAX; 1 << n];
    let mut best: Option<(u32, Vec<usize>, usize)> = None;
    for mask in 0usize..1 << n {
        if mask != 0 {
            top[mask] = (0..n)
                .filter(|&u| mask >> u & 1 == 1)
                .find(|&u| {
                    let rest = mask & !(1 << u);
                    (t.beats[u] as usize & rest) == rest && (rest == 0 || top[rest] != usize::MAX)
                })
                .unwrap_or(usize::MAX);
            if top[mask] == usize::MAX {
                continue;
            }
        }
        let size = mask.count_ones();
        let nodes: Vec<usize> = (0..n).filter(|&u| mask >> u & 1 == 1).collect();
        let better = match &best {
            None => true,
            Some((s, b, _)) => size > *s || (size == *s && nodes < *b),
        };
        if better {
            best = Some((size, nodes, mask));
        }
    }
    let (_, _, mut mask) = best.expect("the empty set is transitive");
    let mut order = Vec::new();
    while mask != 0 {
        let u = top[mask];
        order.push(u);
        mask &= !(1 << u);
    }
    Ok(TransitiveWitness { order })
}

/// `l(E′) − l(E)` for a witness of size `v`: `−(v/2)(v − 1 − 2⌈log₂ n⌉)`.
pub fn length_delta(n: usize, v: usize) -> i64 {
    let (v, w) = (v as i64, label_width(n) as i64);
    -(v * (v - 1 - 2 * w)) / 2
}

/// `E′(T)`: the witness labels in dominance order, then `E(T)` with the
/// pairs inside the witness deleted.
pub fn compress_with_witness(t: &Tournament, s: &TransitiveWitness) -> Result<BitString> {
    if !t.is_transitive_order(&s.order) {
        return Err(Error::NotTransitive);
    }
    let w = label_width(t.n);
    let mut out = BitString::new();
    for &u in &s.order {
        out.extend_from(&BitString::from_u64(u as u64, w));
    }
    let in_s = s.order.iter().fold(0u64, |m, &u| m | 1 << u);
    for i in 0..t.n {
        for j in i + 1..t.n {
            if in_s >> i & 1 == 1 && in_s >> j & 1 == 1 {
                continue;
            }
            out.push(t.dominates(j, i));
        }
    }
    Ok(out)
}

/// Inverse of [`compress_with_witness`] given `n` and the witness size `v`.
pub fn reconstruct(e_prime: &BitString, n: usize, v: usize) -> Result<Tournament> {
    let w = label_width(n);
    let expected = pair_count(n) - pair_count(v) + v * w;
    if v > n || e_prime.len() != expected {
        return Err(Error::LengthMismatch { expected, got: e_prime.len() });
    }
    let mut rank = vec![usize::MAX; n];
    for a in 0..v {
        let u = e_prime.slice(a * w, (a + 1) * w).as_u64().expect("short label") as usize;
        if u >= n || rank[u] != usize::MAX {
            return Err(Error::Precondition(format!("label {u} is out of range or repeated")));
        }
        rank[u] = a;
    }
    let mut bits = BitString::new();
    let mut k = v * w;
    for i in 0..n {
        for j in i + 1..n {
            if rank[i] != usize::MAX && rank[j] != usize::MAX {
                bits.push(rank[j] < rank[i]);
            } else {
                bits.push(e_prime.bits()[k]);
                k += 1;
            }
        }
    }
    Tournament::decode(&bits, n)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleReport {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    /// `1 + 2⌈2 log₂ n⌉`.
    pub bound: usize,
    pub within: usize,
    pub fraction: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub max_v: usize,
    /// Histogram of `v` over the trials.
    pub v_counts: Vec<usize>,
}

pub fn sample_bound(n: usize) -> usize {
    1 + 2 * label_width(n * n)
}

/// 95% Wilson score interval for `k` successes in `m` trials.
pub fn wilson_interval(k: usize, m: usize) -> (f64, f64) {
    if m == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054f64;
    let (k, m) = (k as f64, m as f64);
    let p = k / m;
    let denom = 1.0 + z * z / m;
    let center = (p + z * z / (2.0 * m)) / denom;
    let half = z * (p * (1.0 - p) / m + z * z / (4.0 * m * m)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Uniform random tournaments on `n` nodes; trial `i` draws from ChaCha8
/// stream `i` of `seed`.
pub fn sample_and_check(n: usize, trials: usize, seed: u64) -> Result<SampleReport> {
    if n > EXACT_MAX_NODES {
        return Err(Error::SizeLimit { max: EXACT_MAX_NODES, got: n });
    }
    let sizes: Vec<usize> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            largest_transitive(&Tournament::random(n, &mut rng)).map(|w| w.len())
        })
        .collect::<Result<_>>()?;
    let bound = sample_bound(n);
    let within = sizes.iter().filter(|&&v| v <= bound).count();
    let mut v_counts = vec![0; n + 1];
    for &v in &sizes {
        v_counts[v] += 1;
    }
    let (ci_low, ci_high) = wilson_interval(within, trials);
    Ok(SampleReport {
        n,
        trials,
        seed,
        bound,
        within,
        fraction: if trials == 0 { 1.0 } else { within as f64 / trials as f64 },
        ci_low,
        ci_high,
        max_v: sizes.iter().copied().max().unwrap_or(0),
        v_counts,
    })
}
