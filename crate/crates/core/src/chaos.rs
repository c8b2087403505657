//! The doubling map `ω ↦ 2ω mod 1` on bit expansions.
//!
//! A state is a bit source plus an offset: stepping drops the leading bit,
//! so the map is exact for any number of steps. Finite expansions continue
//! with zeros.

use serde::Serialize;

use crate::bits::BitString;
use crate::dyadic::DyadicRational;
use crate::measure::RecursiveMeasure;
use crate::sources::{BitSource, IndexedBits, SourceKind};

#[derive(Clone, Debug)]
pub struct MicroState {
    source: BitSource,
    offset: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Observable {
    /// `[0, 1/2)`
    Gamma0,
    /// `[1/2, 1)`
    Gamma1,
}

impl Observable {
    pub fn bit(self) -> bool {
        self == Observable::Gamma1
    }
}

impl MicroState {
    pub fn new(source: BitSource) -> Self {
        Self { source, offset: 0 }
    }

    pub fn from_bits(bits: BitString) -> Self {
        Self::new(BitSource::finite(bits))
    }

    pub fn zero() -> Self {
        Self::new(BitSource::new(SourceKind::Constant(false)))
    }

    /// Number of steps taken from the initial expansion.
    pub fn offset(&self) -> u64 {
        self.offset
    }

    /// Expansion bit `i + 1` of the current state (0-based `i`).
    pub fn bit(&self, i: u64) -> bool {
        self.source.bit_at(self.offset + i).unwrap_or(false)
    }

    pub fn step(&self) -> MicroState {
        Self { source: self.source.clone(), offset: self.offset + 1 }
    }

    pub fn advance(&mut self, steps: u64) {
        self.offset += steps;
    }

    pub fn observe(&self) -> Observable {
        if self.bit(0) {
            Observable::Gamma1
        } else {
            Observable::Gamma0
        }
    }

    /// The first `k` expansion bits of the current state.
    pub fn expansion(&self, k: usize) -> BitString {
        let mut src = self.source.clone();
        src.seek(self.offset);
        let mut out = src.take(k);
        while out.len() < k {
            out.push(false);
        }
        out
    }

    /// The state truncated to `k` bits, as an exact dyadic rational.
    pub fn value(&self, k: usize) -> DyadicRational {
        DyadicRational::from_expansion(&self.expansion(k))
    }
}

/// Observables at times `0..steps`: bit `t` is 1 iff `U^t ω ∈ Γ₁`.
pub fn orbit_observables(s: &MicroState, steps: usize) -> BitString {
    s.expansion(steps)
}

/// Guesses the next observable from those seen so far.
pub trait Predictor {
    fn name(&self) -> String;
    fn guess(&self) -> bool;
    fn update(&mut self, observed: bool);
}

#[derive(Clone, Debug)]
pub struct Constant(pub bool);

impl Predictor for Constant {
    fn name(&self) -> String {
        format!("constant-{}", self.0 as u8)
    }

    fn guess(&self) -> bool {
        self.0
    }

    fn update(&mut self, _observed: bool) {}
}

#[derive(Clone, Debug, Default)]
pub struct CopyLast(Option<bool>);

impl Predictor for CopyLast {
    fn name(&self) -> String {
        "copy-last".into()
    }

    fn guess(&self) -> bool {
        self.0.unwrap_or(false)
    }

    fn update(&mut self, observed: bool) {
        self.0 = Some(observed);
    }
}

/// The more frequent symbol so far; ties go to 0.
#[derive(Clone, Debug, Default)]
pub struct Majority {
    ones: u64,
    zeros: u64,
}

impl Predictor for Majority {
    fn name(&self) -> String {
        "majority".into()
    }

    fn guess(&self) -> bool {
        self.ones > self.zeros
    }

    fn update(&mut self, observed: bool) {
        if observed {
            self.ones += 1;
        } else {
            self.zeros += 1;
        }
    }
}

/// Counts successors of each length-`k` context and follows the majority;
/// unseen contexts and ties guess 0.
#[derive(Clone, Debug)]
pub struct Markov {
    k: usize,
    context: usize,
    seen: usize,
    counts: Vec<[u64; 2]>,
}

impl Markov {
    pub fn new(k: usize) -> Self {
        assert!(k <= 20, "context length too large");
        Self { k, context: 0, seen: 0, counts: vec![[0; 2]; 1 << k] }
    }
}

impl Predictor for Markov {
    fn name(&self) -> String {
        format!("markov-{}", self.k)
    }

    fn guess(&self) -> bool {
        if self.seen < self.k {
            return false;
        }
        let [z, o] = self.counts[self.context];
        o > z
    }

    fn update(&mut self, observed: bool) {
        if self.seen >= self.k {
            self.counts[self.context][observed as usize] += 1;
        }
        self.seen += 1;
        if self.k > 0 {
            self.context = ((self.context << 1) | observed as usize) & ((1 << self.k) - 1);
        }
    }
}

pub fn predictor_library() -> Vec<Box<dyn Predictor + Send>> {
    vec![
        Box::new(Constant(false)),
        Box::new(Constant(true)),
        Box::new(CopyLast::default()),
        Box::new(Majority::default()),
        Box::new(Markov::new(1)),
        Box::new(Markov::new(3)),
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Evaluation {
    pub predictor: String,
    pub steps: usize,
    pub correct: usize,
    pub accuracy: f64,
}

/// Shows the predictor the observable at time 0, then asks it for each of
/// the next `steps − 1` observables before revealing them.
pub fn evaluate_predictor(pred: &mut dyn Predictor, s: &MicroState, steps: usize) -> Evaluation {
    let orbit = orbit_observables(s, steps);
    let mut correct = 0;
    for (t, &b) in orbit.bits().iter().enumerate() {
        if t > 0 && pred.guess() == b {
            correct += 1;
        }
        pred.update(b);
    }
    let guesses = steps.saturating_sub(1);
    Evaluation {
        predictor: pred.name(),
        steps,
        correct,
        accuracy: if guesses == 0 { 1.0 } else { correct as f64 / guesses as f64 },
    }
}

/// `µ(U^{-1} Γ_x) = µ(Γ_{0x}) + µ(Γ_{1x}) = µ(Γ_x)` for all `x` with
/// `l(x) ≤ depth`.
pub fn check_invariance(mu: &dyn RecursiveMeasure, depth: usize) -> bool {
    (0..=depth).flat_map(BitString::all_of_length).all(|x| {
        let pre0 = BitString::from_bits(vec![false]).concat(&x);
        let pre1 = BitString::from_bits(vec![true]).concat(&x);
        &mu.cylinder_mass(&pre0) + &mu.cylinder_mass(&pre1) == mu.cylinder_mass(&x)
    })
}
