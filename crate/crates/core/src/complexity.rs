//! Certified upper bounds on plain (`C`) and prefix (`K`) complexity by
//! enumerating reference-machine programs in canonical (length, then
//! lexicographic) order.
//!
//! Every reported value comes with a witness program that reproduces the
//! target within the stated step budget. Enumeration may run on a worker
//! pool; results are merged in canonical order so the chosen witness does not
//! depend on scheduling.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{from_index, BitString, LexIndex};
use crate::error::{Error, Result};
use crate::machine::{Machine, Mode, PrefixProgram, RunStatus, LITERAL_OVERHEAD};

pub const DEFAULT_MAX_LEN: usize = 20;
pub const DEFAULT_STEP_BUDGET: u64 = 100_000;

/// Which complexity a bound refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ComplexityKind {
    /// Plain complexity `C`.
    C,
    /// Prefix complexity `K`.
    K,
}

impl ComplexityKind {
    pub fn mode(self) -> Mode {
        match self {
            ComplexityKind::C => Mode::Plain,
            ComplexityKind::K => Mode::Prefix,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityEstimate {
    pub kind: ComplexityKind,
    pub value: usize,
    pub conditional_on: Option<BitString>,
    pub step_budget: u64,
    pub max_program_length: usize,
    pub witness: PrefixProgram,
    pub machine_version: String,
    /// True when no enumerated program beat the literal fallback.
    pub fallback: bool,
}

/// A halting program found during enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HaltingProgram {
    pub code: BitString,
    pub output: BitString,
    pub steps: u64,
}

/// Canonical enumeration of the programs of one machine under a fixed
/// condition, mode and step budget.
#[derive(Clone, Debug)]
pub struct Enumeration<'m> {
    pub machine: &'m Machine,
    pub mode: Mode,
    pub condition: BitString,
    pub budget: u64,
}

const CHUNK: u64 = 1 << 12;

impl<'m> Enumeration<'m> {
    pub fn new(machine: &'m Machine, mode: Mode, condition: BitString, budget: u64) -> Self {
        Self { machine, mode, condition, budget }
    }

    /// Halting programs of exactly `len` bits whose output length passes
    /// `keep_len`, in lexicographic order. A tape counts only when the run
    /// consumes all of it.
    pub fn halting_of_length<F>(&self, len: usize, keep_len: F) -> Vec<HaltingProgram>
    where
        F: Fn(u64) -> bool + Sync,
    {
        assert!(len < 48, "enumeration length {len} is not desk scale");
        let total = 1u64 << len;
        let chunks = total.div_ceil(CHUNK);
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut found = Vec::new();
                let mut tape = vec![false; len];
                for v in c * CHUNK..((c + 1) * CHUNK).min(total) {
                    for (i, slot) in tape.iter_mut().enumerate() {
                        *slot = (v >> (len - 1 - i)) & 1 == 1;
                    }
                    let Ok(a) = self.machine.analyze(&tape, &self.condition, self.mode) else { continue };
                    if a.consumed != len || a.steps > self.budget || !keep_len(a.output_len) {
                        continue;
                    }
                    found.push(HaltingProgram {
                        code: BitString::from_bits(tape.clone()),
                        output: self.machine.materialize(&a, &self.condition),
                        steps: a.steps,
                    });
                }
                found
            })
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    }

    /// All halting programs of length at most `max_len`, canonical order.
    pub fn halting_up_to(&self, max_len: usize) -> Vec<HaltingProgram> {
        (0..=max_len).flat_map(|len| self.halting_of_length(len, |_| true)).collect()
    }

    /// First program in canonical order of length at most `max_len` that
    /// outputs `x`.
    pub fn first_producing(&self, x: &BitString, max_len: usize) -> Option<HaltingProgram> {
        let target = x.len() as u64;
        (0..=max_len).find_map(|len| {
            self.halting_of_length(len, |l| l == target)
                .into_iter()
                .find(|h| &h.output == x)
        })
    }
}

/// Budgeted complexity estimator for one machine.
#[derive(Clone, Debug)]
pub struct Estimator {
    pub machine: Machine,
    pub budget: u64,
    pub max_len: usize,
}

impl Default for Estimator {
    fn default() -> Self {
        Self { machine: Machine::new(), budget: DEFAULT_STEP_BUDGET, max_len: DEFAULT_MAX_LEN }
    }
}

impl Estimator {
    pub fn new(budget: u64, max_len: usize) -> Self {
        Self { machine: Machine::new(), budget, max_len }
    }

    /// Plain-mode literal overhead `c_literal`: every `x` has a description
    /// of `l(x) + c_literal` bits.
    pub fn c_literal(&self) -> usize {
        LITERAL_OVERHEAD
    }

    pub fn fallback_program(&self, x: &BitString, kind: ComplexityKind) -> BitString {
        self.machine.literal_program(x, kind.mode())
    }

    fn estimate(&self, kind: ComplexityKind, x: &BitString, condition: &BitString, found: Option<BitString>) -> ComplexityEstimate {
        let (code, fallback) = match found {
            Some(code) => (code, false),
            None => (self.fallback_program(x, kind), true),
        };
        ComplexityEstimate {
            kind,
            value: code.len(),
            conditional_on: (!condition.is_empty()).then(|| condition.clone()),
            step_budget: self.budget,
            max_program_length: self.max_len,
            witness: PrefixProgram::with_condition(code, condition.clone()),
            machine_version: self.machine.version().to_string(),
            fallback,
        }
    }

    /// Upper bound on `C(x | condition)` or `K(x | condition)`.
    pub fn upper(&self, kind: ComplexityKind, x: &BitString, condition: &BitString) -> ComplexityEstimate {
        let fallback_len = self.fallback_program(x, kind).len();
        let search = self.max_len.min(fallback_len);
        let en = Enumeration::new(&self.machine, kind.mode(), condition.clone(), self.budget);
        let found = en.first_producing(x, search).map(|h| h.code);
        self.estimate(kind, x, condition, found)
    }

    pub fn c_upper(&self, x: &BitString, condition: &BitString) -> ComplexityEstimate {
        self.upper(ComplexityKind::C, x, condition)
    }

    pub fn k_upper(&self, x: &BitString, condition: &BitString) -> ComplexityEstimate {
        self.upper(ComplexityKind::K, x, condition)
    }

    /// Upper bounds for every string of length `n` from one enumeration pass.
    pub fn table(&self, kind: ComplexityKind, n: usize, condition: &BitString) -> ComplexityTable {
        let fallback_len = self.fallback_program(&BitString::zeros(n), kind).len();
        let search = self.max_len.min(fallback_len);
        let en = Enumeration::new(&self.machine, kind.mode(), condition.clone(), self.budget);
        let mut best: HashMap<BitString, BitString> = HashMap::new();
        for len in 0..=search {
            for h in en.halting_of_length(len, |l| l == n as u64) {
                best.entry(h.output).or_insert(h.code);
            }
        }
        ComplexityTable { kind, n, condition: condition.clone(), estimator: self.clone(), best }
    }

    /// `(n, n − C_upper(ω_{1:n} | n))` for each prefix length `n`; each entry
    /// is a lower bound on the true deficiency.
    pub fn oscillation_profile(&self, omega: &BitString) -> Vec<(usize, i64)> {
        (1..=omega.len())
            .map(|n| {
                let cond = from_index(LexIndex(n as u64));
                let est = self.c_upper(&omega.slice(0, n), &cond);
                (n, n as i64 - est.value as i64)
            })
            .collect()
    }

    /// Re-runs the witness and checks it reproduces `x` within budget.
    pub fn verify(&self, est: &ComplexityEstimate, x: &BitString) -> Result<()> {
        let budget = self.budget.max(x.len() as u64 + 1);
        let out = self.machine.run(&est.witness, budget, est.kind.mode())?;
        if out.status != RunStatus::Halted || out.output.as_ref() != Some(x) || out.bits_consumed != est.witness.code.len() {
            return Err(Error::Invariant(format!("witness {} does not reproduce {x}", est.witness.code)));
        }
        if est.value != est.witness.code.len() {
            return Err(Error::Invariant("estimate value differs from witness length".into()));
        }
        Ok(())
    }
}

/// Complexity upper bounds for all strings of one length.
#[derive(Clone, Debug)]
pub struct ComplexityTable {
    pub kind: ComplexityKind,
    pub n: usize,
    pub condition: BitString,
    estimator: Estimator,
    best: HashMap<BitString, BitString>,
}

impl ComplexityTable {
    pub fn value(&self, x: &BitString) -> usize {
        assert_eq!(x.len(), self.n);
        match self.best.get(x) {
            Some(code) => code.len(),
            None => self.estimator.fallback_program(x, self.kind).len(),
        }
    }

    pub fn estimate(&self, x: &BitString) -> ComplexityEstimate {
        self.estimator.estimate(self.kind, x, &self.condition, self.best.get(x).cloned())
    }

    /// Number of strings that beat the literal fallback.
    pub fn compressible_count(&self) -> usize {
        self.best
            .iter()
            .filter(|(x, code)| code.len() < self.estimator.fallback_program(x, self.kind).len())
            .count()
    }
}
