//! Lower approximations of the halting probability of the reference machine.
//!
//! Everything here is relative to the restricted universe `Ω_L`: programs of
//! at most `L` bits that halt within `T` steps. Within it the dovetailing
//! schedule is the triangular one: phase `i` executes step `j` of input `k`
//! for every `j + k = i` (`j ≥ 1`, inputs numbered from 1 in canonical
//! order). A program that halts after `s` steps is therefore credited in
//! phase `s + k`.

use std::collections::HashSet;

use serde::Serialize;

use crate::bits::{to_index, BitString};
use crate::complexity::Enumeration;
use crate::dyadic::DyadicRational;
use crate::error::{Error, Result};
use crate::machine::{Machine, Mode};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HaltRecord {
    pub program: BitString,
    pub steps: u64,
    /// Dovetailing phase in which the halt is observed.
    pub phase: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OmegaApproximation {
    #[serde(skip)]
    pub value: DyadicRational,
    pub contributing: Vec<HaltRecord>,
    pub max_len: usize,
    pub budget: u64,
    pub phase: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TracePoint {
    pub phase: u64,
    pub numerator_hex: String,
    pub exponent: u32,
    pub halted: usize,
}

/// All halts of the restricted universe, in the order dovetailing sees them.
#[derive(Clone, Debug)]
pub struct Dovetailer {
    max_len: usize,
    budget: u64,
    halts: Vec<HaltRecord>,
}

impl Dovetailer {
    pub fn new(machine: &Machine, max_len: usize, budget: u64) -> Result<Self> {
        let en = Enumeration::new(machine, Mode::Prefix, BitString::new(), budget);
        let mut halts: Vec<HaltRecord> = en
            .halting_up_to(max_len)
            .into_iter()
            .map(|h| {
                let k = to_index(&h.code).expect("desk-scale program").0 + 1;
                HaltRecord { phase: h.steps + k, steps: h.steps, program: h.code }
            })
            .collect();
        check_prefix_free(&halts)?;
        halts.sort_by_key(|h| (h.phase, h.program.len(), h.program.clone()));
        Ok(Self { max_len, budget, halts })
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    /// Phase after which nothing new can halt.
    pub fn final_phase(&self) -> u64 {
        self.halts.last().map_or(0, |h| h.phase)
    }

    pub fn approximation(&self, phases: u64) -> OmegaApproximation {
        let contributing: Vec<HaltRecord> = self.halts.iter().take_while(|h| h.phase <= phases).cloned().collect();
        let mut value = DyadicRational::zero();
        for h in &contributing {
            value += &DyadicRational::pow2_neg(h.program.len() as u32);
        }
        OmegaApproximation { value, contributing, max_len: self.max_len, budget: self.budget, phase: phases }
    }

    /// `Ω_L` itself: every halt credited.
    pub fn restricted_omega(&self) -> DyadicRational {
        self.approximation(u64::MAX).value
    }

    /// One point per phase `1..=phases` at which the value changed, plus
    /// the final phase.
    pub fn trace(&self, phases: u64) -> Vec<TracePoint> {
        let mut out = Vec::new();
        let mut value = DyadicRational::zero();
        let mut halted = 0usize;
        let mut iter = self.halts.iter().peekable();
        let mut phase = 0u64;
        while phase < phases {
            let Some(next) = iter.peek().map(|h| h.phase) else { break };
            if next > phases {
                break;
            }
            phase = next;
            while let Some(h) = iter.next_if(|h| h.phase == phase) {
                value += &DyadicRational::pow2_neg(h.program.len() as u32);
                halted += 1;
            }
            out.push(point(phase, &value, halted));
        }
        if out.last().is_none_or(|p| p.phase != phases) {
            out.push(point(phases, &value, halted));
        }
        out
    }
}

fn point(phase: u64, value: &DyadicRational, halted: usize) -> TracePoint {
    TracePoint { phase, numerator_hex: value.numerator_hex(), exponent: value.exponent(), halted }
}

fn check_prefix_free(halts: &[HaltRecord]) -> Result<()> {
    let codes: HashSet<&BitString> = halts.iter().map(|h| &h.program).collect();
    for h in halts {
        for cut in 0..h.program.len() {
            if codes.contains(&h.program.slice(0, cut)) {
                return Err(Error::Invariant(format!("halting program {} has a halting prefix", h.program)));
            }
        }
    }
    Ok(())
}

/// `Ω'` after `phases` dovetailing phases over programs of at most `max_len`
/// bits, each given at most `budget` steps.
pub fn dovetail_omega(machine: &Machine, max_len: usize, phases: u64, budget: u64) -> Result<OmegaApproximation> {
    Ok(Dovetailer::new(machine, max_len, budget)?.approximation(phases))
}

/// Decides halting for all programs of at most `n` bits from the first `n`
/// bits of `Ω`: once the approximation reaches `Ω_{1:n}`, any program of at
/// most `n` bits that has not been credited never will be, since crediting
/// it would push the sum to `Ω_{1:n} + 2^{-n} > Ω`.
pub fn reconstruct_halting_set(approx: &OmegaApproximation, omega_bits: &BitString) -> Result<Vec<BitString>> {
    let n = omega_bits.len();
    if n > approx.max_len {
        return Err(Error::QueryTooLong { requested: n, max: approx.max_len });
    }
    let floor = DyadicRational::from_expansion(omega_bits);
    if approx.value < floor {
        return Err(Error::InsufficientApproximation { value: approx.value.to_string(), bits: n });
    }
    let mut set: Vec<BitString> =
        approx.contributing.iter().map(|h| h.program.clone()).filter(|p| p.len() <= n).collect();
    set.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    Ok(set)
}

/// Runs [`reconstruct_halting_set`] with `Ω_{1:n}` taken from the exhaustive
/// run of the same restricted universe.
pub fn halting_set_from_omega(machine: &Machine, approx: &OmegaApproximation, n: usize) -> Result<Vec<BitString>> {
    if n > approx.max_len {
        return Err(Error::QueryTooLong { requested: n, max: approx.max_len });
    }
    let full = Dovetailer::new(machine, approx.max_len, approx.budget)?.restricted_omega();
    reconstruct_halting_set(approx, &full.expansion_prefix(n))
}
