//! The reference machine.
//!
//! A program is a self-delimiting instruction stream read left to right from
//! the input tape. The whole instruction tree is read before anything runs,
//! and no instruction reads the tape at run time, so the input consumed by a
//! halting run is exactly the text of its program. That makes the set of
//! halting inputs prefix-free in [`Mode::Prefix`].
//!
//! Opcodes form a complete prefix code:
//!
//! | code     | instruction | effect                                         |
//! |----------|-------------|------------------------------------------------|
//! | `00`     | END         | closes a BLOCK; elsewhere a no-op              |
//! | `01`     | REP k I     | runs `I` k times (`k` as a number code)        |
//! | `100`    | ZERO        | emits `0`                                      |
//! | `101`    | ONE         | emits `1`                                      |
//! | `1100`   | REST        | emits the rest of the tape (plain mode only)   |
//! | `1101`   | LIT k b…    | emits the next k tape bits                     |
//! | `11100`  | BLOCK I… END| runs instructions in sequence                  |
//! | `11101`  | REPN I      | runs `I` N times, N = index of the condition   |
//! | `11110`  | LITN b…     | emits the next N tape bits                     |
//! | `111110` | COND        | emits the condition string                     |
//! | `111111` | LOOP I      | runs `I` forever                               |
//!
//! Numbers `k` are written as `x″` of their string under the standard
//! correspondence. Step costs: every instruction costs one step plus one per
//! bit it emits directly; REP adds the cost of each iteration; LOOP never
//! finishes.

use serde::{Deserialize, Serialize};

use crate::bits::{encode_number, to_index, BitCursor, BitString};
use crate::error::{Error, Result};

pub const MACHINE_VERSION: &str = "refmachine-1";

/// Input discipline: plain descriptions may use the end of the tape, prefix
/// descriptions may not.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Plain,
    Prefix,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MachineSpec {
    pub version: String,
    pub opcodes: Vec<(String, String)>,
    pub input_discipline: String,
    pub max_nesting: usize,
}

impl Default for MachineSpec {
    fn default() -> Self {
        let opcodes = [
            ("00", "END"),
            ("01", "REP k I"),
            ("100", "ZERO"),
            ("101", "ONE"),
            ("1100", "REST"),
            ("1101", "LIT k bits"),
            ("11100", "BLOCK I* END"),
            ("11101", "REPN I"),
            ("11110", "LITN bits"),
            ("111110", "COND"),
            ("111111", "LOOP I"),
        ];
        Self {
            version: MACHINE_VERSION.to_string(),
            opcodes: opcodes.iter().map(|(c, n)| (c.to_string(), n.to_string())).collect(),
            input_discipline: "left to right, no end marker; whole program read before execution".into(),
            max_nesting: 4096,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Instr {
    Nop,
    Zero,
    One,
    Rest(BitString),
    Literal(BitString),
    Block(Vec<Instr>),
    Repeat(u64, Box<Instr>),
    RepeatCond(Box<Instr>),
    LiteralCond(BitString),
    Cond,
    Loop(Box<Instr>),
}

const OP_END: &str = "00";
const OP_REP: &str = "01";
const OP_ZERO: &str = "100";
const OP_ONE: &str = "101";
const OP_REST: &str = "1100";
const OP_LIT: &str = "1101";
const OP_BLOCK: &str = "11100";
const OP_REPN: &str = "11101";
const OP_LITN: &str = "11110";
const OP_COND: &str = "111110";
const OP_LOOP: &str = "111111";

/// Bits spent on the REST opcode: the literal fallback in plain mode costs
/// `l(x) + LITERAL_OVERHEAD`.
pub const LITERAL_OVERHEAD: usize = OP_REST.len();

fn op(code: &str) -> BitString {
    code.parse().expect("opcode literal")
}

impl Instr {
    /// Serializes the instruction back into program text.
    pub fn assemble(&self) -> BitString {
        let mut out = BitString::new();
        self.assemble_into(&mut out);
        out
    }

    fn assemble_into(&self, out: &mut BitString) {
        match self {
            Instr::Nop => out.extend_from(&op(OP_END)),
            Instr::Zero => out.extend_from(&op(OP_ZERO)),
            Instr::One => out.extend_from(&op(OP_ONE)),
            Instr::Rest(bits) => {
                out.extend_from(&op(OP_REST));
                out.extend_from(bits);
            }
            Instr::Literal(bits) => {
                out.extend_from(&op(OP_LIT));
                out.extend_from(&encode_number(bits.len() as u64));
                out.extend_from(bits);
            }
            Instr::Block(body) => {
                out.extend_from(&op(OP_BLOCK));
                for i in body {
                    i.assemble_into(out);
                }
                out.extend_from(&op(OP_END));
            }
            Instr::Repeat(k, body) => {
                out.extend_from(&op(OP_REP));
                out.extend_from(&encode_number(*k));
                body.assemble_into(out);
            }
            Instr::RepeatCond(body) => {
                out.extend_from(&op(OP_REPN));
                body.assemble_into(out);
            }
            Instr::LiteralCond(bits) => {
                out.extend_from(&op(OP_LITN));
                out.extend_from(bits);
            }
            Instr::Cond => out.extend_from(&op(OP_COND)),
            Instr::Loop(body) => {
                out.extend_from(&op(OP_LOOP));
                body.assemble_into(out);
            }
        }
    }
}

/// Why a tape does not hold a program.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ParseFail {
    Exhausted,
    Illegal,
}

struct Parser<'a> {
    cur: BitCursor<'a>,
    mode: Mode,
    cond_index: Option<u64>,
    max_nesting: usize,
}

impl Parser<'_> {
    fn bit(&mut self) -> Result<bool, ParseFail> {
        self.cur.read().map_err(|_| ParseFail::Exhausted)
    }

    fn number(&mut self) -> Result<u64, ParseFail> {
        match self.cur.read_number() {
            Ok(k) => Ok(k),
            Err(Error::IndexOverflow(_)) => Err(ParseFail::Illegal),
            Err(_) => Err(ParseFail::Exhausted),
        }
    }

    fn bits(&mut self, n: usize) -> Result<BitString, ParseFail> {
        self.cur.read_n(n).map_err(|_| ParseFail::Exhausted)
    }

    fn instr(&mut self, depth: usize) -> Result<Instr, ParseFail> {
        if depth > self.max_nesting {
            return Err(ParseFail::Illegal);
        }
        if !self.bit()? {
            return Ok(if self.bit()? { self.repeat(depth)? } else { Instr::Nop });
        }
        if !self.bit()? {
            return Ok(if self.bit()? { Instr::One } else { Instr::Zero });
        }
        if !self.bit()? {
            return if self.bit()? {
                let k = self.number()?;
                let k = usize::try_from(k).map_err(|_| ParseFail::Illegal)?;
                Ok(Instr::Literal(self.bits(k)?))
            } else {
                match self.mode {
                    Mode::Plain => Ok(Instr::Rest(self.cur.read_rest())),
                    Mode::Prefix => Err(ParseFail::Illegal),
                }
            };
        }
        if !self.bit()? {
            return if self.bit()? {
                Ok(Instr::RepeatCond(Box::new(self.instr(depth + 1)?)))
            } else {
                self.block(depth)
            };
        }
        if !self.bit()? {
            let n = self.cond_index.ok_or(ParseFail::Illegal)?;
            let n = usize::try_from(n).map_err(|_| ParseFail::Illegal)?;
            return Ok(Instr::LiteralCond(self.bits(n)?));
        }
        if self.bit()? {
            Ok(Instr::Loop(Box::new(self.instr(depth + 1)?)))
        } else {
            Ok(Instr::Cond)
        }
    }

    fn repeat(&mut self, depth: usize) -> Result<Instr, ParseFail> {
        let k = self.number()?;
        Ok(Instr::Repeat(k, Box::new(self.instr(depth + 1)?)))
    }

    fn block(&mut self, depth: usize) -> Result<Instr, ParseFail> {
        let mut body = Vec::new();
        loop {
            match self.instr(depth + 1)? {
                Instr::Nop => return Ok(Instr::Block(body)),
                i => body.push(i),
            }
        }
    }
}

/// Saturating cost arithmetic; `u64::MAX` stands for "more than any budget".
const INF: u64 = u64::MAX;

struct Costing<'a> {
    cond: &'a BitString,
    cond_index: u64,
}

impl Costing<'_> {
    fn steps(&self, i: &Instr) -> u64 {
        match i {
            Instr::Nop | Instr::Zero | Instr::One => 1,
            Instr::Rest(b) | Instr::Literal(b) | Instr::LiteralCond(b) => 1 + b.len() as u64,
            Instr::Cond => 1 + self.cond.len() as u64,
            Instr::Block(body) => body.iter().fold(1u64, |acc, i| acc.saturating_add(self.steps(i))),
            Instr::Repeat(k, body) => 1u64.saturating_add(k.saturating_mul(self.steps(body))),
            Instr::RepeatCond(body) => 1u64.saturating_add(self.cond_index.saturating_mul(self.steps(body))),
            Instr::Loop(_) => INF,
        }
    }

    fn output_len(&self, i: &Instr) -> u64 {
        match i {
            Instr::Nop => 0,
            Instr::Zero | Instr::One => 1,
            Instr::Rest(b) | Instr::Literal(b) | Instr::LiteralCond(b) => b.len() as u64,
            Instr::Cond => self.cond.len() as u64,
            Instr::Block(body) => body.iter().fold(0u64, |acc, i| acc.saturating_add(self.output_len(i))),
            Instr::Repeat(k, body) => k.saturating_mul(self.output_len(body)),
            Instr::RepeatCond(body) => self.cond_index.saturating_mul(self.output_len(body)),
            Instr::Loop(_) => INF,
        }
    }

    fn emit(&self, i: &Instr, out: &mut Vec<bool>) {
        match i {
            Instr::Nop => {}
            Instr::Zero => out.push(false),
            Instr::One => out.push(true),
            Instr::Rest(b) | Instr::Literal(b) | Instr::LiteralCond(b) => out.extend_from_slice(b.bits()),
            Instr::Cond => out.extend_from_slice(self.cond.bits()),
            Instr::Block(body) => body.iter().for_each(|i| self.emit(i, out)),
            Instr::Repeat(k, body) => self.emit_repeat(*k, body, out),
            Instr::RepeatCond(body) => self.emit_repeat(self.cond_index, body, out),
            Instr::Loop(_) => unreachable!("loops never finish"),
        }
    }

    fn emit_repeat(&self, k: u64, body: &Instr, out: &mut Vec<bool>) {
        let start = out.len();
        if k == 0 {
            return;
        }
        self.emit(body, out);
        let chunk = out.len() - start;
        for _ in 1..k {
            if chunk == 0 {
                break;
            }
            out.extend_from_within(start..start + chunk);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Halted,
    BudgetExhausted,
    Invalid,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub output: Option<BitString>,
    pub steps_used: u64,
    pub bits_consumed: usize,
}

impl RunOutcome {
    pub fn halted(&self) -> bool {
        self.status == RunStatus::Halted
    }
}

/// A program text together with the condition it runs against.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrefixProgram {
    pub code: BitString,
    pub condition: BitString,
}

impl PrefixProgram {
    pub fn new(code: BitString) -> Self {
        Self { code, condition: BitString::new() }
    }

    pub fn with_condition(code: BitString, condition: BitString) -> Self {
        Self { code, condition }
    }
}

/// Result of parsing and costing a tape, before materializing output.
#[derive(Clone, Debug)]
pub(crate) struct Analysis {
    pub instr: Instr,
    pub consumed: usize,
    pub steps: u64,
    pub output_len: u64,
}

#[derive(Clone, Debug, Default)]
pub struct Machine {
    spec: MachineSpec,
}

impl Machine {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn spec(&self) -> &MachineSpec {
        &self.spec
    }

    pub fn version(&self) -> &str {
        &self.spec.version
    }

    /// Parses and costs `tape`. `Err(consumed)` when the tape holds no
    /// program (it runs out, or uses something illegal in this mode).
    pub(crate) fn analyze(&self, tape: &[bool], condition: &BitString, mode: Mode) -> Result<Analysis, usize> {
        let cond_index = to_index(condition).ok().map(|i| i.0);
        let mut parser = Parser { cur: BitCursor::new(tape), mode, cond_index, max_nesting: self.spec.max_nesting };
        let instr = match parser.instr(0) {
            Ok(i) => i,
            Err(_) => return Err(parser.cur.position()),
        };
        let consumed = parser.cur.position();
        let costing = Costing { cond: condition, cond_index: cond_index.unwrap_or(INF) };
        let steps = costing.steps(&instr);
        let output_len = costing.output_len(&instr);
        Ok(Analysis { instr, consumed, steps, output_len })
    }

    pub(crate) fn materialize(&self, a: &Analysis, condition: &BitString) -> BitString {
        let cond_index = to_index(condition).map(|i| i.0).unwrap_or(INF);
        let costing = Costing { cond: condition, cond_index };
        let mut out = Vec::with_capacity(a.output_len as usize);
        costing.emit(&a.instr, &mut out);
        BitString::from_bits(out)
    }

    /// Runs `program` against its condition for at most `budget` steps.
    pub fn run(&self, program: &PrefixProgram, budget: u64, mode: Mode) -> Result<RunOutcome> {
        if budget == 0 {
            return Err(Error::ZeroBudget);
        }
        let cond = &program.condition;
        Ok(match self.analyze(program.code.bits(), cond, mode) {
            Err(consumed) => RunOutcome { status: RunStatus::Invalid, output: None, steps_used: 0, bits_consumed: consumed },
            Ok(a) if a.steps > budget => RunOutcome {
                status: RunStatus::BudgetExhausted,
                output: None,
                steps_used: budget,
                bits_consumed: a.consumed,
            },
            Ok(a) => RunOutcome {
                status: RunStatus::Halted,
                output: Some(self.materialize(&a, cond)),
                steps_used: a.steps,
                bits_consumed: a.consumed,
            },
        })
    }

    /// The program that emits `x` verbatim: REST in plain mode, LIT in
    /// prefix mode.
    pub fn literal_program(&self, x: &BitString, mode: Mode) -> BitString {
        match mode {
            Mode::Plain => Instr::Rest(x.clone()).assemble(),
            Mode::Prefix => Instr::Literal(x.clone()).assemble(),
        }
    }
}

/// Hand-written programs used in tests and documentation.
pub mod programs {
    use super::*;

    /// Emits `x` through LIT; the designated echo program.
    pub fn echo(x: &BitString) -> BitString {
        Instr::Literal(x.clone()).assemble()
    }

    /// `REP k ZERO`.
    pub fn zeros(k: u64) -> BitString {
        Instr::Repeat(k, Box::new(Instr::Zero)).assemble()
    }

    /// `REPN ZERO`: `0^n` given `n` as condition.
    pub fn zeros_given_length() -> BitString {
        Instr::RepeatCond(Box::new(Instr::Zero)).assemble()
    }

    /// `LOOP END`, which spins without output.
    pub fn spin() -> BitString {
        Instr::Loop(Box::new(Instr::Nop)).assemble()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::{from_index, LexIndex};

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn echo_program_golden() {
        let code = programs::echo(&bs("01"));
        // LIT, then "01"'s length 2 as x″ of "1", then the payload.
        assert_eq!(code, bs("1101100101"));
        let m = Machine::new();
        let out = m.run(&PrefixProgram::new(code.clone()), 100, Mode::Prefix).unwrap();
        assert_eq!(out.status, RunStatus::Halted);
        assert_eq!(out.output, Some(bs("01")));
        assert_eq!(out.bits_consumed, code.len());
        assert_eq!(out.steps_used, 3);
    }

    #[test]
    fn zero_budget_rejected() {
        let m = Machine::new();
        assert_eq!(m.run(&PrefixProgram::new(bs("00")), 0, Mode::Prefix), Err(Error::ZeroBudget));
    }

    #[test]
    fn spin_exhausts_budget() {
        let m = Machine::new();
        let out = m.run(&PrefixProgram::new(programs::spin()), 1_000_000, Mode::Prefix).unwrap();
        assert_eq!(out.status, RunStatus::BudgetExhausted);
        assert_eq!(out.output, None);
        assert_eq!(out.steps_used, 1_000_000);
    }

    #[test]
    fn opcode_code_is_complete() {
        let total: f64 = MachineSpec::default().opcodes.iter().map(|(c, _)| 0.5f64.powi(c.len() as i32)).sum();
        assert_eq!(total, 1.0);
    }

    #[test]
    fn assemble_parse_round_trip() {
        let m = Machine::new();
        let cond = from_index(LexIndex(5));
        let prog = Instr::Block(vec![
            Instr::Repeat(3, Box::new(Instr::Block(vec![Instr::One, Instr::Zero]))),
            Instr::Cond,
            Instr::Literal(bs("111")),
            Instr::RepeatCond(Box::new(Instr::Zero)),
            Instr::LiteralCond(bs("10101")),
        ]);
        let code = prog.assemble();
        let a = m.analyze(code.bits(), &cond, Mode::Prefix).unwrap();
        assert_eq!(a.instr, prog);
        assert_eq!(a.consumed, code.len());
        let out = m.run(&PrefixProgram::with_condition(code, cond), 1000, Mode::Prefix).unwrap();
        assert_eq!(out.output.unwrap().to_string(), "101010101110000010101");
    }

    #[test]
    fn rest_only_in_plain_mode() {
        let m = Machine::new();
        let code = Instr::Rest(bs("0110")).assemble();
        let plain = m.run(&PrefixProgram::new(code.clone()), 10, Mode::Plain).unwrap();
        assert_eq!(plain.output, Some(bs("0110")));
        let prefix = m.run(&PrefixProgram::new(code), 10, Mode::Prefix).unwrap();
        assert_eq!(prefix.status, RunStatus::Invalid);
    }

    #[test]
    fn repeat_costs_are_structural() {
        let m = Machine::new();
        let code = programs::zeros(16);
        assert_eq!(code.len(), 14);
        let out = m.run(&PrefixProgram::new(code.clone()), 17, Mode::Prefix).unwrap();
        assert_eq!(out.output, Some(BitString::zeros(16)));
        assert_eq!(out.steps_used, 17);
        let short = m.run(&PrefixProgram::new(code), 16, Mode::Prefix).unwrap();
        assert_eq!(short.status, RunStatus::BudgetExhausted);
    }

    #[test]
    fn huge_repeat_does_not_materialize() {
        let m = Machine::new();
        let prog = Instr::Repeat(1 << 40, Box::new(Instr::Repeat(1 << 40, Box::new(Instr::One))));
        let out = m.run(&PrefixProgram::new(prog.assemble()), 100_000, Mode::Prefix).unwrap();
        assert_eq!(out.status, RunStatus::BudgetExhausted);
    }

    #[test]
    fn truncated_programs_are_invalid() {
        let m = Machine::new();
        let code = programs::echo(&bs("0110"));
        for cut in 0..code.len() {
            let out = m.run(&PrefixProgram::new(code.slice(0, cut)), 100, Mode::Prefix).unwrap();
            assert_eq!(out.status, RunStatus::Invalid, "cut {cut}");
        }
    }

    #[test]
    fn run_is_monotone_in_budget() {
        let m = Machine::new();
        for v in 0..(1u64 << 10) {
            let p = PrefixProgram::new(BitString::from_u64(v, 10));
            let mut halted: Option<RunOutcome> = None;
            for budget in [1, 2, 3, 5, 8, 13, 100, 10_000] {
                let out = m.run(&p, budget, Mode::Prefix).unwrap();
                if let Some(h) = &halted {
                    assert_eq!(&out, h);
                } else if out.halted() {
                    halted = Some(out);
                }
            }
        }
    }
}
