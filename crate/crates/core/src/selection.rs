//! Place selection: Mises-Wald-Church rules, which see only the past, and
//! Kolmogorov-Loveland rules, which choose the next position to read.
//!
//! Rule DSL, one expression per rule:
//!
//! ```text
//! expr   := and ('|' and)*
//! and    := unary ('&' unary)*
//! unary  := '!' unary | atom
//! atom   := 'all' | 'none' | 'more_ones' | 'more_zeros' | 'balanced'
//!         | 'suffix(' bits ')' | 'mod(' k ',' r ')' | 'until(' N ',' expr ')'
//!         | '(' expr ')'
//! ```
//!
//! `suffix(11)` selects position `n` when `a_1…a_{n−1}` ends in `11`;
//! `mod(k, r)` when `n mod k = r`; `until(N, e)` behaves as `e` for
//! `n ≤ N` and is undefined afterwards, which ends the selection.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::sources::IndexedBits;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Decision {
    Select,
    Skip,
    Undefined,
}

impl From<bool> for Decision {
    fn from(b: bool) -> Self {
        if b {
            Decision::Select
        } else {
            Decision::Skip
        }
    }
}

/// A rule deciding on position `n` from `a_1…a_{n−1}` alone; the bit under
/// decision is never passed in.
pub trait MwcRule: Send + Sync {
    fn name(&self) -> String;
    fn decide(&self, prefix: &BitString) -> Decision;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    All,
    None,
    Suffix(BitString),
    Mod(u64, u64),
    MoreOnes,
    MoreZeros,
    Balanced,
    Until(u64, Box<Rule>),
    Not(Box<Rule>),
    And(Box<Rule>, Box<Rule>),
    Or(Box<Rule>, Box<Rule>),
}

impl Rule {
    pub fn parse(text: &str) -> Result<Rule> {
        let mut p = Parser { src: text.as_bytes(), pos: 0 };
        let rule = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("trailing input"));
        }
        Ok(rule)
    }

    /// Rules shipped for experiments and cross-engine checks.
    pub fn library() -> Vec<Rule> {
        [
            "all",
            "none",
            "suffix(11)",
            "suffix(0)",
            "suffix(010)",
            "mod(2,0)",
            "mod(3,1)",
            "more_ones",
            "more_zeros",
            "balanced",
            "until(6,all)",
            "!suffix(1) & mod(2,1)",
            "suffix(00) | more_ones",
        ]
        .iter()
        .map(|s| Rule::parse(s).expect("library rule"))
        .collect()
    }
}

impl MwcRule for Rule {
    fn name(&self) -> String {
        self.to_string()
    }

    fn decide(&self, prefix: &BitString) -> Decision {
        let n = prefix.len() as u64 + 1;
        let ones = prefix.count_ones();
        let zeros = prefix.len() - ones;
        match self {
            Rule::All => Decision::Select,
            Rule::None => Decision::Skip,
            Rule::Suffix(s) => {
                let l = prefix.len();
                (s.len() <= l && prefix.slice(l - s.len(), l) == *s).into()
            }
            Rule::Mod(k, r) => (n % k == *r).into(),
            Rule::MoreOnes => (ones > zeros).into(),
            Rule::MoreZeros => (zeros > ones).into(),
            Rule::Balanced => (zeros == ones).into(),
            Rule::Until(limit, inner) => {
                if n > *limit {
                    Decision::Undefined
                } else {
                    inner.decide(prefix)
                }
            }
            Rule::Not(inner) => match inner.decide(prefix) {
                Decision::Select => Decision::Skip,
                Decision::Skip => Decision::Select,
                Decision::Undefined => Decision::Undefined,
            },
            Rule::And(a, b) => match (a.decide(prefix), b.decide(prefix)) {
                (Decision::Undefined, _) | (_, Decision::Undefined) => Decision::Undefined,
                (x, y) => (x == Decision::Select && y == Decision::Select).into(),
            },
            Rule::Or(a, b) => match (a.decide(prefix), b.decide(prefix)) {
                (Decision::Undefined, _) | (_, Decision::Undefined) => Decision::Undefined,
                (x, y) => (x == Decision::Select || y == Decision::Select).into(),
            },
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::All => f.write_str("all"),
            Rule::None => f.write_str("none"),
            Rule::Suffix(s) => write!(f, "suffix({s})"),
            Rule::Mod(k, r) => write!(f, "mod({k},{r})"),
            Rule::MoreOnes => f.write_str("more_ones"),
            Rule::MoreZeros => f.write_str("more_zeros"),
            Rule::Balanced => f.write_str("balanced"),
            Rule::Until(n, e) => write!(f, "until({n},{e})"),
            Rule::Not(e) => match **e {
                Rule::And(..) | Rule::Or(..) => write!(f, "!({e})"),
                _ => write!(f, "!{e}"),
            },
            Rule::And(a, b) => {
                let (a, b) = (a.as_ref(), b.as_ref());
                match (matches!(a, Rule::Or(..)), matches!(b, Rule::Or(..) | Rule::And(..))) {
                    (false, false) => write!(f, "{a} & {b}"),
                    (true, false) => write!(f, "({a}) & {b}"),
                    (false, true) => write!(f, "{a} & ({b})"),
                    (true, true) => write!(f, "({a}) & ({b})"),
                }
            }
            Rule::Or(a, b) => match **b {
                Rule::Or(..) => write!(f, "{a} | ({b})"),
                _ => write!(f, "{a} | {b}"),
            },
        }
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Rule::parse(s)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::RuleSyntax { at: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Rule> {
        let mut left = self.and()?;
        while self.eat(b'|') {
            left = Rule::Or(Box::new(left), Box::new(self.and()?));
        }
        Ok(left)
    }

    fn and(&mut self) -> Result<Rule> {
        let mut left = self.unary()?;
        while self.eat(b'&') {
            left = Rule::And(Box::new(left), Box::new(self.unary()?));
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Rule> {
        if self.eat(b'!') {
            return Ok(Rule::Not(Box::new(self.unary()?)));
        }
        if self.eat(b'(') {
            let e = self.expr()?;
            self.expect(b')')?;
            return Ok(e);
        }
        self.atom()
    }

    fn word(&mut self, pred: impl Fn(u8) -> bool) -> &str {
        self.skip_ws();
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(|&c| pred(c)) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).expect("ascii")
    }

    fn number(&mut self) -> Result<u64> {
        let w = self.word(|c| c.is_ascii_digit()).to_string();
        w.parse().map_err(|_| self.error("expected a number"))
    }

    fn atom(&mut self) -> Result<Rule> {
        let start = self.pos;
        let name = self.word(|c| c.is_ascii_alphanumeric() || c == b'_').to_string();
        match name.as_str() {
            "all" => Ok(Rule::All),
            "none" => Ok(Rule::None),
            "more_ones" => Ok(Rule::MoreOnes),
            "more_zeros" => Ok(Rule::MoreZeros),
            "balanced" => Ok(Rule::Balanced),
            "suffix" => {
                self.expect(b'(')?;
                let bits = self.word(|c| c == b'0' || c == b'1').to_string();
                self.expect(b')')?;
                Ok(Rule::Suffix(bits.parse().expect("binary digits")))
            }
            "mod" => {
                self.expect(b'(')?;
                let k = self.number()?;
                self.expect(b',')?;
                let r = self.number()?;
                self.expect(b')')?;
                if k == 0 {
                    return Err(self.error("modulus must be positive"));
                }
                Ok(Rule::Mod(k, r))
            }
            "until" => {
                self.expect(b'(')?;
                let n = self.number()?;
                self.expect(b',')?;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(Rule::Until(n, Box::new(e)))
            }
            "" => Err(self.error("expected a rule")),
            other => {
                self.pos = start;
                Err(self.error(&format!("unknown rule `{other}`")))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Selection {
    pub bits: BitString,
    /// 1-based, strictly increasing.
    pub indices: Vec<u64>,
    /// The rule became undefined before the limit.
    pub truncated: bool,
}

/// Scans positions `1..=limit` (or to the end of a finite source).
pub fn select_mwc(rule: &dyn MwcRule, source: &dyn IndexedBits, limit: u64) -> Selection {
    let mut prefix = BitString::new();
    let mut out = Selection { bits: BitString::new(), indices: Vec::new(), truncated: false };
    for i in 0..limit {
        let Some(b) = source.bit_at(i) else { break };
        match rule.decide(&prefix) {
            Decision::Select => {
                out.bits.push(b);
                out.indices.push(i + 1);
            }
            Decision::Skip => {}
            Decision::Undefined => {
                out.truncated = true;
                break;
            }
        }
        prefix.push(b);
    }
    out
}

/// A rule choosing `(i_m, a_m)` from the values `z_1…z_{m−1}` read so far;
/// `None` ends the selection.
pub trait KlRule: Send + Sync {
    fn name(&self) -> String;
    fn next(&self, values: &BitString) -> Option<(u64, bool)>;
}

/// Reads positions `n, n−1, …, 1`, selecting all.
#[derive(Clone, Copy, Debug)]
pub struct Reverse(pub u64);

impl KlRule for Reverse {
    fn name(&self) -> String {
        format!("reverse({})", self.0)
    }

    fn next(&self, values: &BitString) -> Option<(u64, bool)> {
        let m = values.len() as u64;
        (m < self.0).then(|| (self.0 - m, true))
    }
}

/// A fixed script of `(index, include)` pairs.
#[derive(Clone, Debug)]
pub struct Script(pub Vec<(u64, bool)>);

impl KlRule for Script {
    fn name(&self) -> String {
        "script".into()
    }

    fn next(&self, values: &BitString) -> Option<(u64, bool)> {
        self.0.get(values.len()).copied()
    }
}

/// An MWC rule run as a left-to-right KL scan.
pub struct Lifted<'a>(pub &'a dyn MwcRule);

impl KlRule for Lifted<'_> {
    fn name(&self) -> String {
        format!("lift({})", self.0.name())
    }

    fn next(&self, values: &BitString) -> Option<(u64, bool)> {
        match self.0.decide(values) {
            Decision::Select => Some((values.len() as u64 + 1, true)),
            Decision::Skip => Some((values.len() as u64 + 1, false)),
            Decision::Undefined => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Visit {
    pub index: u64,
    pub include: bool,
    pub value: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KlSelection {
    pub bits: BitString,
    pub visits: Vec<Visit>,
}

impl KlSelection {
    pub fn selected_indices(&self) -> Vec<u64> {
        self.visits.iter().filter(|v| v.include).map(|v| v.index).collect()
    }
}

/// Runs at most `limit` visits. Reading past the end of a finite source
/// ends the scan only for a lifted left-to-right rule reaching the end;
/// any other out-of-range index is an error.
pub fn select_kl(rule: &dyn KlRule, source: &dyn IndexedBits, limit: usize) -> Result<KlSelection> {
    let mut seen = HashSet::new();
    let mut values = BitString::new();
    let mut out = KlSelection { bits: BitString::new(), visits: Vec::new() };
    let len = source.bit_len();
    while out.visits.len() < limit {
        let Some((index, include)) = rule.next(&values) else { break };
        if index == 0 || len.is_some_and(|n| index > n) {
            if index > 0 && len == Some(index - 1) && index as usize == values.len() + 1 {
                break;
            }
            return Err(Error::OutOfRange { index: index as usize, len: len.unwrap_or(0) as usize });
        }
        if !seen.insert(index) {
            return Err(Error::RepeatedIndex(index as usize));
        }
        let value = source.bit_at(index - 1).expect("index checked against length");
        values.push(value);
        if include {
            out.bits.push(value);
        }
        out.visits.push(Visit { index, include, value });
    }
    Ok(out)
}

/// Cumulative ones counts: `ones[n−1] = f_n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FrequencyProfile {
    pub ones: Vec<u64>,
}

impl FrequencyProfile {
    pub fn horizon(&self) -> usize {
        self.ones.len()
    }

    pub fn f(&self, n: usize) -> u64 {
        self.ones[n - 1]
    }

    pub fn ratio(&self, n: usize) -> f64 {
        self.f(n) as f64 / n as f64
    }
}

pub fn frequency_profile(seq: &dyn IndexedBits, horizon: u64) -> FrequencyProfile {
    let mut ones = Vec::with_capacity(horizon as usize);
    let mut f = 0u64;
    for i in 0..horizon {
        let Some(b) = seq.bit_at(i) else { break };
        f += b as u64;
        ones.push(f);
    }
    FrequencyProfile { ones }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityReport {
    pub horizon: usize,
    pub final_ratio: f64,
    pub max_deviation: f64,
    pub max_deviation_at: usize,
    /// Last `n` at which `f_n/n − p` changed sign.
    pub last_crossing: Option<usize>,
    /// Last `n` with `|f_n/n − p| ≥ ε`.
    pub last_excursion: Option<usize>,
    /// `f_n/n ≥ 1/2` for every `n` up to the horizon.
    pub ville: bool,
}

pub fn stability_report(profile: &FrequencyProfile, p: f64, eps: f64) -> StabilityReport {
    let mut r = StabilityReport {
        horizon: profile.horizon(),
        final_ratio: if profile.horizon() == 0 { f64::NAN } else { profile.ratio(profile.horizon()) },
        max_deviation: 0.0,
        max_deviation_at: 0,
        last_crossing: None,
        last_excursion: None,
        ville: true,
    };
    let mut last_sign = 0i8;
    for n in 1..=profile.horizon() {
        let d = profile.ratio(n) - p;
        if d.abs() > r.max_deviation {
            r.max_deviation = d.abs();
            r.max_deviation_at = n;
        }
        if d.abs() >= eps {
            r.last_excursion = Some(n);
        }
        let sign = if d > 0.0 { 1 } else if d < 0.0 { -1 } else { 0 };
        if sign != 0 {
            if last_sign != 0 && sign != last_sign {
                r.last_crossing = Some(n);
            }
            last_sign = sign;
        }
        if 2 * profile.f(n) < n as u64 {
            r.ville = false;
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sources::{prng_stream, BitSource, SourceKind};

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn select_all_is_identity() {
        let x = bs("0110100");
        let s = select_mwc(&Rule::All, &x, 100);
        assert_eq!(s.bits, x);
        assert_eq!(s.indices, (1..=7).collect::<Vec<_>>());
        assert!(!s.truncated);
    }

    #[test]
    fn select_after_two_ones() {
        let s = select_mwc(&Rule::parse("suffix(11)").unwrap(), &bs("110110"), 100);
        assert_eq!(s.indices, vec![3, 6]);
        assert_eq!(s.bits, bs("00"));
    }

    #[test]
    fn undefined_truncates() {
        let s = select_mwc(&Rule::parse("until(3, all)").unwrap(), &bs("111111"), 100);
        assert_eq!(s.indices, vec![1, 2, 3]);
        assert!(s.truncated);
    }

    #[test]
    fn selection_commutes_with_truncation() {
        let x = prng_stream(3, 200);
        for rule in Rule::library() {
            let full = select_mwc(&rule, &x, 200);
            for cut in [0, 1, 17, 100, 199] {
                let part = select_mwc(&rule, &x.slice(0, cut), 200);
                let k = part.indices.len();
                assert_eq!(part.indices[..], full.indices[..k]);
                assert!(full.indices.get(k).is_none_or(|&i| i > cut as u64));
            }
        }
    }

    #[test]
    fn dsl_round_trip() {
        for rule in Rule::library() {
            assert_eq!(Rule::parse(&rule.to_string()).unwrap(), rule);
        }
        let r = Rule::parse("!(suffix(1) | balanced) & (mod(4,0) | more_zeros)").unwrap();
        assert_eq!(Rule::parse(&r.to_string()).unwrap(), r);
        let nested = Rule::And(Box::new(Rule::All), Box::new(Rule::And(Box::new(Rule::None), Box::new(Rule::Balanced))));
        assert_eq!(Rule::parse(&nested.to_string()).unwrap(), nested);
        let nested = Rule::Or(Box::new(Rule::All), Box::new(Rule::Or(Box::new(Rule::None), Box::new(Rule::Balanced))));
        assert_eq!(Rule::parse(&nested.to_string()).unwrap(), nested);
        assert!(matches!(Rule::parse("suffix(11"), Err(Error::RuleSyntax { .. })));
        assert!(matches!(Rule::parse("bogus"), Err(Error::RuleSyntax { at: 0, .. })));
        assert!(matches!(Rule::parse("mod(0,1)"), Err(Error::RuleSyntax { .. })));
        assert!(matches!(Rule::parse("all all"), Err(Error::RuleSyntax { .. })));
    }

    #[test]
    fn reverse_permutes() {
        let x = bs("0010111");
        let s = select_kl(&Reverse(7), &x, 100).unwrap();
        assert_eq!(s.bits, bs("1110100"));
        assert_eq!(s.selected_indices(), vec![7, 6, 5, 4, 3, 2, 1]);
    }

    #[test]
    fn revisit_is_a_violation() {
        let x = bs("0101");
        let r = Script(vec![(1, true), (3, false), (1, true)]);
        assert_eq!(select_kl(&r, &x, 100), Err(Error::RepeatedIndex(1)));
        let r = Script(vec![(2, true), (9, true)]);
        assert!(matches!(select_kl(&r, &x, 100), Err(Error::OutOfRange { index: 9, .. })));
        let r = Script(vec![(0, true)]);
        assert!(matches!(select_kl(&r, &x, 100), Err(Error::OutOfRange { index: 0, .. })));
    }

    #[test]
    fn lifted_rules_agree_on_random_strings() {
        for seed in 0..100 {
            let x = prng_stream(seed, 64);
            for rule in Rule::library() {
                let a = select_mwc(&rule, &x, 64);
                let b = select_kl(&Lifted(&rule), &x, 64).unwrap();
                assert_eq!(a.bits, b.bits);
                assert_eq!(a.indices, b.selected_indices());
            }
        }
    }

    #[test]
    fn kl_on_unbounded_source() {
        let src = BitSource::new(SourceKind::Constant(true));
        let s = select_kl(&Reverse(50), &src, 1000).unwrap();
        assert_eq!(s.bits, BitString::ones(50));
    }

    #[test]
    fn profiles() {
        let ones = BitSource::new(SourceKind::Constant(true));
        let p = frequency_profile(&ones, 1000);
        assert!((1..=1000).all(|n| p.ratio(n) == 1.0));
        let ville = BitSource::new(SourceKind::Finite(bs("1").concat(&bs("10").concat(&bs("10")))));
        let r = stability_report(&frequency_profile(&ville, 5), 0.5, 0.01);
        assert!(r.ville);
        let alt: BitString = std::iter::once(true).chain((0..9999).map(|i| i % 2 == 0)).collect();
        let r = stability_report(&frequency_profile(&alt, 10_000), 0.5, 0.01);
        assert!(r.ville);
        assert_eq!(r.max_deviation_at, 1);
        assert_eq!(r.last_crossing, None);
        let zeros_first = bs("0011");
        assert!(!stability_report(&frequency_profile(&zeros_first, 4), 0.5, 0.1).ville);
    }

    #[test]
    fn champernowne_is_balanced_at_horizon() {
        let p = frequency_profile(&BitSource::champernowne(), 100_000);
        let r = stability_report(&p, 0.5, 0.05);
        assert!((r.final_ratio - 0.5).abs() < 0.05, "{r:?}");
    }
}
