//! Bit strings, the standard string/number correspondence and the
//! self-delimiting codes built on top of it.
//!
//! Naturals and binary strings are identified in length-lexicographic order:
//! `0 ↔ ε, 1 ↔ 0, 2 ↔ 1, 3 ↔ 00, 4 ↔ 01, …`. Under this correspondence the
//! string for `i` is the binary expansion of `i + 1` with its leading `1`
//! removed.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A finite binary string.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString(Vec<bool>);

/// Position of a string in the length-lexicographic enumeration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LexIndex(pub u64);

impl BitString {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![false; n])
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![true; n])
    }

    /// The `width` low bits of `value`, most significant first.
    pub fn from_u64(value: u64, width: usize) -> Self {
        Self((0..width).rev().map(|i| i < 64 && (value >> i) & 1 == 1).collect())
    }

    /// Interprets the string as an unsigned binary numeral (ε is 0).
    pub fn as_u64(&self) -> Option<u64> {
        if self.0.len() > 64 {
            return None;
        }
        Some(self.0.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.0
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        self.0.get(i).copied()
    }

    pub fn push(&mut self, b: bool) {
        self.0.push(b);
    }

    pub fn extend_from(&mut self, other: &BitString) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        BitString(v)
    }

    pub fn slice(&self, start: usize, end: usize) -> BitString {
        BitString(self.0[start..end].to_vec())
    }

    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// All strings of length `n` in lexicographic order.
    pub fn all_of_length(n: usize) -> impl Iterator<Item = BitString> {
        assert!(n < 64, "exhaustive enumeration limited to n < 64");
        (0..1u64 << n).map(move |v| BitString::from_u64(v, n))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            f.write_str("ε")
        } else {
            write!(f, "\"{self}\"")
        }
    }
}

impl FromStr for BitString {
    type Err = Error;

    /// Parses `0`/`1` characters; `ε` and the empty string both denote the
    /// empty string.
    fn from_str(s: &str) -> Result<Self> {
        if s == "ε" {
            return Ok(Self::new());
        }
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Precondition(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitString)
    }
}

impl serde::Serialize for BitString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for BitString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<&[bool]> for BitString {
    fn from(bits: &[bool]) -> Self {
        BitString(bits.to_vec())
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        BitString(iter.into_iter().collect())
    }
}

/// Bit-level cursor used by the decoders.
#[derive(Debug, Clone)]
pub struct BitCursor<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl<'a> BitCursor<'a> {
    pub fn new(bits: &'a [bool]) -> Self {
        Self { bits, pos: 0 }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> &'a [bool] {
        &self.bits[self.pos..]
    }

    pub fn read(&mut self) -> Result<bool> {
        let b = *self
            .bits
            .get(self.pos)
            .ok_or(Error::MalformedPrefix { consumed: self.pos })?;
        self.pos += 1;
        Ok(b)
    }

    pub fn read_n(&mut self, n: usize) -> Result<BitString> {
        if self.bits.len() - self.pos < n {
            self.pos = self.bits.len();
            return Err(Error::MalformedPrefix { consumed: self.pos });
        }
        let out = BitString(self.bits[self.pos..self.pos + n].to_vec());
        self.pos += n;
        Ok(out)
    }

    pub fn read_rest(&mut self) -> BitString {
        let out = BitString(self.bits[self.pos..].to_vec());
        self.pos = self.bits.len();
        out
    }

    /// Reads one `x″` block and returns `x`.
    pub fn read_sd2(&mut self) -> Result<BitString> {
        let mut len_len = 0usize;
        while self.read()? {
            len_len += 1;
        }
        let len_str = self.read_n(len_len)?;
        let len = to_index(&len_str)?.0;
        let len = usize::try_from(len).map_err(|_| Error::MalformedPrefix { consumed: self.pos })?;
        self.read_n(len)
    }

    /// Reads one `x′` block and returns `x`.
    pub fn read_sd1(&mut self) -> Result<BitString> {
        let mut len = 0usize;
        while self.read()? {
            len += 1;
        }
        self.read_n(len)
    }

    /// Reads a natural number written as the `x″` code of its string.
    pub fn read_number(&mut self) -> Result<u64> {
        let s = self.read_sd2()?;
        Ok(to_index(&s)?.0)
    }
}

pub fn from_index(i: LexIndex) -> BitString {
    let v = i.0 as u128 + 1;
    let width = 127 - v.leading_zeros() as usize;
    (0..width).rev().map(|k| (v >> k) & 1 == 1).collect()
}

pub fn to_index(x: &BitString) -> Result<LexIndex> {
    if x.len() >= 64 {
        return Err(Error::IndexOverflow(x.len()));
    }
    let body = x.as_u64().expect("length checked");
    Ok(LexIndex(((1u64 << x.len()) | body) - 1))
}

/// Length of the string that names `n` under the standard correspondence,
/// i.e. `⌊log₂(n + 1)⌋`.
pub fn index_len(n: u64) -> usize {
    (127 - (n as u128 + 1).leading_zeros()) as usize
}

/// `x′ = 1^{l(x)} 0 x`.
pub fn encode_sd1(x: &BitString) -> BitString {
    let mut v = Vec::with_capacity(2 * x.len() + 1);
    v.extend(std::iter::repeat_n(true, x.len()));
    v.push(false);
    v.extend_from_slice(x.bits());
    BitString(v)
}

/// `x″ = 1^{l(l(x))} 0 l(x) x`, with `l(x)` rendered through the standard
/// correspondence (so `l(x) = 0` renders as ε).
pub fn encode_sd2(x: &BitString) -> BitString {
    let len_str = from_index(LexIndex(x.len() as u64));
    let mut v = Vec::with_capacity(x.len() + 2 * len_str.len() + 1);
    v.extend(std::iter::repeat_n(true, len_str.len()));
    v.push(false);
    v.extend_from_slice(len_str.bits());
    v.extend_from_slice(x.bits());
    BitString(v)
}

/// Code length of `encode_sd2` without building it.
pub fn sd2_len(len: usize) -> usize {
    len + 2 * index_len(len as u64) + 1
}

/// Self-delimiting code of a natural number: `x″` of its string.
pub fn encode_number(n: u64) -> BitString {
    encode_sd2(&from_index(LexIndex(n)))
}

pub fn decode_sd1(s: &BitString) -> Result<(BitString, BitString)> {
    let mut cur = BitCursor::new(s.bits());
    let x = cur.read_sd1()?;
    Ok((x, cur.read_rest()))
}

/// Inverse of the pairing `⟨x, y⟩ = x″y`.
pub fn decode_pair(s: &BitString) -> Result<(BitString, BitString)> {
    let mut cur = BitCursor::new(s.bits());
    let x = cur.read_sd2()?;
    Ok((x, cur.read_rest()))
}

pub fn pair(x: &BitString, y: &BitString) -> BitString {
    encode_sd2(x).concat(y)
}

/// `⟨x, y, z⟩ = ⟨x, ⟨y, z⟩⟩`.
pub fn triple(x: &BitString, y: &BitString, z: &BitString) -> BitString {
    pair(x, &pair(y, z))
}

pub fn untriple(s: &BitString) -> Result<(BitString, BitString, BitString)> {
    let (x, rest) = decode_pair(s)?;
    let (y, z) = decode_pair(&rest)?;
    Ok((x, y, z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn index_examples() {
        assert_eq!(from_index(LexIndex(0)), BitString::new());
        assert_eq!(from_index(LexIndex(4)), bs("01"));
        assert_eq!(from_index(LexIndex(7)), bs("000"));
    }

    #[test]
    fn index_matches_brute_force_enumeration() {
        let mut expected = vec![BitString::new()];
        for n in 1..=10 {
            expected.extend(BitString::all_of_length(n));
        }
        for (i, x) in expected.iter().enumerate() {
            assert_eq!(&from_index(LexIndex(i as u64)), x);
            assert_eq!(to_index(x).unwrap(), LexIndex(i as u64));
        }
    }

    #[test]
    fn index_bijection_up_to_2_16() {
        for i in 0..=(1u64 << 16) {
            let x = from_index(LexIndex(i));
            assert_eq!(x.len(), index_len(i));
            assert_eq!(to_index(&x).unwrap().0, i);
        }
    }

    #[test]
    fn sd1_examples() {
        assert_eq!(encode_sd1(&BitString::new()), bs("0"));
        assert_eq!(encode_sd1(&bs("01")), bs("11001"));
        assert_eq!(encode_sd1(&bs("1")), bs("101"));
    }

    #[test]
    fn sd2_examples() {
        assert_eq!(encode_sd2(&BitString::new()), bs("0"));
        // l("01") = 2 renders as "1"; l("1") = 1 gives the unary prefix "1".
        assert_eq!(encode_sd2(&bs("01")), bs("10101"));
        assert_eq!(decode_pair(&encode_sd2(&bs("01"))).unwrap(), (bs("01"), BitString::new()));
        // l = 16 renders as "0001", whose length 4 gives "1111".
        assert_eq!(encode_sd2(&BitString::zeros(16)).len(), 16 + 8 + 1);
    }

    #[test]
    fn length_laws_up_to_16() {
        for n in 0..=16 {
            for x in BitString::all_of_length(n).step_by(if n > 10 { 97 } else { 1 }) {
                assert_eq!(encode_sd1(&x).len(), 2 * n + 1);
                let ll = from_index(LexIndex(n as u64)).len();
                assert_eq!(encode_sd2(&x).len(), n + 2 * ll + 1);
                assert_eq!(sd2_len(n), n + 2 * ll + 1);
            }
        }
    }

    #[test]
    fn decode_pair_examples() {
        let (x, rest) = decode_pair(&encode_sd2(&BitString::new()).concat(&bs("101"))).unwrap();
        assert_eq!(x, BitString::new());
        assert_eq!(rest, bs("101"));
    }

    #[test]
    fn decode_pair_exhaustive_up_to_8() {
        let all: Vec<BitString> = (0..=8).flat_map(BitString::all_of_length).collect();
        let ys: Vec<BitString> = all.iter().step_by(7).cloned().chain([BitString::new()]).collect();
        for x in &all {
            for y in &ys {
                assert_eq!(decode_pair(&pair(x, y)).unwrap(), (x.clone(), y.clone()));
            }
        }
    }

    #[test]
    fn truncated_pair_is_malformed() {
        let code = encode_sd2(&bs("0110"));
        for cut in 0..code.len() {
            let err = decode_pair(&code.slice(0, cut)).unwrap_err();
            assert!(matches!(err, Error::MalformedPrefix { .. }));
        }
    }

    #[test]
    fn triple_nests_right() {
        let (x, y, z) = (bs("1"), bs("0010"), bs("111"));
        let t = triple(&x, &y, &z);
        assert_eq!(t, pair(&x, &pair(&y, &z)));
        assert_eq!(untriple(&t).unwrap(), (x, y, z));
    }

    #[test]
    fn index_overflow_is_reported() {
        assert_eq!(to_index(&BitString::zeros(64)), Err(Error::IndexOverflow(64)));
    }

    proptest! {
        #[test]
        fn pair_round_trip(x in prop::collection::vec(any::<bool>(), 0..40),
                           y in prop::collection::vec(any::<bool>(), 0..40)) {
            let (x, y) = (BitString::from_bits(x), BitString::from_bits(y));
            prop_assert_eq!(decode_pair(&pair(&x, &y)).unwrap(), (x.clone(), y.clone()));
            prop_assert_eq!(decode_sd1(&encode_sd1(&x).concat(&y)).unwrap(), (x, y));
        }
    }
}
