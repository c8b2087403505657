//! Replayable bit sources and the on-disk bitstring formats.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};

/// Identifies the generator behind [`SourceKind::Prng`]; stamped into reports.
pub const PRNG_VERSION: &str = "chacha8/rand_chacha-0.3";

pub const PACKED_MAGIC: &[u8; 8] = b"AITBITS1";

/// Random access to a (possibly unbounded) bit sequence, 0-based.
pub trait IndexedBits {
    fn bit_at(&self, i: u64) -> Option<bool>;

    /// `None` for unbounded sources.
    fn bit_len(&self) -> Option<u64>;
}

impl IndexedBits for BitString {
    fn bit_at(&self, i: u64) -> Option<bool> {
        self.get(i as usize)
    }

    fn bit_len(&self) -> Option<u64> {
        Some(self.len() as u64)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    /// Binary Champernowne: `1 10 11 100 101 …`.
    Champernowne,
    Constant(bool),
    Periodic(BitString),
    Prng { seed: u64 },
    /// A finite stream; reads past the end yield nothing.
    Finite(BitString),
}

/// A bit stream with a cursor. Cloning gives an independent cursor.
#[derive(Clone, Debug)]
pub struct BitSource {
    kind: SourceKind,
    cursor: u64,
    rng: Option<ChaCha8Rng>,
    word: Option<(u64, u32)>,
}

impl BitSource {
    pub fn new(kind: SourceKind) -> Self {
        if let SourceKind::Periodic(p) = &kind {
            assert!(!p.is_empty(), "periodic source needs a nonempty pattern");
        }
        let rng = match kind {
            SourceKind::Prng { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        Self { kind, cursor: 0, rng, word: None }
    }

    pub fn champernowne() -> Self {
        Self::new(SourceKind::Champernowne)
    }

    pub fn prng(seed: u64) -> Self {
        Self::new(SourceKind::Prng { seed })
    }

    pub fn finite(bits: BitString) -> Self {
        Self::new(SourceKind::Finite(bits))
    }

    pub fn kind(&self) -> &SourceKind {
        &self.kind
    }

    pub fn cursor(&self) -> u64 {
        self.cursor
    }

    pub fn seek(&mut self, pos: u64) {
        self.cursor = pos;
    }

    fn prng_bit(&mut self, i: u64) -> bool {
        let w = i / 32;
        let value = match self.word {
            Some((idx, v)) if idx == w => v,
            _ => {
                let rng = self.rng.as_mut().expect("prng source");
                rng.set_word_pos(w as u128);
                let v = rng.next_u32();
                self.word = Some((w, v));
                v
            }
        };
        (value >> (31 - (i % 32))) & 1 == 1
    }

    /// Bit at absolute position `i` without moving the cursor.
    pub fn peek(&mut self, i: u64) -> Option<bool> {
        match &self.kind {
            SourceKind::Prng { .. } => Some(self.prng_bit(i)),
            _ => self.bit_at(i),
        }
    }

    pub fn next_bit(&mut self) -> Option<bool> {
        let b = self.peek(self.cursor)?;
        self.cursor += 1;
        Some(b)
    }

    /// Reads up to `n` bits from the cursor.
    pub fn take(&mut self, n: usize) -> BitString {
        if let SourceKind::Prng { .. } = self.kind {
            let out = prng_bits(self.rng.as_mut().expect("prng source"), self.cursor, n);
            self.cursor += n as u64;
            self.word = None;
            return out;
        }
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            match self.next_bit() {
                Some(b) => out.push(b),
                None => break,
            }
        }
        BitString::from_bits(out)
    }
}

impl IndexedBits for BitSource {
    fn bit_at(&self, i: u64) -> Option<bool> {
        match &self.kind {
            SourceKind::Champernowne => Some(champernowne_digit_at(2, i) == 1),
            SourceKind::Constant(b) => Some(*b),
            SourceKind::Periodic(p) => p.get((i % p.len() as u64) as usize),
            SourceKind::Finite(bits) => bits.get(i as usize),
            SourceKind::Prng { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_word_pos((i / 32) as u128);
                Some((rng.next_u32() >> (31 - (i % 32))) & 1 == 1)
            }
        }
    }

    fn bit_len(&self) -> Option<u64> {
        match &self.kind {
            SourceKind::Finite(bits) => Some(bits.len() as u64),
            _ => None,
        }
    }
}

fn prng_bits(rng: &mut ChaCha8Rng, start: u64, n: usize) -> BitString {
    let mut out = Vec::with_capacity(n);
    let mut pos = start;
    let end = start + n as u64;
    while pos < end {
        let w = pos / 32;
        rng.set_word_pos(w as u128);
        let mut word = rng.next_u32();
        let mut bit = pos % 32;
        // Stay aligned on whole words after the first one.
        loop {
            out.push((word >> (31 - bit)) & 1 == 1);
            pos += 1;
            bit += 1;
            if pos == end {
                break;
            }
            if bit == 32 {
                word = rng.next_u32();
                bit = 0;
            }
        }
    }
    BitString::from_bits(out)
}

/// `count` bits of the seeded generator.
pub fn prng_stream(seed: u64, count: usize) -> BitString {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    prng_bits(&mut rng, 0, count)
}

/// Digit at 0-based position `i` of the base-`base` Champernowne sequence
/// `1 2 3 … (base−1) 10 11 …`, computed without generating the prefix.
pub fn champernowne_digit_at(base: u32, i: u64) -> u32 {
    assert!(base >= 2, "base must be at least 2");
    let b = base as u128;
    let mut i = i as u128;
    let mut width = 1u128;
    let mut first = 1u128;
    loop {
        let block = width * (b - 1) * first;
        if i < block {
            break;
        }
        i -= block;
        width += 1;
        first *= b;
    }
    let number = first + i / width;
    let pos_from_left = i % width;
    let shift = width - 1 - pos_from_left;
    ((number / b.pow(shift as u32)) % b) as u32
}

/// First `count` digits of the base-`base` Champernowne sequence.
pub fn champernowne(base: u32, count: usize) -> Vec<u32> {
    assert!(base >= 2, "base must be at least 2");
    let mut out = Vec::with_capacity(count);
    let mut k = 1u128;
    while out.len() < count {
        let mut digits = Vec::new();
        let mut v = k;
        while v > 0 {
            digits.push((v % base as u128) as u32);
            v /= base as u128;
        }
        out.extend(digits.into_iter().rev());
        k += 1;
    }
    out.truncate(count);
    out
}

pub fn digits_to_string(digits: &[u32]) -> String {
    digits.iter().map(|&d| std::char::from_digit(d, 36).expect("digit below 36")).collect()
}

/// Parses ASCII `0`/`1` text; whitespace is ignored.
pub fn parse_ascii(text: &str) -> Result<BitString> {
    text.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::BadFile(format!("unexpected character {other:?}"))),
        })
        .collect()
}

pub fn encode_packed(bits: &BitString) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + bits.len().div_ceil(8));
    out.extend_from_slice(PACKED_MAGIC);
    out.extend_from_slice(&(bits.len() as u64).to_le_bytes());
    for chunk in bits.bits().chunks(8) {
        let byte = chunk.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | ((b as u8) << (7 - i)));
        out.push(byte);
    }
    out
}

pub fn decode_packed(data: &[u8]) -> Result<BitString> {
    if data.len() < 16 || &data[..8] != PACKED_MAGIC {
        return Err(Error::BadFile("missing AITBITS1 header".into()));
    }
    let count = u64::from_le_bytes(data[8..16].try_into().expect("8 bytes")) as usize;
    let body = &data[16..];
    if body.len() != count.div_ceil(8) {
        return Err(Error::BadFile(format!("expected {} payload bytes for {count} bits, found {}", count.div_ceil(8), body.len())));
    }
    Ok((0..count).map(|i| (body[i / 8] >> (7 - i % 8)) & 1 == 1).collect())
}

/// Reads either format, detected by the packed magic.
pub fn read_bits_file(path: &Path) -> Result<BitString> {
    let data = fs::read(path)?;
    if data.starts_with(PACKED_MAGIC) {
        decode_packed(&data)
    } else {
        let text = String::from_utf8(data).map_err(|_| Error::BadFile("not ASCII".into()))?;
        parse_ascii(&text)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BitFormat {
    Ascii,
    Packed,
}

pub fn write_bits_file(path: &Path, bits: &BitString, format: BitFormat) -> Result<()> {
    let mut f = fs::File::create(path)?;
    match format {
        BitFormat::Ascii => writeln!(f, "{bits}")?,
        BitFormat::Packed => f.write_all(&encode_packed(bits))?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn champernowne_examples() {
        assert_eq!(digits_to_string(&champernowne(10, 15)), "123456789101112");
        assert_eq!(digits_to_string(&champernowne(2, 10)), "1101110010");
    }

    #[test]
    fn indexed_champernowne_matches_sequential() {
        for base in [2, 3, 10, 16] {
            let seq = champernowne(base, 10_000);
            for (i, &d) in seq.iter().enumerate() {
                assert_eq!(champernowne_digit_at(base, i as u64), d, "base {base} position {i}");
            }
        }
        let mut src = BitSource::champernowne();
        let bits = src.take(10_000);
        for i in 0..10_000u64 {
            assert_eq!(src.bit_at(i), bits.get(i as usize));
        }
    }

    #[test]
    fn prng_is_reproducible_and_seeded() {
        assert_eq!(prng_stream(42, 1000), prng_stream(42, 1000));
        assert_ne!(prng_stream(42, 1000), prng_stream(43, 1000));
    }

    #[test]
    fn prng_random_access_matches_stream() {
        let stream = prng_stream(9, 5000);
        let src = BitSource::prng(9);
        for i in (0..5000u64).step_by(7) {
            assert_eq!(src.bit_at(i), stream.get(i as usize));
        }
        let mut s = BitSource::prng(9);
        s.seek(37);
        assert_eq!(s.take(100), stream.slice(37, 137));
        assert_eq!(s.next_bit(), stream.get(137));
    }

    #[test]
    fn cursor_save_restore_is_exact() {
        for kind in [
            SourceKind::Champernowne,
            SourceKind::Constant(true),
            SourceKind::Periodic("011".parse().unwrap()),
            SourceKind::Prng { seed: 3 },
            SourceKind::Finite(prng_stream(1, 300)),
        ] {
            let mut s = BitSource::new(kind);
            s.take(50);
            let saved = s.cursor();
            let a = s.take(100);
            s.seek(saved);
            assert_eq!(s.take(100), a);
            let mut other = s.clone();
            assert_eq!(other.take(10), s.take(10));
        }
    }

    #[test]
    fn ascii_ignores_whitespace() {
        assert_eq!(parse_ascii("01 1\n0\t1").unwrap().to_string(), "01101");
        assert!(parse_ascii("012").is_err());
    }

    #[test]
    fn packed_layout() {
        let bits: BitString = "1010000011".parse().unwrap();
        let data = encode_packed(&bits);
        assert_eq!(&data[..8], b"AITBITS1");
        assert_eq!(&data[8..16], &10u64.to_le_bytes());
        assert_eq!(&data[16..], &[0b1010_0000, 0b1100_0000]);
        assert!(decode_packed(&data[..17]).is_err());
    }

    #[test]
    fn file_round_trip_both_formats() {
        let dir = tempfile::tempdir().unwrap();
        let bits = prng_stream(5, 1001);
        for (name, format) in [("a.txt", BitFormat::Ascii), ("b.bits", BitFormat::Packed)] {
            let path = dir.path().join(name);
            write_bits_file(&path, &bits, format).unwrap();
            assert_eq!(read_bits_file(&path).unwrap(), bits);
        }
    }

    proptest! {
        #[test]
        fn packed_round_trip(v in prop::collection::vec(any::<bool>(), 0..100)) {
            let bits = BitString::from_bits(v);
            prop_assert_eq!(decode_packed(&encode_packed(&bits)).unwrap(), bits);
        }
    }
}
