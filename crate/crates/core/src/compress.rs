//! Compressor-based complexity bounds for strings too long to enumerate.
//!
//! A compressed stream is `⟨codec id⟩″ ⟨payload length⟩″ payload`, so the
//! header is self-delimiting and the reported value is an honest description
//! length.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bits::{encode_number, BitCursor, BitString};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompressorId {
    Raw,
    RunLength,
}

impl CompressorId {
    pub const ALL: [CompressorId; 2] = [CompressorId::Raw, CompressorId::RunLength];

    fn code(self) -> u64 {
        match self {
            CompressorId::Raw => 0,
            CompressorId::RunLength => 1,
        }
    }

    fn from_code(code: u64) -> Result<Self> {
        match code {
            0 => Ok(CompressorId::Raw),
            1 => Ok(CompressorId::RunLength),
            other => Err(Error::UnknownCodec(other.to_string())),
        }
    }
}

impl FromStr for CompressorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(CompressorId::Raw),
            "rle" | "run-length" => Ok(CompressorId::RunLength),
            other => Err(Error::UnknownCodec(other.to_string())),
        }
    }
}

impl fmt::Display for CompressorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CompressorId::Raw => "raw",
            CompressorId::RunLength => "rle",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompressorBound {
    pub codec: CompressorId,
    pub value: usize,
    pub header_bits: usize,
    pub payload_bits: usize,
}

fn payload(x: &BitString, codec: CompressorId) -> BitString {
    match codec {
        CompressorId::Raw => x.clone(),
        CompressorId::RunLength => {
            let mut out = BitString::new();
            let bits = x.bits();
            let Some(&first) = bits.first() else { return out };
            out.push(first);
            let mut run = 0u64;
            let mut current = first;
            for &b in bits {
                if b == current {
                    run += 1;
                } else {
                    out.extend_from(&encode_number(run - 1));
                    current = b;
                    run = 1;
                }
            }
            out.extend_from(&encode_number(run - 1));
            out
        }
    }
}

pub fn compress(x: &BitString, codec: CompressorId) -> BitString {
    let body = payload(x, codec);
    let mut out = encode_number(codec.code());
    out.extend_from(&encode_number(body.len() as u64));
    out.extend_from(&body);
    out
}

pub fn decompress(stream: &BitString) -> Result<BitString> {
    let mut cur = BitCursor::new(stream.bits());
    let codec = CompressorId::from_code(cur.read_number().map_err(|_| Error::CorruptCodec("header"))?)?;
    let len = cur.read_number().map_err(|_| Error::CorruptCodec("payload length"))?;
    let body = cur.read_n(len as usize).map_err(|_| Error::CorruptCodec("payload truncated"))?;
    match codec {
        CompressorId::Raw => Ok(body),
        CompressorId::RunLength => {
            let mut out = Vec::new();
            let mut cur = BitCursor::new(body.bits());
            let Ok(mut bit) = cur.read() else { return Ok(BitString::new()) };
            while !cur.remaining().is_empty() {
                let run = cur.read_number().map_err(|_| Error::CorruptCodec("run length"))? + 1;
                out.extend(std::iter::repeat_n(bit, run as usize));
                bit = !bit;
            }
            Ok(BitString::from_bits(out))
        }
    }
}

/// Upper bound on the description length of `x` through a registered codec.
pub fn compressor_bound(x: &BitString, codec: CompressorId) -> CompressorBound {
    let body = payload(x, codec);
    let header_bits = encode_number(codec.code()).len() + encode_number(body.len() as u64).len();
    CompressorBound { codec, value: header_bits + body.len(), header_bits, payload_bits: body.len() }
}

/// Best bound over all registered codecs.
pub fn best_compressor_bound(x: &BitString) -> CompressorBound {
    CompressorId::ALL
        .iter()
        .map(|&c| compressor_bound(x, c))
        .min_by_key(|b| b.value)
        .expect("at least one codec")
}
