//! JSON-lines reports. Every report opens with a header naming the machine,
//! the PRNG and the calibration, so each number can be reproduced.

use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::Result;
use crate::machine::MACHINE_VERSION;
use crate::sources::PRNG_VERSION;

#[derive(Clone, Debug, Serialize)]
pub struct Header<'a> {
    pub record: &'static str,
    pub command: &'a str,
    pub machine_version: &'static str,
    pub prng_version: &'static str,
    pub calibration: Calibration,
    pub config: &'a RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Calibration {
    pub c: f64,
    pub c1: f64,
}

#[derive(Serialize)]
struct Tagged<'a, T: Serialize> {
    record: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

pub struct Report<W: Write> {
    out: W,
}

impl<W: Write> Report<W> {
    /// Writes the header line; the timestamp is left out when
    /// `config.deterministic` is set.
    pub fn start(mut out: W, command: &str, config: &RunConfig) -> Result<Self> {
        let timestamp = (!config.deterministic)
            .then(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0));
        let header = Header {
            record: "header",
            command,
            machine_version: MACHINE_VERSION,
            prng_version: PRNG_VERSION,
            calibration: Calibration { c: config.c, c1: config.c1 },
            config,
            timestamp,
        };
        writeln!(out, "{}", serde_json::to_string(&header).expect("serializable header"))?;
        Ok(Self { out })
    }

    pub fn emit<T: Serialize>(&mut self, record: &str, body: &T) -> Result<()> {
        let line = serde_json::to_string(&Tagged { record, body }).expect("serializable record");
        writeln!(self.out, "{line}")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}
