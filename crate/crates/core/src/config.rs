//! Run configuration as a flat `key = value` file.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::complexity::{DEFAULT_MAX_LEN, DEFAULT_STEP_BUDGET};
use crate::error::{Error, Result};
use crate::seqstats::{DEFAULT_C, DEFAULT_C1};
use crate::sources::BitFormat;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub max_len: usize,
    pub steps: u64,
    pub battery: String,
    pub seed: u64,
    pub seeds: u64,
    pub c: f64,
    pub c1: f64,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: BitFormat,
    pub deterministic: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            max_len: DEFAULT_MAX_LEN,
            steps: DEFAULT_STEP_BUDGET,
            battery: "default".into(),
            seed: 0,
            seeds: 20,
            c: DEFAULT_C,
            c1: DEFAULT_C1,
            input: None,
            output: None,
            format: BitFormat::Ascii,
            deterministic: false,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config(format!("bad value `{value}` for `{key}`")))
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "max_len" => self.max_len = parse(key, value)?,
            "steps" => self.steps = parse(key, value)?,
            "battery" => self.battery = value.to_string(),
            "seed" => self.seed = parse(key, value)?,
            "seeds" => self.seeds = parse(key, value)?,
            "c" => self.c = parse(key, value)?,
            "c1" => self.c1 = parse(key, value)?,
            "input" => self.input = (!value.is_empty()).then(|| PathBuf::from(value)),
            "output" => self.output = (!value.is_empty()).then(|| PathBuf::from(value)),
            "format" => {
                self.format = match value {
                    "ascii" => BitFormat::Ascii,
                    "packed" => BitFormat::Packed,
                    _ => return Err(Error::Config(format!("unknown format `{value}`"))),
                }
            }
            "deterministic" => self.deterministic = parse(key, value)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_len == 0 || self.steps == 0 || self.seeds == 0 {
            return Err(Error::Config("max_len, steps and seeds must be positive".into()));
        }
        if !self.c.is_finite() || !self.c1.is_finite() {
            return Err(Error::Config("calibration constants must be finite".into()));
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", no + 1)))?;
            cfg.set(k.trim(), v.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let mut s = String::new();
        let _ = writeln!(s, "max_len = {}", self.max_len);
        let _ = writeln!(s, "steps = {}", self.steps);
        let _ = writeln!(s, "battery = {}", self.battery);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "seeds = {}", self.seeds);
        let _ = writeln!(s, "c = {:?}", self.c);
        let _ = writeln!(s, "c1 = {:?}", self.c1);
        let _ = writeln!(s, "input = {}", path(&self.input));
        let _ = writeln!(s, "output = {}", path(&self.output));
        let _ = writeln!(s, "format = {}", if self.format == BitFormat::Ascii { "ascii" } else { "packed" });
        let _ = writeln!(s, "deterministic = {}", self.deterministic);
        s
    }
}
