//! A desk-scale laboratory for algorithmic randomness.

pub mod bits;
pub mod chaos;
pub mod complexity;
pub mod compress;
pub mod config;
pub mod dyadic;
pub mod error;
pub mod machine;
pub mod measure;
pub mod mltests;
pub mod omega;
pub mod predictor;
pub mod report;
pub mod selection;
pub mod seqstats;
pub mod sources;
pub mod tourney;

pub use bits::{BitString, LexIndex};
pub use error::{Error, Result};
