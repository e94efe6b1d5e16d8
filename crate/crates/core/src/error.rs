use thiserror::Error;

use crate::codebooks::Scheme;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid constellation order {m} for {kind}")]
    InvalidOrder { kind: &'static str, m: usize },

    #[error("transmit-antenna parameter must be a power of two >= 2, got {0}")]
    InvalidAntennaCount(usize),

    #[error("expected a bit block of length {expected}, got {got}")]
    BitLength { expected: usize, got: usize },

    #[error("bit values must be 0 or 1, got {0}")]
    InvalidBit(u8),

    #[error("operation requires scheme {expected:?}, configuration is {got:?}")]
    SchemeMismatch { expected: &'static str, got: Scheme },

    #[error("index {what}={value} outside 1..={max}")]
    IndexOutOfRange { what: &'static str, value: usize, max: usize },

    #[error("antenna pair ({l1}, {l2}) is not legitimate for this scheme")]
    IllegalAntennaPair { l1: usize, l2: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("phase {index} has magnitude {magnitude}, expected 1")]
    PhaseMagnitude { index: usize, magnitude: f64 },

    #[error("real-valued equivalent channel is numerically rank deficient")]
    RankDeficient,

    #[error("R1 zero pattern violated: max off-block magnitude {0:e}")]
    StructureViolation(f64),

    #[error("search space too large: {0}")]
    SearchTooLarge(String),

    #[error("decoder {decoder} cannot decode scheme {scheme:?}")]
    DecoderMismatch { decoder: &'static str, scheme: Scheme },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
