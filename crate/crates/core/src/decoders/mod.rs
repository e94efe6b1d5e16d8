//! Detectors for SM and the CIOD-based schemes.
//!
//! All three detectors for the two-channel-use schemes minimize the same
//! block metric
//!
//! ```text
//! J(l1, l2, s1, s2) = ||y1 - h_l1 s̃1||² + ||y2 - h_l2 s̃2||²
//! ```
//!
//! and differ only in how much of the candidate space they visit:
//!
//! | detector | evaluations (Low DoSM) | evaluations (High DoSM) |
//! |----------|------------------------|-------------------------|
//! | exhaustive ML | `N_t M²` | `N_t² M²` |
//! | MRC | `2 M N_t` | `2 M N_t²` |
//! | QR + hard limiting | `2 N_t √M` | `2 N_t² √M` |
//!
//! Ties on the metric resolve to the lowest label index.

mod ml;
mod mrc;
mod qr;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub use ml::{ml_exhaustive_decode, ml_exhaustive_ranked, ml_sm_decode, RankedDecision};
pub use mrc::{ml_mrc_decode, mrc_ciod_decode, PairDecision};
pub use qr::{build_real_decomp, qr_hardlimit_decode, RealDecomposition};

use crate::codebooks::{CodewordLabel, Scheme, SchemeConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeResult {
    pub label: CodewordLabel,
    /// Block metric at `label`.
    pub metric: f64,
    /// Number of candidate-metric evaluations performed.
    pub evals: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecoderKind {
    Exhaustive,
    Mrc,
    QrHardLimit,
}

impl DecoderKind {
    pub fn name(&self) -> &'static str {
        match self {
            DecoderKind::Exhaustive => "ml",
            DecoderKind::Mrc => "mrc",
            DecoderKind::QrHardLimit => "qr",
        }
    }

    pub fn supports(&self, scheme: Scheme) -> bool {
        scheme != Scheme::Sm || *self == DecoderKind::Exhaustive
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ml" | "exhaustive" => Ok(DecoderKind::Exhaustive),
            "mrc" => Ok(DecoderKind::Mrc),
            "qr" | "qr-hardlimit" | "hardlimit" => Ok(DecoderKind::QrHardLimit),
            other => Err(Error::Config(format!("unknown decoder '{other}'"))),
        }
    }
}

/// Decodes an `N_r x channel_uses` received block.
pub fn decode(kind: DecoderKind, y: &DMatrix<Complex64>, h: &DMatrix<Complex64>, cfg: &SchemeConfig) -> Result<DecodeResult> {
    if !kind.supports(cfg.scheme()) {
        return Err(Error::DecoderMismatch {
            decoder: kind.name(),
            scheme: cfg.scheme(),
        });
    }
    match (cfg.scheme(), kind) {
        (Scheme::Sm, _) => {
            check_dims(y, h, cfg)?;
            ml_sm_decode(&y.column(0).into_owned(), h, cfg)
        }
        (_, DecoderKind::Exhaustive) => ml_exhaustive_decode(y, h, cfg),
        (_, DecoderKind::Mrc) => ml_mrc_decode(y, h, cfg),
        (_, DecoderKind::QrHardLimit) => qr_hardlimit_decode(y, h, cfg),
    }
}

/// Closed-form evaluation count of `kind` for `cfg`.
pub fn expected_evals(kind: DecoderKind, cfg: &SchemeConfig) -> usize {
    let m = cfg.order();
    let pairs = cfg.num_codebooks();
    match (cfg.scheme(), kind) {
        (Scheme::Sm, _) => cfg.n_t() * m,
        (_, DecoderKind::Exhaustive) => cfg.num_codewords(),
        (_, DecoderKind::Mrc) => 2 * m * pairs,
        // one conditioning pass per quadrature level, per symbol
        (_, DecoderKind::QrHardLimit) => 2 * cfg.constellation().pam_q().len() * pairs,
    }
}

/// Block metric of the codeword `label` against the received block.
pub fn block_metric(y: &DMatrix<Complex64>, h: &DMatrix<Complex64>, cfg: &SchemeConfig, label: &CodewordLabel) -> f64 {
    let x = cfg.encode_label(label);
    let mut j = 0.0;
    for (t, slot) in x.slots().iter().enumerate() {
        let col = h.column(slot.antenna - 1);
        for r in 0..y.nrows() {
            j += (y[(r, t)] - col[r] * slot.symbol).norm_sqr();
        }
    }
    j
}

pub(crate) fn check_dims(y: &DMatrix<Complex64>, h: &DMatrix<Complex64>, cfg: &SchemeConfig) -> Result<()> {
    if h.ncols() != cfg.n_antennas() {
        return Err(Error::Dimension(format!(
            "channel has {} columns, scheme uses {} antennas",
            h.ncols(),
            cfg.n_antennas()
        )));
    }
    if y.nrows() != h.nrows() || y.ncols() != cfg.channel_uses() {
        return Err(Error::Dimension(format!(
            "received block is {}x{}, expected {}x{}",
            y.nrows(),
            y.ncols(),
            h.nrows(),
            cfg.channel_uses()
        )));
    }
    Ok(())
}

pub(crate) fn require_ciod(cfg: &SchemeConfig) -> Result<()> {
    if cfg.scheme() == Scheme::Sm {
        return Err(Error::SchemeMismatch {
            expected: "low_dosm or high_dosm",
            got: cfg.scheme(),
        });
    }
    Ok(())
}
