//! Spatial modulation (SM) with single-RF-chain transmit diversity.
//!
//! Two space-time codes built from the two-antenna complex interleaved
//! orthogonal design (CIOD) are provided alongside the plain SM baseline:
//!
//! * **Low DoSM** – `N_t` codebooks, the second symbol always goes out on
//!   the cyclic successor of the first symbol's antenna.
//! * **High DoSM** – `N_t + 1` antennas, `N_t²` codebooks grouped into `N_t`
//!   phase-rotated codebook sets.
//!
//! The crate is split into:
//!
//! * [`constellation`] – square QAM / BPSK sets, rotation, CPD, PAM grids.
//! * [`channel`] – Rayleigh block fading, AWGN, complex → real expansion.
//! * [`codebooks`] – bit-to-codeword mapping and rate calculators.
//! * [`decoders`] – exhaustive ML, MRC symbol-by-symbol and QR/hard-limiting
//!   detectors with metric-evaluation counters.
//! * [`analysis`] – determinant spectra, coding gain, phase optimization.
//! * [`simkit`] – deterministic parallel Monte Carlo SER sweeps and CSV output.

pub mod analysis;
pub mod channel;
pub mod codebooks;
pub mod constellation;
pub mod decoders;
pub mod error;
pub mod simkit;

pub use error::{Error, Result};
pub use num_complex::Complex64;
