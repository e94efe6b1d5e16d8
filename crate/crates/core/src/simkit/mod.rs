//! Monte Carlo SER harness.
//!
//! Every `(scheme, SNR)` point gets its own seed derived from the master
//! seed. Trials run in fixed-size batches, batch `b` drawing from ChaCha8
//! stream `b`, and batch counts are folded in index order with the stopping
//! rule checked at batch boundaries. The output therefore depends only on
//! the configuration and the master seed, never on the worker count.

mod config;
mod sweep;
mod verify;

pub use config::{normalize_key, parse_kv, parse_scheme, parse_snr_list, preset, Modulation, PhaseChoice, SchemeSpec};
pub use sweep::{
    draw_block, estimate_diversity_slope, fit_slope, point_seed, run_ser_sweep, run_trial, wilson_interval, write_bit_csv,
    write_csv, Block, SimConfig, SimEntry, SimPoint, SimResult, BATCH_TRIALS, CSV_HEADER, Z_95,
};
pub use verify::{verify_decoders, Disagreement, VerifyReport, TIE_TOL};
