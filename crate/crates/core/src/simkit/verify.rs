use rayon::prelude::*;

use crate::channel::{snr_to_sigma2, substream_rng};
use crate::codebooks::{CodewordLabel, SchemeConfig};
use crate::decoders::{block_metric, decode, expected_evals, ml_exhaustive_ranked, DecoderKind};
use crate::error::Result;

use super::sweep::{draw_block, Block};

/// Metric margin below which the exhaustive decision counts as a tie.
pub const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disagreement {
    pub trial: u64,
    pub decoder: DecoderKind,
    pub oracle: CodewordLabel,
    pub got: CodewordLabel,
}

/// Outcome of the three-decoder agreement check.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub trials: u64,
    /// Trials whose two best exhaustive metrics are within [`TIE_TOL`].
    pub ties_excluded: u64,
    pub mrc_disagreements: u64,
    pub qr_disagreements: u64,
    /// Trials on which a decoder's evaluation count differs from the closed
    /// form.
    pub eval_mismatches: u64,
    /// Largest `|J(label) - metric|` relative to `max(1, J)` over all
    /// decoders and trials.
    pub max_metric_error: f64,
    pub first_disagreements: Vec<Disagreement>,
}

impl VerifyReport {
    pub fn disagreements(&self) -> u64 {
        self.mrc_disagreements + self.qr_disagreements
    }

    pub fn passed(&self) -> bool {
        self.disagreements() == 0 && self.eval_mismatches == 0
    }
}

#[derive(Default)]
struct TrialOutcome {
    tie: bool,
    mrc_wrong: Option<Disagreement>,
    qr_wrong: Option<Disagreement>,
    eval_mismatch: bool,
    metric_error: f64,
}

/// Runs `trials` noisy blocks at `snr_db` and checks that the MRC and the
/// QR/hard-limiting decoders return the exhaustive ML decision.
pub fn verify_decoders(cfg: &SchemeConfig, n_r: usize, snr_db: f64, trials: u64, seed: u64) -> Result<VerifyReport> {
    let noise = snr_to_sigma2(snr_db);
    let outcomes: Vec<Result<TrialOutcome>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream_rng(seed, t);
            let Block { h, y, .. } = draw_block(cfg, n_r, &noise, &mut rng)?;
            let mut out = TrialOutcome::default();
            let ranked = ml_exhaustive_ranked(&y, &h, cfg)?;
            out.tie = ranked.margin() < TIE_TOL;
            for kind in [DecoderKind::Exhaustive, DecoderKind::Mrc, DecoderKind::QrHardLimit] {
                let r = decode(kind, &y, &h, cfg)?;
                if r.evals != expected_evals(kind, cfg) {
                    out.eval_mismatch = true;
                }
                let j = block_metric(&y, &h, cfg, &r.label);
                out.metric_error = out.metric_error.max((j - r.metric).abs() / j.max(1.0));
                if out.tie || kind == DecoderKind::Exhaustive || r.label == ranked.best.label {
                    continue;
                }
                let d = Some(Disagreement {
                    trial: t,
                    decoder: kind,
                    oracle: ranked.best.label,
                    got: r.label,
                });
                match kind {
                    DecoderKind::Mrc => out.mrc_wrong = d,
                    _ => out.qr_wrong = d,
                }
            }
            Ok(out)
        })
        .collect();

    let mut report = VerifyReport {
        trials,
        ties_excluded: 0,
        mrc_disagreements: 0,
        qr_disagreements: 0,
        eval_mismatches: 0,
        max_metric_error: 0.0,
        first_disagreements: Vec::new(),
    };
    for o in outcomes {
        let o = o?;
        report.ties_excluded += o.tie as u64;
        report.eval_mismatches += o.eval_mismatch as u64;
        report.max_metric_error = report.max_metric_error.max(o.metric_error);
        for (wrong, counter) in [(o.mrc_wrong, &mut report.mrc_disagreements), (o.qr_wrong, &mut report.qr_disagreements)] {
            if let Some(d) = wrong {
                *counter += 1;
                if report.first_disagreements.len() < 10 {
                    report.first_disagreements.push(d);
                }
            }
        }
    }
    Ok(report)
}
