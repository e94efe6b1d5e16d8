use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{block_metric, check_dims, require_ciod, DecodeResult};
use crate::codebooks::{CodewordLabel, Scheme, SchemeConfig};
use crate::error::{Error, Result};

/// Exhaustive SM detection over all `(antenna, symbol)` pairs.
pub fn ml_sm_decode(y: &DVector<Complex64>, h: &DMatrix<Complex64>, cfg: &SchemeConfig) -> Result<DecodeResult> {
    if cfg.scheme() != Scheme::Sm {
        return Err(Error::SchemeMismatch {
            expected: "sm",
            got: cfg.scheme(),
        });
    }
    if h.ncols() != cfg.n_antennas() || y.len() != h.nrows() {
        return Err(Error::Dimension(format!(
            "y has {} entries, H is {}x{}, scheme uses {} antennas",
            y.len(),
            h.nrows(),
            h.ncols(),
            cfg.n_antennas()
        )));
    }
    let points = cfg.constellation().points();
    let mut best = (f64::INFINITY, CodewordLabel::new(0, 0, 0));
    let mut evals = 0;
    for l in 0..cfg.n_t() {
        let col = h.column(l);
        for (k, &s) in points.iter().enumerate() {
            let metric: f64 = y.iter().zip(col.iter()).map(|(yr, hr)| (yr - hr * s).norm_sqr()).sum();
            evals += 1;
            if metric < best.0 {
                best = (metric, CodewordLabel::new(l, k, 0));
            }
        }
    }
    Ok(DecodeResult {
        label: best.1,
        metric: best.0,
        evals,
    })
}

/// Exhaustive decision plus the runner-up metric, for tie screening.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedDecision {
    pub best: DecodeResult,
    pub runner_up_metric: f64,
}

impl RankedDecision {
    /// Gap between the two smallest metrics.
    pub fn margin(&self) -> f64 {
        self.runner_up_metric - self.best.metric
    }
}

/// Brute force over every codeword of the scheme.
pub fn ml_exhaustive_ranked(y: &DMatrix<Complex64>, h: &DMatrix<Complex64>, cfg: &SchemeConfig) -> Result<RankedDecision> {
    check_dims(y, h, cfg)?;
    let mut best = (f64::INFINITY, CodewordLabel::new(0, 0, 0));
    let mut second = f64::INFINITY;
    let mut evals = 0;
    for label in cfg.labels() {
        let metric = block_metric(y, h, cfg, &label);
        evals += 1;
        if metric < best.0 {
            second = best.0;
            best = (metric, label);
        } else if metric < second {
            second = metric;
        }
    }
    Ok(RankedDecision {
        best: DecodeResult {
            label: best.1,
            metric: best.0,
            evals,
        },
        runner_up_metric: second,
    })
}

/// Ground-truth ML detector for the CIOD schemes.
pub fn ml_exhaustive_decode(y: &DMatrix<Complex64>, h: &DMatrix<Complex64>, cfg: &SchemeConfig) -> Result<DecodeResult> {
    require_ciod(cfg)?;
    Ok(ml_exhaustive_ranked(y, h, cfg)?.best)
}
