use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{block_metric, check_dims, require_ciod, DecodeResult};
use crate::codebooks::{deinterleave, CodewordLabel, SchemeConfig};
use crate::error::{Error, Result};

/// Symbol decisions for one fixed antenna pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairDecision {
    pub codebook: usize,
    pub symbols: [usize; 2],
    /// Block metric at the chosen symbols.
    pub metric: f64,
    pub evals: usize,
}

/// Conditional ML detection of `(s1, s2)` given the active antennas.
///
/// After matched filtering with the (phase-absorbed) columns `h_l1`, `h_l2`
/// and de-interleaving, `s1` sees gain `a = ||h_l1||²` on its real part and
/// `b = ||h_l2||²` on its imaginary part (the roles swap for `s2`), so each
/// symbol is picked on its own with a variance-weighted metric.
pub fn mrc_ciod_decode(
    y: &DMatrix<Complex64>,
    h: &DMatrix<Complex64>,
    l1: usize,
    l2: usize,
    cfg: &SchemeConfig,
) -> Result<PairDecision> {
    require_ciod(cfg)?;
    check_dims(y, h, cfg)?;
    if l1 == l2 {
        return Err(Error::IllegalAntennaPair { l1, l2 });
    }
    let codebook = cfg
        .codebook_for_pair(l1, l2)
        .ok_or(Error::IllegalAntennaPair { l1, l2 })?;
    Ok(decode_pair(y, h, codebook, cfg))
}

fn decode_pair(y: &DMatrix<Complex64>, h: &DMatrix<Complex64>, codebook: usize, cfg: &SchemeConfig) -> PairDecision {
    let (l1, l2) = cfg.antenna_pair(codebook);
    let phase = cfg.codebook_phase(codebook);
    let (g1, g2) = (h.column(l1 - 1), h.column(l2 - 1));

    let mut y1_hat = Complex64::new(0.0, 0.0);
    let mut y2_hat = Complex64::new(0.0, 0.0);
    let (mut a, mut b) = (0.0, 0.0);
    for r in 0..h.nrows() {
        let (h1, h2) = (g1[r] * phase, g2[r] * phase);
        y1_hat += h1.conj() * y[(r, 0)];
        y2_hat += h2.conj() * y[(r, 1)];
        a += h1.norm_sqr();
        b += h2.norm_sqr();
    }
    let (y1, y2) = deinterleave(y1_hat, y2_hat);

    let points = cfg.constellation().points();
    let (mut best1, mut best2) = ((f64::INFINITY, 0), (f64::INFINITY, 0));
    for (k, s) in points.iter().enumerate() {
        let m1 = b * (y1.re - a * s.re).powi(2) + a * (y1.im - b * s.im).powi(2);
        if m1 < best1.0 {
            best1 = (m1, k);
        }
    }
    for (k, s) in points.iter().enumerate() {
        let m2 = a * (y2.re - b * s.re).powi(2) + b * (y2.im - a * s.im).powi(2);
        if m2 < best2.0 {
            best2 = (m2, k);
        }
    }
    let label = CodewordLabel::new(codebook, best1.1, best2.1);
    PairDecision {
        codebook,
        symbols: label.symbols,
        metric: block_metric(y, h, cfg, &label),
        evals: 2 * points.len(),
    }
}

/// ML detection by running [`mrc_ciod_decode`] for every legitimate pair.
pub fn ml_mrc_decode(y: &DMatrix<Complex64>, h: &DMatrix<Complex64>, cfg: &SchemeConfig) -> Result<DecodeResult> {
    require_ciod(cfg)?;
    check_dims(y, h, cfg)?;
    let mut best: Option<PairDecision> = None;
    let mut evals = 0;
    for codebook in 0..cfg.num_codebooks() {
        let d = decode_pair(y, h, codebook, cfg);
        evals += d.evals;
        if best.is_none_or(|b| d.metric < b.metric) {
            best = Some(d);
        }
    }
    let best = best.expect("at least one codebook");
    Ok(DecodeResult {
        label: CodewordLabel {
            codebook: best.codebook,
            symbols: best.symbols,
        },
        metric: best.metric,
        evals,
    })
}
