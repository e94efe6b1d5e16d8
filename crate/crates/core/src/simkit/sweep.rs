use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{parse_snr_list, preset, PhaseChoice, SchemeSpec};
use crate::channel::{draw_channel, snr_to_sigma2, substream_rng, NoiseModel};
use crate::codebooks::{CodewordLabel, SchemeConfig};
use crate::decoders::{decode, DecodeResult, DecoderKind};
use crate::error::{Error, Result};

/// Trials per RNG substream.
pub const BATCH_TRIALS: u64 = 2000;
const MAX_BATCHES_PER_ROUND: u64 = 64;
const MAX_CHANNEL_REDRAWS: usize = 16;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959963984540054;

#[derive(Debug, Clone, PartialEq)]
pub struct SimEntry {
    pub spec: SchemeSpec,
    pub scheme: SchemeConfig,
    pub decoder: DecoderKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub entries: Vec<SimEntry>,
    pub n_r: usize,
    pub snr_db: Vec<f64>,
    pub min_errors: u64,
    pub max_trials: u64,
    pub master_seed: u64,
    /// 0 uses all available cores.
    pub workers: usize,
    pub target_ser: Option<f64>,
}

impl SimConfig {
    /// Builds a config from `key = value` pairs. Recognized keys: `preset`,
    /// `schemes`, `nt`, `nr`, `snr_db`, `min_errors`, `max_trials`, `seed`,
    /// `workers`, `target_ser`, `phases`.
    pub fn from_map(kv: &BTreeMap<String, String>) -> Result<Self> {
        const KEYS: [&str; 11] = [
            "preset",
            "schemes",
            "nt",
            "nr",
            "snr_db",
            "min_errors",
            "max_trials",
            "seed",
            "workers",
            "target_ser",
            "phases",
        ];
        if let Some(k) = kv.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(Error::Config(format!("unknown key '{k}'")));
        }
        fn num<T: std::str::FromStr>(kv: &BTreeMap<String, String>, key: &str, default: T) -> Result<T> {
            match kv.get(key) {
                Some(v) => v
                    .parse()
                    .map_err(|_| Error::Config(format!("bad value '{v}' for {key}"))),
                None => Ok(default),
            }
        }
        let schemes = match (kv.get("schemes"), kv.get("preset")) {
            (Some(s), _) => s.clone(),
            (None, Some(p)) => preset(p)
                .ok_or_else(|| Error::Config(format!("unknown preset '{p}'")))?
                .to_string(),
            (None, None) => return Err(Error::Config("one of 'schemes' or 'preset' is required".into())),
        };
        let n_t = num(kv, "nt", 4usize)?;
        let phases: PhaseChoice = kv.get("phases").map_or(Ok(PhaseChoice::default()), |p| p.parse())?;
        let mut entries = Vec::new();
        for s in schemes.split(',').filter(|s| !s.trim().is_empty()) {
            let spec: SchemeSpec = s.parse()?;
            entries.push(SimEntry {
                scheme: spec.build(n_t, phases)?,
                decoder: spec.decoder,
                spec,
            });
        }
        let target_ser = match kv.get("target_ser") {
            Some(v) => Some(
                v.parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad value '{v}' for target_ser")))?,
            ),
            None => None,
        };
        let cfg = SimConfig {
            entries,
            n_r: num(kv, "nr", 2usize)?,
            snr_db: parse_snr_list(kv.get("snr_db").map_or("0:2:20", String::as_str))?,
            min_errors: num(kv, "min_errors", 100u64)?,
            max_trials: num(kv, "max_trials", 10_000_000u64)?,
            master_seed: num(kv, "seed", 1u64)?,
            workers: num(kv, "workers", 0usize)?,
            target_ser,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::Config("no schemes to simulate".into()));
        }
        if self.snr_db.is_empty() {
            return Err(Error::Config("SNR list is empty".into()));
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("SNR values must be finite".into()));
        }
        if self.n_r == 0 {
            return Err(Error::Config("nr must be at least 1".into()));
        }
        if self.min_errors == 0 {
            return Err(Error::Config("min_errors must be at least 1".into()));
        }
        if self.max_trials == 0 {
            return Err(Error::Config("max_trials must be at least 1".into()));
        }
        if let Some(t) = self.target_ser {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::Config(format!("target_ser must lie in (0, 1), got {t}")));
            }
            // at SER 10^-t at least 10^(t+1) transmissions
            let floor = (10.0 / t).ceil() as u64;
            if self.max_trials < floor {
                return Err(Error::Config(format!(
                    "max_trials = {} is below the {floor} trials needed for target SER {t}",
                    self.max_trials
                )));
            }
        }
        for e in &self.entries {
            if !e.decoder.supports(e.scheme.scheme()) {
                return Err(Error::DecoderMismatch {
                    decoder: e.decoder.name(),
                    scheme: e.scheme.scheme(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimPoint {
    pub entry: usize,
    pub scheme: String,
    pub decoder: String,
    pub nt: usize,
    pub nr: usize,
    pub m: usize,
    pub bpcu: f64,
    pub snr_db: f64,
    pub trials: u64,
    /// Codeword (block) errors.
    pub errors: u64,
    pub bits: u64,
    pub bit_errors: u64,
    pub ser: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

impl SimPoint {
    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.bits as f64
        }
    }

    pub fn half_width(&self) -> f64 {
        (self.ci_high - self.ci_low) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub points: Vec<SimPoint>,
    pub master_seed: u64,
    /// Canonical text of the simulated configuration.
    pub config_summary: String,
}

impl SimResult {
    pub fn entry_points(&self, entry: usize) -> impl Iterator<Item = &SimPoint> {
        self.points.iter().filter(move |p| p.entry == entry)
    }
}

/// Wilson score interval for `errors` successes out of `trials`.
pub fn wilson_interval(errors: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if errors == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if errors == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Seed of one `(entry, snr)` point.
pub fn point_seed(master: u64, entry: usize, snr_index: usize) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    mix(mix(mix(master) ^ entry as u64) ^ (snr_index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Counts {
    trials: u64,
    errors: u64,
    bit_errors: u64,
}

/// One transmitted block with its channel and noisy observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub label: CodewordLabel,
    pub h: DMatrix<Complex64>,
    pub y: DMatrix<Complex64>,
}

/// Draws random bits, encodes them, draws `H` and adds noise.
pub fn draw_block(cfg: &SchemeConfig, n_r: usize, noise: &NoiseModel, rng: &mut ChaCha8Rng) -> Result<Block> {
    let bits: Vec<u8> = (0..cfg.bits_per_block()).map(|_| rng.random::<bool>() as u8).collect();
    let label = cfg.label_from_bits(&bits)?;
    let x = cfg.encode_label(&label);
    let h = draw_channel(n_r, cfg.n_antennas(), rng).into_matrix();
    let mut y = x.transmit(&h);
    noise.add_to(y.as_mut_slice(), rng);
    Ok(Block { label, h, y })
}

/// Draws and decodes one block. A rank-deficient equivalent channel
/// (probability zero) causes a fresh draw from the same generator.
pub fn run_trial(
    cfg: &SchemeConfig,
    decoder: DecoderKind,
    n_r: usize,
    noise: &NoiseModel,
    rng: &mut ChaCha8Rng,
) -> Result<(CodewordLabel, DecodeResult)> {
    for _ in 0..MAX_CHANNEL_REDRAWS {
        let b = draw_block(cfg, n_r, noise, rng)?;
        match decode(decoder, &b.y, &b.h, cfg) {
            Err(Error::RankDeficient) => continue,
            other => return Ok((b.label, other?)),
        }
    }
    Err(Error::RankDeficient)
}

fn run_batch(entry: &SimEntry, n_r: usize, noise: &NoiseModel, seed: u64, batch: u64, trials: u64) -> Result<Counts> {
    let mut rng = substream_rng(seed, batch);
    let cfg = &entry.scheme;
    let mut c = Counts::default();
    for _ in 0..trials {
        let (sent, got) = run_trial(cfg, entry.decoder, n_r, noise, &mut rng)?;
        c.trials += 1;
        if got.label != sent {
            c.errors += 1;
            let (a, b) = (cfg.label_bits(&sent), cfg.label_bits(&got.label));
            c.bit_errors += a.iter().zip(&b).filter(|(x, y)| x != y).count() as u64;
        }
    }
    Ok(c)
}

/// Runs one point in rounds of parallel batches. Batches are accumulated in
/// index order and the stopping rule is checked after every batch, so the
/// counts depend only on the seed.
fn run_point(cfg: &SimConfig, entry: &SimEntry, snr_db: f64, seed: u64) -> Result<Counts> {
    let noise = snr_to_sigma2(snr_db);
    let mut total = Counts::default();
    let mut next_batch = 0u64;
    let mut round_size = 1u64;
    loop {
        let remaining = cfg.max_trials - total.trials;
        let batches = round_size.min(remaining.div_ceil(BATCH_TRIALS));
        let results: Vec<Result<Counts>> = (next_batch..next_batch + batches)
            .into_par_iter()
            .map(|b| {
                let start = b * BATCH_TRIALS;
                let n = BATCH_TRIALS.min(cfg.max_trials - start);
                run_batch(entry, cfg.n_r, &noise, seed, b, n)
            })
            .collect();
        for r in results {
            let c = r?;
            total.trials += c.trials;
            total.errors += c.errors;
            total.bit_errors += c.bit_errors;
            if total.errors >= cfg.min_errors || total.trials >= cfg.max_trials {
                return Ok(total);
            }
        }
        next_batch += batches;
        round_size = (round_size * 2).min(MAX_BATCHES_PER_ROUND);
    }
}

/// Monte Carlo block-error-rate sweep over every scheme and SNR.
pub fn run_ser_sweep(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| {
        let mut points = Vec::new();
        for (ei, entry) in cfg.entries.iter().enumerate() {
            let s = &entry.scheme;
            for (si, &snr) in cfg.snr_db.iter().enumerate() {
                let seed = point_seed(cfg.master_seed, ei, si);
                let c = run_point(cfg, entry, snr, seed)?;
                let (lo, hi) = wilson_interval(c.errors, c.trials, Z_95);
                points.push(SimPoint {
                    entry: ei,
                    scheme: s.scheme().name().to_string(),
                    decoder: entry.decoder.name().to_string(),
                    nt: s.n_t(),
                    nr: cfg.n_r,
                    m: s.order(),
                    bpcu: s.rate_bpcu(),
                    snr_db: snr,
                    trials: c.trials,
                    errors: c.errors,
                    bits: c.trials * s.bits_per_block() as u64,
                    bit_errors: c.bit_errors,
                    ser: c.errors as f64 / c.trials as f64,
                    ci_low: lo,
                    ci_high: hi,
                    seed: cfg.master_seed,
                });
            }
        }
        Ok(SimResult {
            points,
            master_seed: cfg.master_seed,
            config_summary: summary(cfg),
        })
    })
}

fn summary(cfg: &SimConfig) -> String {
    let schemes: Vec<String> = cfg.entries.iter().map(|e| e.spec.to_string()).collect();
    let snr: Vec<String> = cfg.snr_db.iter().map(|s| s.to_string()).collect();
    format!(
        "schemes={} nr={} snr_db={} min_errors={} max_trials={} seed={}",
        schemes.join(","),
        cfg.n_r,
        snr.join(","),
        cfg.min_errors,
        cfg.max_trials,
        cfg.master_seed
    )
}

pub const CSV_HEADER: &str = "scheme,decoder,nt,nr,m,bpcu,snr_db,trials,errors,ser,ci_low,ci_high,seed";

pub fn write_csv<W: Write>(result: &SimResult, mut w: W) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for p in &result.points {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            p.scheme, p.decoder, p.nt, p.nr, p.m, p.bpcu, p.snr_db, p.trials, p.errors, p.ser, p.ci_low, p.ci_high, p.seed
        )?;
    }
    Ok(())
}

/// Per-bit diagnostics: `scheme,decoder,m,snr_db,bits,bit_errors,ber`.
pub fn write_bit_csv<W: Write>(result: &SimResult, mut w: W) -> Result<()> {
    writeln!(w, "scheme,decoder,m,snr_db,bits,bit_errors,ber")?;
    for p in &result.points {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            p.scheme,
            p.decoder,
            p.m,
            p.snr_db,
            p.bits,
            p.bit_errors,
            p.ber()
        )?;
    }
    Ok(())
}

/// Least-squares slope of `log10(ser)` against `snr_db / 10`. Points with
/// zero errors are skipped.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<f64> {
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, ser)| *ser > 0.0)
        .map(|&(snr, ser)| (snr / 10.0, ser.log10()))
        .collect();
    if xy.len() < 2 {
        return Err(Error::Config("slope fit needs at least two points with errors".into()));
    }
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Config("slope fit needs two distinct SNR values".into()));
    }
    Ok(sxy / sxx)
}

/// Diversity slope of one entry over `snr_window = (low, high)` dB.
pub fn estimate_diversity_slope(result: &SimResult, entry: usize, snr_window: (f64, f64)) -> Result<f64> {
    let pts: Vec<(f64, f64)> = result
        .entry_points(entry)
        .filter(|p| p.snr_db >= snr_window.0 && p.snr_db <= snr_window.1)
        .map(|p| (p.snr_db, p.ser))
        .collect();
    fit_slope(&pts)
}
