use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::analysis::{optimize_phases, table_phases};
use crate::codebooks::{Scheme, SchemeConfig};
use crate::constellation::{Constellation, Normalization};
use crate::decoders::DecoderKind;
use crate::error::{Error, Result};

/// Modulation token of a scheme spec.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modulation {
    Bpsk,
    /// Square QAM of the given order.
    Qam(usize),
    /// Rectangular 8-QAM on a 4x2 PAM grid (experimental for Low DoSM).
    Qam8Rect,
}

impl Modulation {
    pub fn constellation(&self, n: Normalization) -> Result<Constellation> {
        match *self {
            Modulation::Bpsk => Ok(Constellation::bpsk(n)),
            Modulation::Qam(m) => Constellation::square_qam(m, n),
            Modulation::Qam8Rect => Constellation::rectangular(4, 2, n),
        }
    }
}

impl FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bpsk" => Ok(Modulation::Bpsk),
            "qam8" | "qam8rect" | "8qam" => Ok(Modulation::Qam8Rect),
            other => {
                let m = other
                    .strip_prefix("qam")
                    .and_then(|m| m.parse::<usize>().ok())
                    .ok_or_else(|| Error::Config(format!("unknown modulation '{other}'")))?;
                Ok(Modulation::Qam(m))
            }
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modulation::Bpsk => f.write_str("bpsk"),
            Modulation::Qam(m) => write!(f, "qam{m}"),
            Modulation::Qam8Rect => f.write_str("qam8"),
        }
    }
}

/// Source of the High DoSM codebook-set phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseChoice {
    /// Published reference phases (N_t = 4, BPSK or 4-QAM only).
    Table,
    /// 16-point grid search.
    #[default]
    Optimized,
    /// All ones.
    Unit,
}

impl FromStr for PhaseChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "table" => Ok(PhaseChoice::Table),
            "optimized" | "optimised" => Ok(PhaseChoice::Optimized),
            "unit" | "none" => Ok(PhaseChoice::Unit),
            other => Err(Error::Config(format!("unknown phase choice '{other}'"))),
        }
    }
}

/// `scheme:modulation:decoder`, e.g. `low:qam4:qr` or `sm:bpsk:ml`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemeSpec {
    pub scheme: Scheme,
    pub modulation: Modulation,
    pub decoder: DecoderKind,
}

impl FromStr for SchemeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        if parts.len() < 2 || parts.len() > 3 {
            return Err(Error::Config(format!("scheme spec '{s}' is not scheme:modulation[:decoder]")));
        }
        let scheme = parse_scheme(parts[0])?;
        let modulation = parts[1].parse()?;
        let decoder = match parts.get(2) {
            Some(d) => d.parse()?,
            None if scheme == Scheme::Sm => DecoderKind::Exhaustive,
            None => DecoderKind::QrHardLimit,
        };
        if !decoder.supports(scheme) {
            return Err(Error::DecoderMismatch {
                decoder: decoder.name(),
                scheme,
            });
        }
        Ok(SchemeSpec {
            scheme,
            modulation,
            decoder,
        })
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.scheme {
            Scheme::Sm => "sm",
            Scheme::LowDosm => "low",
            Scheme::HighDosm => "high",
        };
        write!(f, "{s}:{}:{}", self.modulation, self.decoder)
    }
}

pub fn parse_scheme(s: &str) -> Result<Scheme> {
    match s.trim().to_ascii_lowercase().as_str() {
        "sm" => Ok(Scheme::Sm),
        "low" | "low_dosm" | "lowdosm" => Ok(Scheme::LowDosm),
        "high" | "high_dosm" | "highdosm" => Ok(Scheme::HighDosm),
        other => Err(Error::Config(format!("unknown scheme '{other}'"))),
    }
}

impl SchemeSpec {
    /// Builds the scheme for `n_t` transmit antennas (`n_t + 1` for High
    /// DoSM) on the unit-energy constellation. CIOD schemes use the rotated
    /// constellation.
    pub fn build(&self, n_t: usize, phases: PhaseChoice) -> Result<SchemeConfig> {
        self.build_with(n_t, phases, Normalization::UnitAverageEnergy)
    }

    pub fn build_with(&self, n_t: usize, phases: PhaseChoice, normalization: Normalization) -> Result<SchemeConfig> {
        let base = self.modulation.constellation(normalization)?;
        match self.scheme {
            Scheme::Sm => SchemeConfig::sm(n_t, base),
            Scheme::LowDosm => SchemeConfig::low_dosm(n_t, &base),
            Scheme::HighDosm => {
                let unit = SchemeConfig::high_dosm(n_t, &base, Vec::new())?;
                match phases {
                    PhaseChoice::Unit => Ok(unit),
                    PhaseChoice::Table => {
                        let p = table_phases(&unit).ok_or_else(|| {
                            Error::Config(format!("no reference phases for N_t = {n_t} with {}", self.modulation))
                        })?;
                        unit.with_phases(p)
                    }
                    PhaseChoice::Optimized => unit.with_phases(optimize_phases(&unit, 16)?.best.phases),
                }
            }
        }
    }
}

/// Scheme lists of the two reference experiments (`N_t = 4`).
pub fn preset(name: &str) -> Option<&'static str> {
    match name {
        "3bpcu" => Some("sm:bpsk:ml,low:qam4:qr,high:bpsk:qr"),
        "4bpcu" => Some("sm:qam4:ml,low:qam8:qr,high:qam4:qr"),
        _ => None,
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
        out.insert(normalize_key(k), v.trim().to_string());
    }
    Ok(out)
}

/// Keys compare with `-` and `_` treated alike.
pub fn normalize_key(k: &str) -> String {
    k.trim().to_ascii_lowercase().replace('-', "_")
}

/// Comma-separated values or `start:step:stop` ranges (inclusive).
pub fn parse_snr_list(s: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        let num = |p: &str| -> Result<f64> {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad SNR value '{p}'")))
        };
        match parts.len() {
            1 => out.push(num(parts[0])?),
            3 => {
                let (start, step, stop) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
                if step.is_nan() || step <= 0.0 || stop < start {
                    return Err(Error::Config(format!("bad SNR range '{item}'")));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                out.extend((0..=n).map(|i| start + i as f64 * step));
            }
            _ => return Err(Error::Config(format!("bad SNR item '{item}'"))),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_specs() {
        let s: SchemeSpec = "low:qam16:mrc".parse().unwrap();
        assert_eq!(s.scheme, Scheme::LowDosm);
        assert_eq!(s.modulation, Modulation::Qam(16));
        assert_eq!(s.decoder, DecoderKind::Mrc);
        assert_eq!(s.to_string(), "low:qam16:mrc");

        let s: SchemeSpec = "sm:bpsk".parse().unwrap();
        assert_eq!(s.decoder, DecoderKind::Exhaustive);
        assert!("sm:bpsk:qr".parse::<SchemeSpec>().is_err());
        assert!("mid:bpsk:ml".parse::<SchemeSpec>().is_err());
        assert!("low:psk8:ml".parse::<SchemeSpec>().is_err());
    }

    #[test]
    fn presets_hit_their_rates() {
        for (name, rate) in [("3bpcu", 3.0), ("4bpcu", 4.0)] {
            for spec in preset(name).unwrap().split(',') {
                let spec: SchemeSpec = spec.parse().unwrap();
                let cfg = spec.build(4, PhaseChoice::Table).unwrap();
                assert_eq!(cfg.rate_bpcu(), rate, "{spec}");
            }
        }
    }

    #[test]
    fn table_phases_only_where_published() {
        let spec: SchemeSpec = "high:qam16:qr".parse().unwrap();
        assert!(spec.build(4, PhaseChoice::Table).is_err());
        assert!(spec.build(4, PhaseChoice::Unit).is_ok());
    }

    #[test]
    fn kv_parsing() {
        let text = "# sweep\nnt = 4\n snr-db = 0:5:10 # dB\n\nseed=7\n";
        let kv = parse_kv(text).unwrap();
        assert_eq!(kv["nt"], "4");
        assert_eq!(kv["snr_db"], "0:5:10");
        assert_eq!(kv["seed"], "7");
        assert!(parse_kv("no equals sign").is_err());
    }

    #[test]
    fn snr_lists() {
        assert_eq!(parse_snr_list("0:5:10").unwrap(), vec![0.0, 5.0, 10.0]);
        assert_eq!(parse_snr_list("3, 7.5").unwrap(), vec![3.0, 7.5]);
        assert_eq!(parse_snr_list("0:2:5, 9").unwrap(), vec![0.0, 2.0, 4.0, 9.0]);
        assert!(parse_snr_list("5:1:0").is_err());
        assert!(parse_snr_list("x").is_err());
    }
}
