//! Bit-to-codeword mapping for plain SM and the two CIOD-based schemes.
//!
//! A block of bits is split, most significant first, into a codebook index
//! followed by one (SM) or two symbol indices. With `M` points per symbol the
//! label index is `codebook * M^k + s1 * M + s2` (`k` symbols per block), and
//! the bit block is that index in natural binary.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::constellation::{ciod_rotation, Constellation};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Sm,
    LowDosm,
    HighDosm,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Sm => "sm",
            Scheme::LowDosm => "low_dosm",
            Scheme::HighDosm => "high_dosm",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A symbol placed on one antenna (1-based) for one channel use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slot {
    pub antenna: usize,
    pub symbol: Complex64,
}

/// Sparse space-time codeword: one active antenna per channel use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceTimeCodeword {
    slots: [Slot; 2],
    n_slots: usize,
    n_antennas: usize,
}

impl SpaceTimeCodeword {
    pub fn single(slot: Slot, n_antennas: usize) -> Self {
        SpaceTimeCodeword {
            slots: [slot, slot],
            n_slots: 1,
            n_antennas,
        }
    }

    pub fn pair(first: Slot, second: Slot, n_antennas: usize) -> Self {
        SpaceTimeCodeword {
            slots: [first, second],
            n_slots: 2,
            n_antennas,
        }
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots[..self.n_slots]
    }

    pub fn n_antennas(&self) -> usize {
        self.n_antennas
    }

    pub fn channel_uses(&self) -> usize {
        self.n_slots
    }

    /// Dense `n_antennas x channel_uses` matrix.
    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        let mut x = DMatrix::zeros(self.n_antennas, self.n_slots);
        for (t, s) in self.slots().iter().enumerate() {
            x[(s.antenna - 1, t)] = s.symbol;
        }
        x
    }

    /// Every symbol multiplied by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = *self;
        for s in out.slots.iter_mut() {
            s.symbol *= factor;
        }
        out
    }

    /// Noiseless received block `H X`, `N_r x channel_uses`.
    pub fn transmit(&self, h: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        assert_eq!(h.ncols(), self.n_antennas, "channel has wrong number of columns");
        let mut y = DMatrix::zeros(h.nrows(), self.n_slots);
        for (t, s) in self.slots().iter().enumerate() {
            let col = h.column(s.antenna - 1) * s.symbol;
            y.set_column(t, &col);
        }
        y
    }
}

/// Codebook index plus symbol indices into the constellation. For SM only
/// `symbols[0]` is meaningful and `symbols[1]` is always zero. For High
/// DoSM, `codebook = (i - 1) * N_t + (j - 1)` for CBS `i` and CB `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CodewordLabel {
    pub codebook: usize,
    pub symbols: [usize; 2],
}

impl CodewordLabel {
    pub fn new(codebook: usize, s1: usize, s2: usize) -> Self {
        CodewordLabel {
            codebook,
            symbols: [s1, s2],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    scheme: Scheme,
    n_t: usize,
    n_antennas: usize,
    constellation: Constellation,
    cbs_phases: Vec<Complex64>,
}

impl SchemeConfig {
    /// Validating constructor. `constellation` is used as given (no implicit
    /// rotation); an empty `cbs_phases` means all-ones for High DoSM.
    pub fn new(
        scheme: Scheme,
        n_t: usize,
        constellation: Constellation,
        cbs_phases: Vec<Complex64>,
    ) -> Result<Self> {
        if n_t < 2 || !n_t.is_power_of_two() {
            return Err(Error::InvalidAntennaCount(n_t));
        }
        if !constellation.order().is_power_of_two() {
            return Err(Error::InvalidOrder {
                kind: "bit-mapped constellation",
                m: constellation.order(),
            });
        }
        let cbs_phases = match scheme {
            Scheme::Sm | Scheme::LowDosm => {
                if !cbs_phases.is_empty() {
                    return Err(Error::Config("codebook-set phases only apply to High DoSM".into()));
                }
                if scheme == Scheme::Sm && constellation.theta() != 0.0 {
                    return Err(Error::Config("SM uses the unrotated constellation".into()));
                }
                cbs_phases
            }
            Scheme::HighDosm => {
                if cbs_phases.is_empty() {
                    vec![Complex64::new(1.0, 0.0); n_t]
                } else {
                    check_phases(&cbs_phases, n_t)?;
                    cbs_phases
                }
            }
        };
        let n_antennas = if scheme == Scheme::HighDosm { n_t + 1 } else { n_t };
        Ok(SchemeConfig {
            scheme,
            n_t,
            n_antennas,
            constellation,
            cbs_phases,
        })
    }

    pub fn sm(n_t: usize, constellation: Constellation) -> Result<Self> {
        Self::new(Scheme::Sm, n_t, constellation, Vec::new())
    }

    /// Low DoSM over `base` rotated by `arctan(2)/2`.
    pub fn low_dosm(n_t: usize, base: &Constellation) -> Result<Self> {
        Self::new(Scheme::LowDosm, n_t, base.rotate(ciod_rotation()), Vec::new())
    }

    /// High DoSM over `base` rotated by `arctan(2)/2`, with per-CBS phases.
    pub fn high_dosm(n_t: usize, base: &Constellation, cbs_phases: Vec<Complex64>) -> Result<Self> {
        Self::new(Scheme::HighDosm, n_t, base.rotate(ciod_rotation()), cbs_phases)
    }

    pub fn with_phases(&self, cbs_phases: Vec<Complex64>) -> Result<Self> {
        Self::new(self.scheme, self.n_t, self.constellation.clone(), cbs_phases)
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn n_antennas(&self) -> usize {
        self.n_antennas
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn cbs_phases(&self) -> &[Complex64] {
        &self.cbs_phases
    }

    pub fn order(&self) -> usize {
        self.constellation.order()
    }

    pub fn channel_uses(&self) -> usize {
        match self.scheme {
            Scheme::Sm => 1,
            _ => 2,
        }
    }

    pub fn num_codebooks(&self) -> usize {
        match self.scheme {
            Scheme::Sm | Scheme::LowDosm => self.n_t,
            Scheme::HighDosm => self.n_t * self.n_t,
        }
    }

    fn symbol_combinations(&self) -> usize {
        self.order().pow(self.channel_uses() as u32)
    }

    pub fn num_codewords(&self) -> usize {
        self.num_codebooks() * self.symbol_combinations()
    }

    pub fn bits_per_block(&self) -> usize {
        self.num_codewords().trailing_zeros() as usize
    }

    pub fn rate_bpcu(&self) -> f64 {
        rate_bpcu(self)
    }

    /// `(i, j)` of a High DoSM codebook, both 1-based.
    pub fn cbs_indices(&self, codebook: usize) -> (usize, usize) {
        (codebook / self.n_t + 1, codebook % self.n_t + 1)
    }

    /// Active antennas (1-based) for the first and second channel use.
    /// For SM both entries are the single active antenna.
    pub fn antenna_pair(&self, codebook: usize) -> (usize, usize) {
        match self.scheme {
            Scheme::Sm => (codebook + 1, codebook + 1),
            Scheme::LowDosm => (codebook + 1, (codebook + 1) % self.n_t + 1),
            Scheme::HighDosm => {
                let (i, j) = self.cbs_indices(codebook);
                template_rows(i, j, self.n_t)
            }
        }
    }

    /// Common phase applied to every codeword of the codebook.
    pub fn codebook_phase(&self, codebook: usize) -> Complex64 {
        match self.scheme {
            Scheme::HighDosm => self.cbs_phases[codebook / self.n_t],
            _ => Complex64::new(1.0, 0.0),
        }
    }

    pub fn codebook_for_pair(&self, l1: usize, l2: usize) -> Option<usize> {
        match self.scheme {
            Scheme::Sm => None,
            Scheme::LowDosm => {
                (1..=self.n_t).contains(&l1).then_some(l1 - 1).filter(|&c| self.antenna_pair(c).1 == l2)
            }
            Scheme::HighDosm => {
                let m = self.n_t + 1;
                if !(1..=self.n_t).contains(&l1) || !(1..=m).contains(&l2) || l1 == l2 {
                    return None;
                }
                let i = (l2 + m - l1) % m;
                Some((i - 1) * self.n_t + (l1 - 1))
            }
        }
    }

    pub fn label_index(&self, label: &CodewordLabel) -> usize {
        let m = self.order();
        match self.scheme {
            Scheme::Sm => label.codebook * m + label.symbols[0],
            _ => (label.codebook * m + label.symbols[0]) * m + label.symbols[1],
        }
    }

    pub fn label_from_index(&self, index: usize) -> CodewordLabel {
        let m = self.order();
        match self.scheme {
            Scheme::Sm => CodewordLabel::new(index / m, index % m, 0),
            _ => CodewordLabel::new(index / (m * m), (index / m) % m, index % m),
        }
    }

    pub fn label_bits(&self, label: &CodewordLabel) -> Vec<u8> {
        let n = self.bits_per_block();
        let idx = self.label_index(label);
        (0..n).rev().map(|b| ((idx >> b) & 1) as u8).collect()
    }

    pub fn label_from_bits(&self, bits: &[u8]) -> Result<CodewordLabel> {
        let expected = self.bits_per_block();
        if bits.len() != expected {
            return Err(Error::BitLength {
                expected,
                got: bits.len(),
            });
        }
        let mut idx = 0usize;
        for &b in bits {
            if b > 1 {
                return Err(Error::InvalidBit(b));
            }
            idx = (idx << 1) | b as usize;
        }
        Ok(self.label_from_index(idx))
    }

    pub fn encode_label(&self, label: &CodewordLabel) -> SpaceTimeCodeword {
        let c = &self.constellation;
        match self.scheme {
            Scheme::Sm => SpaceTimeCodeword::single(
                Slot {
                    antenna: label.codebook + 1,
                    symbol: c.point(label.symbols[0]),
                },
                self.n_antennas,
            ),
            Scheme::LowDosm | Scheme::HighDosm => {
                let (t1, t2) = interleave(c.point(label.symbols[0]), c.point(label.symbols[1]));
                let phase = self.codebook_phase(label.codebook);
                let (l1, l2) = self.antenna_pair(label.codebook);
                SpaceTimeCodeword::pair(
                    Slot {
                        antenna: l1,
                        symbol: t1 * phase,
                    },
                    Slot {
                        antenna: l2,
                        symbol: t2 * phase,
                    },
                    self.n_antennas,
                )
            }
        }
    }

    pub fn encode(&self, bits: &[u8]) -> Result<SpaceTimeCodeword> {
        Ok(self.encode_label(&self.label_from_bits(bits)?))
    }

    /// Inverse of [`encode_label`](Self::encode_label); `None` when the
    /// codeword is not in the codebook.
    pub fn label_of(&self, x: &SpaceTimeCodeword) -> Option<CodewordLabel> {
        const TOL: f64 = 1e-9;
        if x.n_antennas() != self.n_antennas || x.channel_uses() != self.channel_uses() {
            return None;
        }
        let find = |s: Complex64| self.constellation.points().iter().position(|p| (p - s).norm() < TOL);
        let slots = x.slots();
        match self.scheme {
            Scheme::Sm => {
                let a = slots[0].antenna;
                (1..=self.n_t).contains(&a).then_some(())?;
                Some(CodewordLabel::new(a - 1, find(slots[0].symbol)?, 0))
            }
            _ => {
                let codebook = self.codebook_for_pair(slots[0].antenna, slots[1].antenna)?;
                let phase = self.codebook_phase(codebook);
                let (s1, s2) = deinterleave(slots[0].symbol / phase, slots[1].symbol / phase);
                Some(CodewordLabel::new(codebook, find(s1)?, find(s2)?))
            }
        }
    }

    pub fn labels(&self) -> impl Iterator<Item = CodewordLabel> + '_ {
        (0..self.num_codewords()).map(|i| self.label_from_index(i))
    }
}

fn check_phases(phases: &[Complex64], n_t: usize) -> Result<()> {
    if phases.len() != n_t {
        return Err(Error::Config(format!(
            "expected {n_t} codebook-set phases, got {}",
            phases.len()
        )));
    }
    for (index, p) in phases.iter().enumerate() {
        if (p.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::PhaseMagnitude {
                index,
                magnitude: p.norm(),
            });
        }
    }
    Ok(())
}

/// Swaps the imaginary parts of two symbols.
pub fn interleave(s1: Complex64, s2: Complex64) -> (Complex64, Complex64) {
    (Complex64::new(s1.re, s2.im), Complex64::new(s2.re, s1.im))
}

/// Undoes [`interleave`] (the swap is an involution).
pub fn deinterleave(y1: Complex64, y2: Complex64) -> (Complex64, Complex64) {
    (Complex64::new(y1.re, y2.im), Complex64::new(y2.re, y1.im))
}

fn require(cfg: &SchemeConfig, expected: Scheme, name: &'static str) -> Result<()> {
    if cfg.scheme != expected {
        return Err(Error::SchemeMismatch {
            expected: name,
            got: cfg.scheme,
        });
    }
    Ok(())
}

pub fn sm_encode(bits: &[u8], cfg: &SchemeConfig) -> Result<SpaceTimeCodeword> {
    require(cfg, Scheme::Sm, "sm")?;
    cfg.encode(bits)
}

pub fn low_dosm_encode(bits: &[u8], cfg: &SchemeConfig) -> Result<SpaceTimeCodeword> {
    require(cfg, Scheme::LowDosm, "low_dosm")?;
    cfg.encode(bits)
}

pub fn high_dosm_encode(bits: &[u8], cfg: &SchemeConfig) -> Result<SpaceTimeCodeword> {
    require(cfg, Scheme::HighDosm, "high_dosm")?;
    cfg.encode(bits)
}

fn template_rows(i: usize, j: usize, n_t: usize) -> (usize, usize) {
    (j, (j + i - 1) % (n_t + 1) + 1)
}

/// Rows of `s̃1` and `s̃2` in `CB_{i,j}`, with the modulo-`(N_t+1)` index
/// taken 1-based (a zero result maps to `N_t + 1`).
pub fn high_dosm_template(i: usize, j: usize, cfg: &SchemeConfig) -> Result<(usize, usize)> {
    require(cfg, Scheme::HighDosm, "high_dosm")?;
    for (what, value) in [("i", i), ("j", j)] {
        if !(1..=cfg.n_t).contains(&value) {
            return Err(Error::IndexOutOfRange {
                what,
                value,
                max: cfg.n_t,
            });
        }
    }
    Ok(template_rows(i, j, cfg.n_t))
}

/// Every codeword in label-index order.
pub fn enumerate_codewords(cfg: &SchemeConfig) -> Vec<(CodewordLabel, SpaceTimeCodeword)> {
    cfg.labels().map(|l| (l, cfg.encode_label(&l))).collect()
}

pub fn rate_bpcu(cfg: &SchemeConfig) -> f64 {
    let nt = (cfg.n_t as f64).log2();
    let m = (cfg.order() as f64).log2();
    match cfg.scheme {
        Scheme::Sm | Scheme::HighDosm => nt + m,
        Scheme::LowDosm => (nt + 2.0 * m) / 2.0,
    }
}

/// Antenna-pair count `c` of STBC-SM: `C(N_t, 2)` floored to a power of two.
pub fn stbc_sm_combinations(n_t: usize) -> usize {
    let pairs = n_t * n_t.saturating_sub(1) / 2;
    if pairs == 0 {
        return 0;
    }
    1 << (usize::BITS - 1 - pairs.leading_zeros())
}

/// Rate of STBC-SM, `(log2 c + 2 log2 M) / 2`.
pub fn stbc_sm_rate(n_t: usize, m: usize) -> f64 {
    let c = stbc_sm_combinations(n_t);
    ((c as f64).log2() + 2.0 * (m as f64).log2()) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::Normalization;

    fn qam(m: usize) -> Constellation {
        Constellation::square_qam(m, Normalization::UnitAverageEnergy).unwrap()
    }

    fn bpsk() -> Constellation {
        Constellation::bpsk(Normalization::UnitAverageEnergy)
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn interleave_examples() {
        assert_eq!(interleave(c(1.0, 2.0), c(3.0, 4.0)), (c(1.0, 4.0), c(3.0, 2.0)));
        let s = c(-0.3, 0.7);
        assert_eq!(interleave(s, s), (s, s));
        let (a, b) = interleave(c(1.0, 2.0), c(3.0, 4.0));
        assert_eq!(interleave(a, b), (c(1.0, 2.0), c(3.0, 4.0)));
    }

    #[test]
    fn deinterleave_examples() {
        assert_eq!(deinterleave(c(1.0, 4.0), c(3.0, 2.0)), (c(1.0, 2.0), c(3.0, 4.0)));
        let s = c(2.0, -1.0);
        assert_eq!(deinterleave(s, s), (s, s));
        let (a, b) = deinterleave(c(5.0, 6.0), c(7.0, 8.0));
        assert_eq!(deinterleave(a, b), (c(5.0, 6.0), c(7.0, 8.0)));
    }

    #[test]
    fn sm_encode_examples() {
        let cfg = SchemeConfig::sm(4, bpsk()).unwrap();
        let x = sm_encode(&[0, 0, 0], &cfg).unwrap();
        assert_eq!(x.slots(), &[Slot { antenna: 1, symbol: cfg.constellation().point(0) }]);
        let x = sm_encode(&[1, 1, 1], &cfg).unwrap();
        assert_eq!(x.slots(), &[Slot { antenna: 4, symbol: cfg.constellation().point(1) }]);
        assert_eq!(enumerate_codewords(&cfg).len(), 8);
        assert!(matches!(sm_encode(&[0, 1], &cfg), Err(Error::BitLength { expected: 3, got: 2 })));
        assert!(sm_encode(&[0, 2, 1], &cfg).is_err());
    }

    #[test]
    fn low_dosm_antenna_placement() {
        let cfg = SchemeConfig::low_dosm(4, &qam(4)).unwrap();
        assert_eq!(cfg.bits_per_block(), 6);
        let x = low_dosm_encode(&[0, 0, 0, 0, 0, 0], &cfg).unwrap();
        assert_eq!((x.slots()[0].antenna, x.slots()[1].antenna), (1, 2));
        let x = low_dosm_encode(&[1, 1, 0, 1, 1, 0], &cfg).unwrap();
        assert_eq!((x.slots()[0].antenna, x.slots()[1].antenna), (4, 1));
        assert!(low_dosm_encode(&[0; 5], &cfg).is_err());
        assert!(sm_encode(&[0; 6], &cfg).is_err());
    }

    #[test]
    fn low_dosm_symbols_are_interleaved_rotated_points() {
        let base = qam(16);
        let cfg = SchemeConfig::low_dosm(4, &base).unwrap();
        let label = CodewordLabel::new(2, 5, 11);
        let x = cfg.encode_label(&label);
        let r = Complex64::from_polar(1.0, ciod_rotation());
        let (s1, s2) = (base.point(5) * r, base.point(11) * r);
        assert!((x.slots()[0].symbol - c(s1.re, s2.im)).norm() < 1e-12);
        assert!((x.slots()[1].symbol - c(s2.re, s1.im)).norm() < 1e-12);
    }

    #[test]
    fn low_dosm_rate() {
        let cfg = SchemeConfig::low_dosm(4, &qam(4)).unwrap();
        assert_eq!(cfg.rate_bpcu(), 3.0);
        let rect = Constellation::build(
            crate::constellation::ConstellationKind::RectangularQam,
            8,
            Normalization::UnitAverageEnergy,
        )
        .unwrap();
        let cfg = SchemeConfig::low_dosm(4, &rect).unwrap();
        assert_eq!(cfg.rate_bpcu(), 4.0);
    }

    #[test]
    fn high_dosm_templates() {
        let cfg = SchemeConfig::high_dosm(4, &bpsk(), vec![]).unwrap();
        assert_eq!(high_dosm_template(1, 1, &cfg).unwrap(), (1, 2));
        assert_eq!(high_dosm_template(1, 4, &cfg).unwrap(), (4, 5));
        assert_eq!(high_dosm_template(2, 4, &cfg).unwrap(), (4, 1));
        assert!(high_dosm_template(0, 1, &cfg).is_err());
        assert!(high_dosm_template(1, 5, &cfg).is_err());
    }

    #[test]
    fn high_dosm_templates_match_example_sets() {
        // (row of s̃1, row of s̃2) for CBS_1..CBS_4, CB_1..CB_4 with five antennas
        let expected = [
            [(1, 2), (2, 3), (3, 4), (4, 5)],
            [(1, 3), (2, 4), (3, 5), (4, 1)],
            [(1, 4), (2, 5), (3, 1), (4, 2)],
            [(1, 5), (2, 1), (3, 2), (4, 3)],
        ];
        let cfg = SchemeConfig::high_dosm(4, &bpsk(), vec![]).unwrap();
        let mut distinct = std::collections::HashSet::new();
        for i in 1..=4 {
            for j in 1..=4 {
                let rows = high_dosm_template(i, j, &cfg).unwrap();
                assert_eq!(rows, expected[i - 1][j - 1]);
                assert_ne!(rows.0, rows.1);
                assert!(rows.0 <= 4);
                distinct.insert(rows);
            }
        }
        assert_eq!(distinct.len(), 16);
    }

    #[test]
    fn high_dosm_encode_applies_cbs_phase() {
        let phases: Vec<Complex64> = (0..4).map(|k| Complex64::from_polar(1.0, 0.3 * k as f64)).collect();
        let cfg = SchemeConfig::high_dosm(4, &qam(4), phases.clone()).unwrap();
        assert_eq!(cfg.n_antennas(), 5);
        assert_eq!(cfg.bits_per_block(), 8);
        assert_eq!(cfg.rate_bpcu(), 4.0);
        // i = 3 (bits 10), j = 2 (bits 01), x1 = 1, x2 = 2
        let x = high_dosm_encode(&[1, 0, 0, 1, 0, 1, 1, 0], &cfg).unwrap();
        assert_eq!((x.slots()[0].antenna, x.slots()[1].antenna), (2, 5));
        let p = cfg.constellation().points();
        let (t1, t2) = interleave(p[1], p[2]);
        assert!((x.slots()[0].symbol - t1 * phases[2]).norm() < 1e-12);
        assert!((x.slots()[1].symbol - t2 * phases[2]).norm() < 1e-12);
    }

    #[test]
    fn high_dosm_rate_and_counts() {
        let cfg = SchemeConfig::high_dosm(4, &bpsk(), vec![]).unwrap();
        assert_eq!(cfg.rate_bpcu(), 3.0);
        assert_eq!(cfg.num_codebooks(), 16);
        assert_eq!(enumerate_codewords(&cfg).len(), 16 * 4);
        let cfg = SchemeConfig::high_dosm(4, &qam(4), vec![]).unwrap();
        assert_eq!(cfg.rate_bpcu(), 4.0);
    }

    #[test]
    fn enumeration_sizes() {
        assert_eq!(enumerate_codewords(&SchemeConfig::low_dosm(4, &qam(4)).unwrap()).len(), 4 * 16);
        assert_eq!(enumerate_codewords(&SchemeConfig::low_dosm(8, &qam(16)).unwrap()).len(), 8 * 256);
        assert_eq!(enumerate_codewords(&SchemeConfig::high_dosm(4, &qam(4), vec![]).unwrap()).len(), 16 * 16);
        assert_eq!(enumerate_codewords(&SchemeConfig::sm(8, qam(4)).unwrap()).len(), 32);
    }

    #[test]
    fn one_active_antenna_per_channel_use() {
        for cfg in [
            SchemeConfig::low_dosm(4, &qam(4)).unwrap(),
            SchemeConfig::high_dosm(4, &qam(4), vec![]).unwrap(),
        ] {
            for (_, x) in enumerate_codewords(&cfg) {
                let m = x.to_matrix();
                for t in 0..2 {
                    let active = m.column(t).iter().filter(|v| v.norm() > 0.0).count();
                    assert_eq!(active, 1);
                }
                assert_ne!(x.slots()[0].antenna, x.slots()[1].antenna);
            }
        }
    }

    #[test]
    fn rates() {
        assert_eq!(rate_bpcu(&SchemeConfig::low_dosm(4, &qam(4)).unwrap()), 3.0);
        assert_eq!(rate_bpcu(&SchemeConfig::high_dosm(4, &qam(4), vec![]).unwrap()), 4.0);
        assert_eq!(rate_bpcu(&SchemeConfig::sm(4, bpsk()).unwrap()), 3.0);
        assert_eq!(stbc_sm_combinations(4), 4);
        assert_eq!(stbc_sm_combinations(8), 16);
        assert_eq!(stbc_sm_rate(4, 4), 3.0);
    }

    #[test]
    fn config_validation() {
        assert!(matches!(SchemeConfig::sm(3, bpsk()), Err(Error::InvalidAntennaCount(3))));
        assert!(SchemeConfig::sm(4, qam(4).rotate(0.1)).is_err());
        assert!(SchemeConfig::high_dosm(4, &bpsk(), vec![Complex64::new(1.0, 0.0); 3]).is_err());
        assert!(SchemeConfig::high_dosm(4, &bpsk(), vec![Complex64::new(1.1, 0.0); 4]).is_err());
        assert!(SchemeConfig::new(Scheme::LowDosm, 4, qam(4), vec![Complex64::new(1.0, 0.0); 4]).is_err());
    }

    #[test]
    fn pair_lookup_inverts_antenna_pair() {
        for cfg in [
            SchemeConfig::low_dosm(8, &qam(4)).unwrap(),
            SchemeConfig::high_dosm(8, &qam(4), vec![]).unwrap(),
        ] {
            for cb in 0..cfg.num_codebooks() {
                let (l1, l2) = cfg.antenna_pair(cb);
                assert_eq!(cfg.codebook_for_pair(l1, l2), Some(cb));
            }
        }
        let low = SchemeConfig::low_dosm(4, &qam(4)).unwrap();
        assert_eq!(low.codebook_for_pair(1, 3), None);
        let high = SchemeConfig::high_dosm(4, &qam(4), vec![]).unwrap();
        assert_eq!(high.codebook_for_pair(5, 1), None);
        assert_eq!(high.codebook_for_pair(2, 2), None);
    }
}
