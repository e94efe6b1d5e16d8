//! Pairwise determinant analysis of the space-time codebooks.
//!
//! For two-column codewords the rank-and-determinant criterion reduces to
//! `|det(Δ^H Δ)|` of the 2x2 Gram matrix of `Δ = X - X'`, which is computed
//! in closed form as `‖δ1‖²‖δ2‖² - |δ1^H δ2|²`.

use std::fmt;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::codebooks::{enumerate_codewords, CodewordLabel, Scheme, SchemeConfig, SpaceTimeCodeword};
use crate::constellation::{Constellation, ConstellationKind, Normalization};
use crate::error::{Error, Result};

/// Upper bound on determinant evaluations for one scan.
pub const MAX_PAIR_EVALUATIONS: u64 = 200_000_000;

/// Threshold below which a determinant counts as zero.
pub const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PairCase {
    SameCodebook,
    /// Distinct codebooks (of one CBS) that share an antenna.
    AdjacentCodebook,
    /// Distinct codebooks (of one CBS) with no antenna in common.
    DisjointCodebook,
    /// Codebooks from different High DoSM codebook sets.
    CrossCbs,
}

impl PairCase {
    pub const ALL: [PairCase; 4] = [
        PairCase::SameCodebook,
        PairCase::AdjacentCodebook,
        PairCase::DisjointCodebook,
        PairCase::CrossCbs,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PairCase::SameCodebook => "same_cb",
            PairCase::AdjacentCodebook => "adjacent_cb",
            PairCase::DisjointCodebook => "disjoint_cb",
            PairCase::CrossCbs => "cross_cbs",
        }
    }
}

impl fmt::Display for PairCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which of the pair cases two codebooks fall in.
pub fn classify_pair(cfg: &SchemeConfig, cb_a: usize, cb_b: usize) -> PairCase {
    if cb_a == cb_b {
        return PairCase::SameCodebook;
    }
    if cfg.scheme() == Scheme::HighDosm && cb_a / cfg.n_t() != cb_b / cfg.n_t() {
        return PairCase::CrossCbs;
    }
    let (a1, a2) = cfg.antenna_pair(cb_a);
    let (b1, b2) = cfg.antenna_pair(cb_b);
    if a1 == b1 || a1 == b2 || a2 == b1 || a2 == b2 {
        PairCase::AdjacentCodebook
    } else {
        PairCase::DisjointCodebook
    }
}

fn gram_det(a: f64, c: f64, b: Complex64) -> f64 {
    (a * c - b.norm_sqr()).abs()
}

/// `|det(Δ^H Δ)|` from the dense difference matrix. Single-column codewords
/// give `‖Δ‖²`.
pub fn det_distance(x: &SpaceTimeCodeword, y: &SpaceTimeCodeword) -> f64 {
    let delta: DMatrix<Complex64> = x.to_matrix() - y.to_matrix();
    if delta.ncols() == 1 {
        return delta.norm_squared();
    }
    let (d1, d2) = (delta.column(0), delta.column(1));
    let a = d1.norm_squared();
    let c = d2.norm_squared();
    let b: Complex64 = d1.iter().zip(d2.iter()).map(|(p, q)| p.conj() * q).sum();
    gram_det(a, c, b)
}

/// Sparse evaluation of [`det_distance`] for two-slot codewords.
fn pair_det(x: &SpaceTimeCodeword, y: &SpaceTimeCodeword) -> f64 {
    let col = |t: usize| -> ([(usize, Complex64); 2], usize) {
        let (p, q) = (x.slots()[t], y.slots()[t]);
        if p.antenna == q.antenna {
            ([(p.antenna, p.symbol - q.symbol), (0, Complex64::new(0.0, 0.0))], 1)
        } else {
            ([(p.antenna, p.symbol), (q.antenna, -q.symbol)], 2)
        }
    };
    let (c1, n1) = col(0);
    let (c2, n2) = col(1);
    let a: f64 = c1[..n1].iter().map(|e| e.1.norm_sqr()).sum();
    let c: f64 = c2[..n2].iter().map(|e| e.1.norm_sqr()).sum();
    let mut b = Complex64::new(0.0, 0.0);
    for e1 in &c1[..n1] {
        for e2 in &c2[..n2] {
            if e1.0 == e2.0 {
                b += e1.1.conj() * e2.1;
            }
        }
    }
    gram_det(a, c, b)
}

/// Summary of the scanned determinant values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeterminantSummary {
    pub pairs: u64,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Pairs with determinant below [`RANK_TOL`].
    pub rank_deficient: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseMinimum {
    pub case: PairCase,
    pub gain: f64,
    pub argmin: (CodewordLabel, CodewordLabel),
    pub pairs: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainReport {
    pub scheme: Scheme,
    pub m: usize,
    pub normalization: Normalization,
    pub gain: f64,
    pub argmin: (CodewordLabel, CodewordLabel),
    pub case: PairCase,
    /// Minimum per pair case, for the cases that occur.
    pub case_minima: Vec<CaseMinimum>,
    pub summary: DeterminantSummary,
    /// `true` when every unordered codeword pair was visited.
    pub exhaustive: bool,
}

impl GainReport {
    pub fn case_min(&self, case: PairCase) -> Option<f64> {
        self.case_minima.iter().find(|c| c.case == case).map(|c| c.gain)
    }
}

#[derive(Debug, Clone, Copy)]
struct CaseAcc {
    min: f64,
    argmin: (usize, usize),
    max: f64,
    sum: f64,
    pairs: u64,
    zeros: u64,
}

impl CaseAcc {
    fn new() -> Self {
        CaseAcc {
            min: f64::INFINITY,
            argmin: (usize::MAX, usize::MAX),
            max: 0.0,
            sum: 0.0,
            pairs: 0,
            zeros: 0,
        }
    }

    fn push(&mut self, v: f64, i: usize, j: usize) {
        if v < self.min || (v == self.min && (i, j) < self.argmin) {
            self.min = v;
            self.argmin = (i, j);
        }
        self.max = self.max.max(v);
        self.sum += v;
        self.pairs += 1;
        if v < RANK_TOL {
            self.zeros += 1;
        }
    }

    fn merge(&mut self, o: &CaseAcc) {
        if o.min < self.min || (o.min == self.min && o.argmin < self.argmin) {
            self.min = o.min;
            self.argmin = o.argmin;
        }
        self.max = self.max.max(o.max);
        self.sum += o.sum;
        self.pairs += o.pairs;
        self.zeros += o.zeros;
    }
}

type CaseTable = [CaseAcc; 4];

fn case_slot(c: PairCase) -> usize {
    c as usize
}

/// Scans pairs `(i, j)` of `words` where `i` runs over `rows` and `j` over
/// `cols(i)`; per-row partials are folded in row order so the result does not
/// depend on the thread count.
fn scan<F>(cfg: &SchemeConfig, words: &[(CodewordLabel, SpaceTimeCodeword)], rows: &[usize], cols: F) -> CaseTable
where
    F: Fn(usize) -> std::ops::Range<usize> + Sync,
{
    let partials: Vec<CaseTable> = rows
        .par_iter()
        .map(|&i| {
            let mut t = [CaseAcc::new(); 4];
            let (li, xi) = &words[i];
            for j in cols(i) {
                if j == i {
                    continue;
                }
                let (lj, xj) = &words[j];
                let case = classify_pair(cfg, li.codebook, lj.codebook);
                t[case_slot(case)].push(pair_det(xi, xj), i, j);
            }
            t
        })
        .collect();
    let mut total = [CaseAcc::new(); 4];
    for p in &partials {
        for (acc, part) in total.iter_mut().zip(p) {
            acc.merge(part);
        }
    }
    total
}

fn report_from(
    cfg: &SchemeConfig,
    words: &[(CodewordLabel, SpaceTimeCodeword)],
    table: &CaseTable,
    exhaustive: bool,
) -> GainReport {
    let mut case_minima = Vec::new();
    let mut all = CaseAcc::new();
    for case in PairCase::ALL {
        let acc = &table[case_slot(case)];
        if acc.pairs == 0 {
            continue;
        }
        all.merge(acc);
        case_minima.push(CaseMinimum {
            case,
            gain: acc.min,
            argmin: (words[acc.argmin.0].0, words[acc.argmin.1].0),
            pairs: acc.pairs,
        });
    }
    let (i, j) = all.argmin;
    let case = classify_pair(cfg, words[i].0.codebook, words[j].0.codebook);
    GainReport {
        scheme: cfg.scheme(),
        m: cfg.order(),
        normalization: cfg.constellation().normalization(),
        gain: all.min,
        argmin: (words[i].0, words[j].0),
        case,
        case_minima,
        summary: DeterminantSummary {
            pairs: all.pairs,
            min: all.min,
            max: all.max,
            mean: all.sum / all.pairs as f64,
            rank_deficient: all.zeros,
        },
        exhaustive,
    }
}

fn require_two_slot(cfg: &SchemeConfig) -> Result<()> {
    if cfg.scheme() == Scheme::Sm {
        return Err(Error::SchemeMismatch {
            expected: "low_dosm or high_dosm",
            got: cfg.scheme(),
        });
    }
    Ok(())
}

fn guard(pairs: u64) -> Result<()> {
    if pairs > MAX_PAIR_EVALUATIONS {
        return Err(Error::SearchTooLarge(format!(
            "{pairs} determinant evaluations exceed the limit of {MAX_PAIR_EVALUATIONS}"
        )));
    }
    Ok(())
}

/// Minimum determinant over every unordered pair of distinct codewords.
pub fn coding_gain_exhaustive(cfg: &SchemeConfig) -> Result<GainReport> {
    require_two_slot(cfg)?;
    let n = cfg.num_codewords() as u64;
    guard(n * (n - 1) / 2)?;
    let words = enumerate_codewords(cfg);
    let rows: Vec<usize> = (0..words.len()).collect();
    let len = words.len();
    let table = scan(cfg, &words, &rows, |i| i + 1..len);
    Ok(report_from(cfg, &words, &table, true))
}

/// Coding gain with the search space cut down where the code structure
/// allows it.
///
/// Low DoSM is invariant under a cyclic shift of the antennas, which maps
/// `CB_c` onto `CB_{c+1}` symbol for symbol, so it suffices to pair `CB_1`
/// with every codebook. High DoSM is scanned exhaustively.
pub fn coding_gain(cfg: &SchemeConfig) -> Result<GainReport> {
    require_two_slot(cfg)?;
    match cfg.scheme() {
        Scheme::LowDosm => {
            let per_cb = (cfg.num_codewords() / cfg.num_codebooks()) as u64;
            guard(per_cb * per_cb * cfg.num_codebooks() as u64)?;
            let words = enumerate_codewords(cfg);
            let per_cb = per_cb as usize;
            let len = words.len();
            // rows: codebook 0; columns: later words of codebook 0, then all others
            let rows: Vec<usize> = (0..per_cb).collect();
            let table = scan(cfg, &words, &rows, |i| i + 1..len);
            Ok(report_from(cfg, &words, &table, false))
        }
        _ => coding_gain_exhaustive(cfg),
    }
}

/// Whether every codeword difference has full rank, with a rank-deficient
/// witness pair when it does not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiversityCertificate {
    pub full_diversity: bool,
    pub min_det: f64,
    pub witness: Option<(CodewordLabel, CodewordLabel)>,
    pub case: PairCase,
}

pub fn diversity_certificate(cfg: &SchemeConfig) -> Result<DiversityCertificate> {
    let report = coding_gain(cfg)?;
    let full = report.gain > RANK_TOL;
    Ok(DiversityCertificate {
        full_diversity: full,
        min_det: report.gain,
        witness: (!full).then_some(report.argmin),
        case: report.case,
    })
}

/// Codebook-set phases chosen from `grid_n` points on the unit circle.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseAssignment {
    pub grid_n: usize,
    /// Angle of grid point 0.
    pub anchor: f64,
    /// Grid index per codebook set; the first is always 0.
    pub indices: Vec<usize>,
    pub phases: Vec<Complex64>,
    pub achieved_gain: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseOptimization {
    pub best: PhaseAssignment,
    /// Best assignment found on each searched grid anchor.
    pub per_anchor: Vec<PhaseAssignment>,
    pub assignments_searched: u64,
    /// Minimum over pairs inside one codebook set (phase independent).
    pub within_cbs_gain: f64,
    /// Gain with the published reference phases snapped to the grid, when
    /// they exist for this configuration.
    pub reference_gain: Option<f64>,
    /// Gain with the reference phases at their printed four-decimal values.
    pub reference_gain_as_printed: Option<f64>,
}

/// Grid anchors searched by [`optimize_phases`]: `e^{j2πk/16}` and the same
/// grid started at `π/8`.
pub const PHASE_GRID_ANCHORS: [f64; 2] = [0.0, std::f64::consts::FRAC_PI_8];

pub fn grid_phase(k: usize, grid_n: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / grid_n as f64)
}

type CodewordSet<'a> = &'a [(CodewordLabel, SpaceTimeCodeword)];

fn decode_assignment(code: u64, n_t: usize, grid_n: usize) -> Vec<usize> {
    let mut idx = vec![0usize; n_t];
    let mut c = code;
    for slot in idx[1..].iter_mut().rev() {
        *slot = (c % grid_n as u64) as usize;
        c /= grid_n as u64;
    }
    idx
}

fn grid_search(sets: &[CodewordSet<'_>], within: f64, grid_n: usize, anchor: f64) -> PhaseAssignment {
    let n_t = sets.len();
    let a0 = Complex64::from_polar(1.0, anchor);
    let set_pairs: Vec<(usize, usize)> = (0..n_t).flat_map(|a| (a + 1..n_t).map(move |b| (a, b))).collect();
    // cross[p][k]: min det between set a at the anchor and set b at anchor * w^k
    let cross: Vec<Vec<f64>> = set_pairs
        .par_iter()
        .map(|&(a, b)| {
            (0..grid_n)
                .map(|k| {
                    let wb = a0 * grid_phase(k, grid_n);
                    let mut m = f64::INFINITY;
                    for (_, x) in sets[a] {
                        let x = x.scaled(a0);
                        for (_, y) in sets[b] {
                            m = m.min(pair_det(&x, &y.scaled(wb)));
                        }
                    }
                    m
                })
                .collect()
        })
        .collect();

    let total = (grid_n as u64).pow((n_t - 1) as u32);
    let score = |code: u64| -> f64 {
        let idx = decode_assignment(code, n_t, grid_n);
        let mut g = within;
        for (p, &(a, b)) in set_pairs.iter().enumerate() {
            g = g.min(cross[p][(idx[b] + grid_n - idx[a]) % grid_n]);
        }
        g
    };
    let (best_code, best_gain) = (0..total).into_par_iter().map(|code| (code, score(code))).reduce(
        || (u64::MAX, f64::NEG_INFINITY),
        |x, y| {
            if y.1 > x.1 || (y.1 == x.1 && y.0 < x.0) {
                y
            } else {
                x
            }
        },
    );
    let indices = decode_assignment(best_code, n_t, grid_n);
    let phases = indices.iter().map(|&k| a0 * grid_phase(k, grid_n)).collect();
    PhaseAssignment {
        grid_n,
        anchor,
        indices,
        phases,
        achieved_gain: best_gain,
    }
}

/// Exhaustive search over per-set phases on a `grid_n`-point unit-circle
/// grid, for each anchor in [`PHASE_GRID_ANCHORS`].
///
/// Multiplying all codewords by one unit scalar leaves every determinant
/// unchanged, so the first set is pinned to grid index 0, and a cross-set
/// pair only depends on the phase ratio: the minimum for each set pair and
/// each relative offset is tabulated once and every assignment is scored
/// from the table.
pub fn optimize_phases(cfg: &SchemeConfig, grid_n: usize) -> Result<PhaseOptimization> {
    if cfg.scheme() != Scheme::HighDosm {
        return Err(Error::SchemeMismatch {
            expected: "high_dosm",
            got: cfg.scheme(),
        });
    }
    let n_t = cfg.n_t();
    if n_t > 8 || grid_n == 0 {
        return Err(Error::SearchTooLarge(format!(
            "phase search over {grid_n}^{} assignments",
            n_t - 1
        )));
    }
    let unit = cfg.with_phases(vec![Complex64::new(1.0, 0.0); n_t])?;
    let words = enumerate_codewords(&unit);
    let per_set = words.len() / n_t;
    let sets: Vec<CodewordSet<'_>> = words.chunks(per_set).collect();

    let within = sets
        .par_iter()
        .map(|set| {
            let mut m = f64::INFINITY;
            for (a, (_, x)) in set.iter().enumerate() {
                for (_, y) in &set[a + 1..] {
                    m = m.min(pair_det(x, y));
                }
            }
            m
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(f64::INFINITY, f64::min);

    let per_anchor: Vec<PhaseAssignment> = PHASE_GRID_ANCHORS
        .iter()
        .map(|&anchor| grid_search(&sets, within, grid_n, anchor))
        .collect();
    let mut best = per_anchor[0].clone();
    for p in &per_anchor[1..] {
        // the anchors are equivalent up to rounding; keep the first unless clearly better
        if p.achieved_gain > best.achieved_gain * (1.0 + 1e-9) {
            best = p.clone();
        }
    }

    let gain_with = |p: Vec<Complex64>| -> Result<f64> { Ok(coding_gain_exhaustive(&cfg.with_phases(p)?)?.gain) };
    let c = cfg.constellation();
    let reference_gain = reference_phases(cfg).map(gain_with).transpose()?;
    let reference_gain_as_printed = if n_t == 4 {
        reference_phases_as_printed(c.kind(), c.order()).map(gain_with).transpose()?
    } else {
        None
    };

    Ok(PhaseOptimization {
        best,
        per_anchor,
        assignments_searched: (grid_n as u64).pow((n_t - 1) as u32) * PHASE_GRID_ANCHORS.len() as u64,
        within_cbs_gain: within,
        reference_gain,
        reference_gain_as_printed,
    })
}

/// Published 16-point-grid phases for `N_t = 4` with BPSK or 4-QAM, as grid
/// indices `k` of `e^{j2πk/16}`.
pub fn reference_phase_indices(kind: ConstellationKind, m: usize) -> Option<[usize; 4]> {
    match (kind, m) {
        // 0.9239+0.3827j, 0.7071-0.7071j, -1.0000j, -0.7071-0.707j
        (ConstellationKind::Bpsk, 2) => Some([1, 14, 12, 10]),
        // -0.9239+0.3827j, 1.0000j, 0.7071+0.7071j, 0.9239+0.3827j
        (ConstellationKind::SquareQam, 4) => Some([7, 4, 2, 1]),
        _ => None,
    }
}

/// The published phases exactly as printed (four decimals), normalized to
/// unit magnitude.
#[allow(clippy::approx_constant)]
pub fn reference_phases_as_printed(kind: ConstellationKind, m: usize) -> Option<Vec<Complex64>> {
    let raw: [(f64, f64); 4] = match (kind, m) {
        (ConstellationKind::Bpsk, 2) => [(0.9239, 0.3827), (0.7071, -0.7071), (0.0, -1.0), (-0.7071, -0.707)],
        (ConstellationKind::SquareQam, 4) => [(-0.9239, 0.3827), (0.0, 1.0), (0.7071, 0.7071), (0.9239, 0.3827)],
        _ => return None,
    };
    Some(
        raw.iter()
            .map(|&(re, im)| {
                let z = Complex64::new(re, im);
                z / z.norm()
            })
            .collect(),
    )
}

fn reference_phases(cfg: &SchemeConfig) -> Option<Vec<Complex64>> {
    if cfg.n_t() != 4 {
        return None;
    }
    let c = cfg.constellation();
    reference_phase_indices(c.kind(), c.order()).map(|idx| idx.iter().map(|&k| grid_phase(k, 16)).collect())
}

/// Published phases for a High DoSM configuration, if any.
pub fn table_phases(cfg: &SchemeConfig) -> Option<Vec<Complex64>> {
    reference_phases(cfg)
}

/// Published Low DoSM coding gains and the number of decimals printed.
pub fn reference_low_dosm_gain(m: usize) -> Option<(f64, usize)> {
    match m {
        4 => Some((1.6446, 4)),
        16 | 64 | 256 => Some((1.6, 1)),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NvdRow {
    pub m: usize,
    pub normalization: Normalization,
    /// `None` for the overall minimum.
    pub case: Option<PairCase>,
    pub gain: f64,
    pub reference: Option<f64>,
    /// Gain rounded to the reference's printed precision equals it.
    pub matches_reference: Option<bool>,
}

/// Low DoSM coding gain for each `M`, under both normalizations.
pub fn nvd_scan(n_t: usize, m_list: &[usize]) -> Result<Vec<NvdRow>> {
    let mut rows = Vec::new();
    for &m in m_list {
        for normalization in [Normalization::UnitAverageEnergy, Normalization::UnitHalfSpacing] {
            let base = Constellation::square_qam(m, normalization)?;
            let cfg = SchemeConfig::low_dosm(n_t, &base)?;
            let report = coding_gain(&cfg)?;
            let reference = reference_low_dosm_gain(m);
            let matches = reference.map(|(r, digits)| {
                let scale = 10f64.powi(digits as i32);
                ((report.gain * scale).round() - (r * scale).round()).abs() < 0.5
            });
            rows.push(NvdRow {
                m,
                normalization,
                case: None,
                gain: report.gain,
                reference: reference.map(|r| r.0),
                matches_reference: matches,
            });
            for c in &report.case_minima {
                rows.push(NvdRow {
                    m,
                    normalization,
                    case: Some(c.case),
                    gain: c.gain,
                    reference: None,
                    matches_reference: None,
                });
            }
        }
    }
    Ok(rows)
}

/// CSV with columns `scheme,M,normalization,case,gain`, one row for the
/// overall minimum and one per pair case.
pub fn write_gain_csv<W: Write>(reports: &[GainReport], mut w: W) -> Result<()> {
    writeln!(w, "scheme,M,normalization,case,gain")?;
    for r in reports {
        let tag = r.normalization.tag();
        writeln!(w, "{},{},{},all,{}", r.scheme, r.m, tag, r.gain)?;
        for c in &r.case_minima {
            writeln!(w, "{},{},{},{},{}", r.scheme, r.m, tag, c.case, c.gain)?;
        }
    }
    Ok(())
}

/// [`write_gain_csv`] layout plus `table_reference` and `matches_table`.
pub fn write_nvd_csv<W: Write>(rows: &[NvdRow], mut w: W) -> Result<()> {
    writeln!(w, "scheme,M,normalization,case,gain,table_reference,matches_table")?;
    for r in rows {
        let case = r.case.map_or("all", |c| c.name());
        let reference = r.reference.map_or(String::new(), |v| v.to_string());
        let matches = r.matches_reference.map_or(String::new(), |v| v.to_string());
        writeln!(
            w,
            "low_dosm,{},{},{},{},{},{}",
            r.m,
            r.normalization.tag(),
            case,
            r.gain,
            reference,
            matches
        )?;
    }
    Ok(())
}
