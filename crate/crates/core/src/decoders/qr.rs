use nalgebra::{DMatrix, DVector, Matrix4, Vector4};
use num_complex::Complex64;

use super::{check_dims, require_ciod, DecodeResult};
use crate::channel::{realify_matrix, realify_vector};
use crate::codebooks::{CodewordLabel, SchemeConfig};
use crate::constellation::PamGrid;
use crate::error::{Error, Result};

const ZERO_PATTERN_TOL: f64 = 1e-9;

/// Real-valued model `ȳ = H̄_eq x̄` for one antenna pair, with
/// `x̄ = [x1_I, x1_Q, x2_I, x2_Q]` on the unrotated PAM lattice, and its thin
/// QR factorization.
#[derive(Debug, Clone)]
pub struct RealDecomposition {
    pub codebook: usize,
    /// Complex `2N_r x 4` equivalent channel.
    pub heq: DMatrix<Complex64>,
    /// `4N_r x 4` real equivalent channel.
    pub heq_real: DMatrix<f64>,
    pub q1: DMatrix<f64>,
    pub r1: Matrix4<f64>,
}

impl RealDecomposition {
    /// `z̄1 = Q̄1ᵀ ȳ`.
    pub fn project(&self, y_bar: &DVector<f64>) -> Vector4<f64> {
        let z = self.q1.transpose() * y_bar;
        Vector4::new(z[0], z[1], z[2], z[3])
    }

    /// Largest `|r_ij|` for `i ∈ {1,2}`, `j ∈ {3,4}`.
    pub fn off_block_max(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..2 {
            for j in 2..4 {
                m = m.max(self.r1[(i, j)].abs());
            }
        }
        m
    }
}

/// Interleaving map from `[s1_I, s1_Q, s2_I, s2_Q]` to `[s̃1, 0, 0, s̃2]`.
fn interleaving_map() -> DMatrix<Complex64> {
    let o = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let j = Complex64::new(0.0, 1.0);
    DMatrix::from_row_slice(4, 4, &[
        one, o, o, j, //
        o, o, o, o, //
        o, o, o, o, //
        o, j, one, o,
    ])
}

/// Block rotation taking `[x1_I, x1_Q, x2_I, x2_Q]` to `[s1_I, s1_Q, s2_I, s2_Q]`.
fn rotation_map(theta: f64) -> DMatrix<Complex64> {
    let (s, c) = theta.sin_cos();
    let mut v = DMatrix::zeros(4, 4);
    for b in [0, 2] {
        v[(b, b)] = Complex64::new(c, 0.0);
        v[(b, b + 1)] = Complex64::new(-s, 0.0);
        v[(b + 1, b)] = Complex64::new(s, 0.0);
        v[(b + 1, b + 1)] = Complex64::new(c, 0.0);
    }
    v
}

fn decompose(h: &DMatrix<Complex64>, codebook: usize, cfg: &SchemeConfig) -> Result<RealDecomposition> {
    let n_r = h.nrows();
    let (l1, l2) = cfg.antenna_pair(codebook);
    let phase = cfg.codebook_phase(codebook);

    // I2 ⊗ [h_l1 h_l2], with the codebook-set phase absorbed in the columns
    let mut kron = DMatrix::zeros(2 * n_r, 4);
    for r in 0..n_r {
        for blk in 0..2 {
            kron[(blk * n_r + r, 2 * blk)] = h[(r, l1 - 1)] * phase;
            kron[(blk * n_r + r, 2 * blk + 1)] = h[(r, l2 - 1)] * phase;
        }
    }
    let heq = kron * interleaving_map() * rotation_map(cfg.constellation().theta());

    // x̄ is real, so only the first column of each 2x2 block is needed
    let full = realify_matrix(&heq);
    let heq_real = full.select_columns(&[0, 2, 4, 6]);

    let qr = heq_real.clone().qr();
    let q1 = qr.q();
    let r = qr.r();
    let r1 = Matrix4::from_fn(|i, j| r[(i, j)]);

    let diag_max = (0..4).map(|i| r1[(i, i)].abs()).fold(0.0, f64::max);
    let diag_min = (0..4).map(|i| r1[(i, i)].abs()).fold(f64::INFINITY, f64::min);
    if diag_min.is_nan() || diag_min <= 1e-12 * diag_max.max(1e-300) {
        return Err(Error::RankDeficient);
    }
    let decomp = RealDecomposition {
        codebook,
        heq,
        heq_real,
        q1,
        r1,
    };
    let off = decomp.off_block_max();
    if off > ZERO_PATTERN_TOL {
        return Err(Error::StructureViolation(off));
    }
    Ok(decomp)
}

/// Builds `H_eq = [I2 ⊗ H(l1, l2)] V1 V2`, its real form, and the QR
/// factorization; verifies the block-diagonal zero pattern of `R̄1`.
pub fn build_real_decomp(h: &DMatrix<Complex64>, l1: usize, l2: usize, cfg: &SchemeConfig) -> Result<RealDecomposition> {
    require_ciod(cfg)?;
    if h.ncols() != cfg.n_antennas() {
        return Err(Error::Dimension(format!(
            "channel has {} columns, scheme uses {} antennas",
            h.ncols(),
            cfg.n_antennas()
        )));
    }
    let codebook = cfg
        .codebook_for_pair(l1, l2)
        .ok_or(Error::IllegalAntennaPair { l1, l2 })?;
    decompose(h, codebook, cfg)
}

/// Best `(I, Q)` lattice point for one 2x2 upper-triangular block
/// `[[r_ii, r_iq], [0, r_qq]]` against `(z_i, z_q)`: every quadrature level
/// is tried and the in-phase level is hard-limited.
fn conditioned_search(
    z: (f64, f64),
    r_ii: f64,
    r_iq: f64,
    r_qq: f64,
    pam_i: &PamGrid,
    pam_q: &PamGrid,
) -> (f64, usize, usize, usize) {
    let mut best = (f64::INFINITY, 0, 0);
    let mut evals = 0;
    for (qi, &xq) in pam_q.levels().iter().enumerate() {
        let ki = pam_i.nearest_index((z.0 - r_iq * xq) / r_ii);
        let xi = pam_i.levels()[ki];
        let m = (z.0 - r_ii * xi - r_iq * xq).powi(2) + (z.1 - r_qq * xq).powi(2);
        evals += 1;
        if m < best.0 {
            best = (m, ki, qi);
        }
    }
    (best.0, best.1, best.2, evals)
}

/// Low-complexity ML detector: per antenna pair, QR-decouple the two
/// symbols and search only the quadrature levels of each.
pub fn qr_hardlimit_decode(y: &DMatrix<Complex64>, h: &DMatrix<Complex64>, cfg: &SchemeConfig) -> Result<DecodeResult> {
    require_ciod(cfg)?;
    check_dims(y, h, cfg)?;
    let c = cfg.constellation();
    let (pam_i, pam_q) = (c.pam_i(), c.pam_q());

    // vec(Y) = [y1; y2]; DMatrix storage is column-major
    let y_bar = realify_vector(&DVector::from_column_slice(y.as_slice()));
    let y_energy = y_bar.norm_squared();

    let mut best: Option<(f64, CodewordLabel)> = None;
    let mut evals = 0;
    for codebook in 0..cfg.num_codebooks() {
        let d = decompose(h, codebook, cfg)?;
        let z = d.project(&y_bar);
        let r = &d.r1;
        let (m1, i1, q1, e1) = conditioned_search((z[0], z[1]), r[(0, 0)], r[(0, 1)], r[(1, 1)], pam_i, pam_q);
        let (m2, i2, q2, e2) = conditioned_search((z[2], z[3]), r[(2, 2)], r[(2, 3)], r[(3, 3)], pam_i, pam_q);
        evals += e1 + e2;
        // ||ȳ - H̄x̄||² = ||z̄1 - R̄1x̄||² + ||z̄2||²
        let metric = m1 + m2 + (y_energy - z.norm_squared());
        let label = CodewordLabel::new(codebook, c.index_of_levels(i1, q1), c.index_of_levels(i2, q2));
        if best.is_none_or(|(bm, _)| metric < bm) {
            best = Some((metric, label));
        }
    }
    let (metric, label) = best.expect("at least one codebook");
    Ok(DecodeResult { label, metric, evals })
}
