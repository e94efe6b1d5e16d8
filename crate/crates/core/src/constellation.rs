//! Signal sets: square QAM, BPSK and (experimentally) rectangular QAM.
//!
//! Points are generated from two PAM axes with half-spacing `d`,
//! `x = d(2k - 1 - N1) + j d(2l - 1 - N2)`, ordered row-major over `(k, l)`,
//! and may then be rotated as a whole. The PAM axes always describe the
//! pre-rotation lattice; the QR decoder works on those coordinates.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Rotation angle `arctan(2)/2` that maximizes the CPD of square QAM.
pub fn ciod_rotation() -> f64 {
    2f64.atan() / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstellationKind {
    SquareQam,
    Bpsk,
    /// `N1 x N2` PAM product with `N1 != N2`. Only used by the 8-QAM preset.
    RectangularQam,
}

impl fmt::Display for ConstellationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ConstellationKind::SquareQam => "square QAM",
            ConstellationKind::Bpsk => "BPSK",
            ConstellationKind::RectangularQam => "rectangular QAM",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Normalization {
    /// Mean of `|x|²` over the set equals one.
    UnitAverageEnergy,
    /// `d = 1`, i.e. odd-integer PAM levels.
    UnitHalfSpacing,
}

impl Normalization {
    pub fn tag(&self) -> &'static str {
        match self {
            Normalization::UnitAverageEnergy => "unit_energy",
            Normalization::UnitHalfSpacing => "unit_half_spacing",
        }
    }
}

/// Uniform PAM level set, symmetric about zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PamGrid {
    levels: Vec<f64>,
    spacing: f64,
}

impl PamGrid {
    /// `n` levels `d(2k - 1 - n)`, `k = 1..=n`.
    pub fn new(n: usize, d: f64) -> Self {
        assert!(n >= 1, "PAM grid needs at least one level");
        let levels = (1..=n)
            .map(|k| d * (2.0 * k as f64 - 1.0 - n as f64))
            .collect();
        PamGrid {
            levels,
            spacing: 2.0 * d,
        }
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Index of the level nearest to `value`; exact midpoints go to the
    /// smaller level and out-of-range inputs saturate at the end levels.
    pub fn nearest_index(&self, value: f64) -> usize {
        let n = self.levels.len();
        if n == 1 {
            return 0;
        }
        let t = (value - self.levels[0]) / self.spacing;
        // ceil(t - 1/2) rounds half down
        let k = (t - 0.5).ceil();
        if k <= 0.0 {
            0
        } else if k >= (n - 1) as f64 {
            n - 1
        } else {
            k as usize
        }
    }

    pub fn hard_limit(&self, value: f64) -> f64 {
        self.levels[self.nearest_index(value)]
    }
}

/// Nearest level of `grid` to `value` (round, then clip to the outer levels).
pub fn hard_limit(value: f64, grid: &PamGrid) -> f64 {
    grid.hard_limit(value)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<Complex64>,
    kind: ConstellationKind,
    normalization: Normalization,
    d: f64,
    theta: f64,
    pam_i: PamGrid,
    pam_q: PamGrid,
}

impl Constellation {
    /// Builds an unrotated constellation of order `m`.
    pub fn build(kind: ConstellationKind, m: usize, normalization: Normalization) -> Result<Self> {
        match kind {
            ConstellationKind::SquareQam => {
                let side = integer_sqrt(m);
                if m < 4 || side * side != m {
                    return Err(Error::InvalidOrder { kind: "square QAM", m });
                }
                Ok(Self::from_axes(kind, side, side, normalization))
            }
            ConstellationKind::Bpsk => {
                if m != 2 {
                    return Err(Error::InvalidOrder { kind: "BPSK", m });
                }
                Ok(Self::from_axes(kind, 2, 1, normalization))
            }
            ConstellationKind::RectangularQam => match m {
                8 => Ok(Self::from_axes(kind, 4, 2, normalization)),
                _ => Err(Error::InvalidOrder {
                    kind: "rectangular QAM",
                    m,
                }),
            },
        }
    }

    pub fn square_qam(m: usize, normalization: Normalization) -> Result<Self> {
        Self::build(ConstellationKind::SquareQam, m, normalization)
    }

    pub fn bpsk(normalization: Normalization) -> Self {
        Self::from_axes(ConstellationKind::Bpsk, 2, 1, normalization)
    }

    /// `n_i x n_q` rectangular QAM; both sides must be powers of two.
    pub fn rectangular(n_i: usize, n_q: usize, normalization: Normalization) -> Result<Self> {
        if !n_i.is_power_of_two() || !n_q.is_power_of_two() || n_i * n_q < 2 {
            return Err(Error::InvalidOrder {
                kind: "rectangular QAM",
                m: n_i * n_q,
            });
        }
        let kind = if n_i == n_q {
            ConstellationKind::SquareQam
        } else if n_q == 1 && n_i == 2 {
            ConstellationKind::Bpsk
        } else {
            ConstellationKind::RectangularQam
        };
        Ok(Self::from_axes(kind, n_i, n_q, normalization))
    }

    fn from_axes(kind: ConstellationKind, n_i: usize, n_q: usize, normalization: Normalization) -> Self {
        let d = match normalization {
            Normalization::UnitHalfSpacing => 1.0,
            // mean |x|² = d² ((N1² - 1) + (N2² - 1)) / 3
            Normalization::UnitAverageEnergy => {
                let e = ((n_i * n_i - 1) + (n_q * n_q - 1)) as f64 / 3.0;
                (1.0 / e).sqrt()
            }
        };
        let pam_i = PamGrid::new(n_i, d);
        let pam_q = PamGrid::new(n_q, d);
        let points = pam_i
            .levels()
            .iter()
            .flat_map(|&xi| pam_q.levels().iter().map(move |&xq| Complex64::new(xi, xq)))
            .collect();
        Constellation {
            points,
            kind,
            normalization,
            d,
            theta: 0.0,
            pam_i,
            pam_q,
        }
    }

    /// Multiplies every point by `e^{jθ}`. Angles accumulate.
    pub fn rotate(&self, theta: f64) -> Self {
        let theta = self.theta + theta;
        // always rotate the lattice, so repeated rotations do not drift
        let r = Complex64::from_polar(1.0, theta);
        let points = self.lattice_points().map(|p| p * r).collect();
        Constellation {
            points,
            theta,
            ..self.clone()
        }
    }

    fn lattice_points(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.pam_i
            .levels()
            .iter()
            .flat_map(move |&xi| self.pam_q.levels().iter().map(move |&xq| Complex64::new(xi, xq)))
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, index: usize) -> Complex64 {
        self.points[index]
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.order().trailing_zeros() as usize
    }

    pub fn kind(&self) -> ConstellationKind {
        self.kind
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn pam_i(&self) -> &PamGrid {
        &self.pam_i
    }

    pub fn pam_q(&self) -> &PamGrid {
        &self.pam_q
    }

    /// Point index of the lattice point with level indices `(i_idx, q_idx)`.
    pub fn index_of_levels(&self, i_idx: usize, q_idx: usize) -> usize {
        i_idx * self.pam_q.len() + q_idx
    }

    pub fn average_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.order() as f64
    }

    pub fn cpd(&self) -> f64 {
        cpd(&self.points)
    }
}

/// Coordinate product distance of a point set: the minimum of
/// `|x_I - y_I| |x_Q - y_Q|` over distinct pairs. Sets with fewer than two
/// points return `+inf`.
pub fn cpd(points: &[Complex64]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, x) in points.iter().enumerate() {
        for y in &points[i + 1..] {
            let v = (x.re - y.re).abs() * (x.im - y.im).abs();
            best = best.min(v);
        }
    }
    best
}

fn integer_sqrt(m: usize) -> usize {
    let mut s = (m as f64).sqrt() as usize;
    while s * s > m {
        s -= 1;
    }
    while (s + 1) * (s + 1) <= m {
        s += 1;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    #[test]
    fn qam4_unit_energy() {
        let c = Constellation::square_qam(4, Normalization::UnitAverageEnergy).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert!((c.d() - h).abs() < TOL);
        for p in c.points() {
            assert!((p.re.abs() - h).abs() < TOL && (p.im.abs() - h).abs() < TOL);
        }
        assert!((c.average_energy() - 1.0).abs() < TOL);
    }

    #[test]
    fn qam16_unit_energy_matches_direct_mean() {
        let c = Constellation::square_qam(16, Normalization::UnitAverageEnergy).unwrap();
        assert!((c.d() - 0.1f64.sqrt()).abs() < TOL);
        // direct mean over the odd-integer lattice scaled by d
        let mut acc = 0.0;
        for k in [-3.0, -1.0, 1.0, 3.0] {
            for l in [-3.0, -1.0, 1.0, 3.0] {
                acc += (k * k + l * l) * c.d() * c.d();
            }
        }
        assert!((acc / 16.0 - 1.0).abs() < TOL);
        assert!((c.average_energy() - 1.0).abs() < TOL);
    }

    #[test]
    fn bpsk_points() {
        let c = Constellation::build(ConstellationKind::Bpsk, 2, Normalization::UnitAverageEnergy).unwrap();
        assert_eq!(c.points(), &[Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)]);
        assert_eq!(c.d(), 1.0);
    }

    #[test]
    fn rejects_bad_orders() {
        assert!(Constellation::square_qam(8, Normalization::UnitAverageEnergy).is_err());
        assert!(Constellation::square_qam(2, Normalization::UnitAverageEnergy).is_err());
        assert!(Constellation::build(ConstellationKind::Bpsk, 4, Normalization::UnitAverageEnergy).is_err());
    }

    #[test]
    fn row_major_ordering() {
        let c = Constellation::square_qam(16, Normalization::UnitHalfSpacing).unwrap();
        assert_eq!(c.point(0), Complex64::new(-3.0, -3.0));
        assert_eq!(c.point(1), Complex64::new(-3.0, -1.0));
        assert_eq!(c.point(4), Complex64::new(-1.0, -3.0));
        assert_eq!(c.point(c.index_of_levels(3, 2)), Complex64::new(3.0, 1.0));
    }

    #[test]
    fn rotation_examples() {
        let c = Constellation::square_qam(4, Normalization::UnitAverageEnergy).unwrap();
        assert_eq!(c.rotate(0.0), c);

        let theta = ciod_rotation();
        assert!((theta - 0.553_574_358_897_045_2).abs() < 1e-15);
        let r = c.rotate(theta);
        let idx = c.index_of_levels(1, 1); // (1 + j)/sqrt(2)
        let p = r.point(idx);
        assert!((p.norm() - 1.0).abs() < TOL);
        assert!((p.arg() - (std::f64::consts::FRAC_PI_4 + theta)).abs() < TOL);

        let back = r.rotate(-theta);
        for (a, b) in back.points().iter().zip(c.points()) {
            assert!((a - b).norm() < TOL);
        }
    }

    #[test]
    fn cpd_examples() {
        for m in [4, 16, 64] {
            let c = Constellation::square_qam(m, Normalization::UnitAverageEnergy).unwrap();
            assert_eq!(c.cpd(), 0.0);
        }
        let pair = [Complex64::new(1.0, 1.0), Complex64::new(-1.0, -1.0)];
        assert_eq!(cpd(&pair), 4.0);

        let r = Constellation::square_qam(4, Normalization::UnitAverageEnergy)
            .unwrap()
            .rotate(ciod_rotation());
        assert!((r.cpd() - 2.0 / 5f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn hard_limit_examples() {
        let g = PamGrid::new(4, 1.0);
        assert_eq!(g.levels(), &[-3.0, -1.0, 1.0, 3.0]);
        assert_eq!(hard_limit(0.9, &g), 1.0);
        assert_eq!(hard_limit(1000.0, &g), 3.0);
        assert_eq!(hard_limit(-1000.0, &g), -3.0);
        assert_eq!(hard_limit(-2.0, &g), -3.0);
        assert_eq!(hard_limit(0.0, &g), -1.0);
        assert_eq!(hard_limit(2.0, &g), 1.0);
    }

    #[test]
    fn hard_limit_single_level() {
        let g = PamGrid::new(1, 0.7);
        assert_eq!(g.levels(), &[0.0]);
        assert_eq!(hard_limit(5.0, &g), 0.0);
    }

    #[test]
    fn rectangular_8qam_energy() {
        let c = Constellation::build(ConstellationKind::RectangularQam, 8, Normalization::UnitAverageEnergy).unwrap();
        assert_eq!(c.pam_i().len(), 4);
        assert_eq!(c.pam_q().len(), 2);
        assert!((c.average_energy() - 1.0).abs() < TOL);
    }
}
