//! Block Rayleigh fading, AWGN and the real-valued expansion of complex
//! vectors and matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Channel matrix, constant over one transmission block.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    h: DMatrix<Complex64>,
    block_len: usize,
}

impl ChannelRealization {
    pub fn new(h: DMatrix<Complex64>, block_len: usize) -> Self {
        ChannelRealization { h, block_len }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.h
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.h
    }

    pub fn n_r(&self) -> usize {
        self.h.nrows()
    }

    pub fn n_a(&self) -> usize {
        self.h.ncols()
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }
}

/// One `CN(0, 1)` sample: real and imaginary parts each `N(0, 1/2)`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draws an `n_r x n_a` channel with i.i.d. `CN(0, 1)` entries, held for a
/// block of two channel uses.
pub fn draw_channel<R: Rng + ?Sized>(n_r: usize, n_a: usize, rng: &mut R) -> ChannelRealization {
    assert!(n_r >= 1 && n_a >= 1, "channel dimensions must be positive");
    // column-major fill keeps the draw order fixed
    let h = DMatrix::from_fn(n_r, n_a, |_, _| complex_gaussian(rng));
    ChannelRealization { h, block_len: 2 }
}

/// AWGN with variance `sigma2` per real dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    sigma2: f64,
}

impl NoiseModel {
    pub fn new(sigma2: f64) -> Result<Self> {
        if !(sigma2 >= 0.0 && sigma2.is_finite()) {
            return Err(Error::Config(format!("noise variance must be finite and >= 0, got {sigma2}")));
        }
        Ok(NoiseModel { sigma2 })
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Adds noise in place; a zero variance leaves the samples untouched.
    pub fn add_to<R: Rng + ?Sized>(&self, samples: &mut [Complex64], rng: &mut R) {
        if self.sigma2 == 0.0 {
            return;
        }
        let sigma = self.sigma2.sqrt();
        for s in samples {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            *s += Complex64::new(re * sigma, im * sigma);
        }
    }
}

pub fn add_noise<R: Rng + ?Sized>(y: &DVector<Complex64>, noise: &NoiseModel, rng: &mut R) -> DVector<Complex64> {
    let mut out = y.clone();
    noise.add_to(out.as_mut_slice(), rng);
    out
}

/// SNR is unit symbol energy over the total complex noise power `2σ²`.
pub fn snr_to_sigma2(snr_db: f64) -> NoiseModel {
    NoiseModel {
        sigma2: 10f64.powf(-snr_db / 10.0) / 2.0,
    }
}

/// `[z1_I, z1_Q, z2_I, z2_Q, ...]`
pub fn realify_vector(z: &DVector<Complex64>) -> DVector<f64> {
    DVector::from_fn(2 * z.len(), |r, _| {
        let c = z[r / 2];
        if r % 2 == 0 {
            c.re
        } else {
            c.im
        }
    })
}

/// Replaces every entry `a` with `[[Re a, -Im a], [Im a, Re a]]`.
pub fn realify_matrix(a: &DMatrix<Complex64>) -> DMatrix<f64> {
    DMatrix::from_fn(2 * a.nrows(), 2 * a.ncols(), |r, c| {
        let v = a[(r / 2, c / 2)];
        match (r % 2, c % 2) {
            (0, 0) | (1, 1) => v.re,
            (0, 1) => -v.im,
            _ => v.im,
        }
    })
}

/// Generator for an independent, reproducible substream.
pub fn substream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
