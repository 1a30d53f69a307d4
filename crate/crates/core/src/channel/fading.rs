//! Double-Rayleigh (keyhole) fading.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::matrix::{decompose_channel, ChannelMatrix, DEFAULT_RANK_TOLERANCE};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::rng::substream;

/// Resampling cap for a single draw before giving up.
pub const MAX_RESAMPLES: usize = 10_000;

/// Double-Rayleigh ensemble `H = H_r H_t` with `N_b` tag antennas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingSpec {
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_tag: usize,
    /// Reference round-trip transmissivity; `E{trace[H H†]} = N_b N_r η`.
    pub reference_rtt: f64,
    pub seed: u64,
}

impl FadingSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_tx == 0 || self.n_rx == 0 || self.n_tag == 0 {
            return Err(Error::Input("antenna counts must be positive".into()));
        }
        if self.n_tag > self.n_tx.min(self.n_rx) {
            return Err(Error::Input(format!(
                "tag antennas ({}) must not exceed min(n_tx, n_rx) = {}",
                self.n_tag,
                self.n_tx.min(self.n_rx)
            )));
        }
        if !(self.reference_rtt > 0.0 && self.reference_rtt < 1.0) {
            return Err(Error::domain("eta", self.reference_rtt, "0 < eta < 1"));
        }
        Ok(())
    }

    /// Per-entry variance `σ² = √(η / N_t)` of both factors.
    pub fn entry_variance(&self) -> f64 {
        (self.reference_rtt / self.n_tx as f64).sqrt()
    }

    /// Draw number `index` of this ensemble, reproducible from `(seed, index)`.
    pub fn draw(&self, index: u64) -> Result<FadingSample> {
        sample_double_rayleigh(self, &mut substream(self.seed, index))
    }
}

/// A physical fading draw plus the number of non-physical draws discarded
/// on the way.
#[derive(Debug, Clone)]
pub struct FadingSample {
    pub channel: ChannelMatrix,
    pub rejected: usize,
}

fn gaussian_matrix<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    normal: &Normal<f64>,
    rng: &mut R,
) -> CMatrix {
    // column-major fill order is part of the reproducibility contract
    CMatrix::from_fn(rows, cols, |_, _| {
        let re = normal.sample(rng);
        let im = normal.sample(rng);
        Complex64::new(re, im)
    })
}

/// Sample `H = H_r H_t` with i.i.d. circularly-symmetric complex Gaussian
/// factor entries, resampling draws whose spectral norm exceeds one.
pub fn sample_double_rayleigh<R: Rng + ?Sized>(spec: &FadingSpec, rng: &mut R) -> Result<FadingSample> {
    spec.validate()?;
    let quadrature_sd = (spec.entry_variance() / 2.0).sqrt();
    let normal = Normal::new(0.0, quadrature_sd).expect("positive deviation");
    for rejected in 0..MAX_RESAMPLES {
        let ht = gaussian_matrix(spec.n_tag, spec.n_tx, &normal, rng);
        let hr = gaussian_matrix(spec.n_rx, spec.n_tag, &normal, rng);
        let channel = decompose_channel(hr * ht, DEFAULT_RANK_TOLERANCE)?;
        if channel.is_physical() {
            if rejected > 0 {
                log::debug!("double-Rayleigh draw accepted after {rejected} rejections");
            }
            return Ok(FadingSample { channel, rejected });
        }
    }
    Err(Error::ExcessiveRejections {
        rejected: MAX_RESAMPLES,
        trials: 1,
    })
}
