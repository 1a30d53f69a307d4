//! First-principles cross-checks of the protocol formulas.
//!
//! Each check prepares TMSS signal-idler pairs, pushes the signal modes
//! through the channel's beam-splitter dilation with [`gaussian_propagate`],
//! and compares the resulting moments with the closed forms in
//! [`super::protocols`].

use num_complex::Complex64;
use rand::Rng;

use super::gaussian::{gaussian_propagate, GaussianState, LinearTransform, ThermalBath};
use super::{eigen_channels, pmimo_interference, tmss_moments, InterferenceModel, QiParams};
use crate::channel::{decompose_channel, noise_loading, ChannelMatrix, DEFAULT_RANK_TOLERANCE};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::rng::substream;

/// Deviations found by [`emimo_oracle`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EmimoCheck {
    /// Largest covariance entry coupling different eigen-branches.
    pub max_cross_branch: f64,
    /// Largest photon-number or signal-idler correlation mismatch against
    /// the eigen-channel prediction.
    pub max_moment_deviation: f64,
}

/// E-MIMO: precode with `V`, beamform with `U†`, one TMSS per eigen-channel.
pub fn emimo_oracle(cm: &ChannelMatrix, q: &QiParams, symbol_phase: f64) -> Result<EmimoCheck> {
    let channels = eigen_channels(cm)?;
    let loading = noise_loading(cm)?;
    let r = channels.len();
    let (n_tx, n_rx) = (cm.n_tx(), cm.n_rx());
    let symbol = Complex64::from_polar(1.0, -symbol_phase);

    let active: Vec<usize> = (0..r).collect();
    let input = GaussianState::tmss_bank(n_tx, &active, q.signal_photons);
    let beamformer = cm.u().adjoint();
    let transform = LinearTransform {
        signal_map: &beamformer * cm.entries() * cm.v() * symbol,
        noise_map: &beamformer * (cm.u() * loading.matrix()),
    };
    let out = gaussian_propagate(&input, &transform, &ThermalBath::Uniform(q.noise_photons))?;

    let c = tmss_moments(q.signal_photons)?.cross_correlation;
    let idler = |m: usize| n_rx + m;
    let mut check = EmimoCheck::default();
    for m in 0..n_rx {
        let (eta, loss) = channels
            .get(m)
            .map(|ch| (ch.transmissivity, ch.noise_coefficient))
            .unwrap_or((0.0, 1.0));
        let photons = eta * q.signal_photons + loss * loss * q.noise_photons;
        let mut dev = (out.photon_number(m) - photons).abs();
        if m < r {
            let corr = symbol * eta.sqrt() * c;
            dev = dev.max((out.moment_aa(m, idler(m)) - corr).norm());
        }
        check.max_moment_deviation = check.max_moment_deviation.max(dev);
    }
    let total = out.mode_count();
    for a in 0..total {
        for b in 0..total {
            let partners = a == b || (a < r && b == idler(a)) || (b < r && a == idler(b));
            if !partners {
                check.max_cross_branch = check.max_cross_branch.max(out.block_max(a, b));
            }
        }
    }
    Ok(check)
}

/// Deviations found by [`pmimo_oracle`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PmimoCheck {
    /// Received photons with all transmitters on, against
    /// `N_{I,m} + N_S |h_mm|²`.
    pub max_received_deviation: f64,
    /// Received photons with transmitter `m` silenced, against `N_{I,m}`.
    pub max_interference_deviation: f64,
}

/// P-MIMO: one independent TMSS per transmit antenna, channel applied as is.
///
/// The thermal modes behind the loss coupling are brightened to
/// `N_Z / (1 − η_k)` so every receive antenna sees exactly `N_Z` background
/// photons. Independent sources add in power, so the comparison uses the
/// incoherent interference sum.
pub fn pmimo_oracle(cm: &ChannelMatrix, q: &QiParams) -> Result<PmimoCheck> {
    let loading = noise_loading(cm)?;
    let n = cm.n_rx();
    if cm.n_tx() != n {
        return Err(Error::ProtocolMismatch("P-MIMO oracle needs a square channel".into()));
    }
    let occupancies = loading
        .coefficients
        .iter()
        .map(|&s| {
            if s > 0.0 {
                Ok(q.noise_photons / (s * s))
            } else {
                Err(Error::Input(
                    "lossless eigen-channel cannot carry a thermal background".into(),
                ))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let bath = ThermalBath::PerMode(occupancies);
    let transform = LinearTransform {
        signal_map: cm.entries().clone(),
        noise_map: cm.u() * loading.matrix(),
    };

    let mut check = PmimoCheck::default();
    let all: Vec<usize> = (0..n).collect();
    let out = gaussian_propagate(
        &GaussianState::tmss_bank(n, &all, q.signal_photons),
        &transform,
        &bath,
    )?;
    for m in 0..n {
        let direct = cm.entries()[(m, m)].norm_sqr() * q.signal_photons;
        let expected = pmimo_interference(cm, q, m, InterferenceModel::Incoherent)? + direct;
        check.max_received_deviation = check
            .max_received_deviation
            .max((out.photon_number(m) - expected).abs());

        let others: Vec<usize> = (0..n).filter(|&k| k != m).collect();
        let silenced = gaussian_propagate(
            &GaussianState::tmss_bank(n, &others, q.signal_photons),
            &transform,
            &bath,
        )?;
        let expected = pmimo_interference(cm, q, m, InterferenceModel::Incoherent)?;
        check.max_interference_deviation = check
            .max_interference_deviation
            .max((silenced.photon_number(m) - expected).abs());
    }
    Ok(check)
}

/// Aggregate of [`run_oracle_suite`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OracleSummary {
    pub channels: usize,
    pub emimo: EmimoCheck,
    pub pmimo: PmimoCheck,
}

/// A random physical channel: complex Gaussian entries rescaled to spectral
/// norm `target_norm`.
pub fn random_physical_channel<R: Rng + ?Sized>(
    n_rx: usize,
    n_tx: usize,
    target_norm: f64,
    rng: &mut R,
) -> Result<ChannelMatrix> {
    let h = CMatrix::from_fn(n_rx, n_tx, |_, _| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    let norm = decompose_channel(h.clone(), DEFAULT_RANK_TOLERANCE)?.spectral_norm();
    decompose_channel(h * Complex64::new(target_norm / norm, 0.0), DEFAULT_RANK_TOLERANCE)
}

/// Run both oracles over `count` random square channels of size 1…8.
pub fn run_oracle_suite(count: usize, seed: u64, q: &QiParams) -> Result<OracleSummary> {
    let mut summary = OracleSummary::default();
    for i in 0..count {
        let mut rng = substream(seed, i as u64);
        let n = 1 + i % 8;
        let norm = rng.random_range(0.05..0.95);
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        let cm = random_physical_channel(n, n, norm, &mut rng)?;
        let e = emimo_oracle(&cm, q, phase)?;
        let p = pmimo_oracle(&cm, q)?;
        summary.channels += 1;
        summary.emimo.max_cross_branch = summary.emimo.max_cross_branch.max(e.max_cross_branch);
        summary.emimo.max_moment_deviation = summary.emimo.max_moment_deviation.max(e.max_moment_deviation);
        summary.pmimo.max_received_deviation =
            summary.pmimo.max_received_deviation.max(p.max_received_deviation);
        summary.pmimo.max_interference_deviation =
            summary.pmimo.max_interference_deviation.max(p.max_interference_deviation);
    }
    Ok(summary)
}
