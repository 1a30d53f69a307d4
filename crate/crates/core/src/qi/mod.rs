//! Quantum-illumination link performance.
//!
//! All protocol SNRs are Chernoff exponents: the bit error probability after
//! `M` modes is `exp(−β M)`. A protocol with SNR `β_X` is therefore worth
//! `M_X / M = β_X / β` virtual modes relative to the SISO link with SNR `β`.

pub mod gaussian;
pub mod oracle;
mod protocols;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use protocols::{
    eigen_channels, emimo_snr, emimo_snr_from_singular_values, link_reports, pmimo_interference,
    pmimo_snr, pmimo_snr_ensemble, relative_gain, EigenChannel, InterferenceModel, PMimoEnsemble,
    Protocol, ProtocolReport,
};

/// Receiver families and their SNR relative to the optimal QI receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Receiver {
    /// Coherent-state transmitter with heterodyne detection.
    #[serde(rename = "classical", alias = "classical-heterodyne")]
    ClassicalHeterodyne,
    /// Two-mode-interaction QI receiver (3 dB over classical).
    #[serde(rename = "guha", alias = "guha-rx")]
    GuhaRx,
    /// Three-mode-interaction QI receiver (6 dB over classical).
    #[serde(rename = "zhuang", alias = "zhuang-rx")]
    ZhuangRx,
}

impl Receiver {
    pub const ALL: [Receiver; 3] = [
        Receiver::ClassicalHeterodyne,
        Receiver::GuhaRx,
        Receiver::ZhuangRx,
    ];

    /// Multiplier on `η N_S / N_Z`.
    pub fn snr_factor(self) -> f64 {
        match self {
            Receiver::ClassicalHeterodyne => 0.25,
            Receiver::GuhaRx => 0.5,
            Receiver::ZhuangRx => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Receiver::ClassicalHeterodyne => "classical",
            Receiver::GuhaRx => "guha",
            Receiver::ZhuangRx => "zhuang",
        }
    }
}

impl fmt::Display for Receiver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Receiver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "classical" | "classical-heterodyne" | "heterodyne" => Ok(Receiver::ClassicalHeterodyne),
            "guha" | "guha-rx" => Ok(Receiver::GuhaRx),
            "zhuang" | "zhuang-rx" => Ok(Receiver::ZhuangRx),
            other => Err(Error::Input(format!(
                "unknown receiver `{other}` (expected classical, guha or zhuang)"
            ))),
        }
    }
}

/// Quantum-illumination operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QiParams {
    /// Mean signal photons per mode, `N_S`.
    pub signal_photons: f64,
    /// Mean thermal photons per mode, `N_Z`.
    pub noise_photons: f64,
    /// Mode count `M = W T`.
    pub modes: f64,
    pub receiver: Receiver,
}

impl QiParams {
    pub fn new(signal_photons: f64, noise_photons: f64, modes: f64, receiver: Receiver) -> Result<Self> {
        for (name, v) in [
            ("signal_photons", signal_photons),
            ("noise_photons", noise_photons),
            ("modes", modes),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(name, v, "finite and > 0"));
            }
        }
        let q = Self {
            signal_photons,
            noise_photons,
            modes,
            receiver,
        };
        if let Some(w) = q.operating_point_warning() {
            log::warn!("{w}");
        }
        Ok(q)
    }

    /// The SNR formulas assume `N_S ≪ 1` and `N_Z ≫ 1`.
    pub fn operating_point_warning(&self) -> Option<String> {
        let mut issues = Vec::new();
        if self.signal_photons >= 1.0 {
            issues.push(format!("N_S = {} is not << 1", self.signal_photons));
        }
        if self.noise_photons <= 1.0 {
            issues.push(format!("N_Z = {} is not >> 1", self.noise_photons));
        }
        (!issues.is_empty()).then(|| format!("outside the QI operating point: {}", issues.join(", ")))
    }
}

/// Second moments of the two-mode squeezed vacuum with `N_S` photons per mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TmssMoments {
    pub signal_mean_photons: f64,
    pub idler_mean_photons: f64,
    /// `⟨a_S a_I⟩ = √(N_S (N_S + 1))`.
    pub cross_correlation: f64,
    /// `⟨a_S† a_I⟩`, zero for the TMSS.
    pub phase_insensitive_cross: f64,
}

pub fn tmss_moments(signal_photons: f64) -> Result<TmssMoments> {
    if !(signal_photons.is_finite() && signal_photons > 0.0) {
        return Err(Error::domain("signal_photons", signal_photons, "finite and > 0"));
    }
    Ok(TmssMoments {
        signal_mean_photons: signal_photons,
        idler_mean_photons: signal_photons,
        cross_correlation: (signal_photons * (signal_photons + 1.0)).sqrt(),
        phase_insensitive_cross: 0.0,
    })
}

/// SISO SNR `β` for transmissivity `η` and the receiver in `q`.
pub fn siso_snr(eta: f64, q: &QiParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::domain("eta", eta, "0 <= eta <= 1"));
    }
    Ok(q.receiver.snr_factor() * eta * q.signal_photons / q.noise_photons)
}

/// Chernoff bit error probability `exp(−β M)`.
pub fn chernoff_ber(snr: f64, modes: f64) -> Result<f64> {
    if !(snr.is_finite() && snr >= 0.0) {
        return Err(Error::domain("beta", snr, "finite and >= 0"));
    }
    if !(modes.is_finite() && modes > 0.0) {
        return Err(Error::domain("modes", modes, "finite and > 0"));
    }
    Ok((-snr * modes).exp())
}

/// Modes needed to reach `target_ber`, `M = −ln(P) / β`.
pub fn modes_for_ber(snr: f64, target_ber: f64) -> Result<f64> {
    if !(snr.is_finite() && snr > 0.0) {
        return Err(Error::domain("beta", snr, "finite and > 0"));
    }
    if !(target_ber > 0.0 && target_ber < 1.0) {
        return Err(Error::domain("target_ber", target_ber, "0 < p < 1"));
    }
    Ok(-target_ber.ln() / snr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params(receiver: Receiver) -> QiParams {
        QiParams::new(0.01, 100.0, 1e9, receiver).unwrap()
    }

    #[test]
    fn tmss_closed_forms() {
        assert_relative_eq!(tmss_moments(1.0).unwrap().cross_correlation, 2f64.sqrt());
        assert_relative_eq!(
            tmss_moments(0.01).unwrap().cross_correlation,
            0.100_498_756_211_208_9,
            max_relative = 1e-15
        );
        assert!(tmss_moments(1e-300).unwrap().cross_correlation < 1e-149);
        assert!(tmss_moments(0.0).is_err());
        assert!(tmss_moments(-1.0).is_err());
    }

    proptest! {
        #[test]
        fn tmss_is_nonclassical(ns in 1e-6f64..10.0) {
            let m = tmss_moments(ns).unwrap();
            prop_assert!(m.cross_correlation > m.signal_mean_photons);
            let excess = m.cross_correlation.powi(2) - ns * ns;
            prop_assert!((excess - ns).abs() <= 1e-12 * ns.max(1.0) * (ns + 1.0));
        }

        #[test]
        fn ber_factorises_over_modes(beta in 0.0f64..1e-3, m1 in 1.0f64..1e3, m2 in 1.0f64..1e3) {
            let joint = chernoff_ber(beta, m1 + m2).unwrap();
            let split = chernoff_ber(beta, m1).unwrap() * chernoff_ber(beta, m2).unwrap();
            prop_assert!((joint - split).abs() <= 1e-15);
        }
    }

    #[test]
    fn receiver_ratios() {
        let z = siso_snr(1e-5, &params(Receiver::ZhuangRx)).unwrap();
        let g = siso_snr(1e-5, &params(Receiver::GuhaRx)).unwrap();
        let c = siso_snr(1e-5, &params(Receiver::ClassicalHeterodyne)).unwrap();
        assert_relative_eq!(z, 1e-9, max_relative = 1e-15);
        assert_eq!(z, 2.0 * g);
        assert_eq!(z, 4.0 * c);
        for r in Receiver::ALL {
            assert_eq!(siso_snr(0.0, &params(r)).unwrap(), 0.0);
        }
    }

    #[test]
    fn ber_special_points() {
        assert_eq!(chernoff_ber(0.0, 1e6).unwrap(), 1.0);
        assert_relative_eq!(chernoff_ber(2f64.ln() / 1e6, 1e6).unwrap(), 0.5, max_relative = 1e-15);
        assert_relative_eq!(chernoff_ber(1e-9, 1e9).unwrap(), (-1.0f64).exp(), max_relative = 1e-15);
        assert!(chernoff_ber(-1.0, 1.0).is_err());
        assert!(chernoff_ber(1.0, 0.0).is_err());
    }

    #[test]
    fn ber_monotone() {
        assert!(chernoff_ber(2e-9, 1e9).unwrap() < chernoff_ber(1e-9, 1e9).unwrap());
        assert!(chernoff_ber(1e-9, 2e9).unwrap() < chernoff_ber(1e-9, 1e9).unwrap());
    }

    #[test]
    fn modes_for_target() {
        assert_relative_eq!(
            modes_for_ber(1e-9, 1e-3).unwrap(),
            6_907_755_278.982_137,
            max_relative = 1e-14
        );
    }

    #[test]
    fn operating_point_warning() {
        assert!(params(Receiver::ZhuangRx).operating_point_warning().is_none());
        let q = QiParams::new(2.0, 0.5, 1.0, Receiver::GuhaRx).unwrap();
        let w = q.operating_point_warning().unwrap();
        assert!(w.contains("N_S") && w.contains("N_Z"));
        assert!(QiParams::new(0.0, 1.0, 1.0, Receiver::GuhaRx).is_err());
    }

    #[test]
    fn receiver_names_parse() {
        for r in Receiver::ALL {
            assert_eq!(r.name().parse::<Receiver>().unwrap(), r);
        }
        assert!("optimal".parse::<Receiver>().is_err());
    }
}
