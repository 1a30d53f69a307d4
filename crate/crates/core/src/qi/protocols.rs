use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{chernoff_ber, siso_snr, QiParams};
use crate::channel::ChannelMatrix;
use crate::csv;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Protocol {
    Siso,
    /// Parallel transceiver pairs, each receiver measured separately.
    PMimo,
    /// Precoder `V` and beamformer `U†` exposing the eigen-channels.
    EMimo,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Siso => "siso",
            Protocol::PMimo => "p-mimo",
            Protocol::EMimo => "e-mimo",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "siso" => Ok(Protocol::Siso),
            "p-mimo" => Ok(Protocol::PMimo),
            "e-mimo" => Ok(Protocol::EMimo),
            other => Err(Error::Input(format!("unknown protocol `{other}`"))),
        }
    }
}

/// How interfering transmitters add up at a P-MIMO receiver.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterferenceModel {
    /// `|Σ_{n≠m} h_mn|²`: amplitudes add before squaring.
    #[default]
    Coherent,
    /// `Σ_{n≠m} |h_mn|²`: independent sources add in power.
    Incoherent,
}

impl FromStr for InterferenceModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coherent" => Ok(InterferenceModel::Coherent),
            "incoherent" => Ok(InterferenceModel::Incoherent),
            other => Err(Error::Input(format!(
                "unknown interference model `{other}` (expected coherent or incoherent)"
            ))),
        }
    }
}

fn require_paired(cm: &ChannelMatrix) -> Result<()> {
    if cm.n_rx() != cm.n_tx() {
        return Err(Error::ProtocolMismatch(format!(
            "P-MIMO pairs transmitters with receivers and needs N_t = N_r, got {}x{}",
            cm.n_rx(),
            cm.n_tx()
        )));
    }
    Ok(())
}

/// Effective noise photons `N_{I,m}` at receiver `m` (0-based) when every
/// other transmitter is active.
pub fn pmimo_interference(
    cm: &ChannelMatrix,
    q: &QiParams,
    m: usize,
    model: InterferenceModel,
) -> Result<f64> {
    require_paired(cm)?;
    if m >= cm.n_rx() {
        return Err(Error::Input(format!(
            "receiver index {m} out of range for N_r = {}",
            cm.n_rx()
        )));
    }
    let row = cm.entries().row(m);
    let others = row.iter().enumerate().filter(|&(n, _)| n != m).map(|(_, h)| *h);
    let leak = match model {
        InterferenceModel::Coherent => others.sum::<num_complex::Complex64>().norm_sqr(),
        InterferenceModel::Incoherent => others.map(|h| h.norm_sqr()).sum(),
    };
    Ok(leak * q.signal_photons + q.noise_photons)
}

/// P-MIMO SNR with maximal-ratio combining, `β_P = Σ_m N_S |h_mm|² / N_{I,m}`.
pub fn pmimo_snr(cm: &ChannelMatrix, q: &QiParams, model: InterferenceModel) -> Result<f64> {
    require_paired(cm)?;
    let mut total = 0.0;
    for m in 0..cm.n_rx() {
        let direct = cm.entries()[(m, m)].norm_sqr();
        total += q.signal_photons * direct / pmimo_interference(cm, q, m, model)?;
    }
    Ok(q.receiver.snr_factor() * total)
}

/// Ensemble-symmetric P-MIMO figures under `trace[H H†] = r N_r η`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PMimoEnsemble {
    pub snr: f64,
    /// `M_P / M`.
    pub mode_ratio: f64,
}

pub fn pmimo_snr_ensemble(n_tx: usize, n_rx: usize, rank: usize, snr: f64) -> Result<PMimoEnsemble> {
    if n_tx == 0 || n_tx != n_rx {
        return Err(Error::ProtocolMismatch(format!(
            "P-MIMO needs N_t = N_r >= 1, got N_t = {n_tx}, N_r = {n_rx}"
        )));
    }
    if rank == 0 || rank > n_tx {
        return Err(Error::Input(format!("rank {rank} outside 1..={n_tx}")));
    }
    if !(snr.is_finite() && snr >= 0.0) {
        return Err(Error::domain("beta", snr, "finite and >= 0"));
    }
    let coupling = rank as f64 / n_tx as f64;
    let denom = (n_tx - 1) as f64 * coupling * snr + 1.0;
    let mode_ratio = n_rx as f64 * coupling / denom;
    Ok(PMimoEnsemble {
        snr: mode_ratio * snr,
        mode_ratio,
    })
}

/// E-MIMO SNR `β_E = trace[H H†] N_S / N_Z`.
pub fn emimo_snr(cm: &ChannelMatrix, q: &QiParams) -> Result<f64> {
    cm.require_physical()?;
    Ok(q.receiver.snr_factor() * cm.trace_hh() * q.signal_photons / q.noise_photons)
}

/// E-MIMO SNR summed over the eigen-channel transmissivities.
pub fn emimo_snr_from_singular_values(cm: &ChannelMatrix, q: &QiParams) -> Result<f64> {
    cm.require_physical()?;
    let total: f64 = cm.transmissivities().iter().sum();
    Ok(q.receiver.snr_factor() * total * q.signal_photons / q.noise_photons)
}

/// SNR advantage of E-MIMO over P-MIMO, `β_E / β_P = (N_t − 1) r β + N_t`.
pub fn relative_gain(n_tx: usize, rank: usize, snr: f64) -> Result<f64> {
    if n_tx == 0 || rank == 0 {
        return Err(Error::Input("N_t and r must be >= 1".into()));
    }
    if !(snr.is_finite() && snr >= 0.0) {
        return Err(Error::domain("beta", snr, "finite and >= 0"));
    }
    Ok((n_tx - 1) as f64 * rank as f64 * snr + n_tx as f64)
}

/// One eigen-channel `a_R = √η a_S + √(1 − η) a_Z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenChannel {
    pub transmissivity: f64,
    pub noise_coefficient: f64,
}

/// The `r` parallel eigen-channels of a physical channel, strongest first.
pub fn eigen_channels(cm: &ChannelMatrix) -> Result<Vec<EigenChannel>> {
    cm.require_physical()?;
    Ok(cm.singular_values()[..cm.rank()]
        .iter()
        .map(|s| {
            let eta = (s * s).min(1.0);
            EigenChannel {
                transmissivity: eta,
                noise_coefficient: (1.0 - eta).sqrt(),
            }
        })
        .collect())
}

/// Per-protocol SNR, BER and virtual-mode figures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolReport {
    pub protocol: Protocol,
    pub snr: f64,
    pub ber: f64,
    /// `M_X / M` relative to the SISO baseline.
    pub mode_ratio: f64,
    pub log_mode_gain: f64,
}

impl ProtocolReport {
    pub const CSV_HEADER: &'static str = "protocol,beta,ber,mode_ratio,log10_mode_gain";

    pub fn new(protocol: Protocol, snr: f64, baseline_snr: f64, modes: f64) -> Result<Self> {
        if baseline_snr.is_nan() || baseline_snr <= 0.0 {
            return Err(Error::domain("baseline beta", baseline_snr, "> 0"));
        }
        let mode_ratio = snr / baseline_snr;
        Ok(Self {
            protocol,
            snr,
            ber: chernoff_ber(snr, modes)?,
            mode_ratio,
            log_mode_gain: mode_ratio.log10(),
        })
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.protocol,
            csv::float(self.snr),
            csv::float(self.ber),
            csv::float(self.mode_ratio),
            csv::float(self.log_mode_gain)
        )
    }
}

/// SISO, P-MIMO (square channels only) and E-MIMO reports for one channel,
/// using a SISO link of transmissivity `eta` as the baseline.
pub fn link_reports(
    cm: &ChannelMatrix,
    eta: f64,
    q: &QiParams,
    model: InterferenceModel,
) -> Result<Vec<ProtocolReport>> {
    let baseline = siso_snr(eta, q)?;
    let mut out = vec![ProtocolReport::new(Protocol::Siso, baseline, baseline, q.modes)?];
    if cm.n_rx() == cm.n_tx() {
        out.push(ProtocolReport::new(
            Protocol::PMimo,
            pmimo_snr(cm, q, model)?,
            baseline,
            q.modes,
        )?);
    }
    out.push(ProtocolReport::new(
        Protocol::EMimo,
        emimo_snr(cm, q)?,
        baseline,
        q.modes,
    )?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{decompose_channel, DEFAULT_RANK_TOLERANCE};
    use crate::linalg::CMatrix;
    use crate::qi::Receiver;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn q() -> QiParams {
        QiParams::new(0.01, 100.0, 1e9, Receiver::ZhuangRx).unwrap()
    }

    fn cm(h: CMatrix) -> ChannelMatrix {
        decompose_channel(h, DEFAULT_RANK_TOLERANCE).unwrap()
    }

    fn scaled_identity(n: usize, eta: f64) -> ChannelMatrix {
        cm(CMatrix::identity(n, n) * Complex64::new(eta.sqrt(), 0.0))
    }

    #[test]
    fn diagonal_channel_has_no_interference() {
        let c = scaled_identity(4, 1e-5);
        for m in 0..4 {
            assert_eq!(pmimo_interference(&c, &q(), m, InterferenceModel::Coherent).unwrap(), 100.0);
        }
    }

    #[test]
    fn single_off_diagonal_term() {
        let h0 = Complex64::new(0.01, -0.02);
        let mut h = CMatrix::zeros(2, 2);
        h[(0, 1)] = h0;
        let c = cm(h);
        for model in [InterferenceModel::Coherent, InterferenceModel::Incoherent] {
            let n = pmimo_interference(&c, &q(), 0, model).unwrap();
            assert_relative_eq!(n, h0.norm_sqr() * 0.01 + 100.0, max_relative = 1e-15);
        }
    }

    #[test]
    fn coherent_and_incoherent_differ_on_in_phase_rows() {
        let h = CMatrix::from_element(3, 3, Complex64::new(0.1, 0.0));
        let c = cm(h);
        let coh = pmimo_interference(&c, &q(), 0, InterferenceModel::Coherent).unwrap();
        let inc = pmimo_interference(&c, &q(), 0, InterferenceModel::Incoherent).unwrap();
        assert_relative_eq!(coh, 100.0 + 0.04 * 0.01, max_relative = 1e-14);
        assert_relative_eq!(inc, 100.0 + 0.02 * 0.01, max_relative = 1e-14);
    }

    #[test]
    fn siso_reduction() {
        let eta: f64 = 1e-5;
        let c = cm(CMatrix::from_element(1, 1, Complex64::new(eta.sqrt(), 0.0)));
        let bp = pmimo_snr(&c, &q(), InterferenceModel::Coherent).unwrap();
        assert_relative_eq!(bp, siso_snr(eta, &q()).unwrap(), max_relative = 1e-14);
    }

    #[test]
    fn diagonal_pmimo_and_emimo() {
        let eta = 1e-5;
        let c = scaled_identity(5, eta);
        let expected = 5.0 * eta * 0.01 / 100.0;
        assert_relative_eq!(
            pmimo_snr(&c, &q(), InterferenceModel::Coherent).unwrap(),
            expected,
            max_relative = 1e-14
        );
        assert_relative_eq!(emimo_snr(&c, &q()).unwrap(), expected, max_relative = 1e-14);
        assert_eq!(eigen_channels(&c).unwrap().len(), 5);
    }

    #[test]
    fn pmimo_requires_square() {
        let c = cm(CMatrix::zeros(2, 3));
        assert!(matches!(
            pmimo_snr(&c, &q(), InterferenceModel::Coherent),
            Err(Error::ProtocolMismatch(_))
        ));
        let sq = scaled_identity(2, 0.1);
        assert!(pmimo_interference(&sq, &q(), 2, InterferenceModel::Coherent).is_err());
    }

    #[test]
    fn ensemble_closed_forms() {
        assert_relative_eq!(pmimo_snr_ensemble(1, 1, 1, 1e-3).unwrap().snr, 1e-3, max_relative = 1e-15);
        let e = pmimo_snr_ensemble(8, 8, 8, 1e-3).unwrap();
        assert_relative_eq!(e.snr, 7.944_389_275_074_478e-3, max_relative = 1e-14);
        // large-array limit r / (r β + 1)
        let (r, beta) = (3, 0.2);
        let limit = r as f64 / (r as f64 * beta + 1.0);
        let big = pmimo_snr_ensemble(1_000_000, 1_000_000, r, beta).unwrap();
        assert_relative_eq!(big.mode_ratio, limit, max_relative = 1e-5);
        assert!(pmimo_snr_ensemble(4, 3, 1, 0.1).is_err());
        assert!(pmimo_snr_ensemble(4, 4, 5, 0.1).is_err());
    }

    #[test]
    fn relative_gain_closed_form() {
        assert_eq!(relative_gain(1, 3, 0.5).unwrap(), 1.0);
        assert_eq!(relative_gain(8, 8, 0.0).unwrap(), 8.0);
        assert_relative_eq!(relative_gain(8, 8, 1e-3).unwrap(), 8.056, max_relative = 1e-15);
        // β_E / β_P with β_E = r N_r β
        let beta = 1e-3;
        let be = 8.0 * 8.0 * beta;
        let bp = pmimo_snr_ensemble(8, 8, 8, beta).unwrap().snr;
        assert_relative_eq!(be / bp, 8.056, max_relative = 1e-14);
    }

    #[test]
    fn zero_channel() {
        let c = cm(CMatrix::zeros(3, 3));
        assert_eq!(emimo_snr(&c, &q()).unwrap(), 0.0);
        assert!(eigen_channels(&c).unwrap().is_empty());
    }

    #[test]
    fn rank_one_eigen_channel_carries_the_trace() {
        let u = CMatrix::from_column_slice(3, 1, &[Complex64::new(0.1, 0.0), Complex64::new(0.0, 0.2), Complex64::new(-0.1, 0.1)]);
        let v = CMatrix::from_column_slice(2, 1, &[Complex64::new(0.3, 0.1), Complex64::new(0.2, -0.4)]);
        let c = cm(&u * v.adjoint());
        let ch = eigen_channels(&c).unwrap();
        assert_eq!(ch.len(), 1);
        assert_relative_eq!(ch[0].transmissivity, c.trace_hh(), max_relative = 1e-13);
    }

    #[test]
    fn report_row() {
        let r = ProtocolReport::new(Protocol::EMimo, 64e-9, 1e-9, 1e6).unwrap();
        assert_relative_eq!(r.mode_ratio, 64.0, max_relative = 1e-15);
        assert_eq!(r.csv_row().split(',').count(), 5);
        assert!(r.csv_row().starts_with("e-mimo,"));
    }

    #[test]
    fn receiver_scales_all_protocols() {
        let c = scaled_identity(3, 1e-4);
        let z = q();
        let g = QiParams { receiver: Receiver::GuhaRx, ..z };
        let rz = link_reports(&c, 1e-4, &z, InterferenceModel::Coherent).unwrap();
        let rg = link_reports(&c, 1e-4, &g, InterferenceModel::Coherent).unwrap();
        for (a, b) in rz.iter().zip(&rg) {
            assert_relative_eq!(a.snr, 2.0 * b.snr, max_relative = 1e-15);
            assert_relative_eq!(a.mode_ratio, b.mode_ratio, max_relative = 1e-15);
        }
    }
}
