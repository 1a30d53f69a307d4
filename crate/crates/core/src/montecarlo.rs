//! Rank sweeps over deterministic and double-Rayleigh channel ensembles.
//!
//! For each channel rank `r = N_b` and each trial the sweep evaluates the
//! virtual-mode ratios `M_P / M = β_P(H) / β` and `M_E / M = β_E(H) / β`
//! against the SISO SNR `β` of a deterministic link with the reference
//! transmissivity `η`. Fading trials additionally draw a SISO double-Rayleigh
//! link from the same substream, giving the gain over a SISO link that fades
//! too.
//!
//! Trial `t` at rank `r` draws from substream `(seed, r, t)`, and per-trial
//! results are collected in trial order, so output is bit-identical for any
//! thread count.

use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{
    decompose_channel, sample_double_rayleigh, ChannelMatrix, FadingSpec, DEFAULT_RANK_TOLERANCE,
};
use crate::csv;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::qi::{emimo_snr, pmimo_snr, siso_snr, InterferenceModel, Protocol, QiParams};
use crate::rng::{substream, trial_stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelKind {
    Deterministic,
    DoubleRayleigh,
}

impl ChannelKind {
    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::Deterministic => "deterministic",
            ChannelKind::DoubleRayleigh => "double-rayleigh",
        }
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "deterministic" => Ok(ChannelKind::Deterministic),
            "double-rayleigh" | "rayleigh" | "fading" => Ok(ChannelKind::DoubleRayleigh),
            other => Err(Error::Input(format!(
                "unknown channel kind `{other}` (expected deterministic or double-rayleigh)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub n_tx: usize,
    pub n_rx: usize,
    pub rank_sweep: Vec<usize>,
    pub reference_rtt: f64,
    pub qi: QiParams,
    pub trials: usize,
    pub seed: u64,
    pub channel_kind: ChannelKind,
    pub interference: InterferenceModel,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_tx == 0 || self.n_tx != self.n_rx {
            return Err(Error::ProtocolMismatch(format!(
                "rank sweeps compare against P-MIMO and need N_t = N_r >= 1, got {}x{}",
                self.n_rx, self.n_tx
            )));
        }
        if self.rank_sweep.is_empty() {
            return Err(Error::Input("rank sweep is empty".into()));
        }
        let max_rank = self.n_tx.min(self.n_rx);
        if let Some(&r) = self.rank_sweep.iter().find(|&&r| r == 0 || r > max_rank) {
            return Err(Error::Input(format!("rank {r} outside 1..={max_rank}")));
        }
        if self.trials == 0 {
            return Err(Error::Input("trials must be >= 1".into()));
        }
        if !(self.reference_rtt > 0.0 && self.reference_rtt < 1.0) {
            return Err(Error::domain("eta", self.reference_rtt, "0 < eta < 1"));
        }
        Ok(())
    }

    /// SISO baseline SNR `β`.
    pub fn baseline_snr(&self) -> Result<f64> {
        siso_snr(self.reference_rtt, &self.qi)
    }
}

/// Deterministic rank-`r` channel with uniform coupling
/// `|h_mn|² = (r / N_t) η`, so `trace[H H†] = r N_r η`.
///
/// Entries are `√(r η / N_t) · exp(2πi (m mod r)(n mod r) / r)`: rows repeat
/// with period `r` and the first `r` rows are the `r`-point DFT, so the rank
/// is exactly `r`.
pub fn deterministic_channel(n_tx: usize, n_rx: usize, rank: usize, eta: f64) -> Result<ChannelMatrix> {
    if rank == 0 || rank > n_tx.min(n_rx) {
        return Err(Error::Input(format!(
            "rank {rank} outside 1..={}",
            n_tx.min(n_rx)
        )));
    }
    let amp = (rank as f64 * eta / n_tx as f64).sqrt();
    let h = CMatrix::from_fn(n_rx, n_tx, |m, n| {
        let k = ((m % rank) * (n % rank)) % rank;
        Complex64::from_polar(amp, std::f64::consts::TAU * k as f64 / rank as f64)
    });
    let cm = decompose_channel(h, DEFAULT_RANK_TOLERANCE)?;
    cm.require_physical()?;
    Ok(cm)
}

/// Right-continuous empirical CDF over distinct sample values.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    pub values: Vec<f64>,
    pub cumprob: Vec<f64>,
}

impl EmpiricalCdf {
    /// `F(x) = #{samples ≤ x} / n`.
    pub fn eval(&self, x: f64) -> f64 {
        let idx = self.values.partition_point(|&v| v <= x);
        if idx == 0 {
            0.0
        } else {
            self.cumprob[idx - 1]
        }
    }
}

pub fn empirical_cdf(samples: &[f64]) -> Result<EmpiricalCdf> {
    if samples.is_empty() {
        return Err(Error::Input("empirical CDF of an empty sample".into()));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::Input("empirical CDF needs finite samples".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut values = Vec::new();
    let mut cumprob = Vec::new();
    for (i, &x) in sorted.iter().enumerate() {
        if values.last() == Some(&x) {
            *cumprob.last_mut().expect("paired with values") = (i + 1) as f64 / n;
        } else {
            values.push(x);
            cumprob.push((i + 1) as f64 / n);
        }
    }
    Ok(EmpiricalCdf { values, cumprob })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleStats {
    pub mean: f64,
    /// `sample_std / √n`; zero for a single sample.
    pub stderr: f64,
}

pub fn sample_stats(xs: &[f64]) -> SampleStats {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let stderr = if xs.len() > 1 {
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    SampleStats { mean, stderr }
}

/// Per-rank, per-protocol ensemble statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub channel_kind: ChannelKind,
    pub rank: usize,
    pub protocol: Protocol,
    /// `M_X / M` per trial, in trial order.
    pub ratios: Vec<f64>,
    /// `𝔼{log₁₀(M_X / M)}` and its standard error.
    pub log_gain: SampleStats,
    /// `𝔼{M_X / M}` and its standard error.
    pub linear_gain: SampleStats,
    /// `𝔼{log₁₀(β_X / β_SISO)}` against a SISO link drawn from the same
    /// fading ensemble; equal to `log_gain` for deterministic channels.
    pub log_gain_vs_faded_siso: SampleStats,
    pub cdf: EmpiricalCdf,
    pub trials_used: usize,
    pub rejected_samples: usize,
}

impl EnsembleResult {
    pub fn log_gains(&self) -> Vec<f64> {
        self.ratios.iter().map(|r| r.log10()).collect()
    }

    /// Fraction of trials in which the protocol does worse than SISO.
    pub fn fraction_below_siso(&self) -> f64 {
        self.ratios.iter().filter(|&&r| r < 1.0).count() as f64 / self.ratios.len() as f64
    }
}

struct Trial {
    pmimo: f64,
    emimo: f64,
    /// `β_SISO,faded / β`.
    faded_siso: f64,
    rejected: usize,
}

fn run_trial(spec: &ExperimentSpec, rank: usize, trial: usize, baseline: f64) -> Result<Trial> {
    let fading = FadingSpec {
        n_tx: spec.n_tx,
        n_rx: spec.n_rx,
        n_tag: rank,
        reference_rtt: spec.reference_rtt,
        seed: spec.seed,
    };
    let mut rng = substream(spec.seed, trial_stream(rank as u64, trial as u64));
    let sample = sample_double_rayleigh(&fading, &mut rng)?;
    let siso_fading = FadingSpec {
        n_tx: 1,
        n_rx: 1,
        n_tag: 1,
        ..fading
    };
    let siso = sample_double_rayleigh(&siso_fading, &mut rng)?;
    let siso_snr_faded = siso_snr(siso.channel.trace_hh(), &spec.qi)?;
    Ok(Trial {
        pmimo: pmimo_snr(&sample.channel, &spec.qi, spec.interference)? / baseline,
        emimo: emimo_snr(&sample.channel, &spec.qi)? / baseline,
        faded_siso: siso_snr_faded / baseline,
        rejected: sample.rejected + siso.rejected,
    })
}

fn rank_point(spec: &ExperimentSpec, rank: usize, baseline: f64) -> Result<Vec<Trial>> {
    match spec.channel_kind {
        ChannelKind::Deterministic => {
            let cm = deterministic_channel(spec.n_tx, spec.n_rx, rank, spec.reference_rtt)?;
            Ok(vec![Trial {
                pmimo: pmimo_snr(&cm, &spec.qi, spec.interference)? / baseline,
                emimo: emimo_snr(&cm, &spec.qi)? / baseline,
                faded_siso: 1.0,
                rejected: 0,
            }])
        }
        ChannelKind::DoubleRayleigh => {
            let trials = (0..spec.trials)
                .into_par_iter()
                .map(|t| run_trial(spec, rank, t, baseline))
                .collect::<Result<Vec<_>>>()?;
            let rejected: usize = trials.iter().map(|t| t.rejected).sum();
            if rejected as f64 > 0.01 * spec.trials as f64 {
                return Err(Error::ExcessiveRejections {
                    rejected,
                    trials: spec.trials,
                });
            }
            if rejected > 0 {
                log::info!("rank {rank}: {rejected} non-physical draws resampled");
            }
            Ok(trials)
        }
    }
}

fn ensemble(
    spec: &ExperimentSpec,
    rank: usize,
    protocol: Protocol,
    trials: &[Trial],
) -> Result<EnsembleResult> {
    let ratios: Vec<f64> = trials
        .iter()
        .map(|t| match protocol {
            Protocol::PMimo => t.pmimo,
            _ => t.emimo,
        })
        .collect();
    let logs: Vec<f64> = ratios.iter().map(|r| r.log10()).collect();
    let vs_faded: Vec<f64> = ratios
        .iter()
        .zip(trials)
        .map(|(r, t)| (r / t.faded_siso).log10())
        .collect();
    Ok(EnsembleResult {
        channel_kind: spec.channel_kind,
        rank,
        protocol,
        log_gain: sample_stats(&logs),
        linear_gain: sample_stats(&ratios),
        log_gain_vs_faded_siso: sample_stats(&vs_faded),
        cdf: empirical_cdf(&logs)?,
        trials_used: trials.len(),
        rejected_samples: trials.iter().map(|t| t.rejected).sum(),
        ratios,
    })
}

/// Run a sweep on the current rayon pool.
pub fn run_rank_sweep(spec: &ExperimentSpec) -> Result<SweepOutput> {
    spec.validate()?;
    let baseline = spec.baseline_snr()?;
    let mut results = Vec::with_capacity(2 * spec.rank_sweep.len());
    for &rank in &spec.rank_sweep {
        let trials = rank_point(spec, rank, baseline)?;
        for protocol in [Protocol::PMimo, Protocol::EMimo] {
            results.push(ensemble(spec, rank, protocol, &trials)?);
        }
    }
    Ok(SweepOutput {
        channel_kind: spec.channel_kind,
        results,
    })
}

/// Run a sweep on a dedicated pool of `threads` workers.
pub fn run_rank_sweep_with_threads(spec: &ExperimentSpec, threads: usize) -> Result<SweepOutput> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Input(format!("thread pool: {e}")))?;
    pool.install(|| run_rank_sweep(spec))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub channel_kind: ChannelKind,
    pub results: Vec<EnsembleResult>,
}

impl SweepOutput {
    pub fn get(&self, rank: usize, protocol: Protocol) -> Option<&EnsembleResult> {
        self.results
            .iter()
            .find(|r| r.rank == rank && r.protocol == protocol)
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("channel_kind,rank,protocol,mean_log_gain,stderr,mean_linear_gain\n");
        for r in &self.results {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.channel_kind.name(),
                r.rank,
                r.protocol,
                csv::float(r.log_gain.mean),
                csv::float(r.log_gain.stderr),
                csv::float(r.linear_gain.mean)
            );
        }
        out
    }

    pub fn raw_csv(&self) -> String {
        let mut out = String::from("channel_kind,rank,protocol,trial,log10_mode_gain\n");
        for r in &self.results {
            for (t, x) in r.log_gains().iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.channel_kind.name(),
                    r.rank,
                    r.protocol,
                    t,
                    csv::float(*x)
                );
            }
        }
        out
    }

    pub fn cdf_csv(&self) -> String {
        let mut out = String::from("rank,protocol,value,cumprob\n");
        for r in &self.results {
            for (v, p) in r.cdf.values.iter().zip(&r.cdf.cumprob) {
                let _ = writeln!(out, "{},{},{},{}", r.rank, r.protocol, csv::float(*v), csv::float(*p));
            }
        }
        out
    }

    /// Gains against a SISO link in the same fading ensemble.
    pub fn faded_siso_csv(&self) -> String {
        let mut out = String::from(
            "channel_kind,rank,protocol,mean_log_gain_vs_faded_siso,stderr,fraction_below_siso\n",
        );
        for r in &self.results {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.channel_kind.name(),
                r.rank,
                r.protocol,
                csv::float(r.log_gain_vs_faded_siso.mean),
                csv::float(r.log_gain_vs_faded_siso.stderr),
                csv::float(r.fraction_below_siso())
            );
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankDominance {
    pub rank: usize,
    pub draws: usize,
    /// Trials with `M_E < M_P`.
    pub violations: usize,
    /// Fraction of trials with `M_P < M` (P-MIMO worse than SISO).
    pub pmimo_below_siso: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominanceReport {
    pub per_rank: Vec<RankDominance>,
}

impl DominanceReport {
    pub fn draws(&self) -> usize {
        self.per_rank.iter().map(|r| r.draws).sum()
    }

    pub fn violations(&self) -> usize {
        self.per_rank.iter().map(|r| r.violations).sum()
    }
}

/// Trial-by-trial comparison of paired P-MIMO and E-MIMO results.
pub fn dominance_check(results: &[EnsembleResult]) -> Result<DominanceReport> {
    let mut per_rank = Vec::new();
    for p in results.iter().filter(|r| r.protocol == Protocol::PMimo) {
        let e = results
            .iter()
            .find(|r| {
                r.protocol == Protocol::EMimo && r.rank == p.rank && r.channel_kind == p.channel_kind
            })
            .ok_or_else(|| Error::Input(format!("rank {}: P-MIMO result has no E-MIMO partner", p.rank)))?;
        if e.ratios.len() != p.ratios.len() {
            return Err(Error::Input(format!(
                "rank {}: {} P-MIMO trials vs {} E-MIMO trials",
                p.rank,
                p.ratios.len(),
                e.ratios.len()
            )));
        }
        let violations = p
            .ratios
            .iter()
            .zip(&e.ratios)
            .filter(|(bp, be)| be < bp)
            .count();
        per_rank.push(RankDominance {
            rank: p.rank,
            draws: p.ratios.len(),
            violations,
            pmimo_below_siso: p.fraction_below_siso(),
        });
    }
    let unpaired = results
        .iter()
        .filter(|r| r.protocol == Protocol::EMimo)
        .any(|e| !per_rank.iter().any(|d| d.rank == e.rank));
    if unpaired || per_rank.is_empty() {
        return Err(Error::Input("E-MIMO results without P-MIMO partners".into()));
    }
    Ok(DominanceReport { per_rank })
}
