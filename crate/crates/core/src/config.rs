//! Experiment manifests in TOML.
//!
//! Every key is optional at parse time; each consumer asks for the keys it
//! needs and reports the first missing one by name. Unknown keys are
//! rejected. Overrides are flat `key = value` pairs merged over the file
//! before parsing, so `--set eta=1e-5` shadows `eta = 0.01` one-for-one.
//!
//! ```toml
//! nt = 8
//! nr = 8
//! eta = 1e-5
//! ns = 0.01
//! nz = 20.0
//! ranks = "1..8"      # or [1, 2, 4]
//! trials = 10000
//! seed = 7
//! channel = "double-rayleigh"
//!
//! [[paths]]           # two-path geometry
//! eta = 0.01
//! phase = 0.0
//! rx_cosine = 0.0
//! tx_cosine = 0.0
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::channel::{ClutterPath, FadingSpec, LinkBudget, TwoPathComponent};
use crate::error::{Error, Result};
use crate::montecarlo::{ChannelKind, ExperimentSpec};
use crate::qi::{InterferenceModel, QiParams, Receiver};

pub const DEFAULT_SPACING: f64 = 0.5;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub nt: Option<usize>,
    pub nr: Option<usize>,
    pub nb: Option<usize>,
    pub eta: Option<f64>,
    pub seed: Option<u64>,
    pub spacing: Option<f64>,

    pub ns: Option<f64>,
    pub nz: Option<f64>,
    pub modes: Option<f64>,
    pub receiver: Option<Receiver>,

    pub trials: Option<usize>,
    pub ranks: Option<RankList>,
    pub channel: Option<ChannelKind>,
    pub interference: Option<InterferenceModel>,

    pub gain: Option<f64>,
    pub omega: Option<f64>,
    pub qrcs: Option<f64>,
    pub r_tx: Option<f64>,
    pub r_rx: Option<f64>,

    pub m_min: Option<f64>,
    pub m_max: Option<f64>,
    pub m_points: Option<usize>,
    pub beta: Option<f64>,
    pub target_ber: Option<f64>,

    #[serde(default)]
    pub paths: Vec<PathEntry>,
    #[serde(default)]
    pub tx_paths: Vec<ClutterEntry>,
    #[serde(default)]
    pub rx_paths: Vec<ClutterEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathEntry {
    pub eta: f64,
    #[serde(default)]
    pub phase: f64,
    pub rx_cosine: f64,
    pub tx_cosine: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClutterEntry {
    pub eta: f64,
    #[serde(default)]
    pub phase: f64,
    pub tag_cosine: f64,
    pub far_cosine: f64,
}

/// `[1, 2, 4]` or `"1..8"` (inclusive).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum RankList {
    List(Vec<usize>),
    Range(String),
}

impl RankList {
    pub fn expand(&self) -> Result<Vec<usize>> {
        match self {
            RankList::List(v) => Ok(v.clone()),
            RankList::Range(s) => parse_rank_range(s),
        }
    }
}

/// Parse `"a..b"` (inclusive), `"a..=b"`, a single rank, or a comma list.
pub fn parse_rank_range(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Config(format!("invalid rank list `{s}` (expected e.g. 1..8 or 1,2,4)"));
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().trim_start_matches('=').trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| bad()))
        .collect()
}

fn missing(key: &str) -> Error {
    Error::Config(format!("missing required key `{key}`"))
}

fn need<T: Copy>(v: Option<T>, key: &str) -> Result<T> {
    v.ok_or_else(|| missing(key))
}

/// Parse an override value as a TOML value, falling back to a bare string.
fn override_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

impl SimConfig {
    /// Parse a manifest, then apply `overrides` (`(key, raw value)` pairs).
    pub fn from_toml_with(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        for (k, v) in overrides {
            table.insert(k.clone(), override_value(v));
        }
        table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().trim().to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Self::from_toml_with(text, &[])
    }

    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        Self::from_toml_with(&std::fs::read_to_string(path)?, overrides)
    }

    pub fn link_budget(&self) -> Result<LinkBudget> {
        LinkBudget::new(
            need(self.gain, "gain")?,
            need(self.omega, "omega")?,
            need(self.qrcs, "qrcs")?,
            need(self.r_tx, "r_tx")?,
            need(self.r_rx, "r_rx")?,
        )
    }

    pub fn fading_spec(&self) -> Result<FadingSpec> {
        let spec = FadingSpec {
            n_tx: need(self.nt, "nt")?,
            n_rx: need(self.nr, "nr")?,
            n_tag: need(self.nb, "nb")?,
            reference_rtt: need(self.eta, "eta")?,
            seed: self.seed.unwrap_or(0),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn spacing(&self) -> f64 {
        self.spacing.unwrap_or(DEFAULT_SPACING)
    }

    pub fn receiver(&self) -> Receiver {
        self.receiver.unwrap_or(Receiver::ZhuangRx)
    }

    /// `modes` defaults to 1 since mode ratios do not depend on it.
    pub fn qi_params(&self) -> Result<QiParams> {
        QiParams::new(
            need(self.ns, "ns")?,
            need(self.nz, "nz")?,
            self.modes.unwrap_or(1.0),
            self.receiver(),
        )
    }

    pub fn two_path(&self) -> Vec<TwoPathComponent> {
        self.paths
            .iter()
            .map(|p| TwoPathComponent {
                transmissivity: p.eta,
                phase: p.phase,
                rx_cosine: p.rx_cosine,
                tx_cosine: p.tx_cosine,
            })
            .collect()
    }

    pub fn clutter(&self) -> (Vec<ClutterPath>, Vec<ClutterPath>) {
        let conv = |v: &[ClutterEntry]| {
            v.iter()
                .map(|p| ClutterPath {
                    transmissivity: p.eta,
                    phase: p.phase,
                    tag_cosine: p.tag_cosine,
                    far_cosine: p.far_cosine,
                })
                .collect()
        };
        (conv(&self.tx_paths), conv(&self.rx_paths))
    }

    /// Sweep defaults: double-Rayleigh channel, incoherent interference, all
    /// ranks `1..=min(N_t, N_r)`, seed 0.
    pub fn experiment(&self) -> Result<ExperimentSpec> {
        let n_tx = need(self.nt, "nt")?;
        let n_rx = need(self.nr, "nr")?;
        let channel_kind = self.channel.unwrap_or(ChannelKind::DoubleRayleigh);
        let rank_sweep = match &self.ranks {
            Some(r) => r.expand()?,
            None => (1..=n_tx.min(n_rx)).collect(),
        };
        let trials = match channel_kind {
            ChannelKind::Deterministic => self.trials.unwrap_or(1),
            ChannelKind::DoubleRayleigh => need(self.trials, "trials")?,
        };
        let spec = ExperimentSpec {
            n_tx,
            n_rx,
            rank_sweep,
            reference_rtt: need(self.eta, "eta")?,
            qi: self.qi_params()?,
            trials,
            seed: self.seed.unwrap_or(0),
            channel_kind,
            interference: self.interference.unwrap_or(InterferenceModel::Incoherent),
        };
        spec.validate()?;
        Ok(spec)
    }
}
