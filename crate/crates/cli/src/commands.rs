use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use qbsim::channel::text::{read_matrix, write_matrix};
use qbsim::csv::float;
use qbsim::mesh::reconstruction_residual;
use qbsim::montecarlo::run_rank_sweep_with_threads;
use qbsim::qi::oracle::run_oracle_suite;
use qbsim::qi::{link_reports, modes_for_ber};
use qbsim::{
    build_clutter_channel, build_two_path_channel, chernoff_ber, clements_decompose,
    round_trip_transmissivity, run_rank_sweep, ChannelMatrix, Error, ProtocolReport, QiParams,
    Receiver, SimConfig,
};

use crate::{CliError, RunArgs};

/// Default channel count for `oracle`.
pub const ORACLE_CHANNELS: usize = 100;

const MESH_RESIDUAL_LIMIT: f64 = 1e-10;

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, contents)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

pub fn link_budget(cfg: &SimConfig, args: &RunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let lb = cfg.link_budget()?;
    let eta = round_trip_transmissivity(&lb)?;
    writeln!(out, "eta,{}", float(eta))?;
    if let Some(path) = &args.out {
        let csv = format!(
            "gain,omega,qrcs,r_tx,r_rx,eta\n{},{},{},{},{},{}\n",
            float(lb.antenna_gain),
            float(lb.angular_frequency),
            float(lb.qrcs),
            float(lb.dist_tx_tag),
            float(lb.dist_tag_rx),
            float(eta)
        );
        write_file(path, &csv)?;
    }
    Ok(())
}

fn build_channel(cfg: &SimConfig) -> Result<ChannelMatrix, CliError> {
    if !cfg.paths.is_empty() {
        return Ok(build_two_path_channel(&cfg.two_path(), cfg.spacing())?);
    }
    if !cfg.tx_paths.is_empty() || !cfg.rx_paths.is_empty() {
        let (tx, rx) = cfg.clutter();
        let need = |v: Option<usize>, k: &str| {
            v.ok_or_else(|| CliError::Validation(format!("missing required key `{k}`")))
        };
        return Ok(build_clutter_channel(
            &tx,
            &rx,
            need(cfg.nt, "nt")?,
            need(cfg.nb, "nb")?,
            need(cfg.nr, "nr")?,
            cfg.spacing(),
        )?);
    }
    let sample = cfg.fading_spec()?.draw(0)?;
    if sample.rejected > 0 {
        log::info!("{} non-physical draws resampled", sample.rejected);
    }
    Ok(sample.channel)
}

pub fn channel(cfg: &SimConfig, args: &RunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cm = build_channel(cfg)?;
    cm.require_physical()?;
    writeln!(out, "shape,{},{}", cm.n_rx(), cm.n_tx())?;
    writeln!(out, "rank,{}", cm.rank())?;
    let svs: Vec<String> = cm.singular_values().iter().map(|s| float(*s)).collect();
    writeln!(out, "singular_values,{}", svs.join(","))?;
    writeln!(out, "trace_hh,{}", float(cm.trace_hh()))?;
    if cfg.ns.is_some() || cfg.nz.is_some() {
        let eta = cfg
            .eta
            .ok_or_else(|| CliError::Validation("missing required key `eta`".into()))?;
        let model = cfg.interference.unwrap_or_default();
        writeln!(out, "{}", ProtocolReport::CSV_HEADER)?;
        for r in link_reports(&cm, eta, &cfg.qi_params()?, model)? {
            writeln!(out, "{}", r.csv_row())?;
        }
    }
    match &args.out {
        Some(path) => write_file(path, &write_matrix(cm.entries()))?,
        None => write!(out, "{}", write_matrix(cm.entries()))?,
    }
    Ok(())
}

pub fn decompose(args: &RunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let input = args
        .input
        .as_ref()
        .ok_or_else(|| CliError::Validation("decompose needs --input".into()))?;
    let text = std::fs::read_to_string(input)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", input.display())))?;
    let u = read_matrix(&text)?;
    let mesh = match clements_decompose(&u) {
        Ok(m) => m,
        Err(e @ Error::NotUnitary(residual)) => {
            writeln!(out, "unitarity_residual,{}", float(residual))?;
            return Err(e.into());
        }
        Err(e) => return Err(e.into()),
    };
    let residual = reconstruction_residual(&mesh, &u);
    writeln!(out, "elements,{}", mesh.elements.len())?;
    writeln!(out, "residual,{}", float(residual))?;
    match &args.out {
        Some(path) => write_file(path, &mesh.to_text())?,
        None => write!(out, "{}", mesh.to_text())?,
    }
    if residual > MESH_RESIDUAL_LIMIT {
        return Err(CliError::Runtime(format!(
            "mesh reconstruction residual {residual:e} exceeds {MESH_RESIDUAL_LIMIT:e}"
        )));
    }
    Ok(())
}

/// Mode-count grid: `m_points` log-spaced values over `[m_min, m_max]`.
fn mode_grid(cfg: &SimConfig) -> Result<Vec<f64>, CliError> {
    let need = |v: Option<f64>, k: &str| {
        v.ok_or_else(|| CliError::Validation(format!("missing required key `{k}`")))
    };
    let lo = need(cfg.m_min, "m_min")?;
    let hi = cfg.m_max.unwrap_or(lo);
    let n = cfg.m_points.unwrap_or(if hi > lo { 50 } else { 1 });
    if !(lo > 0.0 && hi >= lo && n >= 1) || (n == 1 && hi != lo) {
        return Err(CliError::Validation(format!(
            "invalid mode grid m_min={lo}, m_max={hi}, m_points={n}"
        )));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i + 1 == n {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect())
}

/// `beta` is the bare `η N_S / N_Z` coefficient; each receiver row scales it.
pub fn ber(cfg: &SimConfig, args: &RunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let base = match cfg.beta {
        Some(b) => b,
        None => {
            let eta = cfg
                .eta
                .ok_or_else(|| CliError::Validation("missing required key `beta` (or `eta`, `ns`, `nz`)".into()))?;
            let q = QiParams::new(
                cfg.ns.ok_or_else(|| CliError::Validation("missing required key `ns`".into()))?,
                cfg.nz.ok_or_else(|| CliError::Validation("missing required key `nz`".into()))?,
                1.0,
                Receiver::ZhuangRx,
            )?;
            qbsim::siso_snr(eta, &q)?
        }
    };
    let grid = mode_grid(cfg)?;
    let receivers: Vec<Receiver> = match cfg.receiver {
        Some(r) => vec![r],
        None => Receiver::ALL.to_vec(),
    };
    let mut csv = String::from("receiver,beta,modes,ber\n");
    for &m in &grid {
        for &r in &receivers {
            let beta = r.snr_factor() * base;
            let _ = writeln!(csv, "{},{},{},{}", r, float(beta), float(m), float(chernoff_ber(beta, m)?));
        }
    }
    if let Some(target) = cfg.target_ber {
        for &r in &receivers {
            let m = modes_for_ber(r.snr_factor() * base, target)?;
            writeln!(out, "modes_for_ber,{},{},{}", r, float(target), float(m))?;
        }
    }
    match &args.out {
        Some(path) => write_file(path, &csv)?,
        None => write!(out, "{csv}")?,
    }
    Ok(())
}

pub const SUMMARY_FILE: &str = "summary.csv";
pub const RAW_FILE: &str = "raw.csv";
pub const CDF_FILE: &str = "cdf.csv";
pub const FADED_SISO_FILE: &str = "faded_siso.csv";

pub fn sweep(cfg: &SimConfig, args: &RunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let spec = cfg.experiment()?;
    let result = match args.threads {
        Some(0) => return Err(CliError::Validation("--threads must be >= 1".into())),
        Some(t) => run_rank_sweep_with_threads(&spec, t)?,
        None => run_rank_sweep(&spec)?,
    };
    let summary = result.summary_csv();
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        write_file(&dir.join(SUMMARY_FILE), &summary)?;
        write_file(&dir.join(RAW_FILE), &result.raw_csv())?;
        write_file(&dir.join(CDF_FILE), &result.cdf_csv())?;
        write_file(&dir.join(FADED_SISO_FILE), &result.faded_siso_csv())?;
    }
    write!(out, "{summary}")?;
    Ok(())
}

pub fn oracle(cfg: &SimConfig, args: &RunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let q = QiParams::new(
        cfg.ns.unwrap_or(0.01),
        cfg.nz.unwrap_or(20.0),
        cfg.modes.unwrap_or(1.0),
        cfg.receiver(),
    )?;
    let count = cfg.trials.unwrap_or(ORACLE_CHANNELS);
    let s = run_oracle_suite(count, cfg.seed.unwrap_or(0), &q)?;
    let report = format!(
        "channels,{}\nemimo_max_cross_branch,{}\nemimo_max_moment_deviation,{}\npmimo_max_received_deviation,{}\npmimo_max_interference_deviation,{}\n",
        s.channels,
        float(s.emimo.max_cross_branch),
        float(s.emimo.max_moment_deviation),
        float(s.pmimo.max_received_deviation),
        float(s.pmimo.max_interference_deviation)
    );
    write!(out, "{report}")?;
    if let Some(path) = &args.out {
        write_file(path, &report)?;
    }
    if s.emimo.max_cross_branch > 1e-10
        || s.emimo.max_moment_deviation > 1e-9
        || s.pmimo.max_received_deviation > 1e-9
        || s.pmimo.max_interference_deviation > 1e-9
    {
        return Err(CliError::Runtime("oracle deviations exceed tolerance".into()));
    }
    Ok(())
}
