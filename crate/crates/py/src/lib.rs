//! Python bindings for the `qbsim` link simulator.
//!
//! Matrices cross the boundary as nested lists of Python `complex`
//! (row-major). Validation errors surface as `ValueError`, everything else as
//! `RuntimeError`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qbsim::montecarlo::{deterministic_channel, run_rank_sweep_with_threads};
use qbsim::qi::oracle::run_oracle_suite;
use qbsim::qi::modes_for_ber as core_modes_for_ber;
use qbsim::{
    ChannelKind, ChannelMatrix, CMatrix, Complex64, Error, ExperimentSpec, FadingSpec,
    InterferenceModel, LinkBudget, QiParams, Receiver, DEFAULT_RANK_TOLERANCE,
};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(_) | Error::ExcessiveRejections { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_rows(m: &CMatrix) -> Vec<Vec<Complex64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn from_rows(rows: Vec<Vec<Complex64>>) -> PyResult<CMatrix> {
    let n_rows = rows.len();
    let n_cols = rows.first().map_or(0, Vec::len);
    if n_rows == 0 || n_cols == 0 || rows.iter().any(|r| r.len() != n_cols) {
        return Err(PyValueError::new_err("matrix must be a non-empty list of equal-length rows"));
    }
    Ok(CMatrix::from_fn(n_rows, n_cols, |i, j| rows[i][j]))
}

fn qi(ns: f64, nz: f64, modes: f64, receiver: &str) -> PyResult<QiParams> {
    let r: Receiver = receiver.parse().map_err(py_err)?;
    QiParams::new(ns, nz, modes, r).map_err(py_err)
}

#[pyfunction]
fn round_trip_transmissivity(gain: f64, omega: f64, qrcs: f64, r_tx: f64, r_rx: f64) -> PyResult<f64> {
    let lb = LinkBudget::new(gain, omega, qrcs, r_tx, r_rx).map_err(py_err)?;
    qbsim::round_trip_transmissivity(&lb).map_err(py_err)
}

#[pyfunction]
fn siso_beam_splitter(eta: f64, phase: f64) -> PyResult<Vec<Vec<Complex64>>> {
    Ok(to_rows(&qbsim::siso_beam_splitter(eta, phase).map_err(py_err)?))
}

#[pyfunction]
#[pyo3(signature = (eta, ns, nz, receiver = "zhuang"))]
fn siso_snr(eta: f64, ns: f64, nz: f64, receiver: &str) -> PyResult<f64> {
    qbsim::siso_snr(eta, &qi(ns, nz, 1.0, receiver)?).map_err(py_err)
}

#[pyfunction]
fn chernoff_ber(snr: f64, modes: f64) -> PyResult<f64> {
    qbsim::chernoff_ber(snr, modes).map_err(py_err)
}

#[pyfunction]
fn modes_for_ber(snr: f64, target_ber: f64) -> PyResult<f64> {
    core_modes_for_ber(snr, target_ber).map_err(py_err)
}

/// Ensemble-average P-MIMO mode ratio `M_P / M`.
#[pyfunction]
fn pmimo_mode_ratio(n_tx: usize, n_rx: usize, rank: usize, snr: f64) -> PyResult<f64> {
    Ok(qbsim::pmimo_snr_ensemble(n_tx, n_rx, rank, snr).map_err(py_err)?.mode_ratio)
}

/// `β_E / β_P` for the ensemble-average channel.
#[pyfunction]
fn relative_gain(n_tx: usize, rank: usize, snr: f64) -> PyResult<f64> {
    qbsim::relative_gain(n_tx, rank, snr).map_err(py_err)
}

/// A channel matrix with its SVD.
#[pyclass(name = "Channel", module = "qbsim", frozen)]
struct PyChannel {
    inner: ChannelMatrix,
}

#[pymethods]
impl PyChannel {
    #[new]
    #[pyo3(signature = (matrix, rank_tolerance = DEFAULT_RANK_TOLERANCE))]
    fn new(matrix: Vec<Vec<Complex64>>, rank_tolerance: f64) -> PyResult<Self> {
        let inner = qbsim::decompose_channel(from_rows(matrix)?, rank_tolerance).map_err(py_err)?;
        Ok(Self { inner })
    }

    /// Draw number `index` of a double-Rayleigh ensemble.
    #[staticmethod]
    #[pyo3(signature = (n_tx, n_rx, n_tag, eta, seed, index = 0))]
    fn double_rayleigh(n_tx: usize, n_rx: usize, n_tag: usize, eta: f64, seed: u64, index: u64) -> PyResult<Self> {
        let spec = FadingSpec {
            n_tx,
            n_rx,
            n_tag,
            reference_rtt: eta,
            seed,
        };
        Ok(Self {
            inner: spec.draw(index).map_err(py_err)?.channel,
        })
    }

    #[staticmethod]
    fn deterministic(n_tx: usize, n_rx: usize, rank: usize, eta: f64) -> PyResult<Self> {
        Ok(Self {
            inner: deterministic_channel(n_tx, n_rx, rank, eta).map_err(py_err)?,
        })
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.n_rx(), self.inner.n_tx())
    }

    #[getter]
    fn entries(&self) -> Vec<Vec<Complex64>> {
        to_rows(self.inner.entries())
    }

    #[getter]
    fn u(&self) -> Vec<Vec<Complex64>> {
        to_rows(self.inner.u())
    }

    #[getter]
    fn v(&self) -> Vec<Vec<Complex64>> {
        to_rows(self.inner.v())
    }

    #[getter]
    fn singular_values(&self) -> Vec<f64> {
        self.inner.singular_values().to_vec()
    }

    #[getter]
    fn rank(&self) -> usize {
        self.inner.rank()
    }

    #[getter]
    fn trace_hh(&self) -> f64 {
        self.inner.trace_hh()
    }

    fn is_physical(&self) -> bool {
        self.inner.is_physical()
    }

    fn reconstruction_residual(&self) -> f64 {
        self.inner.reconstruction_residual()
    }

    #[pyo3(signature = (ns, nz, receiver = "zhuang"))]
    fn emimo_snr(&self, ns: f64, nz: f64, receiver: &str) -> PyResult<f64> {
        qbsim::emimo_snr(&self.inner, &qi(ns, nz, 1.0, receiver)?).map_err(py_err)
    }

    #[pyo3(signature = (ns, nz, receiver = "zhuang", interference = "coherent"))]
    fn pmimo_snr(&self, ns: f64, nz: f64, receiver: &str, interference: &str) -> PyResult<f64> {
        let model: InterferenceModel = interference.parse().map_err(py_err)?;
        qbsim::pmimo_snr(&self.inner, &qi(ns, nz, 1.0, receiver)?, model).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Channel(shape=({}, {}), rank={}, trace_hh={:e})",
            self.inner.n_rx(),
            self.inner.n_tx(),
            self.inner.rank(),
            self.inner.trace_hh()
        )
    }
}

/// Rectangular beam-splitter mesh realising a unitary.
#[pyclass(name = "Mesh", module = "qbsim", frozen)]
struct PyMesh {
    inner: qbsim::BeamSplitterMesh,
}

#[pymethods]
impl PyMesh {
    #[staticmethod]
    fn decompose(unitary: Vec<Vec<Complex64>>) -> PyResult<Self> {
        Ok(Self {
            inner: qbsim::clements_decompose(&from_rows(unitary)?).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: qbsim::BeamSplitterMesh::from_text(text).map_err(py_err)?,
        })
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension
    }

    /// `(port, theta, phi)` per element, in application order.
    #[getter]
    fn elements(&self) -> Vec<(usize, f64, f64)> {
        self.inner.elements.iter().map(|e| (e.port, e.theta, e.phi)).collect()
    }

    #[getter]
    fn output_phases(&self) -> Vec<f64> {
        self.inner.output_phases.clone()
    }

    fn reconstruct(&self) -> Vec<Vec<Complex64>> {
        to_rows(&qbsim::reconstruct(&self.inner))
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn __len__(&self) -> usize {
        self.inner.elements.len()
    }
}

/// Result of a rank sweep.
#[pyclass(name = "Sweep", module = "qbsim", frozen)]
struct PySweep {
    inner: qbsim::SweepOutput,
}

#[pymethods]
impl PySweep {
    fn summary_csv(&self) -> String {
        self.inner.summary_csv()
    }

    fn raw_csv(&self) -> String {
        self.inner.raw_csv()
    }

    fn cdf_csv(&self) -> String {
        self.inner.cdf_csv()
    }

    fn faded_siso_csv(&self) -> String {
        self.inner.faded_siso_csv()
    }

    /// One dict per (rank, protocol).
    fn results<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.inner
            .results
            .iter()
            .map(|r| {
                let d = PyDict::new(py);
                d.set_item("rank", r.rank)?;
                d.set_item("protocol", r.protocol.name())?;
                d.set_item("mean_log_gain", r.log_gain.mean)?;
                d.set_item("stderr", r.log_gain.stderr)?;
                d.set_item("mean_linear_gain", r.linear_gain.mean)?;
                d.set_item("mean_log_gain_vs_faded_siso", r.log_gain_vs_faded_siso.mean)?;
                d.set_item("fraction_below_siso", r.fraction_below_siso())?;
                d.set_item("trials", r.trials_used)?;
                d.set_item("log_gains", r.log_gains())?;
                Ok(d)
            })
            .collect()
    }
}

#[pyfunction]
#[pyo3(signature = (
    n_tx, n_rx, ranks, eta, ns, nz, trials = 1, seed = 0,
    channel = "double-rayleigh", interference = "incoherent", receiver = "zhuang", threads = 1
))]
#[allow(clippy::too_many_arguments)]
fn run_rank_sweep(
    py: Python<'_>,
    n_tx: usize,
    n_rx: usize,
    ranks: Vec<usize>,
    eta: f64,
    ns: f64,
    nz: f64,
    trials: usize,
    seed: u64,
    channel: &str,
    interference: &str,
    receiver: &str,
    threads: usize,
) -> PyResult<PySweep> {
    let channel_kind: ChannelKind = channel.parse().map_err(py_err)?;
    let spec = ExperimentSpec {
        n_tx,
        n_rx,
        rank_sweep: ranks,
        reference_rtt: eta,
        qi: qi(ns, nz, 1.0, receiver)?,
        trials,
        seed,
        channel_kind,
        interference: interference.parse().map_err(py_err)?,
    };
    let inner = py
        .detach(|| run_rank_sweep_with_threads(&spec, threads.max(1)))
        .map_err(py_err)?;
    Ok(PySweep { inner })
}

/// Gaussian-state cross-check of the protocol formulas.
#[pyfunction]
#[pyo3(signature = (count = 100, seed = 0, ns = 0.01, nz = 20.0))]
fn oracle<'py>(py: Python<'py>, count: usize, seed: u64, ns: f64, nz: f64) -> PyResult<Bound<'py, PyDict>> {
    let s = run_oracle_suite(count, seed, &qi(ns, nz, 1.0, "zhuang")?).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("channels", s.channels)?;
    d.set_item("emimo_max_cross_branch", s.emimo.max_cross_branch)?;
    d.set_item("emimo_max_moment_deviation", s.emimo.max_moment_deviation)?;
    d.set_item("pmimo_max_received_deviation", s.pmimo.max_received_deviation)?;
    d.set_item("pmimo_max_interference_deviation", s.pmimo.max_interference_deviation)?;
    Ok(d)
}

#[pymodule]
#[pyo3(name = "qbsim")]
fn qbsim_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("SPEED_OF_LIGHT", qbsim::SPEED_OF_LIGHT)?;
    m.add_class::<PyChannel>()?;
    m.add_class::<PyMesh>()?;
    m.add_class::<PySweep>()?;
    m.add_function(wrap_pyfunction!(round_trip_transmissivity, m)?)?;
    m.add_function(wrap_pyfunction!(siso_beam_splitter, m)?)?;
    m.add_function(wrap_pyfunction!(siso_snr, m)?)?;
    m.add_function(wrap_pyfunction!(chernoff_ber, m)?)?;
    m.add_function(wrap_pyfunction!(modes_for_ber, m)?)?;
    m.add_function(wrap_pyfunction!(pmimo_mode_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(relative_gain, m)?)?;
    m.add_function(wrap_pyfunction!(run_rank_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    Ok(())
}
