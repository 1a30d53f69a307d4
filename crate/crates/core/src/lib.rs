//! Link-level simulation of multiantenna quantum backscatter communications.
//!
//! The crate is organised around four pieces:
//!
//! * [`channel`] builds MIMO backscatter channel matrices (beam-splitter SISO
//!   links, steering-vector and clutter geometries, double-Rayleigh fading) and
//!   factorises them into the `U Σ V†` beam-splitter dilation.
//! * [`mesh`] decomposes the unitary factors into rectangular meshes of two-port
//!   beam-splitters and rebuilds them for verification.
//! * [`qi`] evaluates quantum-illumination link performance: TMSS moments,
//!   receiver SNR coefficients, Chernoff BER, and the paired (P-MIMO) and
//!   eigen-channel (E-MIMO) protocols, plus a Gaussian-moment oracle.
//! * [`montecarlo`] runs rank sweeps over deterministic and fading ensembles.

pub mod channel;
pub mod config;
pub mod csv;
pub mod error;
pub mod linalg;
pub mod mesh;
pub mod montecarlo;
pub mod qi;
pub mod rng;

pub use channel::{
    build_clutter_channel, build_two_path_channel, decompose_channel, noise_loading,
    round_trip_transmissivity, sample_double_rayleigh, siso_beam_splitter, steering_vector,
    ChannelMatrix, ClutterPath, FadingSpec, LinkBudget, NoiseLoading, SteeringGeometry,
    TwoPathComponent, DEFAULT_RANK_TOLERANCE, SPEED_OF_LIGHT,
};
pub use config::SimConfig;
pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector};
pub use mesh::{clements_decompose, reconstruct, BeamSplitterMesh, MeshElement};
pub use montecarlo::{
    deterministic_channel, dominance_check, empirical_cdf, run_rank_sweep,
    run_rank_sweep_with_threads, ChannelKind, EmpiricalCdf, EnsembleResult,
    ExperimentSpec, SweepOutput,
};
pub use num_complex::Complex64;
pub use qi::{
    chernoff_ber, eigen_channels, emimo_snr, pmimo_interference, pmimo_snr, pmimo_snr_ensemble,
    relative_gain, siso_snr, tmss_moments, InterferenceModel, Protocol, ProtocolReport, QiParams,
    Receiver, TmssMoments,
};
