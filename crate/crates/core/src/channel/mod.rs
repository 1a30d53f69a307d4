//! MIMO backscatter channel models.
//!
//! A channel acts passively on the transmitted modes,
//! `a_R = U Σ V† a_S + U S a_Z`, with `H = U Σ V†` the complex amplitude
//! matrix and `S = diag(√(1 − η_k))` the loss coupling to thermal modes.

mod fading;
mod geometry;
mod link;
mod matrix;
pub mod text;

pub use fading::{sample_double_rayleigh, FadingSample, FadingSpec, MAX_RESAMPLES};
pub use geometry::{
    build_clutter_channel, build_two_path_channel, clutter_factors, steering_vector,
    two_path_full_rank_condition, ClutterPath, SteeringGeometry, TwoPathComponent,
};
pub use link::{round_trip_transmissivity, siso_beam_splitter, LinkBudget, SPEED_OF_LIGHT};
pub use matrix::{
    decompose_channel, noise_loading, ChannelMatrix, NoiseLoading, DEFAULT_RANK_TOLERANCE,
    PHYSICALITY_SLACK,
};
