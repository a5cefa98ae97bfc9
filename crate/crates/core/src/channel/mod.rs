//! Channel mathematics for the RIS-assisted downlink: the RIS reflection
//! matrix, multipath gains for the three links with Doppler, the cascaded
//! effective gain, co-phasing phase control, and the achievable rate.

mod gains;
mod matrix;
mod rate;
mod ris;
mod types;

pub use gains::{channel_bs_ris, channel_bs_ue, channel_ris_ue, doppler_spread, phase_term, steering_vector};
pub use matrix::ChannelMatrix;
pub use rate::data_rate;
pub use ris::{
    co_phase_ris, default_combiner, effective_gain, effective_gain_with, optimize_ris, ris_matrix, RisSolution,
    ZERO_DIRECT_THRESHOLD,
};
pub use types::{
    wrap_phase, ArrayGeometry, BsRisPath, MultipathComponent, PropagationConfig, Pulse, RisConfig, SPEED_OF_LIGHT_MPS,
};
