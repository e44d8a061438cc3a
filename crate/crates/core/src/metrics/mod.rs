//! Post-hoc latency and prosody measurements.

pub mod latency;
pub mod prosody;

pub use latency::{
    avg_chunk_lag, first_audio_latency, linear_fit, real_time_factor, time_balance, LatencyReport, LatencyRow,
    LinearFit,
};
pub use prosody::{
    duration_rmse, estimate_f0, pitch_rmse, AlignedPhoneme, PhonemeAlignment, PitchTrack, ProsodyRow,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("{0}")]
    Domain(String),
    #[error("alignments do not match: {0}")]
    AlignmentMismatch(String),
    #[error("no jointly voiced frames to compare")]
    EmptyComparison,
}

pub(crate) fn domain(msg: impl Into<String>) -> MetricsError {
    MetricsError::Domain(msg.into())
}
