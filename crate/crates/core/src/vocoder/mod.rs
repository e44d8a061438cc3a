//! Spectrogram-to-waveform stage.
//!
//! Synthesis is driven by a pre-sampled noise vector indexed in utterance
//! sample coordinates, so a window rendered on its own sees the same noise
//! as the same span of a full-sentence render. The incremental path renders
//! each unit with up to `delta` frames of context on both sides and trims
//! the context samples away.

mod noise;
mod reference;

pub use noise::{sample_noise, NoiseVector};
pub use reference::ReferenceVocoder;

use std::ops::Range;

use crate::acoustic::{MelFrame, WordSpectrogram};
use crate::{HOP_LENGTH, SAMPLE_RATE};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VocoderError {
    #[error("noise vector holds {available} samples, {needed} needed")]
    NoiseExhausted { needed: usize, available: usize },
    #[error("window does not line up: {0}")]
    Alignment(String),
    #[error("invalid vocoder config: {0}")]
    InvalidConfig(String),
    #[error("noise capacity must be positive")]
    EmptyNoise,
    #[error("waveforms differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VocoderConfig {
    /// Samples per frame.
    pub hop_length: usize,
    /// Frames on each side a sample can depend on in full synthesis.
    pub receptive_radius: usize,
    pub sample_rate: u32,
}

impl VocoderConfig {
    pub fn new(hop_length: usize, receptive_radius: usize, sample_rate: u32) -> Result<Self, VocoderError> {
        if hop_length != 256 && hop_length != 300 {
            return Err(VocoderError::InvalidConfig(format!("hop length {hop_length} not in {{256, 300}}")));
        }
        if sample_rate == 0 {
            return Err(VocoderError::InvalidConfig("sample rate must be positive".into()));
        }
        Ok(Self {
            hop_length,
            receptive_radius,
            sample_rate,
        })
    }

    pub fn seconds(&self, samples: usize) -> f64 {
        samples as f64 / f64::from(self.sample_rate)
    }
}

impl Default for VocoderConfig {
    fn default() -> Self {
        Self {
            hop_length: HOP_LENGTH,
            receptive_radius: 8,
            sample_rate: SAMPLE_RATE,
        }
    }
}

pub trait Vocoder: Send + Sync {
    fn config(&self) -> &VocoderConfig;

    /// Renders utterance frames `first_frame..first_frame + frames.len()`,
    /// treating frames outside the slice as absent. `noise` holds exactly
    /// the matching `hop_length * frames.len()` samples.
    fn render(&self, frames: &[MelFrame], noise: &[f32], first_frame: usize) -> Result<Vec<f32>, VocoderError>;
}

/// Waveform of one unit with its position in the utterance.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveSegment {
    pub unit_index: usize,
    /// Utterance frames the samples cover.
    pub frames: Range<usize>,
    pub samples: Vec<f32>,
}

impl WaveSegment {
    pub fn duration(&self, sample_rate: u32) -> f64 {
        self.samples.len() as f64 / f64::from(sample_rate)
    }
}

fn noise_slice(z: &NoiseVector, frames: Range<usize>, hop: usize) -> Result<&[f32], VocoderError> {
    let (start, end) = (frames.start * hop, frames.end * hop);
    z.samples().get(start..end).ok_or(VocoderError::NoiseExhausted {
        needed: end,
        available: z.len(),
    })
}

/// Full-sentence synthesis from frame 0.
pub fn synthesize_full<V: Vocoder + ?Sized>(
    vocoder: &V,
    frames: &[MelFrame],
    z: &NoiseVector,
) -> Result<Vec<f32>, VocoderError> {
    let noise = noise_slice(z, 0..frames.len(), vocoder.config().hop_length)?;
    vocoder.render(frames, noise, 0)
}

/// Renders unit `t` of `window` with up to `delta` context frames from its
/// neighbours in the window and returns only unit `t`'s samples.
///
/// `window` must hold consecutive units whose frames are contiguous in the
/// utterance; the unit before `t`, when present, supplies left context and
/// the units after it supply right context.
pub fn synthesize_overlap<V: Vocoder + ?Sized>(
    vocoder: &V,
    window: &[WordSpectrogram],
    t: usize,
    z: &NoiseVector,
    delta: usize,
) -> Result<WaveSegment, VocoderError> {
    for pair in window.windows(2) {
        if pair[1].unit_index != pair[0].unit_index + 1 {
            return Err(VocoderError::Alignment(format!(
                "unit {} follows unit {}",
                pair[1].unit_index, pair[0].unit_index
            )));
        }
        if pair[1].first_frame != pair[0].end_frame() {
            return Err(VocoderError::Alignment(format!(
                "unit {} starts at frame {}, expected {}",
                pair[1].unit_index,
                pair[1].first_frame,
                pair[0].end_frame()
            )));
        }
    }
    let p = window
        .iter()
        .position(|w| w.unit_index == t)
        .ok_or_else(|| VocoderError::Alignment(format!("unit {t} is not in the window")))?;
    let unit = &window[p];
    let left = if p > 0 { delta.min(window[p - 1].len()) } else { 0 };
    let following: usize = window[p + 1..].iter().map(WordSpectrogram::len).sum();
    let right = delta.min(following);

    let mut frames = Vec::with_capacity(left + unit.len() + right);
    if left > 0 {
        let prev = &window[p - 1].frames;
        frames.extend_from_slice(&prev[prev.len() - left..]);
    }
    frames.extend_from_slice(&unit.frames);
    frames.extend(window[p + 1..].iter().flat_map(|w| w.frames.iter().copied()).take(right));

    let hop = vocoder.config().hop_length;
    let start = unit.first_frame - left;
    let noise = noise_slice(z, start..start + frames.len(), hop)?;
    let mut samples = vocoder.render(&frames, noise, start)?;
    samples.truncate(samples.len() - right * hop);
    samples.drain(..left * hop);
    Ok(WaveSegment {
        unit_index: t,
        frames: unit.first_frame..unit.end_frame(),
        samples,
    })
}

/// Largest absolute sample difference within `radius` frames of any of the
/// given frame boundaries.
pub fn seam_discrepancy(
    incremental: &[f32],
    full: &[f32],
    boundaries: &[usize],
    radius: usize,
    hop: usize,
) -> Result<f32, VocoderError> {
    if incremental.len() != full.len() {
        return Err(VocoderError::LengthMismatch(incremental.len(), full.len()));
    }
    let mut worst = 0.0f32;
    for &b in boundaries {
        let lo = b.saturating_sub(radius) * hop;
        let hi = ((b + radius) * hop).min(full.len());
        for n in lo..hi {
            worst = worst.max((incremental[n] - full[n]).abs());
        }
    }
    Ok(worst)
}
