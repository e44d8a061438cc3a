//! Text-to-spectrogram stage.
//!
//! Any backend implements [`AcousticSession`]: input chunks are appended as
//! they become available, `<eos>` is fed once the whole sentence has been
//! seen, and every [`AcousticSession::step_frame`] call emits one frame
//! conditioned only on the input fed so far. [`UnitDecoder`] sits on top and
//! attributes frames to units with the attention-argmax boundary rule.

mod decoder;
mod reference;
mod templates;

pub use decoder::{UnitDecoder, WordSpectrogram};
pub use reference::{ReferenceAcousticConfig, ReferenceAcousticModel, ReferenceSession};
pub use templates::{PhonemeTemplate, TemplateTable, ARPABET, SHIPPED_TEMPLATE_SEED};

use crate::frontend::Chunk;
use crate::N_MELS;

/// Stop predictor threshold; a session ends when the probability exceeds it.
pub const STOP_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AcousticError {
    #[error("session is closed")]
    SessionClosed,
    #[error("no input has been fed")]
    NoInput,
    #[error("phoneme {0:?} has no template")]
    UnknownPhoneme(String),
    #[error("unit {unit} cannot be completed without more input")]
    Starved { unit: usize },
    #[error("backend emitted a frame past the fed input")]
    FrameBeyondInput,
    #[error("invalid mel frame: {0}")]
    InvalidFrame(String),
    #[error("invalid attention vector: {0}")]
    InvalidAttention(String),
    #[error("template table line {line}: {reason}")]
    TemplateFormat { line: usize, reason: String },
    #[error("invalid acoustic config: {0}")]
    InvalidConfig(String),
}

/// One 80-band mel frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MelFrame {
    bands: [f32; N_MELS],
}

impl MelFrame {
    pub fn new(bands: [f32; N_MELS]) -> Result<Self, AcousticError> {
        if let Some(i) = bands.iter().position(|b| !b.is_finite()) {
            return Err(AcousticError::InvalidFrame(format!("band {i} is not finite")));
        }
        Ok(Self { bands })
    }

    pub fn from_slice(bands: &[f32]) -> Result<Self, AcousticError> {
        let arr: [f32; N_MELS] = bands
            .try_into()
            .map_err(|_| AcousticError::InvalidFrame(format!("expected {N_MELS} bands, got {}", bands.len())))?;
        Self::new(arr)
    }

    pub const fn silence() -> Self {
        Self { bands: [0.0; N_MELS] }
    }

    pub fn bands(&self) -> &[f32; N_MELS] {
        &self.bands
    }

    /// `(1 - w) * self + w * other`, band by band.
    pub fn lerp(&self, other: &MelFrame, w: f32) -> MelFrame {
        let mut bands = [0.0; N_MELS];
        for (out, (a, b)) in bands.iter_mut().zip(self.bands.iter().zip(other.bands.iter())) {
            *out = (1.0 - w) * a + w * b;
        }
        MelFrame { bands }
    }

    /// Shifts spectral content `shift` bands toward band 0 with linear
    /// interpolation, holding the top band past the edge.
    pub fn shifted_down(&self, shift: f32) -> MelFrame {
        if shift <= 0.0 {
            return *self;
        }
        let last = N_MELS - 1;
        let mut bands = [0.0; N_MELS];
        for (b, out) in bands.iter_mut().enumerate() {
            let src = b as f32 + shift;
            let lo = src.floor() as usize;
            *out = if lo >= last {
                self.bands[last]
            } else {
                let frac = src - lo as f32;
                (1.0 - frac) * self.bands[lo] + frac * self.bands[lo + 1]
            };
        }
        MelFrame { bands }
    }
}

/// Decoder alignment over the fed input (phonemes, then `<eos>` once fed).
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionVector {
    weights: Vec<f64>,
}

impl AttentionVector {
    pub fn new(weights: Vec<f64>) -> Result<Self, AcousticError> {
        if weights.is_empty() {
            return Err(AcousticError::InvalidAttention("empty".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(AcousticError::InvalidAttention("negative or non-finite weight".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(AcousticError::InvalidAttention(format!("weights sum to {sum}")));
        }
        Ok(Self { weights })
    }

    /// One-hot at 0-based position `index`.
    pub fn one_hot(len: usize, index: usize) -> Self {
        assert!(index < len, "one-hot index {index} out of {len}");
        let mut weights = vec![0.0; len];
        weights[index] = 1.0;
        Self { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// 1-based position of the largest weight; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, w) in self.weights.iter().enumerate() {
            if *w > self.weights[best] {
                best = i;
            }
        }
        best + 1
    }
}

/// Backend-maintained bookkeeping of a decoding session.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DecoderState {
    fed_units: usize,
    cumulative_phonemes: Vec<usize>,
    eos_fed: bool,
    stopped: bool,
    stop_prob: f64,
    frames_emitted: usize,
}

impl DecoderState {
    pub fn fed_units(&self) -> usize {
        self.fed_units
    }

    /// `cumulative_phonemes()[t - 1]` is the phoneme total of units `1..=t`.
    pub fn cumulative_phonemes(&self) -> &[usize] {
        &self.cumulative_phonemes
    }

    pub fn fed_phonemes(&self) -> usize {
        self.cumulative_phonemes.last().copied().unwrap_or(0)
    }

    pub fn eos_fed(&self) -> bool {
        self.eos_fed
    }

    pub fn stopped(&self) -> bool {
        self.stopped
    }

    pub fn stop_prob(&self) -> f64 {
        self.stop_prob
    }

    pub fn frames_emitted(&self) -> usize {
        self.frames_emitted
    }

    /// Records appended chunks. Fails once `<eos>` has been fed.
    pub fn record_chunks(&mut self, chunks: &[Chunk]) -> Result<(), AcousticError> {
        if self.eos_fed {
            return Err(AcousticError::SessionClosed);
        }
        for chunk in chunks {
            let total = self.fed_phonemes() + chunk.phoneme_count();
            self.cumulative_phonemes.push(total);
            self.fed_units += 1;
        }
        Ok(())
    }

    pub fn record_eos(&mut self) -> Result<(), AcousticError> {
        if self.eos_fed {
            return Err(AcousticError::SessionClosed);
        }
        self.eos_fed = true;
        Ok(())
    }

    pub fn record_frame(&mut self, stop_prob: f64) {
        self.frames_emitted += 1;
        self.stop_prob = stop_prob;
        if is_stopped(stop_prob) {
            self.stopped = true;
        }
    }
}

/// Result of one decoder step.
#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Frame(Box<StepOutput>),
    /// Every fed phoneme has been rendered and `<eos>` has not been fed.
    NeedInput,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub frame: MelFrame,
    pub attention: AttentionVector,
    pub stop_prob: f64,
}

pub trait AcousticSession {
    fn state(&self) -> &DecoderState;
    fn extend_input(&mut self, chunks: &[Chunk]) -> Result<(), AcousticError>;
    fn feed_eos(&mut self) -> Result<(), AcousticError>;
    fn step_frame(&mut self) -> Result<Step, AcousticError>;
}

pub trait AcousticModel: Send + Sync {
    type Session: AcousticSession + Send;

    fn start_session(&self) -> Self::Session;

    /// Upper bound on the frames a session over `phonemes` inputs can emit.
    fn frame_budget(&self, phonemes: usize) -> usize;
}

pub fn is_stopped(stop_prob: f64) -> bool {
    stop_prob > STOP_THRESHOLD
}

/// Boundary rule: unit `t` is complete once the attention argmax (1-based)
/// exceeds the phoneme total of units `1..=t`. Returns the highest unit
/// newly completed beyond the `completed` already reported.
pub fn detect_boundary(state: &DecoderState, completed: usize, attention: &AttentionVector) -> Option<usize> {
    let pos = attention.argmax();
    let done = state.cumulative_phonemes().iter().take_while(|&&c| c < pos).count();
    (done > completed).then_some(done)
}
