//! Incremental prefix-to-prefix text-to-speech.
//!
//! Text is split into phoneme chunks, a lookahead policy decides how much
//! input each unit's spectrogram and waveform may see, and the pipeline
//! synthesizes and plays units one after another while later input is
//! still arriving.

pub mod acoustic;
pub mod frontend;
pub mod metrics;
pub mod pipeline;
pub mod policy;
pub mod vocoder;
pub mod wav;

pub use acoustic::{
    AcousticError, AcousticModel, AcousticSession, AttentionVector, DecoderState, MelFrame, ReferenceAcousticModel,
    UnitDecoder, WordSpectrogram,
};
pub use frontend::{Chunk, Frontend, FrontendError, Lexicon, Phoneme, PhonemeWord};
pub use metrics::MetricsError;
pub use pipeline::{Engine, InputEvent, Mode, PipelineError, Playback, SessionConfig, SynthesisTimeline, Timing};
pub use policy::{LookaheadPolicy, Policy, PolicyError, Schedule};
pub use vocoder::{NoiseVector, ReferenceVocoder, Vocoder, VocoderConfig, VocoderError, WaveSegment};

pub const N_MELS: usize = 80;
pub const SAMPLE_RATE: u32 = 24_000;
pub const HOP_LENGTH: usize = 300;
pub const WINDOW_LENGTH: usize = 1200;

/// The shipped evaluation corpus, one sentence per line.
pub const ENGLISH_CORPUS: &str = include_str!("../data/corpus_en.txt");

pub fn english_corpus() -> Vec<&'static str> {
    ENGLISH_CORPUS.lines().map(str::trim).filter(|l| !l.is_empty()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Language {
    English,
    Chinese,
}

impl Language {
    /// Minimum phonemes per chunk.
    pub fn chunk_threshold(self) -> usize {
        match self {
            Language::English => 6,
            Language::Chinese => 4,
        }
    }

    /// Default vocoder context frames on each side of a unit.
    pub fn overlap_frames(self) -> usize {
        match self {
            Language::English => 15,
            Language::Chinese => 10,
        }
    }
}
