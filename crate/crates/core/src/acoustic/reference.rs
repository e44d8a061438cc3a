//! Deterministic template-concatenation acoustic model.
//!
//! Each phoneme renders its template for a fixed number of frames. The last
//! `crossfade_frames` frames blend into the next fed phoneme, or into silence
//! when nothing follows yet. A phoneme with nothing fed after it is held for
//! extra frames: `final_lengthening` when `<eos>` says the sentence ends
//! there, `prefix_hold` when the input has merely run out. Templates drift
//! down the mel axis with utterance position. These effects depend on
//! context, so a prefix-limited session differs from full-sentence decoding.

use std::sync::Arc;

use super::{
    AcousticError, AcousticModel, AcousticSession, AttentionVector, DecoderState, MelFrame, Step, StepOutput,
    TemplateTable,
};
use crate::frontend::Chunk;

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceAcousticConfig {
    pub crossfade_frames: usize,
    /// Extra frames on the last phoneme of a sentence.
    pub final_lengthening: usize,
    /// Extra frames on the last fed phoneme while more input may follow.
    pub prefix_hold: usize,
    /// Downward band shift per preceding phoneme.
    pub declination_step: f32,
    /// Cap on the accumulated shift, in bands.
    pub declination_limit: f32,
}

impl Default for ReferenceAcousticConfig {
    fn default() -> Self {
        Self {
            crossfade_frames: 3,
            final_lengthening: 3,
            prefix_hold: 2,
            declination_step: 0.1,
            declination_limit: 12.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReferenceAcousticModel {
    table: Arc<TemplateTable>,
    config: ReferenceAcousticConfig,
}

impl ReferenceAcousticModel {
    pub fn new(table: TemplateTable, config: ReferenceAcousticConfig) -> Result<Self, AcousticError> {
        if config.crossfade_frames >= table.min_duration() {
            return Err(AcousticError::InvalidConfig(format!(
                "crossfade of {} frames needs every duration above it (shortest is {})",
                config.crossfade_frames,
                table.min_duration()
            )));
        }
        let finite_nonneg = |v: f32| v.is_finite() && v >= 0.0;
        if !finite_nonneg(config.declination_step) || !finite_nonneg(config.declination_limit) {
            return Err(AcousticError::InvalidConfig("declination must be finite and non-negative".into()));
        }
        Ok(Self {
            table: Arc::new(table),
            config,
        })
    }

    /// Shipped templates with default settings.
    pub fn english() -> Self {
        Self::new(TemplateTable::shipped(), ReferenceAcousticConfig::default()).expect("default config is valid")
    }

    pub fn table(&self) -> &TemplateTable {
        &self.table
    }

    pub fn config(&self) -> &ReferenceAcousticConfig {
        &self.config
    }
}

impl AcousticModel for ReferenceAcousticModel {
    type Session = ReferenceSession;

    fn start_session(&self) -> ReferenceSession {
        ReferenceSession {
            table: Arc::clone(&self.table),
            config: self.config.clone(),
            state: DecoderState::default(),
            phonemes: Vec::new(),
            cursor: 0,
            frame_in_phoneme: 0,
            committed: 0,
        }
    }

    fn frame_budget(&self, phonemes: usize) -> usize {
        let extra = self.config.final_lengthening.max(self.config.prefix_hold);
        phonemes * (self.table.max_duration() + extra) + 1
    }
}

#[derive(Debug, Clone)]
pub struct ReferenceSession {
    table: Arc<TemplateTable>,
    config: ReferenceAcousticConfig,
    state: DecoderState,
    phonemes: Vec<usize>,
    cursor: usize,
    frame_in_phoneme: usize,
    committed: usize,
}

impl ReferenceSession {
    fn positioned(&self, i: usize) -> MelFrame {
        let shift = (i as f32 * self.config.declination_step).min(self.config.declination_limit);
        self.table.entry(self.phonemes[i]).spectrum.shifted_down(shift)
    }

    fn attention(&self, index: usize) -> AttentionVector {
        let len = self.phonemes.len() + usize::from(self.state.eos_fed());
        AttentionVector::one_hot(len, index)
    }
}

impl AcousticSession for ReferenceSession {
    fn state(&self) -> &DecoderState {
        &self.state
    }

    fn extend_input(&mut self, chunks: &[Chunk]) -> Result<(), AcousticError> {
        if self.state.eos_fed() {
            return Err(AcousticError::SessionClosed);
        }
        let mut ids = Vec::new();
        for p in chunks.iter().flat_map(|c| c.phonemes()) {
            let id = self
                .table
                .index_of(p.as_str())
                .ok_or_else(|| AcousticError::UnknownPhoneme(p.as_str().to_string()))?;
            ids.push(id);
        }
        self.state.record_chunks(chunks)?;
        self.phonemes.extend(ids);
        Ok(())
    }

    fn feed_eos(&mut self) -> Result<(), AcousticError> {
        self.state.record_eos()
    }

    fn step_frame(&mut self) -> Result<Step, AcousticError> {
        if self.state.stopped() {
            return Err(AcousticError::SessionClosed);
        }
        if self.state.fed_units() == 0 {
            return Err(AcousticError::NoInput);
        }
        let n = self.phonemes.len();
        if self.cursor >= n {
            if !self.state.eos_fed() {
                return Ok(Step::NeedInput);
            }
            self.state.record_frame(1.0);
            return Ok(Step::Frame(Box::new(StepOutput {
                frame: MelFrame::silence(),
                attention: self.attention(n),
                stop_prob: 1.0,
            })));
        }

        let i = self.cursor;
        if self.frame_in_phoneme == 0 {
            let extra = match (i + 1 == n, self.state.eos_fed()) {
                (false, _) => 0,
                (true, true) => self.config.final_lengthening,
                (true, false) => self.config.prefix_hold,
            };
            self.committed = self.table.entry(self.phonemes[i]).duration + extra;
        }
        let k = self.frame_in_phoneme;
        let base = self.positioned(i);
        let fade_start = self.committed - self.config.crossfade_frames;
        let frame = if k < fade_start {
            base
        } else {
            let next = if i + 1 < n { self.positioned(i + 1) } else { MelFrame::silence() };
            let w = (k - fade_start + 1) as f32 / (self.config.crossfade_frames + 1) as f32;
            base.lerp(&next, w)
        };
        let attention = self.attention(i);

        self.frame_in_phoneme += 1;
        if self.frame_in_phoneme == self.committed {
            self.cursor += 1;
            self.frame_in_phoneme = 0;
        }
        self.state.record_frame(0.0);
        Ok(Step::Frame(Box::new(StepOutput {
            frame,
            attention,
            stop_prob: 0.0,
        })))
    }
}
