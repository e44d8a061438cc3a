//! Unit-level decoding on top of a frame-level session.

use super::{detect_boundary, is_stopped, AcousticError, AcousticSession, MelFrame, Step};
use crate::frontend::Chunk;

/// Frames attributed to one unit, positioned in utterance frame coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct WordSpectrogram {
    /// 1-based unit index.
    pub unit_index: usize,
    /// Utterance frame index of `frames[0]`.
    pub first_frame: usize,
    pub frames: Vec<MelFrame>,
}

impl WordSpectrogram {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn end_frame(&self) -> usize {
        self.first_frame + self.frames.len()
    }
}

/// Drives a session and splits its frames into per-unit spectrograms.
///
/// A frame belongs to the first unit not yet complete after the boundary
/// rule has been applied to that frame's attention. A `NeedInput` step
/// completes every fed unit, as does a stop.
#[derive(Debug)]
pub struct UnitDecoder<S> {
    session: S,
    units: Vec<WordSpectrogram>,
    completed: usize,
    frames_total: usize,
    argmax_trace: Vec<usize>,
    regressions: usize,
    finished: bool,
}

impl<S: AcousticSession> UnitDecoder<S> {
    pub fn new(session: S) -> Self {
        Self {
            session,
            units: Vec::new(),
            completed: 0,
            frames_total: 0,
            argmax_trace: Vec::new(),
            regressions: 0,
            finished: false,
        }
    }

    pub fn session(&self) -> &S {
        &self.session
    }

    pub fn feed(&mut self, chunks: &[Chunk]) -> Result<(), AcousticError> {
        self.session.extend_input(chunks)?;
        let fed = self.session.state().fed_units();
        while self.units.len() < fed {
            self.units.push(WordSpectrogram {
                unit_index: self.units.len() + 1,
                first_frame: self.frames_total,
                frames: Vec::new(),
            });
        }
        Ok(())
    }

    pub fn feed_eos(&mut self) -> Result<(), AcousticError> {
        self.session.feed_eos()
    }

    pub fn fed_units(&self) -> usize {
        self.session.state().fed_units()
    }

    pub fn eos_fed(&self) -> bool {
        self.session.state().eos_fed()
    }

    pub fn completed_units(&self) -> usize {
        self.completed
    }

    pub fn finished(&self) -> bool {
        self.finished
    }

    /// Steps until units `1..=unit` are complete. Returns the number of
    /// frames decoded by this call.
    pub fn decode_through(&mut self, unit: usize) -> Result<usize, AcousticError> {
        let mut decoded = 0;
        while self.completed < unit {
            if self.finished {
                return Err(AcousticError::Starved { unit: self.completed + 1 });
            }
            match self.session.step_frame()? {
                Step::NeedInput => {
                    let fed = self.fed_units();
                    if fed <= self.completed {
                        return Err(AcousticError::Starved { unit: self.completed + 1 });
                    }
                    self.completed = fed;
                }
                Step::Frame(out) => {
                    decoded += 1;
                    let pos = out.attention.argmax();
                    if is_stopped(out.stop_prob) {
                        self.completed = self.fed_units();
                        self.finished = true;
                        continue;
                    }
                    if let Some(t) = detect_boundary(self.session.state(), self.completed, &out.attention) {
                        self.completed = t;
                    }
                    if self.argmax_trace.last().is_some_and(|&prev| pos < prev) {
                        self.regressions += 1;
                    }
                    self.argmax_trace.push(pos);
                    // trailing frames after the last boundary stay with the final unit
                    let idx = if self.eos_fed() {
                        self.completed.min(self.units.len().saturating_sub(1))
                    } else {
                        self.completed
                    };
                    let target = self.units.get_mut(idx).ok_or(AcousticError::FrameBeyondInput)?;
                    if target.frames.is_empty() {
                        target.first_frame = self.frames_total;
                    }
                    target.frames.push(out.frame);
                    self.frames_total += 1;
                }
            }
        }
        Ok(decoded)
    }

    /// Decodes the remaining input through the stop frame; `<eos>` must
    /// have been fed.
    pub fn finish(&mut self) -> Result<usize, AcousticError> {
        if !self.eos_fed() {
            return Err(AcousticError::Starved { unit: self.fed_units() + 1 });
        }
        let mut decoded = self.decode_through(self.fed_units())?;
        while !self.finished {
            match self.session.step_frame()? {
                Step::Frame(out) if is_stopped(out.stop_prob) => self.finished = true,
                Step::Frame(out) => {
                    let last = self.units.last_mut().ok_or(AcousticError::NoInput)?;
                    last.frames.push(out.frame);
                    self.argmax_trace.push(out.attention.argmax());
                    self.frames_total += 1;
                }
                Step::NeedInput => return Err(AcousticError::Starved { unit: self.fed_units() + 1 }),
            }
            decoded += 1;
        }
        Ok(decoded)
    }

    /// Spectrogram of 1-based `unit`; complete only once
    /// `completed_units() >= unit`.
    pub fn unit(&self, unit: usize) -> Option<&WordSpectrogram> {
        unit.checked_sub(1).and_then(|i| self.units.get(i))
    }

    pub fn units(&self) -> &[WordSpectrogram] {
        &self.units
    }

    pub fn total_frames(&self) -> usize {
        self.frames_total
    }

    /// All emitted frames in order.
    pub fn frames(&self) -> Vec<MelFrame> {
        self.units.iter().flat_map(|u| u.frames.iter().copied()).collect()
    }

    /// 1-based attention argmax of every kept frame.
    pub fn argmax_trace(&self) -> &[usize] {
        &self.argmax_trace
    }

    /// Frames whose argmax moved backward relative to the previous frame.
    pub fn attention_regressions(&self) -> usize {
        self.regressions
    }
}
