//! Streaming sessions: frontend, policy, acoustic model, vocoder, playback.
//!
//! Units are synthesized serially on the calling thread and handed to a
//! playback thread through a bounded queue, so playback of unit `t` overlaps
//! synthesis of unit `t + 1`. With simulated playback the playback thread
//! advances a virtual clock instead of sleeping.

pub mod schedule;
pub mod timeline;

pub use schedule::{parse_schedule, proportional_arrivals, ScheduleTable};
pub use timeline::{Playhead, SynthesisTimeline, UnitTiming, TIMELINE_HEADER};

use std::fmt;
use std::ops::Range;
use std::str::FromStr;
use std::sync::mpsc::{sync_channel, Receiver, SyncSender};
use std::thread;
use std::time::{Duration, Instant};

use crate::acoustic::{AcousticError, AcousticModel, ReferenceAcousticModel, UnitDecoder};
use crate::frontend::{chunk_words, Chunk, Frontend, FrontendError, Phoneme};
use crate::metrics::{MetricsError, PhonemeAlignment};
use crate::policy::{LookaheadPolicy, Policy, PolicyError};
use crate::vocoder::{
    sample_noise, synthesize_full, synthesize_overlap, ReferenceVocoder, Vocoder, VocoderError, WaveSegment,
};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Acoustic(#[from] AcousticError),
    #[error(transparent)]
    Vocoder(#[from] VocoderError),
    #[error("arrival schedule: {0}")]
    Schedule(String),
    #[error("invalid session config: {0}")]
    Config(String),
    #[error("playback thread stopped unexpectedly")]
    Playback,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Full,
    Incremental,
    Shadow,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Full => "full",
            Mode::Incremental => "incremental",
            Mode::Shadow => "shadow",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(Mode::Full),
            "incremental" => Ok(Mode::Incremental),
            "shadow" => Ok(Mode::Shadow),
            _ => Err(format!("unknown mode {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Playback {
    /// Virtual clock; nothing sleeps.
    #[default]
    Simulated,
    /// Real time: waits for input arrivals and sleeps through playback.
    WallClock,
}

/// Synthesis cost charged per unit of work instead of measuring it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    pub seconds_per_frame: f64,
    pub seconds_per_sample: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        Self {
            seconds_per_frame: 1e-3,
            seconds_per_sample: 2e-6,
        }
    }
}

impl CostModel {
    pub fn cost(&self, frames: usize, samples: usize) -> f64 {
        frames as f64 * self.seconds_per_frame + samples as f64 * self.seconds_per_sample
    }
}

/// How synthesis durations are obtained under simulated playback. Wall-clock
/// playback always measures.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Timing {
    #[default]
    Measured,
    Modeled(CostModel),
}

#[derive(Debug, Clone)]
pub struct SessionConfig {
    pub policy: Policy,
    /// Vocoder context frames on each side of a unit.
    pub delta: usize,
    /// Minimum phonemes per chunk.
    pub chunk_threshold: usize,
    pub seed: u64,
    pub mode: Mode,
    pub playback: Playback,
    pub timing: Timing,
    /// Segments the playback queue holds before synthesis blocks.
    pub queue_capacity: usize,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            policy: Policy::lookahead(LookaheadPolicy::default()),
            delta: 15,
            chunk_threshold: 6,
            seed: 42,
            mode: Mode::Incremental,
            playback: Playback::Simulated,
            timing: Timing::Measured,
            queue_capacity: 4,
        }
    }
}

impl SessionConfig {
    pub fn with_lookahead(mut self, k1: usize, k2: usize) -> Self {
        self.policy = Policy::lookahead(LookaheadPolicy::new(k1, k2));
        self
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_timing(mut self, timing: Timing) -> Self {
        self.timing = timing;
        self
    }
}

/// A chunk and the time it becomes available to the synthesizer.
#[derive(Debug, Clone, PartialEq)]
pub struct InputEvent {
    pub chunk: Chunk,
    pub arrival_time: f64,
}

/// Decoder-side record of a session, for alignment and boundary checks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DecodeTrace {
    pub phonemes: Vec<Phoneme>,
    /// 1-based attention argmax of every emitted frame, in utterance order.
    pub argmax: Vec<usize>,
    /// Frame span of every unit in utterance coordinates.
    pub unit_frames: Vec<Range<usize>>,
    pub attention_regressions: usize,
}

impl DecodeTrace {
    pub fn alignment(&self, hop: usize, sample_rate: u32) -> Result<PhonemeAlignment, MetricsError> {
        PhonemeAlignment::from_frame_trace(&self.phonemes, &self.argmax, hop, sample_rate)
    }

    pub fn total_frames(&self) -> usize {
        self.unit_frames.last().map_or(0, |r| r.end)
    }

    /// Frame index where each unit after the first begins.
    pub fn unit_boundaries(&self) -> Vec<usize> {
        self.unit_frames.iter().skip(1).map(|r| r.start).collect()
    }
}

#[derive(Debug, Clone)]
pub struct SessionOutput {
    pub segments: Vec<WaveSegment>,
    pub timeline: SynthesisTimeline,
    pub trace: DecodeTrace,
}

impl SessionOutput {
    pub fn waveform(&self) -> Vec<f32> {
        self.segments.iter().flat_map(|s| s.samples.iter().copied()).collect()
    }
}

struct Produced {
    segment: WaveSegment,
    syn_start: f64,
    syn_finish: f64,
    input_available: Option<f64>,
}

#[derive(Default)]
struct Work {
    frames: usize,
    samples: usize,
}

enum Clock {
    Virtual { now: f64, timing: Timing },
    Wall { origin: Instant },
}

fn since(origin: Instant) -> f64 {
    origin.elapsed().as_secs_f64()
}

fn sleep_until(origin: Instant, t: f64) {
    let now = since(origin);
    if t > now {
        thread::sleep(Duration::from_secs_f64(t - now));
    }
}

impl Clock {
    fn begin(&mut self, ready: f64) -> f64 {
        match self {
            Clock::Virtual { now, .. } => {
                *now = now.max(ready);
                *now
            }
            Clock::Wall { origin } => {
                sleep_until(*origin, ready);
                since(*origin)
            }
        }
    }

    fn finish(&mut self, start: f64, work: &Work, measured: Duration) -> f64 {
        match self {
            Clock::Virtual { now, timing } => {
                *now = start
                    + match timing {
                        Timing::Measured => measured.as_secs_f64(),
                        Timing::Modeled(cost) => cost.cost(work.frames, work.samples),
                    };
                *now
            }
            Clock::Wall { origin } => since(*origin),
        }
    }
}

struct Producer {
    tx: SyncSender<Produced>,
    clock: Clock,
}

impl Producer {
    /// Runs `work` once `ready` has passed and the previous unit is done,
    /// then queues its segment for playback.
    fn unit<F>(&mut self, ready: f64, input_available: Option<f64>, work: F) -> Result<(), PipelineError>
    where
        F: FnOnce() -> Result<(WaveSegment, Work), PipelineError>,
    {
        let syn_start = self.clock.begin(ready);
        let began = Instant::now();
        let (segment, work) = work()?;
        let syn_finish = self.clock.finish(syn_start, &work, began.elapsed());
        self.tx
            .send(Produced {
                segment,
                syn_start,
                syn_finish,
                input_available,
            })
            .map_err(|_| PipelineError::Playback)
    }
}

fn play(rx: Receiver<Produced>, playback: Playback, origin: Instant, sample_rate: u32) -> (Vec<WaveSegment>, SynthesisTimeline) {
    let mut head = Playhead::default();
    let mut wall_end = 0.0f64;
    let mut segments = Vec::new();
    let mut timeline = SynthesisTimeline::default();
    for p in rx {
        let a = p.segment.duration(sample_rate);
        let (play_start, play_end) = match playback {
            Playback::Simulated => head.place(p.syn_finish, a),
            Playback::WallClock => {
                sleep_until(origin, wall_end);
                let start = since(origin);
                thread::sleep(Duration::from_secs_f64(a));
                wall_end = since(origin);
                (start, wall_end)
            }
        };
        timeline.units.push(UnitTiming {
            unit: p.segment.unit_index,
            input_available: p.input_available,
            syn_start: p.syn_start,
            syn_finish: p.syn_finish,
            play_start,
            play_end,
            audio_duration: a,
        });
        segments.push(p.segment);
    }
    (segments, timeline)
}

fn check_arrivals(arrivals: &[f64]) -> Result<(), PipelineError> {
    let mut prev = 0.0;
    for (i, &t) in arrivals.iter().enumerate() {
        if !t.is_finite() || t < prev {
            return Err(PipelineError::Schedule(format!(
                "arrival {t} of chunk {} is negative, non-finite or earlier than the previous one",
                i + 1
            )));
        }
        prev = t;
    }
    Ok(())
}

fn trace_of<S: crate::acoustic::AcousticSession>(dec: &UnitDecoder<S>, chunks: &[Chunk]) -> DecodeTrace {
    DecodeTrace {
        phonemes: chunks.iter().flat_map(|c| c.phonemes().cloned()).collect(),
        argmax: dec.argmax_trace().to_vec(),
        unit_frames: dec.units().iter().map(|u| u.first_frame..u.end_frame()).collect(),
        attention_regressions: dec.attention_regressions(),
    }
}

/// The synthesizer: a frontend and the two model stages.
#[derive(Debug, Clone)]
pub struct Engine<A = ReferenceAcousticModel, V = ReferenceVocoder> {
    frontend: Frontend,
    acoustic: A,
    vocoder: V,
}

impl Engine {
    /// English lexicon with the reference acoustic model and causal vocoder.
    pub fn reference() -> Self {
        Self::new(
            Frontend::english(6).expect("positive threshold"),
            ReferenceAcousticModel::english(),
            ReferenceVocoder::default(),
        )
    }
}

impl<A: AcousticModel, V: Vocoder> Engine<A, V> {
    pub fn new(frontend: Frontend, acoustic: A, vocoder: V) -> Self {
        Self {
            frontend,
            acoustic,
            vocoder,
        }
    }

    pub fn frontend(&self) -> &Frontend {
        &self.frontend
    }

    pub fn acoustic(&self) -> &A {
        &self.acoustic
    }

    pub fn vocoder(&self) -> &V {
        &self.vocoder
    }

    pub fn sample_rate(&self) -> u32 {
        self.vocoder.config().sample_rate
    }

    pub fn hop_length(&self) -> usize {
        self.vocoder.config().hop_length
    }

    pub fn chunks(&self, text: &str, threshold: usize) -> Result<Vec<Chunk>, PipelineError> {
        Ok(chunk_words(self.frontend.words(text)?, threshold)?)
    }

    /// Dispatches on `cfg.mode`. Shadow mode needs one arrival time per chunk.
    pub fn run(&self, text: &str, cfg: &SessionConfig, arrivals: Option<&[f64]>) -> Result<SessionOutput, PipelineError> {
        let chunks = self.chunks(text, cfg.chunk_threshold)?;
        match cfg.mode {
            Mode::Full => self.full_from_chunks(&chunks, arrivals, cfg),
            Mode::Incremental => self.incremental_from_chunks(&chunks, arrivals, cfg),
            Mode::Shadow => {
                let arrivals =
                    arrivals.ok_or_else(|| PipelineError::Config("shadow mode needs an arrival schedule".into()))?;
                if arrivals.len() != chunks.len() {
                    return Err(PipelineError::Schedule(format!(
                        "{} arrival times for {} chunks",
                        arrivals.len(),
                        chunks.len()
                    )));
                }
                self.incremental_from_chunks(&chunks, Some(arrivals), cfg)
            }
        }
    }

    /// Whole-sentence decoding and vocoding before any playback.
    pub fn run_full_sentence(&self, text: &str, cfg: &SessionConfig) -> Result<SessionOutput, PipelineError> {
        let chunks = self.chunks(text, cfg.chunk_threshold)?;
        self.full_from_chunks(&chunks, None, cfg)
    }

    /// Prefix-to-prefix synthesis with all text available at time 0.
    pub fn run_incremental(&self, text: &str, cfg: &SessionConfig) -> Result<SessionOutput, PipelineError> {
        let chunks = self.chunks(text, cfg.chunk_threshold)?;
        self.incremental_from_chunks(&chunks, None, cfg)
    }

    /// Prefix-to-prefix synthesis with chunks revealed at their arrival
    /// times. Arrival times must be non-decreasing.
    pub fn run_shadow(&self, events: &[InputEvent], cfg: &SessionConfig) -> Result<SessionOutput, PipelineError> {
        let chunks: Vec<Chunk> = events.iter().map(|e| e.chunk.clone()).collect();
        let arrivals: Vec<f64> = events.iter().map(|e| e.arrival_time).collect();
        self.incremental_from_chunks(&chunks, Some(&arrivals), cfg)
    }

    /// Every chunk synthesized as a sentence of its own and concatenated.
    pub fn run_independent(&self, text: &str, cfg: &SessionConfig) -> Result<SessionOutput, PipelineError> {
        let chunks = self.chunks(text, cfg.chunk_threshold)?;
        let hop = self.hop_length();
        let (trace, segments, timeline) = self.session(cfg, |producer| {
            let mut trace = DecodeTrace {
                phonemes: chunks.iter().flat_map(|c| c.phonemes().cloned()).collect(),
                ..DecodeTrace::default()
            };
            let mut phoneme_offset = 0;
            for (i, chunk) in chunks.iter().enumerate() {
                producer.unit(0.0, Some(0.0), || {
                    let mut dec = UnitDecoder::new(self.acoustic.start_session());
                    dec.feed(std::slice::from_ref(chunk))?;
                    dec.feed_eos()?;
                    let frames = dec.finish()?;
                    let mel = dec.frames();
                    let z = sample_noise(cfg.seed, self.acoustic.frame_budget(chunk.phoneme_count()), hop)?;
                    let samples = synthesize_full(&self.vocoder, &mel, &z)?;
                    let start = trace.total_frames();
                    trace.unit_frames.push(start..start + mel.len());
                    trace.argmax.extend(dec.argmax_trace().iter().map(|p| p + phoneme_offset));
                    trace.attention_regressions += dec.attention_regressions();
                    let work = Work {
                        frames,
                        samples: samples.len(),
                    };
                    Ok((
                        WaveSegment {
                            unit_index: i + 1,
                            frames: start..start + mel.len(),
                            samples,
                        },
                        work,
                    ))
                })?;
                phoneme_offset += chunk.phoneme_count();
            }
            Ok(trace)
        })?;
        Ok(SessionOutput {
            segments,
            timeline,
            trace,
        })
    }

    fn session<T, F>(&self, cfg: &SessionConfig, body: F) -> Result<(T, Vec<WaveSegment>, SynthesisTimeline), PipelineError>
    where
        F: FnOnce(&mut Producer) -> Result<T, PipelineError>,
    {
        if cfg.queue_capacity == 0 {
            return Err(PipelineError::Config("queue capacity must be positive".into()));
        }
        let (tx, rx) = sync_channel(cfg.queue_capacity);
        let origin = Instant::now();
        let clock = match cfg.playback {
            Playback::Simulated => Clock::Virtual {
                now: 0.0,
                timing: cfg.timing,
            },
            Playback::WallClock => Clock::Wall { origin },
        };
        let playback = cfg.playback;
        let sample_rate = self.sample_rate();
        thread::scope(|s| {
            let player = s.spawn(move || play(rx, playback, origin, sample_rate));
            let mut producer = Producer { tx, clock };
            let result = body(&mut producer);
            drop(producer);
            let (segments, timeline) = player.join().map_err(|_| PipelineError::Playback)?;
            Ok((result?, segments, timeline))
        })
    }

    fn full_from_chunks(
        &self,
        chunks: &[Chunk],
        arrivals: Option<&[f64]>,
        cfg: &SessionConfig,
    ) -> Result<SessionOutput, PipelineError> {
        if let Some(a) = arrivals {
            check_arrivals(a)?;
        }
        let ready = arrivals.and_then(|a| a.last().copied()).unwrap_or(0.0);
        let total: usize = chunks.iter().map(Chunk::phoneme_count).sum();
        let z = sample_noise(cfg.seed, self.acoustic.frame_budget(total), self.hop_length())?;
        let (trace, segments, timeline) = self.session(cfg, |producer| {
            let mut trace = DecodeTrace::default();
            producer.unit(ready, Some(ready), || {
                let mut dec = UnitDecoder::new(self.acoustic.start_session());
                dec.feed(chunks)?;
                dec.feed_eos()?;
                let frames = dec.finish()?;
                let mel = dec.frames();
                let samples = synthesize_full(&self.vocoder, &mel, &z)?;
                trace = trace_of(&dec, chunks);
                let work = Work {
                    frames,
                    samples: samples.len(),
                };
                Ok((
                    WaveSegment {
                        unit_index: 1,
                        frames: 0..mel.len(),
                        samples,
                    },
                    work,
                ))
            })?;
            Ok(trace)
        })?;
        Ok(SessionOutput {
            segments,
            timeline,
            trace,
        })
    }

    fn incremental_from_chunks(
        &self,
        chunks: &[Chunk],
        arrivals: Option<&[f64]>,
        cfg: &SessionConfig,
    ) -> Result<SessionOutput, PipelineError> {
        let m = chunks.len();
        cfg.policy.validate(m)?;
        if let Some(a) = arrivals {
            check_arrivals(a)?;
            if a.len() != m {
                return Err(PipelineError::Schedule(format!("{} arrival times for {m} chunks", a.len())));
            }
        }
        let policy = &cfg.policy;
        let total: usize = chunks.iter().map(Chunk::phoneme_count).sum();
        let z = sample_noise(cfg.seed, self.acoustic.frame_budget(total), self.hop_length())?;
        let mut dec = UnitDecoder::new(self.acoustic.start_session());
        let (_, segments, timeline) = self.session(cfg, |producer| {
            for t in 1..=m {
                let ht = policy.h(t, m)?;
                let needed = policy.g(ht, m)?;
                let ready = arrivals.map_or(0.0, |a| a[needed - 1]);
                let input_available = Some(arrivals.map_or(0.0, |a| a[t - 1]));
                producer.unit(ready, input_available, || {
                    let mut work = Work::default();
                    for u in dec.completed_units() + 1..=ht {
                        let gu = policy.g(u, m)?;
                        if dec.fed_units() < gu {
                            let fed = dec.fed_units();
                            dec.feed(&chunks[fed..gu])?;
                        }
                        if gu == m && !dec.eos_fed() {
                            dec.feed_eos()?;
                        }
                        work.frames += dec.decode_through(u)?;
                    }
                    let window = &dec.units()[t.saturating_sub(2)..ht];
                    let segment = synthesize_overlap(&self.vocoder, window, t, &z, cfg.delta)?;
                    work.samples = segment.samples.len();
                    Ok((segment, work))
                })?;
            }
            Ok(())
        })?;
        Ok(SessionOutput {
            segments,
            timeline,
            trace: trace_of(&dec, chunks),
        })
    }
}
