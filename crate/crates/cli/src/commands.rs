use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use itts_core::metrics::{
    duration_rmse, pitch_rmse, LatencyReport, LatencyRow, MetricsError, PitchTrack, ProsodyRow,
};
use itts_core::pipeline::{parse_schedule, proportional_arrivals, CostModel, ScheduleTable, SessionOutput};
use itts_core::{english_corpus, wav, Engine, Mode, Playback, Policy, SessionConfig, Timing};

use crate::{BenchArgs, Input, ModeArg, PlaybackArg, ProsodyArgs, SessionArgs, ShadowArgs, SynthArgs, TimingArg};

impl SessionArgs {
    fn config(&self, mode: Mode) -> SessionConfig {
        let mut cfg = SessionConfig::default().with_lookahead(self.k1, self.k2).with_mode(mode);
        cfg.delta = self.delta;
        cfg.chunk_threshold = self.chunk_threshold;
        cfg.seed = self.seed;
        cfg.timing = match self.timing {
            TimingArg::Model => Timing::Modeled(CostModel::default()),
            TimingArg::Measured => Timing::Measured,
        };
        cfg.playback = match self.playback {
            PlaybackArg::Simulated => Playback::Simulated,
            PlaybackArg::Wall => Playback::WallClock,
        };
        cfg
    }
}

impl ModeArg {
    fn mode(self) -> Mode {
        match self {
            ModeArg::Full => Mode::Full,
            ModeArg::Incremental => Mode::Incremental,
        }
    }
}

/// Non-empty lines of `path`, or the bundled corpus.
fn load_corpus(path: Option<&Path>) -> Result<Vec<String>> {
    let sentences: Vec<String> = match path {
        Some(p) => fs::read_to_string(p)
            .with_context(|| format!("reading corpus {}", p.display()))?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(String::from)
            .collect(),
        None => english_corpus().into_iter().map(String::from).collect(),
    };
    if sentences.is_empty() {
        bail!("corpus has no sentences");
    }
    Ok(sentences)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn write_outputs(wav_path: &Path, out: &SessionOutput, sample_rate: u32) -> Result<()> {
    wav::write_file(wav_path, &out.waveform(), sample_rate)
        .with_context(|| format!("writing {}", wav_path.display()))?;
    let csv = wav_path.with_extension("csv");
    fs::write(&csv, out.timeline.to_csv()).with_context(|| format!("writing {}", csv.display()))
}

fn lookahead(mode: Mode, s: &SessionArgs) -> Option<(usize, usize)> {
    (mode != Mode::Full).then_some((s.k1, s.k2))
}

pub fn synth(args: SynthArgs) -> Result<()> {
    let engine = Engine::reference();
    let cfg = args.session.config(args.mode.mode());
    let Input { text, corpus } = args.input;
    if let Some(text) = text {
        if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        let out = engine.run(&text, &cfg, None)?;
        return write_outputs(&args.out, &out, engine.sample_rate());
    }
    let sentences = load_corpus(corpus.as_deref())?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    for (i, text) in sentences.iter().enumerate() {
        let out = engine.run(text, &cfg, None).with_context(|| format!("sentence {}", i + 1))?;
        let path: PathBuf = args.out.join(format!("sentence_{:03}.wav", i + 1));
        write_outputs(&path, &out, engine.sample_rate())?;
    }
    Ok(())
}

pub fn bench_latency(args: BenchArgs) -> Result<()> {
    let engine = Engine::reference();
    let sentences = load_corpus(args.corpus.as_deref())?;
    let mut rows = Vec::new();
    for mode in args.mode.iter().map(|m| m.mode()) {
        let cfg = args.session.config(mode);
        for (i, text) in sentences.iter().enumerate() {
            let out = engine.run(text, &cfg, None).with_context(|| format!("sentence {}", i + 1))?;
            let report = LatencyReport::from_timeline(&out.timeline)?;
            let label = (i + 1).to_string();
            rows.push(LatencyRow::new(
                label,
                out.trace.phonemes.len(),
                mode.as_str(),
                lookahead(mode, &args.session),
                &report,
            ));
        }
    }
    let groups = LatencyRow::group_by_length(&rows);
    rows.extend(groups);
    emit(args.out.as_deref(), &LatencyRow::to_csv(&rows))
}

pub fn shadow(args: ShadowArgs) -> Result<()> {
    let engine = Engine::reference();
    let sentences = load_corpus(args.corpus.as_deref())?;
    let mut cfg = args.session.config(Mode::Shadow);
    let (label, policy) = if args.full_policy {
        cfg.policy = Policy::full_sentence();
        ("shadow-full", None)
    } else {
        ("shadow", Some((args.session.k1, args.session.k2)))
    };
    let schedule = match &args.schedule {
        Some(p) => Some(parse_schedule(
            &fs::read_to_string(p).with_context(|| format!("reading schedule {}", p.display()))?,
        )?),
        None => None,
    };
    let mut rows = Vec::new();
    for (i, text) in sentences.iter().enumerate() {
        let id = i + 1;
        let arrivals = match &schedule {
            Some(table) => arrivals_from(table, id)?,
            None => paced_arrivals(&engine, text, &cfg)?,
        };
        let out = engine.run(text, &cfg, Some(&arrivals)).with_context(|| format!("sentence {id}"))?;
        let report = LatencyReport::from_timeline(&out.timeline)?;
        rows.push(LatencyRow::new(id.to_string(), out.trace.phonemes.len(), label, policy, &report));
    }
    let groups = LatencyRow::group_by_length(&rows);
    rows.extend(groups);
    emit(args.out.as_deref(), &LatencyRow::to_csv(&rows))
}

fn arrivals_from(table: &ScheduleTable, id: usize) -> Result<Vec<f64>> {
    match table.get(id) {
        Some(a) => Ok(a.to_vec()),
        None => bail!("schedule has no arrivals for sentence {id}"),
    }
}

/// Chunk `t` arrives once the full-sentence audio of chunks `1..=t` has had
/// time to play.
fn paced_arrivals(engine: &Engine, text: &str, cfg: &SessionConfig) -> Result<Vec<f64>> {
    let reference = engine.run_full_sentence(text, cfg)?;
    let frame_secs = engine.hop_length() as f64 / f64::from(engine.sample_rate());
    let durations: Vec<f64> = reference.trace.unit_frames.iter().map(|r| r.len() as f64 * frame_secs).collect();
    Ok(proportional_arrivals(&durations, 1.0))
}

pub fn prosody(args: ProsodyArgs) -> Result<()> {
    let engine = Engine::reference();
    let sentences = load_corpus(args.corpus.as_deref())?;
    let cfg = args.session.config(Mode::Incremental);
    let (hop, sr) = (engine.hop_length(), engine.sample_rate());
    let mut rows = Vec::new();
    for (i, text) in sentences.iter().enumerate() {
        let full = engine.run_full_sentence(text, &cfg)?;
        let other = if args.independent {
            engine.run_independent(text, &cfg)?
        } else {
            engine.run_incremental(text, &cfg)?
        };
        let fa = full.trace.alignment(hop, sr)?;
        let oa = other.trace.alignment(hop, sr)?;
        let ft = PitchTrack::at_phonemes(&full.waveform(), sr, &fa, 1)?;
        let ot = PitchTrack::at_phonemes(&other.waveform(), sr, &oa, 1)?;
        let pitch = match pitch_rmse(&ft, &ot) {
            Ok(v) => Some(v),
            Err(MetricsError::EmptyComparison) => None,
            Err(e) => return Err(e.into()),
        };
        let (mode, k1, k2) = if args.independent {
            ("independent", None, None)
        } else {
            ("incremental", Some(args.session.k1), Some(args.session.k2))
        };
        rows.push(ProsodyRow {
            sentence_id: (i + 1).to_string(),
            mode: mode.into(),
            k1,
            k2,
            duration_rmse_ms: duration_rmse(&fa, &oa)?,
            pitch_rmse_hz: pitch,
        });
    }
    emit(args.out.as_deref(), &ProsodyRow::to_csv(&rows))
}
