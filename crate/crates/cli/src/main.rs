//! `itts`: incremental text-to-speech from the command line.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "itts", version, about = "Incremental text-to-speech with lookahead policies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize text to WAV plus a timeline CSV.
    Synth(SynthArgs),
    /// Latency report per sentence and per sentence length.
    BenchLatency(BenchArgs),
    /// Latency report with chunks revealed on an arrival schedule.
    Shadow(ShadowArgs),
    /// Duration and pitch error against full-sentence synthesis.
    Prosody(ProsodyArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Input {
    /// Single sentence to synthesize.
    #[arg(long)]
    text: Option<String>,
    /// File with one sentence per line.
    #[arg(long)]
    corpus: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
struct SessionArgs {
    /// Chunks of lookahead before a unit is decoded.
    #[arg(long, default_value_t = 1)]
    k1: usize,
    /// Units of lookahead before a unit is vocoded.
    #[arg(long, default_value_t = 0)]
    k2: usize,
    /// Vocoder context frames on each side of a unit.
    #[arg(long, default_value_t = 15)]
    delta: usize,
    /// Minimum phonemes per chunk.
    #[arg(long = "l", default_value_t = 6)]
    chunk_threshold: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Modeled timing is reproducible across runs; measured timing uses the host clock.
    #[arg(long, value_enum, default_value_t = TimingArg::Model)]
    timing: TimingArg,
    #[arg(long, value_enum, default_value_t = PlaybackArg::Simulated)]
    playback: PlaybackArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TimingArg {
    Model,
    Measured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlaybackArg {
    Simulated,
    Wall,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Full,
    Incremental,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum, default_value_t = ModeArg::Incremental)]
    mode: ModeArg,
    #[command(flatten)]
    session: SessionArgs,
    /// WAV path for `--text`, output directory for a corpus.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// File with one sentence per line. Defaults to the bundled corpus.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Modes to report; repeat the flag for several.
    #[arg(long, value_enum, default_values_t = [ModeArg::Full, ModeArg::Incremental])]
    mode: Vec<ModeArg>,
    #[command(flatten)]
    session: SessionArgs,
    /// CSV path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ShadowArgs {
    /// File with one sentence per line. Defaults to the bundled corpus.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// CSV of chunk arrival times. When absent, chunks arrive at the pace of
    /// their own full-sentence audio.
    #[arg(long)]
    schedule: Option<PathBuf>,
    /// Wait for the whole sentence instead of using the lookahead policy.
    #[arg(long)]
    full_policy: bool,
    #[command(flatten)]
    session: SessionArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ProsodyArgs {
    /// File with one sentence per line. Defaults to the bundled corpus.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Synthesize every chunk on its own instead of incrementally.
    #[arg(long)]
    independent: bool,
    #[command(flatten)]
    session: SessionArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Synth(a) => commands::synth(a),
        Command::BenchLatency(a) => commands::bench_latency(a),
        Command::Shadow(a) => commands::shadow(a),
        Command::Prosody(a) => commands::prosody(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
