#![allow(dead_code)]

use itts_core::acoustic::TemplateTable;
use itts_core::pipeline::{CostModel, SessionConfig, Timing};
use itts_core::{english_corpus, Chunk, Engine};

pub const CROSSFADE: usize = 3;
pub const FINAL_LENGTHENING: usize = 3;
pub const PREFIX_HOLD: usize = 2;

pub fn modeled() -> SessionConfig {
    SessionConfig::default().with_timing(Timing::Modeled(CostModel::default()))
}

pub fn corpus(n: usize) -> Vec<&'static str> {
    english_corpus().into_iter().take(n).collect()
}

pub fn symbols(chunks: &[Chunk]) -> Vec<String> {
    chunks.iter().flat_map(|c| c.phonemes().map(|p| p.as_str().to_string())).collect()
}

pub fn chunks(engine: &Engine, text: &str) -> Vec<Chunk> {
    engine.chunks(text, 6).unwrap()
}

/// Template of phoneme `i` of the utterance, lowered by its position.
fn placed(table: &TemplateTable, sym: &str, i: usize) -> [f32; 80] {
    let t = table.get(sym).unwrap().spectrum.bands();
    let shift = (i as f32 * 0.1).min(12.0);
    let mut out = [0.0f32; 80];
    for b in 0..80 {
        let src = b as f32 + shift;
        let lo = src.floor() as usize;
        out[b] = if shift <= 0.0 {
            t[b]
        } else if lo >= 79 {
            t[79]
        } else {
            let frac = src - lo as f32;
            (1.0 - frac) * t[lo] + frac * t[lo + 1]
        };
    }
    out
}

/// Frames of a session over `syms` (utterance positions starting at
/// `offset`), where `next_known[i]` tells whether phoneme `i + 1` had been
/// fed when phoneme `i` was rendered and `extra[i]` holds the frames added to
/// phoneme `i` beyond its template duration.
pub fn oracle_frames(
    table: &TemplateTable,
    syms: &[String],
    next_known: &[bool],
    extra: &[usize],
) -> (Vec<[f32; 80]>, Vec<usize>) {
    let mut frames = Vec::new();
    let mut durations = Vec::new();
    for (i, s) in syms.iter().enumerate() {
        let d = table.get(s).unwrap().duration + extra[i];
        durations.push(d);
        let base = placed(table, s, i);
        let next = if next_known[i] { placed(table, &syms[i + 1], i + 1) } else { [0.0; 80] };
        for k in 0..d {
            let fade = d - CROSSFADE;
            if k < fade {
                frames.push(base);
            } else {
                let w = (k - fade + 1) as f32 / (CROSSFADE + 1) as f32;
                let mut f = [0.0f32; 80];
                for b in 0..80 {
                    f[b] = (1.0 - w) * base[b] + w * next[b];
                }
                frames.push(f);
            }
        }
    }
    (frames, durations)
}

/// Full-sentence frames and per-phoneme durations.
pub fn oracle_full(table: &TemplateTable, syms: &[String]) -> (Vec<[f32; 80]>, Vec<usize>) {
    let n = syms.len();
    let next: Vec<bool> = (0..n).map(|i| i + 1 < n).collect();
    let last: Vec<usize> = (0..n).map(|i| if i + 1 == n { FINAL_LENGTHENING } else { 0 }).collect();
    oracle_frames(table, syms, &next, &last)
}
