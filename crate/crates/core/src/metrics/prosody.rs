//! Duration and pitch deviation between two renderings of a sentence.

use std::fmt::Write as _;

use super::{domain, MetricsError};
use crate::frontend::Phoneme;

pub const MIN_F0: f64 = 50.0;
pub const MAX_F0: f64 = 500.0;
pub const VOICING_THRESHOLD: f64 = 0.5;
/// Mean square below which a window counts as silent.
pub const ENERGY_GATE: f64 = 1e-6;
pub const ANALYSIS_WINDOW_S: f64 = 0.040;
pub const ANALYSIS_HOP_S: f64 = 0.010;

#[derive(Debug, Clone, PartialEq)]
pub struct AlignedPhoneme {
    pub symbol: String,
    /// Seconds.
    pub start: f64,
    pub end: f64,
}

impl AlignedPhoneme {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhonemeAlignment {
    phonemes: Vec<AlignedPhoneme>,
}

impl PhonemeAlignment {
    pub fn new(phonemes: Vec<AlignedPhoneme>) -> Result<Self, MetricsError> {
        let mut prev_end = f64::NEG_INFINITY;
        for p in &phonemes {
            if p.end.partial_cmp(&p.start) != Some(std::cmp::Ordering::Greater) || p.start < prev_end {
                return Err(domain(format!("phoneme {} spans {}..{} after {prev_end}", p.symbol, p.start, p.end)));
            }
            prev_end = p.end;
        }
        Ok(Self { phonemes })
    }

    /// Back-to-back phonemes from durations in milliseconds.
    pub fn from_durations_ms(symbols: &[&str], durations_ms: &[f64]) -> Result<Self, MetricsError> {
        if symbols.len() != durations_ms.len() {
            return Err(domain("one duration per symbol"));
        }
        let mut t = 0.0;
        let phonemes = symbols
            .iter()
            .zip(durations_ms)
            .map(|(s, d)| {
                let start = t;
                t += d / 1000.0;
                AlignedPhoneme {
                    symbol: s.to_string(),
                    start,
                    end: t,
                }
            })
            .collect();
        Self::new(phonemes)
    }

    /// Alignment from the 1-based attention argmax of every frame. Each
    /// phoneme must own one contiguous, non-empty run of frames, in order;
    /// frames attending past the last phoneme are ignored.
    pub fn from_frame_trace(
        symbols: &[Phoneme],
        argmax_trace: &[usize],
        hop: usize,
        sample_rate: u32,
    ) -> Result<Self, MetricsError> {
        let frame_s = hop as f64 / f64::from(sample_rate);
        let mut spans: Vec<(usize, usize)> = Vec::with_capacity(symbols.len());
        for (f, &pos) in argmax_trace.iter().enumerate() {
            if pos == 0 || pos > symbols.len() {
                continue;
            }
            let seen = spans.len();
            match spans.last_mut() {
                Some((_, end)) if seen == pos && *end == f => *end = f + 1,
                _ if seen + 1 == pos => spans.push((f, f + 1)),
                _ => {
                    return Err(MetricsError::AlignmentMismatch(format!(
                        "frame {f} attends phoneme {pos} out of order"
                    )))
                }
            }
        }
        if spans.len() != symbols.len() {
            return Err(MetricsError::AlignmentMismatch(format!(
                "{} of {} phonemes received frames",
                spans.len(),
                symbols.len()
            )));
        }
        let phonemes = symbols
            .iter()
            .zip(spans)
            .map(|(s, (a, b))| AlignedPhoneme {
                symbol: s.as_str().to_string(),
                start: a as f64 * frame_s,
                end: b as f64 * frame_s,
            })
            .collect();
        Self::new(phonemes)
    }

    pub fn phonemes(&self) -> &[AlignedPhoneme] {
        &self.phonemes
    }

    pub fn len(&self) -> usize {
        self.phonemes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phonemes.is_empty()
    }

    pub fn mean_duration(&self) -> Option<f64> {
        (!self.is_empty()).then(|| self.phonemes.iter().map(AlignedPhoneme::duration).sum::<f64>() / self.len() as f64)
    }
}

/// RMSE of per-phoneme durations, in milliseconds.
pub fn duration_rmse(a: &PhonemeAlignment, b: &PhonemeAlignment) -> Result<f64, MetricsError> {
    if a.len() != b.len() || a.phonemes.iter().zip(&b.phonemes).any(|(x, y)| x.symbol != y.symbol) {
        return Err(MetricsError::AlignmentMismatch("phoneme sequences differ".into()));
    }
    if a.is_empty() {
        return Err(MetricsError::AlignmentMismatch("empty alignments".into()));
    }
    let sq: f64 = a
        .phonemes
        .iter()
        .zip(&b.phonemes)
        .map(|(x, y)| ((x.duration() - y.duration()) * 1000.0).powi(2))
        .sum();
    Ok((sq / a.len() as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PitchTrack {
    /// `None` marks an unvoiced frame.
    values: Vec<Option<f64>>,
    /// Seconds between analysis frames; 0 for phoneme-anchored tracks.
    hop: f64,
}

impl PitchTrack {
    pub fn new(values: Vec<Option<f64>>, hop: f64) -> Result<Self, MetricsError> {
        if let Some(v) = values.iter().flatten().find(|v| !(MIN_F0..=MAX_F0).contains(*v)) {
            return Err(domain(format!("F0 {v} Hz outside [{MIN_F0}, {MAX_F0}]")));
        }
        Ok(Self { values, hop })
    }

    pub fn voiced(values: &[f64], hop: f64) -> Result<Self, MetricsError> {
        Self::new(values.iter().map(|&v| Some(v)).collect(), hop)
    }

    /// Fixed-hop analysis over the whole signal.
    pub fn analyze(samples: &[f32], sample_rate: u32) -> Result<Self, MetricsError> {
        let sr = f64::from(sample_rate);
        let win = (ANALYSIS_WINDOW_S * sr).round() as usize;
        let hop = (ANALYSIS_HOP_S * sr).round() as usize;
        if samples.len() < win {
            return Err(domain("signal shorter than one analysis window"));
        }
        let values = (0..=(samples.len() - win) / hop)
            .map(|i| estimate_f0(&samples[i * hop..i * hop + win], sample_rate))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(values, ANALYSIS_HOP_S)
    }

    /// `points_per_phoneme` analysis windows per aligned phoneme, centred at
    /// evenly spaced fractions of its span and clamped inside the signal.
    /// Tracks of two renderings with the same phonemes line up entry by entry.
    pub fn at_phonemes(
        samples: &[f32],
        sample_rate: u32,
        alignment: &PhonemeAlignment,
        points_per_phoneme: usize,
    ) -> Result<Self, MetricsError> {
        let sr = f64::from(sample_rate);
        let win = (ANALYSIS_WINDOW_S * sr).round() as usize;
        if samples.len() < win {
            return Err(domain("signal shorter than one analysis window"));
        }
        let mut values = Vec::with_capacity(alignment.len() * points_per_phoneme);
        for p in alignment.phonemes() {
            for i in 0..points_per_phoneme {
                let centre = p.start + p.duration() * (i as f64 + 0.5) / points_per_phoneme as f64;
                let start = ((centre * sr).round() as usize).saturating_sub(win / 2).min(samples.len() - win);
                values.push(estimate_f0(&samples[start..start + win], sample_rate)?);
            }
        }
        Self::new(values, 0.0)
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn hop(&self) -> f64 {
        self.hop
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn voiced_mean(&self) -> Option<f64> {
        let voiced: Vec<f64> = self.values.iter().flatten().copied().collect();
        (!voiced.is_empty()).then(|| voiced.iter().sum::<f64>() / voiced.len() as f64)
    }
}

/// RMSE over frames voiced in both tracks, in Hz.
pub fn pitch_rmse(a: &PitchTrack, b: &PitchTrack) -> Result<f64, MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::AlignmentMismatch(format!("track lengths {} and {}", a.len(), b.len())));
    }
    let diffs: Vec<f64> = a
        .values
        .iter()
        .zip(&b.values)
        .filter_map(|(x, y)| Some(x.as_ref()? - y.as_ref()?))
        .collect();
    if diffs.is_empty() {
        return Err(MetricsError::EmptyComparison);
    }
    Ok((diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64).sqrt())
}

/// Normalized-autocorrelation F0 estimate over lags for 50..500 Hz.
/// Returns `None` for silent or unvoiced windows.
pub fn estimate_f0(samples: &[f32], sample_rate: u32) -> Result<Option<f64>, MetricsError> {
    let sr = f64::from(sample_rate);
    let max_lag = (sr / MIN_F0).ceil() as usize;
    let min_lag = ((sr / MAX_F0).floor() as usize).max(2);
    let n = samples.len();
    if n < 2 * max_lag {
        return Err(domain(format!("window of {n} samples is shorter than {}", 2 * max_lag)));
    }
    let x: Vec<f64> = samples.iter().map(|&v| f64::from(v)).collect();
    let energy = x.iter().map(|v| v * v).sum::<f64>() / n as f64;
    if energy < ENERGY_GATE {
        return Ok(None);
    }
    let mut sq = vec![0.0; n + 1];
    for (i, v) in x.iter().enumerate() {
        sq[i + 1] = sq[i] + v * v;
    }
    let corr = |lag: usize| {
        let num: f64 = x[..n - lag].iter().zip(&x[lag..]).map(|(a, b)| a * b).sum();
        let den = (sq[n - lag] * (sq[n] - sq[lag])).sqrt();
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    };
    let lo = min_lag - 1;
    let r: Vec<f64> = (lo..=max_lag + 1).map(corr).collect();
    let at = |lag: usize| r[lag - lo];
    let global = (min_lag..=max_lag).map(at).fold(f64::NEG_INFINITY, f64::max);
    if global < VOICING_THRESHOLD {
        return Ok(None);
    }
    let Some(best) = (min_lag..=max_lag)
        .find(|&lag| at(lag) >= 0.9 * global && at(lag) >= at(lag - 1) && at(lag) >= at(lag + 1))
    else {
        return Ok(None);
    };
    let (y0, y1, y2) = (at(best - 1), at(best), at(best + 1));
    let curve = y0 - 2.0 * y1 + y2;
    let offset = if curve != 0.0 { 0.5 * (y0 - y2) / curve } else { 0.0 };
    let f0 = sr / (best as f64 + offset);
    Ok((MIN_F0..=MAX_F0).contains(&f0).then_some(f0))
}

pub const PROSODY_HEADER: &str = "sentence_id,mode,k1,k2,duration_rmse_ms,pitch_rmse_hz";

#[derive(Debug, Clone, PartialEq)]
pub struct ProsodyRow {
    pub sentence_id: String,
    pub mode: String,
    pub k1: Option<usize>,
    pub k2: Option<usize>,
    pub duration_rmse_ms: f64,
    /// `None` when no frames were voiced in both renderings.
    pub pitch_rmse_hz: Option<f64>,
}

impl ProsodyRow {
    pub fn csv_line(&self) -> String {
        let opt = |v: Option<usize>| v.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{:.6},{}",
            self.sentence_id,
            self.mode,
            opt(self.k1),
            opt(self.k2),
            self.duration_rmse_ms,
            self.pitch_rmse_hz.map(|v| format!("{v:.6}")).unwrap_or_default()
        )
    }

    pub fn to_csv(rows: &[ProsodyRow]) -> String {
        let mut out = String::from(PROSODY_HEADER);
        out.push('\n');
        for r in rows {
            let _ = writeln!(out, "{}", r.csv_line());
        }
        out
    }
}
