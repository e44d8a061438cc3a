//! Time balance, chunk lag, first-audio latency and real-time factor.

use std::fmt::Write as _;

use super::{domain, MetricsError};
use crate::pipeline::timeline::{fmt_secs, SynthesisTimeline};

/// `TB(t) = max(TB(t-1), 0) + a_t - s_{t+1}` with `TB(0) = 0` and
/// `s_{m+1} = 0`. `a` and `s` hold per-unit audio and synthesis durations.
pub fn time_balance(a: &[f64], s: &[f64]) -> Result<Vec<f64>, MetricsError> {
    if a.len() != s.len() {
        return Err(domain(format!("{} audio durations vs {} synthesis durations", a.len(), s.len())));
    }
    let mut prev = 0.0f64;
    Ok(a
        .iter()
        .enumerate()
        .map(|(t, &a_t)| {
            let next_s = s.get(t + 1).copied().unwrap_or(0.0);
            prev = prev.max(0.0) + a_t - next_s;
            prev
        })
        .collect())
}

/// Mean of `play_end - input_available` over units.
pub fn avg_chunk_lag(timeline: &SynthesisTimeline) -> Result<f64, MetricsError> {
    if timeline.is_empty() {
        return Err(domain("empty timeline"));
    }
    let mut sum = 0.0;
    for u in &timeline.units {
        let input = u
            .input_available
            .ok_or_else(|| domain(format!("unit {} has no input arrival time", u.unit)))?;
        sum += u.play_end - input;
    }
    Ok(sum / timeline.len() as f64)
}

/// Start of playback of the first unit, relative to session start.
pub fn first_audio_latency(timeline: &SynthesisTimeline) -> Result<f64, MetricsError> {
    timeline.units.first().map(|u| u.play_start).ok_or_else(|| domain("empty timeline"))
}

/// Total audio duration over total synthesis time.
pub fn real_time_factor(timeline: &SynthesisTimeline) -> Result<f64, MetricsError> {
    let audio: f64 = timeline.audio_durations().iter().sum();
    let synth: f64 = timeline.synthesis_durations().iter().sum();
    if synth <= 0.0 {
        return Err(domain("zero synthesis time"));
    }
    Ok(audio / synth)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatencyReport {
    pub tb_series: Vec<f64>,
    pub avg_chunk_lag: f64,
    pub first_audio_latency: f64,
    pub rtf: f64,
    pub continuous: bool,
}

impl LatencyReport {
    pub fn from_timeline(timeline: &SynthesisTimeline) -> Result<Self, MetricsError> {
        let tb_series = time_balance(&timeline.audio_durations(), &timeline.synthesis_durations())?;
        let continuous = tb_series.iter().all(|&tb| tb >= 0.0);
        Ok(Self {
            avg_chunk_lag: avg_chunk_lag(timeline)?,
            first_audio_latency: first_audio_latency(timeline)?,
            rtf: real_time_factor(timeline)?,
            continuous,
            tb_series,
        })
    }

    pub fn min_tb(&self) -> f64 {
        self.tb_series.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub const LATENCY_HEADER: &str =
    "sentence_id,length_phonemes,mode,k1,k2,first_audio_latency,avg_chunk_lag,min_tb,rtf,continuous";

/// One line of the latency report.
#[derive(Debug, Clone, PartialEq)]
pub struct LatencyRow {
    /// Sentence number, or `group` for per-length averages.
    pub sentence_id: String,
    pub length_phonemes: usize,
    pub mode: String,
    pub k1: Option<usize>,
    pub k2: Option<usize>,
    pub first_audio_latency: f64,
    pub avg_chunk_lag: f64,
    pub min_tb: f64,
    pub rtf: f64,
    pub continuous: bool,
}

impl LatencyRow {
    pub fn new(
        sentence_id: impl Into<String>,
        length_phonemes: usize,
        mode: impl Into<String>,
        lookahead: Option<(usize, usize)>,
        report: &LatencyReport,
    ) -> Self {
        Self {
            sentence_id: sentence_id.into(),
            length_phonemes,
            mode: mode.into(),
            k1: lookahead.map(|l| l.0),
            k2: lookahead.map(|l| l.1),
            first_audio_latency: report.first_audio_latency,
            avg_chunk_lag: report.avg_chunk_lag,
            min_tb: report.min_tb(),
            rtf: report.rtf,
            continuous: report.continuous,
        }
    }

    pub fn csv_line(&self) -> String {
        let opt = |v: Option<usize>| v.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.sentence_id,
            self.length_phonemes,
            self.mode,
            opt(self.k1),
            opt(self.k2),
            fmt_secs(self.first_audio_latency),
            fmt_secs(self.avg_chunk_lag),
            fmt_secs(self.min_tb),
            fmt_secs(self.rtf),
            self.continuous
        )
    }

    /// Averages rows sharing mode, policy and phoneme length. Groups are
    /// ordered by first appearance, then by length.
    pub fn group_by_length(rows: &[LatencyRow]) -> Vec<LatencyRow> {
        let mut groups: Vec<(LatencyRow, usize)> = Vec::new();
        for r in rows {
            let key = |g: &LatencyRow| {
                g.mode == r.mode && g.k1 == r.k1 && g.k2 == r.k2 && g.length_phonemes == r.length_phonemes
            };
            match groups.iter_mut().find(|(g, _)| key(g)) {
                Some((g, n)) => {
                    g.first_audio_latency += r.first_audio_latency;
                    g.avg_chunk_lag += r.avg_chunk_lag;
                    g.min_tb += r.min_tb;
                    g.rtf += r.rtf;
                    g.continuous &= r.continuous;
                    *n += 1;
                }
                None => {
                    let mut g = r.clone();
                    g.sentence_id = "group".into();
                    groups.push((g, 1));
                }
            }
        }
        let mode_order: Vec<(String, Option<usize>, Option<usize>)> = {
            let mut seen = Vec::new();
            for (g, _) in &groups {
                let k = (g.mode.clone(), g.k1, g.k2);
                if !seen.contains(&k) {
                    seen.push(k);
                }
            }
            seen
        };
        let mut out: Vec<LatencyRow> = groups
            .into_iter()
            .map(|(mut g, n)| {
                let n = n as f64;
                g.first_audio_latency /= n;
                g.avg_chunk_lag /= n;
                g.min_tb /= n;
                g.rtf /= n;
                g
            })
            .collect();
        out.sort_by_key(|g| {
            let pos = mode_order.iter().position(|k| k.0 == g.mode && k.1 == g.k1 && k.2 == g.k2);
            (pos, g.length_phonemes)
        });
        out
    }

    pub fn to_csv(rows: &[LatencyRow]) -> String {
        let mut out = String::from(LATENCY_HEADER);
        out.push('\n');
        for r in rows {
            let _ = writeln!(out, "{}", r.csv_line());
        }
        out
    }
}

/// Ordinary least squares `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit, MetricsError> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(domain("linear fit needs two or more paired points"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(domain("x values are all equal"));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::timeline::UnitTiming;

    fn timeline(play_end: &[f64], input: &[Option<f64>]) -> SynthesisTimeline {
        SynthesisTimeline {
            units: play_end
                .iter()
                .zip(input)
                .enumerate()
                .map(|(i, (&e, &inp))| UnitTiming {
                    unit: i + 1,
                    input_available: inp,
                    syn_start: 0.0,
                    syn_finish: 0.0,
                    play_start: 0.0,
                    play_end: e,
                    audio_duration: 0.0,
                })
                .collect(),
        }
    }

    #[test]
    fn lag_requires_arrivals() {
        assert!(avg_chunk_lag(&timeline(&[1.0], &[None])).is_err());
        assert!(avg_chunk_lag(&SynthesisTimeline::default()).is_err());
    }

    #[test]
    fn fit_recovers_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v + 1.0).collect();
        let f = linear_fit(&x, &y).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-12);
        assert!((f.intercept - 1.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert!(linear_fit(&[1.0, 1.0], &[2.0, 3.0]).is_err());
    }

    #[test]
    fn grouping_averages_equal_lengths() {
        let report = |lat: f64, cont: bool| LatencyReport {
            tb_series: vec![if cont { 1.0 } else { -1.0 }],
            avg_chunk_lag: lat,
            first_audio_latency: lat,
            rtf: 1.0,
            continuous: cont,
        };
        let rows = vec![
            LatencyRow::new("0", 20, "incremental", Some((1, 0)), &report(1.0, true)),
            LatencyRow::new("1", 10, "incremental", Some((1, 0)), &report(2.0, true)),
            LatencyRow::new("2", 20, "incremental", Some((1, 0)), &report(3.0, false)),
            LatencyRow::new("0", 20, "full", None, &report(5.0, true)),
        ];
        let groups = LatencyRow::group_by_length(&rows);
        assert_eq!(groups.len(), 3);
        assert_eq!(groups[0].length_phonemes, 10);
        assert_eq!(groups[1].length_phonemes, 20);
        assert_eq!(groups[1].first_audio_latency, 2.0);
        assert!(!groups[1].continuous);
        assert_eq!(groups[1].min_tb, 0.0);
        assert_eq!(groups[2].mode, "full");
        assert!(groups.iter().all(|g| g.sentence_id == "group"));
        let csv = LatencyRow::to_csv(&groups);
        assert!(csv.starts_with(LATENCY_HEADER));
        assert!(csv.lines().nth(3).unwrap().starts_with("group,20,full,,,"));
    }
}
