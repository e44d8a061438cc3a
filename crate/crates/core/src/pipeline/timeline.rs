//! Per-unit timing records of a synthesis session.

use std::fmt::Write as _;

pub const TIMELINE_HEADER: &str = "unit,input_available,syn_start,syn_finish,play_start,play_end,audio_duration";

/// Times are seconds from session start.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitTiming {
    pub unit: usize,
    /// When the unit's own input chunk became available.
    pub input_available: Option<f64>,
    pub syn_start: f64,
    pub syn_finish: f64,
    pub play_start: f64,
    pub play_end: f64,
    pub audio_duration: f64,
}

impl UnitTiming {
    pub fn synthesis_time(&self) -> f64 {
        self.syn_finish - self.syn_start
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SynthesisTimeline {
    pub units: Vec<UnitTiming>,
}

impl SynthesisTimeline {
    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn audio_durations(&self) -> Vec<f64> {
        self.units.iter().map(|u| u.audio_duration).collect()
    }

    pub fn synthesis_durations(&self) -> Vec<f64> {
        self.units.iter().map(UnitTiming::synthesis_time).collect()
    }

    /// Silence between the end of unit `t` and the start of unit `t + 1`,
    /// one entry per consecutive pair.
    pub fn playback_gaps(&self) -> Vec<f64> {
        self.units.windows(2).map(|w| (w[1].play_start - w[0].play_end).max(0.0)).collect()
    }

    pub fn has_gaps(&self, tolerance: f64) -> bool {
        self.playback_gaps().iter().any(|&g| g > tolerance)
    }

    /// Serial synthesis from time 0 with playback on a virtual clock, for
    /// per-unit audio durations `a` and synthesis durations `s`.
    pub fn simulate(a: &[f64], s: &[f64]) -> Self {
        assert_eq!(a.len(), s.len(), "one synthesis time per unit");
        let mut head = Playhead::default();
        let mut finish = 0.0;
        let units = a
            .iter()
            .zip(s)
            .enumerate()
            .map(|(i, (&a, &s))| {
                let syn_start = finish;
                finish = syn_start + s;
                let (play_start, play_end) = head.place(finish, a);
                UnitTiming {
                    unit: i + 1,
                    input_available: Some(0.0),
                    syn_start,
                    syn_finish: finish,
                    play_start,
                    play_end,
                    audio_duration: a,
                }
            })
            .collect();
        Self { units }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(TIMELINE_HEADER);
        out.push('\n');
        for u in &self.units {
            let input = u.input_available.map(fmt_secs).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                u.unit,
                input,
                fmt_secs(u.syn_start),
                fmt_secs(u.syn_finish),
                fmt_secs(u.play_start),
                fmt_secs(u.play_end),
                fmt_secs(u.audio_duration)
            );
        }
        out
    }
}

pub(crate) fn fmt_secs(v: f64) -> String {
    format!("{v:.9}")
}

/// Playback position on a virtual clock: a segment starts when it is ready
/// and the previous one has finished.
#[derive(Debug, Clone, Copy, Default)]
pub struct Playhead {
    end: f64,
}

impl Playhead {
    pub fn place(&mut self, ready: f64, duration: f64) -> (f64, f64) {
        let start = ready.max(self.end);
        self.end = start + duration;
        (start, self.end)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simulate_serial_schedule() {
        let tl = SynthesisTimeline::simulate(&[2.0, 2.0], &[0.5, 0.5]);
        let u = &tl.units;
        assert_eq!((u[0].syn_start, u[0].syn_finish, u[0].play_start, u[0].play_end), (0.0, 0.5, 0.5, 2.5));
        assert_eq!((u[1].syn_start, u[1].syn_finish, u[1].play_start, u[1].play_end), (0.5, 1.0, 2.5, 4.5));
        assert!(!tl.has_gaps(0.0));
    }

    #[test]
    fn gap_when_synthesis_is_slow() {
        let tl = SynthesisTimeline::simulate(&[0.2, 1.0], &[0.1, 0.5]);
        let gaps = tl.playback_gaps();
        assert!((gaps[0] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let tl = SynthesisTimeline::simulate(&[1.0], &[0.25]);
        let csv = tl.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(TIMELINE_HEADER));
        assert_eq!(
            lines.next(),
            Some("1,0.000000000,0.000000000,0.250000000,0.250000000,1.250000000,1.000000000")
        );
    }
}
