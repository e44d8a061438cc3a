//! Chunk arrival schedules for shadow sessions.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::PipelineError;

pub const SCHEDULE_HEADER: &str = "sentence_id,chunk_index,arrival_seconds";

/// Arrival times per sentence (0-based id), ordered by 1-based chunk index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScheduleTable {
    sentences: BTreeMap<usize, Vec<f64>>,
}

impl ScheduleTable {
    pub fn insert(&mut self, sentence: usize, arrivals: Vec<f64>) {
        self.sentences.insert(sentence, arrivals);
    }

    pub fn get(&self, sentence: usize) -> Option<&[f64]> {
        self.sentences.get(&sentence).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(SCHEDULE_HEADER);
        out.push('\n');
        for (s, arrivals) in &self.sentences {
            for (i, a) in arrivals.iter().enumerate() {
                let _ = writeln!(out, "{s},{},{a:.9}", i + 1);
            }
        }
        out
    }
}

pub fn parse_schedule(text: &str) -> Result<ScheduleTable, PipelineError> {
    let err = |line: usize, msg: String| PipelineError::Schedule(format!("line {line}: {msg}"));
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == SCHEDULE_HEADER => {}
        _ => return Err(PipelineError::Schedule(format!("missing header {SCHEDULE_HEADER:?}"))),
    }
    let mut rows: BTreeMap<usize, BTreeMap<usize, f64>> = BTreeMap::new();
    for (i, line) in lines {
        let n = i + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let [s, c, a] = fields[..] else {
            return Err(err(n, "expected three fields".into()));
        };
        let s: usize = s.parse().map_err(|_| err(n, format!("bad sentence id {s:?}")))?;
        let c: usize = c.parse().map_err(|_| err(n, format!("bad chunk index {c:?}")))?;
        let a: f64 = a.parse().map_err(|_| err(n, format!("bad arrival time {a:?}")))?;
        if c == 0 {
            return Err(err(n, "chunk indices start at 1".into()));
        }
        if rows.entry(s).or_default().insert(c, a).is_some() {
            return Err(err(n, format!("duplicate chunk {c} of sentence {s}")));
        }
    }
    let mut table = ScheduleTable::default();
    for (s, chunks) in rows {
        if chunks.keys().copied().ne(1..=chunks.len()) {
            return Err(PipelineError::Schedule(format!("sentence {s} skips a chunk index")));
        }
        table.insert(s, chunks.into_values().collect());
    }
    Ok(table)
}

/// Input revealed at the pace of its own audio: chunk `t` arrives once the
/// first `t` chunk durations, times `scale`, have elapsed.
pub fn proportional_arrivals(chunk_durations: &[f64], scale: f64) -> Vec<f64> {
    let mut t = 0.0;
    chunk_durations
        .iter()
        .map(|d| {
            t += d * scale;
            t
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trip() {
        let text = "sentence_id,chunk_index,arrival_seconds\n1,2,0.5\n1,1,0.25\n0,1,0\n";
        let t = parse_schedule(text).unwrap();
        assert_eq!(t.get(1), Some(&[0.25, 0.5][..]));
        assert_eq!(t.get(0), Some(&[0.0][..]));
        assert_eq!(parse_schedule(&t.to_csv()).unwrap(), t);
    }

    #[test]
    fn parse_errors() {
        assert!(parse_schedule("a,b,c\n").is_err());
        assert!(parse_schedule("sentence_id,chunk_index,arrival_seconds\n0,2,1.0\n").is_err());
        assert!(parse_schedule("sentence_id,chunk_index,arrival_seconds\n0,1,1.0\n0,1,2.0\n").is_err());
        assert!(parse_schedule("sentence_id,chunk_index,arrival_seconds\n0,0,1.0\n").is_err());
        assert!(parse_schedule("sentence_id,chunk_index,arrival_seconds\n0,1\n").is_err());
    }

    #[test]
    fn proportional() {
        assert_eq!(proportional_arrivals(&[1.0, 0.5, 2.0], 1.0), [1.0, 1.5, 3.5]);
        assert_eq!(proportional_arrivals(&[1.0, 1.0], 0.5), [0.5, 1.0]);
    }
}
