//! Per-phoneme spectral templates and durations for the reference model.
//!
//! The shipped table is plain text, one phoneme per line:
//! `PHONEME<TAB>duration<TAB>80 space-separated band values`.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{AcousticError, MelFrame};
use crate::N_MELS;

/// Seed the shipped `data/templates.tsv` was generated with.
pub const SHIPPED_TEMPLATE_SEED: u64 = 20190927;

pub const ARPABET: [&str; 39] = [
    "AA", "AE", "AH", "AO", "AW", "AY", "B", "CH", "D", "DH", "EH", "ER", "EY", "F", "G", "HH", "IH", "IY", "JH", "K",
    "L", "M", "N", "NG", "OW", "OY", "P", "R", "S", "SH", "T", "TH", "UH", "UW", "V", "W", "Y", "Z", "ZH",
];

const VOWELS: [&str; 15] = [
    "AA", "AE", "AH", "AO", "AW", "AY", "EH", "ER", "EY", "IH", "IY", "OW", "OY", "UH", "UW",
];

const SHIPPED: &str = include_str!("../../data/templates.tsv");

#[derive(Debug, Clone, PartialEq)]
pub struct PhonemeTemplate {
    pub symbol: String,
    pub duration: usize,
    pub spectrum: MelFrame,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemplateTable {
    entries: Vec<PhonemeTemplate>,
    index: HashMap<String, usize>,
}

impl TemplateTable {
    pub fn shipped() -> Self {
        Self::parse(SHIPPED).expect("shipped template table is well formed")
    }

    pub fn parse(text: &str) -> Result<Self, AcousticError> {
        let mut table = Self {
            entries: Vec::new(),
            index: HashMap::new(),
        };
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |reason: String| AcousticError::TemplateFormat { line: line_no, reason };
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split('\t');
            let (Some(symbol), Some(duration), Some(bands), None) =
                (fields.next(), fields.next(), fields.next(), fields.next())
            else {
                return Err(err("expected three tab-separated fields".into()));
            };
            let duration: usize = duration.parse().map_err(|_| err(format!("bad duration {duration:?}")))?;
            if duration == 0 {
                return Err(err("duration must be positive".into()));
            }
            let values = bands
                .split_whitespace()
                .map(|v| v.parse::<f32>().map_err(|_| err(format!("bad band value {v:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            if values.iter().any(|v| *v < 0.0) {
                return Err(err("negative band value".into()));
            }
            let spectrum = MelFrame::from_slice(&values).map_err(|e| err(e.to_string()))?;
            if table.index.contains_key(symbol) {
                return Err(err(format!("duplicate phoneme {symbol}")));
            }
            table.index.insert(symbol.to_string(), table.entries.len());
            table.entries.push(PhonemeTemplate {
                symbol: symbol.to_string(),
                duration,
                spectrum,
            });
        }
        if table.entries.is_empty() {
            return Err(AcousticError::TemplateFormat {
                line: 0,
                reason: "no templates".into(),
            });
        }
        Ok(table)
    }

    /// Deterministic table over [`ARPABET`] with a single spectral peak per
    /// phoneme. Values are rounded to six decimals so the text form
    /// round-trips exactly.
    pub fn generate(seed: u64) -> Self {
        Self::parse(&Self::generate_text(seed)).expect("generated table parses")
    }

    pub fn generate_text(seed: u64) -> String {
        let mut out = String::from("# phoneme\tframes\tmel bands\n");
        for sym in ARPABET {
            let u = |salt: u64| unit_hash(seed, sym, salt);
            let duration = if VOWELS.contains(&sym) {
                8 + (u(0) * 5.0) as usize
            } else {
                5 + (u(0) * 4.0) as usize
            };
            let center = 10.0 + 60.0 * u(1);
            let width = 3.0 + 5.0 * u(2);
            let amp = 0.25 + 0.35 * u(3);
            let floor = 0.01 + 0.02 * u(4);
            let bands: Vec<String> = (0..N_MELS)
                .map(|b| {
                    let z = (b as f64 - center) / width;
                    format!("{:.6}", floor + amp * (-0.5 * z * z).exp())
                })
                .collect();
            let _ = writeln!(out, "{sym}\t{duration}\t{}", bands.join(" "));
        }
        out
    }

    pub fn get(&self, symbol: &str) -> Option<&PhonemeTemplate> {
        self.index.get(symbol).map(|&i| &self.entries[i])
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.index.get(symbol).copied()
    }

    pub fn entry(&self, index: usize) -> &PhonemeTemplate {
        &self.entries[index]
    }

    pub fn entries(&self) -> &[PhonemeTemplate] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn min_duration(&self) -> usize {
        self.entries.iter().map(|e| e.duration).min().unwrap_or(0)
    }

    pub fn max_duration(&self) -> usize {
        self.entries.iter().map(|e| e.duration).max().unwrap_or(0)
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Uniform value in `[0, 1)` keyed by seed, symbol and salt.
fn unit_hash(seed: u64, symbol: &str, salt: u64) -> f64 {
    let mut h = splitmix64(seed ^ salt.wrapping_mul(0x1000_0000_01B3));
    for b in symbol.bytes() {
        h = splitmix64(h ^ u64::from(b));
    }
    (h >> 11) as f64 / (1u64 << 53) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_table_matches_generator() {
        assert_eq!(SHIPPED, TemplateTable::generate_text(SHIPPED_TEMPLATE_SEED));
    }

    #[test]
    fn shipped_table_covers_inventory() {
        let t = TemplateTable::shipped();
        assert_eq!(t.len(), ARPABET.len());
        for sym in ARPABET {
            let e = t.get(sym).unwrap();
            let range = if VOWELS.contains(&sym) { 8..=12 } else { 5..=8 };
            assert!(range.contains(&e.duration), "{sym} {}", e.duration);
        }
        assert!(t.min_duration() >= 5);
    }

    #[test]
    fn parse_rejects_bad_lines() {
        assert!(TemplateTable::parse("AA\t8\t0.1 0.2").is_err());
        assert!(TemplateTable::parse("AA\t0\t".to_string().as_str()).is_err());
        assert!(TemplateTable::parse("").is_err());
        let row = vec!["0.5"; N_MELS].join(" ");
        assert!(TemplateTable::parse(&format!("AA\t8\t{row}\nAA\t8\t{row}")).is_err());
        assert!(TemplateTable::parse(&format!("AA\tx\t{row}")).is_err());
        assert_eq!(TemplateTable::parse(&format!("AA\t8\t{row}")).unwrap().len(), 1);
    }

    #[test]
    fn different_seeds_differ() {
        assert_ne!(TemplateTable::generate_text(1), TemplateTable::generate_text(2));
    }
}
