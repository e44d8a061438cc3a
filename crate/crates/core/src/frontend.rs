//! Text frontend: normalization, word segmentation, lexicon phonemization and
//! grouping of words into chunks.
//!
//! A [`Chunk`] is the scheduling unit every policy is evaluated over. It holds
//! the minimum run of consecutive words whose phoneme count reaches the
//! threshold `l`; only the sentence-final chunk may fall short of it.

use std::collections::HashMap;
use std::fmt;

const SHIPPED_LEXICON: &str = include_str!("../data/lexicon_en.tsv");

/// Line that switches the lexicon file from word entries to fallback rules.
const RULES_MARKER: &str = "#rules";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FrontendError {
    #[error("input is empty after normalization")]
    EmptyInput,
    #[error("no pronunciation rule for character {0:?}")]
    UnknownSymbol(char),
    #[error("word {0:?} has an empty pronunciation")]
    EmptyPronunciation(String),
    #[error("lexicon line {line}: {reason}")]
    LexiconFormat { line: usize, reason: String },
    #[error("chunk threshold must be at least 1")]
    InvalidThreshold,
    #[error("cannot build a chunk from zero words")]
    EmptyChunk,
}

/// A single phoneme symbol (ARPAbet for the shipped English lexicon).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Phoneme(String);

impl Phoneme {
    pub fn new(symbol: impl Into<String>) -> Self {
        Self(symbol.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Phoneme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Phoneme {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

/// A word together with its (non-empty) phoneme sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhonemeWord {
    surface: String,
    phonemes: Vec<Phoneme>,
}

impl PhonemeWord {
    pub fn new(surface: impl Into<String>, phonemes: Vec<Phoneme>) -> Result<Self, FrontendError> {
        let surface = surface.into();
        if phonemes.is_empty() {
            return Err(FrontendError::EmptyPronunciation(surface));
        }
        Ok(Self { surface, phonemes })
    }

    pub fn surface(&self) -> &str {
        &self.surface
    }

    pub fn phonemes(&self) -> &[Phoneme] {
        &self.phonemes
    }

    pub fn len(&self) -> usize {
        self.phonemes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Consecutive words synthesized as one unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chunk {
    words: Vec<PhonemeWord>,
    phoneme_count: usize,
}

impl Chunk {
    pub fn new(words: Vec<PhonemeWord>) -> Result<Self, FrontendError> {
        if words.is_empty() {
            return Err(FrontendError::EmptyChunk);
        }
        let phoneme_count = words.iter().map(PhonemeWord::len).sum();
        Ok(Self { words, phoneme_count })
    }

    pub fn words(&self) -> &[PhonemeWord] {
        &self.words
    }

    pub fn phoneme_count(&self) -> usize {
        self.phoneme_count
    }

    pub fn phonemes(&self) -> impl Iterator<Item = &Phoneme> {
        self.words.iter().flat_map(|w| w.phonemes.iter())
    }

    pub fn text(&self) -> String {
        let surfaces: Vec<&str> = self.words.iter().map(PhonemeWord::surface).collect();
        surfaces.join(" ")
    }
}

/// Word pronunciations plus single-character fallback rules.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    entries: HashMap<String, Vec<Phoneme>>,
    rules: HashMap<char, Vec<Phoneme>>,
}

impl Lexicon {
    /// The English lexicon shipped with the crate.
    pub fn english() -> Self {
        Self::parse(SHIPPED_LEXICON).expect("shipped lexicon is well formed")
    }

    /// Parses the `word<TAB>PH1 PH2 ...` format. Lines starting with `#` are
    /// comments, except a bare `#rules` line which starts the section of
    /// single-character fallback rules.
    pub fn parse(text: &str) -> Result<Self, FrontendError> {
        let mut lex = Self::default();
        let mut in_rules = false;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim() == RULES_MARKER {
                in_rules = true;
                continue;
            }
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, pron) = line.split_once('\t').ok_or_else(|| FrontendError::LexiconFormat {
                line: line_no,
                reason: "expected `key<TAB>phonemes`".into(),
            })?;
            let phonemes: Vec<Phoneme> = pron.split_whitespace().map(Phoneme::from).collect();
            if phonemes.is_empty() {
                return Err(FrontendError::LexiconFormat {
                    line: line_no,
                    reason: format!("entry {key:?} has no phonemes"),
                });
            }
            let key = key.trim().to_lowercase();
            if in_rules {
                let mut chars = key.chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) => {
                        lex.rules.insert(c, phonemes);
                    }
                    _ => {
                        return Err(FrontendError::LexiconFormat {
                            line: line_no,
                            reason: format!("rule key {key:?} must be a single character"),
                        })
                    }
                }
            } else {
                if key.is_empty() {
                    return Err(FrontendError::LexiconFormat {
                        line: line_no,
                        reason: "empty word".into(),
                    });
                }
                lex.entries.insert(key, phonemes);
            }
        }
        Ok(lex)
    }

    pub fn insert(&mut self, word: &str, phonemes: Vec<Phoneme>) -> Result<(), FrontendError> {
        if phonemes.is_empty() {
            return Err(FrontendError::EmptyPronunciation(word.to_string()));
        }
        self.entries.insert(word.to_lowercase(), phonemes);
        Ok(())
    }

    pub fn insert_rule(&mut self, c: char, phonemes: Vec<Phoneme>) -> Result<(), FrontendError> {
        if phonemes.is_empty() {
            return Err(FrontendError::EmptyPronunciation(c.to_string()));
        }
        self.rules.insert(c, phonemes);
        Ok(())
    }

    pub fn lookup(&self, word: &str) -> Option<&[Phoneme]> {
        self.entries.get(&word.to_lowercase()).map(Vec::as_slice)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(&word.to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Lowercases, turns every punctuation mark except word-internal apostrophes
/// into a separator and collapses whitespace.
pub fn normalize_text(raw: &str) -> Result<String, FrontendError> {
    let chars: Vec<char> = raw.to_lowercase().chars().collect();
    let mut out = String::with_capacity(chars.len());
    let mut pending_space = false;
    for (i, &c) in chars.iter().enumerate() {
        let keep = if c.is_alphanumeric() {
            Some(c)
        } else if is_apostrophe(c) {
            let inside = i > 0
                && chars[i - 1].is_alphanumeric()
                && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
            inside.then_some('\'')
        } else {
            None
        };
        match keep {
            Some(c) => {
                if pending_space && !out.is_empty() {
                    out.push(' ');
                }
                pending_space = false;
                out.push(c);
            }
            None => pending_space = true,
        }
    }
    if out.is_empty() {
        return Err(FrontendError::EmptyInput);
    }
    Ok(out)
}

pub fn segment_words(normalized: &str) -> Vec<String> {
    normalized.split_whitespace().map(str::to_string).collect()
}

/// Greedy longest-match segmentation for scripts written without spaces.
/// Characters not covered by any lexicon entry become single-character tokens.
pub fn segment_longest_match(text: &str, lex: &Lexicon) -> Vec<String> {
    let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
    let max_len = lex.words().map(|w| w.chars().count()).max().unwrap_or(1);
    let mut out = Vec::new();
    let mut start = 0;
    while start < chars.len() {
        let longest = (1..=max_len.min(chars.len() - start))
            .rev()
            .find(|&n| lex.contains(&chars[start..start + n].iter().collect::<String>()))
            .unwrap_or(1);
        out.push(chars[start..start + longest].iter().collect());
        start += longest;
    }
    out
}

/// Looks `word` up in the lexicon, falling back to per-character rules.
/// Apostrophes are silent in the fallback path.
pub fn to_phonemes(word: &str, lex: &Lexicon) -> Result<PhonemeWord, FrontendError> {
    if let Some(phonemes) = lex.lookup(word) {
        return PhonemeWord::new(word, phonemes.to_vec());
    }
    let mut phonemes = Vec::new();
    for c in word.to_lowercase().chars() {
        if is_apostrophe(c) {
            continue;
        }
        let rule = lex.rules.get(&c).ok_or(FrontendError::UnknownSymbol(c))?;
        phonemes.extend_from_slice(rule);
    }
    PhonemeWord::new(word, phonemes)
}

/// Groups words left to right into chunks holding the minimum number of words
/// whose phoneme count is at least `threshold`. A short remainder at the end
/// of the sentence becomes its own chunk.
pub fn chunk_words(words: Vec<PhonemeWord>, threshold: usize) -> Result<Vec<Chunk>, FrontendError> {
    if threshold == 0 {
        return Err(FrontendError::InvalidThreshold);
    }
    let mut chunks = Vec::new();
    let mut current = Vec::new();
    let mut count = 0;
    for word in words {
        count += word.len();
        current.push(word);
        if count >= threshold {
            chunks.push(Chunk::new(std::mem::take(&mut current))?);
            count = 0;
        }
    }
    if !current.is_empty() {
        chunks.push(Chunk::new(current)?);
    }
    Ok(chunks)
}

/// The whole frontend: raw text in, chunks out.
#[derive(Debug, Clone)]
pub struct Frontend {
    lexicon: Lexicon,
    threshold: usize,
}

impl Frontend {
    pub fn new(lexicon: Lexicon, threshold: usize) -> Result<Self, FrontendError> {
        if threshold == 0 {
            return Err(FrontendError::InvalidThreshold);
        }
        Ok(Self { lexicon, threshold })
    }

    pub fn english(threshold: usize) -> Result<Self, FrontendError> {
        Self::new(Lexicon::english(), threshold)
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn threshold(&self) -> usize {
        self.threshold
    }

    pub fn words(&self, text: &str) -> Result<Vec<PhonemeWord>, FrontendError> {
        let normalized = normalize_text(text)?;
        segment_words(&normalized)
            .iter()
            .map(|w| to_phonemes(w, &self.lexicon))
            .collect()
    }

    pub fn chunks(&self, text: &str) -> Result<Vec<Chunk>, FrontendError> {
        chunk_words(self.words(text)?, self.threshold)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ph(symbols: &str) -> Vec<Phoneme> {
        symbols.split_whitespace().map(Phoneme::from).collect()
    }

    fn word(surface: &str, n: usize) -> PhonemeWord {
        PhonemeWord::new(surface, (0..n).map(|i| Phoneme::new(format!("P{i}"))).collect()).unwrap()
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_text("Hello,  world!").unwrap(), "hello world");
        assert_eq!(normalize_text("a").unwrap(), "a");
        assert_eq!(normalize_text("  Don't stop. ").unwrap(), "don't stop");
    }

    #[test]
    fn normalize_strips_edge_apostrophes() {
        assert_eq!(normalize_text("'quoted' words’").unwrap(), "quoted words");
        assert_eq!(normalize_text("it\u{2019}s").unwrap(), "it's");
    }

    #[test]
    fn normalize_rejects_empty() {
        assert_eq!(normalize_text("  ?! ... "), Err(FrontendError::EmptyInput));
        assert_eq!(normalize_text(""), Err(FrontendError::EmptyInput));
    }

    #[test]
    fn segment_examples() {
        assert_eq!(segment_words("this is a cat"), ["this", "is", "a", "cat"]);
        assert_eq!(segment_words("cat"), ["cat"]);
        assert_eq!(segment_words("a b c"), ["a", "b", "c"]);
        assert!(segment_words("").is_empty());
    }

    #[test]
    fn shipped_lexicon_entries() {
        let lex = Lexicon::english();
        assert!(lex.len() >= 200);
        assert_eq!(to_phonemes("cat", &lex).unwrap().phonemes(), ph("K AE T"));
        assert_eq!(to_phonemes("a", &lex).unwrap().phonemes(), ph("AH"));
        assert_eq!(to_phonemes("this", &lex).unwrap().phonemes(), ph("DH IH S"));
        assert_eq!(to_phonemes("is", &lex).unwrap().phonemes(), ph("IH Z"));
        // lookup is case-insensitive
        assert_eq!(to_phonemes("CAT", &lex).unwrap().phonemes(), ph("K AE T"));
    }

    #[test]
    fn fallback_rules_concatenate() {
        let lex = Lexicon::parse("cat\tK AE T\n#rules\nz\tZ\nq\tK\n").unwrap();
        assert_eq!(to_phonemes("zq", &lex).unwrap().phonemes(), ph("Z K"));
        assert_eq!(to_phonemes("zx", &lex), Err(FrontendError::UnknownSymbol('x')));
    }

    #[test]
    fn shipped_rules_reject_digits() {
        let lex = Lexicon::english();
        assert_eq!(to_phonemes("b4", &lex), Err(FrontendError::UnknownSymbol('4')));
        assert_eq!(to_phonemes("blorp", &lex).unwrap().len(), 5);
    }

    #[test]
    fn parse_rejects_malformed_lines() {
        assert!(matches!(
            Lexicon::parse("cat K AE T\n"),
            Err(FrontendError::LexiconFormat { line: 1, .. })
        ));
        assert!(matches!(
            Lexicon::parse("# c\ncat\t \n"),
            Err(FrontendError::LexiconFormat { line: 2, .. })
        ));
        assert!(matches!(
            Lexicon::parse("#rules\nab\tA B\n"),
            Err(FrontendError::LexiconFormat { line: 2, .. })
        ));
    }

    #[test]
    fn chunk_toy_sentence() {
        let lex = Lexicon::english();
        let words: Vec<_> = ["this", "is", "a", "cat"]
            .iter()
            .map(|w| to_phonemes(w, &lex).unwrap())
            .collect();
        let chunks = chunk_words(words, 6).unwrap();
        assert_eq!(chunks.len(), 2);
        assert_eq!(chunks[0].text(), "this is a");
        assert_eq!(chunks[0].phoneme_count(), 6);
        assert_eq!(chunks[1].text(), "cat");
        assert_eq!(chunks[1].phoneme_count(), 3);
    }

    #[test]
    fn chunk_long_word_and_unit_threshold() {
        let chunks = chunk_words(vec![word("long", 10)], 6).unwrap();
        assert_eq!(chunks.len(), 1);
        let words = vec![word("a", 2), word("b", 1), word("c", 3)];
        assert_eq!(chunk_words(words, 1).unwrap().len(), 3);
        assert_eq!(chunk_words(vec![word("a", 1)], 0), Err(FrontendError::InvalidThreshold));
    }

    #[test]
    fn longest_match_segmentation() {
        let lex = Lexicon::parse("ab\tA B\nabc\tA B C\nd\tD\n").unwrap();
        assert_eq!(segment_longest_match("abcdab x", &lex), ["abc", "d", "ab", "x"]);
    }

    #[test]
    fn frontend_end_to_end() {
        let fe = Frontend::english(6).unwrap();
        let chunks = fe.chunks("This is a cat.").unwrap();
        let counts: Vec<_> = chunks.iter().map(Chunk::phoneme_count).collect();
        assert_eq!(counts, [6, 3]);
        assert_eq!(fe.chunks("!!"), Err(FrontendError::EmptyInput));
    }

    proptest! {
        #[test]
        fn chunking_round_trips_and_is_minimal(
            lens in proptest::collection::vec(1usize..9, 1..40),
            threshold in 1usize..15,
        ) {
            let words: Vec<_> = lens.iter().enumerate().map(|(i, &n)| word(&format!("w{i}"), n)).collect();
            let chunks = chunk_words(words.clone(), threshold).unwrap();
            let flat: Vec<_> = chunks.iter().flat_map(|c| c.words().iter().cloned()).collect();
            prop_assert_eq!(&flat, &words);
            let last = chunks.len() - 1;
            for (i, c) in chunks.iter().enumerate() {
                prop_assert_eq!(c.phoneme_count(), c.words().iter().map(PhonemeWord::len).sum::<usize>());
                if i != last {
                    prop_assert!(c.phoneme_count() >= threshold);
                }
                if c.words().len() > 1 {
                    let without_last = c.phoneme_count() - c.words().last().unwrap().len();
                    prop_assert!(without_last < threshold);
                }
            }
            prop_assert_eq!(chunk_words(words, threshold).unwrap(), chunks);
        }

        #[test]
        fn normalize_is_idempotent(raw in "[A-Za-z',.!? ]{0,40}") {
            if let Ok(once) = normalize_text(&raw) {
                prop_assert_eq!(normalize_text(&once).unwrap(), once);
            }
        }
    }
}
