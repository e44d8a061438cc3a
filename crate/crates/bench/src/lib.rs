//! Shared fixtures for the benchmarks.

use itts_core::english_corpus;

/// Shortest, median and longest bundled sentences by word count, labelled
/// with that count.
pub fn sentences_by_length() -> Vec<(usize, &'static str)> {
    let mut corpus: Vec<(usize, &'static str)> =
        english_corpus().into_iter().map(|s| (s.split_whitespace().count(), s)).collect();
    corpus.sort_by_key(|&(n, _)| n);
    let last = corpus.len() - 1;
    vec![corpus[0], corpus[last / 2], corpus[last]]
}
