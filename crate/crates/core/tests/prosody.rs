mod common;

use common::*;
use itts_core::metrics::{duration_rmse, pitch_rmse, MetricsError, PhonemeAlignment, PitchTrack};
use itts_core::pipeline::SessionOutput;
use itts_core::Engine;

#[test]
fn duration_rmse_examples() {
    let a = PhonemeAlignment::from_durations_ms(&["K", "AE"], &[100.0, 100.0]).unwrap();
    let b = PhonemeAlignment::from_durations_ms(&["K", "AE"], &[110.0, 90.0]).unwrap();
    assert_eq!(duration_rmse(&a, &a).unwrap(), 0.0);
    assert!((duration_rmse(&a, &b).unwrap() - 10.0).abs() < 1e-9);
    assert!((duration_rmse(&b, &a).unwrap() - 10.0).abs() < 1e-9);
    let c = PhonemeAlignment::from_durations_ms(&["K", "IY"], &[100.0, 100.0]).unwrap();
    assert!(matches!(duration_rmse(&a, &c), Err(MetricsError::AlignmentMismatch(_))));
}

#[test]
fn pitch_rmse_examples() {
    let a = PitchTrack::voiced(&[200.0, 200.0], 0.01).unwrap();
    let b = PitchTrack::voiced(&[205.0, 195.0], 0.01).unwrap();
    assert_eq!(pitch_rmse(&a, &a).unwrap(), 0.0);
    assert_eq!(pitch_rmse(&a, &b).unwrap(), 5.0);
    assert_eq!(pitch_rmse(&b, &a).unwrap(), 5.0);
    let partly = PitchTrack::new(vec![Some(200.0), None], 0.01).unwrap();
    let other = PitchTrack::new(vec![Some(210.0), Some(300.0)], 0.01).unwrap();
    assert_eq!(pitch_rmse(&partly, &other).unwrap(), 10.0);
    let unvoiced = PitchTrack::new(vec![None, None], 0.01).unwrap();
    assert_eq!(pitch_rmse(&a, &unvoiced), Err(MetricsError::EmptyComparison));
    let short = PitchTrack::voiced(&[200.0], 0.01).unwrap();
    assert!(pitch_rmse(&a, &short).is_err());
}

fn scores(full: &SessionOutput, other: &SessionOutput) -> (f64, f64) {
    let fa = full.trace.alignment(300, 24000).unwrap();
    let oa = other.trace.alignment(300, 24000).unwrap();
    let ft = PitchTrack::at_phonemes(&full.waveform(), 24000, &fa, 1).unwrap();
    let ot = PitchTrack::at_phonemes(&other.waveform(), 24000, &oa, 1).unwrap();
    (duration_rmse(&fa, &oa).unwrap(), pitch_rmse(&ft, &ot).unwrap())
}

#[test]
fn lookahead_ordering_on_corpus_prefix() {
    let engine = Engine::reference();
    let cfg = modeled();
    let (mut l0, mut ind) = ((0.0, 0.0), (0.0, 0.0));
    for text in corpus(12) {
        let full = engine.run_full_sentence(text, &cfg).unwrap();
        for (k1, k2) in [(1, 0), (2, 0)] {
            let out = engine.run_incremental(text, &cfg.clone().with_lookahead(k1, k2)).unwrap();
            assert_eq!(scores(&full, &out), (0.0, 0.0));
        }
        let zero = scores(&full, &engine.run_incremental(text, &cfg.clone().with_lookahead(0, 0)).unwrap());
        let indep = scores(&full, &engine.run_independent(text, &cfg).unwrap());
        l0 = (l0.0 + zero.0, l0.1 + zero.1);
        ind = (ind.0 + indep.0, ind.1 + indep.1);
    }
    assert!(l0.0 > 0.0 && l0.1 > 0.0, "{l0:?}");
    assert!(ind.0 >= l0.0 && ind.1 >= l0.1, "{ind:?} vs {l0:?}");
}

#[test]
fn mean_phoneme_duration_in_plausible_range() {
    let engine = Engine::reference();
    let full = engine.run_full_sentence(corpus(1)[0], &modeled()).unwrap();
    let mean = full.trace.alignment(300, 24000).unwrap().mean_duration().unwrap();
    // templates span 5..12 frames of 12.5 ms
    assert!((0.0625..=0.15).contains(&mean), "{mean}");
}
