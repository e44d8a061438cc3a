mod common;

use common::*;
use itts_core::acoustic::{MelFrame, WordSpectrogram};
use itts_core::metrics::estimate_f0;
use itts_core::policy::Policy;
use itts_core::vocoder::{
    sample_noise, seam_discrepancy, synthesize_full, synthesize_overlap, ReferenceVocoder, Vocoder, VocoderConfig,
    VocoderError,
};
use itts_core::Engine;
use proptest::prelude::*;

fn frame(level: f32, peak: usize) -> MelFrame {
    let mut b = [level * 0.1; 80];
    b[peak] = level;
    MelFrame::new(b).unwrap()
}

fn units(lens: &[usize]) -> Vec<WordSpectrogram> {
    let mut start = 0;
    lens.iter()
        .enumerate()
        .map(|(i, &n)| {
            let frames = (0..n).map(|k| frame(0.2 + 0.01 * ((i * 7 + k) % 13) as f32, (i * 11 + k) % 80)).collect();
            let w = WordSpectrogram {
                unit_index: i + 1,
                first_frame: start,
                frames,
            };
            start += n;
            w
        })
        .collect()
}

fn flatten(us: &[WordSpectrogram]) -> Vec<MelFrame> {
    us.iter().flat_map(|u| u.frames.iter().copied()).collect()
}

#[test]
fn first_unit_without_left_context() {
    let voc = ReferenceVocoder::default();
    let us = units(&[10, 12]);
    let z = sample_noise(1, 30, 300).unwrap();
    let seg = synthesize_overlap(&voc, &us, 1, &z, 15).unwrap();
    assert_eq!(seg.samples.len(), 300 * 10);
    assert_eq!(seg.frames, 0..10);
}

#[test]
fn overlap_concatenation_matches_full_when_delta_covers_radius() {
    let voc = ReferenceVocoder::default();
    let us = units(&[10, 9, 17, 4]);
    let z = sample_noise(5, 60, 300).unwrap();
    let full = synthesize_full(&voc, &flatten(&us), &z).unwrap();
    for delta in [8, 15] {
        let mut cat = Vec::new();
        for t in 1..=us.len() {
            let lo = t.saturating_sub(2);
            cat.extend(synthesize_overlap(&voc, &us[lo..t], t, &z, delta).unwrap().samples);
        }
        assert_eq!(cat, full, "delta {delta}");
    }
}

#[test]
fn short_predecessor_limits_left_context() {
    let voc = ReferenceVocoder::default();
    let us = units(&[10, 4, 12]);
    let z = sample_noise(5, 60, 300).unwrap();
    let full = synthesize_full(&voc, &flatten(&us), &z).unwrap();
    let third = synthesize_overlap(&voc, &us[1..3], 3, &z, 15).unwrap();
    assert_ne!(third.samples[..], full[14 * 300..]);
}

#[test]
fn symmetric_kernel_needs_right_context() {
    let voc = ReferenceVocoder::symmetric(VocoderConfig::default());
    let us = units(&[10, 12, 11]);
    let z = sample_noise(5, 60, 300).unwrap();
    let full = synthesize_full(&voc, &flatten(&us), &z).unwrap();
    let mut with_right = Vec::new();
    let mut without = Vec::new();
    for t in 1usize..=3 {
        let lo = t.saturating_sub(2);
        with_right.extend(synthesize_overlap(&voc, &us[lo..(t + 1).min(3)], t, &z, 8).unwrap().samples);
        without.extend(synthesize_overlap(&voc, &us[lo..t], t, &z, 8).unwrap().samples);
    }
    assert_eq!(with_right, full);
    assert_ne!(without, full);
}

#[test]
fn alignment_errors() {
    let voc = ReferenceVocoder::default();
    let mut us = units(&[5, 5]);
    let z = sample_noise(1, 20, 300).unwrap();
    assert!(matches!(synthesize_overlap(&voc, &us, 3, &z, 4), Err(VocoderError::Alignment(_))));
    us[1].first_frame = 7;
    assert!(matches!(synthesize_overlap(&voc, &us, 2, &z, 4), Err(VocoderError::Alignment(_))));
    let short = sample_noise(1, 6, 300).unwrap();
    let ok = units(&[5, 5]);
    assert!(matches!(
        synthesize_overlap(&voc, &ok, 2, &short, 4),
        Err(VocoderError::NoiseExhausted { .. })
    ));
    assert!(matches!(synthesize_full(&voc, &flatten(&ok), &short), Err(VocoderError::NoiseExhausted { .. })));
}

#[test]
fn constant_frame_is_periodic_at_band_weighted_pitch() {
    let voc = ReferenceVocoder::default();
    let f = frame(0.5, 30);
    let (_, pitch) = voc.frame_params(&f);
    let frames = vec![f; 20];
    let z = vec![0.0; 6000];
    let out = voc.render(&frames, &z, 0).unwrap();
    let f0 = estimate_f0(&out[3000..3960], 24000).unwrap().unwrap();
    assert!((f0 - pitch).abs() < 1.0, "{f0} vs {pitch}");
}

#[test]
fn noise_enters_at_utterance_coordinates() {
    let voc = ReferenceVocoder::default();
    let us = units(&[6, 6]);
    let z = sample_noise(9, 20, 300).unwrap();
    let mut z2 = z.samples().to_vec();
    z2[6 * 300 + 17] += 1.0;
    let flat = flatten(&us);
    let a = voc.render(&flat, &z.samples()[..3600], 0).unwrap();
    let b = voc.render(&flat, &z2[..3600], 0).unwrap();
    let diff: Vec<usize> = (0..3600).filter(|&n| a[n] != b[n]).collect();
    assert_eq!(diff, vec![6 * 300 + 17]);
}

#[test]
fn seam_discrepancy_non_increasing_in_delta() {
    let engine = Engine::reference();
    let base = modeled();
    for text in corpus(6) {
        let full = engine.run_full_sentence(text, &base).unwrap();
        let wave = full.waveform();
        let mut prev = f32::INFINITY;
        for delta in [0, 2, 4, 6, 8] {
            let mut cfg = base.clone();
            cfg.delta = delta;
            let inc = engine.run_incremental(text, &cfg).unwrap();
            let d = seam_discrepancy(&inc.waveform(), &wave, &full.trace.unit_boundaries(), 8, 300).unwrap();
            assert!(d <= prev, "{text}: delta {delta} gives {d} after {prev}");
            prev = d;
        }
        assert_eq!(prev, 0.0);
    }
}

#[test]
fn lookahead_one_and_two_bit_identical_to_full() {
    let engine = Engine::reference();
    let base = modeled();
    for text in corpus(10) {
        let full = engine.run_full_sentence(text, &base).unwrap().waveform();
        for (k1, k2) in [(1, 0), (2, 0), (1, 1)] {
            let inc = engine.run_incremental(text, &base.clone().with_lookahead(k1, k2)).unwrap();
            assert_eq!(inc.waveform(), full, "{text} k1={k1} k2={k2}");
        }
        let mut cfg = base.clone();
        cfg.policy = Policy::full_sentence();
        assert_eq!(engine.run_incremental(text, &cfg).unwrap().waveform(), full);
    }
}

#[test]
fn segment_lengths_conserve_frames() {
    let engine = Engine::reference();
    let base = modeled();
    for text in corpus(5) {
        for (k1, k2, delta) in [(0, 0, 0), (0, 1, 3), (1, 0, 15), (3, 2, 8)] {
            let mut cfg = base.clone().with_lookahead(k1, k2);
            cfg.delta = delta;
            let out = engine.run_incremental(text, &cfg).unwrap();
            let total: usize = out.segments.iter().map(|s| s.samples.len()).sum();
            assert_eq!(total, 300 * out.trace.total_frames());
            for (s, r) in out.segments.iter().zip(&out.trace.unit_frames) {
                assert_eq!(&s.frames, r);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn overlap_is_exact_for_random_windows(
        lens in proptest::collection::vec(8usize..20, 1..6),
        delta in 8usize..20,
        seed in any::<u64>(),
    ) {
        let voc = ReferenceVocoder::default();
        let us = units(&lens);
        let total: usize = lens.iter().sum();
        let z = sample_noise(seed, total, 300).unwrap();
        let full = synthesize_full(&voc, &flatten(&us), &z).unwrap();
        let mut cat = Vec::new();
        for t in 1..=us.len() {
            let lo = t.saturating_sub(2);
            let hi = (t + 1).min(us.len());
            cat.extend(synthesize_overlap(&voc, &us[lo..hi], t, &z, delta).unwrap().samples);
        }
        prop_assert_eq!(cat, full);
    }

    #[test]
    fn renders_are_linear_in_noise(seed in any::<u64>()) {
        let voc = ReferenceVocoder::default();
        let frames = flatten(&units(&[4]));
        let z = sample_noise(seed, 4, 300).unwrap();
        let zero = vec![0.0; 1200];
        let with = voc.render(&frames, z.samples(), 0).unwrap();
        let without = voc.render(&frames, &zero, 0).unwrap();
        for n in 0..1200 {
            let e = voc.frame_params(&frames[n / 300]).0;
            let expected = 0.01 * e * f64::from(z.samples()[n]);
            prop_assert!((f64::from(with[n] - without[n]) - expected).abs() < 1e-6);
        }
    }
}
