//! Deterministic additive-sinusoid vocoder.
//!
//! Every frame contributes a sinusoid whose amplitude is the frame's mean
//! band energy and whose frequency is the energy-weighted mean of the band
//! centre frequencies, evaluated at utterance time. Each contribution is
//! weighted by a piecewise-linear kernel with knots one hop apart whose knot
//! values decay geometrically away from the frame and vanish beyond
//! `lookback` frames behind and `lookahead` frames ahead, so shifted kernels
//! sum to a constant. Frame-scaled noise from the shared noise vector is
//! added on top.

use std::f64::consts::TAU;

use super::{Vocoder, VocoderConfig, VocoderError};
use crate::acoustic::MelFrame;
use crate::N_MELS;

const LOW_HZ: f64 = 80.0;
const HIGH_HZ: f64 = 400.0;
/// Kernel weight remaining after one frame.
const DECAY: f64 = 0.35;

#[derive(Debug, Clone)]
pub struct ReferenceVocoder {
    config: VocoderConfig,
    lookback: usize,
    lookahead: usize,
    noise_scale: f64,
    band_hz: [f64; N_MELS],
}

impl ReferenceVocoder {
    /// Causal kernel: each sample depends on its own frame and the
    /// `receptive_radius` frames before it.
    pub fn new(config: VocoderConfig) -> Self {
        Self::with_kernel(config, config.receptive_radius, 0)
    }

    /// Kernel spanning `receptive_radius` frames on both sides.
    pub fn symmetric(config: VocoderConfig) -> Self {
        Self::with_kernel(config, config.receptive_radius, config.receptive_radius)
    }

    fn with_kernel(config: VocoderConfig, lookback: usize, lookahead: usize) -> Self {
        let mut band_hz = [0.0; N_MELS];
        for (b, hz) in band_hz.iter_mut().enumerate() {
            *hz = LOW_HZ + b as f64 * (HIGH_HZ - LOW_HZ) / (N_MELS - 1) as f64;
        }
        Self {
            config,
            lookback,
            lookahead,
            noise_scale: 0.01,
            band_hz,
        }
    }

    pub fn lookback(&self) -> usize {
        self.lookback
    }

    pub fn lookahead(&self) -> usize {
        self.lookahead
    }

    /// Kernel value `i` hops after a frame starts (negative `i` lies before).
    /// The causal kernel ramps in over the frame's first hop.
    fn knot(&self, i: i64) -> f64 {
        let (back, ahead) = (self.lookback as i64, self.lookahead as i64);
        if self.lookahead == 0 {
            if (1..=back).contains(&i) { DECAY.powi((i - 1) as i32) } else { 0.0 }
        } else if (-ahead..=back).contains(&i) {
            DECAY.powi(i.abs() as i32)
        } else {
            0.0
        }
    }

    fn kernel(&self, offset: i64, hop: usize) -> f64 {
        let hop = hop as i64;
        let i = offset.div_euclid(hop);
        let frac = offset.rem_euclid(hop) as f64 / hop as f64;
        (1.0 - frac) * self.knot(i) + frac * self.knot(i + 1)
    }

    /// Mean band energy and energy-weighted frequency of a frame.
    pub fn frame_params(&self, frame: &MelFrame) -> (f64, f64) {
        let mut sum = 0.0;
        let mut weighted = 0.0;
        for (e, hz) in frame.bands().iter().zip(self.band_hz.iter()) {
            let e = f64::from(*e);
            sum += e;
            weighted += e * hz;
        }
        let energy = sum / N_MELS as f64;
        let pitch = if sum > 0.0 { weighted / sum } else { 0.0 };
        (energy, pitch)
    }
}

impl Default for ReferenceVocoder {
    fn default() -> Self {
        Self::new(VocoderConfig::default())
    }
}

impl Vocoder for ReferenceVocoder {
    fn config(&self) -> &VocoderConfig {
        &self.config
    }

    fn render(&self, frames: &[MelFrame], noise: &[f32], first_frame: usize) -> Result<Vec<f32>, VocoderError> {
        let hop = self.config.hop_length;
        let needed = frames.len() * hop;
        if noise.len() != needed {
            return Err(VocoderError::Alignment(format!(
                "{} noise samples for {} frames",
                noise.len(),
                frames.len()
            )));
        }
        let params: Vec<(f64, f64)> = frames.iter().map(|f| self.frame_params(f)).collect();
        let sr = f64::from(self.config.sample_rate);
        let span = -(self.lookahead as i64)..=self.lookback as i64;
        let norm: f64 = span.map(|i| self.knot(i)).sum();
        let mut out = vec![0.0f32; needed];
        for (f, &(energy_f, _)) in params.iter().enumerate() {
            let lo = f.saturating_sub(self.lookback);
            let hi = (f + self.lookahead).min(frames.len() - 1);
            for s in 0..hop {
                let t = ((first_frame + f) * hop + s) as f64 / sr;
                let mut acc = 0.0;
                for (j, &(energy, pitch)) in params.iter().enumerate().take(hi + 1).skip(lo) {
                    if energy == 0.0 {
                        continue;
                    }
                    // signed sample offset from the start of frame j
                    let offset = (f * hop + s) as i64 - (j * hop) as i64;
                    let w = self.kernel(offset, hop);
                    if w > 0.0 {
                        acc += w * energy * (TAU * pitch * t).sin();
                    }
                }
                let value = acc / norm + self.noise_scale * energy_f * f64::from(noise[f * hop + s]);
                out[f * hop + s] = value as f32;
            }
        }
        Ok(out)
    }
}
