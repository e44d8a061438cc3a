use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::VocoderError;

/// Pre-sampled standard normal noise shared by every synthesis call of an
/// utterance.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseVector {
    seed: u64,
    samples: Vec<f32>,
}

impl NoiseVector {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// `hop * frame_capacity` samples. The stream depends only on the seed, so a
/// shorter vector is a prefix of a longer one.
pub fn sample_noise(seed: u64, frame_capacity: usize, hop: usize) -> Result<NoiseVector, VocoderError> {
    let len = frame_capacity.checked_mul(hop).filter(|&n| n > 0).ok_or(VocoderError::EmptyNoise)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..len).map(|_| rng.sample::<f32, _>(StandardNormal)).collect();
    Ok(NoiseVector { seed, samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_prefix_stable() {
        let a = sample_noise(42, 10, 300).unwrap();
        let b = sample_noise(42, 10, 300).unwrap();
        let long = sample_noise(42, 25, 300).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 3000);
        assert_eq!(a.samples(), &long.samples()[..3000]);
        assert_ne!(a.samples(), sample_noise(43, 10, 300).unwrap().samples());
    }

    #[test]
    fn zero_capacity_rejected() {
        assert_eq!(sample_noise(1, 0, 300), Err(VocoderError::EmptyNoise));
    }

    #[test]
    fn roughly_standard_normal() {
        let z = sample_noise(7, 200, 300).unwrap();
        let n = z.len() as f64;
        let mean = z.samples().iter().map(|&v| f64::from(v)).sum::<f64>() / n;
        let var = z.samples().iter().map(|&v| (f64::from(v) - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 0.02, "{mean}");
        assert!((var - 1.0).abs() < 0.03, "{var}");
    }
}
