//! 16-bit PCM mono WAV output.

use std::io::{Cursor, Seek, Write};
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum WavError {
    #[error(transparent)]
    Encode(#[from] hound::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn quantize(sample: f32) -> i16 {
    (sample.clamp(-1.0, 1.0) * 32767.0).round() as i16
}

fn wav_format(sample_rate: u32) -> hound::WavSpec {
    hound::WavSpec {
        channels: 1,
        sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    }
}

pub fn write_to<W: Write + Seek>(out: W, samples: &[f32], sample_rate: u32) -> Result<(), WavError> {
    let mut w = hound::WavWriter::new(out, wav_format(sample_rate))?;
    for &s in samples {
        w.write_sample(quantize(s))?;
    }
    w.finalize()?;
    Ok(())
}

pub fn encode(samples: &[f32], sample_rate: u32) -> Result<Vec<u8>, WavError> {
    let mut buf = Cursor::new(Vec::new());
    write_to(&mut buf, samples, sample_rate)?;
    Ok(buf.into_inner())
}

pub fn write_file(path: &Path, samples: &[f32], sample_rate: u32) -> Result<(), WavError> {
    std::fs::write(path, encode(samples, sample_rate)?)?;
    Ok(())
}

/// Reads a 16-bit mono file back as `[-1, 1]` floats.
pub fn read_file(path: &Path) -> Result<(Vec<f32>, u32), WavError> {
    let mut r = hound::WavReader::open(path)?;
    let rate = r.spec().sample_rate;
    let samples = r
        .samples::<i16>()
        .map(|s| s.map(|v| f32::from(v) / 32767.0))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((samples, rate))
}
