//! RIFF/WAVE encoding for 16-bit PCM and 32-bit float, interleaved little-endian.

use crate::error::WavError;
use crate::render::MultichannelBuffer;
use crate::signal::{MAX_SAMPLE_RATE, MIN_SAMPLE_RATE};

pub const MAX_CHANNELS: u16 = 64;

const FORMAT_PCM: u16 = 1;
const FORMAT_FLOAT: u16 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleFormat {
    Pcm16,
    Float32,
}

impl SampleFormat {
    fn code(self) -> u16 {
        match self {
            SampleFormat::Pcm16 => FORMAT_PCM,
            SampleFormat::Float32 => FORMAT_FLOAT,
        }
    }

    fn bits(self) -> u16 {
        match self {
            SampleFormat::Pcm16 => 16,
            SampleFormat::Float32 => 32,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WavSpec {
    pub format: SampleFormat,
    pub channels: u16,
    pub sample_rate: u32,
}

impl WavSpec {
    pub fn validate(&self) -> Result<(), WavError> {
        if self.channels == 0 || self.channels > MAX_CHANNELS {
            return Err(WavError::InvalidSpec("channel count must be in 1..=64"));
        }
        if !(MIN_SAMPLE_RATE..=MAX_SAMPLE_RATE).contains(&self.sample_rate) {
            return Err(WavError::InvalidSpec("sample rate must be in 8000..=192000"));
        }
        Ok(())
    }

    fn block_align(&self) -> u16 {
        self.channels * self.format.bits() / 8
    }
}

/// Quantizes to 16 bits: `round(x * 32767)` clamped to the i16 range.
fn encode_pcm16(x: f32) -> i16 {
    (x as f64 * 32767.0).round().clamp(-32768.0, 32767.0) as i16
}

pub fn write_wav(buf: &MultichannelBuffer, spec: &WavSpec) -> Result<Vec<u8>, WavError> {
    spec.validate()?;
    if buf.channels.len() != spec.channels as usize {
        return Err(WavError::ChannelMismatch {
            buffer: buf.channels.len(),
            spec: spec.channels as usize,
        });
    }
    if buf.sample_rate != spec.sample_rate {
        return Err(WavError::InvalidSpec("buffer and spec sample rates differ"));
    }
    let frames = buf.frames();
    for (c, ch) in buf.channels.iter().enumerate() {
        if let Some(i) = ch.iter().position(|s| !s.is_finite()) {
            return Err(WavError::NonFinite { channel: c, frame: i });
        }
    }

    let block_align = spec.block_align() as u32;
    let data_len = frames as u32 * block_align;
    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&spec.format.code().to_le_bytes());
    out.extend_from_slice(&spec.channels.to_le_bytes());
    out.extend_from_slice(&spec.sample_rate.to_le_bytes());
    out.extend_from_slice(&(spec.sample_rate * block_align).to_le_bytes());
    out.extend_from_slice(&(block_align as u16).to_le_bytes());
    out.extend_from_slice(&spec.format.bits().to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for i in 0..frames {
        for ch in &buf.channels {
            match spec.format {
                SampleFormat::Pcm16 => out.extend_from_slice(&encode_pcm16(ch[i]).to_le_bytes()),
                SampleFormat::Float32 => out.extend_from_slice(&ch[i].to_le_bytes()),
            }
        }
    }
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let s = self.bytes.get(self.pos..self.pos.checked_add(n)?)?;
        self.pos += n;
        Some(s)
    }

    fn u16(&mut self) -> Option<u16> {
        self.take(2).map(|b| u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Option<u32> {
        self.take(4).map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

/// Parses a pcm16 or float32 WAV file. Unknown chunks are skipped.
///
/// 16-bit samples decode as `sample / 32768`.
pub fn read_wav(bytes: &[u8]) -> Result<(MultichannelBuffer, WavSpec), WavError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4) != Some(b"RIFF") {
        return Err(WavError::Malformed("missing RIFF tag"));
    }
    r.u32().ok_or(WavError::Malformed("missing RIFF size"))?;
    if r.take(4) != Some(b"WAVE") {
        return Err(WavError::Malformed("missing WAVE tag"));
    }

    let mut spec: Option<WavSpec> = None;
    loop {
        let id = r.take(4).ok_or(WavError::Malformed("no data chunk"))?;
        let size = r.u32().ok_or(WavError::Malformed("chunk header cut short"))? as usize;
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(WavError::Malformed("fmt chunk shorter than 16 bytes"));
                }
                let body = r.take(size).ok_or(WavError::Malformed("fmt chunk cut short"))?;
                let mut f = Reader { bytes: body, pos: 0 };
                let code = f.u16().unwrap();
                let channels = f.u16().unwrap();
                let sample_rate = f.u32().unwrap();
                let byte_rate = f.u32().unwrap();
                let block_align = f.u16().unwrap();
                let bits = f.u16().unwrap();
                let format = match (code, bits) {
                    (FORMAT_PCM, 16) => SampleFormat::Pcm16,
                    (FORMAT_FLOAT, 32) => SampleFormat::Float32,
                    _ => return Err(WavError::UnsupportedFormat { code, bits }),
                };
                let s = WavSpec {
                    format,
                    channels,
                    sample_rate,
                };
                s.validate()?;
                if block_align != s.block_align() || byte_rate != sample_rate * block_align as u32 {
                    return Err(WavError::Malformed("inconsistent block align or byte rate"));
                }
                spec = Some(s);
                r.take(size % 2);
            }
            b"data" => {
                let spec = spec.ok_or(WavError::Malformed("data chunk before fmt chunk"))?;
                if r.remaining() < size {
                    return Err(WavError::Truncated {
                        expected: size,
                        found: r.remaining(),
                    });
                }
                let align = spec.block_align() as usize;
                if !size.is_multiple_of(align) {
                    return Err(WavError::Malformed("data chunk is not a whole number of frames"));
                }
                let data = r.take(size).unwrap();
                return Ok((decode(data, &spec), spec));
            }
            _ => {
                let skip = size + size % 2;
                if r.take(skip).is_none() {
                    return Err(WavError::Malformed("chunk extends past end of file"));
                }
            }
        }
    }
}

fn decode(data: &[u8], spec: &WavSpec) -> MultichannelBuffer {
    let n = spec.channels as usize;
    let width = spec.format.bits() as usize / 8;
    let frames = data.len() / (n * width);
    let mut channels = vec![Vec::with_capacity(frames); n];
    for (i, sample) in data.chunks_exact(width).enumerate() {
        let v = match spec.format {
            SampleFormat::Pcm16 => i16::from_le_bytes([sample[0], sample[1]]) as f32 / 32768.0,
            SampleFormat::Float32 => f32::from_le_bytes([sample[0], sample[1], sample[2], sample[3]]),
        };
        channels[i % n].push(v);
    }
    MultichannelBuffer {
        channels,
        sample_rate: spec.sample_rate,
    }
}
