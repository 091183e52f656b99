//! Binary sample frames.
//!
//! All integers and floats are little-endian.
//!
//! | offset | size | field                                            |
//! |--------|------|--------------------------------------------------|
//! | 0      | 4    | `frame_len`: u32, bytes following this field     |
//! | 4      | 4    | magic `b"CGTF"`                                  |
//! | 8      | 1    | version, currently 1                             |
//! | 9      | 1    | flags, reserved, must be 0                       |
//! | 10     | 2    | `id_len`: u16                                    |
//! | 12     | n    | stream id, UTF-8, `id_len` bytes                 |
//! | 12+n   | 2    | `channel_count`: u16                             |
//! | 14+n   | 4    | `sample_count`: u32                              |
//! | 18+n   | ...  | per sample: f64 timestamp, then `channel_count` × f32 |

use std::io::Read;

use super::{Chunk, Sample, StreamError};

pub const FRAME_MAGIC: [u8; 4] = *b"CGTF";
pub const FRAME_VERSION: u8 = 1;

/// Upper bound on a single frame body, keeps a corrupt length prefix from
/// triggering a huge allocation.
pub const MAX_FRAME_LEN: u32 = 64 * 1024 * 1024;

pub fn encode_chunk(chunk: &Chunk) -> Result<Vec<u8>, StreamError> {
    chunk.validate()?;
    let channels = chunk.channel_count();
    for s in &chunk.samples {
        if !s.timestamp.is_finite() || s.values.iter().any(|v| !v.is_finite()) {
            return Err(StreamError::NonFinite);
        }
    }
    let id = chunk.stream_id.as_bytes();
    let id_len = u16::try_from(id.len()).map_err(|_| StreamError::IdTooLong)?;
    let sample_count = u32::try_from(chunk.samples.len()).map_err(|_| StreamError::FrameTooLarge)?;

    let body_len = 4 + 1 + 1 + 2 + id.len() + 2 + 4 + chunk.samples.len() * (8 + 4 * channels);
    let frame_len = u32::try_from(body_len)
        .ok()
        .filter(|&n| n <= MAX_FRAME_LEN)
        .ok_or(StreamError::FrameTooLarge)?;

    let mut out = Vec::with_capacity(4 + body_len);
    out.extend_from_slice(&frame_len.to_le_bytes());
    out.extend_from_slice(&FRAME_MAGIC);
    out.push(FRAME_VERSION);
    out.push(0);
    out.extend_from_slice(&id_len.to_le_bytes());
    out.extend_from_slice(id);
    out.extend_from_slice(&(channels as u16).to_le_bytes());
    out.extend_from_slice(&sample_count.to_le_bytes());
    for s in &chunk.samples {
        out.extend_from_slice(&s.timestamp.to_le_bytes());
        for v in &s.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

/// Decodes one frame from the front of `bytes`, returning the chunk and the
/// number of bytes consumed.
pub fn decode_chunk(bytes: &[u8]) -> Result<(Chunk, usize), StreamError> {
    let mut cur = Cursor { buf: bytes, pos: 0 };
    let frame_len = cur.u32()?;
    if frame_len > MAX_FRAME_LEN {
        return Err(StreamError::FrameTooLarge);
    }
    let body = cur.take(frame_len as usize)?;
    let chunk = decode_body(body)?;
    Ok((chunk, 4 + frame_len as usize))
}

/// Reads exactly one frame from a byte stream. Returns `Ok(None)` on a clean
/// end of stream before the length prefix.
pub fn read_frame<R: Read>(reader: &mut R) -> Result<Option<Chunk>, StreamError> {
    let mut len_buf = [0u8; 4];
    let mut filled = 0;
    while filled < 4 {
        match reader.read(&mut len_buf[filled..]) {
            Ok(0) if filled == 0 => return Ok(None),
            Ok(0) => return Err(StreamError::Truncated),
            Ok(n) => filled += n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => continue,
            Err(e) => return Err(StreamError::Io(e)),
        }
    }
    let frame_len = u32::from_le_bytes(len_buf);
    if frame_len > MAX_FRAME_LEN {
        return Err(StreamError::FrameTooLarge);
    }
    let mut body = vec![0u8; frame_len as usize];
    reader.read_exact(&mut body).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            StreamError::Truncated
        } else {
            StreamError::Io(e)
        }
    })?;
    decode_body(&body).map(Some)
}

fn decode_body(body: &[u8]) -> Result<Chunk, StreamError> {
    let mut cur = Cursor { buf: body, pos: 0 };
    if cur.take(4)? != FRAME_MAGIC {
        return Err(StreamError::BadMagic);
    }
    let version = cur.u8()?;
    if version != FRAME_VERSION {
        return Err(StreamError::UnsupportedVersion(version));
    }
    let _flags = cur.u8()?;
    let id_len = cur.u16()? as usize;
    let stream_id = std::str::from_utf8(cur.take(id_len)?)
        .map_err(|_| StreamError::InvalidUtf8)?
        .to_string();
    let channels = cur.u16()? as usize;
    let count = cur.u32()? as usize;
    let needed = count
        .checked_mul(8 + 4 * channels)
        .ok_or(StreamError::FrameTooLarge)?;
    if cur.remaining() != needed {
        return Err(StreamError::Truncated);
    }
    let mut samples = Vec::with_capacity(count);
    for _ in 0..count {
        let timestamp = cur.f64()?;
        let mut values = Vec::with_capacity(channels);
        for _ in 0..channels {
            values.push(cur.f32()?);
        }
        if !timestamp.is_finite() || values.iter().any(|v| !v.is_finite()) {
            return Err(StreamError::NonFinite);
        }
        samples.push(Sample { timestamp, values });
    }
    Chunk::new(stream_id, samples)
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], StreamError> {
        if self.remaining() < n {
            return Err(StreamError::Truncated);
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], StreamError> {
        let mut a = [0u8; N];
        a.copy_from_slice(self.take(N)?);
        Ok(a)
    }

    fn u8(&mut self) -> Result<u8, StreamError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, StreamError> {
        self.array().map(u16::from_le_bytes)
    }

    fn u32(&mut self) -> Result<u32, StreamError> {
        self.array().map(u32::from_le_bytes)
    }

    fn f32(&mut self) -> Result<f32, StreamError> {
        self.array().map(f32::from_le_bytes)
    }

    fn f64(&mut self) -> Result<f64, StreamError> {
        self.array().map(f64::from_le_bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn chunk(id: &str, samples: Vec<(f64, Vec<f32>)>) -> Chunk {
        Chunk::new(
            id,
            samples.into_iter().map(|(t, v)| Sample::new(t, v)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_sample_roundtrip() {
        let c = chunk("eda-1", vec![(0.0, vec![0.0])]);
        let bytes = encode_chunk(&c).unwrap();
        let (back, used) = decode_chunk(&bytes).unwrap();
        assert_eq!(back, c);
        assert_eq!(used, bytes.len());
    }

    #[test]
    fn eeg_chunk_preserves_order() {
        let samples = (0..3)
            .map(|i| (i as f64 / 128.0, (0..14).map(|c| (i * 14 + c) as f32 * 0.5).collect()))
            .collect();
        let c = chunk("eeg", samples);
        let (back, _) = decode_chunk(&encode_chunk(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_nan() {
        let c = chunk("x", vec![(0.0, vec![f32::NAN])]);
        assert!(matches!(encode_chunk(&c), Err(StreamError::NonFinite)));
        let c = chunk("x", vec![(f64::INFINITY, vec![1.0])]);
        assert!(matches!(encode_chunk(&c), Err(StreamError::NonFinite)));
    }

    #[test]
    fn header_layout_is_stable() {
        let c = chunk("ab", vec![(1.0, vec![2.0])]);
        let bytes = encode_chunk(&c).unwrap();
        let expected_len = 4 + 1 + 1 + 2 + 2 + 2 + 4 + 12;
        assert_eq!(bytes.len(), 4 + expected_len);
        assert_eq!(&bytes[0..4], &(expected_len as u32).to_le_bytes());
        assert_eq!(&bytes[4..8], b"CGTF");
        assert_eq!(bytes[8], 1);
        assert_eq!(&bytes[10..12], &2u16.to_le_bytes());
        assert_eq!(&bytes[12..14], b"ab");
        assert_eq!(&bytes[14..16], &1u16.to_le_bytes());
        assert_eq!(&bytes[16..20], &1u32.to_le_bytes());
        assert_eq!(&bytes[20..28], &1.0f64.to_le_bytes());
        assert_eq!(&bytes[28..32], &2.0f32.to_le_bytes());
    }

    #[test]
    fn corrupt_frames_are_rejected() {
        let c = chunk("ab", vec![(1.0, vec![2.0])]);
        let bytes = encode_chunk(&c).unwrap();
        assert!(matches!(
            decode_chunk(&bytes[..bytes.len() - 1]),
            Err(StreamError::Truncated)
        ));
        let mut bad = bytes.clone();
        bad[4] = b'X';
        assert!(matches!(decode_chunk(&bad), Err(StreamError::BadMagic)));
        let mut bad = bytes;
        bad[8] = 9;
        assert!(matches!(
            decode_chunk(&bad),
            Err(StreamError::UnsupportedVersion(9))
        ));
    }

    #[test]
    fn read_frame_handles_back_to_back_frames() {
        let a = chunk("a", vec![(0.0, vec![1.0, 2.0])]);
        let b = chunk("b", vec![(0.5, vec![3.0]), (0.6, vec![4.0])]);
        let mut wire = encode_chunk(&a).unwrap();
        wire.extend(encode_chunk(&b).unwrap());
        let mut r = wire.as_slice();
        assert_eq!(read_frame(&mut r).unwrap(), Some(a));
        assert_eq!(read_frame(&mut r).unwrap(), Some(b));
        assert_eq!(read_frame(&mut r).unwrap(), None);
    }

    fn arb_chunk() -> impl Strategy<Value = Chunk> {
        (1usize..6, 1usize..20, "[a-z0-9-]{1,12}").prop_flat_map(|(ch, n, id)| {
            prop::collection::vec(
                (
                    -1e6f64..1e6,
                    prop::collection::vec(prop::num::f32::NORMAL | prop::num::f32::ZERO, ch),
                ),
                n,
            )
            .prop_map(move |rows| {
                Chunk::new(
                    id.clone(),
                    rows.into_iter().map(|(t, v)| Sample::new(t, v)).collect(),
                )
                .unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn roundtrip_is_bit_exact(c in arb_chunk()) {
            let bytes = encode_chunk(&c).unwrap();
            let (back, used) = decode_chunk(&bytes).unwrap();
            prop_assert_eq!(used, bytes.len());
            prop_assert_eq!(back.samples.len(), c.samples.len());
            for (a, b) in back.samples.iter().zip(&c.samples) {
                prop_assert_eq!(a.timestamp.to_bits(), b.timestamp.to_bits());
                let ab: Vec<u32> = a.values.iter().map(|v| v.to_bits()).collect();
                let bb: Vec<u32> = b.values.iter().map(|v| v.to_bits()).collect();
                prop_assert_eq!(ab, bb);
            }
            prop_assert_eq!(encode_chunk(&back).unwrap(), bytes);
        }
    }
}
