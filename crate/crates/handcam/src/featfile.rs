//! Binary feature files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic    4 bytes  "HCFT"
//! version  u16      1
//! camera   u8       0 left, 1 right, 2 head
//! reserved u8       0
//! fps      f32
//! N        u32      frames, >= 1
//! D        u32      dimension, >= 1
//! id_len   u16
//! id       id_len bytes of UTF-8
//! payload  N * D f32, row-major
//! ```

use std::fs;
use std::path::Path;

use handcam_core::{Camera, Error as CoreError, FeatureStream, StreamMeta};

use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"HCFT";
const VERSION: u16 = 1;
const FORMAT: &str = "feature file";

fn camera_code(c: Camera) -> u8 {
    match c {
        Camera::LeftHand => 0,
        Camera::RightHand => 1,
        Camera::Head => 2,
    }
}

fn camera_from_code(code: u8) -> Option<Camera> {
    match code {
        0 => Some(Camera::LeftHand),
        1 => Some(Camera::RightHand),
        2 => Some(Camera::Head),
        _ => None,
    }
}

/// Encodes a stream; values are stored as `f32`.
pub fn encode_features(stream: &FeatureStream) -> std::result::Result<Vec<u8>, CoreError> {
    let meta = stream.meta();
    let invalid = |reason| CoreError::InvalidHeader {
        format: FORMAT,
        reason,
    };
    if stream.is_empty() || stream.dim() == 0 {
        return Err(invalid("N and D must be at least 1"));
    }
    let n = u32::try_from(stream.len()).map_err(|_| invalid("too many frames"))?;
    let d = u32::try_from(stream.dim()).map_err(|_| invalid("dimension too large"))?;
    let id = meta.video_id.as_bytes();
    let id_len = u16::try_from(id.len()).map_err(|_| invalid("video id too long"))?;
    let mut out = Vec::with_capacity(22 + id.len() + stream.data().len() * 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(camera_code(meta.camera));
    out.push(0);
    out.extend_from_slice(&meta.fps.to_le_bytes());
    out.extend_from_slice(&n.to_le_bytes());
    out.extend_from_slice(&d.to_le_bytes());
    out.extend_from_slice(&id_len.to_le_bytes());
    out.extend_from_slice(id);
    for &v in stream.data() {
        let v = v as f32;
        if !v.is_finite() {
            return Err(CoreError::NonFinite);
        }
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], CoreError> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(CoreError::TruncatedHeader { format: FORMAT });
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u16(&mut self) -> std::result::Result<u16, CoreError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> std::result::Result<u32, CoreError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

pub fn decode_features(bytes: &[u8]) -> std::result::Result<FeatureStream, CoreError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(CoreError::BadMagic { format: FORMAT });
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(CoreError::UnsupportedVersion {
            format: FORMAT,
            version,
        });
    }
    let invalid = |reason| CoreError::InvalidHeader {
        format: FORMAT,
        reason,
    };
    let camera = camera_from_code(r.take(1)?[0]).ok_or(invalid("unknown camera code"))?;
    if r.take(1)?[0] != 0 {
        return Err(invalid("reserved byte is not zero"));
    }
    let fps = f32::from_le_bytes(r.take(4)?.try_into().unwrap());
    if fps <= 0.0 || !fps.is_finite() {
        return Err(invalid("fps must be positive"));
    }
    let n = r.u32()? as usize;
    let d = r.u32()? as usize;
    if n == 0 || d == 0 {
        return Err(invalid("N and D must be at least 1"));
    }
    let id_len = r.u16()? as usize;
    let video_id = std::str::from_utf8(r.take(id_len)?)
        .map_err(|_| invalid("video id is not UTF-8"))?
        .to_string();
    let payload = &bytes[r.pos..];
    let expected = n
        .checked_mul(d)
        .and_then(|v| v.checked_mul(4))
        .ok_or(invalid("payload size overflows"))?;
    if payload.len() < expected {
        return Err(CoreError::TruncatedPayload {
            expected,
            found: payload.len(),
        });
    }
    if payload.len() > expected {
        return Err(CoreError::TrailingBytes {
            found: payload.len() - expected,
        });
    }
    let data: Vec<f64> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    FeatureStream::new(
        StreamMeta {
            video_id,
            camera,
            fps,
        },
        n,
        d,
        data,
    )
}

pub fn read_features(path: &Path) -> Result<FeatureStream> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_features(&bytes).map_err(|e| Error::file(path, e))
}

pub fn write_features(path: &Path, stream: &FeatureStream) -> Result<()> {
    let bytes = encode_features(stream).map_err(|e| Error::file(path, e))?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
