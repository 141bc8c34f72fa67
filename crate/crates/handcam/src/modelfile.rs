//! Binary linear-model files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic      4 bytes "HCLM"
//! version    u16     1
//! kind       u8      0 state model, 1 change model
//! reserved   u8      0
//! K          u32     outputs
//! D          u32     input dimension
//! C          f64
//! epochs     u32
//! seed       u64
//! -- state models only --
//! task       u16 length + UTF-8 name
//! free       u32     free label index
//! labels     K times: u16 length + UTF-8 name
//! -- all --
//! weights    K * D f64, row-major
//! biases     K f64
//! ```

use std::fs;
use std::path::Path;

use handcam_core::classify::{LinearModel, ModelTarget, TrainConfig};
use handcam_core::{Error as CoreError, LabelSpace, Task};

use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"HCLM";
const VERSION: u16 = 1;
const FORMAT: &str = "model file";

fn put_str(out: &mut Vec<u8>, s: &str) -> std::result::Result<(), CoreError> {
    let len = u16::try_from(s.len()).map_err(|_| CoreError::InvalidHeader {
        format: FORMAT,
        reason: "string too long",
    })?;
    out.extend_from_slice(&len.to_le_bytes());
    out.extend_from_slice(s.as_bytes());
    Ok(())
}

pub fn encode_model(model: &LinearModel) -> std::result::Result<Vec<u8>, CoreError> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(match model.target() {
        ModelTarget::States(_) => 0,
        ModelTarget::Change => 1,
    });
    out.push(0);
    out.extend_from_slice(&(model.classes() as u32).to_le_bytes());
    out.extend_from_slice(&(model.dim() as u32).to_le_bytes());
    let cfg = model.config();
    out.extend_from_slice(&cfg.c.to_le_bytes());
    out.extend_from_slice(&(cfg.epochs as u32).to_le_bytes());
    out.extend_from_slice(&cfg.seed.to_le_bytes());
    if let ModelTarget::States(space) = model.target() {
        put_str(&mut out, space.task().name())?;
        out.extend_from_slice(&(space.free_label_index() as u32).to_le_bytes());
        for l in space.labels() {
            put_str(&mut out, l)?;
        }
    }
    for v in model.weights().iter().chain(model.biases()) {
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
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or(CoreError::TruncatedHeader { format: FORMAT })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> std::result::Result<[u8; N], CoreError> {
        Ok(self.take(N)?.try_into().unwrap())
    }

    fn string(&mut self) -> std::result::Result<String, CoreError> {
        let len = u16::from_le_bytes(self.array()?) as usize;
        std::str::from_utf8(self.take(len)?)
            .map(str::to_string)
            .map_err(|_| CoreError::InvalidHeader {
                format: FORMAT,
                reason: "string is not UTF-8",
            })
    }
}

pub fn decode_model(bytes: &[u8]) -> std::result::Result<LinearModel, CoreError> {
    let invalid = |reason| CoreError::InvalidHeader {
        format: FORMAT,
        reason,
    };
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(CoreError::BadMagic { format: FORMAT });
    }
    let version = u16::from_le_bytes(r.array()?);
    if version != VERSION {
        return Err(CoreError::UnsupportedVersion {
            format: FORMAT,
            version,
        });
    }
    let kind = r.take(1)?[0];
    if r.take(1)?[0] != 0 {
        return Err(invalid("reserved byte is not zero"));
    }
    let k = u32::from_le_bytes(r.array()?) as usize;
    let dim = u32::from_le_bytes(r.array()?) as usize;
    let config = TrainConfig {
        c: f64::from_le_bytes(r.array()?),
        epochs: u32::from_le_bytes(r.array()?) as usize,
        seed: u64::from_le_bytes(r.array()?),
    };
    let target = match kind {
        0 => {
            let task_name = r.string()?;
            let free = u32::from_le_bytes(r.array()?) as usize;
            if k > bytes.len() {
                return Err(CoreError::TruncatedHeader { format: FORMAT });
            }
            let labels = (0..k)
                .map(|_| r.string())
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let task = Task::from_name(&task_name, k).ok_or(invalid("unknown task"))?;
            ModelTarget::States(LabelSpace::new(task, labels, free)?)
        }
        1 => ModelTarget::Change,
        _ => return Err(invalid("unknown model kind")),
    };
    let values = k
        .checked_mul(dim)
        .and_then(|v| v.checked_add(k))
        .ok_or(invalid("model size overflows"))?;
    let payload = &bytes[r.pos..];
    let expected = values * 8;
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
    let mut nums: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let biases = nums.split_off(k * dim);
    LinearModel::new(target, dim, nums, biases, config)
}

pub fn read_model(path: &Path) -> Result<LinearModel> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_model(&bytes).map_err(|e| Error::file(path, e))
}

pub fn write_model(path: &Path, model: &LinearModel) -> Result<()> {
    let bytes = encode_model(model).map_err(|e| Error::file(path, e))?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state_model() -> LinearModel {
        LinearModel::new(
            ModelTarget::States(LabelSpace::standard(Task::Custom(3))),
            2,
            vec![0.5, -1.0, 2.0, 0.25, 0.0, 1e-9],
            vec![1.0, -1.0, 0.125],
            TrainConfig {
                c: 0.1,
                epochs: 7,
                seed: 42,
            },
        )
        .unwrap()
    }

    #[test]
    fn round_trips() {
        let m = state_model();
        let bytes = encode_model(&m).unwrap();
        let back = decode_model(&bytes).unwrap();
        assert_eq!(back, m);
        assert_eq!(encode_model(&back).unwrap(), bytes);

        let change = LinearModel::new(
            ModelTarget::Change,
            3,
            vec![1.0, 2.0, 3.0],
            vec![-0.5],
            TrainConfig::default(),
        )
        .unwrap();
        assert_eq!(
            decode_model(&encode_model(&change).unwrap()).unwrap(),
            change
        );
    }

    #[test]
    fn rejects_damage() {
        let bytes = encode_model(&state_model()).unwrap();
        assert!(matches!(
            decode_model(&bytes[..bytes.len() - 3]),
            Err(CoreError::TruncatedPayload { .. })
        ));
        assert!(matches!(
            decode_model(&bytes[..20]),
            Err(CoreError::TruncatedHeader { .. })
        ));
        let mut bad = bytes;
        bad[6] = 9;
        assert!(matches!(
            decode_model(&bad),
            Err(CoreError::InvalidHeader { .. })
        ));
    }
}
