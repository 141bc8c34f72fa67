use alloc::string::String;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Default processing rate of the pipeline, in frames per second.
pub const DEFAULT_FPS: f32 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Camera {
    LeftHand,
    RightHand,
    Head,
}

impl Camera {
    pub fn name(self) -> &'static str {
        match self {
            Camera::LeftHand => "left",
            Camera::RightHand => "right",
            Camera::Head => "head",
        }
    }

    pub fn from_name(name: &str) -> Option<Camera> {
        match name {
            "left" => Some(Camera::LeftHand),
            "right" => Some(Camera::RightHand),
            "head" => Some(Camera::Head),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreamMeta {
    pub video_id: String,
    pub camera: Camera,
    pub fps: f32,
}

/// Borrowed view of one frame's feature vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameFeature<'a> {
    pub video_id: &'a str,
    pub frame_index: usize,
    pub camera: Camera,
    pub values: &'a [f64],
}

/// Per-frame feature vectors of one video, stored row-major.
///
/// Frame indices are implicit and contiguous from 0.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStream {
    meta: StreamMeta,
    dim: usize,
    len: usize,
    data: Vec<f64>,
}

impl FeatureStream {
    /// Builds a stream of `len` frames from a flat row-major buffer of `len * dim` values.
    pub fn new(meta: StreamMeta, len: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != len * dim {
            return Err(Error::LengthMismatch {
                expected: len * dim,
                found: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(FeatureStream {
            meta,
            dim,
            len,
            data,
        })
    }

    pub fn from_rows(meta: StreamMeta, rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(meta, rows.len(), dim, data)
    }

    pub fn meta(&self) -> &StreamMeta {
        &self.meta
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        (0..self.len).map(move |i| self.row(i))
    }

    pub fn frame(&self, i: usize) -> FrameFeature<'_> {
        FrameFeature {
            video_id: &self.meta.video_id,
            frame_index: i,
            camera: self.meta.camera,
            values: self.row(i),
        }
    }

    pub fn frames(&self) -> impl ExactSizeIterator<Item = FrameFeature<'_>> + '_ {
        (0..self.len).map(move |i| self.frame(i))
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Mean feature over frames `start..end`.
    pub fn mean(&self, start: usize, end: usize) -> Vec<f64> {
        let mut acc = alloc::vec![0.0; self.dim];
        for i in start..end {
            for (a, v) in acc.iter_mut().zip(self.row(i)) {
                *a += v;
            }
        }
        let n = (end - start) as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn meta() -> StreamMeta {
        StreamMeta {
            video_id: "v".into(),
            camera: Camera::RightHand,
            fps: DEFAULT_FPS,
        }
    }

    #[test]
    fn rows_and_frames() {
        let s = FeatureStream::from_rows(meta(), &[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.row(1), &[3.0, 4.0]);
        assert_eq!(s.frame(1).frame_index, 1);
        assert_eq!(s.mean(0, 2), vec![2.0, 3.0]);
    }

    #[test]
    fn rejects_ragged_and_non_finite() {
        assert!(FeatureStream::from_rows(meta(), &[vec![1.0], vec![1.0, 2.0]]).is_err());
        assert_eq!(
            FeatureStream::new(meta(), 1, 1, vec![f64::INFINITY]),
            Err(Error::NonFinite)
        );
        assert!(FeatureStream::new(meta(), 2, 2, vec![0.0; 3]).is_err());
    }
}
