//! Reference frame features and stream fusion.

use alloc::vec;
use alloc::vec::Vec;

use crate::media::Image;
use crate::{Error, FeatureStream, Result};

pub const DEFAULT_HISTOGRAM_BINS: usize = 8;

/// Joint RGB histogram with `bins³` cells, L1-normalized.
///
/// Cell for a pixel is `(r·bins/256, g·bins/256, b·bins/256)` in red-major order.
pub fn color_histogram(img: &Image, bins: usize) -> Result<Vec<f64>> {
    if !(2..=16).contains(&bins) {
        return Err(Error::InvalidParameter(
            "histogram bins must lie in [2, 16]".into(),
        ));
    }
    if img.channels() != 3 {
        return Err(Error::InvalidParameter(
            "color histogram needs an RGB image".into(),
        ));
    }
    let mut counts = vec![0u64; bins * bins * bins];
    let q = |v: u8| v as usize * bins / 256;
    for px in img.pixels().chunks_exact(3) {
        counts[(q(px[0]) * bins + q(px[1])) * bins + q(px[2])] += 1;
    }
    let total = (img.width() * img.height()) as f64;
    Ok(counts.into_iter().map(|c| c as f64 / total).collect())
}

/// Per-frame concatenation `[a_i ‖ b_i]`; metadata comes from `a`.
pub fn fuse_concat(a: &FeatureStream, b: &FeatureStream) -> Result<FeatureStream> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.meta().fps != b.meta().fps {
        return Err(Error::InvalidParameter(
            "fused streams must share one frame rate".into(),
        ));
    }
    let dim = a.dim() + b.dim();
    let mut data = Vec::with_capacity(a.len() * dim);
    for (ra, rb) in a.rows().zip(b.rows()) {
        data.extend_from_slice(ra);
        data.extend_from_slice(rb);
    }
    FeatureStream::new(a.meta().clone(), a.len(), dim, data)
}

/// Left-to-right fusion of an ordered list of streams.
pub fn fuse_all(streams: &[FeatureStream]) -> Result<FeatureStream> {
    let (first, rest) = streams
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("nothing to fuse".into()))?;
    rest.iter()
        .try_fold(first.clone(), |acc, s| fuse_concat(&acc, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media::hflip;
    use crate::{Camera, StreamMeta};

    fn meta(id: &str) -> StreamMeta {
        StreamMeta {
            video_id: id.into(),
            camera: Camera::RightHand,
            fps: 6.0,
        }
    }

    #[test]
    fn black_image_fills_first_bin() {
        let h = color_histogram(&Image::filled(4, 3, &[0, 0, 0]).unwrap(), 8).unwrap();
        assert_eq!(h.len(), 512);
        assert_eq!(h[0], 1.0);
        assert!(h[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn half_black_half_white() {
        let mut px = vec![0u8; 6 * 3];
        px.extend(vec![255u8; 6 * 3]);
        let img = Image::new(6, 2, 3, px).unwrap();
        let h = color_histogram(&img, 8).unwrap();
        assert_eq!(h[0], 0.5);
        assert_eq!(h[(7 * 8 + 7) * 8 + 7], 0.5);
        assert_eq!(h.iter().filter(|&&v| v > 0.0).count(), 2);
    }

    #[test]
    fn normalized_and_flip_invariant() {
        let px: Vec<u8> = (0..7 * 5 * 3).map(|i| (i * 37 % 256) as u8).collect();
        let img = Image::new(7, 5, 3, px).unwrap();
        for bins in [2, 5, 8, 16] {
            let h = color_histogram(&img, bins).unwrap();
            assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert_eq!(h, color_histogram(&hflip(&img), bins).unwrap());
        }
    }

    #[test]
    fn rejects_bad_bins_and_gray() {
        let img = Image::filled(2, 2, &[1, 2, 3]).unwrap();
        assert!(color_histogram(&img, 1).is_err());
        assert!(color_histogram(&img, 17).is_err());
        assert!(color_histogram(&Image::filled(2, 2, &[1]).unwrap(), 8).is_err());
    }

    #[test]
    fn concatenation_order_and_identity() {
        let a = FeatureStream::from_rows(meta("a"), &[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = FeatureStream::from_rows(meta("b"), &[vec![5.0, 6.0, 7.0], vec![8.0, 9.0, 10.0]])
            .unwrap();
        let ab = fuse_concat(&a, &b).unwrap();
        assert_eq!(ab.dim(), 5);
        assert_eq!(ab.row(0), &[1.0, 2.0, 5.0, 6.0, 7.0]);
        assert_eq!(ab.row(1), &[3.0, 4.0, 8.0, 9.0, 10.0]);
        let ba = fuse_concat(&b, &a).unwrap();
        assert_eq!(ba.row(0), &[5.0, 6.0, 7.0, 1.0, 2.0]);
        assert_ne!(ab.data(), ba.data());

        let empty = FeatureStream::new(meta("e"), 2, 0, vec![]).unwrap();
        assert_eq!(fuse_concat(&a, &empty).unwrap(), a);
        assert_eq!(fuse_all(&[a.clone(), empty, b.clone()]).unwrap(), ab);
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let a = FeatureStream::from_rows(meta("a"), &[vec![1.0]]).unwrap();
        let b = FeatureStream::from_rows(meta("b"), &[vec![1.0], vec![2.0]]).unwrap();
        assert!(matches!(
            fuse_concat(&a, &b),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
