//! Binary PPM (P6, maxval 255) frames and directory-of-frames videos.

use std::fs;
use std::path::{Path, PathBuf};

use handcam_core::media::Image;
use handcam_core::Error as CoreError;
use rayon::prelude::*;

use crate::{Error, Result};

/// Decodes a P6 image. Header comments (`#` to end of line) are skipped.
pub fn decode_ppm(bytes: &[u8]) -> std::result::Result<Image, CoreError> {
    if bytes.len() < 2 || &bytes[..2] != b"P6" {
        return Err(CoreError::PpmBadMagic);
    }
    let mut pos = 2;
    let width = header_number(bytes, &mut pos, "missing width")?;
    let height = header_number(bytes, &mut pos, "missing height")?;
    let maxval = header_number(bytes, &mut pos, "missing maxval")?;
    if width == 0 || height == 0 {
        return Err(CoreError::PpmBadHeader("zero image dimension"));
    }
    if maxval != 255 {
        return Err(CoreError::PpmMaxval(maxval));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        Some(_) => return Err(CoreError::PpmBadHeader("no whitespace after maxval")),
        None => return Err(CoreError::PpmTruncated),
    }
    let need = (width as usize)
        .checked_mul(height as usize)
        .and_then(|n| n.checked_mul(3))
        .ok_or(CoreError::PpmBadHeader("image too large"))?;
    let raster = &bytes[pos..];
    if raster.len() < need {
        return Err(CoreError::PpmTruncated);
    }
    if raster.len() > need {
        return Err(CoreError::TrailingBytes {
            found: raster.len() - need,
        });
    }
    Image::new(width as usize, height as usize, 3, raster.to_vec())
}

fn header_number(
    bytes: &[u8],
    pos: &mut usize,
    missing: &'static str,
) -> std::result::Result<u32, CoreError> {
    loop {
        match bytes.get(*pos) {
            Some(b'#') => {
                while bytes.get(*pos).is_some_and(|&b| b != b'\n') {
                    *pos += 1;
                }
            }
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(_) => break,
            None => return Err(CoreError::PpmBadHeader(missing)),
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(u8::is_ascii_digit) {
        *pos += 1;
    }
    if start == *pos {
        return Err(CoreError::PpmBadHeader(missing));
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or(CoreError::PpmBadHeader("header number out of range"))
}

/// Canonical P6 encoding: `P6\n<w> <h>\n255\n` followed by the raster.
/// Gray images are expanded to RGB.
pub fn encode_ppm(img: &Image) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    if img.channels() == 3 {
        out.extend_from_slice(img.pixels());
    } else {
        out.extend(img.pixels().iter().flat_map(|&v| [v, v, v]));
    }
    out
}

pub fn load_ppm(path: &Path) -> Result<Image> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_ppm(&bytes).map_err(|e| Error::file(path, e))
}

pub fn save_ppm(path: &Path, img: &Image) -> Result<()> {
    fs::write(path, encode_ppm(img)).map_err(|e| Error::io(path, e))
}

pub fn frame_name(index: usize) -> String {
    format!("frame_{index:06}.ppm")
}

/// Frame paths of a video directory, checked to run `frame_000000.ppm` upward without gaps.
pub fn video_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut indices = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name();
        let Some(name) = name.to_str() else { continue };
        if let Some(idx) = name
            .strip_prefix("frame_")
            .and_then(|s| s.strip_suffix(".ppm"))
            .filter(|s| s.len() == 6)
            .and_then(|s| s.parse::<usize>().ok())
        {
            indices.push(idx);
        }
    }
    indices.sort_unstable();
    if indices.is_empty() {
        return Err(Error::file(dir, CoreError::EmptyVideo));
    }
    if let Some((pos, _)) = indices.iter().enumerate().find(|&(i, &v)| i != v) {
        return Err(Error::parse(
            dir,
            0,
            format!("missing frame {}", frame_name(pos)),
        ));
    }
    Ok(indices
        .into_iter()
        .map(|i| dir.join(frame_name(i)))
        .collect())
}

pub fn load_video(dir: &Path) -> Result<Vec<Image>> {
    video_frames(dir)?.par_iter().map(|p| load_ppm(p)).collect()
}

pub fn save_video(dir: &Path, frames: &[Image]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    frames
        .par_iter()
        .enumerate()
        .try_for_each(|(i, f)| save_ppm(&dir.join(frame_name(i)), f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decodes_declared_bytes() {
        let bytes = b"P6\n2 1\n255\n\xff\x00\x00\x00\xff\x00";
        let img = decode_ppm(bytes).unwrap();
        assert_eq!((img.width(), img.height()), (2, 1));
        assert_eq!(img.pixels(), &[255, 0, 0, 0, 255, 0]);
        assert_eq!(encode_ppm(&img), bytes.to_vec());
    }

    #[test]
    fn comments_and_spacing_are_accepted() {
        let bytes = b"P6 # made by hand\n 2\t1 # size\n255\r\x01\x02\x03\x04\x05\x06";
        let img = decode_ppm(bytes).unwrap();
        assert_eq!(img.pixels(), &[1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn malformed_inputs_have_distinct_errors() {
        assert_eq!(
            decode_ppm(b"P3\n1 1\n255\n000"),
            Err(CoreError::PpmBadMagic)
        );
        assert_eq!(
            decode_ppm(b"P6\n1 1\n65535\n"),
            Err(CoreError::PpmMaxval(65535))
        );
        assert!(matches!(
            decode_ppm(b"P6\n1\n"),
            Err(CoreError::PpmBadHeader(_))
        ));
        let err = decode_ppm(b"P6\n2 1\n255\n\x01\x02\x03").unwrap_err();
        assert_eq!(err, CoreError::PpmTruncated);
        assert_eq!(err.to_string(), "unexpected end of pixel data");
        assert_eq!(
            decode_ppm(b"P6\n1 1\n255\n\x01\x02\x03\x04"),
            Err(CoreError::TrailingBytes { found: 1 })
        );
    }

    #[test]
    fn gray_is_written_as_rgb() {
        let img = Image::new(2, 1, 1, vec![7, 9]).unwrap();
        let back = decode_ppm(&encode_ppm(&img)).unwrap();
        assert_eq!(back.pixels(), &[7, 7, 7, 9, 9, 9]);
    }
}
