use std::path::{Path, PathBuf};

use super::{GrayImage, ImageError};

/// Decodes a binary (P5) PGM with maxval 255.
pub fn load_pgm(bytes: &[u8]) -> Result<GrayImage, ImageError> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(ImageError::BadMagic);
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for (slot, name) in fields.iter_mut().zip(["width", "height", "maxval"]) {
        skip_space_and_comments(bytes, &mut pos);
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let token = std::str::from_utf8(&bytes[start..pos])
            .map_err(|_| ImageError::BadHeader(format!("{name} is not ASCII")))?;
        if token.is_empty() {
            return Err(ImageError::BadHeader(format!("missing {name}")));
        }
        *slot = token
            .parse()
            .map_err(|_| ImageError::BadHeader(format!("{name} {token:?} is not a number")))?;
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(ImageError::BadHeader(format!("maxval {maxval} != 255")));
    }
    if width == 0 || height == 0 {
        return Err(ImageError::BadHeader(format!(
            "zero dimension {width}x{height}"
        )));
    }
    // exactly one whitespace byte separates the header from the raster
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(ImageError::Truncated {
            expected: width * height,
            found: 0,
        });
    }
    pos += 1;
    let payload = &bytes[pos..];
    let expected = width * height;
    if payload.len() < expected {
        return Err(ImageError::Truncated {
            expected,
            found: payload.len(),
        });
    }
    let pixels = payload[..expected].iter().map(|&b| b as f64).collect();
    Ok(GrayImage::from_raw_unchecked(width, height, pixels))
}

fn skip_space_and_comments(bytes: &[u8], pos: &mut usize) {
    while *pos < bytes.len() {
        if bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        } else if bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
        } else {
            break;
        }
    }
}

/// Canonical P5 encoding: `P5\n<w> <h>\n255\n` followed by the raster,
/// intensities rounded half-up and clamped.
pub fn save_pgm(img: &GrayImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", img.width(), img.height());
    let mut out = Vec::with_capacity(header.len() + img.pixels().len());
    out.extend_from_slice(header.as_bytes());
    out.extend(img.pixels().iter().map(|&v| quantize(v)));
    out
}

#[inline]
fn quantize(v: f64) -> u8 {
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// `frame_000042.pgm` style name for frame index `idx`.
pub fn frame_file_name(idx: usize) -> String {
    format!("frame_{idx:06}.pgm")
}

/// Reads `frame_000000.pgm`, `frame_000001.pgm`, ... from `dir` until the
/// first missing index. Stray frame files past a gap are an error.
pub fn read_frame_dir(dir: &Path) -> Result<Vec<GrayImage>, ImageError> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| ImageError::FrameDir(format!("{}: {e}", dir.display())))?;
    let mut count = 0usize;
    for entry in entries.flatten() {
        let name = entry.file_name();
        let name = name.to_string_lossy();
        if name.starts_with("frame_") && name.ends_with(".pgm") {
            count += 1;
        }
    }
    let mut frames = Vec::with_capacity(count);
    for idx in 0..count {
        let path: PathBuf = dir.join(frame_file_name(idx));
        let bytes = std::fs::read(&path).map_err(|_| {
            ImageError::FrameDir(format!(
                "{}: frames are not consecutive from 000000 (missing {})",
                dir.display(),
                frame_file_name(idx)
            ))
        })?;
        frames.push(load_pgm(&bytes)?);
    }
    Ok(frames)
}
