//! Binary (P5) 8-bit grayscale PGM.

use std::path::Path;

use crate::error::{Error, Result};

use super::image::GrayImage;

pub fn decode(bytes: &[u8]) -> Result<GrayImage> {
    let mut pos = 0;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        // skip whitespace and comments
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Format("truncated PGM header".into()));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).unwrap_or("").to_string());
    }
    if fields[0] != "P5" {
        return Err(Error::Format(format!("expected P5 magic, got '{}'", fields[0])));
    }
    let parse = |s: &str, what: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::Format(format!("bad {what} '{s}'")))
    };
    let cols = parse(&fields[1], "width")?;
    let rows = parse(&fields[2], "height")?;
    let maxval = parse(&fields[3], "maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::Format(format!("unsupported maxval {maxval}")));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let raster = bytes
        .get(pos..pos + rows * cols)
        .ok_or_else(|| Error::Format("truncated raster".into()))?;
    let mut data = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            data[r + c * rows] = raster[r * cols + c] as f64 / maxval as f64;
        }
    }
    GrayImage::new(rows, cols, data)
}

/// Values are clamped to `[0, 1]` and rounded to 8 bits.
pub fn encode(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.cols, img.rows).into_bytes();
    out.reserve(img.rows * img.cols);
    for r in 0..img.rows {
        for c in 0..img.cols {
            out.push((img.get(r, c).clamp(0.0, 1.0) * 255.0).round() as u8);
        }
    }
    out
}

pub fn read(path: &Path) -> Result<GrayImage> {
    decode(&std::fs::read(path)?)
}

pub fn write(path: &Path, img: &GrayImage) -> Result<()> {
    std::fs::write(path, encode(img))?;
    Ok(())
}
