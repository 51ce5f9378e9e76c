use std::fs;
use std::path::Path;

use super::IoError;
use crate::grid::ImageGrid;

/// Binary 16-bit PGM (`P5`, maxval 65535, big-endian samples). Values are
/// scaled so the image maximum maps to 65535; negatives clip to 0. 1D grids
/// become one row, 3D grids stack their slices along the last axis
/// vertically.
pub fn render_pgm16(img: &ImageGrid) -> Vec<u8> {
    let dims = img.dims();
    let (rows, cols, slices) = match dims.len() {
        1 => (1, dims[0], 1),
        2 => (dims[0], dims[1], 1),
        _ => (dims[0], dims[1], dims[2]),
    };
    let peak = img.max();
    let scale = if peak > 0.0 { 65535.0 / peak } else { 0.0 };
    let mut out = format!("P5\n{} {}\n65535\n", cols, rows * slices).into_bytes();
    for k in 0..slices {
        for r in 0..rows {
            for c in 0..cols {
                let v = img.values()[(r * cols + c) * slices + k];
                let g = (v.max(0.0) * scale).round().min(65535.0) as u16;
                out.extend_from_slice(&g.to_be_bytes());
            }
        }
    }
    out
}

pub fn write_pgm16(path: &Path, img: &ImageGrid) -> Result<(), IoError> {
    fs::write(path, render_pgm16(img))?;
    Ok(())
}

/// Parses a `P5` file with maxval 65535 into `(width, height, samples)`.
pub fn read_pgm16(bytes: &[u8]) -> Result<(usize, usize, Vec<u16>), IoError> {
    let bad = |m: &str| IoError::BadPgm(m.into());
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields
            .push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("header is not ASCII"))?);
    }
    if fields[0] != "P5" {
        return Err(bad("magic is not P5"));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad("bad number in header"));
    let (w, h, maxval) = (num(fields[1])?, num(fields[2])?, num(fields[3])?);
    if maxval != 65535 {
        return Err(bad("maxval is not 65535"));
    }
    // exactly one whitespace byte separates the header from the samples
    let data = bytes.get(pos + 1..).ok_or_else(|| bad("missing samples"))?;
    if data.len() != 2 * w * h {
        return Err(bad("sample count does not match width and height"));
    }
    Ok((
        w,
        h,
        data.chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect(),
    ))
}
