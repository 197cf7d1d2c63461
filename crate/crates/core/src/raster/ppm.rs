//! Binary portable pixmap output.

use std::io::Write;
use std::path::Path;

use super::{Label, Raster};
use crate::error::{Result, WadaError};

pub fn colour(label: Label) -> [u8; 3] {
    match label {
        Label::Island => [237, 201, 175],
        Label::Blue => [0, 0, 255],
        Label::Red => [220, 30, 30],
        Label::Green => [0, 150, 60],
    }
}

/// P6 image, top row first.
pub fn ppm_bytes(r: &Raster) -> Vec<u8> {
    let side = r.side as usize;
    let header = format!("P6\n{side} {side}\n255\n");
    let mut out = Vec::with_capacity(header.len() + 3 * side * side);
    out.extend_from_slice(header.as_bytes());
    let palette: Vec<[u8; 3]> = (0..=u8::MAX as usize).map(|d| colour(Label::of_day(d))).collect();
    for row in r.pixels.chunks(side).rev() {
        for p in row {
            out.extend_from_slice(&palette[*p as usize]);
        }
    }
    out
}

pub fn write_ppm(r: &Raster, path: &Path) -> Result<()> {
    let io = |source| WadaError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut file = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    file.write_all(&ppm_bytes(r)).map_err(io)?;
    file.flush().map_err(io)
}
