//! Image file I/O: 8-bit PNG, binary PPM/PGM and the raw `FIRT` tensor dump.
//!
//! The raw dump is `b"FIRT"`, then a `u32` rank, one `u64` per dimension and
//! the `f32` payload, all little-endian. Images are written with rank 3
//! (`height, width, channels`); rank-2 dumps are read as single-channel.

use std::fs;
use std::path::Path;

use image::{DynamicImage, GrayImage, ImageFormat, RgbImage};

use super::Image;
use crate::error::{FireError, Result};

pub const TENSOR_MAGIC: &[u8; 4] = b"FIRT";

/// Serializes an image as `u32 rank, u64 dims..., f32 data` (little-endian).
pub fn encode_tensor(img: &Image) -> Vec<u8> {
    let (h, w, c) = img.shape();
    let mut out = Vec::with_capacity(4 + 3 * 8 + img.len() * 4);
    out.extend_from_slice(&3u32.to_le_bytes());
    for d in [h, w, c] {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for &v in img.data() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn decode_tensor(bytes: &[u8]) -> Result<Image> {
    let bad = |msg: &str| FireError::Format(format!("tensor payload: {msg}"));
    if bytes.len() < 4 {
        return Err(bad("truncated header"));
    }
    let rank = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
    if rank != 2 && rank != 3 {
        return Err(bad(&format!("unsupported rank {rank}")));
    }
    let header = 4 + rank * 8;
    if bytes.len() < header {
        return Err(bad("truncated dims"));
    }
    let dims: Vec<usize> = (0..rank)
        .map(|i| {
            let off = 4 + i * 8;
            u64::from_le_bytes(bytes[off..off + 8].try_into().unwrap()) as usize
        })
        .collect();
    let channels = if rank == 3 { dims[2] } else { 1 };
    let count = dims[0]
        .checked_mul(dims[1])
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| bad("dimension overflow"))?;
    if bytes.len() != header + count * 4 {
        return Err(bad(&format!(
            "expected {} data bytes, got {}",
            count * 4,
            bytes.len() - header
        )));
    }
    let data = bytes[header..]
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
        .collect();
    Image::from_vec(dims[0], dims[1], channels, data)
}

fn to_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Reads PNG, PPM/PGM (by extension) or a `.firt` tensor dump.
/// 8-bit inputs are scaled by 1/255.
pub fn read_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    if extension(path).as_deref() == Some("firt") {
        let bytes = fs::read(path)?;
        if bytes.len() < 4 || &bytes[..4] != TENSOR_MAGIC {
            return Err(FireError::Format(format!("{}: missing FIRT magic", path.display())));
        }
        return decode_tensor(&bytes[4..]);
    }
    let bytes = fs::read(path)?;
    let dynamic = image::load_from_memory(&bytes)
        .map_err(|e| FireError::Format(format!("{}: {e}", path.display())))?;
    Ok(from_dynamic(dynamic))
}

fn from_dynamic(dynamic: DynamicImage) -> Image {
    match dynamic {
        DynamicImage::ImageLuma8(g) => {
            let (w, h) = g.dimensions();
            let data = g.into_raw().into_iter().map(|v| v as f64 / 255.0).collect();
            Image::from_vec(h as usize, w as usize, 1, data).expect("luma buffer size")
        }
        other => {
            let rgb = other.into_rgb8();
            let (w, h) = rgb.dimensions();
            let data = rgb.into_raw().into_iter().map(|v| v as f64 / 255.0).collect();
            Image::from_vec(h as usize, w as usize, 3, data).expect("rgb buffer size")
        }
    }
}

/// Writes an image; the format follows the extension (`png`, `ppm`, `pgm`,
/// `firt`). Values are clamped to `[0, 1]` and rounded for 8-bit formats.
pub fn write_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let ext = extension(path);
    if ext.as_deref() == Some("firt") {
        let mut bytes = TENSOR_MAGIC.to_vec();
        bytes.extend(encode_tensor(img));
        fs::write(path, bytes)?;
        return Ok(());
    }
    let format = match ext.as_deref() {
        Some("png") => ImageFormat::Png,
        Some("ppm") | Some("pgm") | Some("pnm") => ImageFormat::Pnm,
        other => {
            return Err(FireError::Format(format!(
                "unsupported image extension {:?}",
                other.unwrap_or("")
            )))
        }
    };
    let (h, w, c) = img.shape();
    let raw: Vec<u8> = img.data().iter().map(|&v| to_u8(v)).collect();
    let dynamic = match (c, ext.as_deref()) {
        (1, Some("ppm")) => {
            let expanded = raw.iter().flat_map(|&v| [v, v, v]).collect();
            DynamicImage::ImageRgb8(RgbImage::from_raw(w as u32, h as u32, expanded).unwrap())
        }
        (1, _) => DynamicImage::ImageLuma8(GrayImage::from_raw(w as u32, h as u32, raw).unwrap()),
        (3, Some("pgm")) => DynamicImage::ImageRgb8(
            RgbImage::from_raw(w as u32, h as u32, raw).unwrap(),
        )
        .into_luma8()
        .into(),
        (3, _) => DynamicImage::ImageRgb8(RgbImage::from_raw(w as u32, h as u32, raw).unwrap()),
        _ => {
            return Err(FireError::Format(format!(
                "cannot write {c}-channel image as 8-bit"
            )))
        }
    };
    dynamic
        .save_with_format(path, format)
        .map_err(|e| FireError::Format(format!("{}: {e}", path.display())))
}

fn extension(path: &Path) -> Option<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
}
