//! Block-DCT quantization surrogate for JPEG compression.
//!
//! Each channel is coded independently with the luminance table: 8x8 DCT-II
//! on `255 x - 128`, division by the quality-scaled table, rounding, and the
//! inverse path. No chroma subsampling and no entropy coding.

use crate::error::{invalid, Result};
use crate::tensor::Image;

pub const LUMA_QUANT: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
];

/// Luminance table scaled by the usual IJG quality law, entries in `[1, 255]`.
pub fn quant_table(quality: u8) -> Result<[f64; 64]> {
    if !(1..=100).contains(&quality) {
        return Err(invalid(format!("jpeg quality must be in [1, 100], got {quality}")));
    }
    let q = quality as u32;
    let scale = if q < 50 { 5000 / q } else { 200 - 2 * q };
    let mut table = [0.0; 64];
    for (dst, &base) in table.iter_mut().zip(LUMA_QUANT.iter()) {
        let v = (base as u32 * scale + 50) / 100;
        *dst = v.clamp(1, 255) as f64;
    }
    Ok(table)
}

fn dct_matrix() -> [[f64; 8]; 8] {
    let mut m = [[0.0; 8]; 8];
    for (u, row) in m.iter_mut().enumerate() {
        let c = if u == 0 { (1.0f64 / 8.0).sqrt() } else { 0.5 };
        for (x, v) in row.iter_mut().enumerate() {
            *v = c * (((2 * x + 1) as f64) * u as f64 * std::f64::consts::PI / 16.0).cos();
        }
    }
    m
}

fn quantize_block(block: &mut [f64; 64], basis: &[[f64; 8]; 8], table: &[f64; 64]) {
    let mut tmp = [0.0; 64];
    // rows: tmp = B * block^T-ish via separable passes
    for y in 0..8 {
        for u in 0..8 {
            tmp[y * 8 + u] = (0..8).map(|x| basis[u][x] * block[y * 8 + x]).sum();
        }
    }
    let mut coef = [0.0; 64];
    for v in 0..8 {
        for u in 0..8 {
            coef[v * 8 + u] = (0..8).map(|y| basis[v][y] * tmp[y * 8 + u]).sum();
        }
    }
    for (c, q) in coef.iter_mut().zip(table) {
        *c = (*c / q).round() * q;
    }
    for y in 0..8 {
        for u in 0..8 {
            tmp[y * 8 + u] = (0..8).map(|v| basis[v][y] * coef[v * 8 + u]).sum();
        }
    }
    for y in 0..8 {
        for x in 0..8 {
            block[y * 8 + x] = (0..8).map(|u| basis[u][x] * tmp[y * 8 + u]).sum();
        }
    }
}

/// Runs the quantization round trip. Sizes that are not multiples of 8 are
/// edge-padded internally and cropped back.
pub fn jpeg_surrogate(x: &Image, quality: u8) -> Result<Image> {
    let table = quant_table(quality)?;
    let basis = dct_matrix();
    let (h, w, _) = x.shape();
    let ph = h.div_ceil(8) * 8;
    let pw = w.div_ceil(8) * 8;
    x.map_planes(h, w, |plane| {
        let mut out = vec![0.0; h * w];
        let mut block = [0.0; 64];
        for by in (0..ph).step_by(8) {
            for bx in (0..pw).step_by(8) {
                for y in 0..8 {
                    let sy = (by + y).min(h - 1);
                    for xx in 0..8 {
                        let sx = (bx + xx).min(w - 1);
                        block[y * 8 + xx] = plane[sy * w + sx] * 255.0 - 128.0;
                    }
                }
                quantize_block(&mut block, &basis, &table);
                for y in 0..8 {
                    for xx in 0..8 {
                        let (ty, tx) = (by + y, bx + xx);
                        if ty < h && tx < w {
                            out[ty * w + tx] = ((block[y * 8 + xx] + 128.0) / 255.0).clamp(0.0, 1.0);
                        }
                    }
                }
            }
        }
        Ok(out)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Rng;

    #[test]
    fn quality_law() {
        assert!(quant_table(100).unwrap().iter().all(|&q| q == 1.0));
        let q50 = quant_table(50).unwrap();
        assert_eq!(q50[0], 16.0);
        assert_eq!(q50[63], 99.0);
        let q20 = quant_table(20).unwrap();
        // scale 250: (16 * 250 + 50) / 100 = 40
        assert_eq!(q20[0], 40.0);
        assert_eq!(quant_table(1).unwrap()[0], 255.0);
        assert!(quant_table(0).is_err());
        assert!(quant_table(101).is_err());
    }

    #[test]
    fn quality_100_is_nearly_lossless() {
        let mut rng = Rng::new(3);
        let x = Image::from_fn(16, 24, 3, |_, _, _| rng.uniform(0.0, 1.0));
        let y = jpeg_surrogate(&x, 100).unwrap();
        assert!(y.sub(&x).unwrap().max_abs() <= 2.0 / 255.0);
    }

    #[test]
    fn constant_image_follows_scalar_dc_round_trip() {
        for quality in [5u8, 20, 50, 75, 100] {
            let x = Image::filled(8, 16, 1, 0.5);
            let y = jpeg_surrogate(&x, quality).unwrap();
            // DC coefficient of a constant block = 8 * (255 * 0.5 - 128)
            let q = quant_table(quality).unwrap()[0];
            let dc = 8.0 * (255.0 * 0.5 - 128.0);
            let expected = ((dc / q).round() * q / 8.0 + 128.0) / 255.0;
            for v in y.data() {
                assert!((v - expected).abs() < 1e-12, "q={quality}: {v} vs {expected}");
            }
            let twice = jpeg_surrogate(&y, quality).unwrap();
            assert_eq!(twice, y);
        }
    }

    /// Per-block textbook formula with explicit cosine sums.
    fn literal(x: &Image, quality: u8) -> Image {
        let table = quant_table(quality).unwrap();
        let c = |u: usize| if u == 0 { 1.0 / 2f64.sqrt() } else { 1.0 };
        let pi = std::f64::consts::PI;
        let mut out = x.clone();
        for by in (0..x.height()).step_by(8) {
            for bx in (0..x.width()).step_by(8) {
                let mut f = [[0.0; 8]; 8];
                for (v, row) in f.iter_mut().enumerate() {
                    for (u, coef) in row.iter_mut().enumerate() {
                        let mut s = 0.0;
                        for yy in 0..8 {
                            for xx in 0..8 {
                                let p = 255.0 * x.get(by + yy, bx + xx, 0) - 128.0;
                                s += p
                                    * (((2 * xx + 1) * u) as f64 * pi / 16.0).cos()
                                    * (((2 * yy + 1) * v) as f64 * pi / 16.0).cos();
                            }
                        }
                        let s = 0.25 * c(u) * c(v) * s;
                        let q = table[v * 8 + u];
                        *coef = (s / q).round() * q;
                    }
                }
                for yy in 0..8 {
                    for xx in 0..8 {
                        let mut s = 0.0;
                        for (v, row) in f.iter().enumerate() {
                            for (u, coef) in row.iter().enumerate() {
                                s += c(u) * c(v) * coef
                                    * (((2 * xx + 1) * u) as f64 * pi / 16.0).cos()
                                    * (((2 * yy + 1) * v) as f64 * pi / 16.0).cos();
                            }
                        }
                        let val = ((0.25 * s + 128.0) / 255.0).clamp(0.0, 1.0);
                        out.set(by + yy, bx + xx, 0, val);
                    }
                }
            }
        }
        out
    }

    #[test]
    fn quality_20_matches_literal_formula() {
        let mut rng = Rng::new(20);
        let x = Image::from_fn(16, 16, 1, |_, _, _| rng.uniform(0.0, 1.0));
        let got = jpeg_surrogate(&x, 20).unwrap();
        let want = literal(&x, 20);
        assert!(got.sub(&want).unwrap().max_abs() < 1e-9);
    }

    #[test]
    fn odd_sizes_are_padded_and_cropped() {
        let mut rng = Rng::new(1);
        let x = Image::from_fn(11, 5, 1, |_, _, _| rng.uniform(0.0, 1.0));
        let y = jpeg_surrogate(&x, 60).unwrap();
        assert_eq!(y.shape(), x.shape());
        assert!(y.data().iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
