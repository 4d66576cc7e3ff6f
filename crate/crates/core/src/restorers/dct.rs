//! Global DCT soft-thresholding denoiser.

use crate::tensor::Image;

/// Orthonormal DCT-II matrix of order `n` (rows are basis vectors).
fn dct_basis(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    let nf = n as f64;
    for k in 0..n {
        let scale = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
        for i in 0..n {
            m[k * n + i] =
                scale * (std::f64::consts::PI * (2 * i + 1) as f64 * k as f64 / (2.0 * nf)).cos();
        }
    }
    m
}

/// Forward (`inverse = false`) or inverse 2-D orthonormal DCT of a plane.
pub fn dct2(plane: &[f64], h: usize, w: usize, inverse: bool) -> Vec<f64> {
    let bh = dct_basis(h);
    let bw = dct_basis(w);
    // rows
    let mut tmp = vec![0.0; h * w];
    for i in 0..h {
        for k in 0..w {
            tmp[i * w + k] = (0..w)
                .map(|j| {
                    let b = if inverse { bw[j * w + k] } else { bw[k * w + j] };
                    b * plane[i * w + j]
                })
                .sum();
        }
    }
    let mut out = vec![0.0; h * w];
    for k in 0..h {
        for j in 0..w {
            out[k * w + j] = (0..h)
                .map(|i| {
                    let b = if inverse { bh[i * h + k] } else { bh[k * h + i] };
                    b * tmp[i * w + j]
                })
                .sum();
        }
    }
    out
}

fn soft(v: f64, t: f64) -> f64 {
    v.signum() * (v.abs() - t).max(0.0)
}

/// Soft-thresholds every non-DC coefficient of the global DCT, per channel.
/// The result is clamped to `[0, 1]`.
pub fn dct_threshold(y: &Image, threshold: f64) -> Image {
    let (h, w, _) = y.shape();
    y.map_planes(h, w, |plane| {
        let mut coef = dct2(plane, h, w, false);
        for c in coef.iter_mut().skip(1) {
            *c = soft(*c, threshold);
        }
        Ok(dct2(&coef, h, w, true))
    })
    .expect("dct planes")
    .clamp01()
}
