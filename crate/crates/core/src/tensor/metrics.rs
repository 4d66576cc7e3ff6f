//! Reference-based quality metrics.

use super::Image;
use crate::error::{invalid, Result};

/// PSNR reported for identical images, in place of +inf.
pub const PSNR_IDENTICAL_DB: f64 = 100.0;

pub fn mse(x: &Image, reference: &Image) -> Result<f64> {
    x.ensure_same_shape(reference)?;
    if x.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = x
        .data()
        .iter()
        .zip(reference.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / x.len() as f64)
}

/// Peak signal-to-noise ratio in decibels. Identical inputs score
/// [`PSNR_IDENTICAL_DB`].
pub fn psnr(x: &Image, reference: &Image, peak: f64) -> Result<f64> {
    if !(peak > 0.0) {
        return Err(invalid(format!("psnr peak must be positive, got {peak}")));
    }
    let err = mse(x, reference)?;
    if err == 0.0 {
        return Ok(PSNR_IDENTICAL_DB);
    }
    Ok(10.0 * (peak * peak / err).log10())
}

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;

fn ssim_window() -> Vec<f64> {
    let half = (SSIM_WINDOW / 2) as f64;
    let g: Vec<f64> = (0..SSIM_WINDOW)
        .map(|i| {
            let d = i as f64 - half;
            (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp()
        })
        .collect();
    let total: f64 = g.iter().sum();
    let g: Vec<f64> = g.iter().map(|v| v / total).collect();
    let mut w = Vec::with_capacity(SSIM_WINDOW * SSIM_WINDOW);
    for a in &g {
        for b in &g {
            w.push(a * b);
        }
    }
    w
}

/// Single-scale SSIM with an 11x11 Gaussian window (sigma 1.5), averaged
/// over valid window positions and channels. Peak is 1.
pub fn ssim(x: &Image, reference: &Image) -> Result<f64> {
    ssim_with_peak(x, reference, 1.0)
}

pub fn ssim_with_peak(x: &Image, reference: &Image, peak: f64) -> Result<f64> {
    x.ensure_same_shape(reference)?;
    let (h, w, channels) = x.shape();
    if h < SSIM_WINDOW || w < SSIM_WINDOW {
        return Err(invalid(format!(
            "ssim needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels, got {h}x{w}"
        )));
    }
    let c1 = (0.01 * peak).powi(2);
    let c2 = (0.03 * peak).powi(2);
    let window = ssim_window();
    let rows = h - SSIM_WINDOW + 1;
    let cols = w - SSIM_WINDOW + 1;

    let mut total = 0.0;
    for c in 0..channels {
        let a = x.plane(c);
        let b = reference.plane(c);
        for i in 0..rows {
            for j in 0..cols {
                let (mut ma, mut mb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
                for u in 0..SSIM_WINDOW {
                    let row = (i + u) * w + j;
                    for v in 0..SSIM_WINDOW {
                        let wt = window[u * SSIM_WINDOW + v];
                        let pa = a[row + v];
                        let pb = b[row + v];
                        ma += wt * pa;
                        mb += wt * pb;
                        saa += wt * pa * pa;
                        sbb += wt * pb * pb;
                        sab += wt * pa * pb;
                    }
                }
                let va = saa - ma * ma;
                let vb = sbb - mb * mb;
                let cov = sab - ma * mb;
                total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
                    / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            }
        }
    }
    Ok(total / (rows * cols * channels) as f64)
}
