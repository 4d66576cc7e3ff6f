use rustfft::num_complex::Complex64;

use crate::degradations::Kernel;
use crate::error::{invalid, Result};
use crate::fft::{fft2, ifft2_real};
use crate::tensor::Image;

/// Unclamped Wiener filter `F^-1[conj(K) Y / (|K|^2 + 1/snr)]`.
pub fn wiener_filter(y: &Image, kernel: &Kernel, snr: f64) -> Result<Image> {
    if !(snr > 0.0) {
        return Err(invalid(format!("wiener snr must be positive, got {snr}")));
    }
    let (h, w, _) = y.shape();
    let k = kernel.transfer(h, w);
    let reg = 1.0 / snr;
    y.map_planes(h, w, |plane| {
        let spec: Vec<Complex64> = fft2(plane, h, w)
            .into_iter()
            .zip(&k)
            .map(|(yv, kv)| kv.conj() * yv / (kv.norm_sqr() + reg))
            .collect();
        Ok(ifft2_real(spec, h, w))
    })
}

/// Non-blind Wiener deconvolution, clamped to `[0, 1]`.
pub fn wiener_deconv(y: &Image, kernel: &Kernel, snr: f64) -> Result<Image> {
    Ok(wiener_filter(y, kernel, snr)?.clamp01())
}
