//! Total-variation denoising by Chambolle's dual projection.

use crate::tensor::Image;

/// Dual step; `1/8` is the largest step with guaranteed convergence.
const TAU: f64 = 0.125;

fn gradient(u: &[f64], h: usize, w: usize, gx: &mut [f64], gy: &mut [f64]) {
    for i in 0..h {
        for j in 0..w {
            let p = i * w + j;
            gx[p] = if j + 1 < w { u[p + 1] - u[p] } else { 0.0 };
            gy[p] = if i + 1 < h { u[p + w] - u[p] } else { 0.0 };
        }
    }
}

/// Negative adjoint of [`gradient`].
fn divergence(px: &[f64], py: &[f64], h: usize, w: usize, out: &mut [f64]) {
    for i in 0..h {
        for j in 0..w {
            let p = i * w + j;
            let dx = if j + 1 < w { px[p] } else { 0.0 } - if j > 0 { px[p - 1] } else { 0.0 };
            let dy = if i + 1 < h { py[p] } else { 0.0 } - if i > 0 { py[p - w] } else { 0.0 };
            out[p] = dx + dy;
        }
    }
}

/// `argmin_x 1/2 ||x - y||^2 + strength * TV(x)` on one plane, unclamped.
pub fn tv_prox_plane(y: &[f64], h: usize, w: usize, strength: f64, iters: usize) -> Vec<f64> {
    if strength <= 0.0 {
        return y.to_vec();
    }
    let n = h * w;
    let mut px = vec![0.0; n];
    let mut py = vec![0.0; n];
    let mut div = vec![0.0; n];
    let mut arg = vec![0.0; n];
    let mut gx = vec![0.0; n];
    let mut gy = vec![0.0; n];
    for _ in 0..iters {
        divergence(&px, &py, h, w, &mut div);
        for p in 0..n {
            arg[p] = div[p] - y[p] / strength;
        }
        gradient(&arg, h, w, &mut gx, &mut gy);
        for p in 0..n {
            let norm = (gx[p] * gx[p] + gy[p] * gy[p]).sqrt();
            let denom = 1.0 + TAU * norm;
            px[p] = (px[p] + TAU * gx[p]) / denom;
            py[p] = (py[p] + TAU * gy[p]) / denom;
        }
    }
    divergence(&px, &py, h, w, &mut div);
    y.iter().zip(&div).map(|(v, d)| v - strength * d).collect()
}

/// Per-channel isotropic TV denoising, clamped to `[0, 1]`.
pub fn tv_denoise(y: &Image, strength: f64, inner_iters: usize) -> Image {
    if strength <= 0.0 {
        return y.clamp01();
    }
    let (h, w, _) = y.shape();
    y.map_planes(h, w, |p| Ok(tv_prox_plane(p, h, w, strength, inner_iters)))
        .expect("tv planes")
        .clamp01()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_strength_is_identity() {
        let y = Image::from_fn(6, 6, 1, |i, j, _| ((i * 7 + j * 3) % 10) as f64 / 10.0);
        assert_eq!(tv_denoise(&y, 0.0, 50), y);
    }

    #[test]
    fn constant_is_fixed() {
        let y = Image::filled(8, 8, 3, 0.37);
        let out = tv_denoise(&y, 0.5, 100);
        assert!(out.sub(&y).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn gradient_divergence_are_adjoint() {
        let (h, w) = (5, 7);
        let u: Vec<f64> = (0..h * w).map(|i| (i as f64 * 0.31).sin()).collect();
        let px: Vec<f64> = (0..h * w).map(|i| (i as f64 * 0.17).cos()).collect();
        let py: Vec<f64> = (0..h * w).map(|i| (i as f64 * 0.53).sin()).collect();
        let mut gx = vec![0.0; h * w];
        let mut gy = vec![0.0; h * w];
        gradient(&u, h, w, &mut gx, &mut gy);
        let mut div = vec![0.0; h * w];
        divergence(&px, &py, h, w, &mut div);
        let lhs: f64 = (0..h * w).map(|p| gx[p] * px[p] + gy[p] * py[p]).sum();
        let rhs: f64 = -(0..h * w).map(|p| u[p] * div[p]).sum::<f64>();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn step_shrinks_like_long_run() {
        let step = Image::from_fn(8, 8, 1, |_, j, _| if j < 4 { 0.3 } else { 0.7 });
        let amplitude = |img: &Image| img.get(0, 7, 0) - img.get(0, 0, 0);
        let short = tv_denoise(&step, 0.05, 200);
        let long = tv_denoise(&step, 0.05, 2000);
        assert!(amplitude(&short) < 0.4);
        assert!((amplitude(&short) - amplitude(&long)).abs() < 1e-4);
        // Two flat regions of area 32 sharing an edge of length 8 each move
        // by strength * 8 / 32 towards one another.
        assert!((amplitude(&long) - (0.4 - 0.05 / 2.0)).abs() < 1e-4);
    }
}
