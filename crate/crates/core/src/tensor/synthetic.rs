//! Procedural test scenes standing in for natural image crops.

use super::{Image, Rng};

/// A deterministic "natural-looking" scene: a smooth shaded background,
/// a few sharp-edged discs and rectangles, and a faint oriented texture.
pub fn scene(height: usize, width: usize, channels: usize, seed: u64) -> Image {
    let mut rng = Rng::new(seed).derive("scene");
    let hf = height as f64;
    let wf = width as f64;

    let base: Vec<f64> = (0..channels).map(|_| rng.uniform(0.35, 0.65)).collect();
    let tilt: Vec<f64> = (0..channels).map(|_| rng.uniform(-0.25, 0.25)).collect();

    struct Disc {
        cy: f64,
        cx: f64,
        r: f64,
        color: Vec<f64>,
    }
    struct Rect {
        y0: f64,
        x0: f64,
        y1: f64,
        x1: f64,
        color: Vec<f64>,
    }
    let discs: Vec<Disc> = (0..3)
        .map(|_| Disc {
            cy: rng.uniform(0.15, 0.85) * hf,
            cx: rng.uniform(0.15, 0.85) * wf,
            r: rng.uniform(0.08, 0.2) * hf.min(wf),
            color: (0..channels).map(|_| rng.uniform(0.1, 0.9)).collect(),
        })
        .collect();
    let rects: Vec<Rect> = (0..2)
        .map(|_| {
            let y0 = rng.uniform(0.05, 0.6) * hf;
            let x0 = rng.uniform(0.05, 0.6) * wf;
            Rect {
                y0,
                x0,
                y1: y0 + rng.uniform(0.15, 0.35) * hf,
                x1: x0 + rng.uniform(0.15, 0.35) * wf,
                color: (0..channels).map(|_| rng.uniform(0.1, 0.9)).collect(),
            }
        })
        .collect();
    let waves: Vec<(f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                rng.uniform(0.15, 0.6),
                rng.uniform(0.0, std::f64::consts::PI),
                rng.uniform(0.0, 2.0 * std::f64::consts::PI),
            )
        })
        .collect();

    Image::from_fn(height, width, channels, |i, j, c| {
        let y = i as f64;
        let x = j as f64;
        let mut v = base[c]
            + tilt[c] * (y / hf - 0.5)
            + 0.08 * (2.0 * std::f64::consts::PI * x / wf).cos() * (std::f64::consts::PI * y / hf).sin();
        for r in &rects {
            if y >= r.y0 && y < r.y1 && x >= r.x0 && x < r.x1 {
                v = 0.5 * v + 0.5 * r.color[c];
            }
        }
        for d in &discs {
            if (y - d.cy).powi(2) + (x - d.cx).powi(2) <= d.r * d.r {
                v = 0.25 * v + 0.75 * d.color[c];
            }
        }
        for &(freq, angle, phase) in &waves {
            v += 0.015 * (freq * (x * angle.cos() + y * angle.sin()) + phase).cos();
        }
        v.clamp(0.05, 0.95)
    })
}
