use std::fmt::Write as _;

use rustfft::num_complex::Complex64;

use crate::error::{invalid, FireError, Result};
use crate::fft::{fft2, ifft2_real};
use crate::tensor::Image;

/// A small 2-D filter. Its origin sits at `(rows / 2, cols / 2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    rows: usize,
    cols: usize,
    taps: Vec<f64>,
}

impl Kernel {
    pub fn new(rows: usize, cols: usize, taps: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || taps.len() != rows * cols {
            return Err(invalid(format!(
                "kernel of {rows}x{cols} needs {} taps, got {}",
                rows * cols,
                taps.len()
            )));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(invalid("kernel taps must be finite"));
        }
        Ok(Kernel { rows, cols, taps })
    }

    pub fn delta() -> Self {
        Kernel {
            rows: 1,
            cols: 1,
            taps: vec![1.0],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn at(&self, a: usize, b: usize) -> f64 {
        self.taps[a * self.cols + b]
    }

    fn offsets(&self) -> impl Iterator<Item = (isize, isize, f64)> + '_ {
        let (ca, cb) = ((self.rows / 2) as isize, (self.cols / 2) as isize);
        (0..self.rows).flat_map(move |a| {
            (0..self.cols).map(move |b| (a as isize - ca, b as isize - cb, self.at(a, b)))
        })
    }

    /// Parses rows of whitespace-separated reals; blank lines and `#`
    /// comments are skipped.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|e| FireError::Format(format!("kernel entry {t:?}: {e}")))
                })
                .collect::<Result<_>>()?;
            rows.push(row);
        }
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(FireError::Format("kernel rows have different lengths".into()));
        }
        let n = rows.len();
        Kernel::new(n, cols, rows.into_iter().flatten().collect())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for a in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|b| format!("{:e}", self.at(a, b))).collect();
            writeln!(out, "{}", row.join(" ")).unwrap();
        }
        out
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::parse_text(&std::fs::read_to_string(path)?)
    }

    /// Frequency response on a `height x width` periodic grid.
    pub fn transfer(&self, height: usize, width: usize) -> Vec<Complex64> {
        let mut embedded = vec![0.0; height * width];
        for (da, db, t) in self.offsets() {
            let i = da.rem_euclid(height as isize) as usize;
            let j = db.rem_euclid(width as isize) as usize;
            embedded[i * width + j] += t;
        }
        fft2(&embedded, height, width)
    }

    /// Periodic convolution by explicit summation.
    pub fn convolve_direct(&self, plane: &[f64], height: usize, width: usize) -> Vec<f64> {
        self.sum_shifted(plane, height, width, -1)
    }

    /// Periodic correlation (the adjoint of [`Kernel::convolve_direct`]).
    pub fn correlate_direct(&self, plane: &[f64], height: usize, width: usize) -> Vec<f64> {
        self.sum_shifted(plane, height, width, 1)
    }

    fn sum_shifted(&self, plane: &[f64], height: usize, width: usize, sign: isize) -> Vec<f64> {
        let (h, w) = (height as isize, width as isize);
        let mut out = vec![0.0; height * width];
        for (da, db, t) in self.offsets() {
            if t == 0.0 {
                continue;
            }
            for i in 0..h {
                let src_row = (i + sign * da).rem_euclid(h) * w;
                let dst_row = i * w;
                for j in 0..w {
                    let src = src_row + (j + sign * db).rem_euclid(w);
                    out[(dst_row + j) as usize] += t * plane[src as usize];
                }
            }
        }
        out
    }

    pub fn convolve_fft(&self, plane: &[f64], height: usize, width: usize) -> Vec<f64> {
        let k = self.transfer(height, width);
        let spec = fft2(plane, height, width)
            .into_iter()
            .zip(&k)
            .map(|(x, k)| x * k)
            .collect();
        ifft2_real(spec, height, width)
    }

    pub fn correlate_fft(&self, plane: &[f64], height: usize, width: usize) -> Vec<f64> {
        let k = self.transfer(height, width);
        let spec = fft2(plane, height, width)
            .into_iter()
            .zip(&k)
            .map(|(x, k)| x * k.conj())
            .collect();
        ifft2_real(spec, height, width)
    }

    fn prefers_fft(&self, height: usize, width: usize) -> bool {
        self.taps.len() > 49 && height * width > 256
    }

    pub fn convolve(&self, plane: &[f64], height: usize, width: usize) -> Vec<f64> {
        if self.prefers_fft(height, width) {
            self.convolve_fft(plane, height, width)
        } else {
            self.convolve_direct(plane, height, width)
        }
    }

    pub fn correlate(&self, plane: &[f64], height: usize, width: usize) -> Vec<f64> {
        if self.prefers_fft(height, width) {
            self.correlate_fft(plane, height, width)
        } else {
            self.correlate_direct(plane, height, width)
        }
    }
}

/// Odd support wide enough for a Gaussian of this width (`2 * ceil(3 sigma) + 1`).
pub fn default_kernel_size(sigma: f64) -> usize {
    2 * (3.0 * sigma).ceil().max(1.0) as usize + 1
}

/// Separable Gaussian sampled on a `size x size` grid, normalized to unit sum.
pub fn gaussian_kernel(sigma: f64, size: usize) -> Result<Kernel> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(invalid(format!("gaussian sigma must be positive, got {sigma}")));
    }
    if size == 0 || size.is_multiple_of(2) {
        return Err(invalid(format!("gaussian kernel size must be odd, got {size}")));
    }
    let half = (size / 2) as f64;
    let g: Vec<f64> = (0..size)
        .map(|i| {
            let d = i as f64 - half;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let mut taps = Vec::with_capacity(size * size);
    for a in &g {
        for b in &g {
            taps.push(a * b);
        }
    }
    let total: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= total);
    Kernel::new(size, size, taps)
}

/// Periodic Gaussian smoothing with a kernel of [`default_kernel_size`].
pub fn gaussian_smooth(img: &Image, sigma: f64) -> Result<Image> {
    let kernel = gaussian_kernel(sigma, default_kernel_size(sigma))?;
    let (h, w, _) = img.shape();
    img.map_planes(h, w, |p| Ok(kernel.convolve(p, h, w)))
}
