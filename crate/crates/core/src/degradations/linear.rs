use std::fmt;
use std::sync::Arc;

use super::kernel::{default_kernel_size, gaussian_kernel, Kernel};
use crate::error::{invalid, FireError, Result};
use crate::tensor::{io, Image};

/// Binary observation map; `true` marks an observed pixel. Applies to every
/// channel of the pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    height: usize,
    width: usize,
    observed: Vec<bool>,
}

impl Mask {
    pub fn new(height: usize, width: usize, observed: Vec<bool>) -> Result<Self> {
        if observed.len() != height * width {
            return Err(invalid("mask length does not match its dimensions"));
        }
        Ok(Mask {
            height,
            width,
            observed,
        })
    }

    pub fn full(height: usize, width: usize) -> Self {
        Mask {
            height,
            width,
            observed: vec![true; height * width],
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn observed(&self) -> &[bool] {
        &self.observed
    }

    #[inline]
    pub fn is_observed(&self, row: usize, col: usize) -> bool {
        self.observed[row * self.width + col]
    }

    pub fn observed_count(&self) -> usize {
        self.observed.iter().filter(|&&o| o).count()
    }

    /// Loads a PGM/PNG mask; gray values above 127 are observed.
    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let img = io::read_image(path)?;
        let (h, w, c) = img.shape();
        let observed = (0..h * w)
            .map(|p| img.data()[p * c] * 255.0 > 127.0)
            .collect();
        Mask::new(h, w, observed)
    }

    pub fn to_image(&self) -> Image {
        Image::from_fn(self.height, self.width, 1, |i, j, _| {
            if self.is_observed(i, j) {
                1.0
            } else {
                0.0
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Identity,
    Convolution,
    Decimation,
    Mask,
    Composition,
    Jpeg,
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            OpKind::Identity => "identity",
            OpKind::Convolution => "convolution",
            OpKind::Decimation => "decimation",
            OpKind::Mask => "mask",
            OpKind::Composition => "composition",
            OpKind::Jpeg => "jpeg",
        };
        f.write_str(s)
    }
}

/// Linear forward operators with periodic boundaries.
#[derive(Debug, Clone, PartialEq)]
pub enum LinearOp {
    Identity,
    /// Periodic convolution.
    Convolution(Arc<Kernel>),
    /// Anti-alias filtering followed by keeping every `factor`-th sample.
    Decimation { factor: usize, kernel: Arc<Kernel> },
    Mask(Arc<Mask>),
    /// Applied left to right: `ops[0]` acts first.
    Composition(Vec<LinearOp>),
}

impl LinearOp {
    pub fn convolution(kernel: Kernel) -> Self {
        LinearOp::Convolution(Arc::new(kernel))
    }

    pub fn gaussian_blur(sigma: f64) -> Result<Self> {
        Ok(Self::convolution(gaussian_kernel(sigma, default_kernel_size(sigma))?))
    }

    /// Decimation with the default anti-alias Gaussian (sigma = factor / 2).
    pub fn decimation(factor: usize) -> Result<Self> {
        if factor < 1 {
            return Err(invalid("decimation factor must be at least 1"));
        }
        let sigma = 0.5 * factor as f64;
        Ok(LinearOp::Decimation {
            factor,
            kernel: Arc::new(gaussian_kernel(sigma, default_kernel_size(sigma))?),
        })
    }

    pub fn mask(mask: Mask) -> Self {
        LinearOp::Mask(Arc::new(mask))
    }

    pub fn kind(&self) -> OpKind {
        match self {
            LinearOp::Identity => OpKind::Identity,
            LinearOp::Convolution(_) => OpKind::Convolution,
            LinearOp::Decimation { .. } => OpKind::Decimation,
            LinearOp::Mask(_) => OpKind::Mask,
            LinearOp::Composition(_) => OpKind::Composition,
        }
    }

    /// Spatial size of `A x` for an input of `height x width`.
    pub fn output_dims(&self, height: usize, width: usize) -> Result<(usize, usize)> {
        match self {
            LinearOp::Identity | LinearOp::Convolution(_) => Ok((height, width)),
            LinearOp::Decimation { factor, .. } => {
                if !height.is_multiple_of(*factor) || !width.is_multiple_of(*factor) {
                    return Err(invalid(format!(
                        "{height}x{width} is not divisible by decimation factor {factor}"
                    )));
                }
                Ok((height / factor, width / factor))
            }
            LinearOp::Mask(m) => {
                if (m.height, m.width) != (height, width) {
                    return Err(FireError::ShapeMismatch {
                        expected: (m.height, m.width, 0),
                        got: (height, width, 0),
                    });
                }
                Ok((height, width))
            }
            LinearOp::Composition(ops) => ops
                .iter()
                .try_fold((height, width), |(h, w), op| op.output_dims(h, w)),
        }
    }

    /// Spatial size of the operator's domain given its range size.
    pub fn input_dims(&self, height: usize, width: usize) -> (usize, usize) {
        match self {
            LinearOp::Decimation { factor, .. } => (height * factor, width * factor),
            LinearOp::Composition(ops) => ops
                .iter()
                .rev()
                .fold((height, width), |(h, w), op| op.input_dims(h, w)),
            _ => (height, width),
        }
    }

    pub fn apply(&self, x: &Image) -> Result<Image> {
        let (h, w, _) = x.shape();
        let (oh, ow) = self.output_dims(h, w)?;
        match self {
            LinearOp::Identity => Ok(x.clone()),
            LinearOp::Convolution(k) => x.map_planes(h, w, |p| Ok(k.convolve(p, h, w))),
            LinearOp::Decimation { factor, kernel } => x.map_planes(oh, ow, |p| {
                let blurred = kernel.convolve(p, h, w);
                Ok(subsample(&blurred, w, oh, ow, *factor))
            }),
            LinearOp::Mask(m) => Ok(apply_mask(m, x)),
            LinearOp::Composition(ops) => {
                let mut cur = x.clone();
                for op in ops {
                    cur = op.apply(&cur)?;
                }
                Ok(cur)
            }
        }
    }

    /// Adjoint `A^T y`; `y` lives in the operator's range.
    pub fn adjoint(&self, y: &Image) -> Result<Image> {
        let (h, w, _) = y.shape();
        match self {
            LinearOp::Identity => Ok(y.clone()),
            LinearOp::Convolution(k) => y.map_planes(h, w, |p| Ok(k.correlate(p, h, w))),
            LinearOp::Decimation { factor, kernel } => {
                let (ih, iw) = (h * factor, w * factor);
                y.map_planes(ih, iw, |p| {
                    let filled = zero_fill(p, h, w, *factor);
                    Ok(kernel.correlate(&filled, ih, iw))
                })
            }
            LinearOp::Mask(m) => {
                if (m.height, m.width) != (h, w) {
                    return Err(FireError::ShapeMismatch {
                        expected: (m.height, m.width, y.channels()),
                        got: y.shape(),
                    });
                }
                Ok(apply_mask(m, y))
            }
            LinearOp::Composition(ops) => {
                let mut cur = y.clone();
                for op in ops.iter().rev() {
                    cur = op.adjoint(&cur)?;
                }
                Ok(cur)
            }
        }
    }
}

fn apply_mask(m: &Mask, x: &Image) -> Image {
    let c = x.channels();
    let mut out = x.clone();
    for (p, &obs) in m.observed.iter().enumerate() {
        if !obs {
            out.data_mut()[p * c..(p + 1) * c].fill(0.0);
        }
    }
    out
}

pub(crate) fn subsample(plane: &[f64], width: usize, oh: usize, ow: usize, factor: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(oh * ow);
    for i in 0..oh {
        for j in 0..ow {
            out.push(plane[i * factor * width + j * factor]);
        }
    }
    out
}

/// Places `plane` on every `factor`-th sample of a larger zero plane.
pub(crate) fn zero_fill(plane: &[f64], h: usize, w: usize, factor: usize) -> Vec<f64> {
    let iw = w * factor;
    let mut out = vec![0.0; h * factor * iw];
    for i in 0..h {
        for j in 0..w {
            out[i * factor * iw + j * factor] = plane[i * w + j];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Rng;

    fn random(h: usize, w: usize, c: usize, rng: &mut Rng) -> Image {
        Image::from_fn(h, w, c, |_, _, _| rng.normal())
    }

    fn adjoint_gap(op: &LinearOp, h: usize, w: usize, c: usize, rng: &mut Rng) -> f64 {
        let x = random(h, w, c, rng);
        let ax = op.apply(&x).unwrap();
        let y = random(ax.height(), ax.width(), c, rng);
        let aty = op.adjoint(&y).unwrap();
        let lhs = ax.dot(&y).unwrap();
        let rhs = x.dot(&aty).unwrap();
        (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1e-300)
    }

    #[test]
    fn adjoint_test_every_linear_kind() {
        let mut rng = Rng::new(99);
        let mut mask_rng = Rng::new(5);
        let mask = Mask::new(12, 12, (0..144).map(|_| mask_rng.bernoulli(0.7)).collect()).unwrap();
        let skew = Kernel::new(3, 5, (0..15).map(|i| (i as f64 * 0.7).sin()).collect()).unwrap();
        let ops = vec![
            LinearOp::Identity,
            LinearOp::gaussian_blur(1.3).unwrap(),
            LinearOp::convolution(skew),
            LinearOp::decimation(2).unwrap(),
            LinearOp::decimation(3).unwrap(),
            LinearOp::mask(mask.clone()),
            LinearOp::Composition(vec![
                LinearOp::gaussian_blur(0.7).unwrap(),
                LinearOp::mask(mask),
            ]),
        ];
        for op in &ops {
            for _ in 0..20 {
                let gap = adjoint_gap(op, 12, 12, 3, &mut rng);
                assert!(gap < 1e-8, "{:?}: {gap}", op.kind());
            }
        }
    }

    #[test]
    fn mask_is_self_adjoint_and_full_mask_is_identity() {
        let mut rng = Rng::new(1);
        let x = random(4, 4, 2, &mut rng);
        let full = LinearOp::mask(Mask::full(4, 4));
        assert_eq!(full.apply(&x).unwrap(), x);
        let m = LinearOp::mask(Mask::new(4, 4, (0..16).map(|i| i % 3 != 0).collect()).unwrap());
        assert_eq!(m.apply(&x).unwrap(), m.adjoint(&x).unwrap());
    }

    #[test]
    fn decimation_shapes() {
        let op = LinearOp::decimation(2).unwrap();
        assert_eq!(op.output_dims(8, 6).unwrap(), (4, 3));
        assert!(op.output_dims(7, 6).is_err());
        assert_eq!(op.input_dims(4, 3), (8, 6));
        let y = Image::zeros(4, 3, 1);
        assert_eq!(op.adjoint(&y).unwrap().shape(), (8, 6, 1));
    }

    #[test]
    fn convolution_matches_nested_loops() {
        let mut rng = Rng::new(17);
        let x = Image::from_fn(6, 6, 1, |_, _, _| rng.uniform(0.0, 1.0));
        let taps: Vec<f64> = (0..9).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let k = Kernel::new(3, 3, taps.clone()).unwrap();
        let got = LinearOp::convolution(k).apply(&x).unwrap();
        for i in 0..6i64 {
            for j in 0..6i64 {
                let mut acc = 0.0;
                for a in 0..3i64 {
                    for b in 0..3i64 {
                        let si = (i - (a - 1)).rem_euclid(6) as usize;
                        let sj = (j - (b - 1)).rem_euclid(6) as usize;
                        acc += taps[(a * 3 + b) as usize] * x.get(si, sj, 0);
                    }
                }
                assert!((got.get(i as usize, j as usize, 0) - acc).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn transfer_magnitude_matches_action() {
        // A cosine at frequency (u, v) is scaled by |K(u, v)| for a symmetric kernel.
        let k = gaussian_kernel(1.2, 7).unwrap();
        let (h, w) = (16, 16);
        let transfer = k.transfer(h, w);
        let (u, v) = (3usize, 5usize);
        let x = Image::from_fn(h, w, 1, |i, j, _| {
            (2.0 * std::f64::consts::PI * (u as f64 * i as f64 / h as f64 + v as f64 * j as f64 / w as f64)).cos()
        });
        let y = LinearOp::convolution(k).apply(&x).unwrap();
        let gain = transfer[u * w + v].norm();
        for (a, b) in y.data().iter().zip(x.data()) {
            assert!((a - gain * b).abs() < 1e-8);
        }
    }
}
