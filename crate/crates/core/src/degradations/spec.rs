use serde::{Deserialize, Serialize};

use super::jpeg::jpeg_surrogate;
use super::kernel::{default_kernel_size, gaussian_kernel};
use super::linear::{LinearOp, Mask, OpKind};
use crate::error::{invalid, FireError, Result};
use crate::tensor::{Image, Rng};

/// Closed interval sampled uniformly; `lo == hi` always yields `lo`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub fn new(lo: f64, hi: f64) -> Self {
        Range { lo, hi }
    }

    pub fn fixed(v: f64) -> Self {
        Range { lo: v, hi: v }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    fn check(&self, what: &str) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite()) {
            return Err(invalid(format!("{what} range must be finite")));
        }
        if self.lo > self.hi {
            return Err(invalid(format!("empty {what} range [{}, {}]", self.lo, self.hi)));
        }
        Ok(())
    }

    fn check_sigma(&self) -> Result<()> {
        self.check("noise sigma")?;
        if self.lo < 0.0 {
            return Err(invalid("noise sigma range must be non-negative"));
        }
        Ok(())
    }

    fn sample(&self, rng: &mut Rng) -> f64 {
        rng.uniform(self.lo, self.hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MaskSource {
    /// Each pixel is dropped with a probability drawn from `drop`.
    Random { drop: Range },
    Fixed(Mask),
}

/// A distribution over `(H, w)` pairs: the class of degradations a restorer
/// was built for.
#[derive(Debug, Clone, PartialEq)]
pub enum DegradationSpec {
    AdditiveNoise { sigma: Range },
    Blur { kernel_sigma: Range, sigma: Range },
    Decimation { factor: usize, sigma: Range },
    Mask { source: MaskSource, sigma: Range },
    JpegSurrogate { quality: (u8, u8), sigma: Range },
    Fixed { op: LinearOp, sigma: f64 },
}

impl DegradationSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            DegradationSpec::AdditiveNoise { sigma } => sigma.check_sigma(),
            DegradationSpec::Blur {
                kernel_sigma,
                sigma,
            } => {
                kernel_sigma.check("blur width")?;
                if kernel_sigma.lo <= 0.0 {
                    return Err(invalid("blur width range must be positive"));
                }
                sigma.check_sigma()
            }
            DegradationSpec::Decimation { factor, sigma } => {
                if *factor < 2 {
                    return Err(invalid("decimation factor must be at least 2"));
                }
                sigma.check_sigma()
            }
            DegradationSpec::Mask { source, sigma } => {
                if let MaskSource::Random { drop } = source {
                    drop.check("mask drop probability")?;
                    if drop.lo < 0.0 || drop.hi > 1.0 {
                        return Err(invalid("mask drop probability must lie in [0, 1]"));
                    }
                }
                sigma.check_sigma()
            }
            DegradationSpec::JpegSurrogate { quality, sigma } => {
                let (lo, hi) = *quality;
                if lo > hi {
                    return Err(invalid(format!("empty jpeg quality range [{lo}, {hi}]")));
                }
                if lo < 1 || hi > 100 {
                    return Err(invalid("jpeg quality must lie in [1, 100]"));
                }
                sigma.check_sigma()
            }
            DegradationSpec::Fixed { sigma, .. } => {
                if !(*sigma >= 0.0) {
                    return Err(invalid("noise sigma must be non-negative"));
                }
                Ok(())
            }
        }
    }

    /// Kind of operator every sample of this spec carries.
    pub fn op_kind(&self) -> OpKind {
        match self {
            DegradationSpec::AdditiveNoise { .. } => OpKind::Identity,
            DegradationSpec::Blur { .. } => OpKind::Convolution,
            DegradationSpec::Decimation { .. } => OpKind::Decimation,
            DegradationSpec::Mask { .. } => OpKind::Mask,
            DegradationSpec::JpegSurrogate { .. } => OpKind::Jpeg,
            DegradationSpec::Fixed { op, .. } => op.kind(),
        }
    }

    pub fn noise_range(&self) -> Range {
        match self {
            DegradationSpec::AdditiveNoise { sigma }
            | DegradationSpec::Blur { sigma, .. }
            | DegradationSpec::Decimation { sigma, .. }
            | DegradationSpec::Mask { sigma, .. }
            | DegradationSpec::JpegSurrogate { sigma, .. } => *sigma,
            DegradationSpec::Fixed { sigma, .. } => Range::fixed(*sigma),
        }
    }

    /// Same family with the noise range replaced.
    pub fn with_noise(&self, range: Range) -> DegradationSpec {
        let mut out = self.clone();
        match &mut out {
            DegradationSpec::AdditiveNoise { sigma }
            | DegradationSpec::Blur { sigma, .. }
            | DegradationSpec::Decimation { sigma, .. }
            | DegradationSpec::Mask { sigma, .. }
            | DegradationSpec::JpegSurrogate { sigma, .. } => *sigma = range,
            DegradationSpec::Fixed { sigma, .. } => *sigma = range.lo,
        }
        out
    }

    /// Same spec with the blur width replaced; `None` for non-blur families.
    pub fn with_kernel_sigma(&self, range: Range) -> Option<DegradationSpec> {
        match self {
            DegradationSpec::Blur { sigma, .. } => Some(DegradationSpec::Blur {
                kernel_sigma: range,
                sigma: *sigma,
            }),
            _ => None,
        }
    }

    /// Draws one `(H, w)` pair for an image of `height x width`.
    pub fn sample(&self, rng: &mut Rng, height: usize, width: usize) -> Result<Degradation> {
        self.validate()?;
        let (op, noise_sigma) = match self {
            DegradationSpec::AdditiveNoise { sigma } => {
                (DegradationOp::Linear(LinearOp::Identity), sigma.sample(rng))
            }
            DegradationSpec::Blur {
                kernel_sigma,
                sigma,
            } => {
                let width_sigma = kernel_sigma.sample(rng);
                let kernel = gaussian_kernel(width_sigma, default_kernel_size(width_sigma))?;
                (
                    DegradationOp::Linear(LinearOp::convolution(kernel)),
                    sigma.sample(rng),
                )
            }
            DegradationSpec::Decimation { factor, sigma } => (
                DegradationOp::Linear(LinearOp::decimation(*factor)?),
                sigma.sample(rng),
            ),
            DegradationSpec::Mask { source, sigma } => {
                let mask = match source {
                    MaskSource::Fixed(m) => m.clone(),
                    MaskSource::Random { drop } => {
                        let p = drop.sample(rng);
                        let observed = (0..height * width).map(|_| !rng.bernoulli(p)).collect();
                        Mask::new(height, width, observed)?
                    }
                };
                (DegradationOp::Linear(LinearOp::mask(mask)), sigma.sample(rng))
            }
            DegradationSpec::JpegSurrogate { quality, sigma } => {
                let q = rng.int_inclusive(quality.0 as i64, quality.1 as i64) as u8;
                (DegradationOp::Jpeg { quality: q }, sigma.sample(rng))
            }
            DegradationSpec::Fixed { op, sigma } => (DegradationOp::Linear(op.clone()), *sigma),
        };
        Ok(Degradation { op, noise_sigma })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DegradationOp {
    Linear(LinearOp),
    Jpeg { quality: u8 },
}

impl DegradationOp {
    pub fn kind(&self) -> OpKind {
        match self {
            DegradationOp::Linear(op) => op.kind(),
            DegradationOp::Jpeg { .. } => OpKind::Jpeg,
        }
    }

    pub fn as_linear(&self) -> Option<&LinearOp> {
        match self {
            DegradationOp::Linear(op) => Some(op),
            DegradationOp::Jpeg { .. } => None,
        }
    }

    pub fn forward(&self, x: &Image) -> Result<Image> {
        match self {
            DegradationOp::Linear(op) => op.apply(x),
            DegradationOp::Jpeg { quality } => jpeg_surrogate(x, *quality),
        }
    }
}

/// One sampled `(H, w)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Degradation {
    pub op: DegradationOp,
    pub noise_sigma: f64,
}

impl Degradation {
    pub fn identity() -> Self {
        Degradation {
            op: DegradationOp::Linear(LinearOp::Identity),
            noise_sigma: 0.0,
        }
    }

    pub fn linear(op: LinearOp, noise_sigma: f64) -> Self {
        Degradation {
            op: DegradationOp::Linear(op),
            noise_sigma,
        }
    }

    /// `H x + w` with `w ~ N(0, sigma^2 I)` drawn from `rng`. No draws are
    /// made when sigma is zero.
    pub fn apply(&self, x: &Image, rng: &mut Rng) -> Result<Image> {
        let mut out = self.op.forward(x)?;
        if self.noise_sigma > 0.0 {
            for v in out.data_mut() {
                *v += self.noise_sigma * rng.normal();
            }
        }
        Ok(out)
    }

    /// `H^T y`; fails for the non-linear JPEG surrogate.
    pub fn adjoint(&self, y: &Image) -> Result<Image> {
        self.op
            .as_linear()
            .ok_or(FireError::NonLinear { op: "adjoint" })?
            .adjoint(y)
    }

    pub fn noiseless(&self) -> Degradation {
        Degradation {
            op: self.op.clone(),
            noise_sigma: 0.0,
        }
    }
}
