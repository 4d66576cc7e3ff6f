//! Empirical probes of restoration priors: fixed-point iteration traces,
//! the prior-loss landscape `d(y) = ‖y − R(Hy + w)‖` and degradation-strength
//! ablations.

use crate::degradations::{gaussian_smooth, DegradationSpec, LinearOp, Range};
use crate::engine::{fire_hqs, SolverConfig};
use crate::error::{invalid, Result};
use crate::par;
use crate::restorers::PriorTerm;
use crate::tensor::{psnr, ssim, Image, Rng};

pub const DEFAULT_PROBE_SAMPLES: usize = 8;

fn step_stream(rng: &Rng, k: usize, n: usize) -> Rng {
    rng.derive(&format!("fixedpoint/k={k}/n={n}"))
}

/// One application of `T(x) = R(Hx + w)`, or of `R(x)` alone when
/// `compose` is off. The degradation is drawn either way so that the
/// restorer receives its parameters.
fn apply_t(x: &Image, term: &PriorTerm, compose: bool, rng: &mut Rng) -> Result<Image> {
    let d = term.spec.sample(rng, x.height(), x.width())?;
    let input = if compose { d.apply(x, rng)? } else { x.clone() };
    term.restorer.restore(&input, &d)
}

/// PSNR against `x0` of the iterates `x_{k+1} = T(x_k)`, `K + 1` entries
/// starting with `x0` itself.
pub fn fixed_point_trace(
    x0: &Image,
    term: &PriorTerm,
    iters: usize,
    compose: bool,
    rng: &Rng,
) -> Result<Vec<f64>> {
    if iters == 0 {
        return Err(invalid("fixed-point trace needs at least one iteration"));
    }
    let mut x = x0.clone();
    let mut out = vec![psnr(&x, x0, 1.0)?];
    for k in 0..iters {
        x = apply_t(&x, term, compose, &mut step_stream(rng, k, 0))?;
        out.push(psnr(&x, x0, 1.0)?);
    }
    Ok(out)
}

/// Iterates `x ← (1 − Σγ) x + Σ γ_n T_n(x)`, i.e. `x − Σ γ_n (x − T_n(x))`,
/// with every `T_n` composed with its degradation.
pub fn combined_fixed_point_trace(
    x0: &Image,
    terms: &[PriorTerm],
    weights: &[f64],
    iters: usize,
    rng: &Rng,
) -> Result<Vec<f64>> {
    if terms.len() != weights.len() || terms.is_empty() {
        return Err(invalid("one weight per term is required"));
    }
    let total: f64 = weights.iter().sum();
    if weights.iter().any(|w| *w < 0.0) || total > 1.0 + 1e-12 {
        return Err(invalid(format!("weights must be non-negative and sum to at most 1, got {total}")));
    }
    if iters == 0 {
        return Err(invalid("fixed-point trace needs at least one iteration"));
    }
    let mut x = x0.clone();
    let mut out = vec![psnr(&x, x0, 1.0)?];
    for k in 0..iters {
        let mut next = x.scale(1.0 - total);
        for (n, (term, w)) in terms.iter().zip(weights).enumerate() {
            let t = apply_t(&x, term, true, &mut step_stream(rng, k, n))?;
            next.axpy(*w, &t)?;
        }
        x = next;
        out.push(psnr(&x, x0, 1.0)?);
    }
    Ok(out)
}

/// Spread of a trace after its starting point: `max − min` over `trace[1..]`.
pub fn trace_variation(trace: &[f64]) -> f64 {
    let tail = &trace[1.min(trace.len())..];
    let max = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = tail.iter().cloned().fold(f64::INFINITY, f64::min);
    if tail.is_empty() {
        0.0
    } else {
        max - min
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeGrid {
    pub sigma_blur: Vec<f64>,
    pub sigma_noise: Vec<f64>,
    pub samples: usize,
}

impl ProbeGrid {
    pub fn new(sigma_blur: Vec<f64>, sigma_noise: Vec<f64>) -> Self {
        ProbeGrid {
            sigma_blur,
            sigma_noise,
            samples: DEFAULT_PROBE_SAMPLES,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sigma_blur.is_empty() || self.sigma_noise.is_empty() {
            return Err(invalid("probe grid axes must be non-empty"));
        }
        if self.samples == 0 {
            return Err(invalid("probe needs at least one sample per cell"));
        }
        if self.sigma_blur.iter().chain(&self.sigma_noise).any(|s| !(*s >= 0.0)) {
            return Err(invalid("probe grid values must be non-negative"));
        }
        Ok(())
    }
}

/// Cell means and standard errors, indexed `[blur][noise]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeResult {
    pub mean: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
}

/// Mean of `‖y − R(Hy + w)‖` over `y = blur(x, σ_blur) + σ_noise n`.
///
/// Sample `s` of cell `(i, j)` uses stream `probe/i/j/s`, so raising the
/// sample count keeps the earlier samples.
pub fn prior_loss_probe(x: &Image, term: &PriorTerm, grid: &ProbeGrid, rng: &Rng) -> Result<ProbeResult> {
    grid.validate()?;
    let cols = grid.sigma_noise.len();
    let cells = par::map_range(grid.sigma_blur.len() * cols, true, |idx| -> Result<(f64, f64)> {
        let (i, j) = (idx / cols, idx % cols);
        let blurred = match grid.sigma_blur[i] {
            s if s > 0.0 => gaussian_smooth(x, s)?,
            _ => x.clone(),
        };
        let values = (0..grid.samples)
            .map(|s| {
                let mut r = rng.derive(&format!("probe/{i}/{j}/{s}"));
                let mut y = blurred.clone();
                let noise = grid.sigma_noise[j];
                if noise > 0.0 {
                    for v in y.data_mut() {
                        *v += noise * r.normal();
                    }
                }
                Ok(y.sub(&apply_t(&y, term, true, &mut r)?)?.l2_norm())
            })
            .collect::<Result<Vec<f64>>>()?;
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let stderr = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
        } else {
            0.0
        };
        Ok((mean, stderr))
    });
    let cells = cells.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ProbeResult {
        mean: cells.chunks(cols).map(|r| r.iter().map(|c| c.0).collect()).collect(),
        stderr: cells.chunks(cols).map(|r| r.iter().map(|c| c.1).collect()).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrengthAxis {
    /// Fixes the prior's noise level to the axis value.
    NoiseSigma,
    /// Fixes the prior's blur width to the axis value.
    KernelWidth,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AblationPoint {
    pub strength: f64,
    pub psnr: f64,
    pub ssim: f64,
}

fn with_strength(spec: &DegradationSpec, axis: StrengthAxis, value: f64) -> Result<DegradationSpec> {
    match axis {
        StrengthAxis::NoiseSigma => Ok(spec.with_noise(Range::fixed(value))),
        StrengthAxis::KernelWidth => spec
            .with_kernel_sigma(Range::fixed(value))
            .ok_or_else(|| invalid("kernel-width axis needs a blur prior")),
    }
}

/// Re-solves with prior `prior` pinned to each strength on `axis`.
#[allow(clippy::too_many_arguments)]
pub fn strength_ablation(
    y: &Image,
    op: &LinearOp,
    cfg: &SolverConfig,
    x0: &Image,
    reference: &Image,
    prior: usize,
    axis: StrengthAxis,
    values: &[f64],
) -> Result<Vec<AblationPoint>> {
    if values.is_empty() {
        return Err(invalid("strength axis is empty"));
    }
    let term = cfg
        .priors
        .get(prior)
        .ok_or_else(|| invalid(format!("no prior with index {prior}")))?;
    par::map_indexed(values, true, |_, &v| {
        let mut run = cfg.clone();
        run.priors[prior] = term.with_spec(with_strength(&term.spec, axis, v)?)?;
        let x = fire_hqs(y, op, &run, x0)?.x;
        Ok(AblationPoint {
            strength: v,
            psnr: psnr(&x, reference, 1.0)?,
            ssim: ssim(&x, reference)?,
        })
    })
    .into_iter()
    .collect()
}
