use std::time::Instant;

use super::config::{Mode, SolverConfig};
use super::trace::{IterRecord, SolveTrace};
use crate::datafit::DataFit;
use crate::degradations::{Degradation, DegradationSpec, LinearOp};
use crate::error::{FireError, Result};
use crate::par;
use crate::restorers::{interpolate, wiener_deconv, PriorTerm, Restorer, DEFAULT_WIENER_SNR};
use crate::tensor::{psnr, Image, Rng};

/// `x − R(Hx + w)` for a given draw. With `add_noise` false the restorer
/// still sees the sampled noise level, but no noise is added.
pub fn residual_for(
    x: &Image,
    restorer: &Restorer,
    degradation: &Degradation,
    add_noise: bool,
    rng: &mut Rng,
) -> Result<Image> {
    let observed = if add_noise {
        degradation.apply(x, rng)?
    } else {
        degradation.op.forward(x)?
    };
    let restored = restorer.restore(&observed, degradation)?;
    x.sub(&restored)
}

/// Draws `(H, w)` from the term's class and returns `x − R(Hx + w)`.
pub fn prior_residual(x: &Image, term: &PriorTerm, rng: &mut Rng) -> Result<Image> {
    let degradation = term.spec.sample(rng, x.height(), x.width())?;
    residual_for(x, &term.restorer, &degradation, true, rng)
}

/// A prior whose degradation is the measurement operator itself, noiseless.
pub fn conditioned_prior(op: &LinearOp, restorer: std::sync::Arc<Restorer>, gamma: f64) -> Result<PriorTerm> {
    PriorTerm::new(
        restorer,
        DegradationSpec::Fixed {
            op: op.clone(),
            sigma: 0.0,
        },
        gamma,
    )
}

/// Cheap pseudo-inverse used as the default starting point.
pub fn initial_estimate(y: &Image, op: &LinearOp) -> Result<Image> {
    match op {
        LinearOp::Identity => Ok(y.clone()),
        LinearOp::Convolution(k) => wiener_deconv(y, k, DEFAULT_WIENER_SNR),
        LinearOp::Decimation { factor, .. } => interpolate(y, *factor),
        LinearOp::Mask(_) | LinearOp::Composition(_) => op.adjoint(y),
    }
}

/// γ-weighted mean of residuals; zero when all weights vanish.
fn weighted_mean(residuals: &[Image], gammas: &[f64], like: &Image) -> Result<Image> {
    let mut g = Image::zeros(like.height(), like.width(), like.channels());
    let total: f64 = gammas.iter().sum();
    if total <= 0.0 {
        return Ok(g);
    }
    for (r, gamma) in residuals.iter().zip(gammas) {
        g.axpy(gamma / total, r)?;
    }
    Ok(g)
}

fn f_norm_from(x: &Image, grad: &Image, df: &DataFit) -> Result<f64> {
    Ok(x.sub(&df.prox(&x.sub(grad)?)?)?.l2_norm())
}

/// `‖x − prox_{λf}(x − ĝ)‖` where `ĝ` estimates `½∇ E d²` by averaging
/// `samples` residual draws per prior, combined with normalized weights.
pub fn residual_function(
    x: &Image,
    df: &DataFit,
    priors: &[PriorTerm],
    samples: usize,
    rng: &mut Rng,
) -> Result<f64> {
    if samples == 0 {
        return Err(crate::error::invalid("residual function needs at least one sample"));
    }
    let mut means = Vec::with_capacity(priors.len());
    for term in priors {
        let mut acc = Image::zeros(x.height(), x.width(), x.channels());
        for _ in 0..samples {
            acc.axpy(1.0 / samples as f64, &prior_residual(x, term, rng)?)?;
        }
        means.push(acc);
    }
    let gammas: Vec<f64> = priors.iter().map(|p| p.gamma).collect();
    f_norm_from(x, &weighted_mean(&means, &gammas, x)?, df)
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Image,
    pub trace: SolveTrace,
}

/// FiRe-HQS on `f(x) = ½‖Ax − y‖²` starting from `x0`.
pub fn fire_hqs(y: &Image, op: &LinearOp, cfg: &SolverConfig, x0: &Image) -> Result<Solution> {
    fire_hqs_tracked(y, op, cfg, x0, None)
}

/// [`fire_hqs`] recording PSNR of the returned iterate against `reference`.
pub fn fire_hqs_tracked(
    y: &Image,
    op: &LinearOp,
    cfg: &SolverConfig,
    x0: &Image,
    reference: Option<&Image>,
) -> Result<Solution> {
    cfg.validate()?;
    let df = DataFit::new(op.clone(), y.clone(), cfg.lambda)?.with_method(cfg.prox);
    if x0.shape() != df.signal_shape() {
        return Err(FireError::ShapeMismatch {
            expected: df.signal_shape(),
            got: x0.shape(),
        });
    }
    let (h, w, _) = x0.shape();
    let root = Rng::new(cfg.seed);
    let gammas: Vec<f64> = cfg.priors.iter().map(|p| p.gamma).collect();
    let fixed: Option<Vec<Degradation>> = match cfg.mode {
        Mode::Deterministic => Some(
            cfg.priors
                .iter()
                .enumerate()
                .map(|(n, term)| term.spec.sample(&mut root.derive(&format!("prior/n={n}")), h, w))
                .collect::<Result<_>>()?,
        ),
        Mode::Stochastic => None,
    };
    let return_u = cfg.returns_u() && cfg.iters > 0;

    let mut x = x0.clone();
    let mut last_u = None;
    let mut trace = SolveTrace::default();
    for k in 0..cfg.iters {
        let start = Instant::now();
        let residuals: Vec<Image> = par::map_indexed(&cfg.priors, cfg.parallel_priors, |n, term| {
            match &fixed {
                Some(degs) => {
                    residual_for(&x, &term.restorer, &degs[n], false, &mut root.derive(&format!("prior/n={n}")))
                }
                None => prior_residual(&x, term, &mut root.derive(&format!("prior/k={k}/n={n}"))),
            }
        })
        .into_iter()
        .collect::<Result<_>>()?;

        let step = cfg.schedule.factor(k);
        let mut u = x.clone();
        for (r, gamma) in residuals.iter().zip(&gammas) {
            u.axpy(-gamma * step, r)?;
        }
        let residual_norms: Vec<f64> = residuals.iter().map(Image::l2_norm).collect();
        let objective = cfg.lambda * df.value(&x)?
            + 0.5
                * residual_norms
                    .iter()
                    .zip(&gammas)
                    .map(|(r, g)| g * r * r)
                    .sum::<f64>();
        let f_norm = match cfg.f_samples {
            None => f_norm_from(&x, &weighted_mean(&residuals, &gammas, &x)?, &df)?,
            Some(m) => residual_function(
                &x,
                &df,
                &cfg.priors,
                m,
                &mut root.derive(&format!("residual/k={k}")),
            )?,
        };
        let next = df.prox(&u)?;
        if !u.is_finite() || !next.is_finite() {
            return Err(FireError::NonFinite { iter: k });
        }
        let out = if return_u { &u } else { &next };
        let quality = reference.map(|r| psnr(out, r, 1.0)).transpose()?;
        trace.records.push(IterRecord {
            iter: k,
            residual_norms,
            objective,
            f_norm,
            psnr: quality,
            ms: start.elapsed().as_secs_f64() * 1e3,
        });
        x = next;
        last_u = Some(u);
    }
    let x = match (return_u, last_u) {
        (true, Some(u)) => u,
        _ => x,
    };
    Ok(Solution { x, trace })
}
