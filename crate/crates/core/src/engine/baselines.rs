//! Single-prior reference schemes: RED, PnP-HQS and the ShaRP gradient.

use crate::datafit::DataFit;
use crate::degradations::Degradation;
use crate::error::{FireError, Result};
use crate::restorers::{PriorTerm, Restorer};
use crate::tensor::{Image, Rng};

/// `prox_{λf}(x − γ R(x))`, or `prox_{λf}(x − γ (x − R(x)))` when
/// `residual_form` is set. `context` is the degradation handed to `R`.
pub fn red_step(
    x: &Image,
    df: &DataFit,
    restorer: &Restorer,
    context: &Degradation,
    gamma: f64,
    residual_form: bool,
) -> Result<Image> {
    let r = restorer.restore(x, context)?;
    let mut arg = x.clone();
    if residual_form {
        arg.axpy(-gamma, &x.sub(&r)?)?;
    } else {
        arg.axpy(-gamma, &r)?;
    }
    df.prox(&arg)
}

/// `R(prox_{λf}(x))`.
pub fn pnp_hqs_step(x: &Image, df: &DataFit, restorer: &Restorer, context: &Degradation) -> Result<Image> {
    restorer.restore(&df.prox(x)?, context)
}

/// `HᵀH (x − R(Hx + w))` with one draw of `(H, w)`.
pub fn sharp_gradient(x: &Image, term: &PriorTerm, rng: &mut Rng) -> Result<Image> {
    let degradation = term.spec.sample(rng, x.height(), x.width())?;
    let op = degradation
        .op
        .as_linear()
        .ok_or(FireError::NonLinear { op: "sharp_gradient" })?
        .clone();
    let observed = degradation.apply(x, rng)?;
    let r = x.sub(&term.restorer.restore(&observed, &degradation)?)?;
    op.adjoint(&op.apply(&r)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    Red { residual_form: bool },
    PnpHqs,
}

/// Iterates a baseline `iters` times from `x0`, checking for divergence.
pub fn run_baseline(
    baseline: Baseline,
    df: &DataFit,
    restorer: &Restorer,
    context: &Degradation,
    gamma: f64,
    iters: usize,
    x0: &Image,
) -> Result<Image> {
    let mut x = x0.clone();
    for k in 0..iters {
        x = match baseline {
            Baseline::Red { residual_form } => red_step(&x, df, restorer, context, gamma, residual_form)?,
            Baseline::PnpHqs => pnp_hqs_step(&x, df, restorer, context)?,
        };
        if !x.is_finite() {
            return Err(FireError::NonFinite { iter: k });
        }
    }
    Ok(x)
}
