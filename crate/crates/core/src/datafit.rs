//! Proximal operators of the least-squares data term `f(x) = ½‖Ax − y‖²`.
//!
//! `prox_{λf}(u)` minimizes `λ f(x) + ½‖x − u‖²`, i.e. solves
//! `(λ AᵀA + I) x = λ Aᵀy + u`. Periodic convolutions are solved exactly in
//! the Fourier domain, masks pixel by pixel, everything else by conjugate
//! gradients. Outputs are never clamped.

use std::str::FromStr;

use rustfft::num_complex::Complex64;

use crate::degradations::LinearOp;
use crate::error::{invalid, FireError, Result};
use crate::fft::{fft2, ifft2_real};
use crate::tensor::Image;

pub const DEFAULT_CG_TOL: f64 = 1e-6;
pub const DEFAULT_CG_ITERS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
#[derive(Default)]
pub enum ProxMethod {
    /// Picks the exact solver for the operator, falling back to CG.
    #[default]
    Auto,
    Fft,
    Mask,
    Cg { tol: f64, max_iters: usize },
}


impl FromStr for ProxMethod {
    type Err = FireError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(ProxMethod::Auto),
            "fft" => Ok(ProxMethod::Fft),
            "mask" => Ok(ProxMethod::Mask),
            "cg" => Ok(ProxMethod::Cg {
                tol: DEFAULT_CG_TOL,
                max_iters: DEFAULT_CG_ITERS,
            }),
            _ => Err(invalid(format!("unknown prox method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DataFit {
    pub op: LinearOp,
    pub y: Image,
    pub lambda: f64,
    pub method: ProxMethod,
}

impl DataFit {
    pub fn new(op: LinearOp, y: Image, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(invalid(format!("lambda must be finite and non-negative, got {lambda}")));
        }
        let (h, w) = op.input_dims(y.height(), y.width());
        let (oh, ow) = op.output_dims(h, w)?;
        if (oh, ow) != (y.height(), y.width()) {
            return Err(FireError::ShapeMismatch {
                expected: (oh, ow, y.channels()),
                got: y.shape(),
            });
        }
        Ok(DataFit {
            op,
            y,
            lambda,
            method: ProxMethod::Auto,
        })
    }

    pub fn with_method(mut self, method: ProxMethod) -> Self {
        self.method = method;
        self
    }

    /// Shape of the unknown image.
    pub fn signal_shape(&self) -> (usize, usize, usize) {
        let (h, w) = self.op.input_dims(self.y.height(), self.y.width());
        (h, w, self.y.channels())
    }

    /// `f(x) = ½‖Ax − y‖²`.
    pub fn value(&self, x: &Image) -> Result<f64> {
        Ok(0.5 * self.op.apply(x)?.sub(&self.y)?.sum_sq())
    }

    /// `∇f(x) = Aᵀ(Ax − y)`.
    pub fn gradient(&self, x: &Image) -> Result<Image> {
        self.op.adjoint(&self.op.apply(x)?.sub(&self.y)?)
    }

    fn check_input(&self, u: &Image) -> Result<()> {
        if u.shape() != self.signal_shape() {
            return Err(FireError::ShapeMismatch {
                expected: self.signal_shape(),
                got: u.shape(),
            });
        }
        Ok(())
    }

    /// `prox_{λf}(u)` using the configured method.
    pub fn prox(&self, u: &Image) -> Result<Image> {
        match self.method {
            ProxMethod::Fft => self.prox_fft(u),
            ProxMethod::Mask => self.prox_mask(u),
            ProxMethod::Cg { tol, max_iters } => self.prox_cg(u, tol, max_iters),
            ProxMethod::Auto => match &self.op {
                LinearOp::Identity | LinearOp::Convolution(_) => self.prox_fft(u),
                LinearOp::Mask(_) => self.prox_mask(u),
                _ => self.prox_cg(u, DEFAULT_CG_TOL, DEFAULT_CG_ITERS),
            },
        }
    }

    /// Exact Fourier-domain solve for identity or periodic convolution.
    pub fn prox_fft(&self, u: &Image) -> Result<Image> {
        self.check_input(u)?;
        let lam = self.lambda;
        if lam == 0.0 {
            return Ok(u.clone());
        }
        let kernel = match &self.op {
            LinearOp::Identity => {
                return u.zip_map(&self.y, |uv, yv| (lam * yv + uv) / (lam + 1.0));
            }
            LinearOp::Convolution(k) => k,
            other => {
                return Err(FireError::UnsupportedOperator {
                    method: "prox_fft",
                    kind: other.kind().to_string(),
                })
            }
        };
        let (h, w, c) = u.shape();
        let k = kernel.transfer(h, w);
        let mut out = Image::zeros(h, w, c);
        for ch in 0..c {
            let yf = fft2(&self.y.plane(ch), h, w);
            let uf = fft2(&u.plane(ch), h, w);
            let spec: Vec<Complex64> = yf
                .iter()
                .zip(&uf)
                .zip(&k)
                .map(|((yv, uv), kv)| (kv.conj() * yv * lam + uv) / (lam * kv.norm_sqr() + 1.0))
                .collect();
            out.set_plane(ch, &ifft2_real(spec, h, w));
        }
        Ok(out)
    }

    /// Closed form for a sampling mask.
    pub fn prox_mask(&self, u: &Image) -> Result<Image> {
        self.check_input(u)?;
        let mask = match &self.op {
            LinearOp::Mask(m) => m,
            other => {
                return Err(FireError::UnsupportedOperator {
                    method: "prox_mask",
                    kind: other.kind().to_string(),
                })
            }
        };
        let lam = self.lambda;
        let (_, w, c) = u.shape();
        let mut out = u.clone();
        for (idx, v) in out.data_mut().iter_mut().enumerate() {
            let pix = idx / c;
            if mask.is_observed(pix / w, pix % w) {
                *v = (lam * self.y.data()[idx] + *v) / (lam + 1.0);
            }
        }
        Ok(out)
    }

    fn normal_op(&self, x: &Image) -> Result<Image> {
        let mut out = self.op.adjoint(&self.op.apply(x)?)?.scale(self.lambda);
        out.axpy(1.0, x)?;
        Ok(out)
    }

    /// Conjugate gradients on `(λAᵀA + I) x = λAᵀy + u`, warm-started at `u`,
    /// until the relative residual drops to `tol`.
    pub fn prox_cg(&self, u: &Image, tol: f64, max_iters: usize) -> Result<Image> {
        self.check_input(u)?;
        if !(tol > 0.0) {
            return Err(invalid("cg tolerance must be positive"));
        }
        let mut b = self.op.adjoint(&self.y)?.scale(self.lambda);
        b.axpy(1.0, u)?;
        let b_norm = b.l2_norm();
        if b_norm == 0.0 {
            return Ok(Image::zeros(u.height(), u.width(), u.channels()));
        }
        let mut x = u.clone();
        let mut r = b.sub(&self.normal_op(&x)?)?;
        let mut p = r.clone();
        let mut rs = r.sum_sq();
        for iter in 0..=max_iters {
            let rel = rs.sqrt() / b_norm;
            if rel <= tol {
                return Ok(x);
            }
            if iter == max_iters {
                return Err(FireError::NoConvergence {
                    iters: max_iters,
                    residual: rel,
                });
            }
            let ap = self.normal_op(&p)?;
            let alpha = rs / p.dot(&ap)?;
            x.axpy(alpha, &p)?;
            r.axpy(-alpha, &ap)?;
            let rs_new = r.sum_sq();
            let beta = rs_new / rs;
            p = r.zip_map(&p, |rv, pv| rv + beta * pv)?;
            rs = rs_new;
        }
        unreachable!()
    }
}
