//! Classical restoration operators, each paired with the degradation family
//! it undoes, plus exact projections and remote restorers.
//!
//! A restorer is called as `R(y; d)`, where `d` is the sampled degradation
//! that produced `y`. Non-blind restorers read their parameters from `d`
//! (the Wiener filter its kernel, the inpainter its mask, the adaptive
//! denoisers its noise level).

mod dct;
mod inpaint;
mod projection;
mod sr;
mod tv;
mod wiener;

use std::fmt;
use std::sync::{Arc, Mutex};

pub use dct::{dct2, dct_threshold};
pub use inpaint::{harmonic_inpaint, INPAINT_TOLERANCE};
pub use projection::ConvexSet;
pub use sr::{interpolate, sr_upsample};
pub use tv::{tv_denoise, tv_prox_plane};
pub use wiener::{wiener_deconv, wiener_filter};

use crate::degradations::{Degradation, DegradationOp, DegradationSpec, Kernel, LinearOp, Mask, OpKind};
use crate::error::{invalid, FireError, Result};
use crate::remote::{RemoteHandle, Transport, DEFAULT_TIMEOUT};
use crate::tensor::Image;

pub const DEFAULT_WIENER_SNR: f64 = 100.0;
pub const DEFAULT_TV_ITERS: usize = 50;
pub const DEFAULT_INPAINT_ITERS: usize = 500;

/// Strength of a denoiser, either fixed or proportional to the sampled
/// noise level of the degradation it receives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strength {
    Fixed(f64),
    PerSigma(f64),
}

impl Strength {
    fn resolve(self, noise_sigma: f64) -> f64 {
        match self {
            Strength::Fixed(s) => s,
            Strength::PerSigma(k) => k * noise_sigma,
        }
    }
}

pub struct RemoteRestorer {
    address: String,
    family: OpKind,
    handle: Mutex<RemoteHandle>,
}

impl fmt::Debug for RemoteRestorer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RemoteRestorer")
            .field("address", &self.address)
            .field("family", &self.family)
            .finish()
    }
}

#[derive(Debug)]
pub enum Restorer {
    Wiener { snr: f64 },
    Tv { strength: Strength, inner_iters: usize },
    DctThreshold { threshold: Strength },
    HarmonicInpaint { inner_iters: usize },
    SrUpsample { factor: usize, snr: f64 },
    Projection(ConvexSet),
    Remote(RemoteRestorer),
}

/// Maps protocol family tags to operator kinds.
pub fn family_kind(tag: &str) -> Option<OpKind> {
    Some(match tag {
        "denoise" | "identity" => OpKind::Identity,
        "deblur" | "blur" => OpKind::Convolution,
        "sr" | "decimation" => OpKind::Decimation,
        "inpaint" | "mask" => OpKind::Mask,
        "jpeg" => OpKind::Jpeg,
        _ => return None,
    })
}

fn parse_num<T: std::str::FromStr>(s: &str, id: &str) -> Result<T> {
    s.parse()
        .map_err(|_| invalid(format!("bad number {s:?} in restorer id {id:?}")))
}

impl Restorer {
    /// Exact projection onto a convex set.
    pub fn projection(set: ConvexSet) -> Result<Self> {
        set.validate()?;
        Ok(Restorer::Projection(set))
    }

    /// Connects to an out-of-process restorer and completes the handshake.
    pub fn remote(address: &str) -> Result<Self> {
        let mut handle = RemoteHandle::connect(&Transport::parse(address), DEFAULT_TIMEOUT)?;
        let caps = handle.handshake()?;
        Self::remote_from_handle(address, handle, &caps.family)
    }

    /// Wraps an already-initialized handle.
    pub fn remote_from_handle(address: &str, handle: RemoteHandle, family: &str) -> Result<Self> {
        if handle.capabilities().is_none() {
            return Err(crate::remote::RemoteError::NotInitialized.into());
        }
        let family = family_kind(family)
            .ok_or_else(|| invalid(format!("unknown remote family {family:?}")))?;
        Ok(Restorer::Remote(RemoteRestorer {
            address: address.to_string(),
            family,
            handle: Mutex::new(handle),
        }))
    }

    /// Builds a restorer from its registry id, e.g. `"wiener"`, `"tv:1.5"`,
    /// `"sr2"`, `"proj:box:0:1"` or `"remote:127.0.0.1:7000"`.
    pub fn from_id(id: &str) -> Result<Self> {
        let mut parts = id.split(':');
        let head = parts.next().unwrap_or("");
        let args: Vec<&str> = parts.collect();
        let arg = |i: usize| args.get(i).copied();
        Ok(match head {
            "wiener" => Restorer::Wiener {
                snr: arg(0).map_or(Ok(DEFAULT_WIENER_SNR), |s| parse_num(s, id))?,
            },
            "tv" => Restorer::Tv {
                strength: Strength::PerSigma(arg(0).map_or(Ok(1.0), |s| parse_num(s, id))?),
                inner_iters: arg(1).map_or(Ok(DEFAULT_TV_ITERS), |s| parse_num(s, id))?,
            },
            "tv-fixed" => Restorer::Tv {
                strength: Strength::Fixed(parse_num(arg(0).unwrap_or(""), id)?),
                inner_iters: arg(1).map_or(Ok(DEFAULT_TV_ITERS), |s| parse_num(s, id))?,
            },
            "dct" => Restorer::DctThreshold {
                threshold: Strength::PerSigma(arg(0).map_or(Ok(3.0), |s| parse_num(s, id))?),
            },
            "dct-fixed" => Restorer::DctThreshold {
                threshold: Strength::Fixed(parse_num(arg(0).unwrap_or(""), id)?),
            },
            "inpaint" => Restorer::HarmonicInpaint {
                inner_iters: arg(0).map_or(Ok(DEFAULT_INPAINT_ITERS), |s| parse_num(s, id))?,
            },
            "proj" => {
                let set = match (arg(0), args.len()) {
                    (Some("box"), 3) => ConvexSet::Box {
                        lo: parse_num(args[1], id)?,
                        hi: parse_num(args[2], id)?,
                    },
                    (Some("ball"), 3) => ConvexSet::Ball {
                        center: parse_num(args[1], id)?,
                        radius: parse_num(args[2], id)?,
                    },
                    (Some("mean"), 2) => ConvexSet::Mean {
                        value: parse_num(args[1], id)?,
                    },
                    _ => return Err(invalid(format!("unknown projection id {id:?}"))),
                };
                Restorer::projection(set)?
            }
            "remote" => {
                let address = id.strip_prefix("remote:").unwrap_or("");
                if address.is_empty() {
                    return Err(invalid("remote restorer needs an address"));
                }
                Restorer::remote(address)?
            }
            sr if sr.starts_with("sr") => {
                let factor: usize = parse_num(&sr[2..], id)?;
                if factor < 2 {
                    return Err(invalid("sr factor must be at least 2"));
                }
                Restorer::SrUpsample {
                    factor,
                    snr: arg(0).map_or(Ok(DEFAULT_WIENER_SNR), |s| parse_num(s, id))?,
                }
            }
            _ => return Err(invalid(format!("unknown restorer id {id:?}"))),
        })
    }

    pub fn name(&self) -> String {
        match self {
            Restorer::Wiener { .. } => "wiener".into(),
            Restorer::Tv { .. } => "tv".into(),
            Restorer::DctThreshold { .. } => "dct".into(),
            Restorer::HarmonicInpaint { .. } => "inpaint".into(),
            Restorer::SrUpsample { factor, .. } => format!("sr{factor}"),
            Restorer::Projection(_) => "proj".into(),
            Restorer::Remote(r) => format!("remote:{}", r.address),
        }
    }

    /// Whether samples of a degradation family with this operator kind are
    /// valid inputs.
    pub fn accepts(&self, kind: OpKind) -> bool {
        match self {
            Restorer::Wiener { .. } => kind == OpKind::Convolution,
            Restorer::Tv { .. } | Restorer::DctThreshold { .. } => {
                matches!(kind, OpKind::Identity | OpKind::Jpeg)
            }
            Restorer::HarmonicInpaint { .. } => kind == OpKind::Mask,
            Restorer::SrUpsample { .. } => kind == OpKind::Decimation,
            Restorer::Projection(_) => kind == OpKind::Identity,
            Restorer::Remote(r) => r.family == kind,
        }
    }

    fn incompatible(&self, kind: OpKind) -> FireError {
        FireError::IncompatibleFamily {
            restorer: self.name(),
            family: kind.to_string(),
        }
    }

    /// The exact projection, when this restorer is one.
    pub fn convex_set(&self) -> Option<&ConvexSet> {
        match self {
            Restorer::Projection(set) => Some(set),
            _ => None,
        }
    }

    /// Restores `y`, which was produced by `degradation`.
    pub fn restore(&self, y: &Image, degradation: &Degradation) -> Result<Image> {
        let kind = degradation.op.kind();
        match self {
            Restorer::Wiener { snr } => match &degradation.op {
                DegradationOp::Linear(LinearOp::Convolution(k)) => wiener_deconv(y, k, *snr),
                DegradationOp::Linear(LinearOp::Identity) => {
                    wiener_deconv(y, &Kernel::delta(), *snr)
                }
                _ => Err(self.incompatible(kind)),
            },
            Restorer::Tv {
                strength,
                inner_iters,
            } => Ok(tv_denoise(y, strength.resolve(degradation.noise_sigma), *inner_iters)),
            Restorer::DctThreshold { threshold } => {
                Ok(dct_threshold(y, threshold.resolve(degradation.noise_sigma)))
            }
            Restorer::HarmonicInpaint { inner_iters } => match &degradation.op {
                DegradationOp::Linear(LinearOp::Mask(m)) => harmonic_inpaint(y, m, *inner_iters),
                DegradationOp::Linear(LinearOp::Identity) => {
                    harmonic_inpaint(y, &Mask::full(y.height(), y.width()), *inner_iters)
                }
                _ => Err(self.incompatible(kind)),
            },
            Restorer::SrUpsample { factor, snr } => match &degradation.op {
                DegradationOp::Linear(LinearOp::Decimation { factor: f, .. }) if f == factor => {
                    sr_upsample(y, *factor, *snr)
                }
                _ => Err(self.incompatible(kind)),
            },
            Restorer::Projection(set) => set.project(y),
            Restorer::Remote(r) => {
                let mut handle = r.handle.lock().unwrap_or_else(|p| p.into_inner());
                Ok(handle.restore(y)?)
            }
        }
    }
}

/// One weighted prior: a restorer bound to its degradation class.
#[derive(Debug, Clone)]
pub struct PriorTerm {
    pub restorer: Arc<Restorer>,
    pub spec: DegradationSpec,
    pub gamma: f64,
}

impl PriorTerm {
    pub fn new(restorer: Arc<Restorer>, spec: DegradationSpec, gamma: f64) -> Result<Self> {
        spec.validate()?;
        if !(0.0..=1.0).contains(&gamma) {
            return Err(invalid(format!("prior weight must lie in [0, 1], got {gamma}")));
        }
        if !restorer.accepts(spec.op_kind()) {
            return Err(restorer.incompatible(spec.op_kind()));
        }
        Ok(PriorTerm {
            restorer,
            spec,
            gamma,
        })
    }

    /// Same restorer with a different degradation class.
    pub fn with_spec(&self, spec: DegradationSpec) -> Result<Self> {
        PriorTerm::new(self.restorer.clone(), spec, self.gamma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degradations::Range;

    #[test]
    fn registry_ids() {
        assert!(matches!(Restorer::from_id("wiener").unwrap(), Restorer::Wiener { snr } if snr == 100.0));
        assert!(matches!(Restorer::from_id("wiener:50").unwrap(), Restorer::Wiener { snr } if snr == 50.0));
        assert!(matches!(
            Restorer::from_id("tv").unwrap(),
            Restorer::Tv { strength: Strength::PerSigma(_), .. }
        ));
        assert!(matches!(Restorer::from_id("sr3").unwrap(), Restorer::SrUpsample { factor: 3, .. }));
        assert!(matches!(
            Restorer::from_id("proj:box:0:1").unwrap(),
            Restorer::Projection(ConvexSet::Box { lo, hi }) if lo == 0.0 && hi == 1.0
        ));
        assert!(Restorer::from_id("proj:box:1:0").is_err());
        assert!(Restorer::from_id("proj:ball:0:0").is_err());
        assert!(Restorer::from_id("sr1").is_err());
        assert!(Restorer::from_id("unet").is_err());
        assert!(Restorer::from_id("remote:").is_err());
    }

    #[test]
    fn family_compatibility_is_enforced() {
        let tv = Arc::new(Restorer::from_id("tv").unwrap());
        let blur = DegradationSpec::Blur {
            kernel_sigma: Range::new(0.5, 2.0),
            sigma: Range::new(0.01, 0.05),
        };
        assert!(matches!(
            PriorTerm::new(tv.clone(), blur.clone(), 0.5),
            Err(FireError::IncompatibleFamily { .. })
        ));
        let noise = DegradationSpec::AdditiveNoise { sigma: Range::new(0.01, 0.05) };
        assert!(PriorTerm::new(tv.clone(), noise.clone(), 0.5).is_ok());
        assert!(PriorTerm::new(tv, noise, 1.5).is_err());
        let wiener = Arc::new(Restorer::from_id("wiener").unwrap());
        assert!(PriorTerm::new(wiener, blur, 0.3).is_ok());
    }

    #[test]
    fn outputs_are_clamped() {
        let y = Image::from_fn(8, 8, 1, |i, j, _| if (i + j) % 2 == 0 { 1.4 } else { -0.3 });
        let d = Degradation::linear(LinearOp::Identity, 0.05);
        for id in ["tv", "dct", "inpaint"] {
            let out = Restorer::from_id(id).unwrap().restore(&y, &d).unwrap();
            assert!(out.data().iter().all(|v| (0.0..=1.0).contains(v)), "{id}");
            assert_eq!(out.shape(), y.shape());
        }
    }

    #[test]
    fn sr_rejects_mismatched_factor() {
        let sr = Restorer::from_id("sr2").unwrap();
        let d = Degradation::linear(LinearOp::decimation(3).unwrap(), 0.0);
        assert!(sr.restore(&Image::zeros(4, 4, 1), &d).is_err());
    }
}
