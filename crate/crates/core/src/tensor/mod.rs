//! Image container, random streams, metrics and file I/O.

mod image;
pub mod io;
pub mod metrics;
mod rng;
pub mod synthetic;

pub use self::image::{l2_norm, Image};
pub use metrics::{psnr, ssim, PSNR_IDENTICAL_DB};
pub use rng::Rng;
