//! Forward operators `A`, prior-side degradations `H`, noise, and samplers
//! over degradation classes.

mod jpeg;
mod kernel;
mod linear;
mod spec;

pub use jpeg::{jpeg_surrogate, quant_table, LUMA_QUANT};
pub use kernel::{default_kernel_size, gaussian_kernel, gaussian_smooth, Kernel};
pub use linear::{LinearOp, Mask, OpKind};
pub(crate) use linear::zero_fill;
pub use spec::{Degradation, DegradationOp, DegradationSpec, MaskSource, Range};
