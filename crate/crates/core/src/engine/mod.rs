//! The FiRe-HQS solver and the baselines it is compared against.
//!
//! Each iteration evaluates every prior residual `r_n = x − R_n(H_n x + w_n)`,
//! forms `u = x − s_k Σ γ_n r_n` and applies the data-fidelity prox. Draws
//! come from named streams `prior/k=<k>/n=<n>` split off the seed, so the
//! result does not depend on how priors are scheduled across threads.

mod baselines;
mod config;
mod solver;
mod trace;

pub use baselines::{pnp_hqs_step, red_step, run_baseline, sharp_gradient, Baseline};
pub use config::{Mode, SolverConfig, StepSchedule};
pub use solver::{
    conditioned_prior, fire_hqs, fire_hqs_tracked, initial_estimate, prior_residual,
    residual_for, residual_function, Solution,
};
pub use trace::{IterRecord, SolveTrace};
