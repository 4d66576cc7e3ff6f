use std::str::FromStr;

use crate::datafit::ProxMethod;
use crate::error::{invalid, FireError, Result};
use crate::restorers::PriorTerm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Each prior's degradation is drawn once and applied without noise at
    /// every iteration; the sampled noise level still informs the restorer.
    Deterministic,
    /// Fresh `(H, w)` draws at every iteration.
    #[default]
    Stochastic,
}

impl FromStr for Mode {
    type Err = FireError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "deterministic" => Ok(Mode::Deterministic),
            "stochastic" => Ok(Mode::Stochastic),
            _ => Err(invalid(format!("unknown mode {s:?}"))),
        }
    }
}

/// Multiplier applied to every prior weight at iteration `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule {
    Constant { scale: f64 },
    /// `gamma0 * (k + 1)^(-exponent)`
    Polynomial { gamma0: f64, exponent: f64 },
}

impl Default for StepSchedule {
    fn default() -> Self {
        StepSchedule::Constant { scale: 1.0 }
    }
}

impl StepSchedule {
    pub fn factor(&self, k: usize) -> f64 {
        match *self {
            StepSchedule::Constant { scale } => scale,
            StepSchedule::Polynomial { gamma0, exponent } => gamma0 * ((k + 1) as f64).powf(-exponent),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            StepSchedule::Constant { scale } if !(scale > 0.0 && scale <= 1.0) => {
                Err(invalid(format!("constant step scale must lie in (0, 1], got {scale}")))
            }
            StepSchedule::Polynomial { gamma0, exponent } => {
                if !(gamma0 > 0.0 && gamma0 <= 1.0) {
                    return Err(invalid(format!("gamma0 must lie in (0, 1], got {gamma0}")));
                }
                if !(exponent > 0.5 && exponent <= 1.0) {
                    return Err(invalid(format!(
                        "polynomial exponent must lie in (0.5, 1], got {exponent}"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub priors: Vec<PriorTerm>,
    pub lambda: f64,
    pub iters: usize,
    pub mode: Mode,
    pub schedule: StepSchedule,
    /// `None` picks `true` for several priors and `false` otherwise.
    pub return_u: Option<bool>,
    pub parallel_priors: bool,
    pub seed: u64,
    pub prox: ProxMethod,
    /// Fresh draws for the traced residual function. `None` reuses the
    /// residuals of the iteration itself.
    pub f_samples: Option<usize>,
}

impl SolverConfig {
    pub fn new(priors: Vec<PriorTerm>, lambda: f64, iters: usize) -> Self {
        SolverConfig {
            priors,
            lambda,
            iters,
            mode: Mode::default(),
            schedule: StepSchedule::default(),
            return_u: None,
            parallel_priors: true,
            seed: 0,
            prox: ProxMethod::Auto,
            f_samples: None,
        }
    }

    pub fn gamma_sum(&self) -> f64 {
        self.priors.iter().map(|p| p.gamma).sum()
    }

    pub fn returns_u(&self) -> bool {
        self.return_u.unwrap_or(self.priors.len() > 1)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(invalid(format!("lambda must be finite and non-negative, got {}", self.lambda)));
        }
        self.schedule.validate()?;
        for p in &self.priors {
            if !(0.0..=1.0).contains(&p.gamma) {
                return Err(invalid(format!("prior weight must lie in [0, 1], got {}", p.gamma)));
            }
        }
        let total = self.gamma_sum();
        if total > 1.0 + 1e-12 {
            return Err(invalid(format!("prior weights sum to {total}, must not exceed 1")));
        }
        if (total - 1.0).abs() <= 1e-12 {
            log::warn!("prior weights sum to 1; convergence guarantees need a sum below 1");
        }
        if self.f_samples == Some(0) {
            return Err(invalid("f_samples must be at least 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degradations::{DegradationSpec, Range};
    use crate::restorers::{ConvexSet, Restorer};
    use std::sync::Arc;

    fn proj(gamma: f64) -> PriorTerm {
        PriorTerm::new(
            Arc::new(Restorer::projection(ConvexSet::Box { lo: 0.0, hi: 1.0 }).unwrap()),
            DegradationSpec::AdditiveNoise { sigma: Range::fixed(0.0) },
            gamma,
        )
        .unwrap()
    }

    #[test]
    fn gamma_sum_rules() {
        assert!(SolverConfig::new(vec![proj(0.5), proj(0.4)], 1.0, 1).validate().is_ok());
        assert!(SolverConfig::new(vec![proj(0.5), proj(0.5)], 1.0, 1).validate().is_ok());
        assert!(SolverConfig::new(vec![proj(0.6), proj(0.5)], 1.0, 1).validate().is_err());
    }

    #[test]
    fn schedules() {
        let s = StepSchedule::Polynomial { gamma0: 1.0, exponent: 0.75 };
        assert_eq!(s.factor(0), 1.0);
        assert!((s.factor(15) - 16f64.powf(-0.75)).abs() < 1e-15);
        assert!(StepSchedule::Polynomial { gamma0: 1.0, exponent: 0.5 }.validate().is_err());
        assert!(StepSchedule::Polynomial { gamma0: 1.0, exponent: 1.0 }.validate().is_ok());
        assert!(StepSchedule::Constant { scale: 0.0 }.validate().is_err());
    }

    #[test]
    fn return_u_default_follows_prior_count() {
        assert!(!SolverConfig::new(vec![proj(0.5)], 1.0, 1).returns_u());
        assert!(SolverConfig::new(vec![proj(0.4), proj(0.4)], 1.0, 1).returns_u());
    }
}
