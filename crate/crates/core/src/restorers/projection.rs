//! Exact Euclidean projections onto closed convex sets.

use crate::error::{invalid, Result};
use crate::tensor::Image;

/// Relative slack under which a point counts as already inside the set.
const ROUNDING: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum ConvexSet {
    /// `{x : lo <= x_i <= hi}`
    Box { lo: f64, hi: f64 },
    /// `{x : ||x - center * 1|| <= radius}`
    Ball { center: f64, radius: f64 },
    /// `{x : <normal, x> = offset}`
    Hyperplane { normal: Image, offset: f64 },
    /// `{x : mean(x) = value}`, an affine subspace of codimension one.
    Mean { value: f64 },
}

impl ConvexSet {
    pub fn validate(&self) -> Result<()> {
        match self {
            ConvexSet::Box { lo, hi } if !(lo <= hi) => {
                Err(invalid(format!("box bounds must satisfy lo <= hi, got [{lo}, {hi}]")))
            }
            ConvexSet::Ball { radius, .. } if !(*radius > 0.0) => {
                Err(invalid(format!("ball radius must be positive, got {radius}")))
            }
            ConvexSet::Hyperplane { normal, .. } if normal.l2_norm() == 0.0 => {
                Err(invalid("hyperplane normal must be non-zero"))
            }
            _ => Ok(()),
        }
    }

    pub fn project(&self, x: &Image) -> Result<Image> {
        Ok(match self {
            ConvexSet::Box { lo, hi } => x.map(|v| v.clamp(*lo, *hi)),
            ConvexSet::Ball { center, radius } => {
                let dist = x.map(|v| v - center).l2_norm();
                // points a rounding error outside the sphere are already projected
                if dist <= radius * (1.0 + ROUNDING) {
                    x.clone()
                } else {
                    let s = radius / dist;
                    x.map(|v| center + s * (v - center))
                }
            }
            ConvexSet::Hyperplane { normal, offset } => {
                let gap = x.dot(normal)? - offset;
                if gap.abs() <= ROUNDING * (offset.abs() + x.l2_norm() * normal.l2_norm()) {
                    return Ok(x.clone());
                }
                let t = gap / normal.sum_sq();
                let mut out = x.clone();
                out.axpy(-t, normal)?;
                out
            }
            ConvexSet::Mean { value } => {
                let shift = x.mean() - value;
                if shift.abs() <= ROUNDING * (value.abs() + x.max_abs()) {
                    return Ok(x.clone());
                }
                x.map(|v| v - shift)
            }
        })
    }

    /// Squared Euclidean distance to the set.
    pub fn sq_distance(&self, x: &Image) -> Result<f64> {
        Ok(x.sub(&self.project(x)?)?.sum_sq())
    }

    pub fn contains(&self, x: &Image, tol: f64) -> Result<bool> {
        Ok(self.sq_distance(x)?.sqrt() <= tol)
    }
}
