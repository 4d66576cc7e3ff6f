use crate::degradations::Mask;
use crate::error::{FireError, Result};
use crate::tensor::Image;

/// Largest residual accepted as converged.
pub const INPAINT_TOLERANCE: f64 = 1e-6;

/// Harmonic inpainting: observed pixels are copied, missing pixels solve the
/// discrete Laplace equation on the periodic grid by Gauss-Seidel sweeps
/// until the max stencil residual drops below [`INPAINT_TOLERANCE`] or
/// `inner_iters` sweeps have run. Output is clamped to `[0, 1]`.
pub fn harmonic_inpaint(y: &Image, mask: &Mask, inner_iters: usize) -> Result<Image> {
    let (h, w, _) = y.shape();
    if (mask.height(), mask.width()) != (h, w) {
        return Err(FireError::ShapeMismatch {
            expected: (mask.height(), mask.width(), y.channels()),
            got: y.shape(),
        });
    }
    if mask.observed_count() == 0 {
        return Err(FireError::NothingObserved);
    }
    let missing: Vec<usize> = (0..h * w).filter(|&p| !mask.observed()[p]).collect();
    if missing.is_empty() {
        return Ok(y.clamp01());
    }
    let neighbours = |p: usize| {
        let (i, j) = (p / w, p % w);
        [
            ((i + h - 1) % h) * w + j,
            ((i + 1) % h) * w + j,
            i * w + (j + w - 1) % w,
            i * w + (j + 1) % w,
        ]
    };
    let out = y.map_planes(h, w, |plane| {
        let mut u = plane.to_vec();
        let observed_mean = plane
            .iter()
            .zip(mask.observed())
            .filter(|(_, &o)| o)
            .map(|(v, _)| v)
            .sum::<f64>()
            / mask.observed_count() as f64;
        for &p in &missing {
            u[p] = observed_mean;
        }
        for _ in 0..inner_iters {
            for &p in &missing {
                let nb = neighbours(p);
                u[p] = 0.25 * (u[nb[0]] + u[nb[1]] + u[nb[2]] + u[nb[3]]);
            }
            let residual = missing.iter().fold(0.0f64, |m, &p| {
                let nb = neighbours(p);
                m.max((u[p] - 0.25 * (u[nb[0]] + u[nb[1]] + u[nb[2]] + u[nb[3]])).abs())
            });
            if residual <= INPAINT_TOLERANCE {
                break;
            }
        }
        Ok(u)
    })?;
    Ok(out.clamp01())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Rng;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn full_mask_is_identity() {
        let mut rng = Rng::new(1);
        let y = Image::from_fn(5, 5, 3, |_, _, _| rng.uniform(0.0, 1.0));
        assert_eq!(harmonic_inpaint(&y, &Mask::full(5, 5), 10).unwrap(), y);
    }

    #[test]
    fn single_hole_is_neighbour_average() {
        let mut y = Image::from_fn(5, 5, 1, |i, j, _| (i * 5 + j) as f64 / 30.0);
        y.set(2, 2, 0, 0.0);
        let mut obs = vec![true; 25];
        obs[12] = false;
        let out = harmonic_inpaint(&y, &Mask::new(5, 5, obs).unwrap(), 50).unwrap();
        let (a, b, c, d) = (y.get(1, 2, 0), y.get(3, 2, 0), y.get(2, 1, 0), y.get(2, 3, 0));
        assert!((out.get(2, 2, 0) - (a + b + c + d) / 4.0).abs() < 1e-12);
    }

    #[test]
    fn nothing_observed_is_an_error() {
        let y = Image::zeros(3, 3, 1);
        let m = Mask::new(3, 3, vec![false; 9]).unwrap();
        assert!(matches!(harmonic_inpaint(&y, &m, 10), Err(FireError::NothingObserved)));
    }

    #[test]
    fn matches_dense_laplace_solve() {
        let (h, w) = (8, 8);
        let mut rng = Rng::new(30);
        let y = Image::from_fn(h, w, 1, |_, _, _| rng.uniform(0.0, 1.0));
        let mut mrng = Rng::new(31);
        let mask = Mask::new(h, w, (0..h * w).map(|_| !mrng.bernoulli(0.3)).collect()).unwrap();
        let out = harmonic_inpaint(&y, &mask, 10_000).unwrap();

        let missing: Vec<usize> = (0..h * w).filter(|&p| !mask.observed()[p]).collect();
        let index = |p: usize| missing.iter().position(|&q| q == p);
        let m = missing.len();
        let mut a = DMatrix::<f64>::zeros(m, m);
        let mut b = DVector::<f64>::zeros(m);
        for (r, &p) in missing.iter().enumerate() {
            let (i, j) = (p / w, p % w);
            a[(r, r)] = 4.0;
            for q in [
                ((i + h - 1) % h) * w + j,
                ((i + 1) % h) * w + j,
                i * w + (j + w - 1) % w,
                i * w + (j + 1) % w,
            ] {
                match index(q) {
                    Some(c) => a[(r, c)] -= 1.0,
                    None => b[r] += y.data()[q],
                }
            }
        }
        let sol = a.lu().solve(&b).unwrap();
        for (r, &p) in missing.iter().enumerate() {
            assert!((out.data()[p] - sol[r]).abs() < 1e-5);
        }
    }
}
