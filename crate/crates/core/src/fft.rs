//! Two-dimensional FFT helpers over row-major planes.

use std::cell::RefCell;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn transform(data: &mut [Complex64], height: usize, width: usize, inverse: bool) {
    PLANNER.with(|planner| {
        let mut planner = planner.borrow_mut();
        let (row_fft, col_fft) = if inverse {
            (planner.plan_fft_inverse(width), planner.plan_fft_inverse(height))
        } else {
            (planner.plan_fft_forward(width), planner.plan_fft_forward(height))
        };
        for row in data.chunks_exact_mut(width) {
            row_fft.process(row);
        }
        let mut column = vec![Complex64::default(); height];
        for j in 0..width {
            for i in 0..height {
                column[i] = data[i * width + j];
            }
            col_fft.process(&mut column);
            for i in 0..height {
                data[i * width + j] = column[i];
            }
        }
    });
}

/// Unnormalized forward 2-D DFT of a real plane.
pub fn fft2(plane: &[f64], height: usize, width: usize) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = plane.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform(&mut data, height, width, false);
    data
}

/// Inverse 2-D DFT (normalized by `1 / (height * width)`), real part only.
pub fn ifft2_real(mut spectrum: Vec<Complex64>, height: usize, width: usize) -> Vec<f64> {
    transform(&mut spectrum, height, width, true);
    let norm = 1.0 / (height * width) as f64;
    spectrum.into_iter().map(|c| c.re * norm).collect()
}
