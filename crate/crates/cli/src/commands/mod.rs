pub mod bench;
pub mod fixedpoint;
pub mod probe;
pub mod restore;
pub mod serve_check;

use std::fs;
use std::path::{Path, PathBuf};

use fire_core::degradations::LinearOp;
use fire_core::engine::{fire_hqs_tracked, initial_estimate, Solution};
use fire_core::restorers::PriorTerm;
use fire_core::tensor::io::{read_image, write_image};
use fire_core::tensor::{psnr, ssim, Image, Rng};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::CliError;

/// Overrides applied on top of a loaded config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

pub fn load_config(path: &Path, overrides: &Overrides) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = overrides.seed {
        cfg.solver.seed = seed;
    }
    if let Some(out) = &overrides.out {
        cfg.outputs = Some(std::env::current_dir()?.join(out));
    }
    Ok(cfg)
}

/// One ground-truth image with its synthetic measurement.
pub struct Problem {
    pub name: String,
    pub reference: Image,
    pub op: LinearOp,
    pub y: Image,
    pub priors: Vec<PriorTerm>,
    pub rng: Rng,
}

impl Problem {
    /// Loads `path` and simulates `y = A x + n`. Masks and noise come from
    /// streams named after the image, so results do not depend on the order
    /// in which images are processed.
    pub fn load(cfg: &ExperimentConfig, path: &Path) -> Result<Self, CliError> {
        let reference = read_image(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("image")
            .to_string();
        let rng = Rng::new(cfg.solver.seed).derive(&format!("image/{name}"));
        let op = cfg.operator(reference.height(), reference.width(), &mut rng.derive("mask"))?;
        let mut y = op.apply(&reference).map_err(CliError::input)?;
        let sigma = cfg.problem.noise_sigma;
        if sigma > 0.0 {
            let mut noise = rng.derive("noise");
            for v in y.data_mut() {
                *v += sigma * noise.normal();
            }
        }
        let priors = cfg.prior_terms(&op)?;
        Ok(Problem {
            name,
            reference,
            op,
            y,
            priors,
            rng,
        })
    }

    pub fn pseudo_inverse(&self) -> Result<Image, CliError> {
        initial_estimate(&self.y, &self.op).map_err(CliError::solve)
    }

    /// Observation mapped back to the signal grid for display.
    pub fn degraded_view(&self) -> Result<Image, CliError> {
        match &self.op {
            LinearOp::Mask(_) => self.op.adjoint(&self.y).map_err(CliError::solve),
            _ => Ok(self.y.clone()),
        }
    }

    pub fn solve(&self, cfg: &ExperimentConfig, priors: Vec<PriorTerm>) -> Result<Solution, CliError> {
        let solver = cfg.solver(priors)?;
        let x0 = self.pseudo_inverse()?;
        fire_hqs_tracked(&self.y, &self.op, &solver, &x0, Some(&self.reference))
            .map_err(|e| CliError::solve(e).context(&self.name))
    }

    pub fn score(&self, x: &Image) -> Result<(f64, f64), CliError> {
        Ok((
            psnr(x, &self.reference, 1.0).map_err(CliError::solve)?,
            ssim(x, &self.reference).map_err(CliError::solve)?,
        ))
    }
}

/// Loads every input, in parallel, keeping input order.
pub fn load_problems(cfg: &ExperimentConfig) -> Result<Vec<Problem>, CliError> {
    cfg.input_files()?
        .par_iter()
        .map(|p| Problem::load(cfg, p))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

pub fn image_dir(cfg: &ExperimentConfig, name: &str) -> Result<PathBuf, CliError> {
    let dir = cfg.output_dir().join(name);
    fs::create_dir_all(&dir)
        .map_err(|e| CliError::config(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

pub fn write_png(img: &Image, path: &Path) -> Result<(), CliError> {
    write_image(&img.clamp01(), path).map_err(|e| CliError::solver(format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::solver(format!("{}: {e}", path.display())))
}

pub fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn emitted_png_round_trips_within_one_level() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.png");
        let mut rng = Rng::new(3);
        let x = Image::from_fn(9, 7, 3, |_, _, _| rng.uniform(-0.1, 1.1));
        write_png(&x, &path).unwrap();
        let back = read_image(&path).unwrap();
        let worst = x
            .data()
            .iter()
            .zip(back.data())
            .map(|(a, b)| (a.clamp(0.0, 1.0) - b).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1.0 / 255.0, "{worst}");
    }
}
