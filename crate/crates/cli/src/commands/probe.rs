use std::fmt::Write as _;

use fire_core::diagnostics::{prior_loss_probe, ProbeGrid, ProbeResult};
use fire_core::restorers::tv_denoise;
use rayon::prelude::*;

use super::{load_problems, write_text};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::plot::heatmap;

const PRESMOOTH_ITERS: usize = 200;

fn matrix_csv(grid: &ProbeGrid, values: &[Vec<f64>]) -> String {
    let mut out = String::from("sigma_blur");
    for s in &grid.sigma_noise {
        write!(out, ",noise_{s}").unwrap();
    }
    out.push('\n');
    for (b, row) in grid.sigma_blur.iter().zip(values) {
        write!(out, "{b}").unwrap();
        for v in row {
            write!(out, ",{v:.6}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Averages per-image cell means; standard errors combine as independent.
fn average(results: &[ProbeResult]) -> ProbeResult {
    let n = results.len() as f64;
    let fold = |pick: &dyn Fn(&ProbeResult, usize, usize) -> f64| -> Vec<Vec<f64>> {
        let first = &results[0].mean;
        (0..first.len())
            .map(|i| (0..first[i].len()).map(|j| results.iter().map(|r| pick(r, i, j)).sum::<f64>() / n).collect())
            .collect()
    };
    let mean = fold(&|r, i, j| r.mean[i][j]);
    let var = fold(&|r, i, j| r.stderr[i][j].powi(2));
    ProbeResult {
        mean,
        stderr: var.into_iter().map(|row| row.into_iter().map(|v| (v / n).sqrt()).collect()).collect(),
    }
}

/// Prior-loss heatmap per prior, averaged over all inputs.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<ProbeResult>, CliError> {
    let section = cfg
        .probe
        .as_ref()
        .ok_or_else(|| CliError::config("probe command needs a \"probe\" section"))?;
    if cfg.priors.is_empty() {
        return Err(CliError::config("probe needs at least one prior"));
    }
    let mut grid = ProbeGrid::new(section.sigma_blur.clone(), section.sigma_noise.clone());
    if let Some(s) = section.samples {
        grid.samples = s;
    }
    grid.validate().map_err(CliError::input)?;

    let problems = load_problems(cfg)?;
    let out_dir = cfg.output_dir();
    std::fs::create_dir_all(&out_dir)?;
    let mut all = Vec::new();
    for n in 0..cfg.priors.len() {
        let per_image: Vec<ProbeResult> = problems
            .par_iter()
            .map(|p| {
                let x = match section.presmooth {
                    Some(s) => tv_denoise(&p.reference, s, PRESMOOTH_ITERS),
                    None => p.reference.clone(),
                };
                prior_loss_probe(&x, &p.priors[n], &grid, &p.rng.derive(&format!("probe/n={n}")))
                    .map_err(CliError::solve)
            })
            .collect::<Vec<_>>()
            .into_iter()
            .collect::<Result<_, _>>()?;
        let result = average(&per_image);
        let stem = format!("probe_p{}", n + 1);
        write_text(&out_dir.join(format!("{stem}.csv")), &matrix_csv(&grid, &result.mean))?;
        write_text(&out_dir.join(format!("{stem}_stderr.csv")), &matrix_csv(&grid, &result.stderr))?;
        write_text(
            &out_dir.join(format!("{stem}.svg")),
            &heatmap(
                &format!("prior loss d(y): {}", cfg.priors[n].restorer),
                &grid.sigma_blur,
                &grid.sigma_noise,
                &result.mean,
            ),
        )?;
        if result.mean.len() == 1 && result.mean[0].len() == 1 {
            println!("{} d = {:.6} (stderr {:.6})", cfg.priors[n].restorer, result.mean[0][0], result.stderr[0][0]);
        } else {
            println!("{}: {stem}.csv", cfg.priors[n].restorer);
            print!("{}", matrix_csv(&grid, &result.mean));
        }
        all.push(result);
    }
    Ok(all)
}
