use std::fmt::Write as _;

use fire_core::diagnostics::{combined_fixed_point_trace, fixed_point_trace};
use rayon::prelude::*;

use super::{image_dir, load_problems, write_text, Problem};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::plot::line_chart;

pub type Series = Vec<(String, Vec<f64>)>;

fn traces(cfg: &ExperimentConfig, problem: &Problem) -> Result<Series, CliError> {
    let iters = cfg.fixedpoint.iters;
    let x0 = &problem.reference;
    let mut series = Vec::new();
    for (n, term) in problem.priors.iter().enumerate() {
        let rng = problem.rng.derive(&format!("fixedpoint/n={n}"));
        let label = format!("p{}_{}", n + 1, cfg.priors[n].restorer);
        for compose in [true, false] {
            let trace = fixed_point_trace(x0, term, iters, compose, &rng).map_err(CliError::solve)?;
            let suffix = if compose { "on" } else { "off" };
            series.push((format!("{label}_{suffix}"), trace));
        }
    }
    if problem.priors.len() > 1 {
        let weights: Vec<f64> = problem.priors.iter().map(|p| p.gamma).collect();
        let rng = problem.rng.derive("fixedpoint/combined");
        let trace =
            combined_fixed_point_trace(x0, &problem.priors, &weights, iters, &rng).map_err(CliError::solve)?;
        series.push(("combined".into(), trace));
    }
    Ok(series)
}

pub fn to_csv(series: &Series) -> String {
    let mut out = String::from("iter");
    for (name, _) in series {
        write!(out, ",{name}").unwrap();
    }
    out.push('\n');
    let len = series.first().map_or(0, |s| s.1.len());
    for k in 0..len {
        write!(out, "{k}").unwrap();
        for (_, values) in series {
            write!(out, ",{:.6}", values[k]).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Compose-on and compose-off PSNR traces for each prior, plus the
/// weighted combination when there are several priors.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<Series>, CliError> {
    if cfg.priors.is_empty() {
        return Err(CliError::config("fixedpoint needs at least one prior"));
    }
    if cfg.fixedpoint.iters == 0 {
        return Err(CliError::config("fixedpoint iters must be at least 1"));
    }
    let problems = load_problems(cfg)?;
    problems
        .par_iter()
        .map(|p| {
            let series = traces(cfg, p)?;
            let dir = image_dir(cfg, &p.name)?;
            write_text(&dir.join("fixedpoint.csv"), &to_csv(&series))?;
            write_text(
                &dir.join("fixedpoint.svg"),
                &line_chart(&format!("fixed-point iteration: {}", p.name), "PSNR vs x0 (dB)", &series),
            )?;
            for (name, values) in &series {
                println!(
                    "{:<12} {:<24} first {:>7.2} dB  last {:>7.2} dB",
                    p.name,
                    name,
                    values.get(1).copied().unwrap_or(f64::NAN),
                    values.last().copied().unwrap_or(f64::NAN)
                );
            }
            Ok(series)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}
