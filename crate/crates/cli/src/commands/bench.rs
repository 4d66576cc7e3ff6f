use std::cmp::Ordering;
use std::fmt::Write as _;

use fire_core::datafit::DataFit;
use fire_core::engine::{run_baseline, Baseline};
use rayon::prelude::*;

use super::{load_problems, mean, write_text, Problem};
use crate::config::ExperimentConfig;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: String,
    pub priors: String,
    pub psnr: f64,
    pub ssim: f64,
}

#[derive(Debug, Clone)]
struct Cell {
    method: String,
    set: Vec<usize>,
}

fn cells(cfg: &ExperimentConfig) -> Result<Vec<Cell>, CliError> {
    let n = cfg.priors.len();
    let sets = match &cfg.bench.prior_sets {
        Some(sets) => sets.clone(),
        None => {
            let mut sets: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
            if n > 1 {
                sets.push((0..n).collect());
            }
            sets
        }
    };
    if sets.iter().flatten().any(|&i| i >= n) {
        return Err(CliError::config("bench prior_sets index out of range"));
    }
    let mut out = Vec::new();
    for method in &cfg.bench.methods {
        match method.as_str() {
            "pinv" => out.push(Cell {
                method: method.clone(),
                set: vec![],
            }),
            "fire" => out.extend(sets.iter().map(|s| Cell {
                method: method.clone(),
                set: s.clone(),
            })),
            "pnp_hqs" | "red" | "red_printed" => out.extend(sets.iter().filter(|s| s.len() == 1).map(|s| Cell {
                method: method.clone(),
                set: s.clone(),
            })),
            other => return Err(CliError::config(format!("unknown bench method {other:?}"))),
        }
    }
    if out.is_empty() {
        return Err(CliError::config("bench matrix is empty"));
    }
    Ok(out)
}

fn run_cell(cfg: &ExperimentConfig, problem: &Problem, cell: &Cell) -> Result<(f64, f64), CliError> {
    let x = match cell.method.as_str() {
        "pinv" => problem.pseudo_inverse()?,
        "fire" => {
            let priors = cell.set.iter().map(|&i| problem.priors[i].clone()).collect();
            problem.solve(cfg, priors)?.x
        }
        method => {
            let n = cell.set[0];
            let term = &problem.priors[n];
            let (h, w, _) = problem.reference.shape();
            let context = term
                .spec
                .sample(&mut problem.rng.derive(&format!("bench/context/n={n}")), h, w)
                .map_err(CliError::solve)?;
            let df = DataFit::new(problem.op.clone(), problem.y.clone(), cfg.solver.lambda).map_err(CliError::input)?;
            let baseline = match method {
                "pnp_hqs" => Baseline::PnpHqs,
                "red" => Baseline::Red { residual_form: true },
                _ => Baseline::Red { residual_form: false },
            };
            run_baseline(
                baseline,
                &df,
                &term.restorer,
                &context,
                cfg.bench.red_gamma,
                cfg.solver.iters,
                &problem.pseudo_inverse()?,
            )
            .map_err(|e| CliError::solve(e).context(&format!("{method} on {}", problem.name)))?
        }
    };
    problem.score(&x)
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("rank,method,priors,psnr,ssim\n");
    for (i, r) in rows.iter().enumerate() {
        writeln!(out, "{},{},{},{:.6},{:.6}", i + 1, r.method, r.priors, r.psnr, r.ssim).unwrap();
    }
    out
}

/// Runs the method x prior-set matrix and ranks by mean PSNR.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<BenchRow>, CliError> {
    let cells = cells(cfg)?;
    let problems = load_problems(cfg)?;
    let scores: Vec<Vec<(f64, f64)>> = cells
        .par_iter()
        .map(|cell| problems.iter().map(|p| run_cell(cfg, p, cell)).collect::<Result<Vec<_>, _>>())
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<_, _>>()?;

    let mut rows: Vec<BenchRow> = cells
        .iter()
        .zip(&scores)
        .map(|(cell, s)| BenchRow {
            method: cell.method.clone(),
            priors: cell
                .set
                .iter()
                .map(|&i| cfg.priors[i].restorer.as_str())
                .collect::<Vec<_>>()
                .join("+"),
            psnr: mean(s.iter().map(|v| v.0)),
            ssim: mean(s.iter().map(|v| v.1)),
        })
        .collect();
    rows.sort_by(|a, b| {
        b.psnr
            .partial_cmp(&a.psnr)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.method.cmp(&b.method))
            .then_with(|| a.priors.cmp(&b.priors))
    });
    let csv = to_csv(&rows);
    std::fs::create_dir_all(cfg.output_dir())?;
    write_text(&cfg.output_dir().join("bench.csv"), &csv)?;
    print!("{csv}");
    Ok(rows)
}
