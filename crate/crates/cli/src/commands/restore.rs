use std::fmt::Write as _;

use rayon::prelude::*;

use super::{image_dir, load_problems, mean, write_png, write_text, Problem};
use crate::config::ExperimentConfig;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct ImageScores {
    pub name: String,
    pub pinv: (f64, f64),
    pub fire: (f64, f64),
}

fn restore_one(cfg: &ExperimentConfig, problem: &Problem) -> Result<ImageScores, CliError> {
    let dir = image_dir(cfg, &problem.name)?;
    let pinv = problem.pseudo_inverse()?;
    let solution = problem.solve(cfg, problem.priors.clone())?;

    write_png(&problem.degraded_view()?, &dir.join("degraded.png"))?;
    write_png(&pinv, &dir.join("pinv.png"))?;
    write_png(&solution.x, &dir.join("restored.png"))?;
    write_text(
        &dir.join("trace.csv"),
        &solution.trace.to_csv(problem.priors.len(), cfg.timing),
    )?;

    let scores = ImageScores {
        name: problem.name.clone(),
        pinv: problem.score(&pinv)?,
        fire: problem.score(&solution.x)?,
    };
    let mut metrics = String::from("method,psnr,ssim\n");
    if problem.y.shape() == problem.reference.shape() {
        let degraded = problem.score(&problem.degraded_view()?)?;
        writeln!(metrics, "degraded,{:.6},{:.6}", degraded.0, degraded.1).unwrap();
    }
    writeln!(metrics, "pinv,{:.6},{:.6}", scores.pinv.0, scores.pinv.1).unwrap();
    writeln!(metrics, "fire,{:.6},{:.6}", scores.fire.0, scores.fire.1).unwrap();
    write_text(&dir.join("metrics.csv"), &metrics)?;
    Ok(scores)
}

/// Restores every input image and writes a summary CSV.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<ImageScores>, CliError> {
    let problems = load_problems(cfg)?;
    let scores: Vec<ImageScores> = problems
        .par_iter()
        .map(|p| restore_one(cfg, p))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<_, _>>()?;

    let mut summary = String::from("image,pinv_psnr,pinv_ssim,fire_psnr,fire_ssim\n");
    for s in &scores {
        writeln!(
            summary,
            "{},{:.6},{:.6},{:.6},{:.6}",
            s.name, s.pinv.0, s.pinv.1, s.fire.0, s.fire.1
        )
        .unwrap();
    }
    write_text(&cfg.output_dir().join("summary.csv"), &summary)?;

    println!("{:<20} {:>10} {:>10} {:>10} {:>10}", "image", "pinv dB", "pinv ssim", "fire dB", "fire ssim");
    for s in &scores {
        println!(
            "{:<20} {:>10.2} {:>10.4} {:>10.2} {:>10.4}",
            s.name, s.pinv.0, s.pinv.1, s.fire.0, s.fire.1
        );
    }
    println!(
        "{:<20} {:>10.2} {:>10.4} {:>10.2} {:>10.4}",
        "mean",
        mean(scores.iter().map(|s| s.pinv.0)),
        mean(scores.iter().map(|s| s.pinv.1)),
        mean(scores.iter().map(|s| s.fire.0)),
        mean(scores.iter().map(|s| s.fire.1)),
    );
    Ok(scores)
}
