//! Versioned JSON experiment configuration.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use fire_core::datafit::ProxMethod;
use fire_core::degradations::{gaussian_kernel, default_kernel_size, DegradationSpec, Kernel, LinearOp, Mask, MaskSource, Range};
use fire_core::engine::{Mode, SolverConfig, StepSchedule};
use fire_core::restorers::{PriorTerm, Restorer};
use serde::Deserialize;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// A scalar or a `[lo, hi]` pair.
#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum RangeValue {
    Fixed(f64),
    Span([f64; 2]),
}

impl Default for RangeValue {
    fn default() -> Self {
        RangeValue::Fixed(0.0)
    }
}

impl From<RangeValue> for Range {
    fn from(v: RangeValue) -> Range {
        match v {
            RangeValue::Fixed(x) => Range::fixed(x),
            RangeValue::Span([lo, hi]) => Range::new(lo, hi),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpecConfig {
    Noise {
        sigma: RangeValue,
    },
    Blur {
        kernel_sigma: RangeValue,
        #[serde(default)]
        sigma: RangeValue,
    },
    Decimation {
        factor: usize,
        #[serde(default)]
        sigma: RangeValue,
    },
    Mask {
        #[serde(default)]
        drop: Option<RangeValue>,
        #[serde(default)]
        file: Option<PathBuf>,
        #[serde(default)]
        sigma: RangeValue,
    },
    Jpeg {
        quality: [u8; 2],
        #[serde(default)]
        sigma: RangeValue,
    },
    /// The problem's own forward operator, noiseless.
    Measurement,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorConfig {
    pub restorer: String,
    pub degradation: SpecConfig,
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Identity,
    Blur,
    Decimation,
    Mask,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub operator: OperatorKind,
    #[serde(default)]
    pub kernel_sigma: Option<f64>,
    /// Text kernel file; overrides `kernel_sigma`.
    #[serde(default)]
    pub kernel_file: Option<PathBuf>,
    #[serde(default)]
    pub factor: Option<usize>,
    /// Fraction of pixels removed by a random mask.
    #[serde(default)]
    pub drop: Option<f64>,
    #[serde(default)]
    pub mask_file: Option<PathBuf>,
    #[serde(default)]
    pub noise_sigma: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleConfig {
    Constant { scale: f64 },
    Polynomial { gamma0: f64, exponent: f64 },
}

fn default_lambda() -> f64 {
    1.0
}

fn default_iters() -> usize {
    30
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_iters")]
    pub iters: usize,
    #[serde(default)]
    pub mode: Option<String>,
    #[serde(default)]
    pub schedule: Option<ScheduleConfig>,
    #[serde(default)]
    pub return_u: Option<bool>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub prox: Option<String>,
    #[serde(default)]
    pub f_samples: Option<usize>,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            lambda: default_lambda(),
            iters: default_iters(),
            mode: None,
            schedule: None,
            return_u: None,
            seed: 0,
            prox: None,
            f_samples: None,
        }
    }
}

fn default_fixedpoint_iters() -> usize {
    20
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedPointSection {
    #[serde(default = "default_fixedpoint_iters")]
    pub iters: usize,
}

impl Default for FixedPointSection {
    fn default() -> Self {
        FixedPointSection {
            iters: default_fixedpoint_iters(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    pub sigma_blur: Vec<f64>,
    pub sigma_noise: Vec<f64>,
    #[serde(default)]
    pub samples: Option<usize>,
    /// TV strength used to smooth each input before probing.
    #[serde(default)]
    pub presmooth: Option<f64>,
}

fn default_methods() -> Vec<String> {
    vec!["fire".into(), "pnp_hqs".into(), "red".into()]
}

fn default_red_gamma() -> f64 {
    0.5
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSection {
    #[serde(default = "default_methods")]
    pub methods: Vec<String>,
    /// Prior subsets by index into `priors`; defaults to each prior alone
    /// plus the full ensemble.
    #[serde(default)]
    pub prior_sets: Option<Vec<Vec<usize>>>,
    #[serde(default = "default_red_gamma")]
    pub red_gamma: f64,
}

impl Default for BenchSection {
    fn default() -> Self {
        BenchSection {
            methods: default_methods(),
            prior_sets: None,
            red_gamma: default_red_gamma(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Checked against [`SCHEMA_VERSION`] before deserializing.
    #[allow(dead_code)]
    pub version: u32,
    pub problem: ProblemConfig,
    #[serde(default)]
    pub priors: Vec<PriorConfig>,
    #[serde(default)]
    pub solver: SolverSection,
    pub inputs: Vec<PathBuf>,
    #[serde(default)]
    pub outputs: Option<PathBuf>,
    /// Adds per-iteration wall-clock milliseconds to trace CSVs.
    #[serde(default)]
    pub timing: bool,
    #[serde(default)]
    pub fixedpoint: FixedPointSection,
    #[serde(default)]
    pub probe: Option<ProbeSection>,
    #[serde(default)]
    pub bench: BenchSection,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| e.context(&path.display().to_string()))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::config(format!("invalid JSON: {e}")))?;
        match value.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == SCHEMA_VERSION as u64 => {}
            Some(v) => return Err(CliError::config(format!("unsupported config version {v}"))),
            None => return Err(CliError::config("config needs an integer \"version\" field")),
        }
        serde_json::from_value(value).map_err(|e| CliError::config(e.to_string()))
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    /// Input images, with directories expanded to their image files in name
    /// order.
    pub fn input_files(&self) -> Result<Vec<PathBuf>, CliError> {
        let mut files = Vec::new();
        for entry in &self.inputs {
            let path = self.resolve(entry);
            if path.is_dir() {
                let mut found: Vec<PathBuf> = fs::read_dir(&path)
                    .map_err(|e| CliError::config(format!("cannot list {}: {e}", path.display())))?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| {
                        matches!(
                            p.extension().and_then(|e| e.to_str()),
                            Some("png" | "ppm" | "pgm" | "firt")
                        )
                    })
                    .collect();
                found.sort();
                files.extend(found);
            } else if path.is_file() {
                files.push(path);
            } else {
                return Err(CliError::config(format!("input not found: {}", path.display())));
            }
        }
        if files.is_empty() {
            return Err(CliError::config("no input images"));
        }
        Ok(files)
    }

    /// Builds the forward operator for an image of the given size; random
    /// masks draw from `rng`.
    pub fn operator(&self, height: usize, width: usize, rng: &mut fire_core::tensor::Rng) -> Result<LinearOp, CliError> {
        let p = &self.problem;
        let op = match p.operator {
            OperatorKind::Identity => LinearOp::Identity,
            OperatorKind::Blur => match (&p.kernel_file, p.kernel_sigma) {
                (Some(file), _) => LinearOp::convolution(Kernel::load(self.resolve(file)).map_err(CliError::input)?),
                (None, Some(s)) => {
                    LinearOp::convolution(gaussian_kernel(s, default_kernel_size(s)).map_err(CliError::input)?)
                }
                (None, None) => return Err(CliError::config("blur problem needs kernel_sigma or kernel_file")),
            },
            OperatorKind::Decimation => {
                LinearOp::decimation(p.factor.ok_or_else(|| CliError::config("decimation problem needs factor"))?)
                    .map_err(CliError::input)?
            }
            OperatorKind::Mask => match (&p.mask_file, p.drop) {
                (Some(file), _) => {
                    let mask = Mask::load(self.resolve(file)).map_err(CliError::input)?;
                    if (mask.height(), mask.width()) != (height, width) {
                        return Err(CliError::config(format!(
                            "mask is {}x{} but the image is {height}x{width}",
                            mask.height(),
                            mask.width()
                        )));
                    }
                    LinearOp::mask(mask)
                }
                (None, Some(drop)) => {
                    if !(0.0..1.0).contains(&drop) {
                        return Err(CliError::config(format!("mask drop must lie in [0, 1), got {drop}")));
                    }
                    let observed = (0..height * width).map(|_| !rng.bernoulli(drop)).collect();
                    LinearOp::mask(Mask::new(height, width, observed).map_err(CliError::input)?)
                }
                (None, None) => return Err(CliError::config("mask problem needs drop or mask_file")),
            },
        };
        Ok(op)
    }

    fn spec(&self, s: &SpecConfig, op: &LinearOp) -> Result<DegradationSpec, CliError> {
        Ok(match s {
            SpecConfig::Noise { sigma } => DegradationSpec::AdditiveNoise { sigma: (*sigma).into() },
            SpecConfig::Blur { kernel_sigma, sigma } => DegradationSpec::Blur {
                kernel_sigma: (*kernel_sigma).into(),
                sigma: (*sigma).into(),
            },
            SpecConfig::Decimation { factor, sigma } => DegradationSpec::Decimation {
                factor: *factor,
                sigma: (*sigma).into(),
            },
            SpecConfig::Mask { drop, file, sigma } => {
                let source = match (file, drop) {
                    (Some(f), _) => MaskSource::Fixed(Mask::load(self.resolve(f)).map_err(CliError::input)?),
                    (None, Some(d)) => MaskSource::Random { drop: (*d).into() },
                    (None, None) => return Err(CliError::config("mask degradation needs drop or file")),
                };
                DegradationSpec::Mask {
                    source,
                    sigma: (*sigma).into(),
                }
            }
            SpecConfig::Jpeg { quality, sigma } => DegradationSpec::JpegSurrogate {
                quality: (quality[0], quality[1]),
                sigma: (*sigma).into(),
            },
            SpecConfig::Measurement => DegradationSpec::Fixed {
                op: op.clone(),
                sigma: 0.0,
            },
        })
    }

    /// Instantiates every configured prior for operator `op`.
    pub fn prior_terms(&self, op: &LinearOp) -> Result<Vec<PriorTerm>, CliError> {
        self.priors
            .iter()
            .map(|p| {
                let restorer = Restorer::from_id(&p.restorer)
                    .map_err(|e| CliError::config(format!("prior {:?}: {e}", p.restorer)))?;
                PriorTerm::new(Arc::new(restorer), self.spec(&p.degradation, op)?, p.gamma)
                    .map_err(|e| CliError::config(format!("prior {:?}: {e}", p.restorer)))
            })
            .collect()
    }

    pub fn solver(&self, priors: Vec<PriorTerm>) -> Result<SolverConfig, CliError> {
        let s = &self.solver;
        let mut cfg = SolverConfig::new(priors, s.lambda, s.iters);
        if let Some(mode) = &s.mode {
            cfg.mode = mode.parse::<Mode>().map_err(|e| CliError::config(e.to_string()))?;
        }
        cfg.schedule = match s.schedule {
            None => StepSchedule::default(),
            Some(ScheduleConfig::Constant { scale }) => StepSchedule::Constant { scale },
            Some(ScheduleConfig::Polynomial { gamma0, exponent }) => StepSchedule::Polynomial { gamma0, exponent },
        };
        if let Some(prox) = &s.prox {
            cfg.prox = prox.parse::<ProxMethod>().map_err(|e| CliError::config(e.to_string()))?;
        }
        cfg.return_u = s.return_u;
        cfg.seed = s.seed;
        cfg.f_samples = s.f_samples;
        cfg.validate().map_err(|e| CliError::config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(self.outputs.as_deref().unwrap_or(Path::new("out")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "version": 1,
        "problem": {"operator": "blur", "kernel_sigma": 1.5, "noise_sigma": 0.01},
        "priors": [
            {"restorer": "wiener", "degradation": {"type": "blur", "kernel_sigma": [1, 2], "sigma": [0, 0.01]}, "gamma": 0.5},
            {"restorer": "tv", "degradation": {"type": "noise", "sigma": 0.02}, "gamma": 0.3}
        ],
        "solver": {"lambda": 20, "iters": 5, "schedule": {"type": "polynomial", "gamma0": 1, "exponent": 0.75}},
        "inputs": ["a.png"]
    }"#;

    #[test]
    fn parses_and_builds() {
        let cfg = ExperimentConfig::parse(MINIMAL).unwrap();
        let op = cfg.operator(8, 8, &mut fire_core::tensor::Rng::new(0)).unwrap();
        let priors = cfg.prior_terms(&op).unwrap();
        assert_eq!(priors.len(), 2);
        let solver = cfg.solver(priors).unwrap();
        assert_eq!(solver.iters, 5);
        assert_eq!(solver.schedule, StepSchedule::Polynomial { gamma0: 1.0, exponent: 0.75 });
    }

    #[test]
    fn version_is_required() {
        let text = MINIMAL.replace("\"version\": 1,", "");
        assert!(ExperimentConfig::parse(&text).is_err());
        let text = MINIMAL.replace("\"version\": 1", "\"version\": 2");
        assert!(ExperimentConfig::parse(&text).unwrap_err().to_string().contains("version 2"));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = MINIMAL.replace("\"noise_sigma\"", "\"noise\"");
        assert!(ExperimentConfig::parse(&text).is_err());
    }

    #[test]
    fn weights_above_one_are_rejected() {
        let text = MINIMAL.replace("\"gamma\": 0.3", "\"gamma\": 0.6");
        let cfg = ExperimentConfig::parse(&text).unwrap();
        let op = cfg.operator(8, 8, &mut fire_core::tensor::Rng::new(0)).unwrap();
        let priors = cfg.prior_terms(&op).unwrap();
        assert!(cfg.solver(priors).is_err());
    }

    #[test]
    fn incompatible_prior_is_a_config_error() {
        let text = MINIMAL.replace("\"restorer\": \"wiener\"", "\"restorer\": \"inpaint\"");
        let cfg = ExperimentConfig::parse(&text).unwrap();
        let err = cfg.prior_terms(&LinearOp::Identity).unwrap_err();
        assert_eq!(err.code(), 2);
    }
}
