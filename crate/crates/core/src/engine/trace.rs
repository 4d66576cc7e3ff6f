use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub struct IterRecord {
    pub iter: usize,
    /// `‖r_k^n‖` per prior.
    pub residual_norms: Vec<f64>,
    /// `λ f(x_k) + ½ Σ γ_n ‖r_k^n‖²`.
    pub objective: f64,
    pub f_norm: f64,
    pub psnr: Option<f64>,
    pub ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveTrace {
    pub records: Vec<IterRecord>,
}

impl SolveTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn f_norms(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.f_norm).collect()
    }

    pub fn objectives(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.objective).collect()
    }

    /// CSV with columns `iter, prior_<n>_residual..., objective, F_norm, psnr`
    /// and, with `timing`, a final `ms` column. Missing PSNR values are left
    /// empty.
    pub fn to_csv(&self, priors: usize, timing: bool) -> String {
        let mut out = String::from("iter");
        for n in 1..=priors {
            write!(out, ",prior_{n}_residual").unwrap();
        }
        out.push_str(",objective,F_norm,psnr");
        out.push_str(if timing { ",ms\n" } else { "\n" });
        for r in &self.records {
            write!(out, "{}", r.iter).unwrap();
            for v in &r.residual_norms {
                write!(out, ",{v}").unwrap();
            }
            write!(out, ",{},{},", r.objective, r.f_norm).unwrap();
            if let Some(p) = r.psnr {
                write!(out, "{p}").unwrap();
            }
            if timing {
                write!(out, ",{:.3}", r.ms).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let trace = SolveTrace {
            records: vec![IterRecord {
                iter: 0,
                residual_norms: vec![0.5, 0.25],
                objective: 1.0,
                f_norm: 0.125,
                psnr: None,
                ms: 2.0,
            }],
        };
        assert_eq!(
            trace.to_csv(2, true),
            "iter,prior_1_residual,prior_2_residual,objective,F_norm,psnr,ms\n0,0.5,0.25,1,0.125,,2.000\n"
        );
        assert_eq!(
            trace.to_csv(2, false),
            "iter,prior_1_residual,prior_2_residual,objective,F_norm,psnr\n0,0.5,0.25,1,0.125,\n"
        );
    }
}
