use crate::error::{check_len, Error, Result};
use crate::optimizers::{Metric, OptimizerReport};

/// `||z - z_ref|| / ||z_ref||` in the given metric.
pub fn relative_l2_error(z: &[f64], z_ref: &[f64], metric: &Metric) -> Result<f64> {
    check_len(z_ref.len(), z.len())?;
    let denom = metric.norm(z_ref);
    if denom == 0.0 {
        return Err(Error::DivisionByZero(
            "reference control has zero norm".into(),
        ));
    }
    let diff: Vec<f64> = z.iter().zip(z_ref).map(|(a, b)| a - b).collect();
    Ok(metric.norm(&diff) / denom)
}

/// Weighted variance `E[(X - E X)^2]` for probability weights `w`.
pub fn weighted_variance(values: &[f64], weights: &[f64]) -> Result<f64> {
    check_len(values.len(), weights.len())?;
    let mean: f64 = values.iter().zip(weights).map(|(v, w)| v * w).sum();
    Ok(values
        .iter()
        .zip(weights)
        .map(|(v, w)| w * (v - mean) * (v - mean))
        .sum())
}

/// Ratio of the variances of two sets of state norms under the same weights.
/// A zero denominator yields `+inf` (or NaN when both variances vanish).
pub fn variance_ratio(corrupted_norms: &[f64], rock_norms: &[f64], weights: &[f64]) -> Result<f64> {
    let num = weighted_variance(corrupted_norms, weights)?;
    let den = weighted_variance(rock_norms, weights)?;
    Ok(if den == 0.0 {
        if num == 0.0 {
            f64::NAN
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    })
}

pub fn linf_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Counters for one solve (or the sum over an alternating run).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseStats {
    pub iterations: usize,
    pub objective_evals: usize,
    pub gradient_evals: usize,
    pub termination: String,
}

impl PhaseStats {
    pub fn from_report(r: &OptimizerReport) -> Self {
        Self {
            iterations: r.iterations,
            objective_evals: r.objective_evals,
            gradient_evals: r.gradient_evals,
            termination: r.termination.as_str().to_string(),
        }
    }

    pub fn sum<'a>(reports: impl Iterator<Item = &'a OptimizerReport>, termination: &str) -> Self {
        let mut s = Self {
            iterations: 0,
            objective_evals: 0,
            gradient_evals: 0,
            termination: termination.to_string(),
        };
        for r in reports {
            s.iterations += r.iterations;
            s.objective_evals += r.objective_evals;
            s.gradient_evals += r.gradient_evals;
        }
        s
    }

    pub fn converged(&self) -> bool {
        self.termination == "tolerance"
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub example: String,
    pub corruption: f64,
    pub theta: f64,
    pub seed: u64,
    pub e_rel_corrupted: f64,
    pub e_rel_rock: f64,
    pub e_ratio: f64,
    pub linf_true_rock: f64,
    pub v_ratio: Option<f64>,
    pub corrupted_deleted: Option<(usize, usize)>,
    pub clean_deleted: Option<(usize, usize)>,
    pub true_stats: PhaseStats,
    pub corrupted_stats: PhaseStats,
    pub rock_stats: PhaseStats,
    pub adi_outer: usize,
    pub n_dof: usize,
}

impl MetricsReport {
    pub fn all_converged(&self) -> bool {
        self.true_stats.converged()
            && self.corrupted_stats.converged()
            && self.rock_stats.converged()
    }

    pub fn corrupted_deleted_fraction(&self) -> Option<f64> {
        self.corrupted_deleted
            .map(|(c, n)| if n == 0 { 0.0 } else { c as f64 / n as f64 })
    }

    pub fn clean_deleted_fraction(&self) -> Option<f64> {
        self.clean_deleted
            .map(|(c, n)| if n == 0 { 0.0 } else { c as f64 / n as f64 })
    }
}
