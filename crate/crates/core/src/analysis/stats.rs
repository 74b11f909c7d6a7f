//! Closed-form statistics: OLS slopes, paired comparisons, and the
//! key-event-based linear time fit.

use super::AnalysisError;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 points.
pub fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Standard error of the mean; 0 for fewer than 2 points.
pub fn sem(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    sample_sd(xs) / (xs.len() as f64).sqrt()
}

/// Least-squares slope on mean-centered x: sum((x-x_bar)(y-y_bar)) /
/// sum((x-x_bar)^2). Needs at least 3 points and non-degenerate x.
pub fn ols_slope(points: &[(f64, f64)]) -> Result<f64, AnalysisError> {
    if points.len() < 3 {
        return Err(AnalysisError::TooFewPoints {
            needed: 3,
            got: points.len(),
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let xm = mean(&xs);
    let ym = mean(&ys);
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    if sxx == 0.0 {
        return Err(AnalysisError::ZeroVariance("loop index"));
    }
    let sxy: f64 = xs
        .iter()
        .zip(ys.iter())
        .map(|(x, y)| (x - xm) * (y - ym))
        .sum();
    Ok(sxy / sxx)
}

/// Least squares for user ~= a * reference + b over matched onset pairs.
pub fn time_fit(user: &[f64], reference: &[f64]) -> Result<(f64, f64), AnalysisError> {
    if user.len() != reference.len() {
        return Err(AnalysisError::LengthMismatch {
            a: user.len(),
            b: reference.len(),
        });
    }
    if user.len() < 2 {
        return Err(AnalysisError::TooFewPoints {
            needed: 2,
            got: user.len(),
        });
    }
    let rm = mean(reference);
    let um = mean(user);
    let srr: f64 = reference.iter().map(|r| (r - rm) * (r - rm)).sum();
    if srr == 0.0 {
        return Err(AnalysisError::ZeroVariance("reference onsets"));
    }
    let sru: f64 = reference
        .iter()
        .zip(user.iter())
        .map(|(r, u)| (r - rm) * (u - um))
        .sum();
    let a = sru / srr;
    let b = um - a * rm;
    Ok((a, b))
}

/// Paired comparison of two equal-length per-participant vectors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairedStats {
    pub n: usize,
    pub mean_diff: f64,
    pub sd_diff: f64,
    pub se: f64,
    pub t: f64,
    /// Cohen's d_z: mean difference over its standard deviation.
    pub dz: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
}

pub fn paired_stats(a: &[f64], b: &[f64]) -> Result<PairedStats, AnalysisError> {
    if a.len() != b.len() {
        return Err(AnalysisError::LengthMismatch {
            a: a.len(),
            b: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(AnalysisError::TooFewPoints {
            needed: 2,
            got: a.len(),
        });
    }
    let diffs: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| x - y).collect();
    let mean_diff = mean(&diffs);
    let sd_diff = sample_sd(&diffs);
    if sd_diff == 0.0 {
        return Err(AnalysisError::ZeroVariance("paired differences"));
    }
    let n = diffs.len();
    let se = sd_diff / (n as f64).sqrt();
    let t = mean_diff / se;
    let dz = mean_diff / sd_diff;
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("valid dof");
    let tq = dist.inverse_cdf(0.975);
    Ok(PairedStats {
        n,
        mean_diff,
        sd_diff,
        se,
        t,
        dz,
        ci95_low: mean_diff - tq * se,
        ci95_high: mean_diff + tq * se,
    })
}
