//! Monte-Carlo variance estimates and scaling fits.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::linalg::pairwise_sum;

/// One-sided 99% standard-normal quantile.
pub const Z_99: f64 = 2.326_347_874_040_841;

/// Independent stream for sample `index` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum StderrMethod {
    Jackknife,
    /// var·√(2/(N−1)), used when N < 3.
    Normal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarianceEstimate {
    pub mean: f64,
    pub variance: f64,
    /// Standard error of `variance`.
    pub stderr: f64,
    /// Standard error of `mean`.
    pub mean_stderr: f64,
    pub samples: usize,
    pub seed: u64,
    pub method: StderrMethod,
}

impl VarianceEstimate {
    /// Unbiased sample variance with a jackknife standard error.
    pub fn from_values(values: &[f64], seed: u64) -> Result<Self> {
        let n = values.len();
        if n < 2 {
            return Err(invalid("variance needs at least two samples"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("non-finite sample"));
        }
        let nf = n as f64;
        let mean = pairwise_sum(values) / nf;
        let dev: Vec<f64> = values.iter().map(|v| v - mean).collect();
        let sq: Vec<f64> = dev.iter().map(|d| d * d).collect();
        let ss = pairwise_sum(&sq);
        let variance = ss / (nf - 1.0);
        let mean_stderr = libm::sqrt(variance / nf);
        let (stderr, method) = if n >= 3 {
            // leave-one-out variances from the centred sums
            let loo: Vec<f64> = dev
                .iter()
                .map(|&d| (ss - d * d - d * d / (nf - 1.0)) / (nf - 2.0))
                .collect();
            let m = pairwise_sum(&loo) / nf;
            let spread: Vec<f64> = loo.iter().map(|v| (v - m) * (v - m)).collect();
            (libm::sqrt((nf - 1.0) / nf * pairwise_sum(&spread)), StderrMethod::Jackknife)
        } else {
            (variance * libm::sqrt(2.0 / (nf - 1.0)), StderrMethod::Normal)
        };
        Ok(VarianceEstimate { mean, variance, stderr, mean_stderr, samples: n, seed, method })
    }

    /// Whether `bound` ≤ variance is not rejected at one-sided level z.
    pub fn consistent_with_lower_bound(&self, bound: f64, z: f64) -> bool {
        bound <= self.variance + z * self.stderr
    }
}

/// Sequential estimate; sample `i` draws from `sample_rng(seed, i)`.
pub fn estimate_variance(
    samples: usize,
    seed: u64,
    mut f: impl FnMut(usize, &mut ChaCha8Rng) -> Result<f64>,
) -> Result<VarianceEstimate> {
    let values = (0..samples)
        .map(|i| f(i, &mut sample_rng(seed, i as u64)))
        .collect::<Result<Vec<f64>>>()?;
    VarianceEstimate::from_values(&values, seed)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Regime {
    Exponential,
    Plateau,
    Indeterminate,
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub regime: Regime,
}

pub const EXP_SLOPE: f64 = -0.2;
pub const EXP_R2: f64 = 0.9;
pub const PLATEAU_SLOPE: f64 = 0.05;

/// Least squares y = a + b x with R². A perfect constant series has R² = 1.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(invalid("linear fit needs two or more paired points"));
    }
    let n = xs.len() as f64;
    let mx = pairwise_sum(xs) / n;
    let my = pairwise_sum(ys) / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(invalid("linear fit needs distinct x values"));
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    let sse: f64 = xs.iter().zip(ys).map(|(x, y)| (y - a - b * x).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok((b, a, r2))
}

/// Fit ln(variance) against n and classify the scaling.
pub fn scaling_fit(series: &[(f64, f64)]) -> Result<ScalingFit> {
    if series.len() < 3 {
        return Err(invalid("scaling fit needs at least three sizes"));
    }
    if series.iter().any(|&(_, v)| !(v > 0.0)) {
        return Err(invalid("scaling fit needs positive variances"));
    }
    let xs: Vec<f64> = series.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = series.iter().map(|p| libm::log(p.1)).collect();
    let (slope, intercept, r2) = linear_fit(&xs, &ys)?;
    let regime = if slope < EXP_SLOPE && r2 > EXP_R2 {
        Regime::Exponential
    } else if slope.abs() < PLATEAU_SLOPE {
        Regime::Plateau
    } else {
        Regime::Indeterminate
    };
    Ok(ScalingFit { slope, intercept, r2, regime })
}
