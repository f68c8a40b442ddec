//! Monte Carlo summaries with reproducible (pairwise) reductions.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::linalg::pairwise_sum;

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

impl Estimate {
    /// Mean and standard error of the mean. Moments are taken about the
    /// first sample to limit cancellation.
    pub fn from_samples(xs: &[f64]) -> Result<Self> {
        if xs.is_empty() {
            return Err(invalid("cannot summarize an empty sample"));
        }
        let n = xs.len() as f64;
        let shift = xs[0];
        let d: Vec<f64> = xs.iter().map(|x| x - shift).collect();
        let d2: Vec<f64> = d.iter().map(|x| x * x).collect();
        let m1 = pairwise_sum(&d) / n;
        let m2 = pairwise_sum(&d2) / n;
        let var = if xs.len() > 1 { ((m2 - m1 * m1) * n / (n - 1.0)).max(0.0) } else { 0.0 };
        Ok(Self { mean: shift + m1, stderr: (var / n).sqrt(), count: xs.len() })
    }

    /// Number of standard errors between the estimate and `target`.
    pub fn z_score(&self, target: f64) -> f64 {
        if self.stderr == 0.0 {
            if self.mean == target { 0.0 } else { f64::INFINITY }
        } else {
            (self.mean - target).abs() / self.stderr
        }
    }

    pub fn within(&self, target: f64, sigmas: f64) -> bool {
        self.z_score(target) <= sigmas
    }
}

/// Componentwise estimate of a complex mean.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexEstimate {
    pub re: Estimate,
    pub im: Estimate,
}

impl ComplexEstimate {
    pub fn from_samples(zs: &[C64]) -> Result<Self> {
        let re: Vec<f64> = zs.iter().map(|z| z.re).collect();
        let im: Vec<f64> = zs.iter().map(|z| z.im).collect();
        Ok(Self { re: Estimate::from_samples(&re)?, im: Estimate::from_samples(&im)? })
    }

    pub fn mean(&self) -> C64 {
        C64::new(self.re.mean, self.im.mean)
    }
}

/// Ratio estimator Σ wᵢxᵢ / Σ wᵢ with a delta-method standard error.
pub fn weighted_mean(values: &[f64], weights: &[f64]) -> Result<Estimate> {
    if values.is_empty() || values.len() != weights.len() {
        return Err(invalid("weighted mean needs equally long, nonempty slices"));
    }
    let wsum = pairwise_sum(weights);
    if !(wsum > 0.0) {
        return Err(invalid("weights sum to a nonpositive value"));
    }
    let wx: Vec<f64> = values.iter().zip(weights).map(|(x, w)| x * w).collect();
    let mean = pairwise_sum(&wx) / wsum;
    let n = values.len() as f64;
    let wbar = wsum / n;
    let resid: Vec<f64> = values
        .iter()
        .zip(weights)
        .map(|(x, w)| (w * (x - mean) / wbar).powi(2))
        .collect();
    let var = if values.len() > 1 { pairwise_sum(&resid) / (n - 1.0) } else { 0.0 };
    Ok(Estimate { mean, stderr: (var / n).sqrt(), count: values.len() })
}

/// Sample excess kurtosis with its large-sample standard error √(24/n).
pub fn excess_kurtosis(xs: &[f64]) -> Result<Estimate> {
    if xs.len() < 4 {
        return Err(invalid("kurtosis needs at least four samples"));
    }
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    let d2: Vec<f64> = xs.iter().map(|x| (x - mean).powi(2)).collect();
    let d4: Vec<f64> = xs.iter().map(|x| (x - mean).powi(4)).collect();
    let m2 = pairwise_sum(&d2) / n;
    let m4 = pairwise_sum(&d4) / n;
    Ok(Estimate { mean: m4 / (m2 * m2) - 3.0, stderr: (24.0 / n).sqrt(), count: xs.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimate_of_known_sample() {
        let e = Estimate::from_samples(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(e.mean, 2.5);
        // sample variance 5/3, stderr sqrt(5/12)
        assert!((e.stderr - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert!(Estimate::from_samples(&[]).is_err());
    }

    #[test]
    fn shifted_moments_survive_large_offsets() {
        let xs: Vec<f64> = (0..1000).map(|i| 1e9 + (i % 2) as f64).collect();
        let e = Estimate::from_samples(&xs).unwrap();
        assert!((e.mean - (1e9 + 0.5)).abs() < 1e-6);
        let sd = 0.5 * (1000.0f64 / 999.0).sqrt();
        assert!((e.stderr - sd / 1000f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn uniform_weights_reduce_to_plain_mean() {
        let xs = [0.5, 1.5, -2.0, 4.0];
        let w = weighted_mean(&xs, &[2.0; 4]).unwrap();
        let p = Estimate::from_samples(&xs).unwrap();
        assert!((w.mean - p.mean).abs() < 1e-15);
        assert!((w.stderr - p.stderr).abs() < 1e-15);
    }

    #[test]
    fn z_score_handles_zero_error() {
        let e = Estimate { mean: 1.0, stderr: 0.0, count: 3 };
        assert_eq!(e.z_score(1.0), 0.0);
        assert!(!e.within(1.1, 3.0));
    }
}
