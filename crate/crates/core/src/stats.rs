//! Goodness-of-fit tests and summary statistics for simulation output.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn standard_error(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Standard error of an empirical frequency `p` over `n` trials.
pub fn proportion_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// `ρ̂_1 = Σ (x_i - x̄)(x_{i+1} - x̄) / Σ (x_i - x̄)²`.
pub fn lag1_autocorrelation(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let den: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    let num: f64 = xs.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
    num / den
}

/// Two-sided bound on `|ρ̂_1|` for i.i.d. data at significance `1e-3`.
pub fn lag1_bound(n: usize) -> f64 {
    3.29 / (n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsReport {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

impl KsReport {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

/// One-sample Kolmogorov–Smirnov test against a continuous cdf.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsReport> {
    if samples.is_empty() {
        return Err(Error::InsufficientData { found: 0, needed: 1 });
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let statistic = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i as f64 + 1.0) / n - f)
        })
        .fold(0.0, f64::max);
    let sqrt_n = n.sqrt();
    let p_value = kolmogorov_survival((sqrt_n + 0.12 + 0.11 / sqrt_n) * statistic);
    Ok(KsReport { statistic, p_value, n: xs.len() })
}

/// `Q(λ) = 2 Σ_{j>=1} (-1)^{j-1} e^{-2 j² λ²}`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl ChiSquareReport {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

/// Pearson goodness of fit. `probs` must cover every outcome (include a tail
/// bin). Bins with expected count below 5 are merged into their neighbour.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> Result<ChiSquareReport> {
    if observed.len() != probs.len() {
        return Err(Error::DimensionMismatch { expected: probs.len(), found: observed.len() });
    }
    let total: u64 = observed.iter().sum();
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut pending = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        pending.0 += o as f64;
        pending.1 += p * total as f64;
        if pending.1 >= 5.0 {
            bins.push(pending);
            pending = (0.0, 0.0);
        }
    }
    if pending.1 > 0.0 || pending.0 > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += pending.0;
                last.1 += pending.1;
            }
            None => bins.push(pending),
        }
    }
    if bins.len() < 2 {
        return Err(Error::InsufficientData { found: bins.len(), needed: 2 });
    }
    let statistic = bins.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = bins.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(ChiSquareReport { statistic, dof, p_value: 1.0 - dist.cdf(statistic) })
}

/// Counts of `0..k_max`, with the last bin collecting everything `>= k_max`.
pub fn count_bins(samples: impl IntoIterator<Item = u64>, k_max: usize) -> Vec<u64> {
    let mut bins = vec![0u64; k_max + 1];
    for s in samples {
        bins[(s as usize).min(k_max)] += 1;
    }
    bins
}

/// Probabilities matching [`count_bins`]: pmf on `0..k_max`, tail mass last.
pub fn tail_binned(pmf: impl Fn(u64) -> f64, k_max: usize) -> Vec<f64> {
    let mut probs: Vec<f64> = (0..k_max as u64).map(&pmf).collect();
    let head: f64 = probs.iter().sum();
    probs.push((1.0 - head).max(0.0));
    probs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kolmogorov_series_known_values() {
        // Classical critical values: Q(1.358) ≈ 0.05, Q(1.949) ≈ 0.001.
        assert!((kolmogorov_survival(1.358) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_survival(1.949) - 0.001).abs() < 1e-4);
        assert_eq!(kolmogorov_survival(0.0), 1.0);
    }

    #[test]
    fn ks_detects_wrong_law() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_test(&xs, |x| x.clamp(0.0, 1.0)).unwrap().passes(0.5));
        assert!(!ks_test(&xs, |x| (x * x).clamp(0.0, 1.0)).unwrap().passes(1e-3));
    }

    #[test]
    fn chi_square_pools_small_bins() {
        let obs = [50, 50, 0, 0];
        let probs = [0.5, 0.49, 0.005, 0.005];
        let rep = chi_square_gof(&obs, &probs).unwrap();
        assert_eq!(rep.dof, 1);
        assert!(rep.passes(0.5));
        let bad = chi_square_gof(&[90, 10], &[0.5, 0.5]).unwrap();
        assert!(!bad.passes(1e-3));
    }

    #[test]
    fn autocorrelation_of_alternating_series() {
        let xs: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!(lag1_autocorrelation(&xs) < -0.95);
    }
}
