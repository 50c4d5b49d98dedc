//! Poisson point processes on `[0, T]`.

use rand::Rng;
use serde::Serialize;

use crate::distributions::exponential_from_uniform;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointProcessSample {
    pub horizon: f64,
    /// Strictly increasing event times in `(0, T]`.
    pub times: Vec<f64>,
    /// Intensity, when the sample is known to be homogeneous.
    pub rate: Option<f64>,
}

fn check_horizon(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("horizon must be positive and finite, got {t}")))
    }
}

/// Cumulative sums of i.i.d. `Exp(λ)` gaps, stopped at the horizon.
pub fn sample_poisson_process<R: Rng + ?Sized>(lambda: f64, horizon: f64, rng: &mut R) -> Result<PointProcessSample> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::NonPositiveRate(lambda));
    }
    check_horizon(horizon)?;
    let mut times = Vec::with_capacity((lambda * horizon * 1.1) as usize + 16);
    let mut t = 0.0;
    loop {
        t += exponential_from_uniform(lambda, rng.random::<f64>());
        if t > horizon {
            break;
        }
        times.push(t);
    }
    Ok(PointProcessSample { horizon, times, rate: Some(lambda) })
}

impl PointProcessSample {
    pub fn empty(horizon: f64) -> Self {
        Self { horizon, times: Vec::new(), rate: None }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `N_t = #{n : X_n <= t}`.
    pub fn counting(&self, t: f64) -> usize {
        self.times.partition_point(|&x| x <= t)
    }

    /// `N_{(s, t]}`.
    pub fn count(&self, s: f64, t: f64) -> Result<usize> {
        if !(0.0 <= s && s <= t && t <= self.horizon) {
            return Err(Error::BadInterval { s, t, horizon: self.horizon });
        }
        Ok(self.counting(t) - self.counting(s))
    }

    /// Gaps `Z_n = X_n - X_{n-1}` with `X_0 = 0`.
    pub fn interarrivals(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.times
            .iter()
            .map(|&x| {
                let z = x - prev;
                prev = x;
                z
            })
            .collect()
    }

    /// Time from `t` until the next event, if one occurs before the horizon.
    pub fn residual_after(&self, t: f64) -> Option<f64> {
        self.times.get(self.counting(t)).map(|&x| x - t)
    }
}

/// Keeps each point independently with probability `q`.
pub fn thin<R: Rng + ?Sized>(sample: &PointProcessSample, q: f64, rng: &mut R) -> Result<PointProcessSample> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain(format!("retention probability {q} outside [0, 1]")));
    }
    let times = sample.times.iter().copied().filter(|_| rng.random::<f64>() < q).collect();
    Ok(PointProcessSample { horizon: sample.horizon, times, rate: sample.rate.map(|l| l * q) })
}

/// Sorted merge of two samples on the same horizon.
pub fn superpose(a: &PointProcessSample, b: &PointProcessSample) -> Result<PointProcessSample> {
    if a.horizon != b.horizon {
        return Err(Error::HorizonMismatch(a.horizon, b.horizon));
    }
    let mut times = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.times.get(i), b.times.get(j)) {
            (Some(&x), Some(&y)) if x == y => return Err(Error::Collision(x)),
            (Some(&x), Some(&y)) if x < y => {
                i += 1;
                x
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (_, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        times.push(next);
    }
    let rate = match (a.rate, b.rate) {
        (Some(x), Some(y)) => Some(x + y),
        (Some(x), None) if b.is_empty() => Some(x),
        (None, Some(y)) if a.is_empty() => Some(y),
        _ => None,
    };
    Ok(PointProcessSample { horizon: a.horizon, times, rate })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompoundPath {
    pub horizon: f64,
    pub times: Vec<f64>,
    /// `S_{X_n} = Σ_{i<=n} Y_i`.
    pub values: Vec<f64>,
}

impl CompoundPath {
    /// `S_t = Σ_{i <= N_t} Y_i`.
    pub fn value_at(&self, t: f64) -> f64 {
        match self.times.partition_point(|&x| x <= t) {
            0 => 0.0,
            k => self.values[k - 1],
        }
    }
}

/// Attaches an i.i.d. jump `Y_i` to every event.
pub fn compound<R: Rng + ?Sized>(
    sample: &PointProcessSample,
    mut jump: impl FnMut(&mut R) -> f64,
    rng: &mut R,
) -> CompoundPath {
    let mut acc = 0.0;
    let values = sample
        .times
        .iter()
        .map(|_| {
            acc += jump(rng);
            acc
        })
        .collect();
    CompoundPath { horizon: sample.horizon, times: sample.times.clone(), values }
}

/// Intensity `λ(t) <= λ_max`: a rate-`λ_max` process where each point at `t`
/// is kept with probability `λ(t)/λ_max`.
pub fn sample_inhomogeneous<R: Rng + ?Sized>(
    rate: impl Fn(f64) -> f64,
    lambda_max: f64,
    horizon: f64,
    rng: &mut R,
) -> Result<PointProcessSample> {
    let base = sample_poisson_process(lambda_max, horizon, rng)?;
    let mut times = Vec::with_capacity(base.len());
    for &t in &base.times {
        let r = rate(t);
        if !(0.0..=lambda_max).contains(&r) {
            return Err(Error::Domain(format!("intensity {r} at t = {t} outside [0, {lambda_max}]")));
        }
        if rng.random::<f64>() * lambda_max < r {
            times.push(t);
        }
    }
    Ok(PointProcessSample { horizon, times, rate: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::RngStream;

    #[test]
    fn counts_and_intervals() {
        let s = PointProcessSample { horizon: 10.0, times: vec![1.0, 2.5, 2.6, 9.0], rate: None };
        assert_eq!(s.count(2.0, 2.0).unwrap(), 0);
        assert_eq!(s.count(1.0, 2.6).unwrap(), 2);
        assert_eq!(s.count(0.0, 10.0).unwrap(), 4);
        assert!(matches!(s.count(3.0, 2.0), Err(Error::BadInterval { .. })));
        assert!(matches!(s.count(0.0, 11.0), Err(Error::BadInterval { .. })));
        assert_eq!(s.interarrivals()[1], 1.5);
        assert_eq!(s.residual_after(2.6), Some(9.0 - 2.6));
        assert_eq!(s.residual_after(9.5), None);
    }

    #[test]
    fn tiny_horizon_is_empty() {
        let s = sample_poisson_process(1.0, 1e-12, &mut RngStream::new(1, 0)).unwrap();
        assert!(s.is_empty());
        assert!(sample_poisson_process(0.0, 1.0, &mut RngStream::new(1, 0)).is_err());
    }

    #[test]
    fn rate_of_long_sample() {
        let s = sample_poisson_process(1.0, 1e6, &mut RngStream::new(2, 0)).unwrap();
        assert!((s.len() as f64 / 1e6 - 1.0).abs() < 0.01);
        assert!(s.times.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn thinning_extremes() {
        let mut rng = RngStream::new(3, 0);
        let s = sample_poisson_process(2.0, 50.0, &mut rng).unwrap();
        assert_eq!(thin(&s, 1.0, &mut rng).unwrap().times, s.times);
        assert!(thin(&s, 0.0, &mut rng).unwrap().is_empty());
        assert!(thin(&s, 1.5, &mut rng).is_err());
    }

    #[test]
    fn superposition_rules() {
        let mut rng = RngStream::new(4, 0);
        let a = sample_poisson_process(1.0, 20.0, &mut rng).unwrap();
        let e = PointProcessSample::empty(20.0);
        assert_eq!(superpose(&a, &e).unwrap().times, a.times);
        assert!(matches!(superpose(&a, &PointProcessSample::empty(5.0)), Err(Error::HorizonMismatch(..))));
        let dup = PointProcessSample { horizon: 20.0, times: vec![a.times[0]], rate: None };
        assert!(matches!(superpose(&a, &dup), Err(Error::Collision(_))));
        let b = sample_poisson_process(2.0, 20.0, &mut rng).unwrap();
        let m = superpose(&a, &b).unwrap();
        assert_eq!(m.len(), a.len() + b.len());
        assert_eq!(m.rate, Some(3.0));
        assert!(m.times.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn compound_with_unit_jumps_is_counting() {
        let mut rng = RngStream::new(5, 0);
        let s = sample_poisson_process(3.0, 10.0, &mut rng).unwrap();
        let c = compound(&s, |_| 1.0, &mut rng);
        for t in [0.0, 0.5, 3.3, 10.0] {
            assert_eq!(c.value_at(t), s.counting(t) as f64);
        }
        let e = compound(&PointProcessSample::empty(10.0), |_| 1.0, &mut rng);
        assert_eq!(e.value_at(10.0), 0.0);
    }

    #[test]
    fn inhomogeneous_mean_count() {
        let mut rng = RngStream::new(6, 0);
        // λ(t) = t on [0, 10]: expected count 50.
        let runs = 2000;
        let total: usize = (0..runs).map(|_| sample_inhomogeneous(|t| t, 10.0, 10.0, &mut rng).unwrap().len()).sum();
        let mean = total as f64 / runs as f64;
        assert!((mean - 50.0).abs() < 3.0 * (50.0f64 / runs as f64).sqrt() * 2.0);
        assert!(sample_inhomogeneous(|t| 2.0 * t, 10.0, 10.0, &mut rng).is_err());
    }
}
