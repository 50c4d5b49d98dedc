//! Symmetric simple random walk on `Z^d`: exact laws and recurrence fits.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use crate::distributions::binomial_coefficient;
use crate::error::{Error, Result};
use crate::scalar::{ratio_to_f64, Rational};

/// Law of `X_n` for the walk started at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkLaw {
    pub dimension: usize,
    pub horizon: u64,
    /// `(k, P(X_n = k))` over the support `{-n, -n+2, ..., n}`.
    pub law: Vec<(i64, Rational)>,
}

fn pow2(n: u64) -> BigInt {
    BigInt::one() << n
}

/// `P(X_n = k) = 2^{-n} C(n, (n+k)/2)`, zero off the support.
pub fn position_probability_1d(n: u64, k: i64) -> Rational {
    let n_i = n as i64;
    if k.abs() > n_i || (n_i + k) % 2 != 0 {
        return Rational::zero();
    }
    Rational::new(binomial_coefficient(n, ((n_i + k) / 2) as u64), pow2(n))
}

pub fn position_law_1d(n: u64) -> WalkLaw {
    let law = (0..=n)
        .map(|j| {
            let k = 2 * j as i64 - n as i64;
            (k, Rational::new(binomial_coefficient(n, j), pow2(n)))
        })
        .collect();
    WalkLaw { dimension: 1, horizon: n, law }
}

/// `P(τ_0 = n)`: zero for odd `n`, `P(X_{n-2} = 0)/n` for even `n`.
pub fn return_time_law(n: u64) -> Result<Rational> {
    if n == 0 {
        return Err(Error::Domain("return times start at n = 1".into()));
    }
    if n % 2 == 1 {
        return Ok(Rational::zero());
    }
    Ok(position_probability_1d(n - 2, 0) / Rational::from_integer(BigInt::from(n)))
}

/// `P(τ_i = n) = (|i|/n) P(X_n = i)`.
pub fn first_passage_law(i: i64, n: u64) -> Result<Rational> {
    if i == 0 {
        return Err(Error::Domain("first passage needs a target i != 0".into()));
    }
    if n == 0 {
        return Ok(Rational::zero());
    }
    Ok(position_probability_1d(n, i) * Rational::new(BigInt::from(i.unsigned_abs()), BigInt::from(n)))
}

fn check_dimension(d: usize) -> Result<()> {
    if (1..=3).contains(&d) {
        Ok(())
    } else {
        Err(Error::Domain(format!("dimension must be 1, 2 or 3, got {d}")))
    }
}

/// Exact `P_0(X_{2m} = 0)` in dimension `d`.
///
/// For `d = 3` the `2m` steps are split among the three axes and each axis
/// walk must return: `C(2m,m)/4^m · Σ_{a+b+c=m} (m!/(a!b!c!))² / 9^m`.
pub fn origin_return_probability(m: u64, d: usize) -> Result<Rational> {
    check_dimension(d)?;
    let one_d = Rational::new(binomial_coefficient(2 * m, m), pow2(2 * m));
    Ok(match d {
        1 => one_d,
        2 => one_d.clone() * one_d,
        _ => {
            let mut sum = BigInt::zero();
            for a in 0..=m {
                let ca = binomial_coefficient(m, a);
                for b in 0..=m - a {
                    let multinomial = &ca * binomial_coefficient(m - a, b);
                    sum += &multinomial * &multinomial;
                }
            }
            one_d * Rational::new(sum, num_traits::pow(BigInt::from(9), m as usize))
        }
    })
}

/// `ln k!` for `k = 0..=n`.
fn ln_factorials(n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n + 1];
    for k in 1..=n {
        t[k] = t[k - 1] + (k as f64).ln();
    }
    t
}

/// Float `P_0(X_{2m} = 0)` for `m = 0..=m_max`, evaluated in log space.
pub fn origin_return_series(m_max: u64, d: usize) -> Result<Vec<f64>> {
    check_dimension(d)?;
    let lf = ln_factorials(2 * m_max as usize);
    let ln4 = 4f64.ln();
    let ln9 = 9f64.ln();
    Ok((0..=m_max as usize)
        .map(|m| {
            let one_d = lf[2 * m] - 2.0 * lf[m] - m as f64 * ln4;
            match d {
                1 => one_d.exp(),
                2 => (2.0 * one_d).exp(),
                _ => {
                    let base = 2.0 * lf[m] - m as f64 * ln9;
                    let mut s = 0.0;
                    for a in 0..=m {
                        for b in 0..=m - a {
                            let c = m - a - b;
                            s += (base - 2.0 * (lf[a] + lf[b] + lf[c])).exp();
                        }
                    }
                    one_d.exp() * s
                }
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Recurrent,
    Transient,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecurrenceReport {
    pub dimension: usize,
    pub m_max: u64,
    /// `P_0(X_{2m} = 0)` for `m = 1..=m_max`.
    pub return_probabilities: Vec<f64>,
    /// `Σ_{k=1}^{m} P_0(X_{2k} = 0)` for `m = 1..=m_max`.
    pub partial_sums: Vec<f64>,
    /// Slope of `log P_0(X_{2m} = 0)` against `log m` over `[m_max/2, m_max]`.
    pub fitted_exponent: f64,
    /// Heuristic: recurrent when the fitted exponent is at least -1, so the
    /// partial sums look divergent.
    pub verdict: Verdict,
}

pub fn recurrence_diagnostic(d: usize, m_max: u64) -> Result<RecurrenceReport> {
    if m_max < 4 {
        return Err(Error::Domain("recurrence fit needs m_max >= 4".into()));
    }
    let series = origin_return_series(m_max, d)?;
    let return_probabilities: Vec<f64> = series[1..].to_vec();
    let partial_sums = return_probabilities
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect();
    let points: Vec<(f64, f64)> =
        (m_max / 2..=m_max).map(|m| ((m as f64).ln(), series[m as usize].ln())).collect();
    let fitted_exponent = least_squares_slope(&points);
    let verdict = if fitted_exponent >= -1.0 { Verdict::Recurrent } else { Verdict::Transient };
    Ok(RecurrenceReport { dimension: d, m_max, return_probabilities, partial_sums, fitted_exponent, verdict })
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// `(n, P(τ_0 = n))` for even `n` up to `n_max`.
pub fn return_time_table(n_max: u64) -> Vec<(u64, Rational)> {
    (1..=n_max / 2).map(|k| (2 * k, return_time_law(2 * k).expect("n >= 2"))).collect()
}

/// Simulated first return time to 0, or `None` if it exceeds `cap`.
pub fn sample_return_time<R: Rng + ?Sized>(cap: u64, rng: &mut R) -> Option<u64> {
    let mut x: i64 = 0;
    for n in 1..=cap {
        x += if rng.random::<bool>() { 1 } else { -1 };
        if x == 0 {
            return Some(n);
        }
    }
    None
}

/// Positions `X_0, ..., X_n` of a walk in `Z^d`.
pub fn simulate_walk<R: Rng + ?Sized>(d: usize, steps: usize, rng: &mut R) -> Result<Vec<Vec<i64>>> {
    check_dimension(d)?;
    let mut x = vec![0i64; d];
    let mut path = Vec::with_capacity(steps + 1);
    path.push(x.clone());
    for _ in 0..steps {
        let dir = rng.random_range(0..2 * d);
        x[dir / 2] += if dir % 2 == 0 { 1 } else { -1 };
        path.push(x.clone());
    }
    Ok(path)
}

pub fn to_f64(r: &Rational) -> f64 {
    ratio_to_f64(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    /// Enumerates all `2^n` sign sequences.
    fn paths(n: u32) -> impl Iterator<Item = Vec<i64>> {
        (0u32..1 << n).map(move |bits| (0..n).map(|i| if bits >> i & 1 == 1 { 1 } else { -1 }).collect())
    }

    fn count_paths(n: u32, pred: impl Fn(&[i64]) -> bool) -> Rational {
        let hits = paths(n).filter(|steps| pred(steps)).count();
        q(hits as i64, 1 << n)
    }

    #[test]
    fn position_laws_match_enumeration() {
        for n in 0..=10u32 {
            for k in -(n as i64)..=n as i64 {
                let brute = count_paths(n, |s| s.iter().sum::<i64>() == k);
                assert_eq!(position_probability_1d(n as u64, k), brute);
            }
        }
        let law = position_law_1d(4);
        assert_eq!(law.law.iter().map(|(_, p)| p.clone()).fold(Rational::zero(), |a, b| a + b), q(1, 1));
        assert_eq!(law.law[2], (0, q(3, 8)));
        assert_eq!(position_law_1d(0).law, vec![(0, q(1, 1))]);
    }

    #[test]
    fn return_and_passage_laws() {
        let expected = [q(1, 2), q(1, 8), q(1, 16), q(5, 128), q(7, 256), q(21, 1024), q(33, 2048)];
        for (i, e) in expected.iter().enumerate() {
            assert_eq!(&return_time_law(2 * (i as u64 + 1)).unwrap(), e);
        }
        assert_eq!(return_time_law(3).unwrap(), q(0, 1));
        assert_eq!(first_passage_law(1, 1).unwrap(), q(1, 2));
        assert_eq!(first_passage_law(2, 2).unwrap(), q(1, 4));
        assert_eq!(first_passage_law(1, 3).unwrap(), q(1, 8));
        assert_eq!(first_passage_law(-1, 3).unwrap(), q(1, 8));
        assert!(first_passage_law(0, 3).is_err());
    }

    #[test]
    fn return_time_law_matches_enumeration() {
        for n in 1..=14u32 {
            let brute = count_paths(n, |s| {
                let mut x = 0;
                s.iter().enumerate().all(|(t, z)| {
                    x += z;
                    (x == 0) == (t + 1 == n as usize)
                })
            });
            assert_eq!(return_time_law(n as u64).unwrap(), brute, "n = {n}");
        }
    }

    #[test]
    fn first_passage_matches_enumeration() {
        for i in [-3i64, -1, 1, 2, 4] {
            for n in 1..=12u32 {
                let brute = count_paths(n, |s| {
                    let mut x = 0;
                    s.iter().enumerate().all(|(t, z)| {
                        x += z;
                        (x == i) == (t + 1 == n as usize)
                    })
                });
                assert_eq!(first_passage_law(i, n as u64).unwrap(), brute, "i = {i}, n = {n}");
            }
        }
    }

    /// Independent oracle: dynamic programming over a box of side `4m + 1`.
    fn box_dp(m: usize, d: usize) -> Rational {
        let r = 2 * m;
        let side = 2 * r + 1;
        let size = side.pow(d as u32);
        let mut p = vec![Rational::zero(); size];
        let center: usize = (0..d).map(|k| r * side.pow(k as u32)).sum();
        p[center] = q(1, 1);
        let w = q(1, 2 * d as i64);
        for _ in 0..2 * m {
            let mut next = vec![Rational::zero(); size];
            for (idx, v) in p.iter().enumerate() {
                if v.is_zero() {
                    continue;
                }
                for k in 0..d {
                    let stride = side.pow(k as u32);
                    let coord = idx / stride % side;
                    if coord + 1 < side {
                        next[idx + stride] += v * &w;
                    }
                    if coord > 0 {
                        next[idx - stride] += v * &w;
                    }
                }
            }
            p = next;
        }
        p[center].clone()
    }

    #[test]
    fn origin_returns_match_box_dynamic_programming() {
        for d in 1..=3 {
            for m in 0..=3 {
                assert_eq!(origin_return_probability(m as u64, d).unwrap(), box_dp(m, d), "d = {d}, m = {m}");
            }
        }
        assert_eq!(origin_return_probability(1, 2).unwrap(), q(1, 4));
        assert_eq!(origin_return_probability(2, 1).unwrap(), q(3, 8));
        assert_eq!(origin_return_probability(1, 3).unwrap(), q(1, 6));
        assert!(origin_return_probability(1, 4).is_err());
    }

    #[test]
    fn float_series_tracks_exact_values() {
        for d in 1..=3 {
            let s = origin_return_series(40, d).unwrap();
            for m in [0u64, 1, 7, 40] {
                let exact = to_f64(&origin_return_probability(m, d).unwrap());
                assert!((s[m as usize] - exact).abs() <= 1e-12 * exact.max(1e-300), "d = {d}, m = {m}");
            }
        }
    }

    #[test]
    fn return_law_partial_sum_approaches_one() {
        // P(τ_0 = 2k) = P(X_{2k-2} = 0) / 2k, with the float series for speed.
        let u = origin_return_series(5000, 1).unwrap();
        let s: f64 = (1..=5000usize).map(|k| u[k - 1] / (2 * k) as f64).sum();
        assert!((1.0 - s).abs() < 1e-2);
    }

    #[test]
    fn small_recurrence_fits() {
        let r = recurrence_diagnostic(1, 200).unwrap();
        assert!((r.fitted_exponent + 0.5).abs() < 0.05);
        assert_eq!(r.verdict, Verdict::Recurrent);
        assert_eq!(r.partial_sums.len(), 200);
        let r3 = recurrence_diagnostic(3, 60).unwrap();
        assert_eq!(r3.verdict, Verdict::Transient);
    }
}
