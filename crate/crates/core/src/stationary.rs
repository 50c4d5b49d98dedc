//! Stationary distributions, reversibility and spectral gap.

use std::collections::VecDeque;

use crate::chain::{classify, default_regular_cap, Distribution, StochasticMatrix};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryResult<T> {
    pub pi: Distribution<T>,
    /// Every row equal to `π`; present for regular chains only.
    pub limit_matrix: Option<Matrix<T>>,
    pub recurrence_times: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReversibilityCertificate<T> {
    pub reversible: bool,
    /// Normalized reversible vector, when one exists.
    pub alpha: Option<Vec<T>>,
    /// First pair `(i, j)`, `i < j`, with `α_i p_ij ≠ α_j p_ji`.
    pub violation: Option<(usize, usize)>,
}

/// Unique `π` with `πP = π` and `Σπ_i = 1`, from the linear system
/// `(Pᵀ - I)π = 0` stacked with the normalization row.
pub fn stationary_distribution<T: Scalar>(p: &StochasticMatrix<T>) -> Result<Distribution<T>> {
    let n = p.n();
    let c = classify(p, 1);
    if !c.irreducible {
        return Err(Error::NotIrreducible);
    }
    let pm = p.matrix();
    let a = Matrix::from_fn(n + 1, n, |i, j| {
        if i == n {
            T::one()
        } else if i == j {
            pm[(j, i)].clone() - T::one()
        } else {
            pm[(j, i)].clone()
        }
    });
    let mut b = vec![T::zero(); n + 1];
    b[n] = T::one();
    match a.solve_unique(&b) {
        Ok(Some(pi)) => {
            // Clamp float round-off that would otherwise fail validation.
            let pi = if T::is_exact() {
                pi
            } else {
                pi.into_iter().map(|x| if x < T::zero() { T::zero() } else { x }).collect()
            };
            Distribution::new(pi).map_err(|_| Error::DegenerateNullSpace)
        }
        Ok(None) | Err(Error::SingularMatrix) => Err(Error::DegenerateNullSpace),
        Err(e) => Err(e),
    }
}

/// `E_i[τ_i] = 1/π_i`.
pub fn mean_recurrence_times<T: Scalar>(pi: &Distribution<T>) -> Result<Vec<T>> {
    pi.probs()
        .iter()
        .enumerate()
        .map(|(i, x)| if x.is_zero() { Err(Error::ZeroMass { state: i }) } else { Ok(T::one() / x.clone()) })
        .collect()
}

/// Stationary law, recurrence times and (for regular chains) the limit matrix.
pub fn analyze<T: Scalar>(p: &StochasticMatrix<T>) -> Result<StationaryResult<T>> {
    let pi = stationary_distribution(p)?;
    let recurrence_times = mean_recurrence_times(&pi)?;
    let regular = classify(p, default_regular_cap(p.n())).regular;
    let limit_matrix = regular.then(|| Matrix::from_fn(p.n(), p.n(), |_, j| pi.probs()[j].clone()));
    Ok(StationaryResult { pi, limit_matrix, recurrence_times })
}

/// Builds `α` along a spanning tree of two-way edges starting from `α_0 = 1`,
/// then checks detailed balance on every pair.
pub fn reversible_vector<T: Scalar>(p: &StochasticMatrix<T>) -> Result<ReversibilityCertificate<T>> {
    if !classify(p, 1).irreducible {
        return Err(Error::NotIrreducible);
    }
    Ok(detailed_balance_certificate(p.n(), |i, j| p.get(i, j).clone()))
}

/// Detailed-balance check for any nonnegative off-diagonal weights `w(i, j)`,
/// shared by transition matrices and rate matrices.
pub(crate) fn detailed_balance_certificate<T: Scalar>(
    n: usize,
    w: impl Fn(usize, usize) -> T,
) -> ReversibilityCertificate<T> {
    let mut alpha: Vec<Option<T>> = vec![None; n];
    alpha[0] = Some(T::one());
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let ai = alpha[i].clone().expect("queued states carry a value");
        for j in 0..n {
            let (wij, wji) = (w(i, j), w(j, i));
            if i != j && alpha[j].is_none() && !wij.is_zero() && !wji.is_zero() {
                alpha[j] = Some(ai.clone() * wij / wji);
                queue.push_back(j);
            }
        }
    }

    let total = alpha.iter().flatten().cloned().fold(T::zero(), |a, b| a + b);
    let alpha: Vec<T> = alpha.into_iter().map(|a| a.map_or_else(T::zero, |a| a / total.clone())).collect();

    for i in 0..n {
        for j in i + 1..n {
            let (wij, wji) = (w(i, j), w(j, i));
            let violated = wij.is_zero() != wji.is_zero()
                || !(alpha[i].clone() * wij - alpha[j].clone() * wji).is_negligible();
            if violated {
                return ReversibilityCertificate { reversible: false, alpha: None, violation: Some((i, j)) };
            }
        }
    }
    ReversibilityCertificate { reversible: true, alpha: Some(alpha), violation: None }
}

/// `(1/n) E_ν[Σ_{m<n} f(X_m)]`, by propagating the law rather than sampling.
pub fn ergodic_average<T: Scalar>(
    p: &StochasticMatrix<T>,
    nu: &Distribution<T>,
    reward: &[T],
    n: usize,
) -> Result<T> {
    if nu.len() != p.n() {
        return Err(Error::DimensionMismatch { expected: p.n(), found: nu.len() });
    }
    if reward.len() != p.n() {
        return Err(Error::DimensionMismatch { expected: p.n(), found: reward.len() });
    }
    if n == 0 {
        return Err(Error::Domain("ergodic average needs n >= 1".into()));
    }
    let mut law = nu.probs().to_vec();
    let mut total = T::zero();
    for m in 0..n {
        total = law.iter().zip(reward).fold(total, |acc, (a, r)| acc + a.clone() * r.clone());
        if m + 1 < n {
            law = p.matrix().left_mul_vec(&law)?;
        }
    }
    Ok(total / T::from_usize(n))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralGap {
    /// Largest modulus among eigenvalues other than 1.
    pub lambda0: f64,
    pub gap: f64,
    pub iterations: usize,
}

pub const GAP_TOLERANCE: f64 = 1e-10;
pub const GAP_MAX_ITERATIONS: usize = 100_000;

/// Power iteration in `ℓ²(π)` on the complement of the constants.
pub fn spectral_gap<T: Scalar>(p: &StochasticMatrix<T>, pi: &Distribution<T>) -> Result<SpectralGap> {
    let n = p.n();
    if pi.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: pi.len() });
    }
    for i in 0..n {
        for j in i + 1..n {
            let lhs = pi.probs()[i].clone() * p.get(i, j).clone();
            let rhs = pi.probs()[j].clone() * p.get(j, i).clone();
            if (lhs.to_f64() - rhs.to_f64()).abs() > 1e-10 {
                return Err(Error::NotReversible(i, j));
            }
        }
    }
    let pm = p.matrix().to_f64();
    let w: Vec<f64> = pi.probs().iter().map(T::to_f64).collect();
    let deflate = |x: &mut [f64]| {
        let mean: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum();
        x.iter_mut().for_each(|v| *v -= mean);
    };
    let norm = |x: &[f64]| x.iter().zip(&w).map(|(a, b)| a * a * b).sum::<f64>().sqrt();

    // Irrational offsets keep the start vector off any eigenvector.
    let mut x: Vec<f64> = (0..n).map(|i| ((i as f64 + 1.0) * 0.618_033_988_75).fract() - 0.5).collect();
    deflate(&mut x);
    let nx = norm(&x);
    if nx == 0.0 {
        return Ok(SpectralGap { lambda0: 0.0, gap: 1.0, iterations: 0 });
    }
    x.iter_mut().for_each(|v| *v /= nx);

    let mut previous = f64::NAN;
    for it in 1..=GAP_MAX_ITERATIONS {
        let mut y = pm.mul_vec(&x)?;
        deflate(&mut y);
        let ratio = norm(&y);
        if ratio < 1e-300 {
            return Ok(SpectralGap { lambda0: 0.0, gap: 1.0, iterations: it });
        }
        y.iter_mut().for_each(|v| *v /= ratio);
        x = y;
        if (ratio - previous).abs() < GAP_TOLERANCE {
            let lambda0 = ratio.min(1.0);
            return Ok(SpectralGap { lambda0, gap: 1.0 - lambda0, iterations: it });
        }
        previous = ratio;
    }
    Err(Error::NoConvergence { iterations: GAP_MAX_ITERATIONS })
}
