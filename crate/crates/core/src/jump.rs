//! Continuous-time Markov jump processes on a finite state space.

use rand::Rng;
use serde::Serialize;

use crate::chain::{reachability, Distribution, RowSampler, StochasticMatrix};
use crate::distributions::exponential_from_uniform;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::stationary::{detailed_balance_certificate, ReversibilityCertificate};

/// Rate matrix `L`: `L(i,j) = q(i,j) >= 0` off the diagonal and
/// `L(i,i) = -λ(i)` so that rows sum to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator<T> {
    matrix: Matrix<T>,
    labels: Option<Vec<String>>,
}

impl<T: Scalar> Generator<T> {
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        Self::validate(Matrix::from_rows(rows)?)
    }

    pub fn validate(matrix: Matrix<T>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare { rows: matrix.rows(), cols: matrix.cols() });
        }
        if matrix.rows() == 0 {
            return Err(Error::Empty);
        }
        for i in 0..matrix.rows() {
            let mut sum = T::zero();
            for j in 0..matrix.cols() {
                let x = &matrix[(i, j)];
                if i != j && *x < T::zero() {
                    return Err(Error::NegativeRate { row: i, col: j, value: x.to_string() });
                }
                sum = sum + x.clone();
            }
            if matrix[(i, i)] > T::zero() {
                return Err(Error::BadDiagonal { row: i, value: matrix[(i, i)].to_string() });
            }
            if !sum.is_negligible() {
                return Err(Error::RowSumNotZero { row: i, sum: sum.to_string() });
            }
        }
        Ok(Self { matrix, labels: None })
    }

    /// Builds `L` from off-diagonal rates `(i, j, q(i,j))`; repeated pairs add up.
    pub fn from_rates(n: usize, rates: &[(usize, usize, T)]) -> Result<Self> {
        let mut m: Matrix<T> = Matrix::zeros(n, n);
        for (i, j, r) in rates {
            if *i >= n || *j >= n {
                return Err(Error::DimensionMismatch { expected: n, found: (*i).max(*j) + 1 });
            }
            if i == j {
                return Err(Error::Domain(format!("self-rate at state {i}")));
            }
            if *r < T::zero() {
                return Err(Error::NegativeRate { row: *i, col: *j, value: r.to_string() });
            }
            m[(*i, *j)] = m[(*i, *j)].clone() + r.clone();
            m[(*i, *i)] = m[(*i, *i)].clone() - r.clone();
        }
        Self::validate(m)
    }

    /// `(-λ, λ; μ, -μ)`.
    pub fn two_state(lambda: T, mu: T) -> Result<Self> {
        Self::from_rates(2, &[(0, 1, lambda), (1, 0, mu)])
    }

    /// Birth rates `λ_0..λ_{N-1}` and death rates `μ_1..μ_N` on `{0..N}`.
    pub fn birth_death(births: &[T], deaths: &[T]) -> Result<Self> {
        if births.len() != deaths.len() {
            return Err(Error::DimensionMismatch { expected: births.len(), found: deaths.len() });
        }
        let n = births.len() + 1;
        let mut rates = Vec::with_capacity(2 * births.len());
        for (k, (b, d)) in births.iter().zip(deaths).enumerate() {
            rates.push((k, k + 1, b.clone()));
            rates.push((k + 1, k, d.clone()));
        }
        Self::from_rates(n, &rates)
    }

    /// `n -> n+1` at rate `λ` on `{0..n_states-1}`; the top state absorbs.
    pub fn pure_birth(n_states: usize, lambda: T) -> Result<Self> {
        let rates: Vec<_> = (0..n_states.saturating_sub(1)).map(|k| (k, k + 1, lambda.clone())).collect();
        Self::from_rates(n_states, &rates)
    }

    /// `n -> n-1` at rate `μ` on `{0..n_states-1}`; state 0 absorbs.
    pub fn pure_death(n_states: usize, mu: T) -> Result<Self> {
        let rates: Vec<_> = (1..n_states).map(|k| (k, k - 1, mu.clone())).collect();
        Self::from_rates(n_states, &rates)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: labels.len() });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn rate(&self, i: usize, j: usize) -> &T {
        &self.matrix[(i, j)]
    }

    /// `λ(i) = Σ_{j≠i} q(i,j)`.
    pub fn exit_rate(&self, i: usize) -> T {
        -self.matrix[(i, i)].clone()
    }

    pub fn to_float(&self) -> Generator<f64> {
        Generator { matrix: self.matrix.to_f64(), labels: self.labels.clone() }
    }

    fn is_irreducible(&self) -> bool {
        let graph: Vec<Vec<usize>> = (0..self.n())
            .map(|i| (0..self.n()).filter(|&j| i != j && !self.matrix[(i, j)].is_zero()).collect())
            .collect();
        let reach = reachability(&graph);
        (0..self.n()).all(|i| (0..self.n()).all(|j| i == j || reach[i][j]))
    }
}

/// Jump chain `r(i,j) = q(i,j)/λ(i)` and exit rates. Rows of absorbing
/// states (`λ(i) = 0`) are `δ_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedChain<T> {
    pub exit_rates: Vec<T>,
    pub jump: StochasticMatrix<T>,
    pub absorbing: Vec<bool>,
}

pub fn embedded_chain<T: Scalar>(l: &Generator<T>) -> Result<EmbeddedChain<T>> {
    let n = l.n();
    let exit_rates: Vec<T> = (0..n).map(|i| l.exit_rate(i)).collect();
    let absorbing: Vec<bool> = exit_rates.iter().map(|x| x.is_zero()).collect();
    let jump = Matrix::from_fn(n, n, |i, j| {
        if absorbing[i] {
            if i == j {
                T::one()
            } else {
                T::zero()
            }
        } else if i == j {
            T::zero()
        } else {
            l.matrix[(i, j)].clone() / exit_rates[i].clone()
        }
    });
    let jump = if T::is_exact() {
        StochasticMatrix::validate(jump)?
    } else {
        StochasticMatrix::validate(renormalize_rows(jump))?
    };
    Ok(EmbeddedChain { exit_rates, jump, absorbing })
}

fn renormalize_rows<T: Scalar>(m: Matrix<T>) -> Matrix<T> {
    let sums: Vec<T> = (0..m.rows()).map(|i| m.row(i).iter().cloned().fold(T::zero(), |a, b| a + b)).collect();
    Matrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)].clone() / sums[i].clone())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JumpPath {
    pub horizon: f64,
    /// `T_0 = 0 < T_1 < ...`: times at which `states[k]` is entered.
    pub times: Vec<f64>,
    pub states: Vec<usize>,
}

impl JumpPath {
    pub fn state_at(&self, t: f64) -> usize {
        let k = self.times.partition_point(|&x| x <= t);
        self.states[k.saturating_sub(1)]
    }

    /// Fraction of `[0, T]` spent in each state.
    pub fn occupation(&self, n: usize) -> Vec<f64> {
        let mut occ = vec![0.0; n];
        for k in 0..self.states.len() {
            let end = self.times.get(k + 1).copied().unwrap_or(self.horizon);
            occ[self.states[k]] += end - self.times[k];
        }
        occ.iter_mut().for_each(|x| *x /= self.horizon);
        occ
    }
}

/// Exponential holding times with rate `λ(i)`, destinations from the jump
/// chain. An absorbing state holds until the horizon.
pub fn simulate_jump<T: Scalar, R: Rng + ?Sized>(l: &Generator<T>, i0: usize, horizon: f64, rng: &mut R) -> Result<JumpPath> {
    if i0 >= l.n() {
        return Err(Error::DimensionMismatch { expected: l.n(), found: i0 + 1 });
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Domain(format!("horizon must be positive, got {horizon}")));
    }
    let emb = embedded_chain(&l.to_float())?;
    let sampler = RowSampler::new(&emb.jump);
    let mut times = vec![0.0];
    let mut states = vec![i0];
    let mut t = 0.0;
    let mut x = i0;
    loop {
        if emb.absorbing[x] {
            break;
        }
        t += exponential_from_uniform(emb.exit_rates[x], rng.random::<f64>());
        if t > horizon {
            break;
        }
        x = sampler.sample(x, rng);
        times.push(t);
        states.push(x);
    }
    Ok(JumpPath { horizon, times, states })
}

pub const DEFAULT_KERNEL_TOLERANCE: f64 = 1e-12;
pub const MAX_UNIFORMIZATION_TERMS: usize = 1_000_000;

/// `P_t = e^{tL}` by uniformization: with `Λ = max λ(i)` and
/// `R = I + L/Λ`, `P_t = Σ_n e^{-Λt} (Λt)^n/n! · R^n`, truncated once the
/// Poisson tail drops below `tol`.
pub fn transition_kernel<T: Scalar>(l: &Generator<T>, t: f64, tol: f64) -> Result<StochasticMatrix<f64>> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time must be >= 0, got {t}")));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Domain(format!("tolerance must lie in (0, 1), got {tol}")));
    }
    let lf = l.to_float();
    let n = lf.n();
    let big_lambda = (0..n).map(|i| lf.exit_rate(i)).fold(0.0, f64::max);
    if t == 0.0 || big_lambda == 0.0 {
        return StochasticMatrix::validate(Matrix::identity(n));
    }
    let r = Matrix::identity(n).add(&lf.matrix.scale(&(1.0 / big_lambda)))?;
    let r = Matrix::from_fn(n, n, |i, j| r[(i, j)].max(0.0));
    let x = big_lambda * t;
    let ln_x = x.ln();

    let mut power = Matrix::identity(n);
    let mut acc: Matrix<f64> = Matrix::zeros(n, n);
    let mut ln_weight = -x;
    let mut mass = 0.0;
    let mut k = 0usize;
    loop {
        let w = ln_weight.exp();
        if w > 0.0 {
            acc = acc.add(&power.scale(&w))?;
            mass += w;
        }
        // Past the mode the remaining mass is below w/(1 - x/(k+1)).
        let past_mode = (k as f64 + 1.0) > x;
        if past_mode && 1.0 - mass < tol {
            let tail_bound = w * x / (k as f64 + 1.0 - x).max(1e-300) ;
            if tail_bound < tol {
                break;
            }
        }
        k += 1;
        if k > MAX_UNIFORMIZATION_TERMS {
            return Err(Error::ToleranceUnachievable { cap: MAX_UNIFORMIZATION_TERMS, tol });
        }
        power = power.mul(&r)?;
        ln_weight += ln_x - (k as f64).ln();
    }
    StochasticMatrix::validate(renormalize_rows(acc))
}

/// Unique `π` with `πL = 0`, `Σπ = 1`.
pub fn stationary_jump<T: Scalar>(l: &Generator<T>) -> Result<Distribution<T>> {
    if !l.is_irreducible() {
        return Err(Error::NotIrreducible);
    }
    let n = l.n();
    let a = Matrix::from_fn(n + 1, n, |i, j| if i == n { T::one() } else { l.matrix[(j, i)].clone() });
    let mut b = vec![T::zero(); n + 1];
    b[n] = T::one();
    match a.solve_unique(&b) {
        Ok(Some(pi)) => {
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

/// `π(i) q(i,j) = π(j) q(j,i)` via spanning-tree propagation and a full
/// pair check.
pub fn detailed_balance_jump<T: Scalar>(l: &Generator<T>) -> Result<ReversibilityCertificate<T>> {
    if !l.is_irreducible() {
        return Err(Error::NotIrreducible);
    }
    Ok(detailed_balance_certificate(l.n(), |i, j| if i == j { T::zero() } else { l.matrix[(i, j)].clone() }))
}

/// `π(n) ∝ (λ_{n-1}⋯λ_0)/(μ_n⋯μ_1)` on `{0..N}`.
pub fn birth_death_stationary<T: Scalar>(births: &[T], deaths: &[T]) -> Result<Distribution<T>> {
    if births.len() != deaths.len() {
        return Err(Error::DimensionMismatch { expected: births.len(), found: deaths.len() });
    }
    if let Some(k) = births.iter().chain(deaths).position(|r| !(*r > T::zero())) {
        let v = births.iter().chain(deaths).nth(k).expect("index from position");
        return Err(Error::NonPositiveRate(v.to_f64()));
    }
    let mut weights = vec![T::one()];
    for (b, d) in births.iter().zip(deaths) {
        let last = weights.last().expect("nonempty").clone();
        weights.push(last * b.clone() / d.clone());
    }
    let z = weights.iter().cloned().fold(T::zero(), |a, b| a + b);
    Distribution::new(weights.into_iter().map(|w| w / z.clone()).collect())
}

/// Infinite birth–death chain, truncated once the unnormalized terms fall
/// below `tail_tol` relative to their running sum. Fails when the terms stop
/// decaying before `cap`.
pub fn birth_death_stationary_infinite(
    birth: impl Fn(usize) -> f64,
    death: impl Fn(usize) -> f64,
    cap: usize,
    tail_tol: f64,
) -> Result<Vec<f64>> {
    let mut weights = vec![1.0];
    let mut sum = 1.0;
    let mut term = 1.0;
    for n in 1..=cap {
        let (b, d) = (birth(n - 1), death(n));
        if !(b > 0.0 && d > 0.0) {
            return Err(Error::NonPositiveRate(if b > 0.0 { d } else { b }));
        }
        let ratio = b / d;
        term *= ratio;
        if !term.is_finite() {
            return Err(Error::DivergentNormalizer);
        }
        weights.push(term);
        sum += term;
        if ratio < 1.0 && term < tail_tol * sum * (1.0 - ratio) {
            return Ok(weights.into_iter().map(|w| w / sum).collect());
        }
    }
    Err(Error::DivergentNormalizer)
}
