//! Finite Markov chains: validated transition matrices, distributions,
//! structural classification and trajectory sampling.

use num_integer::Integer;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Square row-stochastic matrix. Entries lie in `[0, 1]` and every row sums
/// to one (exactly for rationals, within `1e-12` for floats).
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix<T> {
    matrix: Matrix<T>,
    labels: Option<Vec<String>>,
}

impl<T: Scalar> StochasticMatrix<T> {
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        Self::validate(Matrix::from_rows(rows)?)
    }

    /// Checks a raw matrix. Nothing is normalized: bad input is rejected.
    pub fn validate(matrix: Matrix<T>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare { rows: matrix.rows(), cols: matrix.cols() });
        }
        if matrix.rows() == 0 {
            return Err(Error::Empty);
        }
        let one = T::one();
        for i in 0..matrix.rows() {
            let mut sum = T::zero();
            for (j, x) in matrix.row(i).iter().enumerate() {
                if *x < T::zero() {
                    return Err(Error::NegativeEntry { row: i, col: j, value: x.to_string() });
                }
                if *x > one.clone() + T::tolerance() {
                    return Err(Error::EntryAboveOne { row: i, col: j, value: x.to_string() });
                }
                sum = sum + x.clone();
            }
            let deviation = sum.clone() - one.clone();
            if !deviation.is_negligible() {
                return Err(Error::RowSumNotOne {
                    row: i,
                    sum: sum.to_string(),
                    deviation: deviation.to_string(),
                });
            }
        }
        Ok(Self { matrix, labels: None })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: labels.len() });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.matrix[(i, j)]
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Label of state `i`, or its 1-based index.
    pub fn label(&self, i: usize) -> String {
        self.labels.as_ref().map_or_else(|| (i + 1).to_string(), |l| l[i].clone())
    }

    pub fn product(&self, other: &Self) -> Result<Self> {
        Self::validate(self.matrix.mul(&other.matrix)?)
    }

    pub fn power(&self, m: u64) -> Result<Self> {
        let mut out = Self::validate(self.matrix.pow(m)?)?;
        out.labels = self.labels.clone();
        Ok(out)
    }

    pub fn to_float(&self) -> StochasticMatrix<f64> {
        StochasticMatrix { matrix: self.matrix.to_f64(), labels: self.labels.clone() }
    }

    /// Relabels states so that new state `k` is old state `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        if perm.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: perm.len() });
        }
        let matrix = Matrix::from_fn(n, n, |i, j| self.matrix[(perm[i], perm[j])].clone());
        let labels = self.labels.as_ref().map(|l| perm.iter().map(|&k| l[k].clone()).collect());
        Ok(Self { matrix, labels })
    }

    pub fn is_absorbing_state(&self, i: usize) -> bool {
        self.matrix[(i, i)] == T::one()
    }

    /// Successor lists of the positive-probability digraph.
    pub fn support_graph(&self) -> Vec<Vec<usize>> {
        (0..self.n())
            .map(|i| (0..self.n()).filter(|&j| !self.matrix[(i, j)].is_zero()).collect())
            .collect()
    }
}

/// Probability vector over a finite state set.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution<T> {
    probs: Vec<T>,
}

impl<T: Scalar> Distribution<T> {
    pub fn new(probs: Vec<T>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Empty);
        }
        if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| **p < T::zero()) {
            return Err(Error::BadDistribution(format!("entry {i} is negative ({p})")));
        }
        let sum = probs.iter().cloned().fold(T::zero(), |a, b| a + b);
        if !(sum.clone() - T::one()).is_negligible() {
            return Err(Error::BadDistribution(format!("entries sum to {sum}")));
        }
        Ok(Self { probs })
    }

    /// Point mass at state `i`.
    pub fn delta(n: usize, i: usize) -> Self {
        let mut probs = vec![T::zero(); n];
        probs[i] = T::one();
        Self { probs }
    }

    pub fn uniform(n: usize) -> Self {
        Self { probs: vec![T::from_ratio(1, n as i64); n] }
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn into_vec(self) -> Vec<T> {
        self.probs
    }

    pub fn to_float(&self) -> Distribution<f64> {
        Distribution { probs: self.probs.iter().map(T::to_f64).collect() }
    }

    pub fn l1_distance(&self, other: &Self) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a.clone() - b.clone()).abs().to_f64())
            .sum()
    }
}

/// Law of the chain after `m` steps: `ν P^m`.
pub fn power_step<T: Scalar>(
    nu: &Distribution<T>,
    p: &StochasticMatrix<T>,
    m: u64,
) -> Result<Distribution<T>> {
    if nu.len() != p.n() {
        return Err(Error::DimensionMismatch { expected: p.n(), found: nu.len() });
    }
    let mut v = nu.probs.clone();
    // Vector iteration beats squaring unless m is large relative to n.
    if m as usize <= 4 * p.n() {
        for _ in 0..m {
            v = p.matrix.left_mul_vec(&v)?;
        }
    } else {
        v = p.matrix.pow(m)?.left_mul_vec(&v)?;
    }
    Ok(Distribution { probs: v })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassKind {
    /// No probability leaks out of the class.
    Closed,
    /// Some path leaves the class and never comes back.
    Open,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainClassification {
    /// Communication classes, each sorted, ordered by smallest member.
    pub classes: Vec<Vec<usize>>,
    pub class_kind: Vec<ClassKind>,
    pub class_of: Vec<usize>,
    pub irreducible: bool,
    pub absorbing_chain: bool,
    pub absorbing_states: Vec<usize>,
    pub regular: bool,
    /// Smallest `k` with `P^k` entrywise positive, when found below the cap.
    pub regular_witness: Option<u64>,
    /// `None` for states that never return to themselves.
    pub periods: Vec<Option<usize>>,
}

/// Classical primitivity bound `(n-1)^2 + 1`.
pub fn default_regular_cap(n: usize) -> u64 {
    let m = n.saturating_sub(1) as u64;
    m * m + 1
}

pub fn classify<T: Scalar>(p: &StochasticMatrix<T>, regular_exponent_cap: u64) -> ChainClassification {
    let n = p.n();
    let graph = p.support_graph();
    let reach = reachability(&graph);

    let mut class_of = vec![usize::MAX; n];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if class_of[i] != usize::MAX {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|&j| j == i || (reach[i][j] && reach[j][i])).collect();
        for &j in &members {
            class_of[j] = classes.len();
        }
        classes.push(members);
    }

    let class_kind = classes
        .iter()
        .enumerate()
        .map(|(c, members)| {
            let leaks = members.iter().any(|&i| graph[i].iter().any(|&j| class_of[j] != c));
            if leaks {
                ClassKind::Open
            } else {
                ClassKind::Closed
            }
        })
        .collect();

    let absorbing_states: Vec<usize> = (0..n).filter(|&i| p.is_absorbing_state(i)).collect();
    let absorbing_chain = !absorbing_states.is_empty()
        && (0..n).all(|i| absorbing_states.iter().any(|&a| a == i || reach[i][a]));
    let irreducible = classes.len() == 1;

    let periods: Vec<Option<usize>> = {
        let mut by_class = vec![None; classes.len()];
        for (c, members) in classes.iter().enumerate() {
            by_class[c] = class_period(&graph, members, &class_of, c);
        }
        (0..n).map(|i| by_class[class_of[i]]).collect()
    };

    let (regular, regular_witness) = if irreducible && periods[0] == Some(1) {
        match primitive_exponent(&graph, regular_exponent_cap) {
            Some(k) => (true, Some(k)),
            None => (false, None),
        }
    } else {
        (false, None)
    };

    ChainClassification {
        classes,
        class_kind,
        class_of,
        irreducible,
        absorbing_chain,
        absorbing_states,
        regular,
        regular_witness,
        periods,
    }
}

/// Period of state `i`: gcd of the lengths of its return paths.
pub fn period<T: Scalar>(p: &StochasticMatrix<T>, i: usize) -> Result<usize> {
    if i >= p.n() {
        return Err(Error::DimensionMismatch { expected: p.n(), found: i + 1 });
    }
    let graph = p.support_graph();
    let reach = reachability(&graph);
    let members: Vec<usize> = (0..p.n()).filter(|&j| j == i || (reach[i][j] && reach[j][i])).collect();
    let mut class_of = vec![1usize; p.n()];
    for &j in &members {
        class_of[j] = 0;
    }
    class_period(&graph, &members, &class_of, 0).ok_or(Error::NoReturnPath { state: i })
}

/// BFS levels from the first member; the period is the gcd of
/// `level(u) + 1 - level(v)` over all edges `u -> v` inside the class.
fn class_period(graph: &[Vec<usize>], members: &[usize], class_of: &[usize], c: usize) -> Option<usize> {
    let root = members[0];
    let mut level = vec![usize::MAX; graph.len()];
    level[root] = 0;
    let mut queue = std::collections::VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &v in &graph[u] {
            if class_of[v] == c && level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let mut d = 0usize;
    let mut has_cycle = false;
    for &u in members {
        for &v in &graph[u] {
            if class_of[v] == c {
                has_cycle = true;
                let diff = (level[u] as i64 + 1 - level[v] as i64).unsigned_abs() as usize;
                d = d.gcd(&diff);
            }
        }
    }
    has_cycle.then_some(d)
}

pub(crate) fn reachability(graph: &[Vec<usize>]) -> Vec<Vec<bool>> {
    let n = graph.len();
    (0..n)
        .map(|s| {
            let mut seen = vec![false; n];
            let mut stack: Vec<usize> = graph[s].clone();
            while let Some(u) = stack.pop() {
                if !seen[u] {
                    seen[u] = true;
                    stack.extend(graph[u].iter().copied().filter(|&v| !seen[v]));
                }
            }
            seen
        })
        .collect()
}

/// Smallest `k <= cap` with every entry of the `k`-step support positive,
/// using bitset rows of the positivity pattern.
fn primitive_exponent(graph: &[Vec<usize>], cap: u64) -> Option<u64> {
    let n = graph.len();
    let words = n.div_ceil(64);
    let base: Vec<Vec<u64>> = graph
        .iter()
        .map(|succ| {
            let mut row = vec![0u64; words];
            for &j in succ {
                row[j / 64] |= 1 << (j % 64);
            }
            row
        })
        .collect();
    let full = |row: &[u64]| {
        (0..n).all(|j| row[j / 64] >> (j % 64) & 1 == 1)
    };
    let mut current = base.clone();
    for k in 1..=cap {
        if current.iter().all(|r| full(r)) {
            return Some(k);
        }
        if k == cap {
            break;
        }
        current = current
            .iter()
            .map(|row| {
                let mut next = vec![0u64; words];
                for j in 0..n {
                    if row[j / 64] >> (j % 64) & 1 == 1 {
                        for (w, b) in next.iter_mut().zip(&base[j]) {
                            *w |= b;
                        }
                    }
                }
                next
            })
            .collect();
    }
    None
}

/// Inverse-CDF sampler over the rows of a transition matrix.
#[derive(Debug, Clone)]
pub struct RowSampler {
    cumulative: Vec<Vec<f64>>,
}

impl RowSampler {
    pub fn new<T: Scalar>(p: &StochasticMatrix<T>) -> Self {
        let cumulative = (0..p.n())
            .map(|i| {
                let mut acc = 0.0;
                p.matrix.row(i).iter().map(|x| {
                    acc += x.to_f64();
                    acc
                }).collect()
            })
            .collect();
        Self { cumulative }
    }

    pub fn from_weights(weights: &[f64]) -> Self {
        let mut acc = 0.0;
        Self {
            cumulative: vec![weights.iter().map(|w| {
                acc += w;
                acc
            }).collect()],
        }
    }

    /// Maps a uniform draw `u` in `[0, 1)` to the next state from `row`.
    pub fn pick(&self, row: usize, u: f64) -> usize {
        let cum = &self.cumulative[row];
        let total = *cum.last().unwrap_or(&1.0);
        let target = u * total;
        let j = cum.partition_point(|&c| c <= target);
        if j < cum.len() {
            j
        } else {
            // Rounding left the last partial sum below u: take the last state with mass.
            let mut k = cum.len() - 1;
            while k > 0 && cum[k] == cum[k - 1] {
                k -= 1;
            }
            k
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, row: usize, rng: &mut R) -> usize {
        self.pick(row, rng.random::<f64>())
    }
}

/// Samples `X_0, ..., X_steps` with `X_0 ~ ν`.
pub fn simulate_trajectory<T: Scalar, R: Rng + ?Sized>(
    p: &StochasticMatrix<T>,
    nu: &Distribution<T>,
    steps: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if nu.len() != p.n() {
        return Err(Error::DimensionMismatch { expected: p.n(), found: nu.len() });
    }
    let initial = RowSampler::from_weights(&nu.probs.iter().map(T::to_f64).collect::<Vec<_>>());
    let sampler = RowSampler::new(p);
    let mut path = Vec::with_capacity(steps + 1);
    let mut x = initial.sample(0, rng);
    path.push(x);
    for _ in 0..steps {
        x = sampler.sample(x, rng);
        path.push(x);
    }
    Ok(path)
}

/// Runs from `start` until an absorbing state is hit (or `max_steps` pass).
/// Returns the absorbing state and the number of steps taken.
pub fn run_until_absorbed<R: Rng + ?Sized>(
    sampler: &RowSampler,
    absorbing: &[bool],
    start: usize,
    max_steps: usize,
    rng: &mut R,
) -> Option<(usize, usize)> {
    let mut x = start;
    for step in 0..=max_steps {
        if absorbing[x] {
            return Some((x, step));
        }
        x = sampler.sample(x, rng);
    }
    None
}
