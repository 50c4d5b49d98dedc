//! Metropolis sampling over energy models, the MCMC mean estimator and
//! simulated annealing.

pub mod ising;
pub mod tsp;

use std::fmt::Debug;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use crate::chain::{RowSampler, StochasticMatrix};
use crate::error::{Error, Result};

/// How a proposed move with energy change `ΔH` is accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AcceptanceRule {
    /// `min(1, e^{-βΔH})`.
    Threshold,
    /// `1 / (1 + e^{βΔH})`.
    HeatBath,
}

impl FromStr for AcceptanceRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "threshold" | "metropolis" => Ok(Self::Threshold),
            "heatbath" | "heat-bath" => Ok(Self::HeatBath),
            other => Err(Error::Parse(format!("unknown acceptance rule '{other}'"))),
        }
    }
}

/// Acceptance probability of a move with energy change `dh`. An infinite
/// `β` is the zero-temperature limit.
pub fn acceptance_probability(rule: AcceptanceRule, beta: f64, dh: f64) -> f64 {
    match rule {
        AcceptanceRule::Threshold => {
            if dh <= 0.0 {
                1.0
            } else if beta.is_infinite() {
                0.0
            } else {
                (-beta * dh).exp()
            }
        }
        AcceptanceRule::HeatBath => {
            if dh == 0.0 || beta == 0.0 {
                return 0.5;
            }
            if beta.is_infinite() {
                return if dh < 0.0 { 1.0 } else { 0.0 };
            }
            let x = beta * dh;
            if x > 0.0 {
                let e = (-x).exp();
                e / (1.0 + e)
            } else {
                1.0 / (1.0 + x.exp())
            }
        }
    }
}

/// State space with an energy and a symmetric proposal relation.
pub trait EnergyModel {
    type State: Clone;
    type Move: Copy + Debug;

    fn energy(&self, state: &Self::State) -> f64;

    /// Draws a move with probability `q_{σσ'}`.
    fn propose<R: Rng + ?Sized>(&self, state: &Self::State, rng: &mut R) -> Result<Self::Move>;

    fn delta_energy(&self, state: &Self::State, mv: Self::Move) -> f64;

    fn apply(&self, state: &mut Self::State, mv: Self::Move);
}

/// One Metropolis step. Returns whether the proposal was accepted.
pub fn metropolis_step<M: EnergyModel, R: Rng + ?Sized>(
    model: &M,
    state: &mut M::State,
    beta: f64,
    rule: AcceptanceRule,
    rng: &mut R,
) -> Result<bool> {
    if beta.is_nan() || beta < 0.0 {
        return Err(Error::Domain(format!("inverse temperature must be >= 0, got {beta}")));
    }
    let mv = model.propose(state, rng)?;
    let a = acceptance_probability(rule, beta, model.delta_energy(state, mv));
    let accept = a >= 1.0 || rng.random::<f64>() < a;
    if accept {
        model.apply(state, mv);
    }
    Ok(accept)
}

/// Model on states `0..n` with explicit energies and a symmetric proposal
/// matrix `q` whose rows sum to one.
#[derive(Debug, Clone)]
pub struct FiniteModel {
    energies: Vec<f64>,
    proposal: Vec<Vec<f64>>,
    sampler: RowSampler,
}

impl FiniteModel {
    pub fn new(energies: Vec<f64>, proposal: Vec<Vec<f64>>) -> Result<Self> {
        let q = StochasticMatrix::new(proposal.clone())?;
        if energies.len() != q.n() {
            return Err(Error::DimensionMismatch { expected: q.n(), found: energies.len() });
        }
        for i in 0..q.n() {
            for j in i + 1..q.n() {
                if (q.get(i, j) - q.get(j, i)).abs() > 1e-12 {
                    return Err(Error::Domain(format!("proposal is not symmetric at ({i}, {j})")));
                }
            }
        }
        let sampler = RowSampler::new(&q);
        Ok(Self { energies, proposal, sampler })
    }

    /// States `{0, 1}` with energies `(h0, h1)`, always proposing the other state.
    pub fn two_level(h0: f64, h1: f64) -> Self {
        Self::new(vec![h0, h1], vec![vec![0.0, 1.0], vec![1.0, 0.0]]).expect("valid two-level model")
    }

    /// Ring `0..=n` with `±1` proposals of weight 1/2 and energies
    /// `-ln C(n, i)`, so the Gibbs measure at `β = 1` is Binomial(n, 1/2).
    pub fn binomial_ring(n: usize) -> Self {
        let m = n + 1;
        let energies = (0..m).map(|i| -crate::distributions::ln_choose(n as u64, i as u64)).collect();
        let proposal = (0..m)
            .map(|i| {
                let mut row = vec![0.0; m];
                row[(i + 1) % m] += 0.5;
                row[(i + m - 1) % m] += 0.5;
                row
            })
            .collect();
        Self::new(energies, proposal).expect("valid ring model")
    }

    pub fn n(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// `e^{-βH}/Z`.
    pub fn gibbs(&self, beta: f64) -> Vec<f64> {
        gibbs_measure(&self.energies, beta)
    }

    /// Transition matrix of the Metropolis chain.
    pub fn kernel(&self, beta: f64, rule: AcceptanceRule) -> Result<StochasticMatrix<f64>> {
        let n = self.n();
        let mut rows = vec![vec![0.0; n]; n];
        for i in 0..n {
            let mut off = 0.0;
            for j in 0..n {
                if i != j && self.proposal[i][j] > 0.0 {
                    let p = self.proposal[i][j] * acceptance_probability(rule, beta, self.energies[j] - self.energies[i]);
                    rows[i][j] = p;
                    off += p;
                }
            }
            rows[i][i] = 1.0 - off;
        }
        StochasticMatrix::new(rows)
    }
}

impl EnergyModel for FiniteModel {
    type State = usize;
    type Move = usize;

    fn energy(&self, state: &usize) -> f64 {
        self.energies[*state]
    }

    fn propose<R: Rng + ?Sized>(&self, state: &usize, rng: &mut R) -> Result<usize> {
        Ok(self.sampler.sample(*state, rng))
    }

    fn delta_energy(&self, state: &usize, mv: usize) -> f64 {
        self.energies[mv] - self.energies[*state]
    }

    fn apply(&self, state: &mut usize, mv: usize) {
        *state = mv;
    }
}

/// Normalized `e^{-β H(σ)}`, shifted by the minimum energy for stability.
pub fn gibbs_measure(energies: &[f64], beta: f64) -> Vec<f64> {
    let min = energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = energies.iter().map(|h| (-beta * (h - min)).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleSizeBound {
    pub variance: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub lambda0: f64,
    /// `(Var Y / δ²ε) · (1 + |λ₀|) / (1 − |λ₀|)`.
    pub n_required: f64,
    /// The bound holds for a chain started in its stationary law.
    pub assumes_stationary_start: bool,
}

/// Run length that reaches precision `δ` with probability `1 - ε`.
pub fn sample_size_bound(variance: f64, delta: f64, epsilon: f64, lambda0: f64) -> Result<SampleSizeBound> {
    if !(delta > 0.0 && epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain("need delta > 0 and 0 < epsilon < 1".into()));
    }
    let l = lambda0.abs();
    if l >= 1.0 {
        return Err(Error::Domain("|λ₀| must be below 1 for a finite bound".into()));
    }
    let n_required = variance / (delta * delta * epsilon) * (1.0 + l) / (1.0 - l);
    Ok(SampleSizeBound { variance, delta, epsilon, lambda0: l, n_required, assumes_stationary_start: true })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorReport {
    /// `S_n = (1/n) Σ_{m<n} Y_m` over the post-burn-in states.
    pub estimate: f64,
    pub n: usize,
    pub burn_in: usize,
    pub sample_variance: f64,
    pub acceptance_rate: f64,
    pub bound: Option<SampleSizeBound>,
}

/// Planner inputs: `(|λ₀|, δ, ε)`. The variance is the sample variance of `Y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Planner {
    pub lambda0: f64,
    pub delta: f64,
    pub epsilon: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn mcmc_mean_estimator<M: EnergyModel, R: Rng + ?Sized>(
    model: &M,
    start: M::State,
    beta: f64,
    rule: AcceptanceRule,
    observable: impl Fn(&M::State) -> f64,
    n: usize,
    burn_in: usize,
    planner: Option<Planner>,
    rng: &mut R,
) -> Result<EstimatorReport> {
    if n == 0 {
        return Err(Error::Domain("estimator needs n >= 1".into()));
    }
    let mut state = start;
    for _ in 0..burn_in {
        metropolis_step(model, &mut state, beta, rule, rng)?;
    }
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut accepted = 0usize;
    for m in 0..n {
        let y = observable(&state);
        sum += y;
        sum_sq += y * y;
        if m + 1 < n && metropolis_step(model, &mut state, beta, rule, rng)? {
            accepted += 1;
        }
    }
    let estimate = sum / n as f64;
    let sample_variance = if n > 1 { ((sum_sq - n as f64 * estimate * estimate) / (n as f64 - 1.0)).max(0.0) } else { 0.0 };
    let bound = planner
        .map(|p| sample_size_bound(sample_variance, p.delta, p.epsilon, p.lambda0))
        .transpose()?;
    Ok(EstimatorReport {
        estimate,
        n,
        burn_in,
        sample_variance,
        acceptance_rate: if n > 1 { accepted as f64 / (n - 1) as f64 } else { 0.0 },
        bound,
    })
}

/// `β_n = β₀ Kⁿ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnealSchedule {
    pub beta0: f64,
    pub k: f64,
    pub steps: usize,
}

impl AnnealSchedule {
    pub fn new(beta0: f64, k: f64, steps: usize) -> Result<Self> {
        if !(beta0 > 0.0 && beta0.is_finite()) {
            return Err(Error::Domain(format!("beta0 must be positive, got {beta0}")));
        }
        if !(k > 1.0 && k.is_finite()) {
            return Err(Error::Domain(format!("cooling factor K must exceed 1, got {k}")));
        }
        Ok(Self { beta0, k, steps })
    }

    pub fn beta(&self, n: usize) -> f64 {
        self.beta0 * self.k.powf(n as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::RngStream;

    #[test]
    fn acceptance_rules() {
        assert_eq!(acceptance_probability(AcceptanceRule::Threshold, 0.0, 5.0), 1.0);
        assert!((acceptance_probability(AcceptanceRule::Threshold, 0.25, 8.0) - (-2.0f64).exp()).abs() < 1e-15);
        assert_eq!(acceptance_probability(AcceptanceRule::Threshold, f64::INFINITY, 1.0), 0.0);
        assert_eq!(acceptance_probability(AcceptanceRule::Threshold, f64::INFINITY, -1.0), 1.0);
        assert_eq!(acceptance_probability(AcceptanceRule::HeatBath, 0.0, 3.0), 0.5);
        let hb = acceptance_probability(AcceptanceRule::HeatBath, 1.0, 2.0);
        assert!((hb - 1.0 / (1.0 + 2f64.exp())).abs() < 1e-15);
        assert_eq!(acceptance_probability(AcceptanceRule::HeatBath, 1.0, 1e6), 0.0);
    }

    #[test]
    fn kernel_satisfies_detailed_balance() {
        let m = FiniteModel::binomial_ring(4);
        for rule in [AcceptanceRule::Threshold, AcceptanceRule::HeatBath] {
            for beta in [0.0, 0.7, 2.0] {
                let p = m.kernel(beta, rule).unwrap();
                let pi = m.gibbs(beta);
                for i in 0..m.n() {
                    for j in 0..m.n() {
                        assert!((pi[i] * p.get(i, j) - pi[j] * p.get(j, i)).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn two_level_occupation() {
        let m = FiniteModel::two_level(0.0, 1.0);
        let mut rng = RngStream::new(11, 0);
        let mut s = 0usize;
        let steps = 1_000_000;
        let mut ones = 0usize;
        for _ in 0..steps {
            metropolis_step(&m, &mut s, 1.0, AcceptanceRule::Threshold, &mut rng).unwrap();
            ones += s;
        }
        let target = (-1.0f64).exp() / (1.0 + (-1.0f64).exp());
        assert!((ones as f64 / steps as f64 - target).abs() < 0.005);
    }

    #[test]
    fn constant_observable_is_exact() {
        let m = FiniteModel::two_level(0.0, 1.0);
        let rep = mcmc_mean_estimator(&m, 0, 1.0, AcceptanceRule::Threshold, |_| 3.5, 1000, 10, None, &mut RngStream::new(1, 0))
            .unwrap();
        assert_eq!(rep.estimate, 3.5);
    }

    #[test]
    fn planner_formula() {
        let b = sample_size_bound(0.25, 0.01, 0.05, 0.5).unwrap();
        assert!((b.n_required - 0.25 / (1e-4 * 0.05) * 3.0).abs() < 1e-6);
        assert!(sample_size_bound(1.0, 0.01, 0.05, 1.0).is_err());
    }

    #[test]
    fn schedule_is_increasing() {
        let s = AnnealSchedule::new(0.1, 1.001, 10).unwrap();
        assert!(s.beta(1) > s.beta(0));
        assert!((s.beta(0) - 0.1).abs() < 1e-15);
        assert!(AnnealSchedule::new(0.1, 1.0, 10).is_err());
    }
}
