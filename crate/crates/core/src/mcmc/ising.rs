//! Ising model on a box of `Z^d` with Glauber and Kawasaki dynamics.
//!
//! `H(σ) = -Σ_{<i,j>} σ_i σ_j - h Σ_i σ_i`, each nearest-neighbour pair
//! counted once. Boundaries are free unless `periodic` is set.

use rand::Rng;
use serde::Serialize;

use super::{metropolis_step, AcceptanceRule, EnergyModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct IsingConfig {
    dims: Vec<usize>,
    spins: Vec<i8>,
    neighbors: Vec<Vec<usize>>,
    h: f64,
    periodic: bool,
    total: i64,
}

impl IsingConfig {
    pub fn new(dims: Vec<usize>, spins: Vec<i8>, h: f64, periodic: bool) -> Result<Self> {
        let n: usize = dims.iter().product();
        if dims.is_empty() || n == 0 {
            return Err(Error::Domain("lattice needs at least one site".into()));
        }
        if spins.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: spins.len() });
        }
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Domain("spins must be +1 or -1".into()));
        }
        let neighbors = build_neighbors(&dims, periodic);
        let total = spins.iter().map(|&s| s as i64).sum();
        Ok(Self { dims, spins, neighbors, h, periodic, total })
    }

    pub fn uniform(dims: Vec<usize>, spin: i8, h: f64) -> Result<Self> {
        let n = dims.iter().product();
        Self::new(dims, vec![spin; n], h, false)
    }

    pub fn random<R: Rng + ?Sized>(dims: Vec<usize>, h: f64, rng: &mut R) -> Result<Self> {
        let n = dims.iter().product();
        let spins = (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        Self::new(dims, spins, h, false)
    }

    /// Configuration number `code` of a small lattice: bit `k` set means `σ_k = +1`.
    pub fn from_index(dims: Vec<usize>, code: usize, h: f64) -> Result<Self> {
        let n: usize = dims.iter().product();
        let spins = (0..n).map(|k| if code >> k & 1 == 1 { 1 } else { -1 }).collect();
        Self::new(dims, spins, h, false)
    }

    pub fn index(&self) -> usize {
        self.spins.iter().enumerate().filter(|(_, &s)| s == 1).map(|(k, _)| 1 << k).sum()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn field(&self) -> f64 {
        self.h
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn n_sites(&self) -> usize {
        self.spins.len()
    }

    /// `Σ σ_i`, tracked incrementally.
    pub fn total_spin(&self) -> i64 {
        self.total
    }

    /// `m(σ) = (1/|Λ|) Σ σ_i`.
    pub fn magnetization(&self) -> f64 {
        self.total as f64 / self.n_sites() as f64
    }

    pub fn energy(&self) -> f64 {
        let mut pairs = 0i64;
        for (k, nb) in self.neighbors.iter().enumerate() {
            for &j in nb {
                if j > k {
                    pairs += (self.spins[k] * self.spins[j]) as i64;
                }
            }
        }
        -(pairs as f64) - self.h * self.total as f64
    }

    fn neighbor_sum(&self, k: usize) -> i64 {
        self.neighbors[k].iter().map(|&j| self.spins[j] as i64).sum()
    }

    pub fn flip(&mut self, k: usize) {
        self.spins[k] = -self.spins[k];
        self.total += 2 * self.spins[k] as i64;
    }

    fn swap(&mut self, i: usize, j: usize) {
        self.spins.swap(i, j);
    }
}

fn build_neighbors(dims: &[usize], periodic: bool) -> Vec<Vec<usize>> {
    let n: usize = dims.iter().product();
    let mut strides = vec![1usize; dims.len()];
    for a in 1..dims.len() {
        strides[a] = strides[a - 1] * dims[a - 1];
    }
    (0..n)
        .map(|k| {
            let mut nb = Vec::with_capacity(2 * dims.len());
            for (&len, &stride) in dims.iter().zip(&strides) {
                let c = k / stride % len;
                if c + 1 < len {
                    nb.push(k + stride);
                } else if periodic && len > 2 {
                    nb.push(k + stride - len * stride);
                }
                if c > 0 {
                    nb.push(k - stride);
                } else if periodic && len > 2 {
                    nb.push(k + (len - 1) * stride);
                }
            }
            nb
        })
        .collect()
}

/// `ΔH = 2σ_k (Σ_{j~k} σ_j + h)` for flipping spin `k`.
pub fn ising_delta_h(config: &IsingConfig, k: usize) -> Result<f64> {
    if k >= config.n_sites() {
        return Err(Error::BadSite(k));
    }
    Ok(flip_delta(config, k))
}

fn flip_delta(config: &IsingConfig, k: usize) -> f64 {
    2.0 * config.spins[k] as f64 * (config.neighbor_sum(k) as f64 + config.h)
}

/// Single-spin-flip proposals, site chosen uniformly.
#[derive(Debug, Clone, Copy, Default)]
pub struct Glauber;

impl EnergyModel for Glauber {
    type State = IsingConfig;
    type Move = usize;

    fn energy(&self, s: &IsingConfig) -> f64 {
        s.energy()
    }

    fn propose<R: Rng + ?Sized>(&self, s: &IsingConfig, rng: &mut R) -> Result<usize> {
        Ok(rng.random_range(0..s.n_sites()))
    }

    fn delta_energy(&self, s: &IsingConfig, k: usize) -> f64 {
        flip_delta(s, k)
    }

    fn apply(&self, s: &mut IsingConfig, k: usize) {
        s.flip(k);
    }
}

/// Exchange of two opposite spins, uniform over all such pairs.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kawasaki;

impl EnergyModel for Kawasaki {
    type State = IsingConfig;
    type Move = (usize, usize);

    fn energy(&self, s: &IsingConfig) -> f64 {
        s.energy()
    }

    fn propose<R: Rng + ?Sized>(&self, s: &IsingConfig, rng: &mut R) -> Result<(usize, usize)> {
        let n = s.n_sites() as i64;
        if s.total.abs() == n {
            return Err(Error::UniformConfig);
        }
        // Independent uniform picks among + and - sites give a uniform pair.
        let pick = |rng: &mut R, spin: i8| loop {
            let k = rng.random_range(0..s.n_sites());
            if s.spins[k] == spin {
                break k;
            }
        };
        let i = pick(rng, 1);
        let j = pick(rng, -1);
        Ok((i, j))
    }

    fn delta_energy(&self, s: &IsingConfig, (i, j): (usize, usize)) -> f64 {
        // Flip i, then flip j in the configuration where i is already flipped.
        let si = s.spins[i] as f64;
        let sj = s.spins[j] as f64;
        let mut sum_j = s.neighbor_sum(j) as f64;
        if s.neighbors[j].contains(&i) {
            sum_j -= 2.0 * si;
        }
        2.0 * si * (s.neighbor_sum(i) as f64 + s.h) + 2.0 * sj * (sum_j + s.h)
    }

    fn apply(&self, s: &mut IsingConfig, (i, j): (usize, usize)) {
        s.swap(i, j);
    }
}

pub fn kawasaki_step<R: Rng + ?Sized>(config: &mut IsingConfig, beta: f64, rule: AcceptanceRule, rng: &mut R) -> Result<bool> {
    metropolis_step(&Kawasaki, config, beta, rule, rng)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlauberRun {
    pub steps: usize,
    /// `(n, m_n)` every `record_every` steps, starting with `n = 0`.
    pub series: Vec<(usize, f64)>,
    pub final_magnetization: f64,
    /// `S/(n+1)` with `S = Σ_{k<=n} m_k`.
    pub mean_magnetization: f64,
    pub mean_abs_magnetization: f64,
    pub acceptance_rate: f64,
}

/// Glauber chain keeping `m` up to date incrementally: after flipping spin
/// `k`, `m_n = m_{n-1} + 2σ_k(n)/N` with `σ_k(n)` the new value.
pub fn glauber_chain<R: Rng + ?Sized>(
    config: &mut IsingConfig,
    beta: f64,
    rule: AcceptanceRule,
    steps: usize,
    record_every: usize,
    rng: &mut R,
) -> Result<GlauberRun> {
    let n_sites = config.n_sites() as f64;
    let mut m = config.magnetization();
    let mut sum = m;
    let mut sum_abs = m.abs();
    let mut accepted = 0usize;
    let mut series = vec![(0, m)];
    for n in 1..=steps {
        let k = Glauber.propose(config, rng)?;
        let a = super::acceptance_probability(rule, beta, flip_delta(config, k));
        if a >= 1.0 || rng.random::<f64>() < a {
            config.flip(k);
            m += 2.0 * config.spins[k] as f64 / n_sites;
            accepted += 1;
        }
        sum += m;
        sum_abs += m.abs();
        if record_every > 0 && n % record_every == 0 {
            // Resynchronize with the exact integer total to shed rounding drift.
            m = config.magnetization();
            series.push((n, m));
        }
    }
    let count = (steps + 1) as f64;
    Ok(GlauberRun {
        steps,
        series,
        final_magnetization: config.magnetization(),
        mean_magnetization: sum / count,
        mean_abs_magnetization: sum_abs / count,
        acceptance_rate: if steps > 0 { accepted as f64 / steps as f64 } else { 0.0 },
    })
}

/// Exact Gibbs weights of every configuration of a small lattice, indexed
/// as in [`IsingConfig::index`].
pub fn gibbs_enumeration(dims: &[usize], h: f64, beta: f64) -> Result<Vec<f64>> {
    let n: usize = dims.iter().product();
    if n > 20 {
        return Err(Error::Domain("enumeration limited to 20 sites".into()));
    }
    let energies: Vec<f64> = (0..1usize << n)
        .map(|code| IsingConfig::from_index(dims.to_vec(), code, h).map(|c| c.energy()))
        .collect::<Result<_>>()?;
    Ok(super::gibbs_measure(&energies, beta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::RngStream;

    #[test]
    fn delta_h_examples() {
        let c = IsingConfig::uniform(vec![3, 3], 1, 0.0).unwrap();
        assert_eq!(ising_delta_h(&c, 4).unwrap(), 8.0);
        let c = IsingConfig::uniform(vec![2, 2], 1, 0.0).unwrap();
        assert_eq!(ising_delta_h(&c, 0).unwrap(), 4.0);
        assert_eq!(ising_delta_h(&c, 4), Err(Error::BadSite(4)));
    }

    #[test]
    fn delta_h_matches_recomputed_energy() {
        let mut rng = RngStream::new(3, 0);
        for trial in 0..1000 {
            let dims = if trial % 2 == 0 { vec![4, 5] } else { vec![3, 3, 2] };
            let h = (trial % 3) as f64 - 1.0;
            let c = IsingConfig::random(dims, h, &mut rng).unwrap();
            let k = rng.random_range(0..c.n_sites());
            let mut flipped = c.clone();
            flipped.flip(k);
            assert_eq!(ising_delta_h(&c, k).unwrap(), flipped.energy() - c.energy());
        }
    }

    #[test]
    fn kawasaki_delta_matches_recomputed_energy() {
        let mut rng = RngStream::new(4, 0);
        for _ in 0..500 {
            let c = IsingConfig::random(vec![3, 4], 0.5, &mut rng).unwrap();
            if c.total_spin().unsigned_abs() as usize == c.n_sites() {
                continue;
            }
            let mv = Kawasaki.propose(&c, &mut rng).unwrap();
            let mut after = c.clone();
            Kawasaki.apply(&mut after, mv);
            assert!((Kawasaki.delta_energy(&c, mv) - (after.energy() - c.energy())).abs() < 1e-9);
        }
    }

    #[test]
    fn kawasaki_conserves_total_spin() {
        let mut rng = RngStream::new(5, 0);
        let mut c = IsingConfig::random(vec![6, 6], 0.3, &mut rng).unwrap();
        let total = c.total_spin();
        for _ in 0..100_000 {
            kawasaki_step(&mut c, 0.8, AcceptanceRule::Threshold, &mut rng).unwrap();
            assert_eq!(c.spins().iter().map(|&s| s as i64).sum::<i64>(), total);
        }
        let mut two = IsingConfig::new(vec![2], vec![1, -1], 0.0, false).unwrap();
        assert!(kawasaki_step(&mut two, 0.0, AcceptanceRule::Threshold, &mut rng).unwrap());
        assert_eq!(two.spins(), &[-1, 1]);
        let mut up = IsingConfig::uniform(vec![2, 2], 1, 0.0).unwrap();
        assert_eq!(kawasaki_step(&mut up, 1.0, AcceptanceRule::Threshold, &mut rng), Err(Error::UniformConfig));
    }

    #[test]
    fn incremental_magnetization_stays_exact() {
        let mut rng = RngStream::new(6, 0);
        let mut c = IsingConfig::random(vec![8, 8], 0.2, &mut rng).unwrap();
        let run = glauber_chain(&mut c, 0.4, AcceptanceRule::Threshold, 100_000, 10_000, &mut rng).unwrap();
        assert_eq!(run.series.len(), 11);
        let recomputed = c.spins().iter().map(|&s| s as i64).sum::<i64>();
        assert_eq!(recomputed, c.total_spin());
        assert_eq!(run.final_magnetization, recomputed as f64 / 64.0);
    }

    #[test]
    fn frozen_chain_stays_put() {
        let mut rng = RngStream::new(7, 0);
        let mut stayed = 0;
        for _ in 0..1000 {
            let mut c = IsingConfig::uniform(vec![4, 4], 1, 0.0).unwrap();
            glauber_chain(&mut c, 50.0, AcceptanceRule::Threshold, 1, 0, &mut rng).unwrap();
            stayed += (c.total_spin() == 16) as usize;
        }
        assert!(stayed >= 990);
    }

    #[test]
    fn periodic_neighbors() {
        let c = IsingConfig::new(vec![4, 4], vec![1; 16], 0.0, true).unwrap();
        assert!(c.neighbors.iter().all(|nb| nb.len() == 4));
        assert_eq!(c.energy(), -32.0);
    }

    #[test]
    fn enumeration_sums_to_one() {
        let g = gibbs_enumeration(&[2, 2], 0.5, 0.7).unwrap();
        assert_eq!(g.len(), 16);
        assert!((g.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(g[15] > g[0]);
    }
}
