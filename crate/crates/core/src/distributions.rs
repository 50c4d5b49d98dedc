//! Seedable random streams, inverse-transform samplers and exact pmfs.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::scalar::Rational;

/// ChaCha20 keyed by a 64-bit seed, with a 64-bit stream index selecting an
/// independent keystream.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    inner: ChaCha20Rng,
}

impl RngStream {
    pub const ALGORITHM: &'static str = "chacha20";

    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { seed, stream, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Fresh stream `k` under the same seed, for replica `k`.
    pub fn substream(&self, k: u64) -> Self {
        Self::new(self.seed, k)
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

fn check_rate(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveRate(lambda))
    }
}

/// `-(1/λ) log(1 - u)`.
pub fn exponential_from_uniform(lambda: f64, u: f64) -> f64 {
    -(-u).ln_1p() / lambda
}

pub fn sample_exponential<R: rand::Rng + ?Sized>(lambda: f64, rng: &mut R) -> Result<f64> {
    check_rate(lambda)?;
    Ok(exponential_from_uniform(lambda, rng.random::<f64>()))
}

/// Box–Muller: `R = sqrt(-2 log(1 - u))`, `Φ = 2πv`.
pub fn normal_pair_from_uniforms(u: f64, v: f64) -> (f64, f64) {
    let r = (-2.0 * (-u).ln_1p()).sqrt();
    let phi = 2.0 * std::f64::consts::PI * v;
    (r * phi.cos(), r * phi.sin())
}

pub fn sample_normal_pair<R: rand::Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    let u = rng.random::<f64>();
    let v = rng.random::<f64>();
    normal_pair_from_uniforms(u, v)
}

/// Sum of `n` independent exponentials of rate `λ`.
pub fn sample_gamma<R: rand::Rng + ?Sized>(lambda: f64, n: u32, rng: &mut R) -> Result<f64> {
    check_rate(lambda)?;
    if n == 0 {
        return Err(Error::Domain("gamma shape must be at least 1".into()));
    }
    Ok((0..n).map(|_| exponential_from_uniform(lambda, rng.random::<f64>())).sum())
}

/// Poisson draw. For `λ <= 30` this counts rate-`λ` arrivals in `[0, 1]`;
/// above that it inverts the cdf with log-space pmf terms.
pub fn sample_poisson<R: rand::Rng + ?Sized>(lambda: f64, rng: &mut R) -> Result<u64> {
    check_rate(lambda)?;
    if lambda <= 30.0 {
        let mut t = exponential_from_uniform(lambda, rng.random::<f64>());
        let mut k = 0;
        while t <= 1.0 {
            k += 1;
            t += exponential_from_uniform(lambda, rng.random::<f64>());
        }
        return Ok(k);
    }
    let u = rng.random::<f64>();
    // Mass below this start is under 1e-30 and is skipped.
    let start = (lambda - 12.0 * lambda.sqrt() - 10.0).max(0.0).floor() as u64;
    let mut k = start;
    let mut acc = 0.0;
    loop {
        acc += pmf_poisson(lambda, k)?;
        if acc > u || k > start + 10 + (40.0 * lambda.sqrt()) as u64 {
            return Ok(k);
        }
        k += 1;
    }
}

/// Exact `b_{n,q}(k) = C(n,k) q^k (1-q)^{n-k}`.
pub fn pmf_binomial(n: u64, q: &Rational, k: u64) -> Result<Rational> {
    if q < &Rational::zero() || q > &Rational::one() {
        return Err(Error::Domain(format!("binomial parameter {q} outside [0, 1]")));
    }
    if k > n {
        return Err(Error::Domain(format!("k = {k} exceeds n = {n}")));
    }
    let c = binomial_coefficient(n, k);
    let one_minus = Rational::one() - q;
    Ok(Rational::from_integer(c) * num_traits::pow(q.clone(), k as usize) * num_traits::pow(one_minus, (n - k) as usize))
}

/// `b_{n,q}(k)` evaluated in log space.
pub fn pmf_binomial_f64(n: u64, q: f64, k: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain(format!("binomial parameter {q} outside [0, 1]")));
    }
    if k > n {
        return Ok(0.0);
    }
    if q == 0.0 {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }
    if q == 1.0 {
        return Ok(if k == n { 1.0 } else { 0.0 });
    }
    let log = ln_choose(n, k) + k as f64 * q.ln() + (n - k) as f64 * (-q).ln_1p();
    Ok(log.exp())
}

/// `π_λ(k) = e^{-λ} λ^k / k!`, evaluated as one exponential of a log sum.
pub fn pmf_poisson(lambda: f64, k: u64) -> Result<f64> {
    if lambda == 0.0 {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }
    check_rate(lambda)?;
    Ok((k as f64 * lambda.ln() - lambda - ln_gamma(k as f64 + 1.0)).exp())
}

pub fn binomial_coefficient(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut c = BigInt::one();
    for i in 0..k {
        c = c * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    c
}

pub fn ln_choose(n: u64, k: u64) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct L1Report {
    pub distance: f64,
    /// `2 n q²`.
    pub bound: f64,
    pub within_bound: bool,
    /// Largest `k` summed.
    pub truncation: u64,
}

/// `Σ_k |b_{n,q}(k) - π_{nq}(k)|` together with the bound `2nq²`.
pub fn l1_binomial_poisson(n: u64, q: f64) -> Result<L1Report> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain(format!("binomial parameter {q} outside [0, 1]")));
    }
    let lambda = n as f64 * q;
    // Poisson tail beyond λ + 40√λ + 50 is far below 1e-15.
    let truncation = (lambda + 40.0 * lambda.sqrt() + 50.0).ceil() as u64;
    let mut distance = 0.0;
    for k in 0..=truncation {
        distance += (pmf_binomial_f64(n, q, k)? - pmf_poisson(lambda, k)?).abs();
    }
    let bound = 2.0 * n as f64 * q * q;
    Ok(L1Report { distance, bound, within_bound: distance <= bound, truncation })
}

/// `λ^n x^{n-1} e^{-λx} / (n-1)!`.
pub fn gamma_pdf(lambda: f64, n: u32, x: f64) -> Result<f64> {
    check_rate(lambda)?;
    if n == 0 {
        return Err(Error::Domain("gamma shape must be at least 1".into()));
    }
    if x < 0.0 || !x.is_finite() {
        return Err(Error::Domain(format!("gamma density needs x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(if n == 1 { lambda } else { 0.0 });
    }
    let n = n as f64;
    Ok((n * lambda.ln() + (n - 1.0) * x.ln() - lambda * x - ln_gamma(n)).exp())
}
