//! Closed-form queue metrics and the M/E_r/1 phase generator.

pub mod sim;

pub use sim::{burke_departure_test, simulate_queue, BurkeReport, Law, QueueSimConfig, QueueSimReport};

use crate::error::{Error, Result};
use crate::jump::{stationary_jump, Generator};
use crate::scalar::Scalar;

/// Tail mass left out when an infinite stationary law is tabulated.
pub const REPORT_TAIL: f64 = 1e-12;
const MAX_TABULATED: usize = 1_000_000;

/// Stationary metrics. `wait` is the time from arrival to service start,
/// `sojourn` adds the service. For lossy queues the Little pairs use the
/// accepted-arrival rate `throughput`.
#[derive(Debug, Clone, PartialEq)]
pub struct QueueMetrics<T> {
    pub model: String,
    /// `π(0..)`, truncated once the remaining mass drops below [`REPORT_TAIL`].
    pub pi: Vec<T>,
    /// Mass beyond the tabulated range.
    pub tail_mass: f64,
    /// Probability that a given server is busy.
    pub utilization: T,
    pub mean_busy_servers: T,
    /// Mean number in the system.
    pub mean_in_system: T,
    pub mean_in_queue: T,
    pub mean_wait: T,
    pub mean_sojourn: T,
    /// Probability that an accepted arrival waits.
    pub wait_probability: T,
    pub loss_probability: Option<T>,
    pub throughput: T,
}

impl<T: Scalar> QueueMetrics<T> {
    pub fn to_float(&self) -> QueueMetrics<f64> {
        QueueMetrics {
            model: self.model.clone(),
            pi: self.pi.iter().map(Scalar::to_f64).collect(),
            tail_mass: self.tail_mass,
            utilization: self.utilization.to_f64(),
            mean_busy_servers: self.mean_busy_servers.to_f64(),
            mean_in_system: self.mean_in_system.to_f64(),
            mean_in_queue: self.mean_in_queue.to_f64(),
            mean_wait: self.mean_wait.to_f64(),
            mean_sojourn: self.mean_sojourn.to_f64(),
            wait_probability: self.wait_probability.to_f64(),
            loss_probability: self.loss_probability.as_ref().map(Scalar::to_f64),
            throughput: self.throughput.to_f64(),
        }
    }
}

fn check_rates<T: Scalar>(lambda: &T, mu: &T) -> Result<()> {
    if *lambda < T::zero() {
        return Err(Error::NonPositiveRate(lambda.to_f64()));
    }
    if !(*mu > T::zero()) {
        return Err(Error::NonPositiveRate(mu.to_f64()));
    }
    Ok(())
}

fn div_or_zero<T: Scalar>(num: T, den: &T) -> T {
    if den.is_zero() {
        T::zero()
    } else {
        num / den.clone()
    }
}

/// Tabulates `π(n) = head(n)` for `n < start` then `c·ρ^{n-start}` until the
/// geometric tail `c ρ^{k}/(1-ρ)` falls below [`REPORT_TAIL`].
fn geometric_table<T: Scalar>(mut pi: Vec<T>, first: T, rho: &T) -> (Vec<T>, f64) {
    let r = rho.to_f64();
    let mut term = first;
    loop {
        let tail = term.to_f64() / (1.0 - r);
        if tail < REPORT_TAIL || pi.len() >= MAX_TABULATED {
            return (pi, tail);
        }
        let next = term.clone() * rho.clone();
        pi.push(term);
        term = next;
    }
}

/// M/M/1: `π(n) = (1-ρ)ρⁿ`, wait `λ/(μ(μ-λ))`, sojourn `1/(μ-λ)`.
pub fn mm1<T: Scalar>(lambda: T, mu: T) -> Result<QueueMetrics<T>> {
    check_rates(&lambda, &mu)?;
    if lambda >= mu {
        return Err(Error::StabilityError(format!("λ = {lambda} >= μ = {mu}")));
    }
    let rho = lambda.clone() / mu.clone();
    let one = T::one();
    let (pi, tail_mass) = geometric_table(Vec::new(), one.clone() - rho.clone(), &rho);
    let gap = mu.clone() - lambda.clone();
    let mean_in_system = rho.clone() / (one.clone() - rho.clone());
    Ok(QueueMetrics {
        model: format!("M/M/1 λ={lambda} μ={mu}"),
        pi,
        tail_mass,
        utilization: rho.clone(),
        mean_busy_servers: rho.clone(),
        mean_in_queue: mean_in_system.clone() * rho.clone(),
        mean_in_system,
        mean_wait: lambda.clone() / (mu.clone() * gap.clone()),
        mean_sojourn: one / gap,
        wait_probability: rho,
        loss_probability: None,
        throughput: lambda,
    })
}

/// M/M/1/N: at most `N` customers in the system, arrivals to a full system
/// are lost.
pub fn mm1n<T: Scalar>(lambda: T, mu: T, capacity: usize) -> Result<QueueMetrics<T>> {
    check_rates(&lambda, &mu)?;
    if capacity == 0 {
        return Err(Error::Domain("capacity must be at least 1".into()));
    }
    let rho = lambda.clone() / mu.clone();
    let mut weights = vec![T::one()];
    for _ in 0..capacity {
        let last = weights.last().expect("nonempty").clone();
        weights.push(last * rho.clone());
    }
    let z = weights.iter().cloned().fold(T::zero(), |a, b| a + b);
    let pi: Vec<T> = weights.into_iter().map(|w| w / z.clone()).collect();
    let mean_in_system = pi.iter().enumerate().fold(T::zero(), |a, (n, p)| a + T::from_usize(n) * p.clone());
    let busy = T::one() - pi[0].clone();
    let mean_in_queue = mean_in_system.clone() - busy.clone();
    let loss = pi[capacity].clone();
    let throughput = lambda.clone() * (T::one() - loss.clone());
    // An accepted arrival waits when it finds the server busy but room left.
    let accepted_wait = div_or_zero(busy.clone() - loss.clone(), &(T::one() - loss.clone()));
    Ok(QueueMetrics {
        model: format!("M/M/1/{capacity} λ={lambda} μ={mu}"),
        pi,
        tail_mass: 0.0,
        utilization: busy.clone(),
        mean_busy_servers: busy,
        mean_wait: div_or_zero(mean_in_queue.clone(), &throughput),
        mean_sojourn: div_or_zero(mean_in_system.clone(), &throughput),
        mean_in_system,
        mean_in_queue,
        wait_probability: accepted_wait,
        loss_probability: Some(loss),
        throughput,
    })
}

/// M/M/s with the Erlang C waiting probability.
pub fn mms<T: Scalar>(lambda: T, mu: T, servers: usize) -> Result<QueueMetrics<T>> {
    check_rates(&lambda, &mu)?;
    if servers == 0 {
        return Err(Error::Domain("need at least one server".into()));
    }
    let s = T::from_usize(servers);
    if lambda >= s.clone() * mu.clone() {
        return Err(Error::StabilityError(format!("λ = {lambda} >= sμ = {}", s * mu)));
    }
    let a = lambda.clone() / mu.clone();
    let rho = a.clone() / s.clone();
    let one = T::one();
    // aⁿ/n! for n = 0..=s.
    let mut terms = vec![one.clone()];
    for n in 1..=servers {
        let last = terms.last().expect("nonempty").clone();
        terms.push(last * a.clone() / T::from_usize(n));
    }
    let head: T = terms[..servers].iter().cloned().fold(T::zero(), |x, y| x + y);
    let queue_factor = terms[servers].clone() / (one.clone() - rho.clone());
    let pi0 = one.clone() / (head + queue_factor.clone());
    let wait_probability = pi0.clone() * queue_factor;
    let pi_head: Vec<T> = terms[..servers].iter().map(|t| t.clone() * pi0.clone()).collect();
    let (pi, tail_mass) = geometric_table(pi_head, terms[servers].clone() * pi0, &rho);
    let mean_in_queue = wait_probability.clone() * rho.clone() / (one.clone() - rho.clone());
    let mean_wait = div_or_zero(mean_in_queue.clone(), &lambda);
    Ok(QueueMetrics {
        model: format!("M/M/{servers} λ={lambda} μ={mu}"),
        pi,
        tail_mass,
        utilization: rho,
        mean_busy_servers: a.clone(),
        mean_in_system: mean_in_queue.clone() + a,
        mean_in_queue,
        mean_sojourn: mean_wait.clone() + one / mu,
        mean_wait,
        wait_probability,
        loss_probability: None,
        throughput: lambda,
    })
}

/// M/M/∞: the number in the system is Poisson(λ/μ); nobody waits.
pub fn mm_infinity(lambda: f64, mu: f64) -> Result<QueueMetrics<f64>> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::NonPositiveRate(lambda));
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::NonPositiveRate(mu));
    }
    let a = lambda / mu;
    let mut pi = Vec::new();
    let mut term = (-a).exp();
    let mut mass = 0.0;
    let mut n = 0usize;
    // Past the mode the untabulated mass is at most π(n)·(n+1)/(n+1-a).
    while n as f64 <= a || term * (n as f64 + 1.0) / (n as f64 + 1.0 - a) > REPORT_TAIL {
        pi.push(term);
        mass += term;
        n += 1;
        term *= a / n as f64;
        if n >= MAX_TABULATED {
            break;
        }
    }
    Ok(QueueMetrics {
        model: format!("M/M/∞ λ={lambda} μ={mu}"),
        pi,
        tail_mass: (1.0 - mass).max(0.0),
        utilization: 0.0,
        mean_busy_servers: a,
        mean_in_system: a,
        mean_in_queue: 0.0,
        mean_wait: 0.0,
        mean_sojourn: 1.0 / mu,
        wait_probability: 0.0,
        loss_probability: None,
        throughput: lambda,
    })
}

/// Generator of the outstanding-phase count of M/E_r/1 on `{0..=cap}`:
/// service phases finish at rate `μ`, an arrival adds `r` phases at rate
/// `λ`. Arrivals that would overflow `cap` are dropped.
pub fn mer1_generator(lambda: f64, mu: f64, r: usize, cap: usize) -> Result<Generator<f64>> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::NonPositiveRate(lambda));
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::NonPositiveRate(mu));
    }
    if r == 0 {
        return Err(Error::Domain("phase count r must be at least 1".into()));
    }
    if cap < r {
        return Err(Error::CapTooSmall { cap, tail: 1.0 });
    }
    let mut rates = Vec::with_capacity(2 * cap);
    for n in 0..=cap {
        if n >= 1 {
            rates.push((n, n - 1, mu));
        }
        if n + r <= cap {
            rates.push((n, n + r, lambda));
        }
    }
    Generator::from_rates(cap + 1, &rates)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseAnalysis {
    pub cap: usize,
    /// Stationary law of the outstanding-phase count.
    pub phases: Vec<f64>,
    /// Mass in the top `r` phases, a proxy for the truncated tail.
    pub tail_mass: f64,
    pub metrics: QueueMetrics<f64>,
}

/// Stationary analysis of M/E_r/1 through its phase generator. Stable iff
/// `λ r < μ`: each customer brings `r` phases of mean `1/μ`.
pub fn mer1(lambda: f64, mu: f64, r: usize, cap: usize) -> Result<PhaseAnalysis> {
    let l = mer1_generator(lambda, mu, r, cap)?;
    if lambda * r as f64 >= mu {
        return Err(Error::DivergentNormalizer);
    }
    let phases = stationary_jump(&l)?.into_vec();
    let tail_mass: f64 = phases[cap + 1 - r..].iter().sum();
    if tail_mass > REPORT_TAIL {
        return Err(Error::CapTooSmall { cap, tail: tail_mass });
    }
    let mut customers = vec![0.0; cap.div_ceil(r) + 1];
    for (n, p) in phases.iter().enumerate() {
        customers[n.div_ceil(r)] += p;
    }
    let mean_in_system: f64 = customers.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
    let busy = 1.0 - phases[0];
    let mean_in_queue = mean_in_system - busy;
    let mean_wait = mean_in_queue / lambda;
    let metrics = QueueMetrics {
        model: format!("M/E_{r}/1 λ={lambda} μ={mu}"),
        pi: customers,
        tail_mass,
        utilization: busy,
        mean_busy_servers: busy,
        mean_in_system,
        mean_in_queue,
        mean_wait,
        mean_sojourn: mean_wait + r as f64 / mu,
        wait_probability: busy,
        loss_probability: None,
        throughput: lambda,
    };
    Ok(PhaseAnalysis { cap, phases, tail_mass, metrics })
}

/// Doubles the phase cap from 64 until the truncated tail is negligible.
pub fn mer1_auto(lambda: f64, mu: f64, r: usize) -> Result<PhaseAnalysis> {
    let mut cap = 64.max(4 * r);
    loop {
        match mer1(lambda, mu, r, cap) {
            Err(Error::CapTooSmall { .. }) if cap < 2048 => cap *= 2,
            other => return other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn mm1_call_centre() {
        let m = mm1(q(20, 1), q(30, 1)).unwrap();
        for (n, p) in m.pi.iter().enumerate().take(10) {
            assert_eq!(*p, q(1, 3) * num_traits::pow(q(2, 3), n));
        }
        assert_eq!(m.mean_wait * q(60, 1), q(4, 1));
        assert_eq!(m.mean_sojourn * q(60, 1), q(6, 1));
        assert_eq!(m.wait_probability, q(2, 3));
        assert_eq!(m.mean_in_system, q(2, 1));
        let sum: f64 = m.pi.iter().map(Scalar::to_f64).sum();
        assert!((1.0 - 1e-12..=1.0).contains(&sum));
        assert_eq!(mm1(q(4, 1), q(6, 1)).unwrap().mean_wait, q(1, 3));
    }

    #[test]
    fn mm1_edge_cases() {
        assert!(matches!(mm1(3.0, 2.0), Err(Error::StabilityError(_))));
        assert!(matches!(mm1(2.0, 2.0), Err(Error::StabilityError(_))));
        let m = mm1(0.0, 1.0).unwrap();
        assert_eq!((m.mean_in_system, m.mean_wait), (0.0, 0.0));
        let m = mm1(1e-9, 1.0).unwrap();
        assert!(m.mean_in_system < 1e-8 && m.mean_wait < 1e-8);
    }

    #[test]
    fn mm1n_small_buffer() {
        let m = mm1n(q(20, 1), q(30, 1), 2).unwrap();
        assert_eq!(m.pi, vec![q(9, 19), q(6, 19), q(4, 19)]);
        assert_eq!(m.loss_probability, Some(q(4, 19)));
        assert_eq!(m.throughput, q(20, 1) * q(15, 19));
        assert_eq!(m.mean_in_system.clone(), m.throughput.clone() * m.mean_sojourn.clone());
        let u = mm1n(q(5, 1), q(5, 1), 2).unwrap();
        assert_eq!(u.pi, vec![q(1, 3); 3]);
    }

    #[test]
    fn mm1n_approaches_mm1() {
        let inf = mm1(1.0, 2.0).unwrap();
        let mut prev = f64::INFINITY;
        for n in [5, 10, 20, 50, 200] {
            let fin = mm1n(1.0, 2.0, n).unwrap();
            let tv: f64 = (0..inf.pi.len()).map(|k| (fin.pi.get(k).copied().unwrap_or(0.0) - inf.pi[k]).abs()).sum();
            assert!(tv <= prev);
            prev = tv;
            if n == 200 {
                for k in 0..inf.pi.len() {
                    assert!((fin.pi[k] - inf.pi[k]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn erlang_c_three_operators() {
        let m = mms(q(40, 1), q(20, 1), 3).unwrap();
        assert_eq!(m.mean_busy_servers, q(2, 1));
        assert_eq!(m.pi[0], q(1, 9));
        assert_eq!(m.wait_probability, q(4, 9));
        assert!(matches!(mms(6.0, 2.0, 3), Err(Error::StabilityError(_))));
    }

    #[test]
    fn single_server_mms_is_mm1() {
        let a = mms(q(2, 1), q(7, 1), 1).unwrap();
        let b = mm1(q(2, 1), q(7, 1)).unwrap();
        assert_eq!(a.pi, b.pi);
        assert_eq!(a.mean_in_system, b.mean_in_system);
        assert_eq!(a.mean_wait, b.mean_wait);
        assert_eq!(a.mean_sojourn, b.mean_sojourn);
        assert_eq!(a.wait_probability, b.wait_probability);
    }

    #[test]
    fn infinite_servers() {
        let m = mm_infinity(1.0, 1.0).unwrap();
        assert!((m.pi[0] - (-1.0f64).exp()).abs() < 1e-16);
        assert_eq!(m.mean_in_system, 1.0);
        for a in [0.5, 1.0, 5.0, 10.0] {
            let m = mm_infinity(a, 1.0).unwrap();
            let mass: f64 = (0..=60u64).map(|k| crate::distributions::pmf_poisson(a, k).unwrap()).sum();
            assert!(mass > 1.0 - 1e-15);
            let tab: f64 = m.pi.iter().sum();
            assert!((1.0 - 1e-12..=1.0 + 1e-15).contains(&tab), "{a} {tab:e} {}", 1.0 - tab);
        }
    }

    #[test]
    fn erlang_phase_queue() {
        let a = mer1_auto(1.0, 3.0, 2).unwrap();
        assert!((a.phases.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((a.metrics.utilization - 2.0 / 3.0).abs() < 1e-10);
        let b = mer1(1.0, 3.0, 2, 2 * a.cap).unwrap();
        for k in 0..a.phases.len() {
            assert!((a.phases[k] - b.phases[k]).abs() < 1e-9);
        }
        // Pollaczek–Khinchine with E[S] = 2/3 and E[S²] = 2·3/9.
        let (lam, es, es2) = (1.0, 2.0 / 3.0, 6.0 / 9.0);
        let wq = lam * es2 / (2.0 * (1.0 - lam * es));
        assert!((a.metrics.mean_wait - wq).abs() < 1e-8);
        assert_eq!(mer1(2.0, 3.0, 2, 200).unwrap_err(), Error::DivergentNormalizer);
        assert!(matches!(mer1(1.0, 2.1, 2, 8), Err(Error::CapTooSmall { .. })));
    }

    #[test]
    fn one_phase_is_mm1() {
        let a = mer1_auto(1.0, 2.0, 1).unwrap();
        let m = mm1(1.0, 2.0).unwrap();
        for k in 0..20 {
            assert!((a.phases[k] - m.pi[k]).abs() < 1e-12);
        }
    }
}
