//! Discrete-event simulation of FIFO G/G/s queues.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use crate::distributions::{exponential_from_uniform, sample_gamma};
use crate::error::{Error, Result};
use crate::stats::{ks_test, lag1_autocorrelation, lag1_bound, KsReport};

/// Interarrival or service law, written `exp:<rate>`, `det:<value>` or
/// `gamma:<rate>,<shape>` (integer shape).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "law", rename_all = "lowercase")]
pub enum Law {
    Exp { rate: f64 },
    Det { value: f64 },
    Gamma { rate: f64, shape: u32 },
}

impl Law {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Law::Exp { rate } => exponential_from_uniform(rate, rng.random::<f64>()),
            Law::Det { value } => value,
            Law::Gamma { rate, shape } => sample_gamma(rate, shape, rng).expect("validated on construction"),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Law::Exp { rate } => 1.0 / rate,
            Law::Det { value } => value,
            Law::Gamma { rate, shape } => shape as f64 / rate,
        }
    }

    fn validate(self) -> Result<Self> {
        let ok = match self {
            Law::Exp { rate } => rate > 0.0 && rate.is_finite(),
            Law::Det { value } => value > 0.0 && value.is_finite(),
            Law::Gamma { rate, shape } => rate > 0.0 && rate.is_finite() && shape >= 1,
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::Domain(format!("invalid law parameters: {self}")))
        }
    }
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Law::Exp { rate } => write!(f, "exp:{rate}"),
            Law::Det { value } => write!(f, "det:{value}"),
            Law::Gamma { rate, shape } => write!(f, "gamma:{rate},{shape}"),
        }
    }
}

impl FromStr for Law {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad law '{s}'; expected exp:<rate>, det:<value> or gamma:<rate>,<shape>"));
        let (kind, args) = s.trim().split_once(':').ok_or_else(bad)?;
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| bad());
        let law = match kind.trim() {
            "exp" => Law::Exp { rate: num(args)? },
            "det" => Law::Det { value: num(args)? },
            "gamma" => {
                let (rate, shape) = args.split_once(',').ok_or_else(bad)?;
                Law::Gamma { rate: num(rate)?, shape: shape.trim().parse().map_err(|_| bad())? }
            }
            _ => return Err(bad()),
        };
        law.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueueSimConfig {
    pub arrivals: Law,
    pub service: Law,
    pub servers: usize,
    pub horizon: f64,
    /// Fraction of the horizon discarded before measuring.
    pub warmup_fraction: f64,
}

impl QueueSimConfig {
    pub fn new(arrivals: Law, service: Law, servers: usize, horizon: f64) -> Result<Self> {
        let cfg = Self { arrivals: arrivals.validate()?, service: service.validate()?, servers, horizon, warmup_fraction: 0.1 };
        if servers == 0 {
            return Err(Error::Domain("need at least one server".into()));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Domain(format!("horizon must be positive, got {horizon}")));
        }
        Ok(cfg)
    }
}

/// Steady-state estimates over `[warmup, horizon]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueueSimReport {
    pub config: QueueSimConfig,
    pub warmup: f64,
    /// Arrivals in the measuring window divided by its length.
    pub arrival_rate: f64,
    pub arrivals: usize,
    pub departures: usize,
    /// Time averages.
    pub mean_in_system: f64,
    pub mean_in_queue: f64,
    /// Mean busy servers divided by `s`.
    pub busy_fraction: f64,
    /// Per customer, over customers arriving in the window.
    pub mean_wait: f64,
    pub mean_sojourn: f64,
    /// `|L - λ·sojourn| / L`.
    pub little_residual: f64,
    /// `|L_q - λ·W| / L_q`.
    pub little_queue_residual: f64,
    /// Fraction of window time with `n` customers present.
    pub time_average_law: Vec<f64>,
    /// Number of customers found by each arrival in the window.
    pub arrival_seen_law: Vec<f64>,
    /// Mean length of busy periods (system non-empty) starting in the window.
    pub mean_busy_period: f64,
    pub busy_periods: usize,
    #[serde(skip)]
    pub departure_times: Vec<f64>,
}

impl QueueSimReport {
    /// ℓ¹ distance between the arrival-seen and time-average laws.
    pub fn pasta_distance(&self) -> f64 {
        let n = self.time_average_law.len().max(self.arrival_seen_law.len());
        (0..n)
            .map(|k| {
                let a = self.arrival_seen_law.get(k).copied().unwrap_or(0.0);
                let t = self.time_average_law.get(k).copied().unwrap_or(0.0);
                (a - t).abs()
            })
            .sum()
    }

    pub fn departure_intervals(&self) -> Vec<f64> {
        self.departure_times.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Event {
    Arrival,
    Departure,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key {
    time: f64,
    seq: u64,
    event: Event,
}

impl Eq for Key {}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time.total_cmp(&other.time).then(self.seq.cmp(&other.seq))
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Agenda {
    heap: BinaryHeap<Reverse<Key>>,
    seq: u64,
}

impl Agenda {
    fn push(&mut self, time: f64, event: Event) {
        self.heap.push(Reverse(Key { time, seq: self.seq, event }));
        self.seq += 1;
    }

    fn pop(&mut self) -> Option<Key> {
        self.heap.pop().map(|Reverse(k)| k)
    }
}

#[derive(Default)]
struct Accumulator {
    area_system: f64,
    area_queue: f64,
    area_busy: f64,
    occupancy: Vec<f64>,
}

impl Accumulator {
    fn add(&mut self, n: usize, busy: usize, dt: f64) {
        if dt <= 0.0 {
            return;
        }
        self.area_system += n as f64 * dt;
        self.area_queue += (n - busy) as f64 * dt;
        self.area_busy += busy as f64 * dt;
        if self.occupancy.len() <= n {
            self.occupancy.resize(n + 1, 0.0);
        }
        self.occupancy[n] += dt;
    }
}

/// Event-driven FIFO simulation started empty at time 0. Events at equal
/// times are processed in scheduling order.
pub fn simulate_queue<R: Rng + ?Sized>(config: &QueueSimConfig, rng: &mut R) -> QueueSimReport {
    let horizon = config.horizon;
    let warmup = config.warmup_fraction * horizon;
    let s = config.servers;
    let mut agenda = Agenda { heap: BinaryHeap::new(), seq: 0 };
    agenda.push(config.arrivals.sample(rng), Event::Arrival);

    let mut waiting: VecDeque<f64> = VecDeque::new();
    // Arrival time of each customer in service, keyed by the sequence number
    // of its departure event.
    let mut in_service: HashMap<u64, f64> = HashMap::new();
    let mut busy = 0usize;
    let mut now = 0.0f64;
    let mut acc = Accumulator::default();

    let mut arrivals = 0usize;
    let mut seen: Vec<u64> = Vec::new();
    let mut wait_sum = 0.0;
    let mut waits = 0usize;
    let mut sojourn_sum = 0.0;
    let mut sojourns = 0usize;
    let mut departure_times = Vec::new();
    let mut busy_start: Option<f64> = None;
    let mut busy_period_sum = 0.0;
    let mut busy_periods = 0usize;

    let mut start_service = |arrived: f64, t: f64, agenda: &mut Agenda, in_service: &mut HashMap<u64, f64>, rng: &mut R| {
        if arrived >= warmup {
            wait_sum += t - arrived;
            waits += 1;
        }
        let done = t + config.service.sample(rng);
        in_service.insert(agenda.seq, arrived);
        agenda.push(done, Event::Departure);
    };

    while let Some(key) = agenda.pop() {
        if key.time > horizon {
            break;
        }
        let n = waiting.len() + busy;
        let lo = now.max(warmup);
        if key.time > lo {
            acc.add(n, busy, key.time - lo);
        }
        now = key.time;
        match key.event {
            Event::Arrival => {
                if now >= warmup {
                    arrivals += 1;
                    if seen.len() <= n {
                        seen.resize(n + 1, 0);
                    }
                    seen[n] += 1;
                }
                if n == 0 {
                    busy_start = Some(now);
                }
                if busy < s {
                    busy += 1;
                    start_service(now, now, &mut agenda, &mut in_service, rng);
                } else {
                    waiting.push_back(now);
                }
                agenda.push(now + config.arrivals.sample(rng), Event::Arrival);
            }
            Event::Departure => {
                let arrived = in_service.remove(&key.seq).expect("departure matches a customer in service");
                if arrived >= warmup {
                    sojourn_sum += now - arrived;
                    sojourns += 1;
                }
                if now >= warmup {
                    departure_times.push(now);
                }
                busy -= 1;
                if let Some(next) = waiting.pop_front() {
                    busy += 1;
                    start_service(next, now, &mut agenda, &mut in_service, rng);
                }
                if busy == 0 {
                    if let Some(start) = busy_start.take() {
                        if start >= warmup {
                            busy_period_sum += now - start;
                            busy_periods += 1;
                        }
                    }
                }
            }
        }
    }
    let n = waiting.len() + busy;
    acc.add(n, busy, horizon - now.max(warmup));

    let window = horizon - warmup;
    let arrival_rate = arrivals as f64 / window;
    let mean_in_system = acc.area_system / window;
    let mean_in_queue = acc.area_queue / window;
    let mean_wait = if waits > 0 { wait_sum / waits as f64 } else { 0.0 };
    let mean_sojourn = if sojourns > 0 { sojourn_sum / sojourns as f64 } else { 0.0 };
    let rel = |a: f64, b: f64| if a > 0.0 { (a - b).abs() / a } else { b.abs() };
    let total_seen: u64 = seen.iter().sum();
    QueueSimReport {
        config: config.clone(),
        warmup,
        arrival_rate,
        arrivals,
        departures: departure_times.len(),
        mean_in_system,
        mean_in_queue,
        busy_fraction: acc.area_busy / window / s as f64,
        mean_wait,
        mean_sojourn,
        little_residual: rel(mean_in_system, arrival_rate * mean_sojourn),
        little_queue_residual: rel(mean_in_queue, arrival_rate * mean_wait),
        time_average_law: acc.occupancy.iter().map(|x| x / window).collect(),
        arrival_seen_law: seen.iter().map(|&c| c as f64 / total_seen.max(1) as f64).collect(),
        mean_busy_period: if busy_periods > 0 { busy_period_sum / busy_periods as f64 } else { 0.0 },
        busy_periods,
        departure_times,
    }
}

pub const BURKE_MIN_DEPARTURES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BurkeReport {
    pub departures: usize,
    pub ks: KsReport,
    pub lag1: f64,
    pub lag1_bound: f64,
    pub alpha: f64,
    pub passes: bool,
}

/// Tests post-warm-up departure gaps against `Exp(λ)` and for lag-1
/// independence.
pub fn burke_departure_test(report: &QueueSimReport, lambda: f64, alpha: f64) -> Result<BurkeReport> {
    if !(lambda > 0.0) {
        return Err(Error::NonPositiveRate(lambda));
    }
    let gaps = report.departure_intervals();
    if gaps.len() < BURKE_MIN_DEPARTURES {
        return Err(Error::InsufficientData { found: gaps.len(), needed: BURKE_MIN_DEPARTURES });
    }
    let ks = ks_test(&gaps, |x| if x <= 0.0 { 0.0 } else { 1.0 - (-lambda * x).exp() })?;
    let lag1 = lag1_autocorrelation(&gaps);
    let bound = lag1_bound(gaps.len());
    let passes = ks.passes(alpha) && lag1.abs() <= bound;
    Ok(BurkeReport { departures: gaps.len(), ks, lag1, lag1_bound: bound, alpha, passes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::RngStream;

    fn run(a: &str, s: &str, servers: usize, horizon: f64, seed: u64) -> QueueSimReport {
        let cfg = QueueSimConfig::new(a.parse().unwrap(), s.parse().unwrap(), servers, horizon).unwrap();
        simulate_queue(&cfg, &mut RngStream::new(seed, 0))
    }

    #[test]
    fn law_parsing() {
        assert_eq!("exp:2".parse::<Law>().unwrap(), Law::Exp { rate: 2.0 });
        assert_eq!("gamma:4,2".parse::<Law>().unwrap(), Law::Gamma { rate: 4.0, shape: 2 });
        assert!("exp:-1".parse::<Law>().is_err());
        assert!("gamma:1,0".parse::<Law>().is_err());
        assert!("unif:1".parse::<Law>().is_err());
        assert_eq!("det:0.5".parse::<Law>().unwrap().to_string(), "det:0.5");
    }

    #[test]
    fn deterministic_schedule() {
        let r = run("det:2", "det:1", 1, 1000.0, 1);
        assert_eq!(r.mean_wait, 0.0);
        assert!((r.busy_fraction - 0.5).abs() < 1e-9);
        assert!((r.mean_busy_period - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mm1_means() {
        let r = run("exp:1", "exp:2", 1, 2e5, 3);
        assert!((r.mean_in_system - 1.0).abs() < 0.05);
        assert!((r.mean_wait - 0.5).abs() < 0.03);
        assert!(r.little_residual < 0.02);
        assert!((r.busy_fraction - 0.5).abs() < 0.01);
        assert!((r.time_average_law.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn two_servers_track_their_customers() {
        let r = run("exp:1.5", "exp:1", 2, 1e5, 4);
        let m = super::super::mms(1.5, 1.0, 2).unwrap();
        assert!((r.mean_in_system - m.mean_in_system).abs() / m.mean_in_system < 0.05);
        assert!((r.busy_fraction - 0.75).abs() < 0.02);
        assert!(r.little_residual < 0.02);
    }

    #[test]
    fn burke_needs_data() {
        let r = run("exp:1", "exp:2", 1, 100.0, 5);
        assert!(matches!(burke_departure_test(&r, 1.0, 1e-3), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn same_seed_same_report() {
        let a = run("exp:1", "gamma:4,2", 1, 1e4, 9);
        let b = run("exp:1", "gamma:4,2", 1, 1e4, 9);
        assert_eq!(a, b);
    }
}
