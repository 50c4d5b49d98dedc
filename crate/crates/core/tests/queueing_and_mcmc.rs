use rand::Rng;
use stochastik::mcmc::ising::{gibbs_enumeration, glauber_chain, IsingConfig};
use stochastik::mcmc::tsp::{simulated_annealing_tsp, DistanceMatrix, MoveKind};
use stochastik::mcmc::{AcceptanceRule, AnnealSchedule};
use stochastik::queueing::{burke_departure_test, mer1_auto, mm1, mms, simulate_queue, QueueSimConfig};
use stochastik::RngStream;

fn run(a: &str, s: &str, servers: usize, horizon: f64, seed: u64) -> stochastik::queueing::QueueSimReport {
    let cfg = QueueSimConfig::new(a.parse().unwrap(), s.parse().unwrap(), servers, horizon).unwrap();
    simulate_queue(&cfg, &mut RngStream::new(seed, 0))
}

#[test]
fn little_law_holds_for_several_queue_types() {
    for (a, s) in [("exp:0.7", "exp:1"), ("exp:0.6", "gamma:2,2"), ("det:1.25", "exp:1")] {
        let r = run(a, s, 1, 2e5, 1);
        assert!(r.little_residual < 0.02, "{a} {s}: {}", r.little_residual);
        assert!(r.little_queue_residual < 0.03, "{a} {s}: {}", r.little_queue_residual);
    }
}

#[test]
fn erlang_service_simulation_matches_the_phase_model() {
    let r = run("exp:0.6", "gamma:2,2", 1, 4e5, 2);
    // Two phases of rate 2 give a unit mean service time.
    let exact = mer1_auto(0.6, 2.0, 2).unwrap();
    let l = exact.metrics.mean_in_system;
    assert!((r.mean_in_system - l).abs() / l < 0.05, "{} vs {l}", r.mean_in_system);
}

#[test]
fn simulated_mm1_busy_fraction_and_pasta() {
    let r = run("exp:0.5", "exp:1", 1, 3e5, 3);
    assert!((r.busy_fraction - 0.5).abs() / 0.5 < 0.01, "{}", r.busy_fraction);
    assert!(r.pasta_distance() < 0.02);
    let m = mm1(0.5f64, 1.0).unwrap();
    assert!((r.mean_in_system - m.mean_in_system).abs() < 0.05);
    // Mean busy period of M/M/1 is 1/(μ - λ).
    assert!((r.mean_busy_period - 2.0).abs() < 0.1, "{}", r.mean_busy_period);
}

#[test]
fn departures_of_markovian_queues_are_poisson() {
    for servers in [1, 2] {
        let r = run("exp:0.8", if servers == 1 { "exp:1" } else { "exp:0.6" }, servers, 1e5, 4);
        let b = burke_departure_test(&r, 0.8, 1e-3).unwrap();
        assert!(b.passes, "s = {servers}: {b:?}");
    }
}

#[test]
fn deterministic_service_departures_are_not_poisson() {
    let r = run("exp:0.9", "det:1", 1, 1e5, 5);
    assert!(!burke_departure_test(&r, 0.9, 1e-3).unwrap().passes);
}

#[test]
fn mm2_simulation_matches_erlang_c() {
    let r = run("exp:1.5", "exp:1", 2, 2e5, 6);
    let m = mms(1.5f64, 1.0, 2).unwrap();
    assert!((r.mean_in_system - m.mean_in_system).abs() / m.mean_in_system < 0.05);
}

#[test]
fn glauber_occupation_matches_gibbs_on_a_two_by_two_lattice() {
    let (beta, h) = (0.4, 0.3);
    let exact = gibbs_enumeration(&[2, 2], h, beta).unwrap();
    let mut config = IsingConfig::uniform(vec![2, 2], 1, h).unwrap();
    let mut rng = RngStream::new(7, 0);
    let steps = 2_000_000;
    let mut visits = [0usize; 16];
    for _ in 0..steps {
        glauber_chain(&mut config, beta, AcceptanceRule::Threshold, 1, 0, &mut rng).unwrap();
        visits[config.index()] += 1;
    }
    let l1: f64 = visits.iter().zip(&exact).map(|(&v, p)| (v as f64 / steps as f64 - p).abs()).sum();
    assert!(l1 < 0.02, "{l1}");
}

#[test]
fn strong_field_flips_the_magnetization() {
    let mut config = IsingConfig::uniform(vec![10, 10], -1, 2.0).unwrap();
    let run = glauber_chain(&mut config, 1.0, AcceptanceRule::Threshold, 50_000, 1000, &mut RngStream::new(8, 0)).unwrap();
    assert!(run.final_magnetization > 0.9);
}

fn brute_force(d: &DistanceMatrix) -> f64 {
    fn permute(rest: &mut Vec<usize>, k: usize, d: &DistanceMatrix, best: &mut f64) {
        if k == rest.len() {
            let mut tour = vec![0];
            tour.extend_from_slice(rest);
            *best = best.min(d.tour_length(&tour));
            return;
        }
        for i in k..rest.len() {
            rest.swap(k, i);
            permute(rest, k + 1, d, best);
            rest.swap(k, i);
        }
    }
    let mut rest: Vec<usize> = (1..d.n()).collect();
    let mut best = f64::INFINITY;
    permute(&mut rest, 0, d, &mut best);
    best
}

#[test]
fn annealing_finds_the_seven_city_optimum() {
    let mut rng = RngStream::new(99, 0);
    let coords: Vec<(f64, f64)> = (0..7).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect();
    let d = DistanceMatrix::from_coords(&coords).unwrap();
    let optimum = brute_force(&d);
    let schedule = AnnealSchedule::new(1.0, 1.001, 10_000).unwrap();
    let hits = (0..20)
        .filter(|&k| {
            let r = simulated_annealing_tsp(&d, &schedule, MoveKind::TwoOpt, &mut RngStream::new(100, k)).unwrap();
            (r.best_length - optimum).abs() < 1e-9
        })
        .count();
    assert!(hits >= 18, "{hits}/20");
}
