use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use stochastik::jump::transition_kernel;
use stochastik::mcmc::ising::{glauber_chain, IsingConfig};
use stochastik::mcmc::tsp::{simulated_annealing_tsp, DistanceMatrix, MoveKind};
use stochastik::mcmc::{AcceptanceRule, AnnealSchedule};
use stochastik::queueing::{simulate_queue, QueueSimConfig};
use stochastik::{absorbing, stationary, zoo, RngStream};
use stochastik_bench::{ladder_generator, random_exact_chain};

fn exact_solves(c: &mut Criterion) {
    let mut g = c.benchmark_group("stationary_exact");
    for n in [8, 16, 32] {
        let p = random_exact_chain(n, n as u64);
        g.bench_with_input(BenchmarkId::from_parameter(n), &p, |b, p| {
            b.iter(|| stationary::stationary_distribution(black_box(p)).unwrap())
        });
    }
    g.finish();

    let knight = match zoo::build("knight").unwrap().payload {
        zoo::Payload::Chain(p) => p,
        _ => unreachable!(),
    };
    c.bench_function("stationary_exact/knight", |b| b.iter(|| stationary::analyze(black_box(&knight)).unwrap()));

    let tennis = match zoo::build("tennis").unwrap().payload {
        zoo::Payload::Chain(p) => p,
        _ => unreachable!(),
    };
    c.bench_function("absorbing_exact/tennis", |b| b.iter(|| absorbing::analyze(black_box(&tennis)).unwrap()));
}

fn uniformization(c: &mut Criterion) {
    let mut g = c.benchmark_group("uniformization");
    for n in [10, 50, 100] {
        let l = ladder_generator(n, 1.0, 1.5);
        g.bench_with_input(BenchmarkId::from_parameter(n), &l, |b, l| {
            b.iter(|| transition_kernel(black_box(l), 2.0, 1e-12).unwrap())
        });
    }
    g.finish();
}

fn simulation(c: &mut Criterion) {
    let cfg = QueueSimConfig::new("exp:0.8".parse().unwrap(), "exp:1".parse().unwrap(), 1, 1e4).unwrap();
    c.bench_function("queue_sim/mm1_1e4", |b| {
        let mut rng = RngStream::new(1, 0);
        b.iter(|| simulate_queue(black_box(&cfg), &mut rng))
    });

    c.bench_function("glauber/32x32_1e5", |b| {
        let mut rng = RngStream::new(2, 0);
        b.iter(|| {
            let mut config = IsingConfig::uniform(vec![32, 32], 1, 0.0).unwrap();
            glauber_chain(&mut config, 0.4, AcceptanceRule::Threshold, 100_000, 0, &mut rng).unwrap()
        })
    });

    let coords: Vec<(f64, f64)> = (0..30).map(|k| ((k as f64 * 0.37).sin(), (k as f64 * 0.71).cos())).collect();
    let d = DistanceMatrix::from_coords(&coords).unwrap();
    let schedule = AnnealSchedule::new(1.0, 1.001, 20_000).unwrap();
    c.bench_function("tsp_anneal/30_cities", |b| {
        let mut rng = RngStream::new(3, 0);
        b.iter(|| simulated_annealing_tsp(&d, &schedule, MoveKind::TwoOpt, &mut rng).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = exact_solves, uniformization, simulation
}
criterion_main!(benches);
