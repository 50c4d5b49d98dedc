use std::path::PathBuf;

use clap::{Subcommand, ValueEnum};
use rand::Rng;
use serde_json::{json, Value};
use stochastik::distributions::{l1_binomial_poisson, pmf_binomial_f64, pmf_poisson};
use stochastik::mcmc::ising::{glauber_chain, kawasaki_step, IsingConfig};
use stochastik::mcmc::tsp::{simulated_annealing_tsp, DistanceMatrix, MoveKind};
use stochastik::mcmc::{AcceptanceRule, AnnealSchedule};
use stochastik::poisson::{sample_poisson_process, superpose, thin};
use stochastik::random_walk::{
    first_passage_law, origin_return_probability, position_law_1d, recurrence_diagnostic, return_time_table,
    simulate_walk,
};
use stochastik::scalar::parse_rational;
use stochastik::stats::{chi_square_gof, count_bins, ks_test, tail_binned};
use stochastik::{Backend, RngStream, Scalar};

use crate::output::{cell, float_cell, num, Output, Table};
use crate::{read_input, replica_result, replicate, CliError, CliResult};

#[derive(Debug, Subcommand)]
pub enum WalkCommand {
    /// Exact law of `X_n` in dimension 1.
    Law {
        #[arg(long)]
        n: u64,
    },
    /// Exact law of the first return time to 0 in dimension 1.
    ReturnTimes {
        #[arg(long)]
        n_max: u64,
    },
    /// Exact law of the first passage time at `target` in dimension 1.
    FirstPassage {
        #[arg(long, allow_negative_numbers = true)]
        target: i64,
        #[arg(long)]
        n_max: u64,
    },
    /// Exact `P(X_{2m} = 0)` for `m = 1..=m_max`.
    Origin {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        m_max: u64,
    },
    /// Log-log slope of the origin return probabilities and the verdict it suggests.
    Recurrence {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        m_max: u64,
    },
    /// Sampled walk positions.
    Simulate {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        replicas: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum PoissonCommand {
    /// Event times of a homogeneous process on `[0, horizon]`.
    Sample {
        #[arg(long)]
        rate: f64,
        #[arg(long)]
        horizon: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        replicas: usize,
    },
    /// KS test of the gaps and chi-square test of the counts in unit windows.
    Check {
        #[arg(long)]
        rate: f64,
        #[arg(long)]
        horizon: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1e-3)]
        alpha: f64,
    },
    /// Observed rates after thinning one process and superposing two.
    Thin {
        #[arg(long)]
        rate: f64,
        /// Retention probability.
        #[arg(long)]
        keep: f64,
        /// Rate of the second process for the superposition.
        #[arg(long)]
        other_rate: f64,
        #[arg(long)]
        horizon: f64,
        #[arg(long)]
        seed: u64,
    },
    /// Probability that all `count` events of `[0, horizon]` fall in
    /// `[0, within]` given that there are exactly `count`.
    Conditional {
        #[arg(long)]
        rate: f64,
        #[arg(long)]
        horizon: f64,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        within: String,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Binomial against Poisson: ℓ¹ distance, its bound and both laws.
    Binomial {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 10)]
        k_max: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Start {
    Plus,
    Minus,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Dynamics {
    Glauber,
    Kawasaki,
}

#[derive(Debug, Subcommand)]
pub enum McmcCommand {
    /// Ising model on a rectangular lattice.
    Ising {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        field: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value = "minus")]
        start: Start,
        #[arg(long, value_enum, default_value = "glauber")]
        dynamics: Dynamics,
        /// threshold or heatbath.
        #[arg(long, default_value = "threshold")]
        rule: String,
        #[arg(long)]
        periodic: bool,
        #[arg(long, default_value_t = 1000)]
        record_every: usize,
        #[arg(long, default_value_t = 1)]
        replicas: usize,
    },
    /// Simulated annealing for the travelling salesman.
    Tsp {
        /// JSON file with a list of `[x, y]` city coordinates.
        #[arg(long, conflicts_with = "random")]
        cities: Option<PathBuf>,
        /// Number of uniform random cities in the unit square.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        beta0: f64,
        /// Cooling factor `K`: `β_n = β₀ Kⁿ`.
        #[arg(long, default_value_t = 1.001)]
        cooling: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        seed: u64,
        /// transposition or 2opt.
        #[arg(long, default_value = "2opt")]
        moves: String,
        #[arg(long, default_value_t = 1)]
        replicas: usize,
    },
}

fn usage<E: std::fmt::Display>(flag: &str) -> impl Fn(E) -> CliError + '_ {
    move |e| CliError::Usage(format!("--{flag}: {e}"))
}

pub fn run_walk(cmd: &WalkCommand) -> CliResult<Output> {
    match cmd {
        WalkCommand::Law { n } => {
            let law = position_law_1d(*n);
            let mut t = Table::new(&["k", "probability"]);
            for (k, p) in &law.law {
                t.push(vec![k.to_string(), cell(p)]);
            }
            let rows: Vec<Value> = law.law.iter().map(|(k, p)| json!({ "k": k, "p": num(p) })).collect();
            Ok(Output::new("walk law", json!({ "n": n, "law": rows })).backend(Backend::Exact).table(t))
        }
        WalkCommand::ReturnTimes { n_max } => {
            let table = return_time_table(*n_max);
            let mut t = Table::new(&["n", "probability", "cumulative"]);
            let mut acc = stochastik::Rational::from_ratio(0, 1);
            let mut rows = Vec::new();
            for (n, p) in &table {
                acc += p.clone();
                t.push(vec![n.to_string(), cell(p), cell(&acc)]);
                rows.push(json!({ "n": n, "p": num(p), "cumulative": num(&acc) }));
            }
            Ok(Output::new("walk return-times", json!({ "n_max": n_max, "law": rows })).backend(Backend::Exact).table(t))
        }
        WalkCommand::FirstPassage { target, n_max } => {
            let mut t = Table::new(&["n", "probability"]);
            let mut rows = Vec::new();
            for n in 1..=*n_max {
                let p = first_passage_law(*target, n)?;
                t.push(vec![n.to_string(), cell(&p)]);
                rows.push(json!({ "n": n, "p": num(&p) }));
            }
            Ok(Output::new("walk first-passage", json!({ "target": target, "law": rows })).backend(Backend::Exact).table(t))
        }
        WalkCommand::Origin { dim, m_max } => {
            let mut t = Table::new(&["m", "probability"]);
            let mut rows = Vec::new();
            for m in 1..=*m_max {
                let p = origin_return_probability(m, *dim)?;
                t.push(vec![m.to_string(), cell(&p)]);
                rows.push(json!({ "m": m, "p": num(&p) }));
            }
            Ok(Output::new("walk origin", json!({ "dim": dim, "law": rows })).backend(Backend::Exact).table(t))
        }
        WalkCommand::Recurrence { dim, m_max } => {
            let r = recurrence_diagnostic(*dim, *m_max)?;
            let mut t = Table::new(&["m", "probability", "partial_sum"]);
            for (k, (p, s)) in r.return_probabilities.iter().zip(&r.partial_sums).enumerate() {
                t.push(vec![(k + 1).to_string(), float_cell(*p), float_cell(*s)]);
            }
            Ok(Output::new("walk recurrence", serde_json::to_value(&r).expect("reports serialize")).table(t))
        }
        WalkCommand::Simulate { dim, steps, seed, replicas } => {
            let paths = replicate(*seed, *replicas, |rng| Ok(simulate_walk(*dim, *steps, rng)?))?;
            let mut cols = vec!["replica", "step"];
            let axes = ["x", "y", "z"];
            cols.extend(&axes[..(*dim).min(3)]);
            let mut t = Table::new(&cols);
            for (k, path) in paths.iter().enumerate() {
                for (n, x) in path.iter().enumerate() {
                    let mut row = vec![k.to_string(), n.to_string()];
                    row.extend(x.iter().map(i64::to_string));
                    t.push(row);
                }
            }
            let results = paths.iter().map(|p| json!({ "positions": p })).collect();
            Ok(Output::new("walk simulate", replica_result(results)).seed(*seed).table(t))
        }
    }
}

/// Largest `k` such that `P(N >= k)` still gives five expected windows.
fn count_bin_limit(mean: f64, windows: usize) -> usize {
    let mut k = 1;
    let mut tail = 1.0 - pmf_poisson(mean, 0).unwrap_or(1.0);
    while k < 200 {
        let next = tail - pmf_poisson(mean, k as u64).unwrap_or(0.0);
        if next * (windows as f64) < 5.0 {
            break;
        }
        tail = next;
        k += 1;
    }
    k
}

pub fn run_poisson(cmd: &PoissonCommand) -> CliResult<Output> {
    match cmd {
        PoissonCommand::Sample { rate, horizon, seed, replicas } => {
            let samples = replicate(*seed, *replicas, |rng| Ok(sample_poisson_process(*rate, *horizon, rng)?))?;
            let mut t = Table::new(&["replica", "index", "time"]);
            for (k, s) in samples.iter().enumerate() {
                for (i, x) in s.times.iter().enumerate() {
                    t.push(vec![k.to_string(), (i + 1).to_string(), float_cell(*x)]);
                }
            }
            let results = samples.iter().map(|s| json!({ "count": s.len(), "times": s.times })).collect();
            Ok(Output::new("poisson sample", replica_result(results)).seed(*seed).table(t))
        }
        PoissonCommand::Check { rate, horizon, seed, alpha } => {
            let s = sample_poisson_process(*rate, *horizon, &mut RngStream::new(*seed, 0))?;
            let ks = ks_test(&s.interarrivals(), |x| 1.0 - (-rate * x).exp())?;
            let windows = horizon.floor() as usize;
            if windows == 0 {
                return Err(CliError::Usage("--horizon must cover at least one unit window".into()));
            }
            let k_max = count_bin_limit(*rate, windows);
            let counts = count_bins((0..windows).map(|k| s.count(k as f64, k as f64 + 1.0).map(|c| c as u64)).collect::<Result<Vec<_>, _>>()?, k_max);
            let probs = tail_binned(|k| pmf_poisson(*rate, k).unwrap_or(0.0), k_max);
            let chi = chi_square_gof(&counts, &probs)?;
            Ok(Output::new(
                "poisson check",
                json!({
                    "rate": rate,
                    "horizon": horizon,
                    "events": s.len(),
                    "alpha": alpha,
                    "ks": ks,
                    "ks_pass": ks.passes(*alpha),
                    "chi_square": chi,
                    "chi_square_pass": chi.passes(*alpha),
                    "count_bins": counts,
                }),
            )
            .seed(*seed))
        }
        PoissonCommand::Thin { rate, keep, other_rate, horizon, seed } => {
            let mut rng = RngStream::new(*seed, 0);
            let a = sample_poisson_process(*rate, *horizon, &mut rng)?;
            let b = sample_poisson_process(*other_rate, *horizon, &mut rng)?;
            let thinned = thin(&a, *keep, &mut rng)?;
            let both = superpose(&a, &b)?;
            let observed = |n: usize| n as f64 / horizon;
            let rel = |obs: f64, exp: f64| (obs - exp).abs() / exp;
            Ok(Output::new(
                "poisson thin",
                json!({
                    "thinned": { "expected_rate": rate * keep, "observed_rate": observed(thinned.len()),
                                 "relative_error": rel(observed(thinned.len()), rate * keep) },
                    "superposed": { "expected_rate": rate + other_rate, "observed_rate": observed(both.len()),
                                    "relative_error": rel(observed(both.len()), rate + other_rate) },
                }),
            )
            .seed(*seed))
        }
        PoissonCommand::Conditional { rate, horizon, count, within, trials, seed } => {
            let w = parse_rational(within).map_err(usage("within"))?;
            let wf = w.to_f64();
            if !(0.0..=*horizon).contains(&wf) {
                return Err(CliError::Usage(format!("--within must lie in [0, {horizon}]")));
            }
            let mut rng = RngStream::new(*seed, 0);
            let (mut kept, mut hits, mut drawn) = (0u64, 0u64, 0u64);
            // Rejection: keep samples with exactly `count` events.
            while kept < *trials {
                drawn += 1;
                let s = sample_poisson_process(*rate, *horizon, &mut rng)?;
                if s.len() == *count {
                    kept += 1;
                    if s.times.last().is_none_or(|&t| t <= wf) {
                        hits += 1;
                    }
                }
            }
            let estimate = hits as f64 / kept as f64;
            let exact = (wf / horizon).powi(*count as i32);
            let se = (exact * (1.0 - exact) / kept as f64).sqrt();
            Ok(Output::new(
                "poisson conditional",
                json!({
                    "estimate": estimate,
                    "exact": exact,
                    "standard_error": se,
                    "z": if se > 0.0 { (estimate - exact) / se } else { 0.0 },
                    "trials": kept,
                    "samples_drawn": drawn,
                }),
            )
            .seed(*seed))
        }
        PoissonCommand::Binomial { n, q, k_max } => {
            let rep = l1_binomial_poisson(*n, *q)?;
            let lambda = *n as f64 * q;
            let mut t = Table::new(&["k", "binomial", "poisson"]);
            let mut rows = Vec::new();
            for k in 0..=*k_max.min(n) {
                let b = pmf_binomial_f64(*n, *q, k)?;
                let p = pmf_poisson(lambda, k)?;
                t.push(vec![k.to_string(), float_cell(b), float_cell(p)]);
                rows.push(json!({ "k": k, "binomial": b, "poisson": p }));
            }
            Ok(Output::new("poisson binomial", json!({ "n": n, "q": q, "l1": rep, "table": rows })).table(t))
        }
    }
}

fn parse_rule(s: &str) -> CliResult<AcceptanceRule> {
    s.parse().map_err(usage("rule"))
}

pub fn run_mcmc(cmd: &McmcCommand) -> CliResult<Output> {
    match cmd {
        McmcCommand::Ising {
            rows,
            cols,
            beta,
            field,
            steps,
            seed,
            start,
            dynamics,
            rule,
            periodic,
            record_every,
            replicas,
        } => {
            let rule = parse_rule(rule)?;
            let runs = replicate(*seed, *replicas, |rng| {
                let n = rows * cols;
                let spins: Vec<i8> = match start {
                    Start::Plus => vec![1; n],
                    Start::Minus => vec![-1; n],
                    Start::Random => (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect(),
                };
                let mut config = IsingConfig::new(vec![*rows, *cols], spins, *field, *periodic)?;
                match dynamics {
                    Dynamics::Glauber => {
                        let run = glauber_chain(&mut config, *beta, rule, *steps, *record_every, rng)?;
                        Ok(serde_json::to_value(&run).expect("runs serialize"))
                    }
                    Dynamics::Kawasaki => {
                        let mut series = vec![(0usize, config.magnetization())];
                        let mut accepted = 0usize;
                        for k in 1..=*steps {
                            if kawasaki_step(&mut config, *beta, rule, rng)? {
                                accepted += 1;
                            }
                            if *record_every > 0 && k % record_every == 0 {
                                series.push((k, config.energy()));
                            }
                        }
                        Ok(json!({
                            "steps": steps,
                            "energy_series": series,
                            "final_energy": config.energy(),
                            "final_magnetization": config.magnetization(),
                            "acceptance_rate": if *steps > 0 { accepted as f64 / *steps as f64 } else { 0.0 },
                        }))
                    }
                }
            })?;
            let (column, key) = match dynamics {
                Dynamics::Glauber => ("magnetization", "series"),
                Dynamics::Kawasaki => ("energy", "energy_series"),
            };
            let mut t = Table::new(&["replica", "step", column]);
            for (k, r) in runs.iter().enumerate() {
                for point in r[key].as_array().into_iter().flatten() {
                    t.push(vec![k.to_string(), point[0].to_string(), point[1].to_string()]);
                }
            }
            Ok(Output::new("mcmc ising", replica_result(runs)).seed(*seed).table(t))
        }
        McmcCommand::Tsp { cities, random, beta0, cooling, steps, seed, moves, replicas } => {
            let moves: MoveKind = moves.parse().map_err(usage("moves"))?;
            let coords: Vec<(f64, f64)> = match (cities, random) {
                (Some(path), _) => {
                    let pts: Vec<[f64; 2]> = serde_json::from_str(&read_input(path)?)
                        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                    pts.into_iter().map(|[x, y]| (x, y)).collect()
                }
                (None, Some(k)) => {
                    // Cities come from a stream that no replica uses.
                    let mut rng = RngStream::new(*seed, u64::MAX);
                    (0..*k).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect()
                }
                (None, None) => return Err(CliError::Usage("pass --cities FILE or --random N".into())),
            };
            let d = DistanceMatrix::from_coords(&coords)?;
            let schedule = AnnealSchedule::new(*beta0, *cooling, *steps)?;
            let runs = replicate(*seed, *replicas, |rng| Ok(simulated_annealing_tsp(&d, &schedule, moves, rng)?))?;
            let mut t = Table::new(&["replica", "best_length", "final_length", "best_tour"]);
            for (k, r) in runs.iter().enumerate() {
                let tour: Vec<String> = r.best_tour.iter().map(usize::to_string).collect();
                t.push(vec![k.to_string(), float_cell(r.best_length), float_cell(r.final_length), tour.join(" ")]);
            }
            let results = runs.iter().map(|r| serde_json::to_value(r).expect("runs serialize")).collect();
            Ok(Output::new("mcmc tsp", json!({ "cities": coords, "schedule": schedule, "runs": replica_result(results) }))
                .seed(*seed)
                .table(t))
        }
    }
}
