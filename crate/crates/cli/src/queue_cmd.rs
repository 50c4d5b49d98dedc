use clap::{Args, Subcommand};
use serde_json::{json, Value};
use stochastik::queueing::{
    burke_departure_test, mer1_auto, mm1, mm1n, mm_infinity, mms, simulate_queue, Law, QueueMetrics, QueueSimConfig,
};
use stochastik::scalar::parse_rational;
use stochastik::{Backend, Scalar};

use crate::output::{cell, float_cell, num, nums, Output, Table};
use crate::{replica_result, replicate, CliError, CliResult};

#[derive(Debug, Args)]
pub struct Rates {
    /// Arrival rate (decimal or fraction such as 1/3).
    #[arg(long)]
    lambda: String,
    /// Service rate per server.
    #[arg(long)]
    mu: String,
}

#[derive(Debug, Subcommand)]
pub enum QueueCommand {
    /// M/M/1.
    Mm1(Rates),
    /// M/M/1 with room for `capacity` customers in total.
    Mm1n {
        #[command(flatten)]
        rates: Rates,
        #[arg(long)]
        capacity: usize,
    },
    /// M/M/s (Erlang C).
    Mms {
        #[command(flatten)]
        rates: Rates,
        #[arg(long)]
        servers: usize,
    },
    /// M/M/∞.
    Mminf(Rates),
    /// M/E_r/1: service made of `phases` exponential phases of rate `mu`.
    Mer1 {
        #[command(flatten)]
        rates: Rates,
        #[arg(long)]
        phases: usize,
    },
    /// Discrete-event simulation of a G/G/s queue.
    Simulate {
        /// Interarrival law: exp:RATE, det:VALUE or gamma:RATE,SHAPE.
        #[arg(long)]
        arrivals: String,
        /// Service law, same syntax.
        #[arg(long)]
        service: String,
        #[arg(long, default_value_t = 1)]
        servers: usize,
        #[arg(long)]
        horizon: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        replicas: usize,
        /// Also test the departures for a Poisson law at this level.
        #[arg(long)]
        burke_alpha: Option<f64>,
    },
}

fn param<T: Scalar>(name: &str, s: &str) -> CliResult<T> {
    parse_rational(s).map(|r| T::from_rational(&r)).map_err(|e| CliError::Usage(format!("--{name}: {e}")))
}

fn metrics_json<T: Scalar>(m: &QueueMetrics<T>) -> Value {
    json!({
        "model": m.model,
        "pi": nums(&m.pi),
        "tail_mass": m.tail_mass,
        "utilization": num(&m.utilization),
        "mean_busy_servers": num(&m.mean_busy_servers),
        "mean_in_system": num(&m.mean_in_system),
        "mean_in_queue": num(&m.mean_in_queue),
        "mean_wait": num(&m.mean_wait),
        "mean_sojourn": num(&m.mean_sojourn),
        "wait_probability": num(&m.wait_probability),
        "loss_probability": m.loss_probability.as_ref().map(num),
        "throughput": num(&m.throughput),
    })
}

fn metrics_output<T: Scalar>(command: &str, m: &QueueMetrics<T>, backend: Backend) -> Output {
    let mut t = Table::new(&["n", "pi"]);
    for (n, p) in m.pi.iter().enumerate() {
        t.push(vec![n.to_string(), cell(p)]);
    }
    Output::new(command, metrics_json(m)).backend(backend).table(t)
}

fn closed_form<T: Scalar>(cmd: &QueueCommand, backend: Backend) -> CliResult<Output> {
    let rates = |r: &Rates| -> CliResult<(T, T)> { Ok((param("lambda", &r.lambda)?, param("mu", &r.mu)?)) };
    match cmd {
        QueueCommand::Mm1(r) => {
            let (l, m) = rates(r)?;
            Ok(metrics_output("queue mm1", &mm1(l, m)?, backend))
        }
        QueueCommand::Mm1n { rates: r, capacity } => {
            let (l, m) = rates(r)?;
            Ok(metrics_output("queue mm1n", &mm1n(l, m, *capacity)?, backend))
        }
        QueueCommand::Mms { rates: r, servers } => {
            let (l, m) = rates(r)?;
            Ok(metrics_output("queue mms", &mms(l, m, *servers)?, backend))
        }
        _ => unreachable!("closed forms only"),
    }
}

pub fn run(cmd: &QueueCommand, backend: Backend) -> CliResult<Output> {
    match cmd {
        QueueCommand::Mm1(_) | QueueCommand::Mm1n { .. } | QueueCommand::Mms { .. } => match backend {
            Backend::Exact => closed_form::<stochastik::Rational>(cmd, backend),
            Backend::Float => closed_form::<f64>(cmd, backend),
        },
        QueueCommand::Mminf(r) => {
            let m = mm_infinity(param("lambda", &r.lambda)?, param("mu", &r.mu)?)?;
            Ok(metrics_output("queue mminf", &m, Backend::Float))
        }
        QueueCommand::Mer1 { rates: r, phases } => {
            let a = mer1_auto(param("lambda", &r.lambda)?, param("mu", &r.mu)?, *phases)?;
            let mut out = metrics_output("queue mer1", &a.metrics, Backend::Float);
            out.result["phase_cap"] = json!(a.cap);
            out.result["phase_tail_mass"] = json!(a.tail_mass);
            Ok(out)
        }
        QueueCommand::Simulate { arrivals, service, servers, horizon, seed, replicas, burke_alpha } => {
            let parse = |flag: &str, s: &str| -> CliResult<Law> {
                s.parse().map_err(|e: stochastik::Error| CliError::Usage(format!("--{flag}: {e}")))
            };
            let config = QueueSimConfig::new(parse("arrivals", arrivals)?, parse("service", service)?, *servers, *horizon)?;
            let lambda = 1.0 / config.arrivals.mean();
            let reports = replicate(*seed, *replicas, |rng| {
                let r = simulate_queue(&config, rng);
                let mut v = serde_json::to_value(&r).expect("reports serialize");
                v["pasta_distance"] = json!(r.pasta_distance());
                if let Some(alpha) = burke_alpha {
                    v["burke"] = serde_json::to_value(burke_departure_test(&r, lambda, *alpha)?).expect("reports serialize");
                }
                Ok(v)
            })?;
            let mut t = Table::new(&[
                "replica",
                "mean_in_system",
                "mean_in_queue",
                "mean_wait",
                "mean_sojourn",
                "busy_fraction",
                "little_residual",
                "pasta_distance",
            ]);
            for (k, r) in reports.iter().enumerate() {
                let mut row = vec![k.to_string()];
                for key in &t.columns[1..] {
                    row.push(float_cell(r[key.as_str()].as_f64().unwrap_or(f64::NAN)));
                }
                t.rows.push(row);
            }
            Ok(Output::new("queue simulate", replica_result(reports)).seed(*seed).table(t))
        }
    }
}
