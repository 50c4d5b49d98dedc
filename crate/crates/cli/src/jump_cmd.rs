use std::path::PathBuf;

use clap::Subcommand;
use serde_json::json;
use stochastik::files::parse_generator;
use stochastik::jump::{
    detailed_balance_jump, embedded_chain, simulate_jump, stationary_jump, transition_kernel, DEFAULT_KERNEL_TOLERANCE,
};
use stochastik::{Backend, Generator, Rational, Scalar};

use crate::output::{float_cell, matrix, matrix_table, nums, Output, Table};
use crate::{input_error, read_input, replica_result, replicate, CliError, CliResult};

#[derive(Debug, Subcommand)]
pub enum JumpCommand {
    /// Stationary law of the generator and a detailed-balance check.
    Stationary { file: PathBuf },
    /// Transition kernel `P_t = e^{tL}` by uniformization.
    Kernel {
        file: PathBuf,
        #[arg(long)]
        t: f64,
        /// Bound on the neglected Poisson mass.
        #[arg(long, default_value_t = DEFAULT_KERNEL_TOLERANCE)]
        tol: f64,
    },
    /// Exit rates and the jump chain.
    Embedded { file: PathBuf },
    /// Sampled paths on `[0, horizon]`.
    Simulate {
        file: PathBuf,
        #[arg(long)]
        horizon: f64,
        #[arg(long)]
        from: String,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        replicas: usize,
    },
}

fn labels<T: Scalar>(l: &Generator<T>) -> Vec<String> {
    match l.labels() {
        Some(s) => s.to_vec(),
        None => (0..l.n()).map(|i| i.to_string()).collect(),
    }
}

pub fn run(cmd: &JumpCommand, backend: Backend) -> CliResult<Output> {
    let file = match cmd {
        JumpCommand::Stationary { file }
        | JumpCommand::Kernel { file, .. }
        | JumpCommand::Embedded { file }
        | JumpCommand::Simulate { file, .. } => file,
    };
    let l: Generator<Rational> = parse_generator(&read_input(file)?).map_err(input_error)?;
    match backend {
        Backend::Exact => run_with(cmd, &l, backend),
        Backend::Float => run_with(cmd, &l.to_float(), backend),
    }
}

fn run_with<T: Scalar>(cmd: &JumpCommand, l: &Generator<T>, backend: Backend) -> CliResult<Output> {
    let names = labels(l);
    match cmd {
        JumpCommand::Stationary { .. } => {
            let pi = stationary_jump(l)?;
            let cert = detailed_balance_jump(l)?;
            let mut t = Table::new(&["state", "pi"]);
            for (i, x) in pi.probs().iter().enumerate() {
                t.push(vec![names[i].clone(), crate::output::cell(x)]);
            }
            Ok(Output::new(
                "jump stationary",
                json!({
                    "states": names,
                    "pi": nums(pi.probs()),
                    "reversible": cert.reversible,
                    "detailed_balance_violation": cert.violation.map(|(i, j)| [&names[i], &names[j]]),
                }),
            )
            .backend(backend)
            .table(t))
        }
        JumpCommand::Kernel { t, tol, .. } => {
            if !(t.is_finite() && *t >= 0.0) {
                return Err(CliError::Usage(format!("--t must be a nonnegative number, got {t}")));
            }
            let p = transition_kernel(l, *t, *tol)?;
            Ok(Output::new("jump kernel", json!({ "states": names, "t": t, "tolerance": tol, "kernel": matrix(p.matrix()) }))
                .backend(Backend::Float)
                .table(matrix_table(&names, p.matrix(), &names)))
        }
        JumpCommand::Embedded { .. } => {
            let e = embedded_chain(l)?;
            Ok(Output::new(
                "jump embedded",
                json!({
                    "states": names,
                    "exit_rates": nums(&e.exit_rates),
                    "jump_chain": matrix(e.jump.matrix()),
                    "absorbing": e.absorbing,
                }),
            )
            .backend(backend)
            .table(matrix_table(&names, e.jump.matrix(), &names)))
        }
        JumpCommand::Simulate { horizon, from, seed, replicas, .. } => {
            let i0 = match names.iter().position(|s| s == from) {
                Some(i) => i,
                None => from
                    .parse::<usize>()
                    .ok()
                    .filter(|&i| i < l.n())
                    .ok_or_else(|| CliError::Usage(format!("unknown state '{from}'")))?,
            };
            let paths = replicate(*seed, *replicas, |rng| Ok(simulate_jump(l, i0, *horizon, rng)?))?;
            let mut t = Table::new(&["replica", "time", "state"]);
            for (k, path) in paths.iter().enumerate() {
                for (time, &s) in path.times.iter().zip(&path.states) {
                    t.push(vec![k.to_string(), float_cell(*time), names[s].clone()]);
                }
            }
            let results = paths
                .iter()
                .map(|p| {
                    json!({
                        "horizon": p.horizon,
                        "jumps": p.times.len() - 1,
                        "times": p.times,
                        "states": p.states.iter().map(|&s| &names[s]).collect::<Vec<_>>(),
                        "occupation": p.occupation(l.n()),
                    })
                })
                .collect();
            Ok(Output::new("jump simulate", replica_result(results)).seed(*seed).table(t))
        }
    }
}
