use std::path::{Path, PathBuf};

use clap::Subcommand;
use serde_json::{json, Value};
use stochastik::absorbing;
use stochastik::chain::{classify, default_regular_cap, power_step, simulate_trajectory, Distribution};
use stochastik::files::{parse_chain, ChainSpec};
use stochastik::stationary::{self, reversible_vector, spectral_gap};
use stochastik::{Backend, Scalar, StochasticMatrix};

use crate::output::{cell, matrix, num, nums, Output, Table};
use crate::{input_error, read_input, replica_result, replicate, CliError, CliResult};

#[derive(Debug, Subcommand)]
pub enum ChainCommand {
    /// Communication classes, periods, irreducibility and regularity.
    Classify {
        file: PathBuf,
        /// Largest power tried when looking for an entrywise positive power.
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Stationary law, mean recurrence times, reversibility and spectral gap.
    Stationary { file: PathBuf },
    /// Fundamental matrix, absorption probabilities and expected absorption times.
    Absorbing { file: PathBuf },
    /// Law after a number of steps.
    Evolve {
        file: PathBuf,
        #[arg(long)]
        steps: u64,
        /// Start state (label or index); defaults to the file's initial law.
        #[arg(long)]
        from: Option<String>,
    },
    /// Sampled trajectories.
    Simulate {
        file: PathBuf,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        from: Option<String>,
        #[arg(long, default_value_t = 1)]
        replicas: usize,
    },
}

fn load(file: &Path) -> CliResult<ChainSpec> {
    parse_chain(&read_input(file)?).map_err(input_error)
}

fn labels<T: Scalar>(p: &StochasticMatrix<T>) -> Vec<String> {
    (0..p.n()).map(|i| p.label(i)).collect()
}

pub fn state_index<T: Scalar>(p: &StochasticMatrix<T>, name: &str) -> CliResult<usize> {
    if let Some(i) = (0..p.n()).find(|&i| p.label(i) == name) {
        return Ok(i);
    }
    match name.parse::<usize>() {
        Ok(i) if i < p.n() => Ok(i),
        _ => Err(CliError::Usage(format!("unknown state '{name}'"))),
    }
}

fn initial_law<T: Scalar>(spec: &ChainSpec, p: &StochasticMatrix<T>, from: &Option<String>) -> CliResult<Distribution<T>> {
    match (from, &spec.initial) {
        (Some(name), _) => Ok(Distribution::delta(p.n(), state_index(p, name)?)),
        (None, Some(nu)) => Ok(Distribution::new(nu.probs().iter().map(|x| T::from_rational(x)).collect())?),
        (None, None) => Err(CliError::Usage("no initial law in the file; pass --from".into())),
    }
}

pub fn run(cmd: &ChainCommand, backend: Backend) -> CliResult<Output> {
    let file = match cmd {
        ChainCommand::Classify { file, .. }
        | ChainCommand::Stationary { file }
        | ChainCommand::Absorbing { file }
        | ChainCommand::Evolve { file, .. }
        | ChainCommand::Simulate { file, .. } => file,
    };
    let spec = load(file)?;
    let out = match backend {
        Backend::Exact => run_with(cmd, &spec, &spec.matrix),
        Backend::Float => run_with(cmd, &spec, &spec.matrix.to_float()),
    }?;
    Ok(if matches!(cmd, ChainCommand::Simulate { .. }) { out } else { out.backend(backend) })
}

fn run_with<T: Scalar>(cmd: &ChainCommand, spec: &ChainSpec, p: &StochasticMatrix<T>) -> CliResult<Output> {
    let names = labels(p);
    match cmd {
        ChainCommand::Classify { cap, .. } => {
            let c = classify(p, cap.unwrap_or_else(|| default_regular_cap(p.n())));
            let classes: Vec<Value> = c
                .classes
                .iter()
                .zip(&c.class_kind)
                .map(|(cl, kind)| json!({ "states": cl.iter().map(|&i| &names[i]).collect::<Vec<_>>(), "kind": kind }))
                .collect();
            let mut t = Table::new(&["state", "class", "period", "absorbing"]);
            for i in 0..p.n() {
                t.push(vec![
                    names[i].clone(),
                    c.class_of[i].to_string(),
                    c.periods[i].map_or_else(|| "none".into(), |d| d.to_string()),
                    p.is_absorbing_state(i).to_string(),
                ]);
            }
            Ok(Output::new(
                "chain classify",
                json!({
                    "states": names,
                    "classes": classes,
                    "irreducible": c.irreducible,
                    "absorbing_chain": c.absorbing_chain,
                    "absorbing_states": c.absorbing_states.iter().map(|&i| &names[i]).collect::<Vec<_>>(),
                    "regular": c.regular,
                    "regular_witness": c.regular_witness,
                    "periods": c.periods,
                }),
            )
            .table(t))
        }
        ChainCommand::Stationary { .. } => {
            let res = stationary::analyze(p)?;
            let cert = reversible_vector(p)?;
            let gap = if cert.reversible { spectral_gap(p, &res.pi).ok() } else { None };
            let mut t = Table::new(&["state", "pi", "recurrence_time"]);
            for i in 0..p.n() {
                t.push(vec![names[i].clone(), cell(&res.pi.probs()[i]), cell(&res.recurrence_times[i])]);
            }
            Ok(Output::new(
                "chain stationary",
                json!({
                    "states": names,
                    "pi": nums(res.pi.probs()),
                    "recurrence_times": nums(&res.recurrence_times),
                    "regular": res.limit_matrix.is_some(),
                    "reversible": cert.reversible,
                    "detailed_balance_violation": cert.violation.map(|(i, j)| [&names[i], &names[j]]),
                    "spectral_gap": gap.map(|g| json!({ "lambda0": g.lambda0, "gap": g.gap, "iterations": g.iterations })),
                }),
            )
            .table(t))
        }
        ChainCommand::Absorbing { .. } => {
            let a = absorbing::analyze(p)?;
            let d = &a.decomposition;
            let transient: Vec<String> = d.transient.iter().map(|&i| names[i].clone()).collect();
            let absorbing_names: Vec<String> = d.absorbing.iter().map(|&i| names[i].clone()).collect();
            let mut result = json!({
                "transient": transient,
                "absorbing": absorbing_names,
                "fundamental": matrix(&a.fundamental),
                "absorption_probabilities": matrix(&a.absorption),
                "expected_absorption_times": nums(&a.expected_times),
            });
            if let Some(nu) = &spec.initial {
                let nu: Vec<T> = nu.probs().iter().map(T::from_rational).collect();
                let time = absorbing::averaged(d, &a.expected_times, &nu)?;
                let into: Vec<Value> = d
                    .absorbing
                    .iter()
                    .enumerate()
                    .map(|(k, &s)| {
                        let column: Vec<T> = (0..d.n_transient()).map(|i| a.absorption[(i, k)].clone()).collect();
                        let through = absorbing::averaged(d, &column, &nu)?;
                        Ok(num(&(through + nu[s].clone())))
                    })
                    .collect::<CliResult<_>>()?;
                result["from_initial_law"] = json!({ "expected_time": num(&time), "absorption_probabilities": into });
            }
            let mut cols = vec!["expected_time".to_string()];
            cols.extend(absorbing_names.iter().map(|n| format!("P[{n}]")));
            let mut t = Table { columns: vec!["state".into()], rows: Vec::new() };
            t.columns.extend(cols);
            for (i, name) in transient.iter().enumerate() {
                let mut row = vec![name.clone(), cell(&a.expected_times[i])];
                row.extend(a.absorption.row(i).iter().map(cell));
                t.push(row);
            }
            Ok(Output::new("chain absorbing", result).table(t))
        }
        ChainCommand::Evolve { steps, from, .. } => {
            let nu = initial_law(spec, p, from)?;
            let law = power_step(&nu, p, *steps)?;
            let mut t = Table::new(&["state", "probability"]);
            for (i, x) in law.probs().iter().enumerate() {
                t.push(vec![names[i].clone(), cell(x)]);
            }
            Ok(Output::new("chain evolve", json!({ "states": names, "steps": steps, "law": nums(law.probs()) })).table(t))
        }
        ChainCommand::Simulate { steps, seed, from, replicas, .. } => {
            let nu = initial_law(spec, p, from)?;
            let paths = replicate(*seed, *replicas, |rng| Ok(simulate_trajectory(p, &nu, *steps, rng)?))?;
            let mut t = Table::new(&["replica", "step", "state"]);
            for (k, path) in paths.iter().enumerate() {
                for (n, &x) in path.iter().enumerate() {
                    t.push(vec![k.to_string(), n.to_string(), names[x].clone()]);
                }
            }
            let results = paths
                .iter()
                .map(|path| json!({ "path": path.iter().map(|&x| &names[x]).collect::<Vec<_>>() }))
                .collect();
            Ok(Output::new("chain simulate", replica_result(results)).seed(*seed).table(t))
        }
    }
}
