mod chain_cmd;
mod jump_cmd;
mod output;
mod queue_cmd;
mod random_cmd;
mod zoo_cmd;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;
use stochastik::{Backend, RngStream};

use output::{Format, Output};

#[derive(Debug, Parser)]
#[command(name = "stochastik", version, about = "Markov chains, jump processes, MCMC and queues")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Arithmetic for chain, generator and closed-form queue commands.
    #[arg(long, global = true, env = "STOCHASTIK_BACKEND", default_value = "exact", value_parser = parse_backend)]
    backend: Backend,
    /// Write the result here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Discrete-time chains read from a JSON file.
    #[command(subcommand)]
    Chain(chain_cmd::ChainCommand),
    /// Continuous-time jump processes read from a JSON generator file.
    #[command(subcommand)]
    Jump(jump_cmd::JumpCommand),
    /// Queue formulas and discrete-event simulation.
    #[command(subcommand)]
    Queue(queue_cmd::QueueCommand),
    /// Built-in textbook models with reference values.
    #[command(subcommand)]
    Zoo(zoo_cmd::ZooCommand),
    /// Simple random walk laws and simulation.
    #[command(subcommand)]
    Walk(random_cmd::WalkCommand),
    /// Poisson processes and the binomial approximation.
    #[command(subcommand)]
    Poisson(random_cmd::PoissonCommand),
    /// Ising dynamics and simulated annealing.
    #[command(subcommand)]
    Mcmc(random_cmd::McmcCommand),
}

fn parse_backend(s: &str) -> Result<Backend, String> {
    s.parse().map_err(|e: stochastik::Error| e.to_string())
}

/// Failures, split by exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad invocation or unreadable input: exit 2.
    Usage(String),
    /// The request is well formed but the mathematics refuses it: exit 1.
    Domain(stochastik::Error),
}

impl From<stochastik::Error> for CliError {
    fn from(e: stochastik::Error) -> Self {
        CliError::Domain(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }

    fn kind(&self) -> String {
        match self {
            CliError::Usage(_) => "UsageError".into(),
            // Variant name from the derived Debug output.
            CliError::Domain(e) => format!("{e:?}").split(['(', ' ', '{']).next().unwrap_or("Error").to_string(),
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Domain(e) => e.to_string(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn read_input(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

/// Parse failures in input files are usage errors; validation failures are
/// domain errors.
pub fn input_error(e: stochastik::Error) -> CliError {
    match e {
        stochastik::Error::Parse(m) => CliError::Usage(m),
        other => CliError::Domain(other),
    }
}

/// Runs `job` once per replica, concurrently, replica `k` on stream `k` of
/// `seed`. Results come back in replica order.
pub fn replicate<R: Send>(
    seed: u64,
    replicas: usize,
    job: impl Fn(&mut RngStream) -> CliResult<R> + Sync,
) -> CliResult<Vec<R>> {
    if replicas == 0 {
        return Err(CliError::Usage("--replicas must be at least 1".into()));
    }
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(replicas);
    let mut slots: Vec<Option<CliResult<R>>> = (0..replicas).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let job = &job;
                scope.spawn(move || {
                    (w..replicas)
                        .step_by(workers)
                        .map(|k| (k, job(&mut RngStream::new(seed, k as u64))))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (k, r) in h.join().expect("replica threads do not panic") {
                slots[k] = Some(r);
            }
        }
    });
    slots.into_iter().map(|s| s.expect("every replica ran")).collect()
}

/// Single runs report their result directly; batches list one per replica.
pub fn replica_result(mut results: Vec<serde_json::Value>) -> serde_json::Value {
    if results.len() == 1 {
        results.pop().expect("one result")
    } else {
        json!({ "replicas": results })
    }
}

fn run(cli: &Cli) -> CliResult<Output> {
    match &cli.command {
        Command::Chain(c) => chain_cmd::run(c, cli.backend),
        Command::Jump(c) => jump_cmd::run(c, cli.backend),
        Command::Queue(c) => queue_cmd::run(c, cli.backend),
        Command::Zoo(c) => zoo_cmd::run(c),
        Command::Walk(c) => random_cmd::run_walk(c),
        Command::Poisson(c) => random_cmd::run_poisson(c),
        Command::Mcmc(c) => random_cmd::run_mcmc(c),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|out| {
        let text = out.render(cli.format);
        match &cli.output {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if cli.format == Format::Json {
                let body = json!({
                    "schema_version": output::SCHEMA_VERSION,
                    "error": { "kind": e.kind(), "message": e.message(), "exit_code": e.exit_code() },
                });
                eprintln!("{}", serde_json::to_string_pretty(&body).expect("JSON values serialize"));
            } else {
                eprintln!("error ({}): {}", e.kind(), e.message());
            }
            ExitCode::from(e.exit_code())
        }
    }
}
