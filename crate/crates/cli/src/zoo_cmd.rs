use clap::Subcommand;
use serde_json::json;
use stochastik::files::{chain_to_json, generator_to_json};
use stochastik::zoo::{self, Payload, MODEL_NAMES};

use crate::output::{Output, Table};
use crate::{CliError, CliResult};

#[derive(Debug, Subcommand)]
pub enum ZooCommand {
    /// Names and descriptions of the built-in models.
    List,
    /// Recomputes the reference values of a model, or of every model with `all`.
    Verify { name: String },
    /// Prints a model as a chain or generator file.
    Export { name: String },
}

pub fn run(cmd: &ZooCommand) -> CliResult<Output> {
    match cmd {
        ZooCommand::List => {
            let models = zoo::list();
            let mut t = Table::new(&["name", "description"]);
            for (n, d) in &models {
                t.push(vec![n.to_string(), d.to_string()]);
            }
            let result = models.iter().map(|(n, d)| json!({ "name": n, "description": d })).collect();
            Ok(Output::new("zoo list", serde_json::Value::Array(result)).table(t))
        }
        ZooCommand::Verify { name } => {
            let names: Vec<&str> = if name == "all" { MODEL_NAMES.to_vec() } else { vec![name.as_str()] };
            let reports = names.iter().map(|n| zoo::verify(n)).collect::<Result<Vec<_>, _>>()?;
            let mut t = Table::new(&["model", "quantity", "expected", "computed", "tolerance", "pass", "source"]);
            for r in &reports {
                for c in &r.checks {
                    t.push(vec![
                        r.name.clone(),
                        c.quantity.to_string(),
                        c.expected.to_string(),
                        c.computed.as_ref().map_or_else(|| c.error.clone().unwrap_or_default(), ToString::to_string),
                        c.tolerance.to_string(),
                        c.pass.to_string(),
                        c.source.clone(),
                    ]);
                }
            }
            let all_pass = reports.iter().all(|r| r.pass);
            let result = if reports.len() == 1 {
                serde_json::to_value(&reports[0]).expect("reports serialize")
            } else {
                json!({ "pass": all_pass, "models": reports })
            };
            Ok(Output::new("zoo verify", result).table(t))
        }
        ZooCommand::Export { name } => {
            let model = zoo::build(name)?;
            let text = match &model.payload {
                Payload::Chain(p) => chain_to_json(p),
                Payload::Generator(l) => generator_to_json(l),
                Payload::FloatChain(_) | Payload::FloatGenerator(_) => {
                    return Err(CliError::Domain(stochastik::Error::Domain(format!(
                        "model '{name}' has irrational entries and no exact file form"
                    ))))
                }
            };
            Ok(Output::raw("zoo export", text))
        }
    }
}
