//! JSON model files.
//!
//! Chains: `{"states": ["a", "b"], "rows": [["1/2", "1/2"], [0, 1]], "initial": ["1", "0"]}`.
//! Generators: `{"states": ["a", "b"], "rates": {"a->b": 2, "b->a": "1/3"}}`.
//! Entries may be JSON numbers or strings holding `a/b`, integers or decimals;
//! both are read as exact rationals.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::chain::{Distribution, StochasticMatrix};
use crate::error::{Error, Result};
use crate::jump::Generator;
use crate::scalar::{parse_rational, Rational};

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ChainFile {
    #[serde(default)]
    states: Option<Vec<String>>,
    rows: Vec<Vec<Value>>,
    #[serde(default)]
    initial: Option<Vec<Value>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GeneratorFile {
    states: Vec<String>,
    rates: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    pub matrix: StochasticMatrix<Rational>,
    pub initial: Option<Distribution<Rational>>,
}

fn entry(v: &Value) -> Result<Rational> {
    match v {
        Value::Number(n) => parse_rational(&n.to_string()),
        Value::String(s) => parse_rational(s),
        other => Err(Error::Parse(format!("expected a number or a fraction string, got {other}"))),
    }
}

pub fn parse_chain(text: &str) -> Result<ChainSpec> {
    let file: ChainFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let rows = file.rows.iter().map(|r| r.iter().map(entry).collect::<Result<Vec<_>>>()).collect::<Result<Vec<_>>>()?;
    let mut matrix = StochasticMatrix::new(rows)?;
    if let Some(states) = file.states {
        matrix = matrix.with_labels(states)?;
    }
    let initial = match file.initial {
        Some(v) => {
            let probs = v.iter().map(entry).collect::<Result<Vec<_>>>()?;
            if probs.len() != matrix.n() {
                return Err(Error::DimensionMismatch { expected: matrix.n(), found: probs.len() });
            }
            Some(Distribution::new(probs)?)
        }
        None => None,
    };
    Ok(ChainSpec { matrix, initial })
}

pub fn parse_generator(text: &str) -> Result<Generator<Rational>> {
    let file: GeneratorFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let n = file.states.len();
    let index = |name: &str| -> Result<usize> {
        let name = name.trim();
        file.states
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| Error::Parse(format!("unknown state '{name}' in rate key")))
    };
    let mut rates = Vec::with_capacity(file.rates.len());
    for (key, value) in &file.rates {
        let (from, to) = key.split_once("->").ok_or_else(|| Error::Parse(format!("rate key '{key}' is not of the form i->j")))?;
        rates.push((index(from)?, index(to)?, entry(value)?));
    }
    Generator::from_rates(n, &rates)?.with_labels(file.states)
}

fn fraction(r: &Rational) -> String {
    r.to_string()
}

pub fn chain_to_json(p: &StochasticMatrix<Rational>) -> String {
    let file = ChainFile {
        states: p.labels().map(<[String]>::to_vec),
        rows: (0..p.n()).map(|i| (0..p.n()).map(|j| Value::String(fraction(p.get(i, j)))).collect()).collect(),
        initial: None,
    };
    serde_json::to_string_pretty(&file).expect("chain files serialize")
}

pub fn generator_to_json(l: &Generator<Rational>) -> String {
    let states: Vec<String> = match l.labels() {
        Some(s) => s.to_vec(),
        None => (0..l.n()).map(|i| i.to_string()).collect(),
    };
    let mut rates = BTreeMap::new();
    for i in 0..l.n() {
        for j in 0..l.n() {
            if i != j && *l.rate(i, j) != Rational::from_integer(0.into()) {
                rates.insert(format!("{}->{}", states[i], states[j]), Value::String(fraction(l.rate(i, j))));
            }
        }
    }
    serde_json::to_string_pretty(&GeneratorFile { states, rates }).expect("generator files serialize")
}
