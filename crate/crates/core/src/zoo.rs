//! Named textbook models together with their known answers.

use std::fmt;

use serde::Serialize;

use crate::absorbing;
use crate::chain::{classify, default_regular_cap, StochasticMatrix};
use crate::error::{Error, Result};
use crate::jump::{detailed_balance_jump, stationary_jump, transition_kernel, Generator, DEFAULT_KERNEL_TOLERANCE};
use crate::linalg::Matrix;
use crate::scalar::{Rational, Scalar};
use crate::stationary;

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Chain(StochasticMatrix<Rational>),
    FloatChain(StochasticMatrix<f64>),
    Generator(Generator<Rational>),
    FloatGenerator(Generator<f64>),
}

/// A number that is either exact or a float.
#[derive(Debug, Clone, PartialEq)]
pub enum Num {
    Exact(Rational),
    Float(f64),
}

impl Num {
    pub fn to_f64(&self) -> f64 {
        match self {
            Num::Exact(r) => r.to_f64(),
            Num::Float(x) => *x,
        }
    }

    fn of<T: Scalar>(x: &T) -> Num {
        match T::BACKEND {
            crate::scalar::Backend::Exact => {
                Num::Exact(crate::scalar::parse_rational(&x.to_string()).expect("rational display round-trips"))
            }
            crate::scalar::Backend::Float => Num::Float(x.to_f64()),
        }
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num::Exact(r) => write!(f, "{r}"),
            Num::Float(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for Num {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Num::Exact(r) => s.serialize_str(&r.to_string()),
            Num::Float(x) => s.serialize_f64(*x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Number(Num),
    Vector(Vec<Num>),
    Matrix(Vec<Vec<Num>>),
    Flag(bool),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[Num]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
        match self {
            Value::Number(x) => write!(f, "{x}"),
            Value::Vector(v) => write!(f, "({})", join(v)),
            Value::Matrix(m) => {
                let rows: Vec<String> = m.iter().map(|r| format!("({})", join(r))).collect();
                write!(f, "[{}]", rows.join("; "))
            }
            Value::Flag(b) => write!(f, "{b}"),
        }
    }
}

/// What an oracle measures. State indices are 0-based in the model's order.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Quantity {
    /// `F = (I - Q)⁻¹` over the transient states in canonical order.
    Fundamental,
    /// `P_from[X_τ = into]`.
    Absorption { from: usize, into: usize },
    /// `E_from[τ]`.
    AbsorptionTime { from: usize },
    /// `P_ν[X_τ = into]` for an initial law over all states.
    AveragedAbsorption { nu: Vec<String>, into: usize },
    /// `offset + E_ν[τ]`.
    AveragedTime { nu: Vec<String>, offset: i64 },
    Stationary,
    /// `E_state[τ_state] = 1/π(state)`.
    RecurrenceTime { state: usize },
    Reversible,
    Regular,
    /// `P_t(from, to)` of a jump process.
    Kernel { t: f64, from: usize, to: usize },
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Fundamental => write!(f, "fundamental matrix"),
            Quantity::Absorption { from, into } => write!(f, "P_{from}[absorbed in {into}]"),
            Quantity::AbsorptionTime { from } => write!(f, "E_{from}[absorption time]"),
            Quantity::AveragedAbsorption { nu, into } => write!(f, "P_ν[absorbed in {into}], ν=({})", nu.join(", ")),
            Quantity::AveragedTime { nu, offset } => write!(f, "{offset} + E_ν[absorption time], ν=({})", nu.join(", ")),
            Quantity::Stationary => write!(f, "stationary distribution"),
            Quantity::RecurrenceTime { state } => write!(f, "mean recurrence time of {state}"),
            Quantity::Reversible => write!(f, "reversible"),
            Quantity::Regular => write!(f, "regular"),
            Quantity::Kernel { t, from, to } => write!(f, "P_{t}({from}, {to})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Oracle {
    pub quantity: Quantity,
    pub expected: Value,
    /// Zero means exact equality.
    pub tolerance: f64,
    /// Where the expected value comes from.
    pub source: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedModel {
    pub name: &'static str,
    pub description: &'static str,
    pub payload: Payload,
    pub oracles: Vec<Oracle>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCheck {
    pub quantity: Quantity,
    pub expected: Value,
    pub computed: Option<Value>,
    pub error: Option<String>,
    pub tolerance: f64,
    pub source: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub name: String,
    pub checks: Vec<OracleCheck>,
    pub pass: bool,
}

pub const MODEL_NAMES: &[&str] = &[
    "mouse",
    "coin_game",
    "tennis",
    "bilbo",
    "mont_blanc",
    "regular_four_state",
    "reversible_four_state",
    "irreversible_four_state",
    "weather",
    "umbrellas",
    "ehrenfest",
    "ring",
    "flea",
    "knight",
    "king",
    "queen",
    "bishop",
    "jump_four_state",
    "businessman",
    "computer_store",
    "two_state_jump",
    "pure_death",
    "star",
    "one_way_cycle",
];

pub fn list() -> Vec<(&'static str, &'static str)> {
    MODEL_NAMES.iter().map(|n| build(n).map(|m| (m.name, m.description)).expect("listed models build")).collect()
}

fn q(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

fn ex(n: i64, d: i64) -> Num {
    Num::Exact(q(n, d))
}

fn chain(rows: &[&[(i64, i64)]]) -> StochasticMatrix<Rational> {
    StochasticMatrix::new(rows.iter().map(|r| r.iter().map(|&(n, d)| q(n, d)).collect()).collect())
        .expect("zoo matrices are stochastic")
}

fn generator(rows: &[&[i64]]) -> Generator<Rational> {
    Generator::new(rows.iter().map(|r| r.iter().map(|&x| q(x, 1)).collect()).collect()).expect("zoo generators are valid")
}

fn labelled(p: StochasticMatrix<Rational>, labels: &[&str]) -> StochasticMatrix<Rational> {
    p.with_labels(labels.iter().map(|s| s.to_string()).collect()).expect("one label per state")
}

fn exact(quantity: Quantity, expected: Value, source: &str) -> Oracle {
    Oracle { quantity, expected, tolerance: 0.0, source: source.into() }
}

fn approx(quantity: Quantity, expected: Value, tolerance: f64, source: &str) -> Oracle {
    Oracle { quantity, expected, tolerance, source: source.into() }
}

fn num(x: Num) -> Value {
    Value::Number(x)
}

fn vector(v: &[(i64, i64)]) -> Value {
    Value::Vector(v.iter().map(|&(n, d)| ex(n, d)).collect())
}

fn matrix(rows: &[&[i64]], den: i64) -> Value {
    Value::Matrix(rows.iter().map(|r| r.iter().map(|&x| ex(x, den)).collect()).collect())
}

/// Simple random walk on an undirected graph given by adjacency lists.
fn graph_walk(adj: &[Vec<usize>]) -> StochasticMatrix<Rational> {
    let n = adj.len();
    let m = Matrix::from_fn(n, n, |i, j| {
        let hits = adj[i].iter().filter(|&&k| k == j).count() as i64;
        q(hits, adj[i].len() as i64)
    });
    StochasticMatrix::validate(m).expect("every vertex has a neighbour")
}

fn on_board(r: i64, c: i64) -> bool {
    (0..8).contains(&r) && (0..8).contains(&c)
}

fn steppers(offsets: &[(i64, i64)]) -> Vec<Vec<usize>> {
    (0..64)
        .map(|s| {
            let (r, c) = ((s / 8) as i64, (s % 8) as i64);
            offsets
                .iter()
                .map(|&(dr, dc)| (r + dr, c + dc))
                .filter(|&(a, b)| on_board(a, b))
                .map(|(a, b)| (a * 8 + b) as usize)
                .collect()
        })
        .collect()
}

fn sliders(directions: &[(i64, i64)]) -> Vec<Vec<usize>> {
    (0..64)
        .map(|s| {
            let (r, c) = ((s / 8) as i64, (s % 8) as i64);
            let mut out = Vec::new();
            for &(dr, dc) in directions {
                let (mut a, mut b) = (r + dr, c + dc);
                while on_board(a, b) {
                    out.push((a * 8 + b) as usize);
                    a += dr;
                    b += dc;
                }
            }
            out
        })
        .collect()
}

fn square_names() -> Vec<String> {
    (0..64).map(|s| format!("{}{}", (b'a' + (s % 8) as u8) as char, s / 8 + 1)).collect()
}

const DIAGONALS: [(i64, i64); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];
const ORTHOGONALS: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

fn chess_model(
    name: &'static str,
    description: &'static str,
    adj: Vec<Vec<usize>>,
    keep: impl Fn(usize) -> bool,
    expected: (i64, i64),
    source: &str,
) -> NamedModel {
    let squares: Vec<usize> = (0..64).filter(|&s| keep(s)).collect();
    let index = |s: usize| squares.iter().position(|&x| x == s).expect("moves stay on kept squares");
    let sub: Vec<Vec<usize>> = squares.iter().map(|&s| adj[s].iter().map(|&t| index(t)).collect()).collect();
    let names = square_names();
    let labels: Vec<String> = squares.iter().map(|&s| names[s].clone()).collect();
    let p = graph_walk(&sub).with_labels(labels).expect("one label per square");
    NamedModel {
        name,
        description,
        payload: Payload::Chain(p),
        oracles: vec![exact(Quantity::RecurrenceTime { state: 0 }, num(ex(expected.0, expected.1)), source)],
    }
}

fn ehrenfest(n: usize) -> StochasticMatrix<Rational> {
    let big = n as i64;
    let m = Matrix::from_fn(n + 1, n + 1, |i, j| {
        if j + 1 == i {
            q(i as i64, big)
        } else if j == i + 1 {
            q(big - i as i64, big)
        } else {
            q(0, 1)
        }
    });
    StochasticMatrix::validate(m).expect("Ehrenfest rows sum to one")
}

pub fn build(name: &str) -> Result<NamedModel> {
    let z = (0, 1);
    let o = (1, 1);
    let h = (1, 2);
    let model = match name {
        "mouse" => {
            let t = (1, 3);
            let p = labelled(
                chain(&[&[z, t, t, z, t], &[h, z, z, h, z], &[h, z, z, h, z], &[z, z, z, o, z], &[z, z, z, z, o]]),
                &["1", "2", "3", "food", "trap"],
            );
            let src = "labyrinth exercise answer";
            NamedModel {
                name: "mouse",
                description: "mouse in a five-room labyrinth with food and a trap",
                payload: Payload::Chain(p),
                oracles: vec![
                    exact(Quantity::Fundamental, matrix(&[&[6, 2, 2], &[3, 5, 1], &[3, 1, 5]], 4), src),
                    exact(Quantity::Absorption { from: 0, into: 3 }, num(ex(1, 2)), src),
                    exact(Quantity::Absorption { from: 1, into: 3 }, num(ex(3, 4)), src),
                    exact(Quantity::AbsorptionTime { from: 0 }, num(ex(5, 2)), src),
                    exact(Quantity::AbsorptionTime { from: 1 }, num(ex(9, 4)), src),
                ],
            }
        }
        "coin_game" => {
            let p = labelled(
                chain(&[
                    &[h, h, z, z, z, z],
                    &[z, z, z, h, z, h],
                    &[h, h, z, z, z, z],
                    &[z, z, h, z, h, z],
                    &[z, z, z, z, o, z],
                    &[z, z, z, z, z, o],
                ]),
                &["PP", "PF", "FP", "FF", "A wins", "B wins"],
            );
            let src = "coin game worked example";
            let nu: Vec<String> = ["1/4", "1/4", "1/4", "1/4", "0", "0"].iter().map(|s| s.to_string()).collect();
            NamedModel {
                name: "coin_game",
                description: "two players betting on the pattern of two consecutive coin tosses",
                payload: Payload::Chain(p),
                oracles: vec![
                    exact(Quantity::Fundamental, matrix(&[&[7, 4, 1, 2], &[1, 4, 1, 2], &[4, 4, 4, 2], &[2, 2, 2, 4]], 3), src),
                    exact(Quantity::Absorption { from: 0, into: 4 }, num(ex(1, 3)), src),
                    exact(Quantity::Absorption { from: 3, into: 4 }, num(ex(2, 3)), src),
                    exact(Quantity::AbsorptionTime { from: 0 }, num(ex(14, 3)), src),
                    exact(Quantity::AveragedAbsorption { nu: nu.clone(), into: 4 }, num(ex(5, 12)), src),
                    exact(Quantity::AveragedTime { nu, offset: 2 }, num(ex(35, 6)), src),
                ],
            }
        }
        "tennis" => {
            let p = labelled(
                chain(&[
                    &[z, (3, 5), (2, 5), z, z],
                    &[(2, 5), z, z, (3, 5), z],
                    &[(3, 5), z, z, z, (2, 5)],
                    &[z, z, z, o, z],
                    &[z, z, z, z, o],
                ]),
                &["deuce", "advantage A", "advantage B", "A wins", "B wins"],
            );
            let src = "tennis exercise answer";
            NamedModel {
                name: "tennis",
                description: "tennis game from deuce, A wins each point with probability 3/5",
                payload: Payload::Chain(p),
                oracles: vec![
                    exact(Quantity::Fundamental, matrix(&[&[25, 15, 10], &[10, 19, 4], &[15, 9, 19]], 13), src),
                    exact(Quantity::Absorption { from: 0, into: 3 }, num(ex(9, 13)), src),
                    exact(Quantity::AbsorptionTime { from: 0 }, num(ex(50, 13)), src),
                ],
            }
        }
        "bilbo" => {
            let (t, f) = ((1, 3), (1, 4));
            let p = labelled(
                chain(&[
                    &[z, t, t, t, z],
                    &[f, z, f, f, f],
                    &[t, t, z, z, t],
                    &[z, z, z, o, z],
                    &[z, z, z, z, o],
                ]),
                &["1", "2", "3", "Gollum", "exit"],
            );
            let src = "cave exercise answer";
            NamedModel {
                name: "bilbo",
                description: "hobbit wandering through caves until Gollum's lair or the exit",
                payload: Payload::Chain(p),
                oracles: vec![
                    exact(Quantity::Fundamental, matrix(&[&[33, 16, 15], &[12, 32, 12], &[15, 16, 33]], 24), src),
                    exact(Quantity::Absorption { from: 0, into: 4 }, num(ex(3, 8)), src),
                    exact(Quantity::AbsorptionTime { from: 0 }, num(ex(8, 3)), src),
                ],
            }
        }
        "mont_blanc" => {
            let p = (5f64.sqrt() - 1.0) / 2.0;
            let qq = 1.0 - p;
            let m = StochasticMatrix::new(vec![
                vec![0.0, p, qq, 0.0],
                vec![qq, 0.0, 0.0, p],
                vec![0.0, 0.0, 1.0, 0.0],
                vec![0.0, 0.0, 0.0, 1.0],
            ])?
            .with_labels(["Tete Rousse", "Gouter", "Nid d'Aigle", "summit"].iter().map(|s| s.to_string()).collect())?;
            let d = 1.0 - p * qq;
            let f = |x: f64| Num::Float(x);
            let src = "climber exercise answer at the fifty-fifty weather probability";
            NamedModel {
                name: "mont_blanc",
                description: "climber moving between huts, good weather with probability (√5-1)/2",
                payload: Payload::FloatChain(m),
                oracles: vec![
                    approx(
                        Quantity::Fundamental,
                        Value::Matrix(vec![vec![f(1.0 / d), f(p / d)], vec![f(qq / d), f(1.0 / d)]]),
                        1e-9,
                        src,
                    ),
                    approx(Quantity::Absorption { from: 0, into: 3 }, num(f(0.5)), 1e-9, src),
                    approx(
                        Quantity::AbsorptionTime { from: 0 },
                        num(f((1.0 + 5f64.sqrt()) / (2.0 * (3.0 - 5f64.sqrt())))),
                        1e-9,
                        src,
                    ),
                ],
            }
        }
        "regular_four_state" => {
            let p = chain(&[
                &[z, h, h, z],
                &[(1, 16), (7, 16), z, h],
                &[(1, 16), z, (7, 16), h],
                &[z, (1, 4), (1, 4), h],
            ]);
            let src = "four-state regular chain exercise answer";
            NamedModel {
                name: "regular_four_state",
                description: "irreducible four-state chain whose square is positive",
                payload: Payload::Chain(p),
                oracles: vec![
                    exact(Quantity::Regular, Value::Flag(true), src),
                    exact(Quantity::Stationary, vector(&[(1, 33), (8, 33), (8, 33), (16, 33)]), src),
                ],
            }
        }
        "reversible_four_state" => {
            let p = chain(&[&[z, o, z, z], &[(1, 4), h, (1, 4), z], &[z, h, z, h], &[z, z, o, z]]);
            let src = "four-state reversible chain exercise answer";
            NamedModel {
                name: "reversible_four_state",
                description: "four-state birth-death chain",
                payload: Payload::Chain(p),
                oracles: vec![
                    exact(Quantity::Regular, Value::Flag(true), src),
                    exact(Quantity::Stationary, vector(&[(1, 8), (1, 2), (1, 4), (1, 8)]), src),
                    exact(Quantity::Reversible, Value::Flag(true), src),
                ],
            }
        }
        "irreversible_four_state" => {
            let p = chain(&[&[z, h, z, h], &[h, z, h, z], &[h, z, h, z], &[z, h, z, h]]);
            let src = "four-state non-reversible chain exercise answer";
            NamedModel {
                name: "irreversible_four_state",
                description: "doubly stochastic four-state chain violating detailed balance",
                payload: Payload::Chain(p),
                oracles: vec![
                    exact(Quantity::Regular, Value::Flag(true), src),
                    exact(Quantity::Stationary, vector(&[(1, 4); 4]), src),
                    exact(Quantity::Reversible, Value::Flag(false), src),
                ],
            }
        }
        "weather" => {
            let p = labelled(chain(&[&[(1, 4), (3, 4), z], &[h, (1, 3), (1, 6)], &[z, h, h]]), &["fine", "rain", "snow"]);
            let src = "weather exercise answer";
            NamedModel {
                name: "weather",
                description: "fine, rain and snow days",
                payload: Payload::Chain(p),
                oracles: vec![
                    exact(Quantity::Regular, Value::Flag(true), src),
                    exact(Quantity::Stationary, vector(&[(1, 3), h, (1, 6)]), src),
                    exact(Quantity::RecurrenceTime { state: 2 }, num(ex(6, 1)), src),
                ],
            }
        }
        "umbrellas" => {
            let (t, tt) = ((1, 3), (2, 3));
            let p = chain(&[&[z, z, z, o], &[z, z, tt, t], &[z, tt, t, z], &[tt, t, z, z]]);
            let src = "umbrella exercise answer";
            NamedModel {
                name: "umbrellas",
                description: "number of umbrellas at hand with three umbrellas and rain probability 1/3",
                payload: Payload::Chain(p),
                oracles: vec![
                    exact(Quantity::Regular, Value::Flag(true), src),
                    exact(Quantity::Stationary, vector(&[(2, 11), (3, 11), (3, 11), (3, 11)]), src),
                ],
            }
        }
        "ehrenfest" => {
            let n = 6;
            let expected: Vec<Num> =
                (0..=n as u64).map(|k| Num::Exact(Rational::from_integer(crate::distributions::binomial_coefficient(n as u64, k)) / q(1 << n, 1))).collect();
            let src = "binomial law of the urn model";
            NamedModel {
                name: "ehrenfest",
                description: "Ehrenfest urn with 6 balls; the state is the number of balls in the left urn",
                payload: Payload::Chain(ehrenfest(n)),
                oracles: vec![
                    exact(Quantity::Stationary, Value::Vector(expected), src),
                    exact(Quantity::Regular, Value::Flag(false), "periodic chain of period 2"),
                    exact(Quantity::Reversible, Value::Flag(true), src),
                    exact(Quantity::RecurrenceTime { state: 0 }, num(ex(1 << n, 1)), src),
                ],
            }
        }
        "ring" => {
            let n = 5;
            let m = Matrix::from_fn(n, n, |i, j| {
                if j == (i + 1) % n {
                    q(2, 3)
                } else if (j + 1) % n == i {
                    q(1, 3)
                } else {
                    q(0, 1)
                }
            });
            let src = "doubly stochastic ring with drift";
            NamedModel {
                name: "ring",
                description: "walk on a 5-cycle stepping clockwise with probability 2/3",
                payload: Payload::Chain(StochasticMatrix::validate(m)?),
                oracles: vec![
                    exact(Quantity::Stationary, vector(&[(1, 5); 5]), src),
                    exact(Quantity::Reversible, Value::Flag(false), src),
                    exact(Quantity::Regular, Value::Flag(true), src),
                ],
            }
        }
        "flea" => {
            // Triangular lattice with rows 0..5; node (r, c) for c <= r.
            let id = |r: usize, c: usize| r * (r + 1) / 2 + c;
            let mut adj = vec![Vec::new(); 15];
            let mut link = |a: usize, b: usize| {
                adj[a].push(b);
                adj[b].push(a);
            };
            for r in 0..5 {
                for c in 0..=r {
                    if c < r {
                        link(id(r, c), id(r, c + 1));
                    }
                    if r < 4 {
                        link(id(r, c), id(r + 1, c));
                        link(id(r, c), id(r + 1, c + 1));
                    }
                }
            }
            for a in &mut adj {
                a.sort_unstable();
            }
            let corner = id(4, 0);
            NamedModel {
                name: "flea",
                description: "flea jumping between adjacent cells of a 15-cell triangle; state 10 is the lower-left corner",
                payload: Payload::Chain(graph_walk(&adj)),
                oracles: vec![exact(
                    Quantity::RecurrenceTime { state: corner },
                    num(ex(30, 1)),
                    "triangle exercise answer, 60/2",
                )],
            }
        }
        "knight" => {
            let jumps = [(1, 2), (2, 1), (-1, 2), (-2, 1), (1, -2), (2, -1), (-1, -2), (-2, -1)];
            chess_model(
                "knight",
                "knight moving uniformly on an empty chessboard; state 0 is the corner a1",
                steppers(&jumps),
                |_| true,
                (168, 1),
                "knight walk worked example, 336/2",
            )
        }
        "king" => {
            let all: Vec<(i64, i64)> = DIAGONALS.iter().chain(&ORTHOGONALS).copied().collect();
            chess_model("king", "king walk on an empty chessboard; state 0 is a1", steppers(&all), |_| true, (140, 1), "chess walks exercise answer, 420/3")
        }
        "queen" => {
            let all: Vec<(i64, i64)> = DIAGONALS.iter().chain(&ORTHOGONALS).copied().collect();
            chess_model("queen", "queen walk on an empty chessboard; state 0 is a1", sliders(&all), |_| true, (208, 3), "chess walks exercise answer")
        }
        "bishop" => chess_model(
            "bishop",
            "bishop walk on the 32 dark squares; state 0 is a1",
            sliders(&DIAGONALS),
            |s| (s / 8 + s % 8) % 2 == 0,
            (40, 1),
            "chess walks exercise answer, 280/7 on one colour",
        ),
        "jump_four_state" => {
            let l = generator(&[&[-2, 1, 1, 0], &[2, -5, 1, 2], &[2, 0, -3, 1], &[0, 0, 1, -1]]);
            let src = "four-state jump process exercise answer";
            NamedModel {
                name: "jump_four_state",
                description: "irreducible four-state jump process",
                payload: Payload::Generator(l),
                oracles: vec![
                    exact(Quantity::Stationary, vector(&[(5, 16), (1, 16), (4, 16), (6, 16)]), src),
                    exact(Quantity::Reversible, Value::Flag(false), src),
                ],
            }
        }
        "businessman" => {
            let l = generator(&[&[-4, 2, 2], &[3, -4, 1], &[5, 0, -5]])
                .with_labels(vec!["Paris".into(), "Bordeaux".into(), "Marseille".into()])?;
            NamedModel {
                name: "businessman",
                description: "travels between three cities, rates per month",
                payload: Payload::Generator(l),
                oracles: vec![exact(Quantity::Stationary, vector(&[h, (1, 4), (1, 4)]), "travelling businessman exercise answer")],
            }
        }
        "computer_store" => {
            let l = generator(&[&[-1, 0, 1, 0], &[2, -3, 0, 1], &[0, 2, -2, 0], &[0, 0, 2, -2]]);
            NamedModel {
                name: "computer_store",
                description: "stock of a shop reordering two computers when at most one is left",
                payload: Payload::Generator(l),
                oracles: vec![exact(
                    Quantity::Stationary,
                    vector(&[(2, 5), (1, 5), (3, 10), (1, 10)]),
                    "computer store exercise answer",
                )],
            }
        }
        "two_state_jump" => {
            let (lam, mu) = (1.0f64, 2.0f64);
            let l = Generator::two_state(lam, mu)?;
            let t = 1.0;
            let e = (-(lam + mu) * t).exp();
            let src = "closed-form two-state kernel";
            let kernel = [[mu + lam * e, lam - lam * e], [mu - mu * e, lam + mu * e]];
            let mut oracles: Vec<Oracle> = (0..2)
                .flat_map(|i| (0..2).map(move |j| (i, j)))
                .map(|(i, j)| approx(Quantity::Kernel { t, from: i, to: j }, num(Num::Float(kernel[i][j] / (lam + mu))), 1e-10, src))
                .collect();
            oracles.push(approx(Quantity::Stationary, Value::Vector(vec![Num::Float(2.0 / 3.0), Num::Float(1.0 / 3.0)]), 1e-12, src));
            NamedModel {
                name: "two_state_jump",
                description: "two-state jump process with rates λ=1 (0→1) and μ=2 (1→0)",
                payload: Payload::FloatGenerator(l),
                oracles,
            }
        }
        "pure_death" => {
            let (mu, n, t) = (1.5f64, 5usize, 0.8f64);
            let l = Generator::pure_death(n + 1, mu)?;
            let src = "pure death kernel closed form";
            let mut oracles = Vec::new();
            let mut fact = 1.0;
            let mut below = 0.0;
            for k in 0..n {
                if k > 0 {
                    fact *= k as f64;
                }
                let p = (mu * t).powi(k as i32) / fact * (-mu * t).exp();
                below += p;
                oracles.push(approx(Quantity::Kernel { t, from: n, to: n - k }, num(Num::Float(p)), 1e-9, src));
            }
            oracles.push(approx(Quantity::Kernel { t, from: n, to: 0 }, num(Num::Float(1.0 - below)), 1e-9, src));
            NamedModel {
                name: "pure_death",
                description: "five atoms decaying at rate 1.5",
                payload: Payload::FloatGenerator(l),
                oracles,
            }
        }
        "star" => {
            let (n, lam, mu) = (4usize, 2i64, 3i64);
            let rates: Vec<(usize, usize, Rational)> =
                (1..=n).flat_map(|k| [(0, k, q(lam, 1)), (k, 0, q(mu, 1))]).collect();
            let l = Generator::from_rates(n + 1, &rates)?;
            let z = mu + n as i64 * lam;
            let mut pi = vec![(mu, z)];
            pi.extend(std::iter::repeat_n((lam, z), n));
            let src = "star-shaped jump process exercise answer";
            NamedModel {
                name: "star",
                description: "hub 0 linked to 4 leaves, rate 2 outwards and 3 back",
                payload: Payload::Generator(l),
                oracles: vec![exact(Quantity::Stationary, vector(&pi), src), exact(Quantity::Reversible, Value::Flag(true), src)],
            }
        }
        "one_way_cycle" => {
            let l = generator(&[&[-1, 1, 0], &[0, -1, 1], &[1, 0, -1]]);
            let src = "one-way three-cycle exercise answer";
            NamedModel {
                name: "one_way_cycle",
                description: "jump process circulating 1→2→3→1 at unit rate",
                payload: Payload::Generator(l),
                oracles: vec![exact(Quantity::Stationary, vector(&[(1, 3); 3]), src), exact(Quantity::Reversible, Value::Flag(false), src)],
            }
        }
        other => return Err(Error::UnknownModel(other.to_string())),
    };
    Ok(model)
}

fn nums<T: Scalar>(v: &[T]) -> Value {
    Value::Vector(v.iter().map(Num::of).collect())
}

fn matrix_value<T: Scalar>(m: &Matrix<T>) -> Value {
    Value::Matrix((0..m.rows()).map(|i| m.row(i).iter().map(Num::of).collect()).collect())
}

fn parse_nu<T: Scalar>(nu: &[String]) -> Result<Vec<T>> {
    nu.iter()
        .map(|s| {
            let r = crate::scalar::parse_rational(s)?;
            let part = |x: &num_bigint::BigInt| x.to_string().parse::<i64>().map_err(|_| Error::Parse(s.clone()));
            Ok(T::from_ratio(part(r.numer())?, part(r.denom())?))
        })
        .collect()
}

fn absorbing_column<T: Scalar>(a: &absorbing::AbsorbingAnalysis<T>, state: usize) -> Result<usize> {
    a.decomposition
        .absorbing
        .iter()
        .position(|&s| s == state)
        .ok_or_else(|| Error::Domain(format!("state {state} is not absorbing")))
}

fn transient_row<T: Scalar>(a: &absorbing::AbsorbingAnalysis<T>, state: usize) -> Result<usize> {
    a.decomposition
        .transient
        .iter()
        .position(|&s| s == state)
        .ok_or_else(|| Error::Domain(format!("state {state} is not transient")))
}

fn chain_quantity<T: Scalar>(p: &StochasticMatrix<T>, quantity: &Quantity) -> Result<Value> {
    match quantity {
        Quantity::Fundamental => Ok(matrix_value(&absorbing::analyze(p)?.fundamental)),
        Quantity::Absorption { from, into } => {
            let a = absorbing::analyze(p)?;
            Ok(Value::Number(Num::of(&a.absorption[(transient_row(&a, *from)?, absorbing_column(&a, *into)?)])))
        }
        Quantity::AbsorptionTime { from } => {
            let a = absorbing::analyze(p)?;
            Ok(Value::Number(Num::of(&a.expected_times[transient_row(&a, *from)?])))
        }
        Quantity::AveragedAbsorption { nu, into } => {
            let a = absorbing::analyze(p)?;
            let col = absorbing_column(&a, *into)?;
            let values: Vec<T> = (0..a.decomposition.n_transient()).map(|i| a.absorption[(i, col)].clone()).collect();
            // Starting in the target state counts as absorbed there.
            let nu: Vec<T> = parse_nu(nu)?;
            let direct = nu.get(*into).cloned().unwrap_or_else(T::zero);
            Ok(Value::Number(Num::of(&(absorbing::averaged(&a.decomposition, &values, &nu)? + direct))))
        }
        Quantity::AveragedTime { nu, offset } => {
            let a = absorbing::analyze(p)?;
            let nu: Vec<T> = parse_nu(nu)?;
            let mean = absorbing::averaged(&a.decomposition, &a.expected_times, &nu)?;
            Ok(Value::Number(Num::of(&(mean + T::from_ratio(*offset, 1)))))
        }
        Quantity::Stationary => Ok(nums(stationary::stationary_distribution(p)?.probs())),
        Quantity::RecurrenceTime { state } => {
            let pi = stationary::stationary_distribution(p)?;
            let times = stationary::mean_recurrence_times(&pi)?;
            times.get(*state).map(|t| Value::Number(Num::of(t))).ok_or(Error::DimensionMismatch { expected: p.n(), found: *state + 1 })
        }
        Quantity::Reversible => Ok(Value::Flag(stationary::reversible_vector(p)?.reversible)),
        Quantity::Regular => Ok(Value::Flag(classify(p, default_regular_cap(p.n())).regular)),
        Quantity::Kernel { .. } => Err(Error::Domain("transition kernels apply to jump processes".into())),
    }
}

fn generator_quantity<T: Scalar>(l: &Generator<T>, quantity: &Quantity) -> Result<Value> {
    match quantity {
        Quantity::Stationary => Ok(nums(stationary_jump(l)?.probs())),
        Quantity::Reversible => Ok(Value::Flag(detailed_balance_jump(l)?.reversible)),
        Quantity::Kernel { t, from, to } => {
            let p = transition_kernel(l, *t, DEFAULT_KERNEL_TOLERANCE)?;
            Ok(Value::Number(Num::Float(*p.get(*from, *to))))
        }
        other => Err(Error::Domain(format!("{other} is defined for discrete chains"))),
    }
}

fn agrees(expected: &Value, computed: &Value, tol: f64) -> bool {
    let close = |a: &Num, b: &Num| match (a, b) {
        (Num::Exact(x), Num::Exact(y)) if tol == 0.0 => x == y,
        _ => (a.to_f64() - b.to_f64()).abs() <= tol,
    };
    match (expected, computed) {
        (Value::Number(a), Value::Number(b)) => close(a, b),
        (Value::Vector(a), Value::Vector(b)) => a.len() == b.len() && a.iter().zip(b).all(|(x, y)| close(x, y)),
        (Value::Matrix(a), Value::Matrix(b)) => {
            a.len() == b.len() && a.iter().zip(b).all(|(r, s)| r.len() == s.len() && r.iter().zip(s).all(|(x, y)| close(x, y)))
        }
        (Value::Flag(a), Value::Flag(b)) => a == b,
        _ => false,
    }
}

/// Recomputes every oracle of the model with the library's operations.
pub fn verify_model(model: &NamedModel) -> VerifyReport {
    let checks: Vec<OracleCheck> = model
        .oracles
        .iter()
        .map(|o| {
            let computed = match &model.payload {
                Payload::Chain(p) => chain_quantity(p, &o.quantity),
                Payload::FloatChain(p) => chain_quantity(p, &o.quantity),
                Payload::Generator(l) => generator_quantity(l, &o.quantity),
                Payload::FloatGenerator(l) => generator_quantity(l, &o.quantity),
            };
            let (computed, error) = match computed {
                Ok(v) => (Some(v), None),
                Err(e) => (None, Some(e.to_string())),
            };
            let pass = computed.as_ref().is_some_and(|c| agrees(&o.expected, c, o.tolerance));
            OracleCheck {
                quantity: o.quantity.clone(),
                expected: o.expected.clone(),
                computed,
                error,
                tolerance: o.tolerance,
                source: o.source.clone(),
                pass,
            }
        })
        .collect();
    let pass = checks.iter().all(|c| c.pass);
    VerifyReport { name: model.name.to_string(), checks, pass }
}

pub fn verify(name: &str) -> Result<VerifyReport> {
    Ok(verify_model(&build(name)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_name() {
        assert_eq!(build("dragon").unwrap_err(), Error::UnknownModel("dragon".into()));
    }

    #[test]
    fn every_model_has_sourced_oracles() {
        for name in MODEL_NAMES {
            let m = build(name).unwrap();
            assert_eq!(m.name, *name);
            assert!(!m.oracles.is_empty(), "{name}");
            assert!(m.oracles.iter().all(|o| !o.source.is_empty()), "{name}");
        }
        assert_eq!(list().len(), MODEL_NAMES.len());
    }

    #[test]
    fn small_models_verify() {
        for name in ["mouse", "coin_game", "tennis", "bilbo", "mont_blanc", "weather", "jump_four_state", "two_state_jump", "pure_death"] {
            let r = verify(name).unwrap();
            assert!(r.pass, "{name}: {:#?}", r.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
        }
    }

    #[test]
    fn every_model_verifies() {
        for name in MODEL_NAMES {
            let r = verify(name).unwrap();
            assert!(r.pass, "{name}: {:#?}", r.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
        }
    }

    #[test]
    fn a_wrong_oracle_fails() {
        let mut m = build("tennis").unwrap();
        m.oracles[1].expected = num(ex(2, 3));
        let r = verify_model(&m);
        assert!(!r.pass);
        assert!(!r.checks[1].pass && r.checks[0].pass);
    }

    #[test]
    fn bishop_stays_on_its_colour() {
        let m = build("bishop").unwrap();
        let Payload::Chain(p) = &m.payload else { panic!() };
        assert_eq!(p.n(), 32);
        assert_eq!(p.label(0), "a1");
    }
}
