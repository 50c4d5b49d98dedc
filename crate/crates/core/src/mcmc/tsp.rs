//! Travelling salesman by simulated annealing.

use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use super::{acceptance_probability, AcceptanceRule, AnnealSchedule, EnergyModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    d: Vec<Vec<f64>>,
}

impl DistanceMatrix {
    pub fn new(d: Vec<Vec<f64>>) -> Result<Self> {
        let n = d.len();
        if n < 3 {
            return Err(Error::BadDistanceMatrix(format!("need at least 3 cities, got {n}")));
        }
        for (i, row) in d.iter().enumerate() {
            if row.len() != n {
                return Err(Error::BadDistanceMatrix(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            if row[i] != 0.0 {
                return Err(Error::BadDistanceMatrix(format!("diagonal entry {i} is {}", row[i])));
            }
            for (j, &x) in row.iter().enumerate() {
                if !x.is_finite() || x < 0.0 {
                    return Err(Error::BadDistanceMatrix(format!("entry ({i}, {j}) is {x}")));
                }
                if x != d[j][i] {
                    return Err(Error::BadDistanceMatrix(format!("not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { d })
    }

    /// Euclidean distances between planar points.
    pub fn from_coords(coords: &[(f64, f64)]) -> Result<Self> {
        let d = coords
            .iter()
            .map(|a| coords.iter().map(|b| (a.0 - b.0).hypot(a.1 - b.1)).collect())
            .collect();
        Self::new(d)
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i][j]
    }

    /// Length of the closed circuit through `tour`.
    pub fn tour_length(&self, tour: &[usize]) -> f64 {
        (0..tour.len()).map(|k| self.d[tour[k]][tour[(k + 1) % tour.len()]]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MoveKind {
    /// Swap the cities at two positions.
    Transposition,
    /// Reverse the segment between two positions.
    TwoOpt,
}

impl FromStr for MoveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "transposition" | "swap" => Ok(Self::Transposition),
            "2opt" | "two-opt" | "twoopt" => Ok(Self::TwoOpt),
            other => Err(Error::Parse(format!("unknown move kind '{other}'"))),
        }
    }
}

/// Tours fixing city 0 in position 0; moves act on positions `1..n`.
#[derive(Debug, Clone)]
pub struct TspModel<'a> {
    pub distances: &'a DistanceMatrix,
    pub moves: MoveKind,
}

impl EnergyModel for TspModel<'_> {
    type State = Vec<usize>;
    type Move = (usize, usize);

    fn energy(&self, tour: &Vec<usize>) -> f64 {
        self.distances.tour_length(tour)
    }

    fn propose<R: Rng + ?Sized>(&self, tour: &Vec<usize>, rng: &mut R) -> Result<(usize, usize)> {
        let n = tour.len();
        // Uniform over pairs 1 <= i < j <= n-1.
        let i = rng.random_range(1..n);
        let mut j = rng.random_range(1..n - 1);
        if j >= i {
            j += 1;
        }
        Ok((i.min(j), i.max(j)))
    }

    fn delta_energy(&self, t: &Vec<usize>, (i, j): (usize, usize)) -> f64 {
        let n = t.len();
        let d = |a: usize, b: usize| self.distances.get(t[a % n], t[b % n]);
        match self.moves {
            MoveKind::Transposition => {
                let mut starts = [i - 1, i, j - 1, j];
                starts.sort_unstable();
                let mut before = 0.0;
                let mut after = 0.0;
                let swapped = |p: usize| if p == i { j } else if p == j { i } else { p };
                for (k, &p) in starts.iter().enumerate() {
                    if k > 0 && starts[k - 1] == p {
                        continue;
                    }
                    let q = (p + 1) % n;
                    before += d(p, q);
                    after += self.distances.get(t[swapped(p)], t[swapped(q)]);
                }
                after - before
            }
            MoveKind::TwoOpt => d(i - 1, j) + d(i, j + 1) - d(i - 1, i) - d(j, j + 1),
        }
    }

    fn apply(&self, t: &mut Vec<usize>, (i, j): (usize, usize)) {
        match self.moves {
            MoveKind::Transposition => t.swap(i, j),
            MoveKind::TwoOpt => t[i..=j].reverse(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnealResult {
    pub best_tour: Vec<usize>,
    pub best_length: f64,
    pub final_tour: Vec<usize>,
    pub final_length: f64,
    pub accepted: usize,
    pub steps: usize,
}

/// Metropolis with `β_n = β₀ Kⁿ`, starting from the identity tour. Returns
/// the best tour seen, which the schedule may have moved away from.
pub fn simulated_annealing_tsp<R: Rng + ?Sized>(
    distances: &DistanceMatrix,
    schedule: &AnnealSchedule,
    moves: MoveKind,
    rng: &mut R,
) -> Result<AnnealResult> {
    let model = TspModel { distances, moves };
    let mut tour: Vec<usize> = (0..distances.n()).collect();
    let mut length = distances.tour_length(&tour);
    let mut best_tour = tour.clone();
    let mut best_length = length;
    let mut accepted = 0;
    let mut beta = schedule.beta0;
    for _ in 0..schedule.steps {
        let mv = model.propose(&tour, rng)?;
        let dh = model.delta_energy(&tour, mv);
        let a = acceptance_probability(AcceptanceRule::Threshold, beta, dh);
        if a >= 1.0 || rng.random::<f64>() < a {
            model.apply(&mut tour, mv);
            length += dh;
            accepted += 1;
            if length < best_length - 1e-12 {
                // Recompute to keep accumulated rounding out of the record.
                length = distances.tour_length(&tour);
                best_length = length;
                best_tour.clone_from(&tour);
            }
        }
        beta *= schedule.k;
    }
    Ok(AnnealResult {
        best_tour,
        best_length,
        final_length: distances.tour_length(&tour),
        final_tour: tour,
        accepted,
        steps: schedule.steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::RngStream;

    fn square() -> DistanceMatrix {
        DistanceMatrix::from_coords(&[(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)]).unwrap()
    }

    #[test]
    fn validation() {
        assert!(DistanceMatrix::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).is_err());
        assert!(DistanceMatrix::new(vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.5, 1.0, 0.0]]).is_err());
        assert!(DistanceMatrix::new(vec![vec![1.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]]).is_err());
    }

    #[test]
    fn local_deltas_match_full_recomputation() {
        let mut rng = RngStream::new(8, 0);
        let coords: Vec<(f64, f64)> = (0..9).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect();
        let dm = DistanceMatrix::from_coords(&coords).unwrap();
        for moves in [MoveKind::Transposition, MoveKind::TwoOpt] {
            let model = TspModel { distances: &dm, moves };
            let mut tour: Vec<usize> = (0..9).collect();
            for _ in 0..2000 {
                let mv = model.propose(&tour, &mut rng).unwrap();
                let mut after = tour.clone();
                model.apply(&mut after, mv);
                let expected = dm.tour_length(&after) - dm.tour_length(&tour);
                assert!((model.delta_energy(&tour, mv) - expected).abs() < 1e-12, "{moves:?} {mv:?}");
                assert_eq!(after[0], 0);
                tour = after;
            }
        }
    }

    #[test]
    fn unit_square_optimum() {
        let dm = square();
        let schedule = AnnealSchedule::new(0.1, 1.001, 100_000).unwrap();
        let hits = (0..100)
            .filter(|&seed| {
                let r = simulated_annealing_tsp(&dm, &schedule, MoveKind::Transposition, &mut RngStream::new(seed, 0))
                    .unwrap();
                (r.best_length - 4.0).abs() < 1e-9
            })
            .count();
        assert!(hits >= 95);
    }

    #[test]
    fn three_cities_have_one_cycle() {
        let dm = DistanceMatrix::from_coords(&[(0.0, 0.0), (3.0, 0.0), (0.0, 4.0)]).unwrap();
        let schedule = AnnealSchedule::new(0.1, 1.01, 100).unwrap();
        let r = simulated_annealing_tsp(&dm, &schedule, MoveKind::TwoOpt, &mut RngStream::new(1, 0)).unwrap();
        assert!((r.best_length - 12.0).abs() < 1e-12);
    }
}
