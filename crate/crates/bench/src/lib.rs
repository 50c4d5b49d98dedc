//! Fixtures shared by the benchmarks.

use rand::Rng;
use stochastik::jump::Generator;
use stochastik::{Rational, RngStream, Scalar, StochasticMatrix};

/// Dense random chain with small-denominator rational entries.
pub fn random_exact_chain(n: usize, seed: u64) -> StochasticMatrix<Rational> {
    let mut rng = RngStream::new(seed, 0);
    let rows = (0..n)
        .map(|_| {
            let weights: Vec<i64> = (0..n).map(|_| rng.random_range(1..10)).collect();
            let total: i64 = weights.iter().sum();
            weights.iter().map(|&w| Rational::from_ratio(w, total)).collect()
        })
        .collect();
    StochasticMatrix::new(rows).expect("rows sum to one")
}

/// Birth-death generator on `n` states.
pub fn ladder_generator(n: usize, birth: f64, death: f64) -> Generator<f64> {
    let mut rates = Vec::new();
    for i in 0..n - 1 {
        rates.push((i, i + 1, birth));
        rates.push((i + 1, i, death));
    }
    Generator::from_rates(n, &rates).expect("valid rates")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_valid() {
        assert_eq!(random_exact_chain(5, 1).n(), 5);
        assert_eq!(ladder_generator(4, 1.0, 2.0).n(), 4);
    }
}
