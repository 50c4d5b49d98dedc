use nalgebra::DMatrix;
use num_traits::{One, Zero};
use proptest::prelude::*;
use stochastik::absorbing;
use stochastik::chain::{classify, default_regular_cap, period, power_step, Distribution, StochasticMatrix};
use stochastik::stationary::{reversible_vector, spectral_gap, stationary_distribution};
use stochastik::{Rational, Scalar};

fn normalize(weights: &[Vec<u32>]) -> StochasticMatrix<Rational> {
    let rows = weights
        .iter()
        .map(|w| {
            let total: u32 = w.iter().sum();
            w.iter().map(|&x| Rational::from_ratio(x as i64, total as i64)).collect()
        })
        .collect();
    StochasticMatrix::new(rows).unwrap()
}

/// Integer weights with at least one positive entry per row.
fn weights(n: usize) -> impl Strategy<Value = Vec<Vec<u32>>> {
    prop::collection::vec((prop::collection::vec(0u32..4, n), 0..n), n).prop_map(|rows| {
        rows.into_iter()
            .map(|(mut w, k)| {
                if w.iter().all(|&x| x == 0) {
                    w[k] = 1;
                }
                w
            })
            .collect()
    })
}

fn chain() -> impl Strategy<Value = StochasticMatrix<Rational>> {
    (2usize..=5).prop_flat_map(weights).prop_map(|w| normalize(&w))
}

fn chain_pair() -> impl Strategy<Value = (StochasticMatrix<Rational>, StochasticMatrix<Rational>)> {
    (2usize..=5).prop_flat_map(|n| (weights(n), weights(n))).prop_map(|(a, b)| (normalize(&a), normalize(&b)))
}

fn chain_and_perm() -> impl Strategy<Value = (StochasticMatrix<Rational>, Vec<usize>)> {
    (2usize..=5)
        .prop_flat_map(|n| (weights(n), Just((0..n).collect::<Vec<_>>()).prop_shuffle()))
        .prop_map(|(w, perm)| (normalize(&w), perm))
}

/// Irreducible and aperiodic: every entry positive.
fn positive_chain() -> impl Strategy<Value = StochasticMatrix<Rational>> {
    (2usize..=5)
        .prop_flat_map(|n| prop::collection::vec(prop::collection::vec(1u32..6, n), n))
        .prop_map(|w| normalize(&w))
}

fn boolean_power_has_return(p: &StochasticMatrix<Rational>, i: usize, max_len: usize) -> Vec<usize> {
    let n = p.n();
    let step: Vec<Vec<bool>> = (0..n).map(|a| (0..n).map(|b| !p.get(a, b).is_zero()).collect()).collect();
    let mut reach = vec![false; n];
    reach[i] = true;
    let mut lengths = Vec::new();
    for k in 1..=max_len {
        let next: Vec<bool> = (0..n).map(|b| (0..n).any(|a| reach[a] && step[a][b])).collect();
        reach = next;
        if reach[i] {
            lengths.push(k);
        }
    }
    lengths
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn stationary_times_p(pi: &Distribution<Rational>, p: &StochasticMatrix<Rational>) -> Vec<Rational> {
    p.matrix().left_mul_vec(pi.probs()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn products_of_stochastic_matrices_are_stochastic((a, b) in chain_pair()) {
        let ab = a.product(&b).unwrap();
        for i in 0..ab.n() {
            let total = (0..ab.n()).fold(Rational::zero(), |s, j| s + ab.get(i, j).clone());
            prop_assert_eq!(total, Rational::one());
        }
    }

    #[test]
    fn power_steps_compose(p in chain(), m in 0u64..8, k in 0u64..8) {
        let nu = Distribution::uniform(p.n());
        let direct = power_step(&nu, &p, m + k).unwrap();
        let split = power_step(&power_step(&nu, &p, m).unwrap(), &p, k).unwrap();
        prop_assert_eq!(direct, split);
    }

    #[test]
    fn classification_is_invariant_under_relabeling((p, perm) in chain_and_perm()) {
        let cap = default_regular_cap(p.n());
        let base = classify(&p, cap);
        let moved = classify(&p.permuted(&perm).unwrap(), cap);
        prop_assert_eq!(base.irreducible, moved.irreducible);
        prop_assert_eq!(base.regular, moved.regular);
        prop_assert_eq!(base.absorbing_chain, moved.absorbing_chain);
        let mut mapped: Vec<Vec<usize>> = moved
            .classes
            .iter()
            .map(|c| {
                let mut v: Vec<usize> = c.iter().map(|&k| perm[k]).collect();
                v.sort_unstable();
                v
            })
            .collect();
        mapped.sort();
        let mut original = base.classes.clone();
        original.sort();
        prop_assert_eq!(mapped, original);
        for k in 0..p.n() {
            prop_assert_eq!(moved.periods[k], base.periods[perm[k]]);
        }
    }

    #[test]
    fn period_matches_return_lengths(p in chain()) {
        let n = p.n();
        for i in 0..n {
            let lengths = boolean_power_has_return(&p, i, 4 * n * n);
            let expected = lengths.iter().fold(0, |g, &k| gcd(g, k));
            match period(&p, i) {
                Ok(d) => prop_assert_eq!(d, expected),
                Err(_) => prop_assert!(lengths.is_empty()),
            }
        }
    }

    #[test]
    fn regular_witness_is_a_positive_power(p in chain()) {
        let c = classify(&p, default_regular_cap(p.n()));
        if let Some(k) = c.regular_witness {
            let pk = p.power(k).unwrap();
            for i in 0..p.n() {
                for j in 0..p.n() {
                    prop_assert!(!pk.get(i, j).is_zero());
                }
            }
            if k > 1 {
                let prev = p.power(k - 1).unwrap();
                prop_assert!((0..p.n()).any(|i| (0..p.n()).any(|j| prev.get(i, j).is_zero())));
            }
        }
    }

    #[test]
    fn stationary_vector_is_fixed(p in chain()) {
        if classify(&p, default_regular_cap(p.n())).irreducible {
            let pi = stationary_distribution(&p).unwrap();
            prop_assert_eq!(stationary_times_p(&pi, &p), pi.probs().to_vec());
            let float = stationary_distribution(&p.to_float()).unwrap();
            for (a, b) in pi.probs().iter().zip(float.probs()) {
                prop_assert!((a.to_f64() - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn regular_powers_converge_to_stationary_rows(p in positive_chain()) {
        let pi = stationary_distribution(&p.to_float()).unwrap();
        let big = p.to_float().power(200).unwrap();
        for i in 0..p.n() {
            for j in 0..p.n() {
                prop_assert!((big.get(i, j) - pi.probs()[j]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn reversibility_matches_time_reversal(p in positive_chain()) {
        let pi = stationary_distribution(&p).unwrap();
        let n = p.n();
        let pr = pi.probs();
        let reversed_equals = (0..n).all(|i| (0..n).all(|j| pr[j].clone() * p.get(j, i).clone() / pr[i].clone() == *p.get(i, j)));
        let cert = reversible_vector(&p).unwrap();
        prop_assert_eq!(cert.reversible, reversed_equals);
        if let Some(alpha) = cert.alpha {
            prop_assert_eq!(alpha, pr.to_vec());
        }
    }

    #[test]
    fn fundamental_matrix_is_the_visit_series(
        w in (1usize..=4).prop_flat_map(|t| prop::collection::vec((prop::collection::vec(0u32..4, t), 1u32..4, 0u32..3), t))
    ) {
        // Transient states 0..t, absorbing states t and t+1; every transient
        // row leaks into state t.
        let t = w.len();
        let n = t + 2;
        let mut rows = Vec::new();
        for (inner, leak, leak2) in &w {
            let mut row: Vec<u32> = inner.clone();
            row.push(*leak);
            row.push(*leak2);
            rows.push(row);
        }
        let mut a = vec![0; n];
        a[t] = 1;
        rows.push(a);
        let mut b = vec![0; n];
        b[t + 1] = 1;
        rows.push(b);
        let p = normalize(&rows);
        let analysis = absorbing::analyze(&p).unwrap();
        let q = analysis.decomposition.q.to_f64();
        let mut term = DMatrix::<f64>::identity(t, t);
        let qm = DMatrix::from_fn(t, t, |i, j| q[(i, j)]);
        let mut series = DMatrix::<f64>::zeros(t, t);
        for _ in 0..3000 {
            series += &term;
            term = &term * &qm;
        }
        let f = analysis.fundamental.to_f64();
        for i in 0..t {
            for j in 0..t {
                prop_assert!((f[(i, j)] - series[(i, j)]).abs() < 1e-9);
            }
        }
        for i in 0..t {
            let total = (0..analysis.absorption.cols()).fold(Rational::zero(), |s, j| s + analysis.absorption[(i, j)].clone());
            prop_assert_eq!(total, Rational::one());
        }
    }

    #[test]
    fn spectral_gap_matches_symmetrized_eigenvalues(
        w in (2usize..=5).prop_flat_map(|n| prop::collection::vec(1u32..6, n * (n + 1) / 2).prop_map(move |v| (n, v)))
    ) {
        let (n, v) = w;
        let mut sym = vec![vec![0u32; n]; n];
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                sym[i][j] = v[k];
                sym[j][i] = v[k];
                k += 1;
            }
        }
        // Extra diagonal weight keeps the spectrum away from -1.
        for (i, row) in sym.iter_mut().enumerate() {
            row[i] += row.iter().sum::<u32>();
        }
        let p = normalize(&sym).to_float();
        let pi = stationary_distribution(&p).unwrap();
        let gap = spectral_gap(&p, &pi).unwrap();
        let s = DMatrix::from_fn(n, n, |i, j| pi.probs()[i].sqrt() * p.get(i, j) / pi.probs()[j].sqrt());
        let mut eig: Vec<f64> = s.symmetric_eigen().eigenvalues.iter().map(|x| x.abs()).collect();
        eig.sort_by(|a, b| b.total_cmp(a));
        prop_assert!((eig[0] - 1.0).abs() < 1e-9);
        prop_assert!((gap.lambda0 - eig[1]).abs() < 1e-6, "power iteration {} vs eigen {}", gap.lambda0, eig[1]);
    }
}
