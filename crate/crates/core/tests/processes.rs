use proptest::prelude::*;
use rand::Rng;
use stochastik::distributions::{l1_binomial_poisson, pmf_binomial, pmf_binomial_f64, pmf_poisson, sample_gamma};
use stochastik::mcmc::{acceptance_probability, gibbs_measure, AcceptanceRule, FiniteModel};
use stochastik::poisson::{sample_poisson_process, superpose, thin};
use stochastik::random_walk::{
    origin_return_probability, position_probability_1d, recurrence_diagnostic, return_time_table, sample_return_time,
};
use stochastik::stats::{chi_square_gof, count_bins, ks_test, tail_binned};
use stochastik::{Rational, RngStream, Scalar};

#[test]
fn binomial_and_poisson_table_matches_five_decimals() {
    let binomial = [0.13520, 0.27067, 0.27081, 0.18053, 0.09022, 0.03605];
    let poisson = [0.13534, 0.27067, 0.27067, 0.18045, 0.09022, 0.03609];
    // Within one unit of the last printed digit: b(3) = 0.1805373 is printed
    // as 0.18053.
    for k in 0..6 {
        let b = pmf_binomial_f64(2000, 0.001, k as u64).unwrap();
        let p = pmf_poisson(2.0, k as u64).unwrap();
        assert!((b - binomial[k]).abs() < 1e-5, "b({k}) = {b}");
        assert!((p - poisson[k]).abs() < 1e-5, "pi({k}) = {p}");
    }
}

#[test]
fn binomial_poisson_distance_respects_the_bound() {
    let rep = l1_binomial_poisson(2000, 0.001).unwrap();
    assert!((rep.bound - 0.004).abs() < 1e-15);
    assert!(rep.within_bound, "distance {}", rep.distance);
}

proptest! {
    #[test]
    fn exact_and_float_binomial_agree((n, k) in (1u64..60).prop_flat_map(|n| (Just(n), 0..=n)), num in 0i64..=20) {
        let q = Rational::from_ratio(num, 20);
        let exact = pmf_binomial(n, &q, k).unwrap().to_f64();
        let float = pmf_binomial_f64(n, num as f64 / 20.0, k).unwrap();
        prop_assert!((exact - float).abs() < 1e-12);
    }

    #[test]
    fn walk_laws_sum_to_one(n in 0u64..40) {
        let total = (-(n as i64)..=n as i64).fold(Rational::from_ratio(0, 1), |s, k| s + position_probability_1d(n, k));
        prop_assert_eq!(total, Rational::from_ratio(1, 1));
    }
}

#[test]
fn return_time_table_and_cumulative_values() {
    let expected = [(1, 2), (1, 8), (1, 16), (5, 128), (7, 256), (21, 1024), (33, 2048)];
    let table = return_time_table(14);
    let mut cumulative = 0.0;
    let printed = [0.5, 0.625, 0.688, 0.727, 0.754];
    for (k, ((n, p), (a, b))) in table.iter().zip(expected).enumerate() {
        assert_eq!(*n, 2 * (k as u64 + 1));
        assert_eq!(*p, Rational::from_ratio(a, b));
        cumulative += p.to_f64();
        if k < printed.len() {
            assert!((cumulative - printed[k]).abs() < 5e-4, "n = {n}: {cumulative}");
        }
    }
}

#[test]
fn origin_returns_in_two_dimensions_are_squared_one_dimensional_returns() {
    for m in 1..12 {
        let one = origin_return_probability(m, 1).unwrap();
        assert_eq!(origin_return_probability(m, 2).unwrap(), one.clone() * one);
    }
}

#[test]
fn recurrence_exponents() {
    for (d, slope) in [(1, -0.5), (2, -1.0), (3, -1.5)] {
        let rep = recurrence_diagnostic(d, 400).unwrap();
        assert!((rep.fitted_exponent - slope).abs() < 0.1, "d = {d}: {}", rep.fitted_exponent);
    }
}

#[test]
fn simulated_return_times_follow_the_exact_law() {
    let mut rng = RngStream::new(3, 0);
    let trials = 100_000;
    let mut by_two = 0;
    let mut by_four = 0;
    for _ in 0..trials {
        match sample_return_time(4, &mut rng) {
            Some(2) => by_two += 1,
            Some(4) => by_four += 1,
            _ => {}
        }
    }
    for (count, p) in [(by_two, 0.5), (by_four, 0.125)] {
        let freq = count as f64 / trials as f64;
        assert!((freq - p).abs() < 4.0 * (p * (1.0 - p) / trials as f64).sqrt());
    }
}

#[test]
fn poisson_interarrivals_and_counts() {
    let mut rng = RngStream::new(7, 0);
    let lambda = 2.0;
    let s = sample_poisson_process(lambda, 50_000.0, &mut rng).unwrap();
    let ks = ks_test(&s.interarrivals(), |x| 1.0 - (-lambda * x).exp()).unwrap();
    assert!(ks.passes(1e-3), "KS p = {}", ks.p_value);
    let counts = count_bins((0..50_000).map(|k| s.count(k as f64, k as f64 + 1.0).unwrap() as u64), 8);
    let probs = tail_binned(|k| pmf_poisson(lambda, k).unwrap(), 8);
    let chi = chi_square_gof(&counts, &probs).unwrap();
    assert!(chi.passes(1e-3), "chi-square p = {}", chi.p_value);
}

#[test]
fn thinning_and_superposition_rates() {
    let mut rng = RngStream::new(8, 0);
    let horizon = 1e4;
    let a = sample_poisson_process(3.0, horizon, &mut rng).unwrap();
    let b = sample_poisson_process(1.5, horizon, &mut rng).unwrap();
    let thinned = thin(&a, 0.25, &mut rng).unwrap();
    let both = superpose(&a, &b).unwrap();
    assert!((thinned.len() as f64 / horizon - 0.75).abs() / 0.75 < 0.01 + 4.0 / (0.75 * horizon).sqrt() / 0.75);
    assert!((both.len() as f64 / horizon - 4.5).abs() / 4.5 < 0.01);
    assert_eq!(both.len(), a.len() + b.len());
    assert!(both.times.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn two_arrivals_in_an_hour_both_fall_in_the_first_twenty_minutes() {
    let mut rng = RngStream::new(9, 0);
    let mut conditioned = 0u64;
    let mut hits = 0u64;
    while conditioned < 100_000 {
        let s = sample_poisson_process(2.0, 1.0, &mut rng).unwrap();
        if s.len() == 2 {
            conditioned += 1;
            if s.times[1] <= 1.0 / 3.0 {
                hits += 1;
            }
        }
    }
    let p = hits as f64 / conditioned as f64;
    let se = (1.0 / 9.0 * 8.0 / 9.0 / conditioned as f64).sqrt();
    assert!((p - 1.0 / 9.0).abs() < 3.0 * se, "{p}");
}

#[test]
fn gamma_samples_have_the_erlang_law() {
    let mut rng = RngStream::new(10, 0);
    let xs: Vec<f64> = (0..20_000).map(|_| sample_gamma(2.0, 3, &mut rng).unwrap()).collect();
    let cdf = |x: f64| 1.0 - (-2.0 * x).exp() * (1.0 + 2.0 * x + 2.0 * x * x);
    assert!(ks_test(&xs, cdf).unwrap().passes(1e-3));
}

proptest! {
    #[test]
    fn metropolis_kernels_satisfy_detailed_balance(
        energies in prop::collection::vec(-3.0f64..3.0, 2..6),
        beta in 0.0f64..2.0,
        heat_bath in any::<bool>(),
    ) {
        let n = energies.len();
        let proposal = vec![vec![1.0 / n as f64; n]; n];
        let model = FiniteModel::new(energies.clone(), proposal).unwrap();
        let rule = if heat_bath { AcceptanceRule::HeatBath } else { AcceptanceRule::Threshold };
        let p = model.kernel(beta, rule).unwrap();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let ratio = p.get(i, j) / p.get(j, i);
                    let target = (-beta * (energies[j] - energies[i])).exp();
                    prop_assert!((ratio - target).abs() <= 1e-12 * target.max(1.0));
                }
            }
        }
        let mu = gibbs_measure(&energies, beta);
        let moved = p.matrix().left_mul_vec(&mu).unwrap();
        for (a, b) in moved.iter().zip(&mu) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn acceptance_rules_are_probabilities(beta in 0.0f64..50.0, dh in -20.0f64..20.0) {
        for rule in [AcceptanceRule::Threshold, AcceptanceRule::HeatBath] {
            let a = acceptance_probability(rule, beta, dh);
            prop_assert!((0.0..=1.0).contains(&a));
        }
    }
}

#[test]
fn finite_metropolis_chain_visits_states_by_gibbs_weight() {
    let energies = vec![0.0, 1.0, 0.5, 2.0];
    let model = FiniteModel::new(energies.clone(), vec![vec![0.25; 4]; 4]).unwrap();
    let beta = 0.8;
    let p = model.kernel(beta, AcceptanceRule::Threshold).unwrap();
    let mu = gibbs_measure(&energies, beta);
    let mut rng = RngStream::new(12, 0);
    let steps = 400_000;
    let mut visits = [0usize; 4];
    let mut x = 0;
    for _ in 0..steps {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut next = 3;
        for j in 0..4 {
            acc += p.get(x, j);
            if u < acc {
                next = j;
                break;
            }
        }
        x = next;
        visits[x] += 1;
    }
    for (v, m) in visits.iter().zip(&mu) {
        assert!((*v as f64 / steps as f64 - m).abs() < 0.01);
    }
}
