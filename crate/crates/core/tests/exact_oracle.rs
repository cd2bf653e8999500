use interplay_core::exact::{decompose, interaction_exact, pairwise_interaction, shapley_values, ExactConfig};
use interplay_core::{AndGame, Coalition, Error, FnGame, GameSpec, TableGame};
use proptest::prelude::*;

fn brute_interaction(values: &[f64], n: usize, i: usize, j: usize, m: usize) -> f64 {
    let (bi, bj) = (1usize << i, 1usize << j);
    let contexts: Vec<usize> = (0..1usize << n).filter(|s| s & (bi | bj) == 0 && s.count_ones() as usize == m).collect();
    contexts.iter().map(|&s| values[s | bi | bj] - values[s | bi] - values[s | bj] + values[s]).sum::<f64>()
        / contexts.len() as f64
}

/// Average marginal contribution over all n! orderings.
fn brute_shapley(values: &[f64], n: usize) -> Vec<f64> {
    fn orderings(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for p in 0..n {
            if !prefix.contains(&p) {
                prefix.push(p);
                orderings(prefix, n, out);
                prefix.pop();
            }
        }
    }
    let mut all = Vec::new();
    orderings(&mut Vec::new(), n, &mut all);
    let mut phi = vec![0.0; n];
    for order in &all {
        let mut s = 0usize;
        for &p in order {
            phi[p] += values[s | 1 << p] - values[s];
            s |= 1 << p;
        }
    }
    phi.iter().map(|v| v / all.len() as f64).collect()
}

fn table(values: &[f64]) -> TableGame {
    let n = values.len().trailing_zeros() as usize;
    TableGame::new(GameSpec::new(n).unwrap(), values.to_vec()).unwrap()
}

fn game_values(max_n: usize) -> impl Strategy<Value = Vec<f64>> {
    (2..=max_n).prop_flat_map(|n| prop::collection::vec(-10.0f64..10.0, 1 << n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn interactions_match_brute_force(values in game_values(7)) {
        let n = values.len().trailing_zeros() as usize;
        let game = table(&values);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                for m in 0..=n - 2 {
                    let got = interaction_exact(&game, i, j, m, &ExactConfig::default()).unwrap();
                    prop_assert!((got - brute_interaction(&values, n, i, j, m)).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn shapley_matches_orderings(values in game_values(6)) {
        let n = values.len().trailing_zeros() as usize;
        let got = shapley_values(&table(&values), &ExactConfig::default()).unwrap();
        for (a, b) in got.iter().zip(brute_shapley(&values, n)) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        let total: f64 = got.iter().sum();
        prop_assert!((total - (values[values.len() - 1] - values[0])).abs() < 1e-9);
    }

    #[test]
    fn decomposition_closes(values in game_values(7)) {
        let report = decompose(&table(&values), &ExactConfig::default()).unwrap();
        prop_assert!(report.within_tolerance(1e-9), "residual {}", report.residual);
    }
}

#[test]
fn and_game_interacts_at_every_order() {
    let game = AndGame::new(7, 2, 4).unwrap();
    for m in 0..=5 {
        assert_eq!(interaction_exact(&game, 2, 4, m, &ExactConfig::default()).unwrap(), 1.0);
        assert_eq!(interaction_exact(&game, 1, 4, m, &ExactConfig::default()).unwrap(), 0.0);
    }
    let pair = pairwise_interaction(&game, 2, 4, &ExactConfig::default()).unwrap();
    assert!((pair - 1.0).abs() < 1e-12);
}

#[test]
fn enumeration_budget_is_enforced() {
    let game = FnGame::new(30, |s: Coalition| s.len() as f64).unwrap();
    let cfg = ExactConfig { enumeration_limit: 20, budget: 1000 };
    assert!(matches!(interaction_exact(&game, 0, 1, 14, &cfg), Err(Error::BudgetExceeded { .. })));
    // a cheap order of a large game is still fine
    assert_eq!(interaction_exact(&game, 0, 1, 1, &cfg).unwrap(), 0.0);
    assert!(matches!(shapley_values(&game, &cfg), Err(Error::TooManyPlayers { .. })));
}
