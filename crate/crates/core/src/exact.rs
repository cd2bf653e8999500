//! Exact, enumerative interaction quantities.
//!
//! Everything here walks full coalition sets, so cost is exponential in `n`.
//! These routines are the reference the Monte Carlo estimator is checked against.

use serde::{Deserialize, Serialize};

use crate::coalition::{full_mask, Coalition};
use crate::combinatorics::{binomial, binomial_exact, deposit_bits, FixedWeight, GrayCode};
use crate::error::{Error, Result};
use crate::game::{check_context, check_index, second_difference, Game, TableGame};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExactConfig {
    /// Largest `n` for which the whole power set may be enumerated.
    pub enumeration_limit: usize,
    /// Largest number of contexts `C(n-2, m)` a single order may enumerate.
    pub budget: u64,
}

impl Default for ExactConfig {
    fn default() -> Self {
        Self { enumeration_limit: 20, budget: 1 << 24 }
    }
}

/// `P_Shapley(S | N \ {i, j})` as a function of `|S|`.
///
/// For `n` players the weight of a context of size `s` is
/// `s! (n-2-s)! / (n-1)!`, i.e. `1 / ((n-1) C(n-2, s))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapleyKernel {
    weights: Vec<f64>,
}

impl ShapleyKernel {
    pub fn for_pair(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGame(format!("need n >= 2, got {n}")));
        }
        let weights = (0..=n - 2).map(|s| 1.0 / ((n - 1) as f64 * binomial(n - 2, s))).collect();
        Ok(Self { weights })
    }

    pub fn weight(&self, size: usize) -> f64 {
        self.weights[size]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ_s C(n-2, s) w(s)`; equals 1 up to rounding.
    pub fn total_mass(&self) -> f64 {
        let k = self.weights.len() - 1;
        self.weights.iter().enumerate().map(|(s, w)| binomial(k, s) * w).sum()
    }
}

/// Output of [`decompose`]: `v(N) = v(∅) + Σ μ_i + Σ_m order_terms[m] + residual`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub v_full: f64,
    pub v_empty: f64,
    pub mu: Vec<f64>,
    /// `Σ_{i≠j} w^(m) I^(m)(i, j)` over ordered pairs, indexed by `m`.
    pub order_terms: Vec<f64>,
    pub residual: f64,
}

impl DecompositionReport {
    pub fn within_tolerance(&self, rel: f64) -> bool {
        self.residual.abs() <= rel * self.v_full.abs().max(1.0)
    }
}

/// `w^(m) = (n - 1 - m) / (n (n - 1))`.
pub fn order_weight(n: usize, m: usize) -> f64 {
    (n - 1 - m) as f64 / (n * (n - 1)) as f64
}

/// Pairwise (tree) summation; stable result independent of how the slice was produced.
pub fn tree_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        len if len <= 8 => xs.iter().sum(),
        len => {
            let (l, r) = xs.split_at(len / 2);
            tree_sum(l) + tree_sum(r)
        }
    }
}

/// Shapley value of each player by full enumeration.
pub fn shapley_values<G: Game + ?Sized>(game: &G, cfg: &ExactConfig) -> Result<Vec<f64>> {
    let table = TableGame::tabulate(game, cfg.enumeration_limit)?;
    let n = table.n();
    let groups: Vec<u64> = (0..n).map(|k| 1u64 << k).collect();
    Ok((0..n).map(|i| grouped_shapley(&table, &groups, i)).collect())
}

pub fn shapley_value<G: Game + ?Sized>(game: &G, i: usize, cfg: &ExactConfig) -> Result<f64> {
    check_index(game, i)?;
    let table = TableGame::tabulate(game, cfg.enumeration_limit)?;
    let groups: Vec<u64> = (0..table.n()).map(|k| 1u64 << k).collect();
    Ok(grouped_shapley(&table, &groups, i))
}

/// Shapley value of `groups[target]` in the game whose players are the given
/// disjoint groups of original players. Original players in no group are always absent.
fn grouped_shapley(table: &TableGame, groups: &[u64], target: usize) -> f64 {
    let g = groups.len();
    let others: Vec<u64> = groups.iter().enumerate().filter(|&(k, _)| k != target).map(|(_, &m)| m).collect();
    let mine = groups[target];
    let mut terms = Vec::with_capacity(1 << others.len());
    // Gray-code walk: the coalition is updated by toggling one group per step.
    let mut bits = 0u64;
    let mut size = 0usize;
    for (code, flipped) in GrayCode::new(others.len()) {
        if let Some(t) = flipped {
            bits ^= others[t];
            if code >> t & 1 == 1 {
                size += 1;
            } else {
                size -= 1;
            }
        }
        let weight = 1.0 / (g as f64 * binomial(g - 1, size));
        terms.push(weight * (table.value_of_bits(bits | mine) - table.value_of_bits(bits)));
    }
    tree_sum(&terms)
}

/// Shapley interaction index: `I(i, j) = Σ_{S ⊆ N\{i,j}} P_Shapley(S) Δv(i, j, S)`.
pub fn pairwise_interaction<G: Game + ?Sized>(game: &G, i: usize, j: usize, cfg: &ExactConfig) -> Result<f64> {
    check_context(game, i, j)?;
    let table = TableGame::tabulate(game, cfg.enumeration_limit)?;
    let n = table.n();
    let kernel = ShapleyKernel::for_pair(n)?;
    let rest = full_mask(n) & !(1 << i) & !(1 << j);
    let (bi, bj) = (1u64 << i, 1u64 << j);
    let terms: Vec<f64> = GrayCode::new(n - 2)
        .map(|(code, _)| {
            let s = deposit_bits(code, rest);
            let d = second_difference(
                table.value_of_bits(s | bi | bj),
                table.value_of_bits(s | bi),
                table.value_of_bits(s | bj),
                table.value_of_bits(s),
            );
            kernel.weight(code.count_ones() as usize) * d
        })
        .collect();
    Ok(tree_sum(&terms))
}

/// The same index computed as `φ({i,j} | N') − φ(i | N\{j}) − φ(j | N\{i})`, where
/// `N'` fuses `i` and `j` into a single player. Used to cross-check
/// [`pairwise_interaction`].
pub fn pairwise_interaction_fused<G: Game + ?Sized>(game: &G, i: usize, j: usize, cfg: &ExactConfig) -> Result<f64> {
    check_context(game, i, j)?;
    let table = TableGame::tabulate(game, cfg.enumeration_limit)?;
    let n = table.n();
    let rest: Vec<u64> = (0..n).filter(|&k| k != i && k != j).map(|k| 1u64 << k).collect();

    let mut fused = vec![(1u64 << i) | (1u64 << j)];
    fused.extend(&rest);
    let mut without_j = vec![1u64 << i];
    without_j.extend(&rest);
    let mut without_i = vec![1u64 << j];
    without_i.extend(&rest);

    Ok(grouped_shapley(&table, &fused, 0) - (grouped_shapley(&table, &without_j, 0) + grouped_shapley(&table, &without_i, 0)))
}

/// `I^(m)(i, j)`: the mean of `Δv(i, j, S)` over all `S ⊆ N\{i,j}` with `|S| = m`.
pub fn interaction_exact<G: Game + ?Sized>(game: &G, i: usize, j: usize, m: usize, cfg: &ExactConfig) -> Result<f64> {
    check_context(game, i, j)?;
    let n = game.n();
    if m > n - 2 {
        return Err(Error::OrderOutOfRange { m, max: n - 2 });
    }
    let count = binomial_exact((n - 2) as u64, m as u64).unwrap_or(u128::MAX);
    if count > cfg.budget as u128 {
        return Err(Error::BudgetExceeded { needed: count, budget: cfg.budget });
    }
    let deltas = context_deltas(game, i, j, FixedWeight::new(n - 2, m))?;
    Ok(tree_sum(&deltas) / deltas.len() as f64)
}

/// `Δv(i, j, S)` for each compact context code (bit `t` = `t`-th player of `N\{i,j}`).
pub(crate) fn context_deltas<G, I>(game: &G, i: usize, j: usize, codes: I) -> Result<Vec<f64>>
where
    G: Game + ?Sized,
    I: IntoIterator<Item = u64>,
{
    const CHUNK: usize = 1024;
    let n = game.n();
    let rest = full_mask(n) & !(1 << i) & !(1 << j);
    let mut out = Vec::new();
    let mut batch = Vec::with_capacity(4 * CHUNK);
    let flush = |batch: &mut Vec<Coalition>, out: &mut Vec<f64>| -> Result<()> {
        let v = game.evaluate_batch(batch)?;
        if v.len() != batch.len() {
            return Err(Error::EvaluationFailed(format!("batch of {} returned {} scores", batch.len(), v.len())));
        }
        out.extend(v.chunks_exact(4).map(|q| second_difference(q[0], q[1], q[2], q[3])));
        batch.clear();
        Ok(())
    };
    for code in codes {
        let s = Coalition::from_bits_unchecked(n, deposit_bits(code, rest));
        batch.extend([s.with(i).with(j), s.with(i), s.with(j), s]);
        if batch.len() == 4 * CHUNK {
            flush(&mut batch, &mut out)?;
        }
    }
    if !batch.is_empty() {
        flush(&mut batch, &mut out)?;
    }
    Ok(out)
}

/// `I^(m)(i, j)` for every `m = 0..=n-2` from a tabulated game, in one pass.
pub fn interaction_orders(table: &TableGame, i: usize, j: usize) -> Result<Vec<f64>> {
    check_context(table, i, j)?;
    let n = table.n();
    let rest = full_mask(n) & !(1 << i) & !(1 << j);
    let (bi, bj) = (1u64 << i, 1u64 << j);
    let mut per_order: Vec<Vec<f64>> = vec![Vec::new(); n - 1];
    for code in 0..1u64 << (n - 2) {
        let s = deposit_bits(code, rest);
        let d = second_difference(
            table.value_of_bits(s | bi | bj),
            table.value_of_bits(s | bi),
            table.value_of_bits(s | bj),
            table.value_of_bits(s),
        );
        per_order[code.count_ones() as usize].push(d);
    }
    Ok(per_order.iter().map(|ds| tree_sum(ds) / ds.len() as f64).collect())
}

/// Decomposes `v(N)` into the empty score, singleton effects `μ_i = v({i}) − v(∅)`
/// and order-wise interaction terms `Σ_{i≠j} w^(m) I^(m)(i, j)`.
pub fn decompose<G: Game + ?Sized>(game: &G, cfg: &ExactConfig) -> Result<DecompositionReport> {
    let table = TableGame::tabulate(game, cfg.enumeration_limit)?;
    let n = table.n();
    let v_empty = table.value_of_bits(0);
    let v_full = table.value_of_bits(full_mask(n));
    let mu: Vec<f64> = (0..n).map(|k| table.value_of_bits(1 << k) - v_empty).collect();

    let mut per_order: Vec<Vec<f64>> = vec![Vec::new(); n - 1];
    for i in 0..n {
        for j in i + 1..n {
            for (m, value) in interaction_orders(&table, i, j)?.into_iter().enumerate() {
                // I^(m) is symmetric, so the (i, j) and (j, i) terms coincide
                per_order[m].push(2.0 * order_weight(n, m) * value);
            }
        }
    }
    let order_terms: Vec<f64> = per_order.iter().map(|t| tree_sum(t)).collect();
    let reconstructed = v_empty + tree_sum(&mu) + tree_sum(&order_terms);
    Ok(DecompositionReport { v_full, v_empty, mu, order_terms, residual: v_full - reconstructed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coalition::GameSpec;
    use crate::game::{AdditiveGame, AndGame};

    fn cfg() -> ExactConfig {
        ExactConfig::default()
    }

    fn pseudo_random_table(n: usize, salt: u64) -> TableGame {
        let values = (0..1u64 << n)
            .map(|b| {
                let mut z = b.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ salt;
                z = (z ^ (z >> 31)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
                (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
            })
            .collect();
        TableGame::new(GameSpec::new(n).unwrap(), values).unwrap()
    }

    #[test]
    fn kernel_is_normalized() {
        for n in 2..=40 {
            let k = ShapleyKernel::for_pair(n).unwrap();
            assert!((k.total_mass() - 1.0).abs() <= 1e-12, "n = {n}");
            assert!(k.weights().iter().all(|&w| w >= 0.0));
        }
    }

    #[test]
    fn shapley_of_additive_is_weights() {
        let w = vec![0.5, -2.0, 3.25, 1.0];
        let g = AdditiveGame::new(w.clone(), 7.0).unwrap();
        let phi = shapley_values(&g, &cfg()).unwrap();
        for (a, b) in phi.iter().zip(&w) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn shapley_of_two_player_and() {
        let g = AndGame::new(2, 0, 1).unwrap();
        assert_eq!(shapley_values(&g, &cfg()).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn shapley_efficiency() {
        let g = pseudo_random_table(7, 3);
        let phi = shapley_values(&g, &cfg()).unwrap();
        let total: f64 = phi.iter().sum();
        let expected = g.value_of_bits(127) - g.value_of_bits(0);
        assert!((total - expected).abs() < 1e-12);
    }

    #[test]
    fn pairwise_trivial_games() {
        let and = AndGame::new(5, 1, 4).unwrap();
        assert!((pairwise_interaction(&and, 1, 4, &cfg()).unwrap() - 1.0).abs() < 1e-12);
        let add = AdditiveGame::new(vec![1.0, 2.0, 3.0, 4.0], 0.0).unwrap();
        assert_eq!(pairwise_interaction(&add, 0, 3, &cfg()).unwrap(), 0.0);
    }

    #[test]
    fn two_pairwise_forms_agree() {
        let g = pseudo_random_table(6, 99);
        for i in 0..6 {
            for j in 0..6 {
                if i == j {
                    continue;
                }
                let a = pairwise_interaction(&g, i, j, &cfg()).unwrap();
                let b = pairwise_interaction_fused(&g, i, j, &cfg()).unwrap();
                assert!((a - b).abs() <= 1e-9, "({i},{j}) {a} vs {b}");
            }
        }
    }

    #[test]
    fn interaction_exact_trivial_games() {
        let and = AndGame::new(7, 2, 5).unwrap();
        let add = AdditiveGame::new(vec![1.0; 7], 0.0).unwrap();
        for m in 0..=5 {
            assert_eq!(interaction_exact(&and, 2, 5, m, &cfg()).unwrap(), 1.0);
            assert_eq!(interaction_exact(&add, 2, 5, m, &cfg()).unwrap(), 0.0);
        }
    }

    #[test]
    fn interaction_exact_errors() {
        let and = AndGame::new(5, 0, 1).unwrap();
        assert_eq!(interaction_exact(&and, 0, 1, 4, &cfg()), Err(Error::OrderOutOfRange { m: 4, max: 3 }));
        let tight = ExactConfig { budget: 2, ..cfg() };
        assert!(matches!(interaction_exact(&and, 0, 1, 1, &tight), Err(Error::BudgetExceeded { needed: 3, .. })));
    }

    #[test]
    fn orders_pass_matches_per_order_routine() {
        let g = pseudo_random_table(8, 5);
        let all = interaction_orders(&g, 1, 5).unwrap();
        for (m, v) in all.iter().enumerate() {
            let direct = interaction_exact(&g, 1, 5, m, &cfg()).unwrap();
            assert!((v - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn decompose_additive_and_and() {
        let add = AdditiveGame::new(vec![1.5, -0.5, 2.0], 0.25).unwrap();
        let r = decompose(&add, &cfg()).unwrap();
        assert!(r.order_terms.iter().all(|&t| t == 0.0));
        assert_eq!(r.residual, 0.0);

        let and = AndGame::new(4, 0, 2).unwrap();
        let r = decompose(&and, &cfg()).unwrap();
        assert!(r.residual.abs() <= 1e-9);
        assert!((r.order_terms.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn too_many_players_for_enumeration() {
        let add = AdditiveGame::new(vec![1.0; 21], 0.0).unwrap();
        assert!(matches!(decompose(&add, &cfg()), Err(Error::TooManyPlayers { .. })));
        assert!(matches!(shapley_value(&add, 0, &cfg()), Err(Error::TooManyPlayers { .. })));
    }
}
