//! Synthetic games built from marginal-reward tables, and the checks that model
//! augmentation mechanisms on them.
//!
//! A [`RewardTable`] assigns `R^T(i, j)` to every context `T ⊆ N \ {i, j}` up to
//! a maximum size. The generated game satisfies
//! `Δv(i, j, S) = Σ_{T ⊆ S} R^T(i, j)`, so that
//! `I^(k)(i, j) = Σ_{q ≤ k} C(k, q) · E_{|T| = q} R^T(i, j)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::coalition::{check_pair, full_mask, Coalition, GameSpec};
use crate::combinatorics::{binomial, binomial_exact, deposit_bits, extract_bits, FixedWeight};
use crate::error::{Error, Result};
use crate::exact::interaction_orders;
use crate::game::{Game, SumGame, TableGame};
use crate::strength::{normalize_strength, StrengthProfile};

/// Largest player count a reward table may describe (dense context storage).
pub const MAX_REWARD_PLAYERS: usize = 22;

#[derive(Debug, Clone, PartialEq)]
pub struct RewardTable {
    n: usize,
    pair: (usize, usize),
    max_order: usize,
    /// Keyed by the context's bits in the full player space.
    rewards: BTreeMap<u64, f64>,
}

impl RewardTable {
    pub fn new(n: usize, pair: (usize, usize), max_order: usize, rewards: BTreeMap<u64, f64>) -> Result<Self> {
        if !(2..=MAX_REWARD_PLAYERS).contains(&n) {
            return Err(Error::InvalidTable(format!("n must be in 2..={MAX_REWARD_PLAYERS}, got {n}")));
        }
        check_pair(n, pair.0, pair.1)?;
        if max_order > n - 2 {
            return Err(Error::InvalidTable(format!("max_order {max_order} exceeds n - 2 = {}", n - 2)));
        }
        let pair_bits = (1u64 << pair.0) | (1u64 << pair.1);
        for (&t, &r) in &rewards {
            if t & pair_bits != 0 {
                return Err(Error::InvalidTable(format!("context {t:#b} contains a pair player")));
            }
            if t & !full_mask(n) != 0 {
                return Err(Error::InvalidTable(format!("context {t:#b} exceeds n = {n}")));
            }
            if t.count_ones() as usize > max_order {
                return Err(Error::InvalidTable(format!("context {t:#b} is larger than max_order {max_order}")));
            }
            if !r.is_finite() {
                return Err(Error::InvalidTable(format!("reward for {t:#b} is not finite")));
            }
        }
        let expected: u128 = (0..=max_order).map(|q| binomial_exact((n - 2) as u64, q as u64).unwrap()).sum();
        if rewards.len() as u128 != expected {
            return Err(Error::IncompleteTable(format!(
                "{} of {expected} contexts with |T| <= {max_order} have rewards",
                rewards.len()
            )));
        }
        Ok(Self { n, pair, max_order, rewards })
    }

    /// Fills every context `|T| <= max_order` from `f`, in ascending size then bit order.
    pub fn from_fn(n: usize, pair: (usize, usize), max_order: usize, mut f: impl FnMut(Coalition) -> f64) -> Result<Self> {
        if !(2..=MAX_REWARD_PLAYERS).contains(&n) {
            return Err(Error::InvalidTable(format!("n must be in 2..={MAX_REWARD_PLAYERS}, got {n}")));
        }
        check_pair(n, pair.0, pair.1)?;
        let rest = context_mask(n, pair);
        let mut rewards = BTreeMap::new();
        for q in 0..=max_order.min(n - 2) {
            for code in FixedWeight::new(n - 2, q) {
                let t = deposit_bits(code, rest);
                rewards.insert(t, f(Coalition::from_bits_unchecked(n, t)));
            }
        }
        Self::new(n, pair, max_order, rewards)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pair(&self) -> (usize, usize) {
        self.pair
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn rewards(&self) -> &BTreeMap<u64, f64> {
        &self.rewards
    }

    /// `R^T`; contexts larger than `max_order` carry no reward.
    pub fn reward(&self, t: Coalition) -> f64 {
        self.rewards.get(&t.bits()).copied().unwrap_or(0.0)
    }

    /// `E_{|T| = q} R^T` over all `C(n-2, q)` contexts of size `q`.
    pub fn size_mean(&self, q: usize) -> f64 {
        if q > self.max_order {
            return 0.0;
        }
        let sum: f64 = self.rewards.iter().filter(|(t, _)| t.count_ones() as usize == q).map(|(_, r)| r).sum();
        sum / binomial(self.n - 2, q)
    }

    /// `Σ_{q ≤ k} C(k, q) E_{|T| = q} R^T`: the interaction of order `k` implied by the table.
    pub fn reward_sum(&self, k: usize) -> Result<f64> {
        if k > self.n - 2 {
            return Err(Error::OrderOutOfRange { m: k, max: self.n - 2 });
        }
        Ok((0..=k).map(|q| binomial(k, q) * self.size_mean(q)).sum())
    }

    fn map_rewards(&self, f: impl Fn(u64, f64) -> f64) -> Self {
        Self { rewards: self.rewards.iter().map(|(&t, &r)| (t, f(t, r))).collect(), ..self.clone() }
    }
}

fn context_mask(n: usize, pair: (usize, usize)) -> u64 {
    full_mask(n) & !(1 << pair.0) & !(1 << pair.1)
}

/// Game generated by a reward table. `v(S) = Σ_{T ⊆ S \ {i,j}} R^T` when both pair
/// players are in `S`, else 0.
///
/// Every reward sits on the Harsanyi dividend of `T ∪ {i, j}`, so pairs other
/// than `(i, j)` also pick up interaction whenever rewards exist for nonempty `T`.
#[derive(Debug, Clone)]
pub struct RewardGame {
    spec: GameSpec,
    context: u64,
    /// Subset sums over compact context codes.
    cumulative: Vec<f64>,
}

pub fn game_from_rewards(table: &RewardTable) -> Result<RewardGame> {
    let (i, j) = table.pair;
    let width = table.n - 2;
    let context = context_mask(table.n, table.pair);
    let mut cumulative = vec![0.0; 1 << width];
    for (&t, &r) in &table.rewards {
        cumulative[extract_bits(t, context) as usize] = r;
    }
    for bit in 0..width {
        for code in 0..cumulative.len() {
            if code >> bit & 1 == 1 {
                cumulative[code] += cumulative[code ^ (1 << bit)];
            }
        }
    }
    Ok(RewardGame { spec: GameSpec::new(table.n)?.with_pair(i, j)?, context, cumulative })
}

impl Game for RewardGame {
    fn spec(&self) -> &GameSpec {
        &self.spec
    }

    fn evaluate(&self, s: Coalition) -> Result<f64> {
        if s.n() != self.spec.n() {
            return Err(Error::ShapeMismatch { expected: self.spec.n(), found: s.n() });
        }
        let (i, j) = self.spec.pair().expect("reward game has a pair");
        if !(s.contains(i) && s.contains(j)) {
            return Ok(0.0);
        }
        Ok(self.cumulative[extract_bits(s.bits(), self.context) as usize])
    }
}

/// Dropout-style compression of order `k` when only `r` of the `k` context
/// players survive: `reward_sum(r) / reward_sum(k)`.
pub fn cutout_ratio(table: &RewardTable, k: usize, r: usize) -> Result<f64> {
    if r > k {
        return Err(Error::InvalidConfig(format!("retained count {r} exceeds order {k}")));
    }
    let denominator = table.reward_sum(k)?;
    if denominator == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(table.reward_sum(r)? / denominator)
}

/// Expected cutout ratio when the retained count is `r ~ Binomial(k, p)`.
pub fn expected_cutout_ratio(table: &RewardTable, k: usize, p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidConfig(format!("retention probability {p} must lie in (0, 1]")));
    }
    let mut total = 0.0;
    for r in 0..=k {
        let weight = binomial(k, r) * p.powi(r as i32) * (1.0 - p).powi((k - r) as i32);
        total += weight * cutout_ratio(table, k, r)?;
    }
    Ok(total)
}

/// Game-level mixing: `w(S) = u(S) + v(S)`.
pub fn mix_games<U: Game, V: Game>(u: U, v: V) -> Result<SumGame<U, V>> {
    SumGame::new(u, v)
}

/// Scales every reward with `|T| <= threshold` by `factor`.
pub fn suppress_low_order(table: &RewardTable, threshold: usize, factor: f64) -> Result<RewardTable> {
    if !(0.0..1.0).contains(&factor) {
        return Err(Error::InvalidFactor(factor));
    }
    Ok(table.map_rewards(|t, r| if t.count_ones() as usize <= threshold { r * factor } else { r }))
}

/// Orders counted as mid-order for `n` players: `0.3 n < m < 0.5 n`.
pub fn mid_order_band(n: usize) -> Vec<usize> {
    (0..=n - 2).filter(|&m| 0.3 * n as f64 <= m as f64 - 1e-12 && (m as f64) < 0.5 * n as f64 - 1e-12).collect()
}

/// Relative strength profile of the table's distinguished pair over all orders `0..=n-2`,
/// computed by exact enumeration of the generated game.
pub fn pair_strength_profile(table: &RewardTable, model_id: &str) -> Result<StrengthProfile> {
    let game = game_from_rewards(table)?;
    let tab = TableGame::tabulate(&game, MAX_REWARD_PLAYERS)?;
    let (i, j) = table.pair;
    let raw: Vec<f64> = interaction_orders(&tab, i, j)?.into_iter().map(f64::abs).collect();
    normalize_strength(model_id, table.n, (0..=table.n - 2).collect(), &raw)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuppressionEffect {
    pub threshold: usize,
    pub factor: f64,
    pub low_orders: Vec<usize>,
    pub mid_orders: Vec<usize>,
    pub low_before: f64,
    pub low_after: f64,
    pub mid_before: f64,
    pub mid_after: f64,
}

impl SuppressionEffect {
    pub fn low_decreased(&self) -> bool {
        self.low_after < self.low_before
    }

    pub fn mid_increased(&self) -> bool {
        self.mid_after > self.mid_before
    }
}

/// J mass in the low band (`m <= threshold`) and the mid band, before and after suppression.
pub fn suppression_effect(table: &RewardTable, threshold: usize, factor: f64) -> Result<SuppressionEffect> {
    let after_table = suppress_low_order(table, threshold, factor)?;
    let before = pair_strength_profile(table, "before")?;
    let after = pair_strength_profile(&after_table, "after")?;
    let low_orders: Vec<usize> = (0..=threshold.min(table.n - 2)).collect();
    let mid_orders = mid_order_band(table.n);
    let mass = |p: &StrengthProfile, ms: &[usize]| ms.iter().map(|&m| p.j[m]).sum::<f64>();
    Ok(SuppressionEffect {
        threshold,
        factor,
        low_before: mass(&before, &low_orders),
        low_after: mass(&after, &low_orders),
        mid_before: mass(&before, &mid_orders),
        mid_after: mass(&after, &mid_orders),
        low_orders,
        mid_orders,
    })
}

/// Relabels context players by `perm` (which must fix the pair) and checks that every
/// `I^(k)(i, j)` is unchanged to within `1e-12` relative.
pub fn reward_shift_invariance_check(table: &RewardTable, perm: &[usize]) -> Result<bool> {
    let n = table.n;
    if perm.len() != n {
        return Err(Error::InvalidPermutation(format!("length {} for n = {n}", perm.len())));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidPermutation(format!("{perm:?} is not a permutation of 0..{n}")));
        }
    }
    let (i, j) = table.pair;
    if perm[i] != i || perm[j] != j {
        return Err(Error::InvalidPermutation("permutation must fix both pair players".into()));
    }
    let relabel = |t: u64| (0..n).filter(|&k| t >> k & 1 == 1).fold(0u64, |acc, k| acc | 1 << perm[k]);
    let permuted = RewardTable { rewards: table.rewards.iter().map(|(&t, &r)| (relabel(t), r)).collect(), ..table.clone() };

    let orders_of = |t: &RewardTable| -> Result<Vec<f64>> {
        let tab = TableGame::tabulate(&game_from_rewards(t)?, MAX_REWARD_PLAYERS)?;
        interaction_orders(&tab, i, j)
    };
    let before = orders_of(table)?;
    let after = orders_of(&permuted)?;
    Ok(before.iter().zip(&after).all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(1.0)))
}
