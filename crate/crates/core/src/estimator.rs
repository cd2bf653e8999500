//! Monte Carlo estimation of multi-order interactions.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::binomial_exact;
use crate::error::{Error, Result};
use crate::exact::{context_deltas, interaction_exact, tree_sum, ExactConfig};
use crate::game::{check_context, Game};
use crate::rng::{hash_str, CounterRng};

const PAIR_STREAM: u64 = 0x7061_6972; // "pair"

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SampleConfig {
    pub seed: u64,
    /// Contexts drawn per (input, pair, order) cell.
    pub subsets_per_order: usize,
    /// Unordered pairs sampled per input.
    pub pairs_per_input: usize,
    /// Orders as fractions `m / n`, floored to integers.
    pub order_grid: Vec<f64>,
    /// Enumerate instead of sampling when `C(n-2, m) <= subsets_per_order`.
    pub exhaustive: bool,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            subsets_per_order: 256,
            pairs_per_input: 32,
            order_grid: default_order_grid(),
            exhaustive: true,
        }
    }
}

/// `{0, 0.05, .., 0.95}`.
pub fn default_order_grid() -> Vec<f64> {
    (0..20).map(|k| k as f64 / 20.0).collect()
}

/// `⌊x · n⌋`, tolerant of representation error such as `0.3 * 10 = 3.0000000000000004`
/// or `0.29 * 100 = 28.999999999999996`.
pub fn floor_order(x: f64, n: usize) -> usize {
    (x * n as f64 + 1e-9).floor().max(0.0) as usize
}

impl SampleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.subsets_per_order == 0 || self.pairs_per_input == 0 {
            return Err(Error::InvalidConfig("sample counts must be at least 1".into()));
        }
        if self.order_grid.is_empty() {
            return Err(Error::InvalidConfig("order grid is empty".into()));
        }
        if let Some(bad) = self.order_grid.iter().find(|g| !(0.0..=1.0).contains(*g)) {
            return Err(Error::InvalidConfig(format!("order grid value {bad} outside [0, 1]")));
        }
        Ok(())
    }

    /// Integer orders for `n` players: floored, clamped to `n - 2`, sorted, deduplicated.
    pub fn orders(&self, n: usize) -> Result<Vec<usize>> {
        self.validate()?;
        let mut out: Vec<usize> = self.order_grid.iter().map(|&g| floor_order(g, n).min(n - 2)).collect();
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionEstimate {
    pub i: usize,
    pub j: usize,
    pub m: usize,
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
    /// True when the contexts were enumerated rather than sampled.
    pub exhaustive: bool,
}

/// Estimates `I^(m)(i, j)` for a game that is not tied to a named input.
pub fn estimate_interaction<G: Game + ?Sized>(game: &G, i: usize, j: usize, m: usize, cfg: &SampleConfig) -> Result<InteractionEstimate> {
    estimate_interaction_keyed(game, 0, i, j, m, cfg)
}

/// As [`estimate_interaction`], with an explicit input key mixed into the random stream.
pub fn estimate_interaction_keyed<G: Game + ?Sized>(
    game: &G,
    input_key: u64,
    i: usize,
    j: usize,
    m: usize,
    cfg: &SampleConfig,
) -> Result<InteractionEstimate> {
    check_context(game, i, j)?;
    let n = game.n();
    if m > n - 2 {
        return Err(Error::OrderOutOfRange { m, max: n - 2 });
    }
    if cfg.subsets_per_order == 0 {
        return Err(Error::InvalidConfig("subsets_per_order must be at least 1".into()));
    }
    let population = binomial_exact((n - 2) as u64, m as u64).unwrap_or(u128::MAX);
    if cfg.exhaustive && population <= cfg.subsets_per_order as u128 {
        let budget = ExactConfig { budget: cfg.subsets_per_order as u64, ..ExactConfig::default() };
        let mean = interaction_exact(game, i, j, m, &budget)?;
        return Ok(InteractionEstimate { i, j, m, mean, std_error: 0.0, n_samples: population as usize, exhaustive: true });
    }

    let k = cfg.subsets_per_order;
    let codes = (0..k as u64).map(|draw| {
        CounterRng::from_parts(&[cfg.seed, input_key, i as u64, j as u64, m as u64, draw]).subset(n - 2, m)
    });
    let deltas = context_deltas(game, i, j, codes)?;

    // Welford: a constant sample gives exactly that constant back.
    let (mut mean, mut m2) = (0.0f64, 0.0f64);
    for (t, &d) in deltas.iter().enumerate() {
        let diff = d - mean;
        mean += diff / (t + 1) as f64;
        m2 += diff * (d - mean);
    }
    let std_error = if k > 1 { (m2.max(0.0) / (k - 1) as f64 / k as f64).sqrt() } else { 0.0 };
    Ok(InteractionEstimate { i, j, m, mean, std_error, n_samples: k, exhaustive: false })
}

/// A named collection of games sharing one player count: the sample set `Ω`.
pub struct InputSet<'a> {
    ids: Vec<String>,
    games: Vec<Box<dyn Game + 'a>>,
    n: usize,
}

impl<'a> InputSet<'a> {
    pub fn new(items: Vec<(String, Box<dyn Game + 'a>)>) -> Result<Self> {
        let Some(first) = items.first() else {
            return Err(Error::EmptyInputSet);
        };
        let n = first.1.n();
        let mut seen = HashSet::new();
        for (id, g) in &items {
            if !seen.insert(id.clone()) {
                return Err(Error::DuplicateInputId(id.clone()));
            }
            if g.n() != n {
                return Err(Error::ShapeMismatch { expected: n, found: g.n() });
            }
        }
        let (ids, games) = items.into_iter().unzip();
        Ok(Self { ids, games, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &(dyn Game + 'a))> {
        self.ids.iter().map(String::as_str).zip(self.games.iter().map(|g| g.as_ref()))
    }
}

/// Unordered pairs for one input: all of them when the budget allows, otherwise a
/// uniform sample without replacement (partial Fisher–Yates). Sorted.
pub fn sample_pairs(n: usize, count: usize, seed: u64, input_key: u64) -> Vec<(usize, usize)> {
    let mut all: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    if count >= all.len() {
        return all;
    }
    let mut rng = CounterRng::from_parts(&[seed, input_key, PAIR_STREAM]);
    for t in 0..count {
        let pick = t + rng.below((all.len() - t) as u64) as usize;
        all.swap(t, pick);
    }
    all.truncate(count);
    all.sort_unstable();
    all
}

/// Mean absolute interaction per order, averaged over pairs and then over inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderStrength {
    pub n: usize,
    pub orders: Vec<usize>,
    pub values: Vec<f64>,
}

/// `E_x E_{i,j} |I^(m)(i, j | x)|` for every order on the configured grid.
///
/// Cells are evaluated in parallel on the current rayon pool; results are
/// reduced in a fixed order so the output does not depend on the thread count.
pub fn raw_order_strength(inputs: &InputSet<'_>, cfg: &SampleConfig) -> Result<OrderStrength> {
    if inputs.is_empty() {
        return Err(Error::EmptyInputSet);
    }
    let n = inputs.n();
    let orders = cfg.orders(n)?;

    struct Cell<'g> {
        input: usize,
        key: u64,
        game: &'g dyn Game,
        pair: (usize, usize),
        order_slot: usize,
    }
    let mut cells = Vec::new();
    let mut pairs_per_input = Vec::new();
    for (idx, (id, game)) in inputs.iter().enumerate() {
        let key = hash_str(id);
        let pairs = sample_pairs(n, cfg.pairs_per_input, cfg.seed, key);
        pairs_per_input.push(pairs.len());
        for &pair in &pairs {
            for order_slot in 0..orders.len() {
                cells.push(Cell { input: idx, key, game, pair, order_slot });
            }
        }
    }

    let magnitudes: Vec<f64> = cells
        .par_iter()
        .map(|c| {
            estimate_interaction_keyed(c.game, c.key, c.pair.0, c.pair.1, orders[c.order_slot], cfg).map(|e| e.mean.abs())
        })
        .collect::<Result<_>>()?;

    // magnitudes[input][pair][order], laid out in cell order
    let mut per_input: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); orders.len()]; inputs.len()];
    for (c, v) in cells.iter().zip(&magnitudes) {
        per_input[c.input][c.order_slot].push(*v);
    }
    let values = (0..orders.len())
        .map(|slot| {
            let means: Vec<f64> = per_input
                .iter()
                .zip(&pairs_per_input)
                .map(|(orders_of_input, &np)| tree_sum(&orders_of_input[slot]) / np as f64)
                .collect();
            tree_sum(&means) / means.len() as f64
        })
        .collect();
    Ok(OrderStrength { n, orders, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{AdditiveGame, AndGame};

    #[test]
    fn and_game_has_zero_error() {
        let g = AndGame::new(12, 3, 7).unwrap();
        let cfg = SampleConfig { subsets_per_order: 50, exhaustive: false, ..Default::default() };
        for m in [0, 4, 10] {
            let e = estimate_interaction(&g, 3, 7, m, &cfg).unwrap();
            assert_eq!(e.mean, 1.0);
            assert_eq!(e.std_error, 0.0);
            assert_eq!(e.n_samples, 50);
        }
    }

    #[test]
    fn exhaustive_switch_matches_exact() {
        let g = crate::game::FnGame::new(8, |s| (s.bits() as f64 * 0.37).sin()).unwrap();
        let cfg = SampleConfig { subsets_per_order: 20, ..Default::default() };
        let e = estimate_interaction(&g, 0, 1, 3, &cfg).unwrap();
        assert!(e.exhaustive);
        assert_eq!(e.n_samples, 20);
        assert_eq!(e.mean, interaction_exact(&g, 0, 1, 3, &ExactConfig::default()).unwrap());
    }

    #[test]
    fn order_out_of_range() {
        let g = AndGame::new(5, 0, 1).unwrap();
        assert_eq!(
            estimate_interaction(&g, 0, 1, 4, &SampleConfig::default()).unwrap_err(),
            Error::OrderOutOfRange { m: 4, max: 3 }
        );
    }

    #[test]
    fn grid_floors_clamps_and_merges() {
        let cfg = SampleConfig::default();
        assert_eq!(cfg.orders(10).unwrap(), (0..=8).collect::<Vec<_>>());
        let cfg = SampleConfig { order_grid: vec![0.1, 0.12, 0.3, 1.0], ..Default::default() };
        assert_eq!(cfg.orders(10).unwrap(), vec![1, 3, 8]);
        let bad = SampleConfig { order_grid: vec![1.5], ..Default::default() };
        assert!(bad.orders(10).is_err());
    }

    #[test]
    fn raw_strength_of_and_game_is_one_sixth() {
        let g: Box<dyn Game> = Box::new(AndGame::new(4, 0, 1).unwrap());
        let inputs = InputSet::new(vec![("x".into(), g)]).unwrap();
        let r = raw_order_strength(&inputs, &SampleConfig::default()).unwrap();
        assert_eq!(r.orders, vec![0, 1, 2]);
        for v in r.values {
            assert!((v - 1.0 / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn raw_strength_of_additive_is_zero() {
        let g: Box<dyn Game> = Box::new(AdditiveGame::new(vec![1.0, 2.0, 3.0, 4.0, 5.0], 1.0).unwrap());
        let inputs = InputSet::new(vec![("x".into(), g)]).unwrap();
        let r = raw_order_strength(&inputs, &SampleConfig::default()).unwrap();
        assert!(r.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn duplicated_input_gives_same_vector() {
        let make = || -> Box<dyn Game> {
            Box::new(crate::game::FnGame::new(9, |s| (s.bits() as f64).sqrt().cos()).unwrap())
        };
        // every pair and every context is covered, so the input key plays no role
        let cfg = SampleConfig { subsets_per_order: 35, pairs_per_input: 36, ..Default::default() };
        let one = InputSet::new(vec![("a".into(), make())]).unwrap();
        let two = InputSet::new(vec![("a".into(), make()), ("b".into(), make())]).unwrap();
        let r1 = raw_order_strength(&one, &cfg).unwrap();
        let r2 = raw_order_strength(&two, &cfg).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn input_set_validation() {
        assert!(matches!(InputSet::new(vec![]), Err(Error::EmptyInputSet)));
        let a: Box<dyn Game> = Box::new(AndGame::new(4, 0, 1).unwrap());
        let b: Box<dyn Game> = Box::new(AndGame::new(4, 0, 1).unwrap());
        assert!(matches!(InputSet::new(vec![("x".into(), a), ("x".into(), b)]), Err(Error::DuplicateInputId(_))));
    }

    #[test]
    fn pair_sampling_is_without_replacement() {
        let pairs = sample_pairs(10, 12, 3, 4);
        assert_eq!(pairs.len(), 12);
        let uniq: HashSet<_> = pairs.iter().collect();
        assert_eq!(uniq.len(), 12);
        assert!(pairs.iter().all(|&(i, j)| i < j && j < 10));
        assert_eq!(pairs, sample_pairs(10, 12, 3, 4));
        assert_eq!(sample_pairs(4, 100, 0, 0).len(), 6);
    }
}
