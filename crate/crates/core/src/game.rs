//! The evaluation contract `v(S)` and a few built-in games.

use std::sync::Arc;

use crate::coalition::{check_pair, check_player, Coalition, GameSpec};
use crate::combinatorics::GrayCode;
use crate::error::{Error, Result};

/// A cooperative game: a deterministic score for every coalition of `spec().n()` players.
///
/// Implementations must be referentially transparent. `evaluate_batch` exists so
/// remote scorers can amortize round trips; the default just loops.
pub trait Game: Send + Sync {
    fn spec(&self) -> &GameSpec;

    fn evaluate(&self, s: Coalition) -> Result<f64>;

    fn evaluate_batch(&self, batch: &[Coalition]) -> Result<Vec<f64>> {
        batch.iter().map(|&s| self.evaluate(s)).collect()
    }

    fn n(&self) -> usize {
        self.spec().n()
    }
}

impl<G: Game + ?Sized> Game for &G {
    fn spec(&self) -> &GameSpec {
        (**self).spec()
    }
    fn evaluate(&self, s: Coalition) -> Result<f64> {
        (**self).evaluate(s)
    }
    fn evaluate_batch(&self, batch: &[Coalition]) -> Result<Vec<f64>> {
        (**self).evaluate_batch(batch)
    }
}

impl<G: Game + ?Sized> Game for Box<G> {
    fn spec(&self) -> &GameSpec {
        (**self).spec()
    }
    fn evaluate(&self, s: Coalition) -> Result<f64> {
        (**self).evaluate(s)
    }
    fn evaluate_batch(&self, batch: &[Coalition]) -> Result<Vec<f64>> {
        (**self).evaluate_batch(batch)
    }
}

impl<G: Game + ?Sized> Game for Arc<G> {
    fn spec(&self) -> &GameSpec {
        (**self).spec()
    }
    fn evaluate(&self, s: Coalition) -> Result<f64> {
        (**self).evaluate(s)
    }
    fn evaluate_batch(&self, batch: &[Coalition]) -> Result<Vec<f64>> {
        (**self).evaluate_batch(batch)
    }
}

fn check_coalition(spec: &GameSpec, s: Coalition) -> Result<()> {
    if s.n() != spec.n() {
        return Err(Error::ShapeMismatch { expected: spec.n(), found: s.n() });
    }
    Ok(())
}

/// `Δv(i, j, S) = v(S ∪ {i, j}) − v(S ∪ {i}) − v(S ∪ {j}) + v(S)`.
///
/// Issues exactly one batch of four coalitions. The sum is grouped as
/// `(v(S∪{i,j}) + v(S)) − (v(S∪{i}) + v(S∪{j}))` so swapping `i` and `j`
/// gives a bit-identical result.
pub fn delta_v<G: Game + ?Sized>(game: &G, i: usize, j: usize, s: Coalition) -> Result<f64> {
    let n = game.n();
    check_pair(n, i, j)?;
    check_coalition(game.spec(), s)?;
    for k in [i, j] {
        if s.contains(k) {
            return Err(Error::PlayerInCoalition(k));
        }
    }
    let v = game.evaluate_batch(&[s.with(i).with(j), s.with(i), s.with(j), s])?;
    Ok(second_difference(v[0], v[1], v[2], v[3]))
}

#[inline]
pub(crate) fn second_difference(both: f64, only_i: f64, only_j: f64, none: f64) -> f64 {
    (both + none) - (only_i + only_j)
}

/// Game stored as a dense table of all `2^n` values, indexed by coalition bits.
#[derive(Debug, Clone, PartialEq)]
pub struct TableGame {
    spec: GameSpec,
    values: Vec<f64>,
}

impl TableGame {
    pub fn new(spec: GameSpec, values: Vec<f64>) -> Result<Self> {
        let n = spec.n();
        if n > 30 {
            return Err(Error::TooManyPlayers { n, limit: 30 });
        }
        if values.len() != 1 << n {
            return Err(Error::ShapeMismatch { expected: 1 << n, found: values.len() });
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGame(format!("value at index {bad} is not finite")));
        }
        Ok(Self { spec, values })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(Coalition) -> f64) -> Result<Self> {
        let spec = GameSpec::new(n)?;
        if n > 30 {
            return Err(Error::TooManyPlayers { n, limit: 30 });
        }
        let values = (0..1u64 << n).map(|b| f(Coalition::from_bits_unchecked(n, b))).collect();
        Self::new(spec, values)
    }

    /// Evaluates every coalition of `game` once, walking the power set in Gray-code
    /// order so consecutive requests differ by a single player.
    pub fn tabulate<G: Game + ?Sized>(game: &G, limit: usize) -> Result<Self> {
        const CHUNK: usize = 4096;
        let n = game.n();
        if n > limit || n > 30 {
            return Err(Error::TooManyPlayers { n, limit: limit.min(30) });
        }
        let mut values = vec![0.0; 1 << n];
        let mut batch = Vec::with_capacity(CHUNK);
        let flush = |batch: &mut Vec<Coalition>, values: &mut Vec<f64>| -> Result<()> {
            let scores = game.evaluate_batch(batch)?;
            if scores.len() != batch.len() {
                return Err(Error::EvaluationFailed(format!(
                    "batch of {} returned {} scores",
                    batch.len(),
                    scores.len()
                )));
            }
            for (c, v) in batch.iter().zip(scores) {
                values[c.bits() as usize] = v;
            }
            batch.clear();
            Ok(())
        };
        for (code, _) in GrayCode::new(n) {
            batch.push(Coalition::from_bits_unchecked(n, code));
            if batch.len() == CHUNK {
                flush(&mut batch, &mut values)?;
            }
        }
        if !batch.is_empty() {
            flush(&mut batch, &mut values)?;
        }
        Self::new(game.spec().clone(), values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value_of_bits(&self, bits: u64) -> f64 {
        self.values[bits as usize]
    }
}

impl Game for TableGame {
    fn spec(&self) -> &GameSpec {
        &self.spec
    }

    fn evaluate(&self, s: Coalition) -> Result<f64> {
        check_coalition(&self.spec, s)?;
        Ok(self.values[s.bits() as usize])
    }
}

/// `v(S) = bias + Σ_{k∈S} w_k`. Every pairwise interaction is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct AdditiveGame {
    spec: GameSpec,
    weights: Vec<f64>,
    bias: f64,
}

impl AdditiveGame {
    pub fn new(weights: Vec<f64>, bias: f64) -> Result<Self> {
        Ok(Self { spec: GameSpec::new(weights.len())?, weights, bias })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl Game for AdditiveGame {
    fn spec(&self) -> &GameSpec {
        &self.spec
    }

    fn evaluate(&self, s: Coalition) -> Result<f64> {
        check_coalition(&self.spec, s)?;
        Ok(self.bias + s.members().map(|k| self.weights[k]).sum::<f64>())
    }
}

/// `v(S) = scale` iff both players of the pair are present, else 0.
#[derive(Debug, Clone, PartialEq)]
pub struct AndGame {
    spec: GameSpec,
    scale: f64,
}

impl AndGame {
    pub fn new(n: usize, i: usize, j: usize) -> Result<Self> {
        Self::scaled(n, i, j, 1.0)
    }

    pub fn scaled(n: usize, i: usize, j: usize, scale: f64) -> Result<Self> {
        Ok(Self { spec: GameSpec::new(n)?.with_pair(i, j)?, scale })
    }
}

impl Game for AndGame {
    fn spec(&self) -> &GameSpec {
        &self.spec
    }

    fn evaluate(&self, s: Coalition) -> Result<f64> {
        check_coalition(&self.spec, s)?;
        let (i, j) = self.spec.pair().expect("and game always has a pair");
        Ok(if s.contains(i) && s.contains(j) { self.scale } else { 0.0 })
    }
}

/// Pointwise sum `w(S) = u(S) + v(S)` of two games on the same players.
#[derive(Debug, Clone)]
pub struct SumGame<U, V> {
    spec: GameSpec,
    left: U,
    right: V,
}

impl<U: Game, V: Game> SumGame<U, V> {
    pub fn new(left: U, right: V) -> Result<Self> {
        if left.n() != right.n() {
            return Err(Error::ShapeMismatch { expected: left.n(), found: right.n() });
        }
        Ok(Self { spec: GameSpec::new(left.n())?, left, right })
    }
}

impl<U: Game, V: Game> Game for SumGame<U, V> {
    fn spec(&self) -> &GameSpec {
        &self.spec
    }

    fn evaluate(&self, s: Coalition) -> Result<f64> {
        Ok(self.left.evaluate(s)? + self.right.evaluate(s)?)
    }

    fn evaluate_batch(&self, batch: &[Coalition]) -> Result<Vec<f64>> {
        let l = self.left.evaluate_batch(batch)?;
        let r = self.right.evaluate_batch(batch)?;
        Ok(l.into_iter().zip(r).map(|(a, b)| a + b).collect())
    }
}

/// Adapter for closures. Mostly for tests and ad-hoc games.
pub struct FnGame<F> {
    spec: GameSpec,
    f: F,
}

impl<F> FnGame<F>
where
    F: Fn(Coalition) -> f64 + Send + Sync,
{
    pub fn new(n: usize, f: F) -> Result<Self> {
        Ok(Self { spec: GameSpec::new(n)?, f })
    }
}

impl<F> Game for FnGame<F>
where
    F: Fn(Coalition) -> f64 + Send + Sync,
{
    fn spec(&self) -> &GameSpec {
        &self.spec
    }

    fn evaluate(&self, s: Coalition) -> Result<f64> {
        check_coalition(&self.spec, s)?;
        Ok((self.f)(s))
    }
}

pub(crate) fn check_context<G: Game + ?Sized>(game: &G, i: usize, j: usize) -> Result<()> {
    check_pair(game.n(), i, j)
}

pub(crate) fn check_index<G: Game + ?Sized>(game: &G, i: usize) -> Result<()> {
    check_player(game.n(), i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn additive_delta_is_zero() {
        let g = AdditiveGame::new(vec![0.3, -1.2, 4.0, 2.5], 0.7).unwrap();
        for bits in 0..16u64 {
            let s = Coalition::from_bits(4, bits).unwrap();
            if s.contains(0) || s.contains(2) {
                continue;
            }
            assert_eq!(delta_v(&g, 0, 2, s).unwrap(), 0.0);
        }
    }

    #[test]
    fn and_delta_is_one() {
        let g = AndGame::new(5, 1, 3).unwrap();
        for bits in 0..32u64 {
            let s = Coalition::from_bits(5, bits).unwrap();
            if s.contains(1) || s.contains(3) {
                continue;
            }
            assert_eq!(delta_v(&g, 1, 3, s).unwrap(), 1.0);
        }
        assert_eq!(g.evaluate(Coalition::full(5)).unwrap(), 1.0);
    }

    #[test]
    fn delta_on_tabulated_game_matches_table_arithmetic() {
        let values: Vec<f64> = (0..64).map(|b| ((b * 37 + 11) % 17) as f64 * 0.25 - 1.5).collect();
        let g = TableGame::new(GameSpec::new(6).unwrap(), values.clone()).unwrap();
        let s = Coalition::from_members(6, &[2, 4]).unwrap();
        // S = {2,4} -> 0b010100 = 20; S∪{0,1} = 23, S∪{0} = 21, S∪{1} = 22
        let expected = values[23] - values[21] - values[22] + values[20];
        assert!((delta_v(&g, 0, 1, s).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn delta_rejects_members_and_bad_indices() {
        let g = AndGame::new(4, 0, 1).unwrap();
        let s = Coalition::from_members(4, &[1]).unwrap();
        assert_eq!(delta_v(&g, 0, 1, s), Err(Error::PlayerInCoalition(1)));
        assert!(matches!(delta_v(&g, 0, 9, Coalition::empty(4)), Err(Error::IndexOutOfRange { .. })));
        assert_eq!(delta_v(&g, 2, 2, Coalition::empty(4)), Err(Error::SamePlayer(2)));
    }

    #[test]
    fn tabulate_reproduces_game() {
        let g = AdditiveGame::new(vec![1.0, 2.0, 4.0, 8.0, 16.0], 0.5).unwrap();
        let t = TableGame::tabulate(&g, 20).unwrap();
        for b in 0..32u64 {
            assert_eq!(t.value_of_bits(b), 0.5 + b as f64);
        }
        assert!(matches!(TableGame::tabulate(&g, 4), Err(Error::TooManyPlayers { .. })));
    }

    proptest! {
        #[test]
        fn delta_is_symmetric(values in proptest::collection::vec(-1e3f64..1e3, 64), ctx in 0u64..64) {
            let g = TableGame::new(GameSpec::new(6).unwrap(), values).unwrap();
            let s = Coalition::from_bits(6, ctx & !0b11).unwrap();
            prop_assert_eq!(delta_v(&g, 0, 1, s).unwrap().to_bits(), delta_v(&g, 1, 0, s).unwrap().to_bits());
        }

        #[test]
        fn evaluation_is_repeatable(values in proptest::collection::vec(-1.0f64..1.0, 32), queries in proptest::collection::vec(0u64..32, 1..50)) {
            let g = TableGame::new(GameSpec::new(5).unwrap(), values).unwrap();
            for q in queries {
                let s = Coalition::from_bits(5, q).unwrap();
                prop_assert_eq!(g.evaluate(s).unwrap().to_bits(), g.evaluate(s).unwrap().to_bits());
            }
        }
    }
}
