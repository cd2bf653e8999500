//! From concrete inputs to games: player regions, masking and scorers.

pub mod protocol;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coalition::{Coalition, GameSpec};
use crate::error::{Error, Result};
use crate::game::Game;

/// Assignment of input indices to players, plus the values absent players take.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskSpec {
    shape: Vec<usize>,
    regions: Vec<Vec<usize>>,
    baseline: Vec<f64>,
    /// owner[index] = player owning that index
    owner: Vec<usize>,
}

impl MaskSpec {
    pub fn new(shape: Vec<usize>, regions: Vec<Vec<usize>>, baseline: Vec<f64>) -> Result<Self> {
        let size: usize = shape.iter().product();
        if shape.is_empty() || size == 0 {
            return Err(Error::InvalidMask("input shape is empty".into()));
        }
        if regions.len() < 2 || regions.len() > crate::coalition::MAX_PLAYERS {
            return Err(Error::InvalidMask(format!("{} regions; need 2..=64", regions.len())));
        }
        if baseline.len() != size {
            return Err(Error::ShapeMismatch { expected: size, found: baseline.len() });
        }
        let mut owner = vec![usize::MAX; size];
        for (player, region) in regions.iter().enumerate() {
            if region.is_empty() {
                return Err(Error::InvalidMask(format!("region {player} is empty")));
            }
            for &idx in region {
                if idx >= size {
                    return Err(Error::InvalidMask(format!("index {idx} outside input of size {size}")));
                }
                if owner[idx] != usize::MAX {
                    return Err(Error::InvalidMask(format!("index {idx} in regions {} and {player}", owner[idx])));
                }
                owner[idx] = player;
            }
        }
        if let Some(idx) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(Error::InvalidMask(format!("index {idx} belongs to no region")));
        }
        Ok(Self { shape, regions, baseline, owner })
    }

    /// Grid partition with a zero baseline.
    pub fn grid(shape: Vec<usize>, rows: usize, cols: usize) -> Result<Self> {
        let regions = partition_grid(&shape, rows, cols)?;
        let size = shape.iter().product();
        Self::new(shape, regions, vec![0.0; size])
    }

    pub fn with_baseline(self, baseline: Vec<f64>) -> Result<Self> {
        Self::new(self.shape, self.regions, baseline)
    }

    pub fn n_players(&self) -> usize {
        self.regions.len()
    }

    pub fn input_len(&self) -> usize {
        self.owner.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn regions(&self) -> &[Vec<usize>] {
        &self.regions
    }

    pub fn baseline(&self) -> &[f64] {
        &self.baseline
    }
}

/// Splits an `H x W` or `H x W x C` input (row-major, channels last) into
/// `rows * cols` rectangular patches. Patch `r * cols + c` covers rows
/// `[r*ph, (r+1)*ph)` and columns `[c*pw, (c+1)*pw)` with `ph = H / rows`; the last
/// patch on each axis also takes the remainder. All channels of a pixel share its patch.
pub fn partition_grid(shape: &[usize], rows: usize, cols: usize) -> Result<Vec<Vec<usize>>> {
    let (h, w, ch) = match *shape {
        [h, w] => (h, w, 1),
        [h, w, c] => (h, w, c),
        _ => return Err(Error::BadGrid(format!("expected H x W or H x W x C, got {shape:?}"))),
    };
    if rows == 0 || cols == 0 || rows * cols < 2 {
        return Err(Error::BadGrid(format!("{rows} x {cols} grid needs at least 2 patches")));
    }
    if rows > h || cols > w {
        return Err(Error::BadGrid(format!("{rows} x {cols} grid does not fit a {h} x {w} input")));
    }
    if ch == 0 {
        return Err(Error::BadGrid("zero channels".into()));
    }
    let (ph, pw) = (h / rows, w / cols);
    let patch_of = |y: usize, x: usize| (y / ph).min(rows - 1) * cols + (x / pw).min(cols - 1);
    let mut regions = vec![Vec::new(); rows * cols];
    for y in 0..h {
        for x in 0..w {
            let p = patch_of(y, x);
            for c in 0..ch {
                regions[p].push((y * w + x) * ch + c);
            }
        }
    }
    Ok(regions)
}

/// Keeps the indices of present players and writes the baseline everywhere else.
pub fn apply_mask(input: &[f64], s: Coalition, spec: &MaskSpec) -> Result<Vec<f64>> {
    if input.len() != spec.input_len() {
        return Err(Error::ShapeMismatch { expected: spec.input_len(), found: input.len() });
    }
    if s.n() != spec.n_players() {
        return Err(Error::ShapeMismatch { expected: spec.n_players(), found: s.n() });
    }
    Ok(input
        .iter()
        .zip(&spec.baseline)
        .zip(&spec.owner)
        .map(|((&x, &b), &p)| if s.contains(p) { x } else { b })
        .collect())
}

/// `λ x0 + (1 − λ) x1`, elementwise.
pub fn mixup_input(x0: &[f64], x1: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidLambda(lambda));
    }
    if x0.len() != x1.len() {
        return Err(Error::ShapeMismatch { expected: x0.len(), found: x1.len() });
    }
    if lambda == 1.0 {
        return Ok(x0.to_vec());
    }
    if lambda == 0.0 {
        return Ok(x1.to_vec());
    }
    Ok(x0.iter().zip(x1).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect())
}

/// Which scalar of the model output becomes `v(S)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputKind {
    Logit,
    Probability,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputSelector {
    pub class: usize,
    pub kind: OutputKind,
}

impl OutputSelector {
    pub fn logit(class: usize) -> Self {
        Self { class, kind: OutputKind::Logit }
    }
}

/// A model producing one score per class for a flat input.
pub trait Scorer: Send + Sync {
    fn input_len(&self) -> usize;

    fn logits(&self, x: &[f64]) -> Result<Vec<f64>>;

    fn score(&self, x: &[f64], sel: OutputSelector) -> Result<f64> {
        let logits = self.logits(x)?;
        let Some(&z) = logits.get(sel.class) else {
            return Err(Error::InvalidConfig(format!("class {} out of range for {} outputs", sel.class, logits.len())));
        };
        Ok(match sel.kind {
            OutputKind::Logit => z,
            OutputKind::Probability => {
                let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let denom: f64 = logits.iter().map(|l| (l - max).exp()).sum();
                (z - max).exp() / denom
            }
        })
    }
}

/// `logit_c = Σ_k w_{c,k} x_k + b_c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearScorer {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl LinearScorer {
    pub fn new(weights: Vec<Vec<f64>>, bias: Vec<f64>) -> Result<Self> {
        let s = Self { weights, bias };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.is_empty() || self.weights.len() != self.bias.len() {
            return Err(Error::InvalidConfig("linear scorer needs one bias per weight row".into()));
        }
        let len = self.weights[0].len();
        if self.weights.iter().any(|w| w.len() != len) {
            return Err(Error::InvalidConfig("linear scorer rows differ in length".into()));
        }
        Ok(())
    }
}

impl Scorer for LinearScorer {
    fn input_len(&self) -> usize {
        self.weights[0].len()
    }

    fn logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_len() {
            return Err(Error::ShapeMismatch { expected: self.input_len(), found: x.len() });
        }
        Ok(self.weights.iter().zip(&self.bias).map(|(w, b)| w.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + b).collect())
    }
}

/// Single-output scorer `scale · (Σ_{k∈A} x_k) · (Σ_{k∈B} x_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductScorer {
    pub input_len: usize,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

impl Scorer for ProductScorer {
    fn input_len(&self) -> usize {
        self.input_len
    }

    fn logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_len {
            return Err(Error::ShapeMismatch { expected: self.input_len, found: x.len() });
        }
        let sum = |idx: &[usize]| -> Result<f64> {
            idx.iter()
                .map(|&k| x.get(k).copied().ok_or(Error::IndexOutOfRange { index: k, n: x.len() }))
                .sum()
        };
        Ok(vec![self.scale * sum(&self.left)? * sum(&self.right)?])
    }
}

/// The built-in scorers, serializable for configs and fixtures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BuiltinScorer {
    Linear(LinearScorer),
    Product(ProductScorer),
}

impl Scorer for BuiltinScorer {
    fn input_len(&self) -> usize {
        match self {
            BuiltinScorer::Linear(s) => s.input_len(),
            BuiltinScorer::Product(s) => s.input_len(),
        }
    }

    fn logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            BuiltinScorer::Linear(s) => s.logits(x),
            BuiltinScorer::Product(s) => s.logits(x),
        }
    }
}

/// `v(S) = selected score of scorer(apply_mask(input, S))`.
pub struct MaskedGame {
    spec: GameSpec,
    input: Vec<f64>,
    mask: MaskSpec,
    scorer: Arc<dyn Scorer>,
    selector: OutputSelector,
}

pub fn make_game(input: Vec<f64>, mask: MaskSpec, scorer: Arc<dyn Scorer>, selector: OutputSelector) -> Result<MaskedGame> {
    if input.len() != mask.input_len() {
        return Err(Error::ShapeMismatch { expected: mask.input_len(), found: input.len() });
    }
    if scorer.input_len() != input.len() {
        return Err(Error::ShapeMismatch { expected: scorer.input_len(), found: input.len() });
    }
    // fail early on a bad selector rather than on the first coalition
    scorer.score(&input, selector)?;
    Ok(MaskedGame { spec: GameSpec::new(mask.n_players())?, input, mask, scorer, selector })
}

impl Game for MaskedGame {
    fn spec(&self) -> &GameSpec {
        &self.spec
    }

    fn evaluate(&self, s: Coalition) -> Result<f64> {
        let x = apply_mask(&self.input, s, &self.mask)?;
        let v = self.scorer.score(&x, self.selector)?;
        if !v.is_finite() {
            return Err(Error::EvaluationFailed(format!("non-finite score for coalition {s}")));
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{interaction_exact, ExactConfig};

    #[test]
    fn grid_exact_division() {
        let regions = partition_grid(&[32, 32, 3], 4, 4).unwrap();
        assert_eq!(regions.len(), 16);
        assert!(regions.iter().all(|r| r.len() == 8 * 8 * 3));
        let halves = partition_grid(&[32, 32], 1, 2).unwrap();
        assert_eq!(halves.len(), 2);
        assert!(halves.iter().all(|r| r.len() == 32 * 16));
        // pixel (0, 16) lands in the right half
        assert!(halves[1].contains(&16));
    }

    #[test]
    fn grid_remainder_goes_to_last_patch() {
        let regions = partition_grid(&[30, 30], 4, 4).unwrap();
        let sides = [7usize, 7, 7, 9];
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(regions[r * 4 + c].len(), sides[r] * sides[c], "patch ({r},{c})");
            }
        }
    }

    #[test]
    fn grid_errors() {
        assert!(matches!(partition_grid(&[32, 32], 1, 1), Err(Error::BadGrid(_))));
        assert!(matches!(partition_grid(&[4, 4], 5, 1), Err(Error::BadGrid(_))));
        assert!(matches!(partition_grid(&[16], 2, 2), Err(Error::BadGrid(_))));
    }

    #[test]
    fn mask_spec_rejects_overlap_and_gaps() {
        assert!(MaskSpec::new(vec![4], vec![vec![0, 1], vec![1, 2, 3]], vec![0.0; 4]).is_err());
        assert!(MaskSpec::new(vec![4], vec![vec![0, 1], vec![2]], vec![0.0; 4]).is_err());
        assert!(MaskSpec::new(vec![4], vec![vec![0, 1], vec![2, 3]], vec![0.0; 3]).is_err());
    }

    #[test]
    fn masking_extremes() {
        let spec = MaskSpec::grid(vec![4, 4], 1, 2).unwrap().with_baseline(vec![-1.0; 16]).unwrap();
        let x: Vec<f64> = (0..16).map(|v| v as f64 * 0.1).collect();
        assert_eq!(apply_mask(&x, Coalition::full(2), &spec).unwrap(), x);
        assert_eq!(apply_mask(&x, Coalition::empty(2), &spec).unwrap(), vec![-1.0; 16]);
        let left = apply_mask(&x, Coalition::from_members(2, &[0]).unwrap(), &spec).unwrap();
        for (idx, v) in left.iter().enumerate() {
            let expected = if idx % 4 < 2 { x[idx] } else { -1.0 };
            assert_eq!(*v, expected);
        }
        // idempotent
        let again = apply_mask(&left, Coalition::from_members(2, &[0]).unwrap(), &spec).unwrap();
        assert_eq!(again, left);
        assert!(apply_mask(&x[..3], Coalition::full(2), &spec).is_err());
    }

    #[test]
    fn mixup_examples() {
        let a = vec![2.0; 5];
        let b = vec![4.0; 5];
        assert_eq!(mixup_input(&a, &b, 1.0).unwrap(), a);
        assert_eq!(mixup_input(&a, &b, 0.0).unwrap(), b);
        assert_eq!(mixup_input(&a, &b, 0.5).unwrap(), vec![3.0; 5]);
        assert!(mixup_input(&a, &b[..2], 0.5).is_err());
        assert!(mixup_input(&a, &b, 1.5).is_err());
    }

    #[test]
    fn linear_scorer_gives_additive_game() {
        let w: Vec<f64> = (0..16).map(|k| (k as f64 - 7.0) * 0.3).collect();
        let scorer = Arc::new(LinearScorer::new(vec![w.clone()], vec![0.5]).unwrap());
        let x: Vec<f64> = (0..16).map(|k| 1.0 + k as f64 * 0.05).collect();
        let mask = MaskSpec::grid(vec![4, 4], 2, 2).unwrap();
        let game = make_game(x.clone(), mask.clone(), scorer.clone(), OutputSelector::logit(0)).unwrap();
        assert_eq!(game.evaluate(Coalition::empty(4)).unwrap(), 0.5);
        let full = game.evaluate(Coalition::full(4)).unwrap();
        assert!((full - scorer.logits(&x).unwrap()[0]).abs() < 1e-15);
        for m in 0..=2 {
            assert!(interaction_exact(&game, 0, 3, m, &ExactConfig::default()).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn product_scorer_gives_and_like_game() {
        let mask = MaskSpec::grid(vec![4, 4], 2, 2).unwrap();
        let regions = mask.regions().to_vec();
        let scorer = Arc::new(ProductScorer { input_len: 16, left: regions[0].clone(), right: regions[3].clone(), scale: 1.0 });
        let x = vec![0.5; 16];
        let game = make_game(x, mask, scorer, OutputSelector::logit(0)).unwrap();
        // each region sums to 4 * 0.5 = 2, so v = 4 when both present
        for m in 0..=2 {
            assert_eq!(interaction_exact(&game, 0, 3, m, &ExactConfig::default()).unwrap(), 4.0);
        }
    }

    #[test]
    fn probability_selector_is_softmax() {
        let s = LinearScorer::new(vec![vec![1.0], vec![0.0]], vec![0.0, 0.0]).unwrap();
        let p = s.score(&[0.0], OutputSelector { class: 0, kind: OutputKind::Probability }).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        assert!(s.score(&[0.0], OutputSelector::logit(2)).is_err());
    }
}
