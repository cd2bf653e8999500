//! Relative interaction strength `J^(m)` and the AMRIS proxy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{floor_order, OrderStrength};

/// Normalized strengths over a grid of integer orders. `j` has mean 1.
#[derive(Debug, Clone, PartialEq)]
pub struct StrengthProfile {
    pub model_id: String,
    pub n: usize,
    /// Integer orders `m`, strictly increasing.
    pub orders: Vec<usize>,
    pub j: Vec<f64>,
}

impl StrengthProfile {
    /// Builds a profile from already-normalized values, checking its invariants.
    pub fn new(model_id: impl Into<String>, n: usize, orders: Vec<usize>, j: Vec<f64>) -> Result<Self> {
        if orders.len() != j.len() {
            return Err(Error::LengthMismatch(orders.len(), j.len()));
        }
        if orders.is_empty() {
            return Err(Error::InvalidConfig("profile has no orders".into()));
        }
        if n < 2 || orders.iter().any(|&m| m > n - 2) {
            return Err(Error::InvalidConfig(format!("profile orders must lie in 0..={}", n.saturating_sub(2))));
        }
        if orders.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("profile orders must be strictly increasing".into()));
        }
        if j.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidConfig("J values must be finite and nonnegative".into()));
        }
        Ok(Self { model_id: model_id.into(), n, orders, j })
    }

    pub fn normalized_orders(&self) -> Vec<f64> {
        self.orders.iter().map(|&m| m as f64 / self.n as f64).collect()
    }

    pub fn mean(&self) -> f64 {
        self.j.iter().sum::<f64>() / self.j.len() as f64
    }

    fn range(&self) -> f64 {
        let max = self.j.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = self.j.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    }

    /// Sum of `J^(m)` over grid orders with `lo <= m <= hi`; `None` if no order falls inside.
    pub fn band_sum(&self, lo: usize, hi: usize) -> Option<f64> {
        let mut hit = false;
        let mut sum = 0.0;
        for (&m, &v) in self.orders.iter().zip(&self.j) {
            if (lo..=hi).contains(&m) {
                hit = true;
                sum += v;
            }
        }
        hit.then_some(sum)
    }
}

/// `J^(m) = raw(m) / mean_{m'} raw(m')` over the given grid.
pub fn normalize_strength(model_id: impl Into<String>, n: usize, orders: Vec<usize>, raw: &[f64]) -> Result<StrengthProfile> {
    if raw.is_empty() {
        return Err(Error::InvalidConfig("raw strength vector is empty".into()));
    }
    let mean = raw.iter().sum::<f64>() / raw.len() as f64;
    if !mean.is_finite() || mean <= 0.0 {
        return Err(Error::DegenerateRaw);
    }
    StrengthProfile::new(model_id, n, orders, raw.iter().map(|r| r / mean).collect())
}

pub fn profile_from_raw(model_id: impl Into<String>, raw: &OrderStrength) -> Result<StrengthProfile> {
    normalize_strength(model_id, raw.n, raw.orders.clone(), &raw.values)
}

/// Band limits for AMRIS: low band `0..=⌊a n⌋`, mid band `⌊b n⌋..=⌊c n⌋`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmrisParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl AmrisParams {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        let p = Self { a, b, c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { a, b, c } = *self;
        if !(0.0 <= a && a <= b && b <= c && c <= 1.0) {
            return Err(Error::InvalidParams(format!("need 0 <= a <= b <= c <= 1, got ({a}, {b}, {c})")));
        }
        Ok(())
    }

    pub fn low_band(&self, n: usize) -> (usize, usize) {
        (0, floor_order(self.a, n))
    }

    pub fn mid_band(&self, n: usize) -> (usize, usize) {
        (floor_order(self.b, n), floor_order(self.c, n))
    }
}

/// `sqrt( 1/(max J − min J) · Σ_{⌊bn⌋..=⌊cn⌋} J / Σ_{0..=⌊an⌋} J )`.
pub fn amris(profile: &StrengthProfile, params: &AmrisParams) -> Result<f64> {
    params.validate()?;
    let n = profile.n;
    let (lo, lo_hi) = params.low_band(n);
    let (mid_lo, mid_hi) = params.mid_band(n);
    if mid_hi > n - 2 {
        return Err(Error::InvalidParams(format!("⌊c·n⌋ = {mid_hi} exceeds n - 2 = {}", n - 2)));
    }
    if profile.orders[0] > lo_hi {
        return Err(Error::EmptyBand("low"));
    }
    let range = profile.range();
    if range <= 0.0 {
        return Err(Error::FlatProfile);
    }
    let low = profile.band_sum(lo, lo_hi).ok_or(Error::EmptyBand("low"))?;
    let mid = profile.band_sum(mid_lo, mid_hi).ok_or(Error::EmptyBand("mid"))?;
    if low == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok((mid / low / range).sqrt())
}
