//! Players and coalitions.
//!
//! A [`Coalition`] is a subset of `N = {0, .., n-1}` packed little-endian into a
//! single `u64`: player 0 is the lowest bit. This caps `n` at 64, which is far
//! beyond anything exact enumeration can touch and enough for sampling.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_PLAYERS: usize = 64;

/// Player count, optional labels and an optional distinguished pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameSpec {
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pair: Option<(usize, usize)>,
}

impl GameSpec {
    pub fn new(n: usize) -> Result<Self> {
        if !(2..=MAX_PLAYERS).contains(&n) {
            return Err(Error::InvalidGame(format!(
                "player count must be in 2..={MAX_PLAYERS}, got {n}"
            )));
        }
        Ok(Self { n, labels: None, pair: None })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::ShapeMismatch { expected: self.n, found: labels.len() });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_pair(mut self, i: usize, j: usize) -> Result<Self> {
        check_pair(self.n, i, j)?;
        self.pair = Some((i, j));
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn pair(&self) -> Option<(usize, usize)> {
        self.pair
    }

    /// Invariants after deserialization.
    pub fn validate(&self) -> Result<()> {
        let fresh = GameSpec::new(self.n)?;
        if let Some(labels) = &self.labels {
            fresh.clone().with_labels(labels.clone())?;
        }
        if let Some((i, j)) = self.pair {
            check_pair(self.n, i, j)?;
        }
        Ok(())
    }
}

pub(crate) fn check_player(n: usize, i: usize) -> Result<()> {
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    Ok(())
}

pub(crate) fn check_pair(n: usize, i: usize, j: usize) -> Result<()> {
    check_player(n, i)?;
    check_player(n, j)?;
    if i == j {
        return Err(Error::SamePlayer(i));
    }
    Ok(())
}

/// Mask with the low `n` bits set.
#[inline]
pub fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// A subset of players, fixed to a player count `n`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coalition {
    bits: u64,
    n: u8,
}

impl Coalition {
    pub fn empty(n: usize) -> Self {
        debug_assert!(n <= MAX_PLAYERS);
        Self { bits: 0, n: n as u8 }
    }

    pub fn full(n: usize) -> Self {
        Self { bits: full_mask(n), n: n as u8 }
    }

    pub fn from_bits(n: usize, bits: u64) -> Result<Self> {
        if n > MAX_PLAYERS {
            return Err(Error::TooManyPlayers { n, limit: MAX_PLAYERS });
        }
        if bits & !full_mask(n) != 0 {
            return Err(Error::InvalidGame(format!("bits {bits:#x} exceed n = {n}")));
        }
        Ok(Self { bits, n: n as u8 })
    }

    /// Callers guarantee `bits` fits in `n` players.
    #[inline]
    pub(crate) fn from_bits_unchecked(n: usize, bits: u64) -> Self {
        debug_assert_eq!(bits & !full_mask(n), 0);
        Self { bits, n: n as u8 }
    }

    pub fn from_members(n: usize, members: &[usize]) -> Result<Self> {
        let mut c = Self::empty(n);
        for &k in members {
            check_player(n, k)?;
            c.bits |= 1 << k;
        }
        Ok(c)
    }

    /// Parses the wire form: one `0`/`1` character per player, player 0 first.
    pub fn from_mask_str(s: &str) -> Result<Self> {
        let n = s.len();
        if n > MAX_PLAYERS {
            return Err(Error::TooManyPlayers { n, limit: MAX_PLAYERS });
        }
        let mut bits = 0u64;
        for (k, ch) in s.bytes().enumerate() {
            match ch {
                b'1' => bits |= 1 << k,
                b'0' => {}
                _ => return Err(Error::InvalidGame(format!("bad mask character {:?}", ch as char))),
            }
        }
        Ok(Self { bits, n: n as u8 })
    }

    pub fn to_mask_string(&self) -> String {
        (0..self.n()).map(|k| if self.contains(k) { '1' } else { '0' }).collect()
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn contains(&self, k: usize) -> bool {
        k < self.n() && self.bits >> k & 1 == 1
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    #[inline]
    pub fn with(self, k: usize) -> Self {
        debug_assert!(k < self.n());
        Self { bits: self.bits | 1 << k, ..self }
    }

    #[inline]
    pub fn without(self, k: usize) -> Self {
        Self { bits: self.bits & !(1 << k), ..self }
    }

    #[inline]
    pub fn union(self, other: Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        Self { bits: self.bits | other.bits, ..self }
    }

    #[inline]
    pub fn intersection(self, other: Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        Self { bits: self.bits & other.bits, ..self }
    }

    #[inline]
    pub fn complement(self) -> Self {
        Self { bits: !self.bits & full_mask(self.n()), ..self }
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.bits & !other.bits == 0
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        let mut rest = self.bits;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let k = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(k)
        })
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.members()).finish()
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_mask_string())
    }
}
