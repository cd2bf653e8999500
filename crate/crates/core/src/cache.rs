//! Bounded LRU score cache.

use std::num::NonZeroUsize;
use std::sync::atomic::{AtomicU64, Ordering};

use lru::LruCache;
use parking_lot::Mutex;

use crate::coalition::{Coalition, GameSpec};
use crate::error::Result;
use crate::game::Game;

pub const DEFAULT_CAPACITY: usize = 1 << 20;

/// Scores keyed by packed coalition bits. Safe to share between threads; two
/// workers missing on the same coalition may both evaluate it, but a stored
/// score is never wrong.
pub struct ValueCache {
    entries: Mutex<LruCache<u64, f64>>,
    capacity: usize,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl ValueCache {
    pub fn new(capacity: usize) -> Self {
        let cap = NonZeroUsize::new(capacity.max(1)).unwrap();
        Self {
            entries: Mutex::new(LruCache::new(cap)),
            capacity: cap.get(),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.lock().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    fn lookup(&self, s: Coalition) -> Option<f64> {
        let found = self.entries.lock().get(&s.bits()).copied();
        match found {
            Some(_) => self.hits.fetch_add(1, Ordering::Relaxed),
            None => self.misses.fetch_add(1, Ordering::Relaxed),
        };
        found
    }

    fn store(&self, s: Coalition, v: f64) {
        self.entries.lock().put(s.bits(), v);
    }
}

impl Default for ValueCache {
    fn default() -> Self {
        Self::new(DEFAULT_CAPACITY)
    }
}

/// `v(S)` through the cache: a hit skips the scorer entirely.
pub fn evaluate_cached<G: Game + ?Sized>(game: &G, s: Coalition, cache: &ValueCache) -> Result<f64> {
    if let Some(v) = cache.lookup(s) {
        return Ok(v);
    }
    let v = game.evaluate(s)?;
    cache.store(s, v);
    Ok(v)
}

/// Wraps a game so every evaluation goes through a [`ValueCache`].
pub struct CachedGame<G> {
    inner: G,
    cache: ValueCache,
}

impl<G: Game> CachedGame<G> {
    pub fn new(inner: G, capacity: usize) -> Self {
        Self { inner, cache: ValueCache::new(capacity) }
    }

    pub fn cache(&self) -> &ValueCache {
        &self.cache
    }

    pub fn inner(&self) -> &G {
        &self.inner
    }
}

impl<G: Game> Game for CachedGame<G> {
    fn spec(&self) -> &GameSpec {
        self.inner.spec()
    }

    fn evaluate(&self, s: Coalition) -> Result<f64> {
        evaluate_cached(&self.inner, s, &self.cache)
    }

    fn evaluate_batch(&self, batch: &[Coalition]) -> Result<Vec<f64>> {
        let mut out: Vec<Option<f64>> = batch.iter().map(|&s| self.cache.lookup(s)).collect();
        let missing: Vec<Coalition> =
            batch.iter().zip(&out).filter(|(_, v)| v.is_none()).map(|(s, _)| *s).collect();
        if !missing.is_empty() {
            let fresh = self.inner.evaluate_batch(&missing)?;
            let mut fresh = missing.iter().zip(fresh);
            for slot in out.iter_mut().filter(|v| v.is_none()) {
                let (s, v) = fresh.next().expect("one score per missing coalition");
                self.cache.store(*s, v);
                *slot = Some(v);
            }
        }
        Ok(out.into_iter().map(|v| v.unwrap()).collect())
    }
}
