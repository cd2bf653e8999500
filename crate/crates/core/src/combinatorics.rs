//! Binomials and subset enumeration over packed bitmasks.

/// `C(n, k)` as an exact integer, `None` on overflow.
pub fn binomial_exact(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for t in 0..k {
        // acc * (n - t) / (t + 1) stays integral at every step
        acc = acc.checked_mul((n - t) as u128)? / (t as u128 + 1);
    }
    Some(acc)
}

/// `ln C(n, k)` from a summed log-factorial, for sizes where the exact value overflows.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (0..k).map(|t| ((n - t) as f64).ln() - ((t + 1) as f64).ln()).sum()
}

/// `C(n, k)` as a float: exact integer arithmetic while it fits, log-space beyond.
pub fn binomial(n: usize, k: usize) -> f64 {
    match binomial_exact(n as u64, k as u64) {
        Some(v) => v as f64,
        None => ln_binomial(n as u64, k as u64).exp(),
    }
}

/// Spreads the low bits of `compact` onto the set bits of `positions`
/// (bit `t` of `compact` lands on the `t`-th lowest set bit of `positions`).
#[inline]
pub fn deposit_bits(compact: u64, positions: u64) -> u64 {
    let mut out = 0u64;
    let mut pos = positions;
    let mut src = compact;
    while src != 0 && pos != 0 {
        let low = pos & pos.wrapping_neg();
        if src & 1 == 1 {
            out |= low;
        }
        src >>= 1;
        pos &= pos - 1;
    }
    out
}

/// Inverse of [`deposit_bits`]: gathers the bits of `word` found at `positions`.
#[inline]
pub fn extract_bits(word: u64, positions: u64) -> u64 {
    let mut out = 0u64;
    let mut pos = positions;
    let mut t = 0;
    while pos != 0 {
        let low = pos & pos.wrapping_neg();
        if word & low != 0 {
            out |= 1 << t;
        }
        t += 1;
        pos &= pos - 1;
    }
    out
}

/// Reflected binary Gray code over `width` bits.
///
/// Yields `(code, flipped)` where `flipped` is the bit that changed from the
/// previous code (`None` for the initial all-zero code). Successive codes
/// differ in exactly one bit.
pub struct GrayCode {
    index: u64,
    end: u64,
}

impl GrayCode {
    pub fn new(width: usize) -> Self {
        assert!(width < 64, "gray code width {width} too large");
        Self { index: 0, end: 1u64 << width }
    }
}

impl Iterator for GrayCode {
    type Item = (u64, Option<usize>);

    fn next(&mut self) -> Option<Self::Item> {
        if self.index >= self.end {
            return None;
        }
        let i = self.index;
        self.index += 1;
        let code = i ^ (i >> 1);
        let flipped = (i != 0).then(|| i.trailing_zeros() as usize);
        Some((code, flipped))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.index) as usize;
        (left, Some(left))
    }
}

/// All `width`-bit words with exactly `k` bits set, ascending (Gosper's hack).
pub struct FixedWeight {
    next: Option<u64>,
    limit: u64,
}

impl FixedWeight {
    pub fn new(width: usize, k: usize) -> Self {
        assert!(width < 64, "width {width} too large");
        let next = if k > width {
            None
        } else if k == 0 {
            Some(0)
        } else {
            Some((1u64 << k) - 1)
        };
        Self { next, limit: 1u64 << width }
    }
}

impl Iterator for FixedWeight {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let cur = self.next?;
        self.next = if cur == 0 {
            None
        } else {
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            let nxt = (((r ^ cur) >> 2) / c) | r;
            (nxt < self.limit && r != 0).then_some(nxt)
        };
        Some(cur)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_small_table() {
        assert_eq!(binomial_exact(6, 3), Some(20));
        assert_eq!(binomial_exact(5, 0), Some(1));
        assert_eq!(binomial_exact(3, 5), Some(0));
        assert_eq!(binomial_exact(64, 32), Some(1_832_624_140_942_590_534));
        assert_eq!(binomial(10, 4), 210.0);
    }

    #[test]
    fn log_binomial_matches_exact() {
        for n in 0..60u64 {
            for k in 0..=n {
                let exact = binomial_exact(n, k).unwrap() as f64;
                let approx = ln_binomial(n, k).exp();
                assert!((approx - exact).abs() <= 1e-10 * exact, "C({n},{k})");
            }
        }
    }

    #[test]
    fn gray_code_flips_one_bit() {
        let codes: Vec<_> = GrayCode::new(5).collect();
        assert_eq!(codes.len(), 32);
        for w in codes.windows(2) {
            let diff = w[0].0 ^ w[1].0;
            assert_eq!(diff.count_ones(), 1);
            assert_eq!(Some(diff.trailing_zeros() as usize), w[1].1);
        }
        let mut all: Vec<u64> = codes.iter().map(|c| c.0).collect();
        all.sort_unstable();
        assert_eq!(all, (0..32).collect::<Vec<_>>());
    }

    #[test]
    fn fixed_weight_counts() {
        for width in 0..12usize {
            for k in 0..=width + 1 {
                let words: Vec<u64> = FixedWeight::new(width, k).collect();
                let expected = binomial_exact(width as u64, k as u64).unwrap() as usize;
                assert_eq!(words.len(), expected, "width {width} k {k}");
                assert!(words.iter().all(|w| w.count_ones() as usize == k && *w < 1 << width));
                assert!(words.windows(2).all(|p| p[0] < p[1]));
            }
        }
    }

    #[test]
    fn deposit_extract_inverse() {
        let positions = 0b1011_0110u64;
        for compact in 0..(1u64 << positions.count_ones()) {
            let spread = deposit_bits(compact, positions);
            assert_eq!(spread & !positions, 0);
            assert_eq!(extract_bits(spread, positions), compact);
        }
    }
}
