//! Binomials, k-subset ranking and bitmask subset walks.
//!
//! Subsets of `0..n` are sorted `usize` slices; subsets of a 64-bit universe
//! are plain masks. k-subsets are ordered co-lexicographically, which makes
//! rank/unrank independent of `n`.

use std::ops::Range;

use crate::par::Exec;

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        let num = (n - i) as u128;
        let den = (i + 1) as u128;
        let g = gcd(acc, den);
        let (a, d) = (acc / g, den / g);
        let num = num / d;
        acc = match a.checked_mul(num) {
            Some(v) => v,
            None => return u128::MAX,
        };
    }
    acc
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `Σ_{i ≤ k} C(n, i)`, saturating.
pub fn binomial_sum(n: u64, k: u64) -> u128 {
    (0..=k.min(n)).fold(0u128, |acc, i| acc.saturating_add(binomial(n, i)))
}

/// Co-lex rank of a sorted subset of `0..`.
pub fn colex_rank(set: &[usize]) -> u128 {
    set.iter()
        .enumerate()
        .map(|(i, &c)| binomial(c as u64, i as u64 + 1))
        .sum()
}

/// The k-subset with the given co-lex rank.
pub fn colex_unrank(mut rank: u128, k: usize) -> Vec<usize> {
    let mut out = vec![0usize; k];
    for i in (1..=k).rev() {
        // largest c with C(c, i) <= rank
        let mut c = i - 1;
        while binomial(c as u64 + 1, i as u64) <= rank {
            c += 1;
        }
        rank -= binomial(c as u64, i as u64);
        out[i - 1] = c;
    }
    out
}

/// Advance a sorted k-subset of `0..n` to its co-lex successor.
/// Returns false (leaving `set` unspecified) after the last subset.
pub fn next_colex(set: &mut [usize], n: usize) -> bool {
    let k = set.len();
    for i in 0..k {
        let limit = if i + 1 < k { set[i + 1] } else { n };
        if set[i] + 1 < limit {
            set[i] += 1;
            for (j, x) in set[..i].iter_mut().enumerate() {
                *x = j;
            }
            return true;
        }
    }
    false
}

/// Advance a sorted k-subset of `0..n` to its lexicographic successor.
pub fn next_lex(set: &mut [usize], n: usize) -> bool {
    let k = set.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if set[i] < n - k + i {
            set[i] += 1;
            for j in i + 1..k {
                set[j] = set[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Iterator over the k-subsets of `0..n` with co-lex ranks in `range`.
pub struct KSubsets {
    n: usize,
    cur: Vec<usize>,
    left: u128,
}

impl KSubsets {
    pub fn new(n: usize, k: usize) -> Self {
        Self::ranked(n, k, 0..binomial(n as u64, k as u64))
    }

    pub fn ranked(n: usize, k: usize, range: Range<u128>) -> Self {
        let left = range.end.saturating_sub(range.start);
        let cur = if left > 0 {
            colex_unrank(range.start, k)
        } else {
            Vec::new()
        };
        KSubsets { n, cur, left }
    }

    /// Visit each subset without allocating.
    pub fn for_each(mut self, mut f: impl FnMut(&[usize])) {
        while self.left > 0 {
            f(&self.cur);
            self.left -= 1;
            if self.left > 0 && !next_colex(&mut self.cur, self.n) {
                self.left = 0;
            }
        }
    }
}

impl Iterator for KSubsets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.left == 0 {
            return None;
        }
        let out = self.cur.clone();
        self.left -= 1;
        if self.left > 0 && !next_colex(&mut self.cur, self.n) {
            self.left = 0;
        }
        Some(out)
    }
}

/// Map `f` over fixed-size co-lex chunks of the k-subsets of `0..n`.
///
/// `f` receives the chunk's rank range and a visitor-style iterator; chunk
/// results are returned in rank order.
pub fn map_ksubset_chunks<T, F>(exec: &Exec, n: usize, k: usize, chunk: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(KSubsets) -> T + Sync + Send,
{
    let total = binomial(n as u64, k as u64);
    assert!(total <= u64::MAX as u128, "subset count overflows u64");
    exec.map_chunks(total as u64, chunk, |r| {
        f(KSubsets::ranked(n, k, r.start as u128..r.end as u128))
    })
}

/// All submasks of `mask`, starting with 0 and ending with `mask`.
pub fn submasks(mask: u64) -> impl Iterator<Item = u64> {
    let mut sub = 0u64;
    let mut done = false;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let out = sub;
        sub = sub.wrapping_sub(mask) & mask;
        if sub == 0 {
            done = true;
        }
        Some(out)
    })
}

/// Bit positions set in `mask`, ascending.
pub fn mask_elems(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let t = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(t)
        }
    })
}

/// Scatter the low bits of `bits` onto the set positions of `mask`.
pub fn deposit(bits: u64, mut mask: u64) -> u64 {
    let mut out = 0u64;
    let mut i = 0;
    while mask != 0 {
        let low = mask & mask.wrapping_neg();
        if bits >> i & 1 == 1 {
            out |= low;
        }
        mask ^= low;
        i += 1;
    }
    out
}

/// Gather the bits of `x` at the set positions of `mask` into the low bits.
pub fn extract(x: u64, mut mask: u64) -> u64 {
    let mut out = 0u64;
    let mut i = 0;
    while mask != 0 {
        let low = mask & mask.wrapping_neg();
        if x & low != 0 {
            out |= 1 << i;
        }
        mask ^= low;
        i += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_small() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(0, 0), 1);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(64, 32), 1_832_624_140_942_590_534);
        assert_eq!(binomial_sum(4, 2), 11);
    }

    #[test]
    fn binomial_matches_pascal() {
        let mut row = vec![1u128];
        for n in 1..=100u64 {
            let mut next = vec![1u128; n as usize + 1];
            for k in 1..n as usize {
                next[k] = row[k - 1] + row[k];
            }
            for (k, v) in next.iter().enumerate() {
                assert_eq!(binomial(n, k as u64), *v, "C({n},{k})");
            }
            row = next;
        }
    }

    #[test]
    fn colex_roundtrip_and_order() {
        let all: Vec<_> = KSubsets::new(7, 3).collect();
        assert_eq!(all.len(), 35);
        for (r, s) in all.iter().enumerate() {
            assert_eq!(colex_rank(s), r as u128);
            assert_eq!(&colex_unrank(r as u128, 3), s);
        }
        assert_eq!(all[0], vec![0, 1, 2]);
        assert_eq!(all[1], vec![0, 1, 3]);
        assert_eq!(all[34], vec![4, 5, 6]);
    }

    #[test]
    fn ranked_chunks_concatenate() {
        let whole: Vec<_> = KSubsets::new(9, 4).collect();
        let parts = map_ksubset_chunks(&Exec::with_workers(2), 9, 4, 17, |it| it.collect::<Vec<_>>());
        assert_eq!(parts.concat(), whole);
    }

    #[test]
    fn lex_successor() {
        let mut s = vec![0, 1];
        let mut seen = vec![s.clone()];
        while next_lex(&mut s, 4) {
            seen.push(s.clone());
        }
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[1], vec![0, 2]);
    }

    #[test]
    fn submask_walk() {
        let subs: Vec<u64> = submasks(0b1010).collect();
        assert_eq!(subs, vec![0, 0b10, 0b1000, 0b1010]);
        assert_eq!(submasks(0).count(), 1);
    }

    #[test]
    fn deposit_extract_inverse() {
        let mask = 0b1011_0100;
        for b in 0..16 {
            assert_eq!(extract(deposit(b, mask), mask), b);
        }
        assert_eq!(mask_elems(mask).collect::<Vec<_>>(), vec![2, 4, 5, 7]);
    }
}
