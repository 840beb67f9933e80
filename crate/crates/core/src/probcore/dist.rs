use serde::Serialize;

use crate::guard;
use crate::{Error, Result};

use super::bits::full_mask;

/// Tolerance for "sums to one".
pub const SUM_TOL: f64 = 1e-12;

/// An explicitly ordered finite outcome set. Outcomes are `u64` codes in
/// `0..size`, ordered numerically.
///
/// * `Binary { len }`: strings in `{0,1}^len`, position 1 most significant.
/// * `Symbols { alphabet, len }`: strings in `[alphabet]^len`, symbol `s`
///   stored as digit `s - 1`, position 1 most significant.
/// * `Range { size }`: the integers `0..size`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Space {
    Binary { len: usize },
    Symbols { alphabet: usize, len: usize },
    Range { size: u64 },
}

impl Space {
    pub fn size(&self) -> u128 {
        match *self {
            Space::Binary { len } => 1u128 << len.min(127),
            Space::Symbols { alphabet, len } => {
                (alphabet as u128).checked_pow(len as u32).unwrap_or(u128::MAX)
            }
            Space::Range { size } => size as u128,
        }
    }

    pub fn contains(&self, code: u64) -> bool {
        match *self {
            Space::Binary { len } => code & !full_mask(len) == 0,
            _ => (code as u128) < self.size(),
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let ok = match *self {
            Space::Binary { len } => (1..=64).contains(&len),
            Space::Symbols { alphabet, len } => {
                alphabet >= 1 && len >= 1 && self.size() <= u64::MAX as u128
            }
            Space::Range { size } => size >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("unrepresentable outcome space {self:?}")))
        }
    }

    /// Human-readable outcome, e.g. `"0110"` or `"1,3,2"`.
    pub fn format(&self, code: u64) -> String {
        match *self {
            Space::Binary { len } => (1..=len)
                .map(|i| if code >> (len - i) & 1 == 1 { '1' } else { '0' })
                .collect(),
            Space::Symbols { alphabet, len } => symbols_of(code, alphabet, len)
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(","),
            Space::Range { .. } => code.to_string(),
        }
    }
}

/// Code of a symbol string (symbols in `1..=d`).
pub fn symbol_code(symbols: &[u32], d: usize) -> u64 {
    symbols
        .iter()
        .fold(0u64, |acc, &s| acc * d as u64 + (s as u64 - 1))
}

/// Inverse of [`symbol_code`].
pub fn symbols_of(mut code: u64, d: usize, len: usize) -> Vec<u32> {
    let mut out = vec![0u32; len];
    for slot in out.iter_mut().rev() {
        *slot = (code % d as u64) as u32 + 1;
        code /= d as u64;
    }
    out
}

/// A probability vector over a [`Space`], stored sparsely as sorted
/// `(code, mass)` pairs with positive mass.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    space: Space,
    entries: Vec<(u64, f64)>,
}

impl Distribution {
    /// Validate and normalize: entries are sorted, duplicates merged in input
    /// order, zero masses dropped.
    pub fn new(space: Space, entries: Vec<(u64, f64)>) -> Result<Self> {
        space.validate()?;
        for &(c, p) in &entries {
            if !space.contains(c) {
                return Err(Error::invalid(format!("outcome {c} outside {space:?}")));
            }
            if !(p >= 0.0 && p.is_finite()) {
                return Err(Error::invalid(format!("bad probability {p}")));
            }
        }
        let d = Self::from_unsorted(space, entries);
        let total = d.total_mass();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::invalid(format!("probabilities sum to {total}")));
        }
        Ok(d)
    }

    /// Sort and merge without validation. Equal codes are summed in input
    /// order, so the result is a deterministic function of the input vector.
    pub(crate) fn from_unsorted(space: Space, mut entries: Vec<(u64, f64)>) -> Self {
        entries.sort_by_key(|e| e.0);
        let mut out: Vec<(u64, f64)> = Vec::with_capacity(entries.len());
        for (c, p) in entries {
            match out.last_mut() {
                Some(last) if last.0 == c => last.1 += p,
                _ => out.push((c, p)),
            }
        }
        out.retain(|e| e.1 > 0.0);
        Distribution {
            space,
            entries: out,
        }
    }

    pub fn point(space: Space, code: u64) -> Result<Self> {
        Self::new(space, vec![(code, 1.0)])
    }

    /// Uniform over the whole space.
    pub fn uniform(space: Space) -> Result<Self> {
        space.validate()?;
        let size = space.size();
        guard::check("uniform outcome count", size, 1 << guard::SOURCE_FREE_BITS)?;
        let p = 1.0 / size as f64;
        Ok(Distribution {
            space,
            entries: (0..size as u64).map(|c| (c, p)).collect(),
        })
    }

    /// Uniform over the given codes (duplicates not allowed).
    pub fn uniform_on(space: Space, codes: impl IntoIterator<Item = u64>) -> Result<Self> {
        let codes: Vec<u64> = codes.into_iter().collect();
        if codes.is_empty() {
            return Err(Error::invalid("uniform distribution on an empty set"));
        }
        let p = 1.0 / codes.len() as f64;
        let d = Self::new(space, codes.into_iter().map(|c| (c, p)).collect())?;
        if d.entries.iter().any(|e| e.1 != p) {
            return Err(Error::invalid("duplicate outcomes in uniform support"));
        }
        Ok(d)
    }

    pub fn space(&self) -> Space {
        self.space
    }

    /// Support entries, ascending by code.
    pub fn entries(&self) -> &[(u64, f64)] {
        &self.entries
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn prob(&self, code: u64) -> f64 {
        match self.entries.binary_search_by_key(&code, |e| e.0) {
            Ok(i) => self.entries[i].1,
            Err(_) => 0.0,
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    /// Dense probability vector over the whole space.
    pub fn dense(&self) -> Result<Vec<f64>> {
        let size = self.space.size();
        guard::check("dense outcome count", size, 1 << guard::SOURCE_FREE_BITS)?;
        let mut v = vec![0.0; size as usize];
        for &(c, p) in &self.entries {
            v[c as usize] = p;
        }
        Ok(v)
    }

    /// Statistical distance to the uniform distribution on the space,
    /// computed without materializing it.
    pub fn distance_to_uniform(&self) -> f64 {
        let size = self.space.size() as f64;
        let u = 1.0 / size;
        let inside: f64 = self.entries.iter().map(|e| (e.1 - u).abs()).sum();
        let outside = (size - self.entries.len() as f64) * u;
        (0.5 * (inside + outside)).clamp(0.0, 1.0)
    }
}

pub fn uniform_distribution(range_size: u64) -> Result<Distribution> {
    if range_size == 0 {
        return Err(Error::invalid("range size must be positive"));
    }
    Distribution::uniform(Space::Range { size: range_size })
}

/// The distribution of `f(X)` for `X ~ dist`. `f` returns `None` where it is
/// undefined, which is an error on the support.
pub fn pushforward<F>(f: F, dist: &Distribution, target: Space) -> Result<Distribution>
where
    F: Fn(u64) -> Option<u64>,
{
    target.validate()?;
    let mut out = Vec::with_capacity(dist.entries.len());
    for &(c, p) in &dist.entries {
        let y = f(c).ok_or_else(|| {
            Error::invalid(format!("map undefined on {}", dist.space.format(c)))
        })?;
        if !target.contains(y) {
            return Err(Error::invalid(format!("image {y} outside {target:?}")));
        }
        out.push((y, p));
    }
    Ok(Distribution::from_unsorted(target, out))
}

/// Half the L1 distance between two distributions on the same space.
pub fn stat_distance(a: &Distribution, b: &Distribution) -> Result<f64> {
    if a.space != b.space {
        return Err(Error::invalid(format!(
            "outcome spaces differ: {:?} vs {:?}",
            a.space, b.space
        )));
    }
    let (x, y) = (&a.entries, &b.entries);
    let (mut i, mut j) = (0, 0);
    let mut acc = 0.0;
    while i < x.len() || j < y.len() {
        let cx = x.get(i).map_or(u64::MAX, |e| e.0);
        let cy = y.get(j).map_or(u64::MAX, |e| e.0);
        if i < x.len() && (j >= y.len() || cx < cy) {
            acc += x[i].1;
            i += 1;
        } else if j < y.len() && (i >= x.len() || cy < cx) {
            acc += y[j].1;
            j += 1;
        } else {
            acc += (x[i].1 - y[j].1).abs();
            i += 1;
            j += 1;
        }
    }
    Ok((0.5 * acc).clamp(0.0, 1.0))
}

/// Shannon entropy in bits.
pub fn entropy(dist: &Distribution) -> f64 {
    dist.entries
        .iter()
        .filter(|e| e.1 > 0.0)
        .map(|&(_, p)| -p * p.log2())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_ranges() {
        assert_eq!(uniform_distribution(2).unwrap().entries(), &[(0, 0.5), (1, 0.5)]);
        assert_eq!(uniform_distribution(1).unwrap().entries(), &[(0, 1.0)]);
        let u8 = uniform_distribution(8).unwrap();
        assert!(u8.entries().iter().all(|e| e.1 == 0.125));
        assert!(uniform_distribution(0).is_err());
    }

    #[test]
    fn rejects_bad_mass() {
        let s = Space::Range { size: 3 };
        assert!(Distribution::new(s, vec![(0, 0.5)]).is_err());
        assert!(Distribution::new(s, vec![(0, 0.5), (3, 0.5)]).is_err());
        assert!(Distribution::new(s, vec![(0, 1.5), (1, -0.5)]).is_err());
        let d = Distribution::new(s, vec![(2, 0.25), (0, 0.5), (2, 0.25)]).unwrap();
        assert_eq!(d.entries(), &[(0, 0.5), (2, 0.5)]);
    }

    #[test]
    fn pushforward_examples() {
        let s = Space::Binary { len: 2 };
        let u = Distribution::uniform(s).unwrap();
        assert_eq!(pushforward(Some, &u, s).unwrap(), u);
        let c = pushforward(|_| Some(1), &u, Space::Range { size: 2 }).unwrap();
        assert_eq!(c.entries(), &[(1, 1.0)]);
        let x = pushforward(
            |c| Some((c.count_ones() % 2) as u64),
            &u,
            Space::Range { size: 2 },
        )
        .unwrap();
        assert_eq!(x, uniform_distribution(2).unwrap());
        assert!(pushforward(|c| (c != 3).then_some(0), &u, Space::Range { size: 1 }).is_err());
    }

    #[test]
    fn distance_examples() {
        let u2 = uniform_distribution(2).unwrap();
        assert_eq!(stat_distance(&u2, &u2).unwrap(), 0.0);
        let pt = Distribution::point(Space::Range { size: 2 }, 0).unwrap();
        assert_eq!(stat_distance(&pt, &u2).unwrap(), 0.5);
        let half = Distribution::new(Space::Range { size: 4 }, vec![(0, 0.5), (1, 0.5)]).unwrap();
        assert_eq!(stat_distance(&half, &uniform_distribution(4).unwrap()).unwrap(), 0.5);
        assert_eq!(half.distance_to_uniform(), 0.5);
        assert!(stat_distance(&u2, &half).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert!((entropy(&uniform_distribution(16).unwrap()) - 4.0).abs() < 1e-12);
        assert_eq!(entropy(&Distribution::point(Space::Range { size: 5 }, 2).unwrap()), 0.0);
        let d = Distribution::new(Space::Range { size: 2 }, vec![(0, 0.25), (1, 0.75)]).unwrap();
        let direct = 0.25 * 4f64.log2() + 0.75 * (4.0f64 / 3.0).log2();
        assert!((entropy(&d) - direct).abs() < 1e-12);
        assert!((entropy(&d) - (2.0 - 0.75 * 3f64.log2())).abs() < 1e-12);
    }

    #[test]
    fn symbol_codes() {
        assert_eq!(symbol_code(&[1, 1, 2], 3), 1);
        assert_eq!(symbols_of(symbol_code(&[3, 1, 2], 3), 3, 3), vec![3, 1, 2]);
        assert_eq!(Space::Symbols { alphabet: 3, len: 3 }.format(5), "1,2,3");
    }
}
