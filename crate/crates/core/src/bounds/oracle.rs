use std::collections::HashMap;

use crate::combin::binomial_sum;
use crate::guard;
use crate::rng::hash_words;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    SeededRandom { seed: u64 },
    /// `(Σ x) mod m + 1`.
    Adversarial,
    File { table: HashMap<Vec<u64>, u32> },
}

/// A coloring `φ` of the subsets of `[N]` with at most `k_max` elements by
/// colors `1..=m`.
#[derive(Clone, Debug, PartialEq)]
pub struct ColoringOracle {
    pub n_ground: u64,
    pub k_max: usize,
    pub m: u32,
    kind: Kind,
}

fn check_shape(n_ground: u64, k_max: usize, m: u32) -> Result<()> {
    if n_ground == 0 || m == 0 {
        return Err(Error::invalid("need N >= 1 and m >= 1"));
    }
    if k_max as u64 > n_ground {
        return Err(Error::invalid(format!("k_max = {k_max} exceeds N = {n_ground}")));
    }
    Ok(())
}

impl ColoringOracle {
    /// Each set gets a color from a hash of the seed and its elements.
    pub fn seeded(n_ground: u64, k_max: usize, m: u32, seed: u64) -> Result<Self> {
        check_shape(n_ground, k_max, m)?;
        Ok(ColoringOracle { n_ground, k_max, m, kind: Kind::SeededRandom { seed } })
    }

    pub fn adversarial(n_ground: u64, k_max: usize, m: u32) -> Result<Self> {
        check_shape(n_ground, k_max, m)?;
        Ok(ColoringOracle { n_ground, k_max, m, kind: Kind::Adversarial })
    }

    /// Parse lines `x1,...,xj : color` (the empty set is ` : color`). Blank
    /// lines and lines starting with `#` are skipped. The table must cover
    /// every set of size at most `k_max`.
    pub fn from_file_str(text: &str, n_ground: u64, k_max: usize, m: u32) -> Result<Self> {
        check_shape(n_ground, k_max, m)?;
        let domain = binomial_sum(n_ground, k_max as u64);
        guard::check("oracle table entries", domain, guard::TABLE_DOMAIN)?;
        let mut table = HashMap::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |why: &str| Error::Parse(format!("line {}: {why}", no + 1));
            let (set, color) = line.split_once(':').ok_or_else(|| bad("missing ':'"))?;
            let color: u32 = color.trim().parse().map_err(|_| bad("bad color"))?;
            if color == 0 || color > m {
                return Err(bad("color outside 1..=m"));
            }
            let mut xs = set
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<u64>().map_err(|_| bad("bad element")))
                .collect::<Result<Vec<_>>>()?;
            xs.sort_unstable();
            if xs.windows(2).any(|w| w[0] == w[1]) || xs.first() == Some(&0) || xs.last().is_some_and(|&x| x > n_ground) {
                return Err(bad("not a subset of [N]"));
            }
            if xs.len() > k_max {
                return Err(bad("set larger than k_max"));
            }
            if table.insert(xs, color).is_some() {
                return Err(bad("duplicate set"));
            }
        }
        if table.len() as u128 != domain {
            return Err(Error::Parse(format!("table covers {} of {domain} sets", table.len())));
        }
        Ok(ColoringOracle { n_ground, k_max, m, kind: Kind::File { table } })
    }

    pub fn provenance(&self) -> &'static str {
        match self.kind {
            Kind::SeededRandom { .. } => "seeded-random",
            Kind::Adversarial => "adversarial-generator",
            Kind::File { .. } => "file",
        }
    }

    /// Color of a sorted set of 1-based elements. The set is not validated.
    pub fn color(&self, x: &[u64]) -> u32 {
        debug_assert!(x.len() <= self.k_max);
        match &self.kind {
            Kind::SeededRandom { seed } => (hash_words(*seed, x) % self.m as u64) as u32 + 1,
            Kind::Adversarial => (x.iter().sum::<u64>() % self.m as u64) as u32 + 1,
            Kind::File { table } => table[x],
        }
    }

    /// Write the oracle in the file format, sets in co-lex order by size.
    pub fn to_file_string(&self) -> Result<String> {
        let domain = binomial_sum(self.n_ground, self.k_max as u64);
        guard::check("oracle table entries", domain, guard::TABLE_DOMAIN)?;
        let mut out = String::new();
        for j in 0..=self.k_max {
            for s in crate::combin::KSubsets::new(self.n_ground as usize, j) {
                let xs: Vec<u64> = s.iter().map(|&x| x as u64 + 1).collect();
                let text: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
                out.push_str(&format!("{} : {}\n", text.join(","), self.color(&xs)));
            }
        }
        Ok(out)
    }
}
