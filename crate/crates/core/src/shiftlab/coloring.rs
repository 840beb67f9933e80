use std::io::Write;

use serde::Serialize;

use super::graph::{blog, ShiftGraph};
use crate::combin::{binomial, colex_unrank, map_ksubset_chunks, KSubsets};
use crate::guard;
use crate::par::{Exec, Mode};
use crate::rng::{random_subset, rng_for};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Base,
    Fact1Step,
    Fact2Step,
    Table,
}

#[derive(Clone, Debug)]
enum Kind {
    Base,
    /// Colors of the inner coloring encoded as `⌊m/2⌋`-subsets of `[m]`.
    Step { inner: Box<Coloring>, codes: Vec<u64> },
    ThreeStep { inner: Box<Coloring> },
    /// Dense table indexed by the co-lex rank of the 0-based tuple.
    /// `binom[i * n + v] = C(v, i + 1)`.
    Table { colors: Vec<u32>, binom: Vec<u64> },
}

/// A coloring of `S(n, l)` with colors in `1..=color_count`. Evaluation is
/// lazy except for the table variant.
#[derive(Clone, Debug)]
pub struct Coloring {
    n: usize,
    l: usize,
    count: u32,
    kind: Kind,
}

impl Coloring {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn color_count(&self) -> u32 {
        self.count
    }

    pub fn provenance(&self) -> Provenance {
        match self.kind {
            Kind::Base => Provenance::Base,
            Kind::Step { .. } => Provenance::Fact1Step,
            Kind::ThreeStep { .. } => Provenance::Fact2Step,
            Kind::Table { .. } => Provenance::Table,
        }
    }

    /// Color of a sorted 1-based `l`-tuple. The tuple is not validated.
    pub fn color(&self, x: &[usize]) -> u32 {
        debug_assert_eq!(x.len(), self.l);
        match &self.kind {
            Kind::Base => x[0] as u32,
            Kind::Step { inner, codes } => {
                let a = codes[inner.color(&x[..x.len() - 1]) as usize - 1];
                let b = codes[inner.color(&x[1..]) as usize - 1];
                (a & !b).trailing_zeros() + 1
            }
            Kind::ThreeStep { inner } => {
                let l = x.len();
                let mid = inner.color(&x[1..l - 1]);
                if mid != 4 {
                    return mid;
                }
                let lo = inner.color(&x[..l - 2]);
                let hi = inner.color(&x[2..]);
                (1..=4).find(|j| *j != lo && *j != mid && *j != hi).unwrap()
            }
            Kind::Table { colors, binom } => {
                let rank: u64 = x.iter().enumerate().map(|(i, &v)| binom[i * self.n + v - 1]).sum();
                colors[rank as usize]
            }
        }
    }

    /// `color` with the tuple checked against `[n]` and `l`.
    pub fn color_checked(&self, x: &[usize]) -> Result<u32> {
        if x.len() != self.l
            || x.first().is_some_and(|&v| v == 0)
            || x.last().is_some_and(|&v| v > self.n)
            || x.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::invalid(format!("{x:?} is not a vertex of S({},{})", self.n, self.l)));
        }
        Ok(self.color(x))
    }

    /// Table coloring from colors listed in co-lex order of the vertices.
    pub fn from_table(n: usize, l: usize, colors: Vec<u32>) -> Result<Self> {
        let g = ShiftGraph::new(n, l)?;
        guard::check("coloring table entries", g.vertex_count(), guard::TABLE_DOMAIN)?;
        if colors.len() as u128 != g.vertex_count() {
            return Err(Error::invalid(format!(
                "table has {} entries, S({n},{l}) has {} vertices",
                colors.len(),
                g.vertex_count()
            )));
        }
        if colors.contains(&0) {
            return Err(Error::invalid("colors are 1-based"));
        }
        let count = colors.iter().copied().max().unwrap_or(1);
        let mut binom = vec![0u64; l * n];
        for i in 0..l {
            for v in 0..n {
                binom[i * n + v] = binomial(v as u64, i as u64 + 1) as u64;
            }
        }
        Ok(Coloring { n, l, count, kind: Kind::Table { colors, binom } })
    }

    /// Tabulate any coloring through `f`, which sees 1-based tuples.
    pub fn from_fn(n: usize, l: usize, f: impl Fn(&[usize]) -> u32) -> Result<Self> {
        let g = ShiftGraph::new(n, l)?;
        guard::check("coloring table entries", g.vertex_count(), guard::TABLE_DOMAIN)?;
        let colors = g.vertices().map(|v| f(&v)).collect();
        Self::from_table(n, l, colors)
    }

    /// Materialize this coloring as a table.
    pub fn tabulate(&self) -> Result<Self> {
        let mut t = Self::from_fn(self.n, self.l, |x| self.color(x))?;
        t.count = self.count;
        Ok(t)
    }

    /// Stream `x1,...,xl -> color` lines in co-lex order of the vertices.
    pub fn export<W: Write>(&self, mut out: W) -> Result<u64> {
        let g = ShiftGraph::new(self.n, self.l)?;
        guard::check("exported vertices", g.vertex_count(), guard::COLORING_EDGES)?;
        let mut lines = 0u64;
        let io = |e: std::io::Error| Error::invalid(format!("export failed: {e}"));
        for v in g.vertices() {
            let xs: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            writeln!(out, "{} -> {}", xs.join(","), self.color(&v)).map_err(io)?;
            lines += 1;
        }
        Ok(lines)
    }
}

/// `S(n, 1)` colored by `{x} ↦ x`.
pub fn base_coloring(n: usize) -> Result<Coloring> {
    if n < 2 {
        return Err(Error::invalid("base coloring needs n >= 2"));
    }
    Ok(Coloring { n, l: 1, count: n as u32, kind: Kind::Base })
}

/// One application of the subset-encoding step: a coloring of `S(n, l)` with at
/// most `C(m, ⌊m/2⌋)` colors becomes an `m`-coloring of `S(n, l + 1)`.
pub fn step_coloring(psi: Coloring, m: u32) -> Result<Coloring> {
    if m == 0 || m > 64 {
        return Err(Error::invalid(format!("m = {m} out of range 1..=64")));
    }
    let half = (m / 2) as usize;
    let budget = binomial(m as u64, half as u64);
    if psi.count as u128 > budget {
        return Err(Error::invalid(format!(
            "{} colors exceed C({m},{half}) = {budget}",
            psi.count
        )));
    }
    if psi.l + 1 >= psi.n {
        return Err(Error::invalid(format!("S({},{}) has no edges", psi.n, psi.l + 1)));
    }
    let codes = (0..psi.count as u128)
        .map(|c| colex_unrank(c, half).into_iter().fold(0u64, |acc, e| acc | 1 << e))
        .collect();
    Ok(Coloring {
        n: psi.n,
        l: psi.l + 1,
        count: m,
        kind: Kind::Step { inner: Box::new(psi), codes },
    })
}

/// The four-to-three step: a 4-coloring of `S(n, l - 1)` yields a 3-coloring
/// of `S(n, l + 1)`.
pub fn three_step_coloring(psi: Coloring) -> Result<Coloring> {
    if psi.count > 4 {
        return Err(Error::invalid(format!("need at most 4 colors, got {}", psi.count)));
    }
    if psi.l + 2 >= psi.n {
        return Err(Error::invalid(format!("S({},{}) has no edges", psi.n, psi.l + 2)));
    }
    Ok(Coloring { n: psi.n, l: psi.l + 2, count: 3, kind: Kind::ThreeStep { inner: Box::new(psi) } })
}

/// Color budgets of the tower: `budgets[j]` is the count at tuple size `j + 1`.
pub fn tower_budgets(n: usize, l: usize) -> Vec<u64> {
    let mut out = vec![n as u64];
    while out.len() < l {
        out.push(blog(*out.last().unwrap()));
    }
    out
}

/// Base coloring followed by `l - 1` steps with `m = blog(current count)`.
pub fn color_tower(n: usize, l: usize) -> Result<Coloring> {
    if l == 0 || l >= n {
        return Err(Error::invalid(format!("color tower needs 1 <= l <= n-1 (n={n}, l={l})")));
    }
    let mut c = base_coloring(n)?;
    while c.l < l {
        let m = blog(c.count as u64) as u32;
        c = step_coloring(c, m)?;
    }
    Ok(c)
}

/// First tuple size at which the tower reaches 4 colors.
pub fn four_color_level(n: usize) -> usize {
    let mut count = n as u64;
    let mut l = 1;
    while count > 4 {
        count = blog(count);
        l += 1;
    }
    l
}

/// Least `l` for which the constructive pipeline gives at most 3 colors.
pub fn lambda_constructive(n: usize) -> usize {
    if n <= 3 {
        return 1;
    }
    four_color_level(n) + 2
}

/// A 3-coloring of `S(n, l)` from the tower and the four-to-three step.
pub fn pipeline_three_coloring(n: usize, l: usize) -> Result<Coloring> {
    let l0 = lambda_constructive(n);
    if l < l0 || l >= n {
        return Err(Error::invalid(format!(
            "the pipeline 3-colors S({n},l) only for {l0} <= l <= n-1"
        )));
    }
    if l == 1 {
        return base_coloring(n);
    }
    three_step_coloring(color_tower(n, l - 2)?)
}

/// Count monochromatic edges, exhaustively or over sampled `(l+1)`-subsets.
pub fn verify_coloring(c: &Coloring, mode: &Mode, exec: &Exec) -> Result<u64> {
    let g = ShiftGraph::new(c.n, c.l)?;
    let (n, l) = (c.n, c.l);
    let bad = |x: &[usize]| c.color(&x[..l]) == c.color(&x[1..]);
    match *mode {
        Mode::Exhaustive => {
            guard::check("shift graph edges", g.edge_count(), guard::COLORING_EDGES)?;
            let counts = map_ksubset_chunks(exec, n, l + 1, 1 << 14, |it: KSubsets| {
                let mut buf = vec![0usize; l + 1];
                let mut hits = 0u64;
                it.for_each(|s| {
                    for (b, &v) in buf.iter_mut().zip(s) {
                        *b = v + 1;
                    }
                    hits += bad(&buf) as u64;
                });
                hits
            });
            Ok(counts.into_iter().sum())
        }
        Mode::Sampled { count, seed } => {
            let counts = exec.map_chunks(count, 1 << 12, |r| {
                r.filter(|&i| {
                    let mut rng = rng_for(seed, i);
                    let x: Vec<usize> = random_subset(&mut rng, n, l + 1).into_iter().map(|v| v + 1).collect();
                    bad(&x)
                })
                .count() as u64
            });
            Ok(counts.into_iter().sum())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn proper(c: &Coloring) -> bool {
        verify_coloring(c, &Mode::Exhaustive, &Exec::sequential()).unwrap() == 0
    }

    #[test]
    fn base_is_proper() {
        let c = base_coloring(6).unwrap();
        assert_eq!(c.color(&[3]), 3);
        assert_eq!(c.color_count(), 6);
        assert!(proper(&c));
    }

    #[test]
    fn step_from_base() {
        let c = step_coloring(base_coloring(5).unwrap(), 4).unwrap();
        assert_eq!(c.color_count(), 4);
        assert_eq!(c.provenance(), Provenance::Fact1Step);
        assert!(proper(&c));
        assert!(step_coloring(base_coloring(7).unwrap(), 4).is_err());
    }

    #[test]
    fn tower_proper_small() {
        for n in 3..=12 {
            for l in 1..n {
                let c = color_tower(n, l).unwrap();
                assert_eq!(c.color_count() as u64, *tower_budgets(n, l).last().unwrap());
                assert!(proper(&c), "n={n} l={l}");
            }
        }
    }

    #[test]
    fn three_step_branches() {
        // psi on S(9, 1) restricted to 4 colors via a table: {x} -> ((x-1) % 4) + 1
        // is not proper on S(9,1) but exercises both branches of the rule.
        let psi = Coloring::from_fn(9, 1, |x| ((x[0] - 1) % 4 + 1) as u32).unwrap();
        let phi = three_step_coloring(psi).unwrap();
        assert_eq!(phi.color(&[1, 2, 3]), 2);
        // middle color 4, neighbours colored 1 (x=5) and 3 (x=7)... mid x=4 -> 4
        assert_eq!(phi.color(&[1, 4, 7]), 2);
        assert_eq!(phi.color(&[3, 4, 5]), 2);
    }

    #[test]
    fn pipeline_three_colorings_proper() {
        for n in 5..=12 {
            for l in lambda_constructive(n)..n {
                let c = pipeline_three_coloring(n, l).unwrap();
                assert_eq!(c.color_count(), 3);
                assert!(proper(&c), "n={n} l={l}");
            }
        }
    }

    #[test]
    fn constant_coloring_counts_every_edge() {
        let c = Coloring::from_fn(5, 2, |_| 1).unwrap();
        let bad = verify_coloring(&c, &Mode::Exhaustive, &Exec::sequential()).unwrap();
        assert_eq!(bad as u128, ShiftGraph::new(5, 2).unwrap().edges().count() as u128);
    }

    #[test]
    fn table_matches_lazy() {
        let lazy = color_tower(11, 3).unwrap();
        let table = lazy.tabulate().unwrap();
        for v in ShiftGraph::new(11, 3).unwrap().vertices() {
            assert_eq!(lazy.color(&v), table.color(&v));
        }
    }

    #[test]
    fn sampled_is_deterministic() {
        let c = Coloring::from_fn(12, 2, |x| (x[0] % 3 + 1) as u32).unwrap();
        let m = Mode::Sampled { count: 5000, seed: 3 };
        let a = verify_coloring(&c, &m, &Exec::sequential()).unwrap();
        let b = verify_coloring(&c, &m, &Exec::default()).unwrap();
        assert_eq!(a, b);
        assert!(a > 0);
    }

    #[test]
    fn export_lines() {
        let mut buf = Vec::new();
        let lines = color_tower(5, 2).unwrap().export(&mut buf).unwrap();
        assert_eq!(lines, 10);
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("1,2 -> "));
    }
}
