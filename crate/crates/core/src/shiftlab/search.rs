use super::coloring::{lambda_constructive, Coloring};
use super::graph::ShiftGraph;
use crate::combin::colex_rank;
use crate::guard;
use crate::{Error, Result};

/// Adjacency bitsets of `S(n, l)`, vertices in co-lex order.
fn adjacency(g: &ShiftGraph) -> Vec<u64> {
    let mut adj = vec![0u64; g.vertex_count() as usize];
    for (a, b) in g.edges() {
        let ra = colex_rank(&a.iter().map(|x| x - 1).collect::<Vec<_>>()) as usize;
        let rb = colex_rank(&b.iter().map(|x| x - 1).collect::<Vec<_>>()) as usize;
        adj[ra] |= 1 << rb;
        adj[rb] |= 1 << ra;
    }
    adj
}

struct Dsatur<'a> {
    adj: &'a [u64],
    k: usize,
    colors: Vec<u8>,
    /// `blocked[c]`: vertices adjacent to some vertex of color `c`.
    blocked: Vec<u64>,
}

impl Dsatur<'_> {
    fn solve(&mut self, uncolored: u64, used: usize) -> bool {
        if uncolored == 0 {
            return true;
        }
        let mut best = (0usize, 0u32, 0usize);
        let mut found = false;
        let mut rest = uncolored;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let sat = self.blocked[..used].iter().filter(|m| *m >> v & 1 == 1).count();
            let deg = (self.adj[v] & uncolored).count_ones();
            if !found || (sat, deg) > (best.0, best.1) {
                best = (sat, deg, v);
                found = true;
            }
        }
        let v = best.2;
        let bit = 1u64 << v;
        for c in 0..(used + 1).min(self.k) {
            if self.blocked[c] & bit != 0 {
                continue;
            }
            let saved = self.blocked[c];
            self.blocked[c] |= self.adj[v];
            self.colors[v] = c as u8 + 1;
            if self.solve(uncolored & !bit, used.max(c + 1)) {
                return true;
            }
            self.blocked[c] = saved;
        }
        self.colors[v] = 0;
        false
    }
}

/// A proper coloring of `S(n, l)` with at most `k` colors, if one exists.
pub fn find_coloring(n: usize, l: usize, k: usize) -> Result<Option<Coloring>> {
    let g = ShiftGraph::new(n, l)?;
    guard::check("coloring search vertices", g.vertex_count(), guard::COLORING_SEARCH_VERTICES)?;
    if g.vertex_count() > 64 {
        // bitset representation
        return Err(Error::ResourceLimit { what: "coloring search vertices", requested: g.vertex_count(), limit: 64 });
    }
    let vertices = g.vertex_count() as usize;
    if k == 0 {
        return Ok(None);
    }
    let adj = adjacency(&g);
    let mut s = Dsatur { adj: &adj, k, colors: vec![0; vertices], blocked: vec![0; k] };
    let all = if vertices == 64 { u64::MAX } else { (1u64 << vertices) - 1 };
    if !s.solve(all, 0) {
        return Ok(None);
    }
    let colors = s.colors.iter().map(|&c| c as u32).collect();
    Coloring::from_table(n, l, colors).map(Some)
}

/// Exact chromatic number of `S(n, l)`.
pub fn chromatic_bruteforce(n: usize, l: usize) -> Result<usize> {
    let g = ShiftGraph::new(n, l)?;
    guard::check("chromatic vertices", g.vertex_count(), guard::CHROMATIC_VERTICES)?;
    for k in 1.. {
        if find_coloring(n, l, k)?.is_some() {
            return Ok(k);
        }
    }
    unreachable!()
}

/// Upper bound on the least `l` with `χ(S(n, l)) <= 3`: the constructive
/// pipeline, improved by an exact 3-coloring search wherever `S(n, l)` is
/// small enough to search.
pub fn lambda_upper(n: usize) -> usize {
    let constructive = lambda_constructive(n);
    for l in 1..constructive.min(n) {
        let Ok(g) = ShiftGraph::new(n, l) else { continue };
        if g.vertex_count() > guard::limit(guard::COLORING_SEARCH_VERTICES).min(64) {
            continue;
        }
        if let Ok(Some(_)) = find_coloring(n, l, 3) {
            return l;
        }
    }
    constructive
}
