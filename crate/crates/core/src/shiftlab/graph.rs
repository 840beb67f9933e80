use crate::combin::{binomial, KSubsets};
use crate::{Error, Result};

/// `blog x`: `x` for `x <= 4`, otherwise the `m` with
/// `C(m-1, ⌊(m-1)/2⌋) <= x < C(m, ⌊m/2⌋)`.
pub fn blog(x: u64) -> u64 {
    assert!(x >= 1, "blog is defined for x >= 1");
    if x <= 4 {
        return x;
    }
    let mut m = 1u64;
    while binomial(m, m / 2) <= x as u128 {
        m += 1;
    }
    m
}

/// `blog` applied `times` times.
pub fn iterated_blog(x: u64, times: usize) -> u64 {
    (0..times).fold(x, |acc, _| blog(acc))
}

/// `S(n, l)`: vertices are the `l`-subsets of `[n]`, and `{x_1..x_l}` is
/// adjacent to `{x_2..x_{l+1}}` whenever `x_1 < … < x_{l+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShiftGraph {
    pub n: usize,
    pub l: usize,
}

impl ShiftGraph {
    pub fn new(n: usize, l: usize) -> Result<Self> {
        if l == 0 || l >= n {
            return Err(Error::invalid(format!("S({n},{l}) needs 1 <= l <= n-1")));
        }
        Ok(ShiftGraph { n, l })
    }

    pub fn vertex_count(&self) -> u128 {
        binomial(self.n as u64, self.l as u64)
    }

    /// One edge per `(l+1)`-subset.
    pub fn edge_count(&self) -> u128 {
        binomial(self.n as u64, self.l as u64 + 1)
    }

    /// Vertices as sorted 1-based tuples, in co-lex order.
    pub fn vertices(&self) -> impl Iterator<Item = Vec<usize>> {
        KSubsets::new(self.n, self.l).map(|v| v.into_iter().map(|x| x + 1).collect())
    }

    /// Edges `(low, high)` with `low = {x_1..x_l}`, `high = {x_2..x_{l+1}}`.
    pub fn edges(&self) -> impl Iterator<Item = (Vec<usize>, Vec<usize>)> {
        let l = self.l;
        KSubsets::new(self.n, l + 1).map(move |x| {
            let x: Vec<usize> = x.into_iter().map(|v| v + 1).collect();
            (x[..l].to_vec(), x[1..].to_vec())
        })
    }
}

fn check_tuple(t: &[usize]) -> Result<()> {
    if t.is_empty() || t.windows(2).any(|w| w[0] >= w[1]) || t[0] == 0 {
        return Err(Error::invalid(format!("{t:?} is not a sorted tuple of positive integers")));
    }
    Ok(())
}

/// True iff one tuple is the shift of the other.
pub fn shift_edge(a: &[usize], b: &[usize]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::invalid("tuples of different sizes"));
    }
    check_tuple(a)?;
    check_tuple(b)?;
    let shifted = |x: &[usize], y: &[usize]| x[1..] == y[..y.len() - 1] && x[0] < y[0] && x[x.len() - 1] < y[y.len() - 1];
    Ok(shifted(a, b) || shifted(b, a))
}

/// The odd cycle of length `2l + 1` in `S(n, l)` for `n >= 2l + 1`: the
/// `l + 2` windows `{i..i+l-1}` followed by `{l-j+1..l} ∪ {l+2..2l-j+1}`
/// for `j = 1..l-1`.
pub fn odd_cycle(n: usize, l: usize) -> Result<Vec<Vec<usize>>> {
    if l == 0 || n < 2 * l + 1 {
        return Err(Error::invalid(format!("odd cycle needs n >= 2l+1 (n={n}, l={l})")));
    }
    let mut out: Vec<Vec<usize>> = (1..=l + 2).map(|i| (i..i + l).collect()).collect();
    for j in 1..l {
        out.push((l - j + 1..=l).chain(l + 2..=2 * l - j + 1).collect());
    }
    Ok(out)
}
