use std::ops::Range;

use serde::Serialize;

use crate::combin::binomial;
use crate::guard;
use crate::probcore::Space;
use crate::shiftlab::{color_tower, Coloring};
use crate::{Error, Result};

/// Parameters of the shift-graph construction: ground size `N`, source size
/// `k`, tuple size `l`, output length `p = ⌊(k-1)/l⌋` and a coloring of
/// `S(N, l)` with `d` colors.
#[derive(Clone, Debug)]
pub struct ShiftParams {
    pub n_ground: usize,
    pub k: usize,
    pub l: usize,
    pub p: usize,
    pub d: usize,
    pub coloring: Coloring,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftParamsInfo {
    #[serde(rename = "N")]
    pub n_ground: usize,
    pub k: usize,
    pub l: usize,
    pub p: usize,
    pub d: usize,
    pub k_prime: usize,
    pub k_prime_raw: f64,
}

impl ShiftParams {
    pub fn new(n_ground: usize, k: usize, l: usize, coloring: Coloring) -> Result<Self> {
        if l < 2 {
            return Err(Error::invalid("l must be at least 2"));
        }
        if k <= l || k > n_ground {
            return Err(Error::invalid(format!("need l < k <= N (N={n_ground}, k={k}, l={l})")));
        }
        if coloring.n() != n_ground || coloring.l() != l {
            return Err(Error::invalid(format!(
                "coloring is on S({},{}), expected S({n_ground},{l})",
                coloring.n(),
                coloring.l()
            )));
        }
        let p = (k - 1) / l;
        let d = coloring.color_count() as usize;
        Space::Symbols { alphabet: d, len: p }.validate()?;
        Ok(ShiftParams { n_ground, k, l, p, d, coloring })
    }

    /// Parameters with the tower coloring of `S(N, l)`, tabulated when small.
    pub fn with_tower(n_ground: usize, k: usize, l: usize) -> Result<Self> {
        if l >= n_ground {
            return Err(Error::invalid(format!("l = {l} must be below N = {n_ground}")));
        }
        let mut c = color_tower(n_ground, l)?;
        if binomial(n_ground as u64, l as u64) <= guard::TABLE_DOMAIN {
            c = c.tabulate()?;
        }
        Self::new(n_ground, k, l, c)
    }

    /// `2^{-2l-3} p` before flooring.
    pub fn k_prime_raw(&self) -> f64 {
        self.p as f64 * 0.5f64.powi(2 * self.l as i32 + 3)
    }

    /// `max(1, ⌊2^{-2l-3} p⌋)`.
    pub fn k_prime(&self) -> usize {
        (self.k_prime_raw().floor() as usize).max(1)
    }

    pub fn output_space(&self) -> Space {
        Space::Symbols { alphabet: self.d, len: self.p }
    }

    pub fn info(&self) -> ShiftParamsInfo {
        ShiftParamsInfo {
            n_ground: self.n_ground,
            k: self.k,
            l: self.l,
            p: self.p,
            d: self.d,
            k_prime: self.k_prime(),
            k_prime_raw: self.k_prime_raw(),
        }
    }
}

/// Consecutive blocks of a sorted support, sizes `l+1, l-1, l+1, …` with a
/// possibly shorter last block. Blocks are index ranges into the support.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockPartition {
    pub l: usize,
    pub blocks: Vec<Range<usize>>,
}

impl BlockPartition {
    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.len()).collect()
    }

    /// 0-based indices of odd-numbered blocks (first, third, …) of full size `l+1`.
    pub fn full_odd_blocks(&self) -> Vec<usize> {
        (0..self.blocks.len())
            .step_by(2)
            .filter(|&i| self.blocks[i].len() == self.l + 1)
            .collect()
    }
}

pub fn block_partition(k: usize, l: usize) -> Result<BlockPartition> {
    if l < 2 || k <= l {
        return Err(Error::invalid(format!("block partition needs l >= 2 and k > l (k={k}, l={l})")));
    }
    let mut blocks = Vec::new();
    let mut start = 0;
    while start < k {
        let want = if blocks.len() % 2 == 0 { l + 1 } else { l - 1 };
        let end = (start + want).min(k);
        blocks.push(start..end);
        start = end;
    }
    Ok(BlockPartition { l, blocks })
}

/// Code of `F_1(X)` for a sorted 1-based `X` of any size (the empty set maps
/// to the all-ones string). Blocks beyond `p` are dropped.
pub fn shift_f1_code(x: &[usize], params: &ShiftParams) -> u64 {
    let (l, p, d) = (params.l, params.p, params.d as u64);
    let mut code = 0u64;
    for j in 0..p {
        let digit = match x.get(j * l..(j + 1) * l) {
            Some(block) => params.coloring.color(block) as u64 - 1,
            None => 0,
        };
        code = code * d + digit;
    }
    code
}

/// `F_1(X) = (ψ(X_1), …, ψ(X_j), 1, …, 1)` of length `p`.
pub fn shift_f1(x: &[usize], params: &ShiftParams) -> Result<Vec<u32>> {
    if x.is_empty() {
        return Err(Error::invalid("X must be nonempty"));
    }
    if x.len() > params.k {
        return Err(Error::invalid(format!("|X| = {} exceeds k = {}", x.len(), params.k)));
    }
    if x[0] == 0 || x[x.len() - 1] > params.n_ground || x.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(format!("X must be a sorted subset of [{}]", params.n_ground)));
    }
    let code = shift_f1_code(x, params);
    Ok(crate::probcore::symbols_of(code, params.d, params.p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partitions() {
        assert_eq!(block_partition(8, 2).unwrap().sizes(), vec![3, 1, 3, 1]);
        assert_eq!(block_partition(7, 2).unwrap().sizes(), vec![3, 1, 3]);
        assert_eq!(block_partition(3, 2).unwrap().sizes(), vec![3]);
        assert_eq!(block_partition(7, 3).unwrap().sizes(), vec![4, 2, 1]);
        assert!(block_partition(2, 2).is_err());
        for k in 3..30 {
            for l in 2..k {
                let b = block_partition(k, l).unwrap();
                let p = (k - 1) / l;
                assert_eq!(b.full_odd_blocks().len(), p.div_ceil(2), "k={k} l={l}");
            }
        }
    }

    #[test]
    fn f1_examples() {
        let params = ShiftParams::with_tower(20, 7, 2).unwrap();
        assert_eq!(params.p, 3);
        assert_eq!(shift_f1(&[4], &params).unwrap(), vec![1, 1, 1]);
        let c = params.coloring.color(&[3, 9]);
        assert_eq!(shift_f1(&[3, 9], &params).unwrap(), vec![c, 1, 1]);
        let x = [1, 2, 5, 6, 8, 11, 19];
        let want: Vec<u32> = x.chunks(2).take(3).map(|b| params.coloring.color(b)).collect();
        assert_eq!(shift_f1(&x, &params).unwrap(), want);
        assert!(shift_f1(&[], &params).is_err());
        assert!(shift_f1(&[1, 2, 3, 4, 5, 6, 7, 8], &params).is_err());
    }

    #[test]
    fn k_prime_floor() {
        let params = ShiftParams::with_tower(24, 8, 2).unwrap();
        assert_eq!(params.d, 7);
        assert_eq!(params.k_prime(), 1);
        assert!(params.k_prime_raw() < 1.0);
    }
}
