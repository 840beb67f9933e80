use serde::Serialize;

use crate::guard;
use crate::{Error, Result};

/// Parameters of the tree projection.
///
/// Leaves of the complete tree of depth `D = log2 N` are identified with
/// `[N]`. The `k - 1` blocks `D_0..D_{k-2}` of `[n]` each hold `b = D - 1`
/// positions, one per level that can carry a lone parent (levels
/// `0..=D-2`).
///
/// A requested `N` that is not a power of two is padded up; sources only
/// ever use the first `n_requested` elements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StepUpParams {
    #[serde(rename = "N")]
    pub n_ground: usize,
    #[serde(rename = "N_requested")]
    pub n_requested: usize,
    pub k: usize,
    pub depth: usize,
    pub block: usize,
    pub n: usize,
}

impl StepUpParams {
    pub fn new(n_requested: usize, k: usize) -> Result<Self> {
        if k < 3 {
            return Err(Error::invalid(format!("k = {k}: need k >= 3")));
        }
        let n_ground = n_requested
            .checked_next_power_of_two()
            .ok_or_else(|| Error::invalid(format!("N = {n_requested} too large")))?;
        if k >= usize::BITS as usize || n_ground < 1 << k || n_requested < k {
            return Err(Error::invalid(format!("N = {n_ground} < 2^k with k = {k}")));
        }
        let depth = n_ground.trailing_zeros() as usize;
        guard::check("tree depth", depth as u128, 63)?;
        let block = depth - 1;
        let n = (k - 1) * block;
        if n > 64 {
            return Err(Error::invalid(format!("projected length n = {n} exceeds 64")));
        }
        Ok(StepUpParams {
            n_ground,
            n_requested,
            k,
            depth,
            block,
            n,
        })
    }

    /// 1-based positions of block `D_i`.
    pub fn block_positions(&self, i: usize) -> std::ops::RangeInclusive<usize> {
        i * self.block + 1..=(i + 1) * self.block
    }

    /// 1-based position of `β_i` applied to a node at `level` (root = 0).
    pub fn beta(&self, i: usize, level: usize) -> usize {
        debug_assert!(i + 1 < self.k && level < self.block);
        i * self.block + level + 1
    }
}

pub fn build_params(n_ground: usize, k: usize) -> Result<StepUpParams> {
    StepUpParams::new(n_ground, k)
}
