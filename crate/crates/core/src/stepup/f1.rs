use crate::probcore::BitVector;
use crate::treekit::{complete_tree, leaf_generated_subtree, skeleton_decomposition};
use crate::{Error, Result};

use super::params::StepUpParams;

const NONE: u8 = u8::MAX;

/// Level of the least common ancestor of two leaves (0-based leaf indices)
/// in the complete tree of the given depth.
#[inline]
pub fn lca_level(depth: usize, a: u64, b: u64) -> usize {
    depth - (64 - (a ^ b).leading_zeros() as usize)
}

/// Walk the lone parents of `T_X` for a sorted leaf set `X` of the complete
/// tree of depth `depth`, calling `f(block, level, leaf)` for each. `block`
/// is 0 above the skeleton root and `i` on the inner edge `e_i`; `leaf` is
/// the index into `leaves` of the lone leaf hanging from the parent.
///
/// The internal nodes of `T_X` are the LCAs of consecutive leaves, and they
/// form the Cartesian tree of the gap levels, which is what this walks.
pub fn for_each_lone_parent(depth: usize, leaves: &[u64], mut f: impl FnMut(usize, usize, usize)) {
    let m = leaves.len();
    if m < 2 {
        return;
    }
    assert!(m <= 64, "at most 64 leaves");
    let gaps = m - 1;
    let mut g = [0u8; 64];
    for t in 0..gaps {
        g[t] = lca_level(depth, leaves[t], leaves[t + 1]) as u8;
    }
    let mut left = [NONE; 64];
    let mut right = [NONE; 64];
    let mut stack = [0u8; 64];
    let mut sp = 0usize;
    for t in 0..gaps {
        let mut last = NONE;
        while sp > 0 && g[stack[sp - 1] as usize] > g[t] {
            sp -= 1;
            last = stack[sp];
        }
        left[t] = last;
        if sp > 0 {
            right[stack[sp - 1] as usize] = t as u8;
        }
        stack[sp] = t as u8;
        sp += 1;
    }
    let root = stack[0];

    let mut pending = [(0u8, 0u8); 64];
    let mut np = 0usize;
    let mut next_block = 0usize;
    sp = 0;
    stack[sp] = root;
    sp += 1;
    while sp > 0 {
        sp -= 1;
        let t = stack[sp] as usize;
        let (l, r) = (left[t], right[t]);
        if (l == NONE) != (r == NONE) {
            let leaf = if l == NONE { t } else { t + 1 };
            pending[np] = (g[t], leaf as u8);
            np += 1;
        } else {
            for &(level, leaf) in &pending[..np] {
                f(next_block, level as usize, leaf as usize);
            }
            np = 0;
            next_block += 1;
        }
        if r != NONE {
            stack[sp] = r;
            sp += 1;
        }
        if l != NONE {
            stack[sp] = l;
            sp += 1;
        }
    }
    debug_assert_eq!(np, 0, "a lone chain always ends in a skeleton node");
}

/// `F_1` on a sorted set of 0-based leaves, as a code of length `n`.
pub fn f1_code(leaves: &[u64], p: &StepUpParams) -> u64 {
    let mut code = 0u64;
    for_each_lone_parent(p.depth, leaves, |block, level, _| {
        let pos = block * p.block + level;
        code |= 1u64 << (p.n - 1 - pos);
    });
    code
}

fn check_subset(s: &[usize], p: &StepUpParams) -> Result<Vec<u64>> {
    if s.len() > p.k {
        return Err(Error::invalid(format!("|s| = {} exceeds k = {}", s.len(), p.k)));
    }
    let mut v: Vec<u64> = Vec::with_capacity(s.len());
    for &x in s {
        if x == 0 || x > p.n_ground {
            return Err(Error::invalid(format!("element {x} outside 1..={}", p.n_ground)));
        }
        v.push(x as u64 - 1);
    }
    v.sort_unstable();
    v.dedup();
    if v.len() != s.len() {
        return Err(Error::invalid("subset has repeated elements"));
    }
    Ok(v)
}

/// `F_1(s)` for `s ⊆ [N]` given by 1-based elements, `|s| <= k`.
pub fn project_f1(s: &[usize], p: &StepUpParams) -> Result<BitVector> {
    let v = check_subset(s, p)?;
    BitVector::from_code(p.n, f1_code(&v, p))
}

/// `F_1` computed the long way: build `T_s` inside the explicit complete
/// tree, decompose it around its skeleton and read off levels from the
/// heap tags. Used to cross-check [`project_f1`].
pub fn project_f1_reference(s: &[usize], p: &StepUpParams) -> Result<BitVector> {
    let v = check_subset(s, p)?;
    let mut out = BitVector::zeros(p.n)?;
    if v.len() < 2 {
        return Ok(out);
    }
    let t = complete_tree(p.depth)?;
    let ts = leaf_generated_subtree(&t, s)?;
    let dec = skeleton_decomposition(&ts)?;
    let level = |tag: u64| 63 - tag.leading_zeros() as usize;
    for a in &dec.root_chain {
        out.set(p.beta(0, level(a.node_tag)), true)?;
    }
    for (i, atts) in dec.edge_attachments.iter().enumerate() {
        for a in atts {
            out.set(p.beta(i + 1, level(a.node_tag)), true)?;
        }
    }
    Ok(out)
}
