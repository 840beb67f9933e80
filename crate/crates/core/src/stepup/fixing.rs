use serde::Serialize;

use crate::guard;
use crate::probcore::{
    BitFixingSource, ConvexCombination, Distribution, Restriction, Source, Space,
};
use crate::treekit::{NodeId, Tree};
use crate::{Error, Result};

use super::f1::{for_each_lone_parent, lca_level};
use super::params::StepUpParams;

/// Default good-outcome threshold `δ̂`.
pub const DEFAULT_DELTA_HAT: f64 = 1.0 / 160.0;

/// A tree given by the positions of its leaves in a complete tree. Any
/// ordered binary tree embeds this way (see [`FixingTree::from_tree`]).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixingTree {
    depth: usize,
    leaves: Vec<u64>,
}

impl FixingTree {
    /// `leaves` must be sorted, distinct, and below `2^depth`.
    pub fn new(depth: usize, leaves: Vec<u64>) -> Result<Self> {
        if leaves.is_empty() || depth > 63 {
            return Err(Error::invalid("need a nonempty leaf set and depth <= 63"));
        }
        guard::check("fixing tree leaves", leaves.len() as u128, 64)?;
        if leaves.windows(2).any(|w| w[0] >= w[1]) || *leaves.last().unwrap() >> depth != 0 {
            return Err(Error::invalid("leaves must be sorted, distinct and in range"));
        }
        Ok(FixingTree { depth, leaves })
    }

    /// `T_V` inside the complete tree of the step-up parameters, `V` given
    /// by 1-based elements.
    pub fn from_support(p: &StepUpParams, support: &[usize]) -> Result<Self> {
        let mut leaves: Vec<u64> = support.iter().map(|&x| x as u64 - 1).collect();
        if support.iter().any(|&x| x == 0 || x > p.n_ground) {
            return Err(Error::invalid("support element outside [N]"));
        }
        leaves.sort_unstable();
        Self::new(p.depth, leaves)
    }

    /// Embed an arbitrary tree by reading each leaf's root path as bits.
    pub fn from_tree(t: &Tree) -> Result<Self> {
        let mut paths: Vec<(u64, usize)> = Vec::new();
        fn walk(t: &Tree, v: NodeId, bits: u64, len: usize, out: &mut Vec<(u64, usize)>) {
            match t.children(v) {
                None => out.push((bits, len)),
                Some((l, r)) => {
                    walk(t, l, bits << 1, len + 1, out);
                    walk(t, r, bits << 1 | 1, len + 1, out);
                }
            }
        }
        walk(t, t.root(), 0, 0, &mut paths);
        let depth = paths.iter().map(|p| p.1).max().unwrap_or(0);
        if depth > 63 {
            return Err(Error::invalid("tree too deep to embed"));
        }
        let leaves = paths.iter().map(|&(b, l)| b << (depth - l)).collect();
        Self::new(depth, leaves)
    }

    pub fn k(&self) -> usize {
        self.leaves.len()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn leaves(&self) -> &[u64] {
        &self.leaves
    }

    /// Leaf indices selected by `mask` (bit `i` is leaf `i`).
    fn alive(&self, mask: u64, out: &mut Vec<usize>) {
        out.clear();
        out.extend(crate::combin::mask_elems(mask));
    }

    /// Mask of the leaves that are twins in the subtree generated by
    /// `alive` (sorted leaf indices).
    fn twins_of(&self, alive: &[usize]) -> u64 {
        let m = alive.len();
        if m < 2 {
            return 0;
        }
        let mut g = [0usize; 64];
        for t in 0..m - 1 {
            g[t] = lca_level(self.depth, self.leaves[alive[t]], self.leaves[alive[t + 1]]);
        }
        let mut twins = 0u64;
        for t in 0..m - 1 {
            let left_leaf = t == 0 || g[t - 1] < g[t];
            let right_leaf = t + 2 == m || g[t + 1] < g[t];
            if left_leaf && right_leaf {
                twins |= 1 << alive[t] | 1 << alive[t + 1];
            }
        }
        twins
    }
}

/// Which case of the fixing analysis a tree falls into.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FixingCase {
    /// At least `k/10` lone leaves.
    LoneRich,
    /// Few lone leaves, but the twin-parent tree `T'` has at least `3k/10`
    /// lone leaves.
    TwinParentsLoneRich,
    /// Otherwise; twin quadruples are queried first.
    Quadruples,
}

/// Query order for the skeleton-fixing procedure: starred twins in
/// `priority` first, then any starred twin, leftmost first within each.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FixingPolicy {
    pub case: FixingCase,
    pub priority: u64,
}

impl FixingPolicy {
    pub fn for_tree(tree: &FixingTree) -> Self {
        let k = tree.k();
        let all: Vec<usize> = (0..k).collect();
        let twins = tree.twins_of(&all);
        let lone = if k < 2 { 0 } else { k - twins.count_ones() as usize };
        if 10 * lone >= k {
            return FixingPolicy {
                case: FixingCase::LoneRich,
                priority: 0,
            };
        }
        // T' = Sk(T) minus the twins: its leaves are the twin parents. Record
        // for every twin parent whether its sibling in Sk(T) is also a twin
        // parent, using the consecutive-gap structure.
        let m = k;
        let g: Vec<usize> = (0..m - 1)
            .map(|t| lca_level(tree.depth, tree.leaves[t], tree.leaves[t + 1]))
            .collect();
        #[derive(Clone, Copy, PartialEq)]
        enum Kind {
            Twin,
            Lone,
            Branch,
        }
        let kind = |t: usize| {
            let l = t == 0 || g[t - 1] < g[t];
            let r = t + 1 == g.len() || g[t + 1] < g[t];
            match (l, r) {
                (true, true) => Kind::Twin,
                (false, false) => Kind::Branch,
                _ => Kind::Lone,
            }
        };
        // Cartesian-tree children over gaps.
        let mut left = vec![usize::MAX; g.len()];
        let mut right = vec![usize::MAX; g.len()];
        let mut stack: Vec<usize> = Vec::new();
        for t in 0..g.len() {
            let mut last = usize::MAX;
            while stack.last().is_some_and(|&s| g[s] > g[t]) {
                last = stack.pop().unwrap();
            }
            left[t] = last;
            if let Some(&s) = stack.last() {
                right[s] = t;
            }
            stack.push(t);
        }
        // Descend from an internal gap through lone parents to the first
        // skeleton node.
        let settle = |mut c: usize| {
            while kind(c) == Kind::Lone {
                c = if left[c] == usize::MAX { right[c] } else { left[c] };
            }
            c
        };
        let mut lone_in_t_prime = 0u64; // twin-parent gaps, as a gap mask
        let mut twin_in_t_prime = 0u64;
        for w in 0..g.len() {
            if kind(w) != Kind::Branch {
                continue;
            }
            let a = settle(left[w]);
            let b = settle(right[w]);
            for (x, y) in [(a, b), (b, a)] {
                if kind(x) == Kind::Twin {
                    if kind(y) == Kind::Twin {
                        twin_in_t_prime |= 1 << x;
                    } else {
                        lone_in_t_prime |= 1 << x;
                    }
                }
            }
        }
        let twin_leaves = |gaps: u64| {
            crate::combin::mask_elems(gaps).fold(0u64, |acc, t| acc | 1 << t | 1 << (t + 1))
        };
        if 10 * lone_in_t_prime.count_ones() as usize >= 3 * k {
            FixingPolicy {
                case: FixingCase::TwinParentsLoneRich,
                priority: twin_leaves(lone_in_t_prime),
            }
        } else {
            FixingPolicy {
                case: FixingCase::Quadruples,
                priority: twin_leaves(twin_in_t_prime),
            }
        }
    }

    /// The next leaf to query under restriction `(ones, stars)`, if any.
    pub fn next_query(&self, tree: &FixingTree, ones: u64, stars: u64) -> Option<usize> {
        let mut alive = Vec::with_capacity(tree.k());
        tree.alive(ones | stars, &mut alive);
        let open = tree.twins_of(&alive) & stars;
        if open == 0 {
            return None;
        }
        let pick = if open & self.priority != 0 {
            open & self.priority
        } else {
            open
        };
        Some(pick.trailing_zeros() as usize)
    }
}

/// A leaf of the fixing decision tree. Masks index leaves of `T_V` from the
/// left, bit `i` for leaf `i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixingOutcome {
    pub ones: u64,
    pub stars: u64,
    pub k: usize,
    pub weight: f64,
    pub free_lone_count: usize,
    pub good: bool,
}

impl FixingOutcome {
    pub fn fixed_count(&self) -> usize {
        self.k - self.stars.count_ones() as usize
    }

    /// `ρ` as a string over the leaves of `T_V`, leftmost leaf first.
    pub fn restriction(&self) -> Restriction {
        let rev = |m: u64| (0..self.k).fold(0u64, |acc, i| acc | (m >> i & 1) << (self.k - 1 - i));
        Restriction::from_masks(self.k, rev(self.ones), rev(self.stars)).expect("disjoint masks")
    }
}

fn free_lone_count(tree: &FixingTree, ones: u64, stars: u64) -> usize {
    let mut alive = Vec::new();
    tree.alive(ones | stars, &mut alive);
    if alive.len() < 2 {
        return 0;
    }
    (stars & !tree.twins_of(&alive)).count_ones() as usize
}

fn outcome(tree: &FixingTree, ones: u64, stars: u64, delta_hat: f64) -> FixingOutcome {
    let k = tree.k();
    let free = free_lone_count(tree, ones, stars);
    FixingOutcome {
        ones,
        stars,
        k,
        weight: 0.5f64.powi((k - stars.count_ones() as usize) as i32),
        free_lone_count: free,
        good: free as f64 >= delta_hat * k as f64,
    }
}

/// Run the fixing procedure with explicit coins (`true` sets a leaf to 1).
/// Returns the outcome and the number of coins used.
pub fn skeleton_fixing(
    tree: &FixingTree,
    policy: &FixingPolicy,
    coins: &[bool],
    delta_hat: f64,
) -> Result<(FixingOutcome, usize)> {
    let k = tree.k();
    if k < 2 {
        return Err(Error::invalid("skeleton fixing needs at least two leaves"));
    }
    let mut ones = 0u64;
    let mut stars = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
    let mut used = 0;
    while let Some(q) = policy.next_query(tree, ones, stars) {
        let coin = *coins
            .get(used)
            .ok_or_else(|| Error::invalid("coin sequence exhausted"))?;
        used += 1;
        stars &= !(1 << q);
        if coin {
            ones |= 1 << q;
        }
    }
    Ok((outcome(tree, ones, stars, delta_hat), used))
}

/// Every leaf of the fixing decision tree, in depth-first order (0 branch
/// first).
pub fn enumerate_fixings(tree: &FixingTree, delta_hat: f64) -> Result<Vec<FixingOutcome>> {
    let k = tree.k();
    guard::check("fixing tree leaves", k as u128, guard::FIXING_LEAVES)?;
    if k < 2 {
        return Err(Error::invalid("skeleton fixing needs at least two leaves"));
    }
    let policy = FixingPolicy::for_tree(tree);
    let mut out = Vec::new();
    let mut stack = vec![(0u64, (1u64 << k) - 1)];
    while let Some((ones, stars)) = stack.pop() {
        match policy.next_query(tree, ones, stars) {
            None => out.push(outcome(tree, ones, stars, delta_hat)),
            Some(q) => {
                let s = stars & !(1 << q);
                stack.push((ones | 1 << q, s));
                stack.push((ones, s));
            }
        }
    }
    Ok(out)
}

/// The `F_1` image of all extensions of a final restriction: stars at the
/// free lone parents, ones at lone parents whose leaf is fixed to 1.
pub fn image_restriction(
    tree: &FixingTree,
    p: &StepUpParams,
    ones: u64,
    stars: u64,
) -> Restriction {
    let mut alive = Vec::new();
    tree.alive(ones | stars, &mut alive);
    let leaves: Vec<u64> = alive.iter().map(|&i| tree.leaves[i]).collect();
    let (mut r_ones, mut r_stars) = (0u64, 0u64);
    for_each_lone_parent(tree.depth, &leaves, |block, level, leaf| {
        let bit = 1u64 << (p.n - 1 - (block * p.block + level));
        if stars >> alive[leaf] & 1 == 1 {
            r_stars |= bit;
        } else {
            r_ones |= bit;
        }
    });
    Restriction::from_masks(p.n, r_ones, r_stars).expect("lone parents map injectively")
}

/// The decomposition of `F_1(X)` for a zero-fixing source `X` into
/// bit-fixing sources on `[n]`.
#[derive(Clone, Debug)]
pub struct StepUpDecomposition {
    /// Good parts, with the bad outcomes' total weight as residual.
    pub combination: ConvexCombination,
    /// The bad parts themselves, so the residual can be mixed back in.
    pub residual_parts: Vec<(f64, Source)>,
    pub outcomes: Vec<FixingOutcome>,
}

impl StepUpDecomposition {
    /// Normalized mixture of the residual parts, if any.
    pub fn residual_distribution(&self, space: Space) -> Result<Option<Distribution>> {
        let w = self.combination.residual_weight;
        if w == 0.0 {
            return Ok(None);
        }
        let dists = self
            .residual_parts
            .iter()
            .map(|(_, s)| crate::probcore::source_distribution(s))
            .collect::<Result<Vec<_>>>()?;
        let parts: Vec<(f64, &Distribution)> = self
            .residual_parts
            .iter()
            .zip(&dists)
            .map(|((pw, _), d)| (pw / w, d))
            .collect();
        crate::probcore::mix_distributions(space, &parts).map(Some)
    }

    /// Sum of all part weights, good and bad.
    pub fn total_weight(&self) -> f64 {
        self.combination.part_weight() + self.combination.residual_weight
    }
}

pub fn decompose_source(
    support: &[usize],
    p: &StepUpParams,
    delta_hat: f64,
) -> Result<StepUpDecomposition> {
    if support.len() != p.k {
        return Err(Error::invalid(format!(
            "support has {} elements, expected k = {}",
            support.len(),
            p.k
        )));
    }
    let tree = FixingTree::from_support(p, support)?;
    let outcomes = enumerate_fixings(&tree, delta_hat)?;
    let mut good = Vec::new();
    let mut bad = Vec::new();
    let mut residual = 0.0;
    for o in &outcomes {
        let src = Source::BitFixing(BitFixingSource::new(image_restriction(
            &tree, p, o.ones, o.stars,
        )));
        if o.good {
            good.push((o.weight, src));
        } else {
            residual += o.weight;
            bad.push((o.weight, src));
        }
    }
    let combination = ConvexCombination::new(
        good,
        residual,
        format!("fixings with fewer than {delta_hat}*k free lone leaves"),
    )?;
    Ok(StepUpDecomposition {
        combination,
        residual_parts: bad,
        outcomes,
    })
}
