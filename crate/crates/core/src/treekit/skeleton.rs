use std::collections::HashMap;

use crate::probcore::Symbol;
use crate::{Error, Result};

use super::tree::{leaf_generated_subtree, NodeId, Side, Tree, TreeBuilder};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeafClassification {
    /// Leaf labels, left to right.
    pub twins: Vec<usize>,
    pub lone_leaves: Vec<usize>,
    pub twin_pairs: Vec<(usize, usize)>,
    /// Node ids in the classified tree, in preorder.
    pub lone_parents: Vec<NodeId>,
    pub twin_parents: Vec<NodeId>,
}

pub fn classify_leaves(t: &Tree) -> LeafClassification {
    let mut c = LeafClassification {
        twins: Vec::new(),
        lone_leaves: Vec::new(),
        twin_pairs: Vec::new(),
        lone_parents: Vec::new(),
        twin_parents: Vec::new(),
    };
    for v in t.preorder() {
        match t.children(v) {
            None => {
                let twin = t.sibling(v).is_some_and(|s| t.is_leaf(s));
                if twin {
                    c.twins.push(t.label(v));
                } else {
                    c.lone_leaves.push(t.label(v));
                }
            }
            Some((l, r)) => match (t.is_leaf(l), t.is_leaf(r)) {
                (true, true) => {
                    c.twin_parents.push(v);
                    c.twin_pairs.push((t.label(l), t.label(r)));
                }
                (true, false) | (false, true) => c.lone_parents.push(v),
                _ => {}
            },
        }
    }
    c
}

/// `Sk(T)`, the subtree generated by the twins.
pub fn skeleton(t: &Tree) -> Result<Tree> {
    if t.size() < 2 {
        return Err(Error::invalid("a single-node tree has no skeleton"));
    }
    leaf_generated_subtree(t, &classify_leaves(t).twins)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InnerEdge {
    pub upper: NodeId,
    pub lower: NodeId,
}

/// Edges of a skeleton not incident to a leaf, numbered by a left-first
/// preorder of their lower endpoints. Position `i - 1` holds `e_i`.
pub fn inner_edges(sk: &Tree) -> Vec<InnerEdge> {
    sk.preorder()
        .into_iter()
        .filter(|&v| v != sk.root() && !sk.is_leaf(v))
        .map(|v| InnerEdge {
            upper: sk.parent(v).expect("non-root"),
            lower: v,
        })
        .collect()
}

/// A lone parent hanging on a skeleton edge or above the skeleton root.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Attachment {
    pub node_tag: u64,
    pub leaf_label: usize,
    pub leaf_tag: u64,
    /// Side of the lone leaf below the attached node.
    pub side: Side,
}

#[derive(Clone, Debug)]
pub struct SkeletonDecomposition {
    pub skeleton: Tree,
    /// `edge_attachments[i - 1]` lists the nodes on `e_i`, top to bottom.
    pub edge_attachments: Vec<Vec<Attachment>>,
    /// Lone parents above the skeleton root, top to bottom.
    pub root_chain: Vec<Attachment>,
}

/// Marks the nodes of `t` that belong to `Sk(t)`.
fn skeleton_members(t: &Tree) -> Vec<bool> {
    let mut twins_below = vec![false; t.node_count()];
    let mut member = vec![false; t.node_count()];
    for &v in t.preorder().iter().rev() {
        match t.children(v) {
            None => {
                let twin = t.sibling(v).is_some_and(|s| t.is_leaf(s));
                twins_below[v] = twin;
                member[v] = twin;
            }
            Some((l, r)) => {
                twins_below[v] = twins_below[l] || twins_below[r];
                member[v] = twins_below[l] && twins_below[r];
            }
        }
    }
    member
}

pub fn skeleton_decomposition(t: &Tree) -> Result<SkeletonDecomposition> {
    let sk = skeleton(t)?;
    let edges = inner_edges(&sk);
    let edge_of: HashMap<u64, usize> = edges
        .iter()
        .enumerate()
        .map(|(i, e)| (sk.tag(e.lower), i))
        .collect();
    let root_tag = sk.tag(sk.root());
    let member = skeleton_members(t);
    let mut dec = SkeletonDecomposition {
        edge_attachments: vec![Vec::new(); edges.len()],
        root_chain: Vec::new(),
        skeleton: sk,
    };
    for v in t.preorder() {
        let Some((l, r)) = t.children(v) else { continue };
        let (leaf, inner, side) = match (t.is_leaf(l), t.is_leaf(r)) {
            (true, false) => (l, r, Side::Left),
            (false, true) => (r, l, Side::Right),
            _ => continue,
        };
        let mut w = inner;
        while !member[w] {
            let (a, b) = t.children(w).expect("non-member nodes below a lone parent are internal");
            w = if t.is_leaf(a) { b } else { a };
        }
        let att = Attachment {
            node_tag: t.tag(v),
            leaf_label: t.label(leaf),
            leaf_tag: t.tag(leaf),
            side,
        };
        if t.tag(w) == root_tag {
            dec.root_chain.push(att);
        } else {
            dec.edge_attachments[edge_of[&t.tag(w)]].push(att);
        }
    }
    Ok(dec)
}

/// Rebuild the tree a decomposition came from.
pub fn reassemble(dec: &SkeletonDecomposition) -> Tree {
    let sk = &dec.skeleton;
    let edge_of: HashMap<NodeId, usize> = inner_edges(sk)
        .iter()
        .enumerate()
        .map(|(i, e)| (e.lower, i))
        .collect();
    let mut b = Tree::builder();
    fn wrap(b: &mut TreeBuilder, mut cur: NodeId, chain: &[Attachment]) -> NodeId {
        for a in chain.iter().rev() {
            let leaf = b.leaf(a.leaf_label, a.leaf_tag);
            cur = match a.side {
                Side::Left => b.internal(leaf, cur, a.node_tag),
                Side::Right => b.internal(cur, leaf, a.node_tag),
            };
        }
        cur
    }
    fn build(
        sk: &Tree,
        w: NodeId,
        dec: &SkeletonDecomposition,
        edge_of: &HashMap<NodeId, usize>,
        b: &mut TreeBuilder,
    ) -> NodeId {
        match sk.children(w) {
            None => b.leaf(sk.label(w), sk.tag(w)),
            Some((l, r)) => {
                let mut kids = [0; 2];
                for (slot, c) in kids.iter_mut().zip([l, r]) {
                    let built = build(sk, c, dec, edge_of, b);
                    *slot = match edge_of.get(&c) {
                        Some(&i) => wrap(b, built, &dec.edge_attachments[i]),
                        None => built,
                    };
                }
                b.internal(kids[0], kids[1], sk.tag(w))
            }
        }
    }
    let top = build(sk, sk.root(), dec, &edge_of, &mut b);
    let root = wrap(&mut b, top, &dec.root_chain);
    b.finish(root)
}

/// `T_σ` together with its free leaves.
#[derive(Clone, Debug)]
pub struct RestrictedTree {
    pub tree: Tree,
    /// Labels of leaves of `T_σ` carrying `*`.
    pub free: Vec<usize>,
}

/// `σ` assigns a symbol to each leaf of `t`, left to right.
pub fn restricted_tree(t: &Tree, sigma: &[Symbol]) -> Result<RestrictedTree> {
    let leaves = t.leaves();
    if sigma.len() != leaves.len() {
        return Err(Error::invalid(format!(
            "restriction has {} symbols for {} leaves",
            sigma.len(),
            leaves.len()
        )));
    }
    let keep: Vec<usize> = leaves
        .iter()
        .zip(sigma)
        .filter(|(_, s)| **s != Symbol::Zero)
        .map(|(l, _)| *l)
        .collect();
    if keep.is_empty() {
        return Err(Error::invalid("restriction fixes every leaf to 0"));
    }
    let free = leaves
        .iter()
        .zip(sigma)
        .filter(|(_, s)| **s == Symbol::Star)
        .map(|(l, _)| *l)
        .collect();
    Ok(RestrictedTree {
        tree: leaf_generated_subtree(t, &keep)?,
        free,
    })
}
