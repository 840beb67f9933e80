use std::collections::HashMap;
use std::fmt;

use rand::Rng;

use crate::guard;
use crate::{Error, Result};

pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub children: Option<(NodeId, NodeId)>,
    pub parent: Option<NodeId>,
    /// Identity of the node in the tree it was carved from. Complete trees
    /// use heap numbering (root 1, children `2t` and `2t+1`).
    pub tag: u64,
    /// Leaf label; `0` for internal nodes.
    pub label: usize,
}

/// An ordered binary tree stored in an arena. Every internal node has two
/// children.
#[derive(Clone, PartialEq, Eq)]
pub struct Tree {
    nodes: Vec<Node>,
    root: NodeId,
}

/// Which child of its parent a node is.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Tree {
    pub fn single(label: usize, tag: u64) -> Self {
        Tree {
            nodes: vec![Node {
                children: None,
                parent: None,
                tag,
                label,
            }],
            root: 0,
        }
    }

    pub(crate) fn builder() -> TreeBuilder {
        TreeBuilder { nodes: Vec::new() }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_leaf(&self, id: NodeId) -> bool {
        self.nodes[id].children.is_none()
    }

    pub fn children(&self, id: NodeId) -> Option<(NodeId, NodeId)> {
        self.nodes[id].children
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id].parent
    }

    pub fn tag(&self, id: NodeId) -> u64 {
        self.nodes[id].tag
    }

    pub fn label(&self, id: NodeId) -> usize {
        self.nodes[id].label
    }

    pub fn side(&self, id: NodeId) -> Option<Side> {
        let p = self.nodes[id].parent?;
        let (l, _) = self.nodes[p].children.expect("parent is internal");
        Some(if l == id { Side::Left } else { Side::Right })
    }

    pub fn sibling(&self, id: NodeId) -> Option<NodeId> {
        let p = self.nodes[id].parent?;
        let (l, r) = self.nodes[p].children.expect("parent is internal");
        Some(if l == id { r } else { l })
    }

    /// Node ids in preorder, left child first.
    pub fn preorder(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            out.push(v);
            if let Some((l, r)) = self.nodes[v].children {
                stack.push(r);
                stack.push(l);
            }
        }
        out
    }

    /// Leaf ids, left to right.
    pub fn leaf_ids(&self) -> Vec<NodeId> {
        self.preorder()
            .into_iter()
            .filter(|&v| self.is_leaf(v))
            .collect()
    }

    /// Leaf labels, left to right.
    pub fn leaves(&self) -> Vec<usize> {
        self.leaf_ids().into_iter().map(|v| self.nodes[v].label).collect()
    }

    /// `|T|`, the number of leaves.
    pub fn size(&self) -> usize {
        self.nodes.iter().filter(|n| n.children.is_none()).count()
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Distance from the root.
    pub fn depth(&self, mut id: NodeId) -> usize {
        let mut d = 0;
        while let Some(p) = self.nodes[id].parent {
            id = p;
            d += 1;
        }
        d
    }

    pub fn find_tag(&self, tag: u64) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.tag == tag)
    }

    pub fn leaf_by_label(&self, label: usize) -> Option<NodeId> {
        self.nodes
            .iter()
            .position(|n| n.children.is_none() && n.label == label)
    }

    /// Structural equality that ignores arena layout but compares shape,
    /// labels and tags.
    pub fn same_as(&self, other: &Tree) -> bool {
        fn eq(a: &Tree, x: NodeId, b: &Tree, y: NodeId) -> bool {
            let (nx, ny) = (a.node(x), b.node(y));
            if nx.tag != ny.tag || nx.label != ny.label {
                return false;
            }
            match (nx.children, ny.children) {
                (None, None) => true,
                (Some((l1, r1)), Some((l2, r2))) => eq(a, l1, b, l2) && eq(a, r1, b, r2),
                _ => false,
            }
        }
        eq(self, self.root, other, other.root)
    }

    /// Shape-only equality.
    pub fn same_shape(&self, other: &Tree) -> bool {
        fn eq(a: &Tree, x: NodeId, b: &Tree, y: NodeId) -> bool {
            match (a.children(x), b.children(y)) {
                (None, None) => true,
                (Some((l1, r1)), Some((l2, r2))) => eq(a, l1, b, l2) && eq(a, r1, b, r2),
                _ => false,
            }
        }
        eq(self, self.root, other, other.root)
    }

    /// Copy of the tree with leaves relabeled `1..=|T|` left to right.
    pub fn relabeled(&self) -> Tree {
        let mut t = self.clone();
        for (i, v) in self.leaf_ids().into_iter().enumerate() {
            t.nodes[v].label = i + 1;
        }
        t
    }

    /// Nested parenthesis form, e.g. `((1,2),3)`.
    pub fn to_parens(&self) -> String {
        let mut s = String::new();
        self.write_parens(self.root, &mut s);
        s
    }

    fn write_parens(&self, v: NodeId, out: &mut String) {
        match self.nodes[v].children {
            None => out.push_str(&self.nodes[v].label.to_string()),
            Some((l, r)) => {
                out.push('(');
                self.write_parens(l, out);
                out.push(',');
                self.write_parens(r, out);
                out.push(')');
            }
        }
    }

    /// Parse the parenthesis form. Tags are assigned in preorder from 1.
    pub fn parse(s: &str) -> Result<Tree> {
        let bytes: Vec<u8> = s.bytes().filter(|c| !c.is_ascii_whitespace()).collect();
        let mut b = Tree::builder();
        let mut pos = 0;
        let root = parse_node(&bytes, &mut pos, &mut b)?;
        if pos != bytes.len() {
            return Err(Error::Parse(format!("trailing input in {s:?}")));
        }
        let t = b.finish(root);
        let mut seen = HashMap::new();
        for l in t.leaves() {
            if seen.insert(l, ()).is_some() {
                return Err(Error::Parse(format!("duplicate leaf label {l}")));
            }
        }
        Ok(t)
    }
}

fn parse_node(s: &[u8], pos: &mut usize, b: &mut TreeBuilder) -> Result<NodeId> {
    let err = |p: usize| Error::Parse(format!("unexpected input at byte {p}"));
    match s.get(*pos) {
        Some(b'(') => {
            *pos += 1;
            let id = b.push_internal_placeholder();
            let l = parse_node(s, pos, b)?;
            if s.get(*pos) != Some(&b',') {
                return Err(err(*pos));
            }
            *pos += 1;
            let r = parse_node(s, pos, b)?;
            if s.get(*pos) != Some(&b')') {
                return Err(err(*pos));
            }
            *pos += 1;
            b.set_children(id, l, r);
            Ok(id)
        }
        Some(c) if c.is_ascii_digit() => {
            let start = *pos;
            while s.get(*pos).is_some_and(|c| c.is_ascii_digit()) {
                *pos += 1;
            }
            let label: usize = std::str::from_utf8(&s[start..*pos])
                .ok()
                .and_then(|x| x.parse().ok())
                .filter(|&x| x > 0)
                .ok_or_else(|| err(start))?;
            Ok(b.leaf(label, b.len() as u64 + 1))
        }
        _ => Err(err(*pos)),
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_parens())
    }
}

impl fmt::Debug for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tree({})", self.to_parens())
    }
}

pub(crate) struct TreeBuilder {
    nodes: Vec<Node>,
}

impl TreeBuilder {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf(&mut self, label: usize, tag: u64) -> NodeId {
        self.nodes.push(Node {
            children: None,
            parent: None,
            tag,
            label,
        });
        self.nodes.len() - 1
    }

    pub fn internal(&mut self, l: NodeId, r: NodeId, tag: u64) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(Node {
            children: Some((l, r)),
            parent: None,
            tag,
            label: 0,
        });
        self.nodes[l].parent = Some(id);
        self.nodes[r].parent = Some(id);
        id
    }

    fn push_internal_placeholder(&mut self) -> NodeId {
        let tag = self.nodes.len() as u64 + 1;
        self.leaf(0, tag)
    }

    fn set_children(&mut self, id: NodeId, l: NodeId, r: NodeId) {
        self.nodes[id].children = Some((l, r));
        self.nodes[l].parent = Some(id);
        self.nodes[r].parent = Some(id);
    }

    pub fn finish(self, root: NodeId) -> Tree {
        Tree {
            nodes: self.nodes,
            root,
        }
    }
}

/// The complete tree of the given depth. Leaves are labeled `1..=2^depth`.
pub fn complete_tree(depth: usize) -> Result<Tree> {
    guard::check("complete tree depth", depth as u128, guard::TREE_DEPTH)?;
    guard::check(
        "tree nodes",
        (1u128 << (depth + 1)) - 1,
        guard::TREE_NODES,
    )?;
    let mut b = Tree::builder();
    fn build(b: &mut TreeBuilder, tag: u64, level: usize, depth: usize) -> NodeId {
        if level == depth {
            let label = (tag - (1u64 << depth)) as usize + 1;
            return b.leaf(label, tag);
        }
        let l = build(b, 2 * tag, level + 1, depth);
        let r = build(b, 2 * tag + 1, level + 1, depth);
        b.internal(l, r, tag)
    }
    let root = build(&mut b, 1, 0, depth);
    Ok(b.finish(root))
}

/// `T_X`: the subtree generated by the leaves with labels in `x` under
/// least common ancestors, with unary paths contracted. Surviving nodes keep
/// their tags and labels.
pub fn leaf_generated_subtree(t: &Tree, x: &[usize]) -> Result<Tree> {
    if x.is_empty() {
        return Err(Error::invalid("leaf set must be nonempty"));
    }
    let wanted: HashMap<usize, ()> = x.iter().map(|&l| (l, ())).collect();
    let present = t
        .leaves()
        .into_iter()
        .filter(|l| wanted.contains_key(l))
        .count();
    if present != wanted.len() {
        return Err(Error::invalid("leaf set is not a subset of the tree's leaves"));
    }
    let mut b = Tree::builder();
    fn build(t: &Tree, v: NodeId, keep: &HashMap<usize, ()>, b: &mut TreeBuilder) -> Option<NodeId> {
        let n = t.node(v);
        match n.children {
            None => keep.contains_key(&n.label).then(|| b.leaf(n.label, n.tag)),
            Some((l, r)) => match (build(t, l, keep, b), build(t, r, keep, b)) {
                (Some(a), Some(c)) => Some(b.internal(a, c, n.tag)),
                (a, c) => a.or(c),
            },
        }
    }
    let root = build(t, t.root(), &wanted, &mut b).expect("nonempty");
    Ok(b.finish(root))
}

/// A uniformly random split tree with leaves labeled `1..=leaves`: each
/// internal node splits its leaf count uniformly.
pub fn random_tree<R: Rng + ?Sized>(leaves: usize, rng: &mut R) -> Result<Tree> {
    if leaves == 0 {
        return Err(Error::invalid("a tree needs at least one leaf"));
    }
    guard::check("tree nodes", 2 * leaves as u128 - 1, guard::TREE_NODES)?;
    let mut b = Tree::builder();
    let mut next_label = 1;
    fn build<R: Rng + ?Sized>(b: &mut TreeBuilder, n: usize, next: &mut usize, rng: &mut R) -> NodeId {
        if n == 1 {
            *next += 1;
            let tag = b.len() as u64 + 1;
            return b.leaf(*next - 1, tag);
        }
        let k = rng.random_range(1..n);
        let l = build(b, k, next, rng);
        let r = build(b, n - k, next, rng);
        let tag = b.len() as u64 + 1;
        b.internal(l, r, tag)
    }
    let root = build(&mut b, leaves, &mut next_label, rng);
    Ok(b.finish(root))
}

/// Every tree shape with the given number of leaves (Catalan many), leaves
/// labeled left to right.
pub fn all_shapes(leaves: usize) -> Vec<Tree> {
    fn shapes(n: usize, memo: &mut HashMap<usize, Vec<String>>) -> Vec<String> {
        if let Some(v) = memo.get(&n) {
            return v.clone();
        }
        let out = if n == 1 {
            vec!["x".to_string()]
        } else {
            let mut out = Vec::new();
            for k in 1..n {
                for a in shapes(k, memo) {
                    for c in shapes(n - k, memo) {
                        out.push(format!("({a},{c})"));
                    }
                }
            }
            out
        };
        memo.insert(n, out.clone());
        out
    }
    if leaves == 0 {
        return Vec::new();
    }
    let mut memo = HashMap::new();
    shapes(leaves, &mut memo)
        .into_iter()
        .map(|s| {
            let mut i = 0;
            let labeled: String = s
                .split('x')
                .enumerate()
                .map(|(j, part)| {
                    if j == 0 {
                        part.to_string()
                    } else {
                        i += 1;
                        format!("{i}{part}")
                    }
                })
                .collect();
            Tree::parse(&labeled).expect("generated shape parses")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_sizes() {
        let t0 = complete_tree(0).unwrap();
        assert_eq!((t0.size(), t0.node_count()), (1, 1));
        let t1 = complete_tree(1).unwrap();
        assert_eq!(t1.to_parens(), "(1,2)");
        let t3 = complete_tree(3).unwrap();
        assert_eq!(t3.size(), 8);
        assert_eq!(t3.node_count() - t3.size(), 7);
        assert_eq!(t3.edge_count(), 2 * 8 - 2);
        assert!(complete_tree(31).is_err());
    }

    #[test]
    fn parens_roundtrip() {
        for s in ["1", "(1,2)", "((1,2),(3,4))", "(1,(2,(3,4)))"] {
            assert_eq!(Tree::parse(s).unwrap().to_parens(), s);
        }
        for bad in ["", "(1,2", "(1;2)", "(1,1)", "(0,1)", "(1,2)3"] {
            assert!(Tree::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn subtree_examples() {
        let t = complete_tree(2).unwrap();
        assert!(leaf_generated_subtree(&t, &[1, 2, 3, 4]).unwrap().same_as(&t));
        let one = leaf_generated_subtree(&t, &[3]).unwrap();
        assert_eq!(one.node_count(), 1);
        let ac = leaf_generated_subtree(&t, &[1, 3]).unwrap();
        assert_eq!(ac.to_parens(), "(1,3)");
        assert_eq!(ac.tag(ac.root()), 1);
        assert!(leaf_generated_subtree(&t, &[]).is_err());
        assert!(leaf_generated_subtree(&t, &[9]).is_err());
    }

    #[test]
    fn shape_counts_are_catalan() {
        let counts: Vec<usize> = (1..=8).map(|n| all_shapes(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 5, 14, 42, 132, 429]);
        for t in all_shapes(5) {
            assert_eq!(t.leaves(), vec![1, 2, 3, 4, 5]);
        }
    }
}
