//! Ordered binary trees, leaf-generated subtrees and skeletons.
//!
//! Trees live in an arena. Each node keeps a `tag` naming the node it came
//! from, so subtrees carved out of a complete tree can be traced back to
//! levels and positions of the original.

mod skeleton;
mod tree;

pub use skeleton::{
    classify_leaves, inner_edges, reassemble, restricted_tree, skeleton, skeleton_decomposition,
    Attachment, InnerEdge, LeafClassification, RestrictedTree, SkeletonDecomposition,
};
pub use tree::{
    all_shapes, complete_tree, leaf_generated_subtree, random_tree, Node, NodeId, Side, Tree,
};
