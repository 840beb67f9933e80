//! Deterministic extractors for zero-fixing sources.
//!
//! Two constructions are provided. The tree construction ([`stepup`]) projects
//! subsets of the leaves of a complete binary tree onto a much shorter bit
//! string and hands the result to a bit-fixing extractor. The shift-graph
//! construction ([`symfix`]) colors consecutive blocks of a subset with a
//! proper coloring of a shift graph ([`shiftlab`]) and feeds the color string
//! to a searched symbol-fixing extractor. [`bounds`] implements the greedy
//! homogenization procedure behind the entropy ceiling, and [`probcore`] holds
//! the exact distribution arithmetic everything is verified with.
//!
//! All verification is exhaustive enumeration at small parameters. Large
//! enumerations run on [`par::Exec`], which is rayon-backed when the
//! `parallel` feature is enabled and sequential otherwise; results are
//! bitwise identical either way.

pub mod bounds;
pub mod combin;
pub mod error;
pub mod guard;
pub mod par;
pub mod probcore;
pub mod rng;
pub mod shiftlab;
pub mod stepup;
pub mod symfix;
pub mod treekit;

pub use error::{Error, Result};
pub use par::{Exec, Mode};
