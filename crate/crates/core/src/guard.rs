//! Enumeration guards.
//!
//! Every exhaustive routine checks its workload against one of these limits
//! before starting. Setting `ZFX_GUARD_OVERRIDE` to an integer raises every
//! guard to at least that value.

use std::sync::OnceLock;

use serde::Serialize;

use crate::{Error, Result};

pub const ENV_OVERRIDE: &str = "ZFX_GUARD_OVERRIDE";

/// Free positions a single source may have when enumerated (2^30 outcomes).
pub const SOURCE_FREE_BITS: u128 = 30;
/// Depth of an explicitly built complete tree.
pub const TREE_DEPTH: u128 = 30;
/// Node count of any explicit tree.
pub const TREE_NODES: u128 = 1 << 20;
/// Leaves of a tree whose fixing decision tree is enumerated.
pub const FIXING_LEAVES: u128 = 20;
/// Supports enumerated by an exhaustive sweep.
pub const EXHAUSTIVE_SUPPORTS: u128 = 10_000_000;
/// Edges scanned by exhaustive coloring verification.
pub const COLORING_EDGES: u128 = 100_000_000;
/// Vertices for the exact chromatic number search.
pub const CHROMATIC_VERTICES: u128 = 24;
/// Vertices for the k-coloring finder.
pub const COLORING_SEARCH_VERTICES: u128 = 64;
/// Size of a symbol-extractor table domain d^p.
pub const TABLE_DOMAIN: u128 = 1_000_000;
/// Special symbol-fixing sources verified per table.
pub const SYMBOL_SOURCES: u128 = 10_000_000;
/// Subsets enumerated per support in subset-level checks (2^k).
pub const SUBSET_BITS: u128 = 24;
/// Decimal digits of an exactly evaluated big integer.
pub const BIGINT_DIGITS: u128 = 1_000_000;
/// Points in a parameter sweep.
pub const SWEEP_POINTS: u128 = 10_000;

fn override_value() -> Option<u128> {
    static CELL: OnceLock<Option<u128>> = OnceLock::new();
    *CELL.get_or_init(|| {
        std::env::var(ENV_OVERRIDE)
            .ok()
            .and_then(|v| v.trim().parse::<u128>().ok())
    })
}

/// Effective value of a guard after applying the override.
pub fn limit(default: u128) -> u128 {
    match override_value() {
        Some(v) => v.max(default),
        None => default,
    }
}

pub fn check(what: &'static str, requested: u128, default: u128) -> Result<()> {
    let limit = limit(default);
    if requested > limit {
        return Err(Error::ResourceLimit {
            what,
            requested,
            limit,
        });
    }
    Ok(())
}

/// Snapshot of the guards in force, embedded in every report.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct GuardLimits {
    pub source_free_bits: u128,
    pub fixing_leaves: u128,
    pub exhaustive_supports: u128,
    pub coloring_edges: u128,
    pub chromatic_vertices: u128,
    pub coloring_search_vertices: u128,
    pub table_domain: u128,
    pub symbol_sources: u128,
    pub bigint_digits: u128,
    pub sweep_points: u128,
    pub override_value: Option<u128>,
}

impl GuardLimits {
    pub fn current() -> Self {
        GuardLimits {
            source_free_bits: limit(SOURCE_FREE_BITS),
            fixing_leaves: limit(FIXING_LEAVES),
            exhaustive_supports: limit(EXHAUSTIVE_SUPPORTS),
            coloring_edges: limit(COLORING_EDGES),
            chromatic_vertices: limit(CHROMATIC_VERTICES),
            coloring_search_vertices: limit(COLORING_SEARCH_VERTICES),
            table_domain: limit(TABLE_DOMAIN),
            symbol_sources: limit(SYMBOL_SOURCES),
            bigint_digits: limit(BIGINT_DIGITS),
            sweep_points: limit(SWEEP_POINTS),
            override_value: override_value(),
        }
    }
}
