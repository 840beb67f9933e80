//! Sources, exact distributions and the arithmetic on them.
//!
//! Distributions are sparse and carry their outcome [`Space`]; all masses are
//! `f64`. Source weights are dyadic, so at the sizes the guards allow the
//! sums here are exact.

mod bits;
mod dist;
mod mixture;
mod source;

pub use bits::{full_mask, pos_bit, BitVector, Restriction, Symbol, MAX_LEN};
pub use dist::{
    entropy, pushforward, stat_distance, symbol_code, symbols_of, uniform_distribution,
    Distribution, Space, SUM_TOL,
};
pub use mixture::{extractor_error, mix, mix_distributions, ConvexCombination};
pub use source::{
    source_distribution, BitFixingSource, Source, SpecialSymbolFixingSource, SymbolEntry,
    ZeroFixingSource,
};
