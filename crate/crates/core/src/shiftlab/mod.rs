//! Shift graphs `S(n, l)` and their explicit colorings.

mod coloring;
mod graph;
mod search;

pub use coloring::*;
pub use graph::*;
pub use search::*;
