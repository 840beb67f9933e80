//! Shift-graph extractors for zero-fixing sources: `F_1` onto special
//! symbol-fixing sources, searched `F_2` tables, and the loss-less disperser.

mod decompose;
mod disperser;
mod extractor;
mod params;

pub use decompose::*;
pub use disperser::*;
pub use extractor::*;
pub use params::*;
