mod derivative;
mod oracle;
mod tower;

pub use derivative::*;
pub use oracle::*;
pub use tower::*;
