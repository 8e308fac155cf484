//! Regions, set chains and the piecewise feedback built from them.

mod chain;
mod feedback;
mod region;

pub use chain::{ChainError, ChainGenerator, SetChain};
pub use feedback::{InnerFeedback, PiecewiseFeedback};
pub use region::{Region, RegionExpr};
