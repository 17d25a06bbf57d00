//! Conditions, the wrapper translation, erasure and the ACT replay.

mod act;
mod cond;
mod leq;
mod ordinal;
mod wrap;

pub use act::*;
pub use cond::*;
pub use leq::*;
pub use ordinal::*;
pub use wrap::*;
