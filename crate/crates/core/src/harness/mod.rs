//! The example corpus, its spec tables, differential testing and the suite driver.

pub mod corpus;
mod depth;
mod diff;
mod models;
mod specs;
mod suite;

pub use depth::*;
pub use diff::*;
pub use models::*;
pub use specs::*;
pub use suite::*;
