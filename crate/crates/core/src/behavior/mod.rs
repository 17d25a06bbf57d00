//! Bounded behavior sets under demonic and angelic choice, and inclusion checking.

mod explore;
mod trace;

pub use explore::*;
pub use trace::*;
