//! Executable module semantics with resource-conditioned specifications.
//!
//! Modules are written against an event interface (`ems`), specifications are
//! compiled into wrapper code (`spc`), and closed systems are compared through
//! bounded behavior sets (`behavior`).

pub mod behavior;
pub mod ems;
pub mod harness;
pub mod imp;
pub mod pcm;
pub mod spc;

pub use ems::{AnyValue, ChoiceDomain, Computation, Event, Module, ModuleSet};
pub use pcm::{RProp, Resource};
pub use spc::{Depth, Ordinal};
