//! Executable module semantics: values, events, computations, modules and the loader.

mod comp;
mod domain;
mod module;
mod run;
mod system;
mod value;

pub use comp::*;
pub use domain::*;
pub use module::*;
pub use run::*;
pub use system::*;
pub use value::*;
