//! Partial commutative monoids, resource predicates and frame-preserving updates.

mod finite;
mod fpu;
pub mod laws;
mod registry;
mod resource;
mod rprop;
pub mod sigma;

pub use finite::{finite_pcm, finite_pcm_names, FinitePcm};
pub use fpu::{is_fpu, is_fpu_exhaustive, UpdateRule, RULES};
pub use registry::{sample_component, ComponentKind, SigmaRegistry};
pub use resource::*;
pub use rprop::{eval_rprop, Binder, Extractor, RProp};
