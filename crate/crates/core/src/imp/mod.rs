//! The IMP language: syntax, parser, printer, embedding and the memory module.

mod ast;
mod embed;
mod mem;
mod parser;
mod printer;

pub use ast::*;
pub use embed::*;
pub use mem::*;
pub use parser::*;
pub use printer::*;

use crate::ems::ModuleSet;

/// Parses and embeds several sources, failing on the first syntax error.
pub fn load_sources(srcs: &[&str]) -> Result<ModuleSet, SyntaxError> {
    let mods = srcs.iter().map(|s| parse(s).map(|m| embed(&m))).collect::<Result<Vec<_>, _>>()?;
    Ok(ModuleSet::new(mods))
}

/// Canonical JSON dump of the AST.
pub fn ast_json(m: &ImpModule) -> String {
    serde_json::to_string_pretty(m).expect("AST serializes")
}
