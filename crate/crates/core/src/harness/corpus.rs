//! Built-in IMP sources and small AST transforms over them.

use crate::ems::Module;
use crate::imp::{embed, parse, seq, ImpModule, Stmt};

macro_rules! corpus {
    ($($name:literal),* $(,)?) => {
        pub const SOURCES: &[(&str, &str)] = &[$(($name, include_str!(concat!("../../corpus/", $name, ".imp")))),*];
    };
}

corpus!(
    "ad", "ad_abs", "app", "app_abs", "app_mid", "app_mutant", "app_probe", "cannon", "cannon_abs", "main_cannon", "main_cannon_abs",
    "map", "mw1", "mw2", "once", "once_abs", "rp", "sc", "test1", "test2",
);

pub fn source(name: &str) -> Option<&'static str> {
    SOURCES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Parses a built-in source. Panics on unknown names.
pub fn corpus_module(name: &str) -> ImpModule {
    let src = source(name).unwrap_or_else(|| panic!("no corpus source {name}"));
    parse(src).unwrap_or_else(|e| panic!("corpus {name}: {e}"))
}

pub fn corpus_embedded(name: &str) -> Module {
    embed(&corpus_module(name))
}

/// The Cannon client, firing `shots` times.
pub fn cannon_main(abstract_side: bool, shots: u32) -> ImpModule {
    let name = if abstract_side { "main_cannon_abs" } else { "main_cannon" };
    let src = source(name).expect("cannon client").replace("NUM_FIRE", &shots.to_string());
    parse(&src).expect("cannon client parses")
}

/// Replaces `while (true) body` in `main` by `k` copies of `body`.
pub fn unroll_main(m: &ImpModule, k: usize) -> ImpModule {
    let mut out = m.clone();
    for f in out.funs.iter_mut().filter(|f| f.name == "main") {
        f.body = unroll(&f.body, k);
    }
    out
}

fn unroll(s: &Stmt, k: usize) -> Stmt {
    match s {
        Stmt::While(crate::imp::Expr::Int(c), body) if *c != 0 => seq(vec![(**body).clone(); k]),
        Stmt::Seq(ss) => seq(ss.iter().map(|s| unroll(s, k)).collect()),
        Stmt::If(c, t, e) => Stmt::If(c.clone(), Box::new(unroll(t, k)), Box::new(unroll(e, k))),
        other => other.clone(),
    }
}

/// Replaces `pattern` by `with` in a built-in source before parsing.
pub fn patched(name: &str, pattern: &str, with: &str) -> ImpModule {
    let src = source(name).expect("corpus source");
    assert!(src.contains(pattern), "{name} has no {pattern:?}");
    parse(&src.replace(pattern, with)).expect("patched source parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_sources_parse() {
        for (n, _) in SOURCES {
            if !n.starts_with("main_cannon") {
                corpus_module(n);
            }
        }
        assert_eq!(cannon_main(false, 2).funs[0].name, "main");
    }

    #[test]
    fn unroll_replaces_the_loop() {
        let m = unroll_main(&corpus_module("mw1"), 2);
        let Stmt::Seq(body) = &m.funs[0].body else { panic!() };
        assert_eq!(body.len(), 5);
        assert_eq!(body[3], body[4]);
        assert!(!crate::imp::print_module(&m).contains("while (1)"));
    }
}
