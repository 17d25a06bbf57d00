//! Canonical pretty-printer; `parse(print(m)) == m`.

use std::fmt::Write;

use super::ast::*;

fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin(op, ..) => op.prec(),
        Expr::Concat(..) => BinOp::Add.prec(),
        Expr::Int(n) if *n < 0 => 7,
        _ => 8,
    }
}

fn wrap(e: &Expr, min: u8) -> String {
    let s = print_expr(e);
    if prec(e) < min { format!("({s})") } else { s }
}

pub fn print_expr(e: &Expr) -> String {
    match e {
        Expr::Int(n) => n.to_string(),
        Expr::Null => "null".into(),
        Expr::Var(x) => x.clone(),
        Expr::Str(s) => quote(s),
        Expr::StrOf(a) => format!("str({})", print_expr(a)),
        Expr::Un(op, a) => {
            let sym = if *op == UnOp::Not { "!" } else { "-" };
            format!("{sym}{}", wrap(a, 8))
        }
        Expr::Bin(op, a, b) => format!("{} {} {}", wrap(a, op.prec()), op.symbol(), wrap(b, op.prec() + 1)),
        Expr::Concat(a, b) => {
            // A non-text left operand would otherwise fold into an arithmetic `+`.
            let p = BinOp::Add.prec();
            let l = if a.is_text() || matches!(**a, Expr::Concat(..)) { wrap(a, p) } else { wrap(a, p + 1) };
            format!("{l} + {}", wrap(b, p + 1))
        }
    }
}

fn args(es: &[Expr]) -> String {
    es.iter().map(print_expr).collect::<Vec<_>>().join(", ")
}

fn dst(x: &Option<String>) -> String {
    x.as_ref().map(|x| format!("{x} = ")).unwrap_or_default()
}

fn stmt(out: &mut String, s: &Stmt, ind: usize) {
    let pad = "  ".repeat(ind);
    match s {
        Stmt::Seq(ss) => ss.iter().for_each(|s| stmt(out, s, ind)),
        Stmt::If(c, t, e) => {
            let _ = writeln!(out, "{pad}if ({}) {{", print_expr(c));
            stmt(out, t, ind + 1);
            if **e == Stmt::Skip {
                let _ = writeln!(out, "{pad}}}");
            } else {
                let _ = writeln!(out, "{pad}}} else {{");
                stmt(out, e, ind + 1);
                let _ = writeln!(out, "{pad}}}");
            }
        }
        Stmt::While(c, b) => {
            let _ = writeln!(out, "{pad}while ({}) {{", print_expr(c));
            stmt(out, b, ind + 1);
            let _ = writeln!(out, "{pad}}}");
        }
        other => {
            let line = match other {
                Stmt::Skip => "skip".to_string(),
                Stmt::Assign(x, e) => format!("{x} = {}", print_expr(e)),
                Stmt::CallFun(x, f, a) => format!("{}{f}({})", dst(x), args(a)),
                Stmt::CallPtr(x, p, a) => format!("{}(*{})({})", dst(x), print_expr(p), args(a)),
                Stmt::CallSys(x, f, a) => format!("{}{f}({})", dst(x), args(a)),
                Stmt::AddrOf(x, f) => format!("{x} = &{f}"),
                Stmt::Malloc(x, n) => format!("{x} = malloc({})", print_expr(n)),
                Stmt::Free(p) => format!("free({})", print_expr(p)),
                Stmt::Load(x, p) => format!("{x} = load({})", print_expr(p)),
                Stmt::Store(p, v) => format!("store({}, {})", print_expr(p), print_expr(v)),
                Stmt::Cmp(x, a, b) => format!("{x} = cmp({}, {})", print_expr(a), print_expr(b)),
                Stmt::Return(None) => "return".to_string(),
                Stmt::Return(Some(e)) => format!("return {}", print_expr(e)),
                Stmt::Seq(_) | Stmt::If(..) | Stmt::While(..) => unreachable!(),
            };
            let _ = writeln!(out, "{pad}{line};");
        }
    }
}

pub fn print_module(m: &ImpModule) -> String {
    let mut out = format!("module {} {{\n", m.name);
    for (x, init) in &m.vars {
        match init {
            Some(e) => {
                let _ = writeln!(out, "  local {x} = {};", print_expr(e));
            }
            None => {
                let _ = writeln!(out, "  local {x};");
            }
        }
    }
    for f in &m.funs {
        let _ = writeln!(out, "\n  def {}({}) {{", f.name, f.params.join(", "));
        if !f.locals.is_empty() {
            let _ = writeln!(out, "    var {};", f.locals.join(", "));
        }
        stmt(&mut out, &f.body, 2);
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imp::parse;

    #[test]
    fn round_trip_tricky_expressions() {
        let src = r#"module P { def main() { var a, b
            a = (1 + 2) * -3 - (4 - 5)
            b = !(a < 2 || a >= 7) && -a != 0
            print(1 + 2 + "x" + str(a - 1) + ("y" + "z"))
            print("q\"\n")
            return -(a) } }"#;
        let m = parse(src).unwrap();
        let printed = print_module(&m);
        assert_eq!(parse(&printed).unwrap(), m, "{printed}");
    }
}
