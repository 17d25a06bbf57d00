//! Lexer and recursive-descent parser for `.imp` sources.
//!
//! ```text
//! module  := "module" IDENT "{" item* "}"
//! item    := "local" decl ("," decl)* ";"?
//!          | "def" IDENT "(" [IDENT ("," IDENT)*] ")" block
//! decl    := IDENT ["=" expr]
//! block   := "{" stmt* "}"
//! stmt    := "var" IDENT ["=" rhs] ("," IDENT ["=" rhs])* ";"?
//!          | IDENT ("=" | ":=") rhs ";"?
//!          | call ";"?
//!          | "if" "(" expr ")" body ["else" body]
//!          | "while" "(" expr ")" body
//!          | "return" [expr] ";"?  |  "skip" ";"?
//! rhs     := call | "&" IDENT "." IDENT | expr
//! call    := IDENT "." IDENT "(" args ")"      module function
//!          | "(" "*" expr ")" "(" args ")"     through a pointer
//!          | print(..) | getint(..)            system calls
//!          | malloc(e) | free(e) | load(e) | store(e, e) | cmp(e, e)
//! expr    := binary operators || && == != < <= > >= + - * / % ; unary ! -
//!          | INT | "string" | true | false | null | IDENT | str(expr) | "(" expr ")"
//! ```
//! `+` with a string operand is concatenation. `//` starts a line comment.

use std::collections::BTreeSet;

use thiserror::Error;

use super::ast::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {msg}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    Punct(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

const PUNCTS: &[&str] = &[
    ":=", "<=", ">=", "==", "!=", "&&", "||", "{", "}", "(", ")", ",", ";", "=", "+", "-", "*", "/", "%", "<", ">", "!", "&", ".",
];

fn lex(src: &str) -> Result<Vec<Spanned>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let mut out = Vec::new();
    let err = |line, col, msg: String| SyntaxError { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (l0, c0) = (line, col);
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let n = text.parse::<i64>().map_err(|_| err(l0, c0, format!("integer literal {text} out of range")))?;
            col += i - start;
            out.push(Spanned { tok: Tok::Int(n), line: l0, col: c0 });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Spanned { tok: Tok::Ident(chars[start..i].iter().collect()), line: l0, col: c0 });
            continue;
        }
        if c == '"' {
            let mut s = String::new();
            i += 1;
            col += 1;
            loop {
                match chars.get(i) {
                    None | Some('\n') => return Err(err(l0, c0, "unterminated string literal".into())),
                    Some('"') => {
                        i += 1;
                        col += 1;
                        break;
                    }
                    Some('\\') => {
                        let e = chars.get(i + 1).copied().ok_or_else(|| err(line, col, "bad escape".into()))?;
                        s.push(match e {
                            'n' => '\n',
                            't' => '\t',
                            '"' | '\\' => e,
                            _ => return Err(err(line, col, format!("unknown escape \\{e}"))),
                        });
                        i += 2;
                        col += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                        col += 1;
                    }
                }
            }
            out.push(Spanned { tok: Tok::Str(s), line: l0, col: c0 });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        let Some(p) = PUNCTS.iter().find(|p| rest.starts_with(**p)) else {
            return Err(err(l0, c0, format!("unexpected character {c:?}")));
        };
        i += p.len();
        col += p.len();
        out.push(Spanned { tok: Tok::Punct(p), line: l0, col: c0 });
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

const KEYWORDS: &[&str] = &[
    "module", "local", "def", "var", "if", "else", "while", "return", "skip", "true", "false", "null", "str", "malloc", "free",
    "load", "store", "cmp",
];

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    /// Function-local names collected while parsing a body.
    locals: Vec<String>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T, SyntaxError> {
        let s = &self.toks[self.pos];
        Err(SyntaxError { line: s.line, col: s.col, msg: msg.into() })
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == k)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), SyntaxError> {
        if self.eat_punct(p) { Ok(()) } else { self.fail(format!("expected `{p}`, found {}", describe(self.peek()))) }
    }

    fn expect_kw(&mut self, k: &str) -> Result<(), SyntaxError> {
        if self.is_kw(k) {
            self.bump();
            Ok(())
        } else {
            self.fail(format!("expected `{k}`, found {}", describe(self.peek())))
        }
    }

    fn ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            t => self.fail(format!("expected identifier, found {}", describe(&t))),
        }
    }

    /// Function name after `Module.`; keywords are allowed here.
    fn member(&mut self) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            t => self.fail(format!("expected function name, found {}", describe(&t))),
        }
    }

    fn module(&mut self) -> Result<ImpModule, SyntaxError> {
        self.expect_kw("module")?;
        let name = self.ident()?;
        self.expect_punct("{")?;
        let mut m = ImpModule { name, vars: Vec::new(), funs: Vec::new() };
        while !self.eat_punct("}") {
            if self.is_kw("local") {
                self.bump();
                loop {
                    let x = self.ident()?;
                    let init = if self.eat_punct("=") || self.eat_punct(":=") { Some(self.expr()?) } else { None };
                    m.vars.push((x, init));
                    if !self.eat_punct(",") {
                        break;
                    }
                }
                self.eat_punct(";");
            } else if self.is_kw("def") {
                m.funs.push(self.function()?);
            } else {
                return self.fail(format!("expected `local`, `def` or `}}`, found {}", describe(self.peek())));
            }
        }
        if *self.peek() != Tok::Eof {
            return self.fail("trailing input after module");
        }
        Ok(m)
    }

    fn function(&mut self) -> Result<ImpFunction, SyntaxError> {
        self.expect_kw("def")?;
        let name = self.ident()?;
        self.expect_punct("(")?;
        let mut params = Vec::new();
        if !self.eat_punct(")") {
            loop {
                params.push(self.ident()?);
                if self.eat_punct(")") {
                    break;
                }
                self.expect_punct(",")?;
            }
        }
        self.locals.clear();
        let body = self.block()?;
        Ok(ImpFunction { name, params, locals: std::mem::take(&mut self.locals), body })
    }

    fn block(&mut self) -> Result<Stmt, SyntaxError> {
        self.expect_punct("{")?;
        let mut ss = Vec::new();
        while !self.eat_punct("}") {
            if *self.peek() == Tok::Eof {
                return self.fail("unclosed block");
            }
            if let Some(s) = self.stmt()? {
                ss.push(s);
            }
        }
        Ok(seq(ss))
    }

    fn body(&mut self) -> Result<Stmt, SyntaxError> {
        if self.is_punct("{") {
            self.block()
        } else {
            Ok(self.stmt()?.unwrap_or(Stmt::Skip))
        }
    }

    /// `None` for a bare declaration.
    fn stmt(&mut self) -> Result<Option<Stmt>, SyntaxError> {
        if self.is_kw("var") {
            self.bump();
            let mut ss = Vec::new();
            loop {
                let x = self.ident()?;
                if !self.locals.contains(&x) {
                    self.locals.push(x.clone());
                }
                if self.eat_punct("=") || self.eat_punct(":=") {
                    ss.push(self.rhs(x)?);
                }
                if !self.eat_punct(",") {
                    break;
                }
            }
            self.eat_punct(";");
            return Ok(if ss.is_empty() { None } else { Some(seq(ss)) });
        }
        let s = if self.is_kw("if") {
            self.bump();
            self.expect_punct("(")?;
            let c = self.expr()?;
            self.expect_punct(")")?;
            let t = self.body()?;
            let e = if self.is_kw("else") {
                self.bump();
                self.body()?
            } else {
                Stmt::Skip
            };
            return Ok(Some(Stmt::If(c, Box::new(t), Box::new(e))));
        } else if self.is_kw("while") {
            self.bump();
            self.expect_punct("(")?;
            let c = self.expr()?;
            self.expect_punct(")")?;
            return Ok(Some(Stmt::While(c, Box::new(self.body()?))));
        } else if self.is_kw("return") {
            self.bump();
            if self.is_punct(";") || self.is_punct("}") {
                Stmt::Return(None)
            } else {
                Stmt::Return(Some(self.expr()?))
            }
        } else if self.is_kw("skip") {
            self.bump();
            Stmt::Skip
        } else if matches!(self.peek(), Tok::Ident(_)) && matches!(self.peek_at(1), Tok::Punct("=") | Tok::Punct(":=")) {
            let x = self.ident()?;
            self.bump();
            self.rhs(x)?
        } else if let Some(s) = self.call(None)? {
            s
        } else {
            return self.fail(format!("expected a statement, found {}", describe(self.peek())));
        };
        self.eat_punct(";");
        Ok(Some(s))
    }

    fn rhs(&mut self, x: String) -> Result<Stmt, SyntaxError> {
        if self.eat_punct("&") {
            let m = self.ident()?;
            self.expect_punct(".")?;
            let f = self.member()?;
            return Ok(Stmt::AddrOf(x, format!("{m}.{f}")));
        }
        if let Some(s) = self.call(Some(x.clone()))? {
            return Ok(s);
        }
        Ok(Stmt::Assign(x, self.expr()?))
    }

    fn args(&mut self) -> Result<Vec<Expr>, SyntaxError> {
        self.expect_punct("(")?;
        let mut out = Vec::new();
        if self.eat_punct(")") {
            return Ok(out);
        }
        loop {
            out.push(self.expr()?);
            if self.eat_punct(")") {
                return Ok(out);
            }
            self.expect_punct(",")?;
        }
    }

    fn arity<const N: usize>(&self, name: &str, args: Vec<Expr>) -> Result<[Expr; N], SyntaxError> {
        let n = args.len();
        args.try_into().or_else(|_| self.fail(format!("{name} takes {N} argument(s), got {n}")))
    }

    /// Parses a call form if one starts here.
    fn call(&mut self, dst: Option<String>) -> Result<Option<Stmt>, SyntaxError> {
        if self.is_punct("(") && matches!(self.peek_at(1), Tok::Punct("*")) {
            self.bump();
            self.bump();
            let p = self.expr()?;
            self.expect_punct(")")?;
            let args = self.args()?;
            return Ok(Some(Stmt::CallPtr(dst, p, args)));
        }
        let Tok::Ident(name) = self.peek().clone() else {
            return Ok(None);
        };
        if matches!(self.peek_at(1), Tok::Punct(".")) {
            let m = self.ident()?;
            self.bump();
            let f = self.member()?;
            let args = self.args()?;
            return Ok(Some(Stmt::CallFun(dst, format!("{m}.{f}"), args)));
        }
        if !matches!(self.peek_at(1), Tok::Punct("(")) {
            return Ok(None);
        }
        let need_dst = |p: &Self, dst: Option<String>| match dst {
            Some(x) => Ok(x),
            None => p.fail(format!("result of {name} must be assigned")),
        };
        let stmt = match name.as_str() {
            n if SYS_CALLS.contains(&n) => {
                self.bump();
                Stmt::CallSys(dst, name.clone(), self.args()?)
            }
            "malloc" => {
                let x = need_dst(self, dst)?;
                self.bump();
                let a = self.args()?;
                let [n] = self.arity("malloc", a)?;
                Stmt::Malloc(x, n)
            }
            "load" => {
                let x = need_dst(self, dst)?;
                self.bump();
                let a = self.args()?;
                let [p] = self.arity("load", a)?;
                Stmt::Load(x, p)
            }
            "cmp" => {
                let x = need_dst(self, dst)?;
                self.bump();
                let a = self.args()?;
                let [l, r] = self.arity("cmp", a)?;
                Stmt::Cmp(x, l, r)
            }
            "free" | "store" if dst.is_some() => return self.fail(format!("{name} has no result")),
            "free" => {
                self.bump();
                let a = self.args()?;
                let [p] = self.arity("free", a)?;
                Stmt::Free(p)
            }
            "store" => {
                self.bump();
                let a = self.args()?;
                let [p, v] = self.arity("store", a)?;
                Stmt::Store(p, v)
            }
            "str" => return Ok(None),
            _ => return self.fail(format!("unqualified call to {name}; write Module.{name}")),
        };
        Ok(Some(stmt))
    }

    fn expr(&mut self) -> Result<Expr, SyntaxError> {
        self.binary(1)
    }

    fn binop(&self) -> Option<BinOp> {
        let Tok::Punct(p) = self.peek() else { return None };
        Some(match *p {
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "*" => BinOp::Mul,
            "/" => BinOp::Div,
            "%" => BinOp::Mod,
            "<" => BinOp::Lt,
            "<=" => BinOp::Le,
            ">" => BinOp::Gt,
            ">=" => BinOp::Ge,
            "==" => BinOp::Eq,
            "!=" => BinOp::Ne,
            "&&" => BinOp::And,
            "||" => BinOp::Or,
            _ => return None,
        })
    }

    fn binary(&mut self, min: u8) -> Result<Expr, SyntaxError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop() {
            if op.prec() < min {
                break;
            }
            self.bump();
            let rhs = self.binary(op.prec() + 1)?;
            lhs = match op {
                BinOp::Add if lhs.is_text() || rhs.is_text() => Expr::Concat(Box::new(lhs), Box::new(rhs)),
                _ if lhs.is_text() || rhs.is_text() => return self.fail(format!("`{}` applied to a string", op.symbol())),
                _ => Expr::Bin(op, Box::new(lhs), Box::new(rhs)),
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, SyntaxError> {
        if self.eat_punct("!") {
            return Ok(Expr::Un(UnOp::Not, Box::new(self.unary()?)));
        }
        if self.eat_punct("-") {
            return Ok(match self.unary()? {
                Expr::Int(n) => Expr::Int(n.wrapping_neg()),
                e => Expr::Un(UnOp::Neg, Box::new(e)),
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, SyntaxError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Int(n))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::Str(s))
            }
            Tok::Punct("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Ident(k) if k == "true" || k == "false" => {
                self.bump();
                Ok(Expr::Int((k == "true") as i64))
            }
            Tok::Ident(k) if k == "null" => {
                self.bump();
                Ok(Expr::Null)
            }
            Tok::Ident(k) if k == "str" => {
                self.bump();
                self.expect_punct("(")?;
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(Expr::StrOf(Box::new(e)))
            }
            Tok::Ident(_) => {
                let x = self.ident()?;
                if self.is_punct("(") || self.is_punct(".") {
                    return self.fail(format!("call inside an expression; assign the result of {x} to a variable first"));
                }
                Ok(Expr::Var(x))
            }
            t => self.fail(format!("expected an expression, found {}", describe(&t))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(n) => format!("`{n}`"),
        Tok::Str(s) => format!("{s:?}"),
        Tok::Punct(p) => format!("`{p}`"),
        Tok::Eof => "end of input".into(),
    }
}

pub(crate) fn seq(mut ss: Vec<Stmt>) -> Stmt {
    match ss.len() {
        0 => Stmt::Skip,
        1 => ss.pop().expect("one element"),
        _ => Stmt::Seq(ss.into_iter().flat_map(|s| if let Stmt::Seq(v) = s { v } else { vec![s] }).collect()),
    }
}

fn check_scopes(m: &ImpModule) -> Result<(), String> {
    let globals: BTreeSet<&str> = m.vars.iter().map(|(x, _)| x.as_str()).collect();
    if globals.len() != m.vars.len() {
        return Err("module variable declared twice".into());
    }
    let mut names = BTreeSet::new();
    for f in &m.funs {
        if !names.insert(&f.name) {
            return Err(format!("function {} defined twice", f.name));
        }
        let scope: BTreeSet<&str> =
            globals.iter().copied().chain(f.params.iter().map(String::as_str)).chain(f.locals.iter().map(String::as_str)).collect();
        let mut bad = None;
        visit_names(&f.body, &mut |x| {
            if !scope.contains(x) && bad.is_none() {
                bad = Some(x.to_string());
            }
        });
        if let Some(x) = bad {
            return Err(format!("undeclared variable {x} in {}", f.name));
        }
    }
    for (_, init) in &m.vars {
        if let Some(e) = init {
            let mut bad = None;
            expr_names(e, &mut |x| bad = bad.take().or(Some(x.to_string())));
            if let Some(x) = bad {
                return Err(format!("module initializer refers to variable {x}"));
            }
        }
    }
    Ok(())
}

fn expr_names(e: &Expr, f: &mut dyn FnMut(&str)) {
    match e {
        Expr::Var(x) => f(x),
        Expr::Bin(_, a, b) | Expr::Concat(a, b) => {
            expr_names(a, f);
            expr_names(b, f);
        }
        Expr::Un(_, a) | Expr::StrOf(a) => expr_names(a, f),
        Expr::Int(_) | Expr::Null | Expr::Str(_) => {}
    }
}

fn visit_names(s: &Stmt, f: &mut dyn FnMut(&str)) {
    let dst = |x: &Option<String>, f: &mut dyn FnMut(&str)| {
        if let Some(x) = x {
            f(x)
        }
    };
    match s {
        Stmt::Skip => {}
        Stmt::Assign(x, e) | Stmt::Malloc(x, e) | Stmt::Load(x, e) => {
            f(x);
            expr_names(e, f);
        }
        Stmt::Seq(ss) => ss.iter().for_each(|s| visit_names(s, f)),
        Stmt::If(c, t, e) => {
            expr_names(c, f);
            visit_names(t, f);
            visit_names(e, f);
        }
        Stmt::While(c, b) => {
            expr_names(c, f);
            visit_names(b, f);
        }
        Stmt::CallFun(x, _, args) | Stmt::CallSys(x, _, args) => {
            dst(x, f);
            args.iter().for_each(|a| expr_names(a, f));
        }
        Stmt::CallPtr(x, p, args) => {
            dst(x, f);
            expr_names(p, f);
            args.iter().for_each(|a| expr_names(a, f));
        }
        Stmt::AddrOf(x, _) => f(x),
        Stmt::Free(e) => expr_names(e, f),
        Stmt::Store(a, b) => {
            expr_names(a, f);
            expr_names(b, f);
        }
        Stmt::Cmp(x, a, b) => {
            f(x);
            expr_names(a, f);
            expr_names(b, f);
        }
        Stmt::Return(e) => {
            if let Some(e) = e {
                expr_names(e, f)
            }
        }
    }
}

pub fn parse(src: &str) -> Result<ImpModule, SyntaxError> {
    let mut p = Parser { toks: lex(src)?, pos: 0, locals: Vec::new() };
    let m = p.module()?;
    check_scopes(&m).map_err(|msg| {
        let end = p.toks.last().expect("eof token");
        SyntaxError { line: end.line, col: end.col, msg }
    })?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_function() {
        let m = parse("module P { def main() { return 0 } }").unwrap();
        assert_eq!(m.funs.len(), 1);
        assert_eq!(m.funs[0].body, Stmt::Return(Some(Expr::Int(0))));
        assert_eq!(m.qualified("main"), "main");
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse("module P {\n  def f( {").unwrap_err();
        assert_eq!((e.line, e.col), (2, 10));
        assert!(parse("module P { def f() { y = 1 } }").unwrap_err().msg.contains("undeclared"));
        assert!(parse("module P { def f() { var x = Q.g(1) + 2 } }").is_err());
        assert!(parse("module P { def f() { var x = \"a\" - 1 } }").is_err());
    }

    #[test]
    fn statement_forms() {
        let src = r#"
            module T {
              local n = 3
              def f(p, k) {
                var r, q = 0
                q := &SC.succ
                r = (*q)(k)
                store(p + 1, -4)
                r = load(p)
                r = cmp(p, null)
                if (!(r == 1) && k < 2) print("x" + str(r)) else skip
                while (n > 0) { n = n - 1 }
                return r
              }
            }"#;
        let m = parse(src).unwrap();
        let f = &m.funs[0];
        assert_eq!(f.locals, vec!["r", "q"]);
        let Stmt::Seq(ss) = &f.body else { panic!() };
        assert_eq!(ss[1], Stmt::AddrOf("q".into(), "SC.succ".into()));
        assert!(matches!(&ss[3], Stmt::Store(_, Expr::Int(-4))));
        assert!(matches!(&ss[6], Stmt::If(_, t, _) if matches!(**t, Stmt::CallSys(None, ref s, _) if s == "print")));
    }
}
