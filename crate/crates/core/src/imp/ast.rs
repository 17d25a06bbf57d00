//! Abstract syntax of IMP programs.

use serde::{Deserialize, Serialize};

use crate::ems::PtrVal;

/// Runtime values: 64-bit integers and pointers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Val {
    I64(i64),
    Ptr(PtrVal),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength; higher binds tighter.
    pub fn prec(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expr {
    Int(i64),
    Null,
    Var(String),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Un(UnOp, Box<Expr>),
    /// String literal; only printable.
    Str(String),
    /// `str(e)`: decimal rendering of an integer.
    StrOf(Box<Expr>),
    Concat(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn is_text(&self) -> bool {
        matches!(self, Expr::Str(_) | Expr::StrOf(_) | Expr::Concat(..))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stmt {
    Skip,
    Assign(String, Expr),
    Seq(Vec<Stmt>),
    If(Expr, Box<Stmt>, Box<Stmt>),
    While(Expr, Box<Stmt>),
    CallFun(Option<String>, String, Vec<Expr>),
    CallPtr(Option<String>, Expr, Vec<Expr>),
    CallSys(Option<String>, String, Vec<Expr>),
    AddrOf(String, String),
    Malloc(String, Expr),
    Free(Expr),
    Load(String, Expr),
    Store(Expr, Expr),
    Cmp(String, Expr, Expr),
    Return(Option<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImpFunction {
    /// Unqualified name as written.
    pub name: String,
    pub params: Vec<String>,
    pub locals: Vec<String>,
    pub body: Stmt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImpModule {
    pub name: String,
    /// Module-local variables with optional initializers.
    pub vars: Vec<(String, Option<Expr>)>,
    pub funs: Vec<ImpFunction>,
}

impl ImpModule {
    /// Global name of a function: `main` stays bare, others become `Module.f`.
    pub fn qualified(&self, f: &str) -> String {
        if f == "main" { f.to_string() } else { format!("{}.{f}", self.name) }
    }
}

/// Names the parser treats as system calls.
pub const SYS_CALLS: &[&str] = &["print", "getint"];
