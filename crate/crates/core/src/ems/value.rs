//! The universal dynamic value carried by events and module states.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::pcm::Resource;

/// Pointer values shared by the memory model and function pointers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PtrVal {
    Null,
    Heap { block: u64, ofs: i64 },
    Func(String),
}

impl fmt::Display for PtrVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PtrVal::Null => write!(f, "null"),
            PtrVal::Heap { block, ofs } => write!(f, "b{block}+{ofs}"),
            PtrVal::Func(name) => write!(f, "&{name}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
pub enum AnyValue {
    #[default]
    Unit,
    Int(i64),
    Bool(bool),
    Str(String),
    Ptr(PtrVal),
    List(Vec<AnyValue>),
    Pair(Box<AnyValue>, Box<AnyValue>),
    Res(Resource),
    Opaque(String, Box<AnyValue>),
}

impl AnyValue {
    pub fn pair(a: AnyValue, b: AnyValue) -> AnyValue {
        AnyValue::Pair(Box::new(a), Box::new(b))
    }

    pub fn str(s: impl Into<String>) -> AnyValue {
        AnyValue::Str(s.into())
    }

    pub fn opaque(tag: impl Into<String>, payload: AnyValue) -> AnyValue {
        AnyValue::Opaque(tag.into(), Box::new(payload))
    }

    pub fn nil() -> AnyValue {
        AnyValue::List(Vec::new())
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            AnyValue::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            AnyValue::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            AnyValue::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[AnyValue]> {
        match self {
            AnyValue::List(xs) => Some(xs),
            _ => None,
        }
    }

    pub fn as_pair(&self) -> Option<(&AnyValue, &AnyValue)> {
        match self {
            AnyValue::Pair(a, b) => Some((a, b)),
            _ => None,
        }
    }

    pub fn as_res(&self) -> Option<&Resource> {
        match self {
            AnyValue::Res(r) => Some(r),
            _ => None,
        }
    }

    /// Canonical text form (compact JSON).
    pub fn to_text(&self) -> String {
        serde_json::to_string(self).expect("AnyValue always serializes")
    }

    pub fn from_text(s: &str) -> Result<AnyValue, serde_json::Error> {
        serde_json::from_str(s)
    }
}

impl fmt::Display for AnyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnyValue::Unit => write!(f, "()"),
            AnyValue::Int(n) => write!(f, "{n}"),
            AnyValue::Bool(b) => write!(f, "{b}"),
            AnyValue::Str(s) => write!(f, "{s:?}"),
            AnyValue::Ptr(p) => write!(f, "{p}"),
            AnyValue::List(xs) => {
                write!(f, "[")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "]")
            }
            AnyValue::Pair(a, b) => write!(f, "({a}, {b})"),
            AnyValue::Res(r) => write!(f, "{r}"),
            AnyValue::Opaque(tag, v) => write!(f, "<{tag}:{v}>"),
        }
    }
}

impl From<i64> for AnyValue {
    fn from(n: i64) -> Self {
        AnyValue::Int(n)
    }
}

impl From<bool> for AnyValue {
    fn from(b: bool) -> Self {
        AnyValue::Bool(b)
    }
}

impl From<&str> for AnyValue {
    fn from(s: &str) -> Self {
        AnyValue::Str(s.to_string())
    }
}

impl From<Resource> for AnyValue {
    fn from(r: Resource) -> Self {
        AnyValue::Res(r)
    }
}
