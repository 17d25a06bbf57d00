//! Ordinals below ω³ and call depths.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// `w2·ω² + w1·ω + n`, compared lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
pub struct Ordinal {
    pub w2: u32,
    pub w1: u32,
    pub n: u32,
}

impl Ordinal {
    pub const ZERO: Ordinal = Ordinal { w2: 0, w1: 0, n: 0 };
    pub const OMEGA: Ordinal = Ordinal { w2: 0, w1: 1, n: 0 };

    pub const fn nat(n: u32) -> Ordinal {
        Ordinal { w2: 0, w1: 0, n }
    }

    pub const fn omega_plus(n: u32) -> Ordinal {
        Ordinal { w2: 0, w1: 1, n }
    }

    pub const fn new(w2: u32, w1: u32, n: u32) -> Ordinal {
        Ordinal { w2, w1, n }
    }

    pub fn is_limit(&self) -> bool {
        self.n == 0 && (self.w1 > 0 || self.w2 > 0)
    }

    /// Ordinals strictly below `self` whose finite parts do not exceed `cap`.
    ///
    /// Limit ordinals have infinitely many predecessors, so the enumeration is
    /// truncated: every coefficient below a limit position ranges over `0..=cap`.
    pub fn below(&self, cap: u32) -> Vec<Ordinal> {
        let mut out = Vec::new();
        for w2 in 0..=self.w2 {
            let w1_max = if w2 < self.w2 { cap } else { self.w1 };
            for w1 in 0..=w1_max {
                let n_max = if w2 < self.w2 || w1 < self.w1 { cap } else { self.n };
                for n in 0..=n_max {
                    let o = Ordinal { w2, w1, n };
                    if o < *self {
                        out.push(o);
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.w2 {
            0 => {}
            1 => parts.push("ω²".to_string()),
            k => parts.push(format!("ω²·{k}")),
        }
        match self.w1 {
            0 => {}
            1 => parts.push("ω".to_string()),
            k => parts.push(format!("ω·{k}")),
        }
        if self.n > 0 || parts.is_empty() {
            parts.push(self.n.to_string());
        }
        write!(f, "{}", parts.join("+"))
    }
}

/// Either impure (`Inf`) or pure with an ordinal measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Depth {
    Inf,
    Pure(Ordinal),
}

impl Depth {
    /// Strict order: only pure depths are below anything.
    pub fn lt(&self, other: &Depth) -> bool {
        match (self, other) {
            (Depth::Pure(_), Depth::Inf) => true,
            (Depth::Pure(a), Depth::Pure(b)) => a < b,
            (Depth::Inf, _) => false,
        }
    }

    pub fn le(&self, other: &Depth) -> bool {
        self == other || self.lt(other)
    }
}

impl PartialOrd for Depth {
    fn partial_cmp(&self, other: &Depth) -> Option<Ordering> {
        if self == other {
            Some(Ordering::Equal)
        } else if self.lt(other) {
            Some(Ordering::Less)
        } else if other.lt(self) {
            Some(Ordering::Greater)
        } else {
            None
        }
    }
}

impl fmt::Display for Depth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Depth::Inf => write!(f, "∞"),
            Depth::Pure(o) => write!(f, "⟨{o}⟩"),
        }
    }
}
