//! Per-function conditions and spec tables.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::Depth;
use crate::ems::{AnyValue, ChoiceDomain};
use crate::pcm::{RProp, Resource};

/// `(w, concrete, abstract) ↦ predicate on the handed-over resource`.
pub type PropFn = Arc<dyn Fn(&AnyValue, &AnyValue, &AnyValue) -> RProp + Send + Sync>;
pub type DepthFn = Arc<dyn Fn(&AnyValue) -> Depth + Send + Sync>;
/// Proposes auxiliary values for a call from `(abstract arg, caller's resource)`.
pub type WitnessFn = Arc<dyn Fn(&AnyValue, &Resource) -> Vec<AnyValue> + Send + Sync>;

#[derive(Clone)]
pub struct Cond {
    /// Used as the structural identity by `conds_leq`.
    pub label: String,
    pub w: ChoiceDomain,
    pub depth: DepthFn,
    pub pre: PropFn,
    pub post: PropFn,
    pub witness: Option<WitnessFn>,
}

impl fmt::Debug for Cond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cond({} over {})", self.label, self.w)
    }
}

impl Cond {
    pub fn new(label: impl Into<String>, w: ChoiceDomain) -> Cond {
        Cond {
            label: label.into(),
            w,
            depth: Arc::new(|_| Depth::Inf),
            pre: Arc::new(|_, _, _| RProp::truth()),
            post: Arc::new(|_, _, _| RProp::truth()),
            witness: None,
        }
    }

    /// `W = {()}`, `D = ∞`, `P = Q = True`.
    pub fn trivial() -> Cond {
        Cond::new("trivial", ChoiceDomain::Explicit(vec![AnyValue::Unit]))
    }

    /// Like `trivial`, but the abstract values equal the concrete ones.
    pub fn identity() -> Cond {
        Cond::new("identity", ChoiceDomain::Explicit(vec![AnyValue::Unit]))
            .pre(|_, x, x_a| RProp::Pure(x == x_a))
            .post(|_, r, r_a| RProp::Pure(r == r_a))
    }

    pub fn depth_const(mut self, d: Depth) -> Cond {
        self.depth = Arc::new(move |_| d);
        self
    }

    pub fn depth(mut self, f: impl Fn(&AnyValue) -> Depth + Send + Sync + 'static) -> Cond {
        self.depth = Arc::new(f);
        self
    }

    pub fn pre(mut self, f: impl Fn(&AnyValue, &AnyValue, &AnyValue) -> RProp + Send + Sync + 'static) -> Cond {
        self.pre = Arc::new(f);
        self
    }

    pub fn post(mut self, f: impl Fn(&AnyValue, &AnyValue, &AnyValue) -> RProp + Send + Sync + 'static) -> Cond {
        self.post = Arc::new(f);
        self
    }

    pub fn witness(mut self, f: impl Fn(&AnyValue, &Resource) -> Vec<AnyValue> + Send + Sync + 'static) -> Cond {
        self.witness = Some(Arc::new(f));
        self
    }

    /// Candidate auxiliary values, hint first, then the domain itself when finite.
    pub fn w_candidates(&self, x_a: &AnyValue, avail: &Resource) -> Vec<AnyValue> {
        let mut out = self.witness.as_ref().map(|h| h(x_a, avail)).unwrap_or_default();
        if let Ok(xs) = self.w.enumerate() {
            for x in xs {
                if !out.contains(&x) {
                    out.push(x);
                }
            }
        }
        out
    }
}

/// `⌜x = x_a⌝ ∗ p`.
pub fn eq_sep(x: &AnyValue, x_a: &AnyValue, p: RProp) -> RProp {
    RProp::Pure(x == x_a).sep(p)
}

pub type Conds = BTreeMap<String, Cond>;

pub fn conds_union(a: &Conds, b: &Conds) -> Conds {
    let mut out = a.clone();
    out.extend(b.iter().map(|(k, v)| (k.clone(), v.clone())));
    out
}

pub fn restrict(s: &Conds, names: &[&str]) -> Conds {
    s.iter().filter(|(k, _)| names.contains(&k.as_str())).map(|(k, v)| (k.clone(), v.clone())).collect()
}

/// Declarative predicate templates over `(x, x_a, σ)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropTpl {
    True,
    XEqXa,
    Own(Resource),
    Sep(Vec<PropTpl>),
    And(Vec<PropTpl>),
    Or(Vec<PropTpl>),
}

impl PropTpl {
    pub fn instantiate(&self, x: &AnyValue, x_a: &AnyValue) -> RProp {
        let fold = |ps: &[PropTpl], unit: bool, f: fn(RProp, RProp) -> RProp| {
            ps.iter().map(|p| p.instantiate(x, x_a)).reduce(f).unwrap_or(RProp::Pure(unit))
        };
        match self {
            PropTpl::True => RProp::truth(),
            PropTpl::XEqXa => RProp::Pure(x == x_a),
            PropTpl::Own(r) => RProp::Own(r.clone()),
            PropTpl::Sep(ps) => fold(ps, true, RProp::sep),
            PropTpl::And(ps) => fold(ps, true, RProp::and),
            PropTpl::Or(ps) => fold(ps, false, RProp::or),
        }
    }
}

/// One row of a JSON spec table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CondSpec {
    pub name: String,
    #[serde(default = "unit_domain")]
    pub w: ChoiceDomain,
    #[serde(default = "inf")]
    pub depth: Depth,
    #[serde(default = "tpl_true")]
    pub pre: PropTpl,
    #[serde(default = "tpl_true")]
    pub post: PropTpl,
}

fn unit_domain() -> ChoiceDomain {
    ChoiceDomain::Explicit(vec![AnyValue::Unit])
}

fn inf() -> Depth {
    Depth::Inf
}

fn tpl_true() -> PropTpl {
    PropTpl::True
}

impl CondSpec {
    pub fn to_cond(&self) -> Cond {
        let (pre, post) = (self.pre.clone(), self.post.clone());
        Cond::new(format!("json:{}", serde_json::to_string(self).expect("spec serializes")), self.w.clone())
            .depth_const(self.depth)
            .pre(move |_, x, x_a| pre.instantiate(x, x_a))
            .post(move |_, r, r_a| post.instantiate(r, r_a))
    }
}

pub fn conds_from_json(text: &str) -> Result<Conds, serde_json::Error> {
    let rows: Vec<CondSpec> = serde_json::from_str(text)?;
    Ok(rows.into_iter().map(|r| (r.name.clone(), r.to_cond())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pcm::{eval_rprop, sigma};

    #[test]
    fn json_table() {
        let text = r#"[
            {"name": "Once.do", "pre": {"own": {"Prod": {"once": {"Fin": ["Once", "Do"]}}}}},
            {"name": "main", "depth": {"Pure": {"w2": 0, "w1": 1, "n": 0}}, "pre": {"sep": ["x_eq_xa", "true"]}}
        ]"#;
        let s = conds_from_json(text).unwrap();
        assert_eq!(s.len(), 2);
        let once = &s["Once.do"];
        let p = (once.pre)(&AnyValue::Unit, &AnyValue::nil(), &AnyValue::nil());
        assert!(eval_rprop(&p, &sigma::once_do()).unwrap());
        assert!(!eval_rprop(&p, &Resource::Unit).unwrap());
        let m = &s["main"];
        assert_eq!((m.depth)(&AnyValue::Unit), Depth::Pure(super::super::Ordinal::OMEGA));
        let p = (m.pre)(&AnyValue::Unit, &AnyValue::Int(1), &AnyValue::Int(2));
        assert!(!eval_rprop(&p, &Resource::Unit).unwrap());
    }

    #[test]
    fn trivial_accepts_everything() {
        let c = Cond::trivial();
        assert_eq!(c.w_candidates(&AnyValue::Unit, &Resource::Unit), vec![AnyValue::Unit]);
        let p = (c.pre)(&AnyValue::Unit, &AnyValue::Int(1), &AnyValue::Int(5));
        assert!(eval_rprop(&p, &Resource::Unit).unwrap());
    }
}
