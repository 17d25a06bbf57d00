//! Resource values and the PCM operations on them.
//!
//! Resources are kept in a canonical form: units are dropped from maps and
//! products, and every invalid element collapses to `Invalid`. Structural
//! equality is therefore equality in the monoid.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::finite::finite_pcm;
use crate::ems::AnyValue;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PcmError {
    #[error("cannot combine resources from different PCMs: {0} and {1}")]
    PcmMismatch(String, String),
    #[error("no update rule applies to {0}")]
    NoRuleApplicable(String),
    #[error("existential over unbounded domain {0} has no witness extractor")]
    UndecidableExists(String),
    #[error("unknown finite PCM {0}")]
    UnknownPcm(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Resource {
    /// The unit ε, shared by every PCM.
    Unit,
    /// The absorbing undefined element.
    Invalid,
    /// A non-unit element of a registered finite PCM.
    Fin(String, String),
    Ex(Box<AnyValue>),
    AuthFull(Box<Resource>),
    AuthFrag(Box<Resource>),
    AuthBoth(Box<Resource>, Box<Resource>),
    /// Finite map with unit default, sorted by key.
    Pointwise(Vec<(AnyValue, Resource)>),
    /// Named product; missing slots are unit.
    Prod(BTreeMap<String, Resource>),
}

impl fmt::Display for Resource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Resource::Unit => write!(f, "ε"),
            Resource::Invalid => write!(f, "Undef"),
            Resource::Fin(_, e) => write!(f, "{e}"),
            Resource::Ex(v) => write!(f, "Ex({v})"),
            Resource::AuthFull(a) => write!(f, "●{a}"),
            Resource::AuthFrag(a) => write!(f, "◯{a}"),
            Resource::AuthBoth(a, b) => write!(f, "●{a}·◯{b}"),
            Resource::Pointwise(m) => {
                write!(f, "{{")?;
                for (i, (k, v)) in m.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{k}↦{v}")?;
                }
                write!(f, "}}")
            }
            Resource::Prod(m) => {
                write!(f, "(")?;
                for (i, (k, v)) in m.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{k}:{v}")?;
                }
                write!(f, ")")
            }
        }
    }
}

fn kind(r: &Resource) -> &'static str {
    match r {
        Resource::Unit => "unit",
        Resource::Invalid => "invalid",
        Resource::Fin(..) => "finite",
        Resource::Ex(_) => "ex",
        Resource::AuthFull(_) | Resource::AuthFrag(_) | Resource::AuthBoth(..) => "auth",
        Resource::Pointwise(_) => "pointwise",
        Resource::Prod(_) => "prod",
    }
}

fn mismatch(a: &Resource, b: &Resource) -> PcmError {
    PcmError::PcmMismatch(a.to_string(), b.to_string())
}

impl Resource {
    pub fn fin(pcm: &str, elem: &str) -> Resource {
        match elem {
            "ε" | "unit" => Resource::Unit,
            "Undef" => Resource::Invalid,
            _ => Resource::Fin(pcm.to_string(), elem.to_string()),
        }
    }

    pub fn ex(v: AnyValue) -> Resource {
        Resource::Ex(Box::new(v))
    }

    pub fn auth_full(a: Resource) -> Resource {
        Resource::AuthFull(Box::new(a)).norm()
    }

    pub fn auth_frag(a: Resource) -> Resource {
        Resource::AuthFrag(Box::new(a)).norm()
    }

    pub fn pointwise(entries: impl IntoIterator<Item = (AnyValue, Resource)>) -> Resource {
        Resource::Pointwise(entries.into_iter().collect()).norm()
    }

    /// Places `r` in slot `name` of the global product.
    pub fn inject(name: &str, r: Resource) -> Resource {
        Resource::Prod(BTreeMap::from([(name.to_string(), r)])).norm()
    }

    /// The component in slot `name` (unit if absent).
    pub fn component(&self, name: &str) -> Resource {
        match self {
            Resource::Prod(m) => m.get(name).cloned().unwrap_or(Resource::Unit),
            Resource::Invalid => Resource::Invalid,
            _ => Resource::Unit,
        }
    }

    pub fn is_unit(&self) -> bool {
        matches!(self, Resource::Unit)
    }

    /// Canonical form.
    pub fn norm(self) -> Resource {
        match self {
            Resource::AuthFull(a) => match a.norm() {
                Resource::Invalid => Resource::Invalid,
                a => Resource::AuthFull(Box::new(a)),
            },
            Resource::AuthFrag(a) => match a.norm() {
                Resource::Invalid => Resource::Invalid,
                Resource::Unit => Resource::Unit,
                a => Resource::AuthFrag(Box::new(a)),
            },
            Resource::AuthBoth(a, b) => {
                let (a, b) = (a.norm(), b.norm());
                if a == Resource::Invalid || b == Resource::Invalid || !includes(&a, &b) {
                    Resource::Invalid
                } else if b.is_unit() {
                    Resource::AuthFull(Box::new(a))
                } else {
                    Resource::AuthBoth(Box::new(a), Box::new(b))
                }
            }
            Resource::Pointwise(entries) => {
                let mut m: BTreeMap<AnyValue, Resource> = BTreeMap::new();
                for (k, v) in entries {
                    let v = v.norm();
                    let merged = match m.remove(&k) {
                        Some(old) => add(&old, &v).unwrap_or(Resource::Invalid),
                        None => v,
                    };
                    m.insert(k, merged);
                }
                if m.values().any(|v| *v == Resource::Invalid) {
                    return Resource::Invalid;
                }
                m.retain(|_, v| !v.is_unit());
                if m.is_empty() { Resource::Unit } else { Resource::Pointwise(m.into_iter().collect()) }
            }
            Resource::Prod(m) => {
                let mut out = BTreeMap::new();
                for (k, v) in m {
                    match v.norm() {
                        Resource::Invalid => return Resource::Invalid,
                        Resource::Unit => {}
                        v => {
                            out.insert(k, v);
                        }
                    }
                }
                if out.is_empty() { Resource::Unit } else { Resource::Prod(out) }
            }
            r => r,
        }
    }
}

/// The PCM sum; `Invalid` absorbs.
pub fn add(a: &Resource, b: &Resource) -> Result<Resource, PcmError> {
    use Resource::*;
    let out = match (a, b) {
        (Invalid, _) | (_, Invalid) => Invalid,
        (Unit, x) | (x, Unit) => x.clone(),
        (Fin(p, x), Fin(q, y)) => {
            if p != q {
                return Err(mismatch(a, b));
            }
            let pcm = finite_pcm(p).ok_or_else(|| PcmError::UnknownPcm(p.clone()))?;
            pcm.add_elems(x, y)
        }
        (Ex(_), Ex(_)) => Invalid,
        (AuthFull(_), AuthFull(_))
        | (AuthBoth(..), AuthFull(_))
        | (AuthFull(_), AuthBoth(..))
        | (AuthBoth(..), AuthBoth(..)) => Invalid,
        (AuthFull(x), AuthFrag(y)) | (AuthFrag(y), AuthFull(x)) => {
            AuthBoth(x.clone(), y.clone()).norm()
        }
        (AuthFrag(x), AuthFrag(y)) => AuthFrag(Box::new(add(x, y)?)).norm(),
        (AuthBoth(x, f), AuthFrag(g)) | (AuthFrag(g), AuthBoth(x, f)) => {
            AuthBoth(x.clone(), Box::new(add(f, g)?)).norm()
        }
        (Pointwise(m1), Pointwise(m2)) => {
            let mut m: BTreeMap<AnyValue, Resource> = m1.iter().cloned().collect();
            for (k, v) in m2 {
                let s = match m.get(k) {
                    Some(old) => add(old, v)?,
                    None => v.clone(),
                };
                m.insert(k.clone(), s);
            }
            Pointwise(m.into_iter().collect()).norm()
        }
        (Prod(m1), Prod(m2)) => {
            let mut m = m1.clone();
            for (k, v) in m2 {
                let s = match m.get(k) {
                    Some(old) => add(old, v)?,
                    None => v.clone(),
                };
                m.insert(k.clone(), s);
            }
            Prod(m).norm()
        }
        _ => return Err(mismatch(a, b)),
    };
    Ok(out)
}

/// Sum of many resources.
pub fn sum<'a>(rs: impl IntoIterator<Item = &'a Resource>) -> Result<Resource, PcmError> {
    rs.into_iter().try_fold(Resource::Unit, |acc, r| add(&acc, r))
}

pub fn valid(a: &Resource) -> bool {
    *a != Resource::Invalid
}

/// `a ≥ b`: there is a `c` with `a = b + c`.
pub fn includes(a: &Resource, b: &Resource) -> bool {
    use Resource::*;
    match (a, b) {
        (_, Unit) => true,
        (Invalid, _) => true,
        (_, Invalid) => false,
        (Unit, _) => false,
        (Fin(p, _), Fin(q, _)) => {
            p == q
                && finite_pcm(p).is_some_and(|pcm| {
                    pcm.carrier().iter().any(|c| add(b, c).is_ok_and(|s| s == *a))
                })
        }
        (Ex(x), Ex(y)) => x == y,
        (AuthFull(x), AuthFull(y)) => x == y,
        (AuthFrag(x), AuthFrag(y)) => includes(x, y),
        (AuthBoth(x, _), AuthFull(y)) => x == y,
        (AuthBoth(_, f), AuthFrag(g)) => includes(f, g),
        (AuthBoth(x, f), AuthBoth(y, g)) => x == y && includes(f, g),
        (Pointwise(m1), Pointwise(m2)) => m2.iter().all(|(k, v)| {
            let have = m1.iter().find(|(k1, _)| k1 == k).map(|(_, r)| r).unwrap_or(&Unit);
            includes(have, v)
        }),
        (Prod(m1), Prod(m2)) => {
            m2.iter().all(|(k, v)| includes(m1.get(k).unwrap_or(&Unit), v))
        }
        _ => false,
    }
}

fn product_of(choices: Vec<Vec<Resource>>, build: impl Fn(Vec<Resource>) -> Resource) -> Vec<Resource> {
    let mut acc: Vec<Vec<Resource>> = vec![Vec::new()];
    for opts in choices {
        let mut next = Vec::new();
        for prefix in &acc {
            for o in &opts {
                let mut row = prefix.clone();
                row.push(o.clone());
                next.push(row);
            }
        }
        acc = next;
    }
    let mut out: Vec<Resource> = acc.into_iter().map(build).collect();
    out.sort();
    out.dedup();
    out
}

/// Every `c` with `b + c = a`.
pub fn remainders(a: &Resource, b: &Resource) -> Vec<Resource> {
    use Resource::*;
    match (a, b) {
        (_, Unit) => vec![a.clone()],
        (Invalid, _) => vec![Invalid],
        (Fin(p, _), Fin(..)) => match finite_pcm(p) {
            Some(pcm) => pcm
                .carrier()
                .into_iter()
                .filter(|c| add(b, c).is_ok_and(|s| s == *a))
                .collect(),
            None => vec![],
        },
        (Ex(x), Ex(y)) if x == y => vec![Unit],
        (AuthFull(x), AuthFull(y)) if x == y => vec![Unit],
        (AuthFrag(x), AuthFrag(y)) => {
            remainders(x, y).into_iter().map(Resource::auth_frag).collect()
        }
        (AuthBoth(x, _), AuthFull(y)) if x == y => match a {
            AuthBoth(_, f) => vec![AuthFrag(f.clone())],
            _ => unreachable!(),
        },
        (AuthBoth(x, f), AuthFrag(g)) => remainders(f, g)
            .into_iter()
            .map(|c| AuthBoth(x.clone(), Box::new(c)).norm())
            .filter(|c| *c != Invalid)
            .collect(),
        (AuthBoth(x, f), AuthBoth(y, g)) if x == y => {
            remainders(f, g).into_iter().map(Resource::auth_frag).collect()
        }
        (Pointwise(m1), Pointwise(m2)) => {
            let mut keys: Vec<AnyValue> = m1.iter().map(|(k, _)| k.clone()).collect();
            keys.extend(m2.iter().map(|(k, _)| k.clone()));
            keys.sort();
            keys.dedup();
            let look = |m: &Vec<(AnyValue, Resource)>, k: &AnyValue| {
                m.iter().find(|(k1, _)| k1 == k).map(|(_, r)| r.clone()).unwrap_or(Unit)
            };
            let choices: Vec<Vec<Resource>> =
                keys.iter().map(|k| remainders(&look(m1, k), &look(m2, k))).collect();
            if choices.iter().any(|c| c.is_empty()) {
                return vec![];
            }
            product_of(choices, |vals| {
                Resource::pointwise(keys.iter().cloned().zip(vals))
            })
        }
        (Prod(m1), Prod(m2)) => {
            let mut keys: Vec<String> = m1.keys().cloned().collect();
            keys.extend(m2.keys().cloned());
            keys.sort();
            keys.dedup();
            let choices: Vec<Vec<Resource>> = keys
                .iter()
                .map(|k| remainders(m1.get(k).unwrap_or(&Unit), m2.get(k).unwrap_or(&Unit)))
                .collect();
            if choices.iter().any(|c| c.is_empty()) {
                return vec![];
            }
            product_of(choices, |vals| Prod(keys.iter().cloned().zip(vals).collect()).norm())
        }
        _ => vec![],
    }
}

/// Every pair `(s, t)` with `s + t = a`.
pub fn splits(a: &Resource) -> Vec<(Resource, Resource)> {
    use Resource::*;
    let mut out = match a {
        Unit => vec![(Unit, Unit)],
        Invalid => vec![(Invalid, Unit), (Unit, Invalid)],
        Fin(p, _) => match finite_pcm(p) {
            Some(pcm) => {
                let c = pcm.carrier();
                let mut v = Vec::new();
                for x in &c {
                    for y in &c {
                        if add(x, y).is_ok_and(|s| s == *a) {
                            v.push((x.clone(), y.clone()));
                        }
                    }
                }
                v
            }
            None => vec![],
        },
        Ex(_) | AuthFull(_) => vec![(a.clone(), Unit), (Unit, a.clone())],
        AuthFrag(x) => splits(x)
            .into_iter()
            .map(|(s, t)| (Resource::auth_frag(s), Resource::auth_frag(t)))
            .collect(),
        AuthBoth(x, f) => {
            let mut v = Vec::new();
            for (s, t) in splits(f) {
                v.push((AuthBoth(x.clone(), Box::new(s.clone())).norm(), Resource::auth_frag(t.clone())));
                v.push((Resource::auth_frag(s), AuthBoth(x.clone(), Box::new(t)).norm()));
            }
            v
        }
        Pointwise(m) => {
            let mut acc: Vec<(Vec<(AnyValue, Resource)>, Vec<(AnyValue, Resource)>)> =
                vec![(vec![], vec![])];
            for (k, r) in m {
                let mut next = Vec::new();
                for (l, rr) in &acc {
                    for (s, t) in splits(r) {
                        let mut l2 = l.clone();
                        let mut r2 = rr.clone();
                        l2.push((k.clone(), s));
                        r2.push((k.clone(), t));
                        next.push((l2, r2));
                    }
                }
                acc = next;
            }
            acc.into_iter().map(|(l, r)| (Resource::pointwise(l), Resource::pointwise(r))).collect()
        }
        Prod(m) => {
            let mut acc: Vec<(BTreeMap<String, Resource>, BTreeMap<String, Resource>)> =
                vec![(BTreeMap::new(), BTreeMap::new())];
            for (k, r) in m {
                let mut next = Vec::new();
                for (l, rr) in &acc {
                    for (s, t) in splits(r) {
                        let mut l2 = l.clone();
                        let mut r2 = rr.clone();
                        l2.insert(k.clone(), s);
                        r2.insert(k.clone(), t);
                        next.push((l2, r2));
                    }
                }
                acc = next;
            }
            acc.into_iter().map(|(l, r)| (Prod(l).norm(), Prod(r).norm())).collect()
        }
    };
    out.sort();
    out.dedup();
    out
}

/// True when the resource lives entirely in finite PCMs (possibly in a product).
pub fn is_finite(a: &Resource) -> bool {
    match a {
        Resource::Unit | Resource::Invalid | Resource::Fin(..) => true,
        Resource::Prod(m) => m.values().all(is_finite),
        _ => false,
    }
}

pub fn describe_kind(a: &Resource) -> &'static str {
    kind(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(e: &str) -> Resource {
        Resource::fin("Cannon", e)
    }

    #[test]
    fn cannon_table() {
        assert_eq!(add(&c("Ready"), &c("Ball")).unwrap(), c("Fired"));
        assert_eq!(add(&Resource::Unit, &c("Ball")).unwrap(), c("Ball"));
        assert_eq!(add(&c("Ball"), &c("Ball")).unwrap(), Resource::Invalid);
        assert!(valid(&add(&c("Ready"), &c("Ball")).unwrap()));
        assert!(!valid(&add(&c("Fired"), &c("Ready")).unwrap()));
    }

    #[test]
    fn once_and_app() {
        let d = Resource::fin("Once", "Do");
        assert_eq!(add(&d, &d).unwrap(), Resource::Invalid);
        let (i, r) = (Resource::fin("App", "Init"), Resource::fin("App", "Run"));
        assert_eq!(add(&i, &r).unwrap(), Resource::fin("App", "Both"));
    }

    #[test]
    fn mismatch_is_reported() {
        let d = Resource::fin("Once", "Do");
        assert!(matches!(add(&d, &c("Ball")), Err(PcmError::PcmMismatch(..))));
        assert!(matches!(add(&d, &Resource::ex(AnyValue::Int(1))), Err(PcmError::PcmMismatch(..))));
    }

    #[test]
    fn includes_on_cannon() {
        assert!(includes(&c("Fired"), &c("Ball")));
        assert!(includes(&c("Ball"), &c("Ball")));
        assert!(!includes(&c("Ready"), &c("Ball")));
        assert_eq!(remainders(&c("Fired"), &c("Ready")), vec![c("Ball")]);
    }

    #[test]
    fn auth_both_requires_inclusion() {
        let ex = |n| Resource::ex(AnyValue::Int(n));
        let ok = add(&Resource::auth_full(ex(1)), &Resource::auth_frag(ex(1))).unwrap();
        assert!(valid(&ok));
        let bad = add(&Resource::auth_full(ex(1)), &Resource::auth_frag(ex(2))).unwrap();
        assert!(!valid(&bad));
        assert_eq!(remainders(&ok, &Resource::auth_full(ex(1))), vec![Resource::auth_frag(ex(1))]);
    }

    #[test]
    fn products_pad_with_units() {
        let a = Resource::inject("cannon", c("Ball"));
        let b = Resource::inject("once", Resource::fin("Once", "Do"));
        let s = add(&a, &b).unwrap();
        assert_eq!(s.component("cannon"), c("Ball"));
        assert_eq!(s.component("app"), Resource::Unit);
        assert!(includes(&s, &a));
        assert_eq!(remainders(&s, &a), vec![b]);
        assert_eq!(Resource::inject("x", Resource::Unit), Resource::Unit);
    }

    #[test]
    fn splits_recombine() {
        let r = add(
            &Resource::inject("cannon", c("Fired")),
            &Resource::inject("mw", Resource::auth_frag(Resource::ex(AnyValue::Int(3)))),
        )
        .unwrap();
        let ss = splits(&r);
        assert!(!ss.is_empty());
        for (s, t) in ss {
            assert_eq!(add(&s, &t).unwrap(), r);
        }
    }
}
