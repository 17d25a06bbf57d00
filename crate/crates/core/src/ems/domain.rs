//! Finite (or explicitly unbounded) domains for `choose` and `take`.

use serde::{Deserialize, Serialize};

use super::AnyValue;
use crate::pcm::finite_pcm;
use crate::spc::Ordinal;

/// Predecessors of a limit ordinal are cut off at this finite coefficient.
pub const ORDINAL_ENUM_CAP: u32 = 8;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChoiceDomain {
    Explicit(Vec<AnyValue>),
    IntRange(i64, i64),
    Booleans,
    PcmCarrier(String),
    OrdinalsBelow(Ordinal),
    Product(Vec<ChoiceDomain>),
    Unbounded(String),
}

pub fn ordinal_value(o: Ordinal) -> AnyValue {
    AnyValue::opaque(
        "ord",
        AnyValue::List(vec![
            AnyValue::Int(o.w2 as i64),
            AnyValue::Int(o.w1 as i64),
            AnyValue::Int(o.n as i64),
        ]),
    )
}

pub fn value_ordinal(v: &AnyValue) -> Option<Ordinal> {
    match v {
        AnyValue::Opaque(tag, body) if tag == "ord" => match body.as_list()? {
            [a, b, c] => Some(Ordinal::new(
                a.as_int()?.try_into().ok()?,
                b.as_int()?.try_into().ok()?,
                c.as_int()?.try_into().ok()?,
            )),
            _ => None,
        },
        _ => None,
    }
}

impl ChoiceDomain {
    pub fn empty() -> ChoiceDomain {
        ChoiceDomain::Explicit(Vec::new())
    }

    pub fn is_unbounded(&self) -> bool {
        match self {
            ChoiceDomain::Unbounded(_) => true,
            ChoiceDomain::Product(ds) => ds.iter().any(|d| d.is_unbounded()),
            _ => false,
        }
    }

    /// Elements in deterministic order; `Err(tag)` for an unbounded domain.
    pub fn enumerate(&self) -> Result<Vec<AnyValue>, String> {
        match self {
            ChoiceDomain::Explicit(xs) => Ok(xs.clone()),
            ChoiceDomain::IntRange(lo, hi) => Ok((*lo..=*hi).map(AnyValue::Int).collect()),
            ChoiceDomain::Booleans => Ok(vec![AnyValue::Bool(false), AnyValue::Bool(true)]),
            ChoiceDomain::PcmCarrier(name) => match finite_pcm(name) {
                Some(p) => Ok(p.carrier().into_iter().map(AnyValue::Res).collect()),
                None => Err(format!("pcm:{name}")),
            },
            ChoiceDomain::OrdinalsBelow(o) => Ok(o
                .below(ORDINAL_ENUM_CAP)
                .into_iter()
                .map(ordinal_value)
                .collect()),
            ChoiceDomain::Product(ds) => {
                let mut acc: Vec<Vec<AnyValue>> = vec![Vec::new()];
                for d in ds {
                    let xs = d.enumerate()?;
                    let mut next = Vec::with_capacity(acc.len() * xs.len());
                    for prefix in &acc {
                        for x in &xs {
                            let mut row = prefix.clone();
                            row.push(x.clone());
                            next.push(row);
                        }
                    }
                    acc = next;
                }
                Ok(acc.into_iter().map(AnyValue::List).collect())
            }
            ChoiceDomain::Unbounded(tag) => Err(tag.clone()),
        }
    }

    /// Number of elements, if finite.
    pub fn size(&self) -> Option<usize> {
        match self {
            ChoiceDomain::Explicit(xs) => Some(xs.len()),
            ChoiceDomain::IntRange(lo, hi) => Some(if hi < lo { 0 } else { (hi - lo + 1) as usize }),
            ChoiceDomain::Booleans => Some(2),
            ChoiceDomain::Product(ds) => ds.iter().try_fold(1usize, |acc, d| Some(acc * d.size()?)),
            ChoiceDomain::Unbounded(_) => None,
            _ => self.enumerate().ok().map(|v| v.len()),
        }
    }

    pub fn contains(&self, v: &AnyValue) -> bool {
        match self {
            ChoiceDomain::Explicit(xs) => xs.contains(v),
            ChoiceDomain::IntRange(lo, hi) => matches!(v, AnyValue::Int(n) if lo <= n && n <= hi),
            ChoiceDomain::Booleans => matches!(v, AnyValue::Bool(_)),
            ChoiceDomain::OrdinalsBelow(o) => value_ordinal(v).is_some_and(|x| x < *o),
            ChoiceDomain::Product(ds) => match v.as_list() {
                Some(xs) => xs.len() == ds.len() && ds.iter().zip(xs).all(|(d, x)| d.contains(x)),
                None => false,
            },
            ChoiceDomain::PcmCarrier(_) => self.enumerate().is_ok_and(|xs| xs.contains(v)),
            ChoiceDomain::Unbounded(_) => true,
        }
    }
}

impl std::fmt::Display for ChoiceDomain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ChoiceDomain::Explicit(xs) => {
                write!(f, "{{")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "}}")
            }
            ChoiceDomain::IntRange(lo, hi) => write!(f, "{lo}..={hi}"),
            ChoiceDomain::Booleans => write!(f, "bool"),
            ChoiceDomain::PcmCarrier(n) => write!(f, "carrier({n})"),
            ChoiceDomain::OrdinalsBelow(o) => write!(f, "ord<{o}"),
            ChoiceDomain::Product(ds) => {
                for (i, d) in ds.iter().enumerate() {
                    if i > 0 {
                        write!(f, " × ")?;
                    }
                    write!(f, "{d}")?;
                }
                Ok(())
            }
            ChoiceDomain::Unbounded(tag) => write!(f, "unbounded({tag})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerations_are_deterministic() {
        let d = ChoiceDomain::Product(vec![ChoiceDomain::Booleans, ChoiceDomain::IntRange(1, 2)]);
        let xs = d.enumerate().unwrap();
        assert_eq!(xs.len(), 4);
        assert_eq!(xs[0], AnyValue::List(vec![false.into(), 1.into()]));
        assert_eq!(xs, d.enumerate().unwrap());
        assert_eq!(d.size(), Some(4));
        assert!(xs.iter().all(|x| d.contains(x)));
    }

    #[test]
    fn unbounded_refuses_enumeration() {
        let d = ChoiceDomain::Product(vec![ChoiceDomain::Booleans, ChoiceDomain::Unbounded("any".into())]);
        assert_eq!(d.enumerate(), Err("any".to_string()));
        assert!(d.is_unbounded());
    }

    #[test]
    fn carrier_lists_cannon_elements() {
        let xs = ChoiceDomain::PcmCarrier("Cannon".into()).enumerate().unwrap();
        assert_eq!(xs.len(), 5);
    }

    #[test]
    fn ordinal_round_trip() {
        let o = Ordinal::omega_plus(4);
        assert_eq!(value_ordinal(&ordinal_value(o)), Some(o));
        let below = ChoiceDomain::OrdinalsBelow(Ordinal::nat(3)).enumerate().unwrap();
        assert_eq!(below.len(), 3);
    }
}
