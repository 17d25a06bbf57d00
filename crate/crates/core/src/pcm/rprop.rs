//! Executable resource predicates.

use std::fmt;
use std::sync::Arc;

use super::{add, includes, remainders, sigma, splits, PcmError, Resource};
use crate::ems::{AnyValue, ChoiceDomain};

pub type Binder = Arc<dyn Fn(&AnyValue) -> RProp + Send + Sync>;
/// Proposes witnesses for an existential from the resource being checked.
pub type Extractor = Arc<dyn Fn(&Resource) -> Vec<AnyValue> + Send + Sync>;

#[derive(Clone)]
pub enum RProp {
    Pure(bool),
    Own(Resource),
    Sep(Box<RProp>, Box<RProp>),
    And(Box<RProp>, Box<RProp>),
    Or(Box<RProp>, Box<RProp>),
    Exists(ChoiceDomain, Binder, Option<Extractor>),
    PointsTo(AnyValue, Vec<AnyValue>),
    MapsToMap(AnyValue, AnyValue),
    MwHas(AnyValue),
}

impl fmt::Debug for RProp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RProp::Pure(b) => write!(f, "⌜{b}⌝"),
            RProp::Own(r) => write!(f, "own({r})"),
            RProp::Sep(a, b) => write!(f, "({a:?} ∗ {b:?})"),
            RProp::And(a, b) => write!(f, "({a:?} ∧ {b:?})"),
            RProp::Or(a, b) => write!(f, "({a:?} ∨ {b:?})"),
            RProp::Exists(d, _, _) => write!(f, "∃{d}. …"),
            RProp::PointsTo(p, vs) => write!(f, "{p} ↦ {vs:?}"),
            RProp::MapsToMap(h, t) => write!(f, "{h} ↦Map {t}"),
            RProp::MwHas(t) => write!(f, "MWhas({t})"),
        }
    }
}

impl RProp {
    pub fn truth() -> RProp {
        RProp::Pure(true)
    }

    pub fn sep(self, other: RProp) -> RProp {
        RProp::Sep(Box::new(self), Box::new(other))
    }

    pub fn and(self, other: RProp) -> RProp {
        RProp::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: RProp) -> RProp {
        RProp::Or(Box::new(self), Box::new(other))
    }

    pub fn exists(d: ChoiceDomain, body: impl Fn(&AnyValue) -> RProp + Send + Sync + 'static) -> RProp {
        RProp::Exists(d, Arc::new(body), None)
    }

    pub fn exists_with(
        d: ChoiceDomain,
        body: impl Fn(&AnyValue) -> RProp + Send + Sync + 'static,
        extract: impl Fn(&Resource) -> Vec<AnyValue> + Send + Sync + 'static,
    ) -> RProp {
        RProp::Exists(d, Arc::new(body), Some(Arc::new(extract)))
    }

    /// The exact resource an ownership-only predicate demands.
    fn footprint(&self) -> Option<Resource> {
        match self {
            RProp::Own(r) => Some(r.clone()),
            RProp::PointsTo(p, vs) => Some(sigma::points_to(p, vs).unwrap_or(Resource::Invalid)),
            RProp::MapsToMap(h, t) => Some(sigma::map_has(h, t)),
            RProp::MwHas(t) => Some(sigma::mw_has(t)),
            RProp::Pure(true) => Some(Resource::Unit),
            RProp::Sep(a, b) => add(&a.footprint()?, &b.footprint()?).ok(),
            _ => None,
        }
    }
}

pub fn eval_rprop(p: &RProp, r: &Resource) -> Result<bool, PcmError> {
    match p {
        RProp::Pure(b) => Ok(*b),
        RProp::Own(_) | RProp::PointsTo(..) | RProp::MapsToMap(..) | RProp::MwHas(_) => {
            let need = p.footprint().expect("ownership predicate");
            Ok(need != Resource::Invalid && includes(r, &need))
        }
        RProp::And(a, b) => Ok(eval_rprop(a, r)? && eval_rprop(b, r)?),
        RProp::Or(a, b) => Ok(eval_rprop(a, r)? || eval_rprop(b, r)?),
        RProp::Sep(a, b) => eval_sep(a, b, r),
        RProp::Exists(d, body, extract) => {
            let candidates = match d.enumerate() {
                Ok(xs) => xs,
                Err(tag) => match extract {
                    Some(x) => x(r),
                    None => return Err(PcmError::UndecidableExists(tag)),
                },
            };
            for x in candidates {
                if eval_rprop(&body(&x), r)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
    }
}

fn eval_sep(a: &RProp, b: &RProp, r: &Resource) -> Result<bool, PcmError> {
    if let RProp::Pure(x) = a {
        return Ok(*x && eval_rprop(b, r)?);
    }
    if let RProp::Pure(x) = b {
        return Ok(*x && eval_rprop(a, r)?);
    }
    if let Some(fa) = a.footprint() {
        return any_remainder(r, &fa, b);
    }
    if let Some(fb) = b.footprint() {
        return any_remainder(r, &fb, a);
    }
    for (s, t) in splits(r) {
        if eval_rprop(a, &s)? && eval_rprop(b, &t)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Ownership is upward closed, so trying every exact remainder of `r − need`
/// decides `own(need) ∗ q`: any larger piece for `need` leaves a smaller frame.
fn any_remainder(r: &Resource, need: &Resource, q: &RProp) -> Result<bool, PcmError> {
    if *need == Resource::Invalid {
        return Ok(false);
    }
    let mut candidates = remainders(r, need);
    if candidates.is_empty() {
        // r may strictly exceed `need` in a component without an exact split.
        for (s, t) in splits(r) {
            if includes(&s, need) {
                candidates.push(t);
            }
        }
    }
    for c in candidates {
        if eval_rprop(q, &c)? {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pcm::sigma::*;

    #[test]
    fn own_semantics() {
        assert!(eval_rprop(&RProp::Own(cannon("Ball")), &cannon("Ball")).unwrap());
        assert!(!eval_rprop(&RProp::Own(cannon("Ball")), &cannon("Ready")).unwrap());
        assert!(eval_rprop(&RProp::Own(cannon("Ball")), &cannon("Fired")).unwrap());
        assert!(eval_rprop(&RProp::Own(Resource::Unit), &Resource::Unit).unwrap());
    }

    #[test]
    fn sep_finds_component_split() {
        let f0 = table_empty();
        let r = add(&app("Init"), &mw_has(&f0)).unwrap();
        let p = RProp::Own(app("Init")).sep(RProp::MwHas(f0.clone()));
        assert!(eval_rprop(&p, &r).unwrap());
        let q = RProp::Own(app("Run")).sep(RProp::MwHas(f0));
        assert!(!eval_rprop(&q, &r).unwrap());
    }

    #[test]
    fn sep_is_not_and() {
        let p = RProp::Own(once_do()).sep(RProp::Own(once_do()));
        assert!(!eval_rprop(&p, &once_do()).unwrap());
        let q = RProp::Own(once_do()).and(RProp::Own(once_do()));
        assert!(eval_rprop(&q, &once_do()).unwrap());
    }

    #[test]
    fn exists_over_unbounded_needs_extractor() {
        let p = RProp::exists(ChoiceDomain::Unbounded("ptr".into()), |_| RProp::truth());
        assert!(matches!(eval_rprop(&p, &Resource::Unit), Err(PcmError::UndecidableExists(_))));
        let q = RProp::exists_with(
            ChoiceDomain::Unbounded("int".into()),
            |v| RProp::Own(cannon(if v.as_int() == Some(1) { "Ball" } else { "Ready" })),
            |_| vec![AnyValue::Int(0), AnyValue::Int(1)],
        );
        assert!(eval_rprop(&q, &cannon("Ball")).unwrap());
    }

    #[test]
    fn general_split_search() {
        let p = RProp::Own(cannon("Ball")).or(RProp::Own(cannon("Ready")));
        let q = p.clone().sep(p);
        assert!(eval_rprop(&q, &cannon("Fired")).unwrap());
        assert!(!eval_rprop(&q, &cannon("Ball")).unwrap());
    }
}
