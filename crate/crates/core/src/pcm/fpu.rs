//! Frame-preserving updates.

use std::collections::BTreeSet;

use super::finite::finite_pcm;
use super::{add, includes, valid, PcmError, Resource};

/// A named, sound-but-incomplete criterion for structured updates.
pub struct UpdateRule {
    pub name: &'static str,
    pub applies: fn(&Resource, &Resource) -> bool,
    pub note: &'static str,
}

fn rule_drop(before: &Resource, after: &Resource) -> bool {
    includes(before, after)
}

fn rule_ex_replace(before: &Resource, after: &Resource) -> bool {
    matches!((before, after), (Resource::Ex(_), Resource::Ex(_)))
}

fn rule_auth_exclusive(before: &Resource, after: &Resource) -> bool {
    match (before, after) {
        (Resource::AuthBoth(a, f), Resource::AuthBoth(b, g)) => {
            a == f && b == g && matches!(**a, Resource::Ex(_)) && matches!(**b, Resource::Ex(_))
        }
        _ => false,
    }
}

pub static RULES: &[UpdateRule] = &[
    UpdateRule {
        name: "drop",
        applies: rule_drop,
        note: "giving up ownership: before = after + c",
    },
    UpdateRule {
        name: "ex-replace",
        applies: rule_ex_replace,
        note: "an exclusive element admits no frame but ε",
    },
    UpdateRule {
        name: "auth-exclusive",
        applies: rule_auth_exclusive,
        note: "●Ex(a)·◯Ex(a) → ●Ex(b)·◯Ex(b): the fragment is the whole authority",
    },
];

fn frames_for(component: &[&Resource]) -> Option<Vec<Resource>> {
    let mut pcms = BTreeSet::new();
    for r in component {
        match r {
            Resource::Fin(p, _) => {
                pcms.insert(p.clone());
            }
            Resource::Unit | Resource::Invalid => {}
            _ => return None,
        }
    }
    match pcms.len() {
        0 => Some(vec![Resource::Unit]),
        1 => finite_pcm(pcms.iter().next().unwrap()).map(|p| p.carrier()),
        _ => None,
    }
}

fn component_fpu(before: &Resource, after: &Resource) -> Result<bool, PcmError> {
    if before == after || !valid(before) {
        return Ok(true);
    }
    if let Some(frames) = frames_for(&[before, after]) {
        for f in frames {
            if valid(&add(&f, before)?) && !valid(&add(&f, after)?) {
                return Ok(false);
            }
        }
        return Ok(true);
    }
    if RULES.iter().any(|r| (r.applies)(before, after)) {
        return Ok(true);
    }
    Err(PcmError::NoRuleApplicable(format!("{before} → {after}")))
}

/// `∀ frame. valid(frame + mres + lres) ⟹ valid(frame + mres' + lres')`.
pub fn is_fpu(before: (&Resource, &Resource), after: (&Resource, &Resource)) -> Result<bool, PcmError> {
    let s = add(before.0, before.1)?;
    let t = add(after.0, after.1)?;
    if s == t || !valid(&s) {
        return Ok(true);
    }
    match (&s, &t) {
        (Resource::Prod(_), _) | (_, Resource::Prod(_)) => {
            let mut slots: BTreeSet<String> = BTreeSet::new();
            for r in [&s, &t] {
                if let Resource::Prod(m) = r {
                    slots.extend(m.keys().cloned());
                }
            }
            if !matches!(s, Resource::Prod(_) | Resource::Unit)
                || !matches!(t, Resource::Prod(_) | Resource::Unit | Resource::Invalid)
            {
                return Err(PcmError::PcmMismatch(s.to_string(), t.to_string()));
            }
            for slot in slots {
                if !component_fpu(&s.component(&slot), &t.component(&slot))? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        _ => component_fpu(&s, &t),
    }
}

/// Exhaustive check over a finite carrier, used to validate the rules.
pub fn is_fpu_exhaustive(before: &Resource, after: &Resource, frames: &[Resource]) -> bool {
    frames.iter().all(|f| {
        let b = add(f, before).map(|x| valid(&x)).unwrap_or(false);
        let a = add(f, after).map(|x| valid(&x)).unwrap_or(false);
        !b || a
    })
}
