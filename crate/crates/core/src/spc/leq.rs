//! Ordering of spec tables: domain inclusion plus opt-in strengthening witnesses.

use std::sync::Arc;

use super::Conds;
use crate::ems::AnyValue;
use crate::pcm::{eval_rprop, valid, Resource};

/// Evidence that `S0[name] ⊑ S1[name]`, validated on samples.
#[derive(Clone)]
pub struct LeqWitness {
    pub name: String,
    /// `w0 ↦ w1`.
    pub map_w: Arc<dyn Fn(&AnyValue) -> Option<AnyValue> + Send + Sync>,
    pub ws: Vec<AnyValue>,
    /// `(concrete, abstract)` pairs used for both arguments and results.
    pub values: Vec<(AnyValue, AnyValue)>,
    pub resources: Vec<Resource>,
}

fn entails(p: &crate::pcm::RProp, q: &crate::pcm::RProp, rs: &[Resource]) -> bool {
    rs.iter()
        .filter(|r| valid(r))
        .all(|r| !eval_rprop(p, r).unwrap_or(false) || eval_rprop(q, r).unwrap_or(false))
}

fn witnessed(s0: &super::Cond, s1: &super::Cond, wit: &LeqWitness) -> bool {
    wit.ws.iter().all(|w0| {
        let Some(w1) = (wit.map_w)(w0) else {
            return false;
        };
        if !s1.w.contains(&w1) || !(s1.depth)(&w1).le(&(s0.depth)(w0)) {
            return false;
        }
        wit.values.iter().all(|(x, x_a)| {
            entails(&(s0.pre)(w0, x, x_a), &(s1.pre)(&w1, x, x_a), &wit.resources)
                && entails(&(s1.post)(&w1, x, x_a), &(s0.post)(w0, x, x_a), &wit.resources)
        })
    })
}

/// `S0 ⊑ S1` with witnesses for conds that are not identical.
pub fn conds_leq_with(s0: &Conds, s1: &Conds, witnesses: &[LeqWitness]) -> bool {
    s0.iter().all(|(name, c0)| match s1.get(name) {
        None => false,
        Some(c1) if c1.label == c0.label => true,
        Some(c1) => witnesses.iter().filter(|w| w.name == *name).any(|w| witnessed(c0, c1, w)),
    })
}

pub fn conds_leq(s0: &Conds, s1: &Conds) -> bool {
    conds_leq_with(s0, s1, &[])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ems::ChoiceDomain;
    use crate::pcm::RProp;
    use crate::spc::{conds_union, Cond, Depth, Ordinal};

    fn succ(d: Depth, label: &str) -> Cond {
        Cond::new(label, ChoiceDomain::IntRange(0, 5))
            .depth_const(d)
            .pre(|m, x, _| RProp::Pure(*x == AnyValue::List(vec![m.clone()])))
            .post(|m, r, _| RProp::Pure(r.as_int() == m.as_int().map(|n| n + 1)))
    }

    fn table(c: Cond) -> Conds {
        [("SC.succ".to_string(), c)].into()
    }

    fn wit() -> LeqWitness {
        LeqWitness {
            name: "SC.succ".into(),
            map_w: Arc::new(|w| Some(w.clone())),
            ws: (0..6).map(AnyValue::Int).collect(),
            values: (0..7).map(|n| (AnyValue::Int(n), AnyValue::Int(n))).chain([(AnyValue::List(vec![AnyValue::Int(2)]), AnyValue::Unit)]).collect(),
            resources: vec![Resource::Unit],
        }
    }

    #[test]
    fn reflexive_and_inclusion() {
        let sc = table(succ(Depth::Pure(Ordinal::ZERO), "succ0"));
        let ad: Conds = [("AD.main".to_string(), Cond::trivial())].into();
        assert!(conds_leq(&sc, &sc));
        assert!(conds_leq(&sc, &conds_union(&sc, &ad)));
        assert!(!conds_leq(&conds_union(&sc, &ad), &sc));
    }

    #[test]
    fn depth_clause_direction() {
        let pure = table(succ(Depth::Pure(Ordinal::OMEGA), "succ-omega"));
        let inf = table(succ(Depth::Inf, "succ-inf"));
        assert!(!conds_leq(&inf, &pure));
        // A caller expecting ∞ may be given a pure callee, not the other way round.
        assert!(conds_leq_with(&inf, &pure, &[wit()]));
        assert!(!conds_leq_with(&pure, &inf, &[wit()]));
        let sc = table(succ(Depth::Pure(Ordinal::ZERO), "succ0"));
        assert!(conds_leq_with(&pure, &sc, &[wit()]));
    }
}
