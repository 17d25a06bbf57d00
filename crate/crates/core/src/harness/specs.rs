//! Spec tables for the shipped examples, including the higher-order one for `repeat`.

use std::sync::Arc;

use serde::Serialize;

use crate::ems::{AnyValue, ChoiceDomain, PtrVal};
use crate::pcm::sigma::{app, cannon, once_do};
use crate::pcm::{RProp, Resource};
use crate::spc::{conds_leq_with, eq_sep, restrict, Cond, Conds, Depth, LeqWitness, Ordinal};

fn unit_w() -> ChoiceDomain {
    ChoiceDomain::Explicit(vec![AnyValue::Unit])
}

fn table(rows: Vec<(&str, Cond)>) -> Conds {
    rows.into_iter().map(|(n, c)| (n.to_string(), c)).collect()
}

/// Concrete and abstract values agree; the call hands over `pre` and gets back `post`.
fn owning(label: &str, pre: Resource, post: Resource) -> Cond {
    Cond::new(label, unit_w())
        .pre(move |_, x, x_a| eq_sep(x, x_a, RProp::Own(pre.clone())))
        .post(move |_, r, r_a| eq_sep(r, r_a, RProp::Own(post.clone())))
}

pub fn s_once() -> Conds {
    table(vec![("Once.do", owning("once.do", once_do(), Resource::Unit))])
}

/// A client `main` that needs `res` to start.
pub fn s_client_main(res: Resource) -> Conds {
    let label = format!("main needs {res}");
    table(vec![("main", owning(&label, res, Resource::Unit).post(|_, _, _| RProp::truth()))])
}

/// `fire` consumes the ball and returns one.
pub fn s_cannon() -> Conds {
    let ball = cannon("Ball");
    let c = Cond::new("cannon.fire", unit_w())
        .pre(move |_, x, x_a| eq_sep(x, x_a, RProp::Own(ball.clone())))
        .post(|_, r, r_a| RProp::Pure(r == r_a && *r == AnyValue::Int(1)));
    table(vec![("Cannon.fire", c)])
}

/// `init` turns the init capability into the run capability; `run` keeps it.
pub fn s_app_simple() -> Conds {
    table(vec![
        ("App.init", owning("app.init", app("Init"), app("Run"))),
        ("App.run", owning("app.run", app("Run"), app("Run"))),
    ])
}

/// MW without map knowledge: `main` starts from the init capability.
pub fn s_mw_simple() -> Conds {
    let mut s = s_client_main(app("Init"));
    s.insert("MW.put".into(), Cond::identity());
    s.insert("MW.get".into(), Cond::identity());
    s
}

fn int_list(x: &AnyValue) -> Option<Vec<i64>> {
    x.as_list()?.iter().map(AnyValue::as_int).collect()
}

/// `succ(m)`: depth 0, returns `m + 1`.
pub fn s_sc() -> Conds {
    let c = Cond::new("sc.succ", ChoiceDomain::Unbounded("int".into()))
        .depth_const(Depth::Pure(Ordinal::ZERO))
        .witness(|x_a, _| int_list(x_a).and_then(|v| v.first().copied()).map(AnyValue::Int).into_iter().collect())
        .pre(|m, x, x_a| RProp::Pure(x == x_a && *x == AnyValue::List(vec![m.clone()])))
        .post(|m, r, r_a| RProp::Pure(r == r_a && r.as_int().is_some() && r.as_int() == m.as_int().and_then(|m| m.checked_add(1))));
    table(vec![("SC.succ", c)])
}

pub fn s_ad() -> Conds {
    table(vec![("main", Cond::identity())])
}

/// Trivial conditions for every name, for `Safe` modules.
pub fn s_trivial(names: &[&str]) -> Conds {
    names.iter().map(|n| (n.to_string(), Cond::trivial())).collect()
}

/// A named mathematical function on integers; `None` means undefined.
#[derive(Clone)]
pub struct FunSem {
    pub tag: String,
    pub f: Arc<dyn Fn(i64) -> Option<i64> + Send + Sync>,
}

impl FunSem {
    pub fn new(tag: &str, f: impl Fn(i64) -> Option<i64> + Send + Sync + 'static) -> FunSem {
        FunSem { tag: tag.into(), f: Arc::new(f) }
    }

    /// `f` applied `n` times.
    pub fn iterate(&self, n: i64, m: i64) -> Option<i64> {
        (0..n).try_fold(m, |acc, _| (self.f)(acc))
    }
}

pub fn successor() -> FunSem {
    FunSem::new("succ", |m| m.checked_add(1))
}

/// One attempted pairing of a callee with a semantics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Instantiation {
    pub callee: String,
    pub sem: String,
    pub admitted: bool,
}

pub struct Instance {
    pub conds: Conds,
    pub records: Vec<Instantiation>,
}

/// A spec table parameterized by the table describing its function-pointer arguments.
#[derive(Clone)]
pub struct HigherOrderCond {
    pub name: String,
    build: Arc<dyn Fn(&Conds) -> Instance + Send + Sync>,
}

impl HigherOrderCond {
    pub fn new(name: &str, build: impl Fn(&Conds) -> Instance + Send + Sync + 'static) -> HigherOrderCond {
        HigherOrderCond { name: name.into(), build: Arc::new(build) }
    }

    pub fn instantiate(&self, s_f: &Conds) -> Instance {
        (self.build)(s_f)
    }
}

/// What `repeat` expects of `*f`: depth below ω, `[m] ↦ sem(m)`.
fn expected_callee(sem: &FunSem) -> Cond {
    let sem = sem.clone();
    Cond::new(format!("callee:{}", sem.tag), ChoiceDomain::Unbounded("int".into()))
        .depth_const(Depth::Pure(Ordinal::OMEGA))
        .pre(|m, x, x_a| RProp::Pure(x == x_a && *x == AnyValue::List(vec![m.clone()])))
        .post(move |m, r, r_a| RProp::Pure(r == r_a && r.as_int().is_some() && r.as_int() == m.as_int().and_then(|m| (sem.f)(m))))
}

fn sample_witness(name: &str) -> LeqWitness {
    let ks = -3..12;
    LeqWitness {
        name: name.into(),
        map_w: Arc::new(|w| Some(w.clone())),
        ws: ks.clone().map(AnyValue::Int).collect(),
        values: ks
            .clone()
            .map(|k| AnyValue::List(vec![AnyValue::Int(k)]))
            .chain(ks.map(AnyValue::Int))
            .map(|v| (v.clone(), v))
            .collect(),
        resources: vec![Resource::Unit],
    }
}

fn decode_w(w: &AnyValue) -> Option<(String, i64, i64, String)> {
    match w.as_list()? {
        [AnyValue::Str(f), n, m, AnyValue::Str(tag)] => Some((f.clone(), n.as_int()?, m.as_int()?, tag.clone())),
        _ => None,
    }
}

fn decode_args(x: &AnyValue) -> Option<(String, i64, i64)> {
    match x.as_list()? {
        [AnyValue::Ptr(PtrVal::Func(f)), n, m] => Some((f.clone(), n.as_int()?, m.as_int()?)),
        _ => None,
    }
}

/// `repeat(f, n, m)` over callees whose spec in `S_f` is at least as strong as
/// `{depth ω} [m] ↦ sem(m)`; depth `ω + n`, returns `sem^n(m)`.
pub fn h_rp(sems: Vec<FunSem>) -> HigherOrderCond {
    HigherOrderCond::new("repeat", move |s_f| {
        let mut records = Vec::new();
        let mut admitted: Vec<(String, FunSem)> = Vec::new();
        for callee in s_f.keys() {
            for sem in &sems {
                let want: Conds = [(callee.clone(), expected_callee(sem))].into();
                let ok = conds_leq_with(&want, &restrict(s_f, &[callee.as_str()]), &[sample_witness(callee)]);
                records.push(Instantiation { callee: callee.clone(), sem: sem.tag.clone(), admitted: ok });
                if ok {
                    admitted.push((callee.clone(), sem.clone()));
                }
            }
        }
        let label = format!(
            "repeat[{}]",
            admitted.iter().map(|(c, s)| format!("{c}:{}", s.tag)).collect::<Vec<_>>().join(",")
        );
        let adm = Arc::new(admitted);
        let (a1, a2, a3) = (adm.clone(), adm.clone(), adm);
        let c = Cond::new(label, ChoiceDomain::Unbounded("repeat-w".into()))
            .witness(move |x_a, _| match decode_args(x_a) {
                Some((f, n, m)) => a1
                    .iter()
                    .filter(|(c, _)| *c == f)
                    .map(|(_, s)| {
                        AnyValue::List(vec![AnyValue::str(f.clone()), AnyValue::Int(n), AnyValue::Int(m), AnyValue::str(s.tag.clone())])
                    })
                    .collect(),
                None => Vec::new(),
            })
            .depth(|w| {
                let n = decode_w(w).map(|(_, n, _, _)| n).unwrap_or(0);
                Depth::Pure(Ordinal::omega_plus(u32::try_from(n.max(0)).unwrap_or(u32::MAX)))
            })
            .pre(move |w, x, x_a| {
                let ok = decode_w(w).is_some_and(|(f, n, m, tag)| {
                    x == x_a
                        && decode_args(x) == Some((f.clone(), n, m))
                        && n >= 0
                        && a2.iter().any(|(c, s)| *c == f && s.tag == tag)
                });
                RProp::Pure(ok)
            })
            .post(move |w, r, r_a| {
                let want = decode_w(w).and_then(|(f, n, m, tag)| {
                    let (_, s) = a3.iter().find(|(c, s)| *c == f && s.tag == tag)?;
                    s.iterate(n, m)
                });
                RProp::Pure(r == r_a && want.is_some() && r.as_int() == want)
            });
        Instance { conds: table(vec![("RP.repeat", c)]), records }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pcm::eval_rprop;

    fn args(f: &str, n: i64, m: i64) -> AnyValue {
        AnyValue::List(vec![AnyValue::Ptr(PtrVal::Func(f.into())), AnyValue::Int(n), AnyValue::Int(m)])
    }

    #[test]
    fn repeat_instantiates_with_successor() {
        let inst = h_rp(vec![successor(), FunSem::new("double", |m| m.checked_mul(2))]).instantiate(&s_sc());
        assert_eq!(
            inst.records,
            vec![
                Instantiation { callee: "SC.succ".into(), sem: "succ".into(), admitted: true },
                Instantiation { callee: "SC.succ".into(), sem: "double".into(), admitted: false },
            ]
        );
        let c = &inst.conds["RP.repeat"];
        for n in 0..6 {
            let x = args("SC.succ", n, n);
            let ws = c.w_candidates(&x, &Resource::Unit);
            assert_eq!(ws.len(), 1);
            assert_eq!((c.depth)(&ws[0]), Depth::Pure(Ordinal::omega_plus(n as u32)));
            assert!(eval_rprop(&(c.pre)(&ws[0], &x, &x), &Resource::Unit).unwrap());
            let r = AnyValue::Int(2 * n);
            assert!(eval_rprop(&(c.post)(&ws[0], &r, &r), &Resource::Unit).unwrap());
            assert!(!eval_rprop(&(c.post)(&ws[0], &AnyValue::Int(2 * n + 1), &AnyValue::Int(2 * n + 1)), &Resource::Unit).unwrap());
        }
        let neg = args("SC.succ", -1, 0);
        assert!(c.w_candidates(&neg, &Resource::Unit).iter().all(|w| !eval_rprop(&(c.pre)(w, &neg, &neg), &Resource::Unit).unwrap()));
    }

    #[test]
    fn wrong_callee_spec_is_not_admitted() {
        let mut s = s_sc();
        let bad = Cond::new("sc.bad", ChoiceDomain::Unbounded("int".into()))
            .depth_const(Depth::Pure(Ordinal::ZERO))
            .pre(|m, x, x_a| RProp::Pure(x == x_a && *x == AnyValue::List(vec![m.clone()])))
            .post(|m, r, _| RProp::Pure(r.as_int() == m.as_int().map(|m| m + 2)));
        s.insert("SC.succ".into(), bad);
        let inst = h_rp(vec![successor()]).instantiate(&s);
        assert!(!inst.records[0].admitted);
        assert!(inst.conds["RP.repeat"].w_candidates(&args("SC.succ", 1, 1), &Resource::Unit).is_empty());
    }
}
