//! Pre-abstractions, erasure and the conditional wrapper translation.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::json;
use thiserror::Error;

use super::{Cond, Conds, Depth, Ordinal};
use crate::ems::{
    apc, assume, call, choose, get, guarantee, interp_st, ordinal_value, put, ret, take, value_ordinal, AnyValue,
    ChoiceDomain, Computation, Event, FunctionDef, Handler, Module,
};
use crate::pcm::{add, eval_rprop, valid, RProp, Resource};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpcError {
    #[error("module {module}: functions {funs:?} do not match spec table {specs:?}")]
    DomainMismatch { module: String, funs: Vec<String>, specs: Vec<String> },
    #[error("main's precondition does not hold on {0}")]
    PreconditionUnsatisfied(Resource),
    #[error("initial resources are not jointly valid: {0}")]
    GlobalInvalidity(Resource),
    #[error("caller specs are not below the provided specs: {0}")]
    SpecNotBelow(String),
    #[error("no spec for main")]
    NoMain,
    #[error(transparent)]
    Beh(#[from] crate::behavior::BehError),
}

/// A module whose bodies may use `apc()`, plus its initial resource.
#[derive(Clone, Debug)]
pub struct PreAbstraction {
    pub name: String,
    pub init: AnyValue,
    pub funs: BTreeMap<String, FunctionDef>,
    pub sigma: Resource,
}

impl PreAbstraction {
    pub fn new(name: impl Into<String>, init: AnyValue, sigma: Resource) -> PreAbstraction {
        PreAbstraction { name: name.into(), init, funs: BTreeMap::new(), sigma }
    }

    pub fn with_fun(
        mut self,
        name: impl Into<String>,
        f: impl Fn(AnyValue) -> Computation + Send + Sync + 'static,
    ) -> PreAbstraction {
        self.funs.insert(name.into(), FunctionDef::new(f));
        self
    }

    pub fn fun_names(&self) -> Vec<String> {
        self.funs.keys().cloned().collect()
    }

    /// An ordinary module used as a pre-abstraction without `apc()`.
    pub fn from_module(m: &Module, sigma: Resource) -> PreAbstraction {
        PreAbstraction { name: m.name.clone(), init: m.init.clone(), funs: m.funs.clone(), sigma }
    }
}

/// Replaces every `apc()` by `ret ()` and drops the resource.
pub fn erase(a: &PreAbstraction) -> Module {
    let mut m = Module::new(a.name.clone(), a.init.clone());
    for (n, f) in &a.funs {
        let f = f.clone();
        m = m.with_fun(n.clone(), move |x| f.apply(x).erase_apc());
    }
    m
}

/// Finite universes for exhaustive checking of wrapped modules.
#[derive(Clone, Debug)]
pub struct CheckDomains {
    pub resources: Vec<Resource>,
    pub values: Vec<AnyValue>,
    pub apc_bound: Ordinal,
}

impl CheckDomains {
    pub fn new(resources: Vec<Resource>, values: Vec<AnyValue>) -> CheckDomains {
        CheckDomains { resources, values, apc_bound: Ordinal::omega_plus(8) }
    }

    fn res(&self) -> ChoiceDomain {
        ChoiceDomain::Explicit(self.resources.iter().cloned().map(AnyValue::Res).collect())
    }

    fn values_with(&self, v: &AnyValue) -> ChoiceDomain {
        let mut vs = vec![v.clone()];
        vs.extend(self.values.iter().filter(|x| *x != v).cloned());
        ChoiceDomain::Explicit(vs)
    }
}

#[derive(Clone, Debug)]
pub enum Mode {
    Check(CheckDomains),
    /// Every wrapper choice is left unbounded, tagged with JSON context for the ACT resolver.
    Act,
}

fn tag(v: serde_json::Value) -> ChoiceDomain {
    ChoiceDomain::Unbounded(v.to_string())
}

fn jv(v: &AnyValue) -> serde_json::Value {
    serde_json::to_value(v).expect("values serialize")
}

fn jr(r: &Resource) -> serde_json::Value {
    serde_json::to_value(r).expect("resources serialize")
}

fn res_of(v: &AnyValue) -> Option<Resource> {
    v.as_res().cloned()
}

fn holds(p: &RProp, sigma: &Resource) -> bool {
    eval_rprop(p, sigma).unwrap_or(false)
}

fn sum_valid(rs: &[&Resource]) -> bool {
    let mut acc = Resource::Unit;
    for r in rs {
        match add(&acc, r) {
            Ok(s) => acc = s,
            Err(_) => return false,
        }
    }
    valid(&acc)
}

/// Predicate over `(xr, xr_a)` producing the condition on σ.
pub type Pred = Arc<dyn Fn(&AnyValue, &AnyValue) -> RProp + Send + Sync>;

/// Where a wrapper choice happens; part of the resolver tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Site {
    Entry,
    Post,
    Pre,
    Ret,
}

impl Site {
    pub fn name(self) -> &'static str {
        match self {
            Site::Entry => "entry",
            Site::Post => "post",
            Site::Pre => "pre",
            Site::Ret => "ret",
        }
    }
}

/// take (xr_a, eres, σ); check cond and validity against mres; yield `[xr_a, eres]`.
pub fn asm(pred: Pred, xr: AnyValue, lres: Resource, mode: &Mode, site: Site, fname: &str) -> Computation {
    let dom = match mode {
        Mode::Check(cd) => ChoiceDomain::Product(vec![cd.values_with(&xr), cd.res(), cd.res()]),
        Mode::Act => tag(json!({"kind": "asm", "site": site.name(), "fn": fname, "xr": jv(&xr), "lres": jr(&lres)})),
    };
    take(dom).bind(move |t| {
        let (xr, lres, pred) = (xr.clone(), lres.clone(), pred.clone());
        let parts = t.as_list().map(|l| l.to_vec()).unwrap_or_default();
        let (Some(xr_a), Some(eres), Some(sigma)) =
            (parts.first().cloned(), parts.get(1).and_then(res_of), parts.get(2).and_then(res_of))
        else {
            return assume(false);
        };
        get().bind(move |st| {
            let Some(mres) = st.as_pair().and_then(|(_, m)| res_of(m)) else {
                return assume(false);
            };
            assume(holds(&pred(&xr, &xr_a), &sigma))
                .then(assume(sum_valid(&[&mres, &lres, &eres, &sigma])))
                .then(ret(AnyValue::List(vec![xr_a.clone(), AnyValue::Res(eres.clone())])))
        })
    })
}

/// choose (xr, mres', lres, σ); store mres'; guarantee cond and validity; yield `[xr, lres]`.
pub fn grt(pred: Pred, xr_a: AnyValue, eres: Resource, mode: &Mode, site: Site, fname: &str) -> Computation {
    let dom = match mode {
        Mode::Check(cd) => ChoiceDomain::Product(vec![cd.values_with(&xr_a), cd.res(), cd.res(), cd.res()]),
        Mode::Act => tag(json!({"kind": "grt", "site": site.name(), "fn": fname, "xr_a": jv(&xr_a), "eres": jr(&eres)})),
    };
    choose(dom).bind(move |t| {
        let (xr_a, eres, pred) = (xr_a.clone(), eres.clone(), pred.clone());
        let parts = t.as_list().map(|l| l.to_vec()).unwrap_or_default();
        let (Some(xr), Some(mres), Some(lres), Some(sigma)) = (
            parts.first().cloned(),
            parts.get(1).and_then(res_of),
            parts.get(2).and_then(res_of),
            parts.get(3).and_then(res_of),
        ) else {
            return guarantee(false);
        };
        get().bind(move |st| {
            let Some((ms, _)) = st.as_pair() else {
                return assume(false);
            };
            put(AnyValue::pair(ms.clone(), AnyValue::Res(mres.clone())))
                .then(guarantee(holds(&pred(&xr, &xr_a), &sigma)))
                .then(guarantee(sum_valid(&[&mres, &lres, &eres, &sigma])))
                .then(ret(AnyValue::List(vec![xr.clone(), AnyValue::Res(lres.clone())])))
        })
    })
}

fn pre_of(c: &Cond, w: &AnyValue) -> Pred {
    let (p, w) = (c.pre.clone(), w.clone());
    Arc::new(move |x, x_a| p(&w, x, x_a))
}

fn post_of(c: &Cond, w: &AnyValue) -> Pred {
    let (q, w) = (c.post.clone(), w.clone());
    Arc::new(move |r, r_a| q(&w, r, r_a))
}

fn split2(v: &AnyValue) -> (AnyValue, Resource) {
    match v.as_list() {
        Some([a, AnyValue::Res(r)]) => (a.clone(), r.clone()),
        _ => (AnyValue::Unit, Resource::Invalid),
    }
}

fn depth_value(d: Depth) -> AnyValue {
    match d {
        Depth::Inf => AnyValue::str("inf"),
        Depth::Pure(o) => ordinal_value(o),
    }
}

fn value_depth(v: &AnyValue) -> Option<Depth> {
    match v {
        AnyValue::Str(s) if s == "inf" => Some(Depth::Inf),
        _ => value_ordinal(v).map(Depth::Pure),
    }
}

/// Caller side of a call at depth budget `d`; yields `[r_a, eres]`.
pub fn call_def(s: Option<Cond>, d: Depth, eres: Resource, fname: String, x_a: AnyValue, mode: Mode) -> Computation {
    let Some(c) = s else {
        return guarantee(false);
    };
    let dom = match &mode {
        Mode::Check(_) => c.w.clone(),
        Mode::Act => tag(json!({"kind": "w", "fn": fname, "x_a": jv(&x_a), "eres": jr(&eres)})),
    };
    choose(dom).bind(move |w| {
        let (c, fname, mode) = (c.clone(), fname.clone(), mode.clone());
        guarantee((c.depth)(&w).le(&d))
            .then(grt(pre_of(&c, &w), x_a.clone(), eres.clone(), &mode, Site::Pre, &fname))
            .bind(move |xl| {
                let (x, lres) = split2(&xl);
                let (c, w, fname, mode) = (c.clone(), w.clone(), fname.clone(), mode.clone());
                call(fname.clone(), x).bind(move |r| asm(post_of(&c, &w), r, lres.clone(), &mode, Site::Post, &fname))
            })
    })
}

/// Stands for a bounded sequence of pure calls below depth `d`; yields `[value, eres]`.
pub fn apc_def(s_in: Arc<Conds>, d: Depth, eres: Resource, mode: Mode) -> Computation {
    let bound = match &mode {
        Mode::Check(cd) => cd.apc_bound,
        Mode::Act => Ordinal::omega_plus(8),
    };
    choose(ChoiceDomain::OrdinalsBelow(bound)).bind(move |i| {
        let i = value_ordinal(&i).unwrap_or(Ordinal::ZERO);
        apc_step(s_in.clone(), d, eres.clone(), i, mode.clone())
    })
}

fn apc_step(s_in: Arc<Conds>, d: Depth, eres: Resource, i: Ordinal, mode: Mode) -> Computation {
    choose(ChoiceDomain::Booleans).bind(move |b| {
        let (s_in, eres, mode) = (s_in.clone(), eres.clone(), mode.clone());
        if b != AnyValue::Bool(true) {
            let dom = match &mode {
                Mode::Check(cd) => ChoiceDomain::Explicit(cd.values.clone()),
                Mode::Act => tag(json!({"kind": "apc-ret"})),
            };
            return choose(dom).map(move |v| AnyValue::List(vec![v, AnyValue::Res(eres.clone())]));
        }
        let dom = match &mode {
            Mode::Check(cd) => {
                let below = match d {
                    Depth::Inf => cd.apc_bound,
                    Depth::Pure(o) => o,
                };
                let depths: Vec<AnyValue> =
                    below.below(crate::ems::ORDINAL_ENUM_CAP).into_iter().map(|o| depth_value(Depth::Pure(o))).collect();
                ChoiceDomain::Product(vec![
                    ChoiceDomain::Explicit(s_in.keys().cloned().map(AnyValue::Str).collect()),
                    ChoiceDomain::Explicit(cd.values.clone()),
                    ChoiceDomain::Explicit(depths),
                ])
            }
            Mode::Act => tag(json!({"kind": "apc-call", "depth": d.to_string()})),
        };
        choose(dom).bind(move |t| {
            let (s_in, eres, mode) = (s_in.clone(), eres.clone(), mode.clone());
            let parts = t.as_list().map(|l| l.to_vec()).unwrap_or_default();
            let (Some(fname), Some(x_a), Some(d2)) = (
                parts.first().and_then(|v| v.as_str()).map(str::to_string),
                parts.get(1).cloned(),
                parts.get(2).and_then(value_depth),
            ) else {
                return guarantee(false);
            };
            let c = s_in.get(&fname).cloned();
            guarantee(d2.lt(&d)).then(call_def(c, d2, eres, fname, x_a, mode.clone())).bind(move |re| {
                let (_, eres) = split2(&re);
                let (s_in, mode) = (s_in.clone(), mode.clone());
                choose(ChoiceDomain::OrdinalsBelow(i)).bind(move |j| {
                    let j = value_ordinal(&j).unwrap_or(Ordinal::ZERO);
                    apc_step(s_in.clone(), d, eres.clone(), j, mode.clone())
                })
            })
        })
    })
}

/// Callee side: the wrapped body of one function.
pub fn fun_def(s_in: Arc<Conds>, c: Cond, f: FunctionDef, fname: String, mode: Mode) -> FunctionDef {
    FunctionDef::new(move |x| {
        let (s_in, c, f, fname, mode) = (s_in.clone(), c.clone(), f.clone(), fname.clone(), mode.clone());
        let dom = match &mode {
            Mode::Check(_) => c.w.clone(),
            Mode::Act => tag(json!({"kind": "w-take", "fn": fname})),
        };
        take(dom).bind(move |w| {
            let (s_in, c, f, fname, mode) = (s_in.clone(), c.clone(), f.clone(), fname.clone(), mode.clone());
            asm(pre_of(&c, &w), x.clone(), Resource::Unit, &mode, Site::Entry, &fname).bind(move |xe| {
                let (x_a, eres) = split2(&xe);
                let body = match (c.depth)(&w) {
                    Depth::Inf => {
                        let h = body_handler(s_in.clone(), mode.clone());
                        interp_st(f.apply(x_a), AnyValue::Res(eres), h).map(|p| match p.as_pair() {
                            Some((r, e)) => AnyValue::List(vec![r.clone(), e.clone()]),
                            None => AnyValue::List(vec![AnyValue::Unit, AnyValue::Res(Resource::Invalid)]),
                        })
                    }
                    d => apc_def(s_in.clone(), d, eres, mode.clone()),
                };
                let (c, w, fname, mode) = (c.clone(), w.clone(), fname.clone(), mode.clone());
                body.bind(move |re| {
                    let (r_a, eres) = split2(&re);
                    grt(post_of(&c, &w), r_a, eres, &mode, Site::Ret, &fname).map(|xl| split2(&xl).0)
                })
            })
        })
    })
}

fn body_handler(s_in: Arc<Conds>, mode: Mode) -> Handler {
    Arc::new(move |ev: &Event, st: &AnyValue| {
        let frm = st.as_res().cloned().unwrap_or(Resource::Invalid);
        let pack = |re: AnyValue| {
            let (r, e) = split2(&re);
            AnyValue::pair(r, AnyValue::Res(e))
        };
        match ev {
            Event::Call(fname, x_a) => Some(
                call_def(s_in.get(fname).cloned(), Depth::Inf, frm, fname.clone(), x_a.clone(), mode.clone()).map(pack),
            ),
            Event::Apc => Some(apc_def(s_in.clone(), Depth::Inf, frm, mode.clone()).map(pack)),
            Event::Put(ms) => {
                let (ms, frm) = (ms.clone(), frm.clone());
                Some(get().bind(move |cur| {
                    let Some(mres) = cur.as_pair().map(|(_, m)| m.clone()) else {
                        return assume(false);
                    };
                    put(AnyValue::pair(ms.clone(), mres)).then(ret(AnyValue::pair(AnyValue::Unit, AnyValue::Res(frm.clone()))))
                }))
            }
            Event::Get => Some(get().bind(move |cur| match cur.as_pair() {
                Some((ms, _)) => ret(AnyValue::pair(ms.clone(), AnyValue::Res(frm.clone()))),
                None => assume(false),
            })),
            _ => None,
        }
    })
}

/// `⟨S_in ⋉ A, σ : S_out⟩`.
pub fn wrap_module(s_in: &Conds, a: &PreAbstraction, s_out: &Conds, mode: &Mode) -> Result<Module, SpcError> {
    let funs = a.fun_names();
    let specs: Vec<String> = s_out.keys().cloned().collect();
    if funs != specs {
        return Err(SpcError::DomainMismatch { module: a.name.clone(), funs, specs });
    }
    let s_in = Arc::new(s_in.clone());
    let mut m = Module::new(a.name.clone(), AnyValue::pair(a.init.clone(), AnyValue::Res(a.sigma.clone())));
    for (n, f) in &a.funs {
        let wrapped = fun_def(s_in.clone(), s_out[n].clone(), f.clone(), n.clone(), mode.clone());
        m = m.with_fun(n.clone(), move |x| wrapped.apply(x));
    }
    Ok(m)
}

/// Calls arbitrary functions of `ns_in` with arbitrary arguments, then returns anything.
pub fn mk_safe(name: &str, ns_in: &[&str], ns_out: &[&str], mode: &Mode) -> PreAbstraction {
    let ns_in: Vec<AnyValue> = ns_in.iter().map(|n| AnyValue::str(*n)).collect();
    let mut a = PreAbstraction::new(name, AnyValue::Unit, Resource::Unit);
    for f in ns_out {
        let (ns_in, mode) = (ns_in.clone(), mode.clone());
        a = a.with_fun(*f, move |_| safe_loop(ns_in.clone(), mode.clone()));
    }
    a
}

fn safe_loop(ns_in: Vec<AnyValue>, mode: Mode) -> Computation {
    choose(ChoiceDomain::Booleans).bind(move |b| {
        let (ns_in, mode) = (ns_in.clone(), mode.clone());
        let values = match &mode {
            Mode::Check(cd) => ChoiceDomain::Explicit(cd.values.clone()),
            Mode::Act => tag(json!({"kind": "safe-value"})),
        };
        if b != AnyValue::Bool(true) {
            return choose(values);
        }
        choose(ChoiceDomain::Product(vec![ChoiceDomain::Explicit(ns_in.clone()), values])).bind(move |t| {
            let (ns_in, mode) = (ns_in.clone(), mode.clone());
            match t.as_list() {
                Some([AnyValue::Str(g), arg]) => call(g.clone(), arg.clone()).then(safe_loop(ns_in, mode)),
                _ => guarantee(false),
            }
        })
    })
}

/// An `apc()` body for pure abstractions: `apc(); ret v`.
pub fn apc_then(v: AnyValue) -> Computation {
    apc().then(ret(v))
}
