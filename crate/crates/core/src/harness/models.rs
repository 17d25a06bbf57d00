//! Modules that need maps or nondeterminism and so are written directly against the event interface.

use crate::ems::{apc, assume, call, choose, delay, get, guarantee, obs, put, ret, AnyValue, ChoiceDomain, Computation, Module};
use crate::pcm::sigma::{table_empty, table_get, table_insert};
use crate::pcm::Resource;
use crate::spc::PreAbstraction;

fn ints(arg: &AnyValue) -> Option<Vec<i64>> {
    arg.as_list()?.iter().map(AnyValue::as_int).collect()
}

fn print(s: String) -> Computation {
    obs("print", AnyValue::str(s))
}

fn zero() -> Computation {
    ret(AnyValue::Int(0))
}

/// `App.init()` followed by `runs` calls of `App.run()`, forever when `None`.
fn drive_app(runs: Option<usize>) -> Computation {
    let init = call("App.init", AnyValue::nil());
    match runs {
        Some(k) => (0..k).fold(init, |c, _| c.then(call("App.run", AnyValue::nil()))).then(zero()),
        None => init.then(run_forever()),
    }
}

fn run_forever() -> Computation {
    call("App.run", AnyValue::nil()).then(delay(run_forever))
}

/// The MW abstraction: a total map from indices to values, initially zero.
pub fn mw_abstraction(runs: Option<usize>) -> Module {
    Module::new("MW", table_empty())
        .with_fun("main", move |_| drive_app(runs))
        .with_fun("MW.put", |arg| match ints(&arg).as_deref() {
            Some(&[i, v]) => get().bind(move |full| {
                put(table_insert(&full, i, v)).then(print(format!("put:{i}{v}"))).then(zero())
            }),
            _ => assume(false),
        })
        .with_fun("MW.get", |arg| match ints(&arg).as_deref() {
            Some(&[i]) => get().bind(move |full| {
                let r = table_get(&full, i).unwrap_or(0);
                print(format!("get:{i}{r}")).then(ret(AnyValue::Int(r)))
            }),
            _ => assume(false),
        })
}

/// State of the intermediate MW: `[class, fast, map handle]`.
fn imw_state(cls: AnyValue, fast: AnyValue, h: AnyValue) -> AnyValue {
    AnyValue::List(vec![cls, fast, h])
}

fn imw_parts(st: &AnyValue) -> (AnyValue, AnyValue, AnyValue) {
    match st.as_list() {
        Some([c, f, h]) => (c.clone(), f.clone(), h.clone()),
        _ => (table_empty(), table_empty(), AnyValue::Int(0)),
    }
}

/// The intermediate MW: the first write to an index picks, nondeterministically,
/// whether it lives in the fast table (1) or in `Map` (2). Reading an index that
/// was never written is UB.
pub fn mw_intermediate(runs: Option<usize>) -> Module {
    Module::new("MW", imw_state(table_empty(), table_empty(), AnyValue::Int(0)))
        .with_fun("main", move |_| {
            call("Map.new", AnyValue::nil()).bind(move |h| {
                get().bind(move |st| {
                    let (c, f, _) = imw_parts(&st);
                    put(imw_state(c, f, h.clone())).then(drive_app(runs))
                })
            })
        })
        .with_fun("MW.put", |arg| match ints(&arg).as_deref() {
            Some(&[i, v]) => get().bind(move |st| {
                let (cls, fast, h) = imw_parts(&st);
                let pick = match table_get(&cls, i) {
                    Some(c) => ret(AnyValue::Int(c)),
                    None => choose(ChoiceDomain::Explicit(vec![AnyValue::Int(1), AnyValue::Int(2)])),
                };
                pick.bind(move |c| {
                    let c = c.as_int().unwrap_or(1);
                    let cls = table_insert(&cls, i, c);
                    let store = if c == 1 {
                        put(imw_state(cls, table_insert(&fast, i, v), h.clone()))
                    } else {
                        put(imw_state(cls, fast.clone(), h.clone()))
                            .then(call("Map.update", AnyValue::List(vec![h.clone(), AnyValue::Int(i), AnyValue::Int(v)])))
                    };
                    store.then(print(format!("put:{i}{v}"))).then(zero())
                })
            }),
            _ => assume(false),
        })
        .with_fun("MW.get", |arg| match ints(&arg).as_deref() {
            Some(&[i]) => get().bind(move |st| {
                let (cls, fast, h) = imw_parts(&st);
                let c = table_get(&cls, i);
                assume(c.is_some()).then(match c {
                    Some(1) => ret(AnyValue::Int(table_get(&fast, i).unwrap_or(0))),
                    _ => call("Map.get", AnyValue::List(vec![h, AnyValue::Int(i)])),
                })
                .bind(move |r| {
                    let n = r.as_int();
                    assume(n.is_some()).then(print(format!("get:{i}{}", n.unwrap_or(0)))).then(ret(r.clone()))
                })
            }),
            _ => assume(false),
        })
}

/// A pre-abstraction whose functions are only reachable through `apc()`.
pub fn pure_pre(name: &str, funs: &[&str]) -> PreAbstraction {
    funs.iter().fold(PreAbstraction::new(name, AnyValue::Unit, Resource::Unit), |a, f| a.with_fun(*f, |_| guarantee(false)))
}

/// `n = getint(); apc(); print(str(n + n))`.
pub fn ad_pre() -> PreAbstraction {
    PreAbstraction::new("AD", AnyValue::Unit, Resource::Unit).with_fun("main", |_| {
        obs("getint", AnyValue::nil()).bind(|n| match n.as_int().and_then(|n| n.checked_add(n)) {
            Some(d) => apc().then(print(d.to_string())).then(zero()),
            None => assume(false),
        })
    })
}
