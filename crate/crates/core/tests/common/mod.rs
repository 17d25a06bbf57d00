//! Micro-programs and a brute-force behavior enumerator that shares no code with the explorer.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

use ccr_core::behavior::{End, TraceSet};
use ccr_core::ems::{apc, assume, call, choose, delay, guarantee, obs, ret, take, AnyValue, ChoiceDomain, Computation, Module, ModuleSet, ObsEnv};
use rand::Rng;

pub const PRINT_ARGS: [i64; 2] = [1, 2];
pub const GETINT_ANSWERS: [i64; 2] = [0, 1];
pub const TERM_VALUES: [i64; 3] = [0, 1, 2];
/// Programs never emit more events than this, so chaos is compared up to it.
pub const MAX_EVENTS: usize = 4;

#[derive(Debug, Clone)]
pub enum Micro {
    Ret(i64),
    Print(i64, Box<Micro>),
    Tau(Box<Micro>),
    /// Continues with the branch indexed by the answer.
    GetInt(Box<Micro>, Box<Micro>),
    Choose(Vec<Micro>),
    Take(Vec<Micro>),
    Ub,
    Nb,
    Err,
    Apc(Box<Micro>),
}

impl Micro {
    pub fn comp(&self) -> Computation {
        let branches = |ps: &[Micro]| {
            let ps: Arc<Vec<Micro>> = Arc::new(ps.to_vec());
            let dom = ChoiceDomain::Explicit((0..ps.len() as i64).map(AnyValue::Int).collect());
            (dom, move |i: AnyValue| ps[i.as_int().unwrap() as usize].comp())
        };
        match self {
            Micro::Ret(v) => ret(AnyValue::Int(*v)),
            Micro::Print(n, k) => obs("print", AnyValue::Int(*n)).then(k.comp()),
            Micro::Tau(k) => {
                let k = k.clone();
                delay(move || k.comp())
            }
            Micro::GetInt(a, b) => {
                let (a, b) = (a.clone(), b.clone());
                obs("getint", AnyValue::nil()).bind(move |r| if r == AnyValue::Int(0) { a.comp() } else { b.comp() })
            }
            Micro::Choose(ps) => {
                let (d, k) = branches(ps);
                choose(d).bind(k)
            }
            Micro::Take(ps) => {
                let (d, k) = branches(ps);
                take(d).bind(k)
            }
            Micro::Ub => assume(false),
            Micro::Nb => guarantee(false),
            Micro::Err => call("Missing.f", AnyValue::Unit),
            Micro::Apc(k) => apc().then(k.comp()),
        }
    }

    pub fn module(&self) -> Module {
        let p = self.clone();
        Module::new("Micro", AnyValue::Unit).with_fun("main", move |_| p.comp())
    }

    pub fn system(&self) -> ModuleSet {
        ModuleSet::new(vec![self.module()])
    }

    pub fn has(&self, pred: &dyn Fn(&Micro) -> bool) -> bool {
        pred(self)
            || match self {
                Micro::Print(_, k) | Micro::Tau(k) | Micro::Apc(k) => k.has(pred),
                Micro::GetInt(a, b) => a.has(pred) || b.has(pred),
                Micro::Choose(ps) | Micro::Take(ps) => ps.iter().any(|p| p.has(pred)),
                _ => false,
            }
    }
}

/// At most `events` observable events on any path, at most 3 branches per choice.
pub fn gen_micro<R: Rng>(rng: &mut R, events: u32, depth: u32, with_apc: bool) -> Micro {
    fn sub<R: Rng>(rng: &mut R, events: u32, depth: u32, with_apc: bool) -> Box<Micro> {
        Box::new(gen_micro(rng, events, depth - 1, with_apc))
    }
    fn kids<R: Rng>(rng: &mut R, events: u32, depth: u32, with_apc: bool) -> Vec<Micro> {
        let n = rng.gen_range(0..=3);
        (0..n).map(|_| gen_micro(rng, events, depth - 1, with_apc)).collect()
    }
    if depth == 0 {
        return match rng.gen_range(0..10) {
            0 => Micro::Ub,
            1 => Micro::Nb,
            2 => Micro::Err,
            _ => Micro::Ret(TERM_VALUES[rng.gen_range(0..TERM_VALUES.len())]),
        };
    }
    match rng.gen_range(0..9) {
        0 | 1 if events > 0 => Micro::Print(PRINT_ARGS[rng.gen_range(0..2)], sub(rng, events - 1, depth, with_apc)),
        2 if events > 0 => Micro::GetInt(sub(rng, events - 1, depth, with_apc), sub(rng, events - 1, depth, with_apc)),
        3 => Micro::Tau(sub(rng, events, depth, with_apc)),
        4 | 5 => Micro::Choose(kids(rng, events, depth, with_apc)),
        6 | 7 => Micro::Take(kids(rng, events, depth, with_apc)),
        8 if with_apc => Micro::Apc(sub(rng, events, depth, with_apc)),
        _ => gen_micro(rng, events, 0, with_apc),
    }
}

/// Environment matching the micro-program alphabet.
pub fn micro_env() -> ObsEnv {
    let mut env = ObsEnv::new()
        .with_args("print", PRINT_ARGS.iter().map(|n| AnyValue::Int(*n)).collect())
        .with_args("getint", vec![AnyValue::nil()])
        .with("getint", GETINT_ANSWERS.iter().map(|n| AnyValue::Int(*n)).collect());
    env.term_values = TERM_VALUES.iter().map(|n| AnyValue::Int(*n)).collect();
    env
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Fin {
    Partial,
    Error,
    Term(i64),
}

pub type Flat = BTreeSet<(Vec<String>, Fin)>;

fn alphabet() -> Vec<String> {
    PRINT_ARGS.iter().map(|n| format!("print:{n}")).chain(GETINT_ANSWERS.iter().map(|n| format!("getint:{n}"))).collect()
}

/// Every trace with at most `n` events.
pub fn universe(n: usize) -> Flat {
    let ends: Vec<Fin> = [Fin::Partial, Fin::Error].into_iter().chain(TERM_VALUES.iter().map(|v| Fin::Term(*v))).collect();
    let mut out = Flat::new();
    let mut layer: Vec<Vec<String>> = vec![vec![]];
    for k in 0..=n {
        for evs in &layer {
            for e in &ends {
                out.insert((evs.clone(), e.clone()));
            }
        }
        if k < n {
            layer = layer.iter().flat_map(|evs| alphabet().into_iter().map(move |a| [evs.clone(), vec![a]].concat())).collect();
        }
    }
    out
}

fn prefixed(label: String, s: Flat) -> Flat {
    s.into_iter().map(|(mut evs, e)| {
        evs.insert(0, label.clone());
        (evs, e)
    }).collect()
}

/// Brute-force behaviors: one step per node; chaos is expanded by at most `n` more events.
pub fn oracle(p: &Micro, fuel: u64, n: usize) -> Flat {
    let mut s: Flat = [(vec![], Fin::Partial)].into_iter().collect();
    if fuel == 0 {
        return s;
    }
    match p {
        Micro::Ret(v) => {
            s.insert((vec![], Fin::Term(*v)));
        }
        Micro::Err => {
            s.insert((vec![], Fin::Error));
        }
        Micro::Ub => return universe(n),
        Micro::Nb => {}
        Micro::Tau(k) | Micro::Apc(k) => s.extend(oracle(k, fuel - 1, n)),
        Micro::Print(v, k) => s.extend(prefixed(format!("print:{v}"), oracle(k, fuel - 1, n.saturating_sub(1)))),
        Micro::GetInt(a, b) => {
            s.extend(prefixed("getint:0".into(), oracle(a, fuel - 1, n.saturating_sub(1))));
            s.extend(prefixed("getint:1".into(), oracle(b, fuel - 1, n.saturating_sub(1))));
        }
        Micro::Choose(ps) => {
            for q in ps {
                s.extend(oracle(q, fuel - 1, n));
            }
        }
        Micro::Take(ps) => {
            if ps.is_empty() {
                return universe(n);
            }
            let mut it = ps.iter().map(|q| oracle(q, fuel - 1, n));
            let first = it.next().unwrap();
            s.extend(it.fold(first, |acc, b| acc.intersection(&b).cloned().collect()));
        }
    }
    s
}

/// The explorer's set, expanded over the micro alphabet.
pub fn flatten(ts: &TraceSet, max_events: usize) -> Flat {
    ts.materialize(&micro_env(), max_events)
        .iter()
        .map(|t| {
            let evs = t
                .events
                .iter()
                .map(|e| match e.name.as_str() {
                    "print" => format!("print:{}", e.arg.as_int().unwrap()),
                    n => format!("{n}:{}", e.ret.as_int().unwrap()),
                })
                .collect();
            let end = match &t.end {
                End::Partial => Fin::Partial,
                End::Error => Fin::Error,
                End::Term(v) => Fin::Term(v.as_int().unwrap()),
                End::Chaos => unreachable!("materialized"),
            };
            (evs, end)
        })
        .collect()
}
