//! Paired runs: a seeded implementation run, then a search for the same
//! observable stream in the abstraction.

use serde::Serialize;

use crate::behavior::{with_big_stack, ObsEvent};
use crate::ems::{load, run, AnyValue, ExecError, ModuleSet, ObsEnv, RunEnd, RunError, SeededResolver, StepResult, SystemState};

fn label(e: &ObsEvent) -> String {
    if e.name == "print" {
        match &e.arg {
            AnyValue::Str(s) => format!("print {s}"),
            v => format!("print {v}"),
        }
    } else {
        e.to_string()
    }
}

fn end_label(e: &RunEnd) -> String {
    match e {
        RunEnd::Term(v) => format!("term {v}"),
        RunEnd::Error(m) => format!("error: {m}"),
        RunEnd::Partial(m) => format!("partial ({m})"),
    }
}

/// First point where the two runs disagree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Divergence {
    pub seed: u64,
    /// Events both sides agree on.
    pub prefix: Vec<String>,
    /// What the implementation did next.
    pub implementation: String,
    /// What the abstraction could do instead.
    pub abstraction: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleGap {
    pub seed: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DiffReport {
    pub pairs: usize,
    pub matched: usize,
    /// Implementation runs that hit UB; nothing is required of the abstraction.
    pub impl_ub: usize,
    pub divergences: Vec<Divergence>,
    pub oracle_gaps: Vec<OracleGap>,
}

impl DiffReport {
    pub fn clean(&self) -> bool {
        self.divergences.is_empty() && self.oracle_gaps.is_empty()
    }
}

/// Bounds for the abstraction-side search.
#[derive(Debug, Clone)]
pub struct DiffBounds {
    pub impl_fuel: u64,
    pub abs_fuel: u64,
    /// Total abstraction steps over all explored branches of one pair.
    pub search_budget: u64,
}

impl DiffBounds {
    pub fn new(impl_fuel: u64) -> DiffBounds {
        DiffBounds { impl_fuel, abs_fuel: impl_fuel * 8 + 1000, search_budget: 2_000_000 }
    }
}

enum Found {
    Ok,
    Fail { at: usize, got: Vec<String> },
    Gap(String),
}

struct Search<'a> {
    target: &'a [ObsEvent],
    end: &'a RunEnd,
    bounds: &'a DiffBounds,
    spent: u64,
}

impl Search<'_> {
    fn done(&self, pos: usize) -> bool {
        pos == self.target.len() && matches!(self.end, RunEnd::Partial(_))
    }

    fn fail(&self, pos: usize, got: String) -> Found {
        if self.done(pos) {
            Found::Ok
        } else {
            Found::Fail { at: pos, got: vec![got] }
        }
    }

    fn go(&mut self, mut sys: SystemState, mut pos: usize) -> Found {
        loop {
            if self.done(pos) {
                return Found::Ok;
            }
            if sys.steps >= self.bounds.abs_fuel {
                return self.fail(pos, "out of fuel".into());
            }
            self.spent += 1;
            if self.spent > self.bounds.search_budget {
                return Found::Gap("search budget exhausted".into());
            }
            match sys.step() {
                StepResult::Continue => {}
                StepResult::Terminated(v) => {
                    let want = RunEnd::Term(v.clone());
                    return if pos == self.target.len() && *self.end == want {
                        Found::Ok
                    } else {
                        self.fail(pos, end_label(&want))
                    };
                }
                StepResult::Errored(ExecError::UndefinedBehavior) => return Found::Ok,
                StepResult::Errored(e) => {
                    return if pos == self.target.len() && matches!(self.end, RunEnd::Error(_)) {
                        Found::Ok
                    } else {
                        self.fail(pos, format!("error: {e}"))
                    };
                }
                StepResult::NeedsObsAnswer(name, arg) => match self.target.get(pos) {
                    Some(ev) if ev.name == name && ev.arg == arg => {
                        sys.resume(ev.ret.clone());
                        pos += 1;
                    }
                    _ => return self.fail(pos, label(&ObsEvent::new(name, arg, AnyValue::Unit))),
                },
                StepResult::NeedsChoice(dom, angelic) => {
                    let xs = match dom.enumerate() {
                        Ok(xs) => xs,
                        Err(tag) => return Found::Gap(format!("unbounded choice {tag}")),
                    };
                    if xs.is_empty() {
                        return if angelic { Found::Ok } else { self.fail(pos, "no behavior".into()) };
                    }
                    return self.branch(&sys, pos, xs, angelic);
                }
            }
        }
    }

    /// Angelic: every branch must match. Demonic: one branch suffices.
    fn branch(&mut self, sys: &SystemState, pos: usize, xs: Vec<AnyValue>, angelic: bool) -> Found {
        let mut best: Option<Found> = None;
        for x in xs {
            let r = self.go(sys.resumed(x), pos);
            match (&r, angelic) {
                (Found::Ok, false) | (Found::Fail { .. }, true) => return r,
                (Found::Gap(_), _) => return r,
                _ => {}
            }
            best = Some(match (best, r) {
                (None, r) => r,
                (Some(Found::Fail { at: a, got: mut g }), Found::Fail { at: b, got: h }) => {
                    if b > a {
                        Found::Fail { at: b, got: h }
                    } else {
                        if a == b {
                            g.extend(h.into_iter().filter(|x| !g.contains(x)).collect::<Vec<_>>());
                        }
                        Found::Fail { at: a, got: g }
                    }
                }
                (Some(b), _) => b,
            });
        }
        best.unwrap_or(Found::Ok)
    }
}

/// Runs `pairs` seeded implementation runs (seeds `seed..seed+pairs`) and
/// checks each observable stream against the abstraction.
pub fn diff_test(
    impl_mods: &ModuleSet,
    abs_mods: &ModuleSet,
    env: &ObsEnv,
    bounds: &DiffBounds,
    pairs: usize,
    seed: u64,
) -> Result<DiffReport, RunError> {
    let abs0 = load(abs_mods)?;
    let mut report = DiffReport { pairs, ..DiffReport::default() };
    for i in 0..pairs as u64 {
        let s = seed.wrapping_add(i);
        let out = run(impl_mods, &mut SeededResolver::new(s, env.clone()), bounds.impl_fuel)?;
        if out.end == RunEnd::Error(ExecError::UndefinedBehavior.to_string()) {
            report.impl_ub += 1;
            continue;
        }
        let events: Vec<ObsEvent> = out.log.iter().map(|r| ObsEvent::new(r.name.clone(), r.arg.clone(), r.ret.clone())).collect();
        let (sys, b, end) = (abs0.clone(), bounds.clone(), out.end.clone());
        let ev = events.clone();
        let found = with_big_stack(move || Search { target: &ev, end: &end, bounds: &b, spent: 0 }.go(sys, 0));
        match found {
            Found::Ok => report.matched += 1,
            Found::Gap(reason) => report.oracle_gaps.push(OracleGap { seed: s, reason }),
            Found::Fail { at, got } => report.divergences.push(Divergence {
                seed: s,
                prefix: events[..at].iter().map(label).collect(),
                implementation: events.get(at).map(label).unwrap_or_else(|| end_label(&out.end)),
                abstraction: got,
            }),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ems::{choose, obs, ret, ChoiceDomain, Module};

    fn printer(vals: Vec<i64>) -> ModuleSet {
        ModuleSet::new(vec![Module::new("M", AnyValue::Unit).with_fun("main", move |_| {
            choose(ChoiceDomain::Explicit(vals.iter().map(|v| AnyValue::Int(*v)).collect()))
                .bind(|v| obs("print", v).then(ret(AnyValue::Int(0))))
        })])
    }

    #[test]
    fn demonic_abstraction_covers_choices() {
        let b = DiffBounds::new(50);
        let r = diff_test(&printer(vec![1, 2]), &printer(vec![2, 1, 3]), &ObsEnv::new(), &b, 20, 0).unwrap();
        assert!(r.clean());
        assert_eq!(r.matched, 20);
        let r = diff_test(&printer(vec![1, 2]), &printer(vec![1]), &ObsEnv::new(), &b, 20, 0).unwrap();
        assert!(!r.divergences.is_empty());
        let d = &r.divergences[0];
        assert!(d.prefix.is_empty());
        assert_eq!(d.implementation, "print 2");
        assert_eq!(d.abstraction, ["print 1"]);
    }

    #[test]
    fn empty_main_matches() {
        let m = ModuleSet::new(vec![Module::new("M", AnyValue::Unit).with_fun("main", |_| ret(AnyValue::Int(0)))]);
        let r = diff_test(&m, &m, &ObsEnv::new(), &DiffBounds::new(10), 100, 7).unwrap();
        assert_eq!((r.matched, r.divergences.len()), (100, 0));
    }
}
