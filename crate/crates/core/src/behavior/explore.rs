//! Bounded behavior sets and closed refinement checking.

use thiserror::Error;

use super::{End, ObsEvent, Trace, TraceSet};
use crate::ems::{load, AnyValue, LoadError, ModuleSet, ObsEnv, StepResult, SystemState};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BehError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("cannot explore unbounded domain {0}")]
    UnboundedDomain(String),
    #[error("trace sets computed at different fuel bounds ({0} vs {1})")]
    BoundMismatch(u64, u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Refuted(Trace),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn witness(&self) -> Option<&Trace> {
        match self {
            Verdict::Holds => None,
            Verdict::Refuted(t) => Some(t),
        }
    }
}

/// Closure-built computations recurse on the native stack; exploration runs on
/// a worker thread with room for deep programs.
pub fn with_big_stack<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> T {
    std::thread::Builder::new()
        .stack_size(512 << 20)
        .spawn(f)
        .expect("spawn exploration thread")
        .join()
        .unwrap_or_else(|e| std::panic::resume_unwind(e))
}

/// Behaviors of the system from its current point, with `fuel` counted on `sys.steps`.
pub fn explore(mut sys: SystemState, fuel: u64, env: &ObsEnv) -> Result<TraceSet, BehError> {
    let partial = TraceSet::partial_only(fuel);
    loop {
        if sys.steps >= fuel {
            return Ok(partial);
        }
        match sys.step() {
            StepResult::Continue => {}
            StepResult::Terminated(v) => {
                return Ok(partial.union(&TraceSet::from_traces(fuel, [Trace::new(vec![], End::Term(v))])));
            }
            StepResult::Errored(_) => {
                return Ok(partial.union(&TraceSet::from_traces(fuel, [Trace::new(vec![], End::Error)])));
            }
            StepResult::NeedsChoice(dom, angelic) => {
                let xs = dom.enumerate().map_err(BehError::UnboundedDomain)?;
                if xs.is_empty() {
                    return Ok(if angelic { TraceSet::chaos(fuel) } else { partial });
                }
                let mut acc: Option<TraceSet> = None;
                for x in xs {
                    let b = explore(sys.resumed(x), fuel, env)?;
                    acc = Some(match acc {
                        None => b,
                        Some(a) if angelic => a.intersect(&b),
                        Some(a) => a.union(&b),
                    });
                    // Nothing below ·Partial survives an intersection.
                    if angelic && acc.as_ref().is_some_and(|a| *a == partial) {
                        break;
                    }
                }
                return Ok(partial.union(&acc.expect("nonempty domain")));
            }
            StepResult::NeedsObsAnswer(name, arg) => {
                let mut acc = partial;
                for r in env.answers(&name) {
                    let ev = ObsEvent::new(name.clone(), arg.clone(), r.clone());
                    acc = acc.union(&explore(sys.resumed(r), fuel, env)?.prefixed(&ev));
                }
                return Ok(acc);
            }
        }
    }
}

pub fn bounded_beh_from(sys: SystemState, fuel: u64, env: &ObsEnv) -> Result<TraceSet, BehError> {
    let env = env.clone();
    with_big_stack(move || explore(sys, fuel, &env))
}

pub fn bounded_beh(mods: &ModuleSet, fuel: u64, env: &ObsEnv) -> Result<TraceSet, BehError> {
    bounded_beh_from(load(mods)?, fuel, env)
}

/// First of `p·Error`, `p·Partial`, `p·Term(…)` absent from `rhs`.
fn chaos_witness(events: &[ObsEvent], rhs: &TraceSet) -> Trace {
    let mut ends = vec![End::Error, End::Partial, End::Term(AnyValue::Unit)];
    ends.extend((0..).take(rhs.len() + 1).map(|n| End::Term(AnyValue::Int(n))));
    for e in ends {
        let t = Trace::new(events.to_vec(), e);
        if !rhs.contains(&t) {
            return t;
        }
    }
    unreachable!("a finite set cannot contain every termination value")
}

pub fn check_inclusion(lhs: &TraceSet, rhs: &TraceSet) -> Result<Verdict, BehError> {
    if lhs.fuel != rhs.fuel {
        return Err(BehError::BoundMismatch(lhs.fuel, rhs.fuel));
    }
    let mut best: Option<Trace> = None;
    for t in lhs.iter() {
        if rhs.contains(t) {
            continue;
        }
        let w = if t.is_chaos() { chaos_witness(&t.events, rhs) } else { t.clone() };
        let better = match &best {
            None => true,
            Some(b) => (w.events.len(), &w) < (b.events.len(), b),
        };
        if better {
            best = Some(w);
        }
    }
    Ok(best.map_or(Verdict::Holds, Verdict::Refuted))
}

pub fn refine_closed(impl_mods: &ModuleSet, abs: &ModuleSet, fuel: u64, env: &ObsEnv) -> Result<Verdict, BehError> {
    let lhs = bounded_beh(impl_mods, fuel, env)?;
    let rhs = bounded_beh(abs, fuel, env)?;
    check_inclusion(&lhs, &rhs)
}
