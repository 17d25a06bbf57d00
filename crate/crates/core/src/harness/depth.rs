//! Watches a running system and checks that pure calls strictly decrease depth.

use serde::Serialize;

use crate::ems::{load, ExecError, ModuleSet, Resolver, RunError, StepResult};
use crate::pcm::{eval_rprop, Resource};
use crate::spc::{Conds, Depth};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DepthChainReport {
    pub calls: usize,
    pub pure_calls: usize,
    /// Longest run of nested pure frames.
    pub longest_chain: usize,
    pub violations: Vec<String>,
    /// Depths of the pure calls in the order they were entered.
    pub trail: Vec<String>,
}

/// The depth a call gets from its cond: the first auxiliary value whose precondition holds.
pub fn call_depth(conds: &Conds, f: &str, arg: &crate::ems::AnyValue) -> Depth {
    let Some(c) = conds.get(f) else { return Depth::Inf };
    c.w_candidates(arg, &Resource::Unit)
        .into_iter()
        .find(|w| eval_rprop(&(c.pre)(w, arg, arg), &Resource::Unit).unwrap_or(false))
        .map(|w| (c.depth)(&w))
        .unwrap_or(Depth::Inf)
}

/// Runs `mods` once and checks every call made from a pure frame.
pub fn check_depth_chain(
    mods: &ModuleSet,
    conds: &Conds,
    resolver: &mut dyn Resolver,
    fuel: u64,
) -> Result<DepthChainReport, RunError> {
    let mut sys = load(mods)?;
    let mut stack = vec![Depth::Inf];
    let mut rep = DepthChainReport::default();
    while sys.steps < fuel {
        let before = sys.call_depth();
        match sys.step() {
            StepResult::Terminated(_) | StepResult::Errored(ExecError::UndefinedBehavior) => break,
            StepResult::Errored(e) => {
                rep.violations.push(e.to_string());
                break;
            }
            StepResult::Continue => {}
            StepResult::NeedsChoice(dom, angelic) => {
                if dom.size() == Some(0) {
                    break;
                }
                let v = resolver.choice(&dom, angelic, &sys)?;
                sys.resume(v);
            }
            StepResult::NeedsObsAnswer(name, arg) => {
                let v = resolver.obs(&name, &arg)?;
                sys.resume(v);
            }
        }
        let after = sys.call_depth();
        if after > before {
            let f = sys.current_function().to_string();
            let d = call_depth(conds, &f, sys.current_arg());
            let caller = *stack.last().expect("main frame");
            rep.calls += 1;
            if let Depth::Pure(o) = d {
                rep.pure_calls += 1;
                rep.trail.push(format!("{f}@{o}"));
            }
            if matches!(caller, Depth::Pure(_)) && !d.lt(&caller) {
                rep.violations.push(format!("{f} entered at {d:?} from a frame at {caller:?}"));
            }
            stack.push(d);
            let chain = stack.iter().rev().take_while(|d| matches!(d, Depth::Pure(_))).count();
            rep.longest_chain = rep.longest_chain.max(chain);
        } else if after < before {
            stack.pop();
        }
    }
    Ok(rep)
}
