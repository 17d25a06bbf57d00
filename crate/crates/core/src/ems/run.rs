//! Single executions driven by a resolver.

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use super::{load, AnyValue, ChoiceDomain, ExecError, LoadError, ModuleSet, StepResult, SystemState};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("scripted resolver ran out of answers at {0}")]
    ResolverExhausted(String),
    #[error("no sampler registered for unbounded domain {0}")]
    UnresolvableDomain(String),
    #[error("resolver rejected input: {0}")]
    BadAnswer(String),
}

/// Finite answers (and argument alphabet) for one observable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct ObsTable {
    pub answers: Vec<AnyValue>,
    #[serde(default)]
    pub args: Vec<AnyValue>,
}

/// Environment response tables for observable events.
///
/// Observables without a table answer `()` (this is how `print` behaves).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct ObsEnv {
    pub tables: BTreeMap<String, ObsTable>,
    /// Return values used when a chaotic trace set is materialized.
    #[serde(default)]
    pub term_values: Vec<AnyValue>,
}

impl ObsEnv {
    pub fn new() -> ObsEnv {
        ObsEnv::default()
    }

    pub fn with(mut self, name: &str, answers: Vec<AnyValue>) -> ObsEnv {
        self.tables.entry(name.to_string()).or_default().answers = answers;
        self
    }

    pub fn with_args(mut self, name: &str, args: Vec<AnyValue>) -> ObsEnv {
        let t = self.tables.entry(name.to_string()).or_default();
        t.args = args;
        if t.answers.is_empty() {
            t.answers = vec![AnyValue::Unit];
        }
        self
    }

    pub fn answers(&self, name: &str) -> Vec<AnyValue> {
        match self.tables.get(name) {
            Some(t) if !t.answers.is_empty() => t.answers.clone(),
            _ => vec![AnyValue::Unit],
        }
    }

    /// Every `(name, arg, answer)` triple the environment can produce.
    pub fn alphabet(&self) -> Vec<(String, AnyValue, AnyValue)> {
        let mut out = Vec::new();
        for (name, t) in &self.tables {
            for a in &t.args {
                for r in self.answers(name) {
                    out.push((name.clone(), a.clone(), r));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObsRecord {
    pub name: String,
    pub arg: AnyValue,
    pub ret: AnyValue,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunEnd {
    Term(AnyValue),
    Error(String),
    Partial(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub log: Vec<ObsRecord>,
    pub end: RunEnd,
}

impl RunOutcome {
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.log {
            let line = json!({"obs": r.name, "arg": r.arg, "ret": r.ret});
            out.push_str(&line.to_string());
            out.push('\n');
        }
        let last = match &self.end {
            RunEnd::Term(v) => json!({"end": "term", "value": v}),
            RunEnd::Error(e) => json!({"end": "error", "reason": e}),
            RunEnd::Partial(e) => json!({"end": "partial", "reason": e}),
        };
        out.push_str(&last.to_string());
        out.push('\n');
        out
    }

    /// Arguments of every `print`, rendered as plain text.
    pub fn prints(&self) -> Vec<String> {
        self.log
            .iter()
            .filter(|r| r.name == "print")
            .map(|r| match &r.arg {
                AnyValue::Str(s) => s.clone(),
                v => v.to_string(),
            })
            .collect()
    }
}

/// Answers external nondeterminism during a single run.
pub trait Resolver {
    fn choice(
        &mut self,
        dom: &ChoiceDomain,
        angelic: bool,
        sys: &SystemState,
    ) -> Result<AnyValue, RunError>;
    fn obs(&mut self, name: &str, arg: &AnyValue) -> Result<AnyValue, RunError>;
}

pub type Sampler = Arc<dyn Fn(&mut ChaCha8Rng) -> AnyValue + Send + Sync>;

/// Pseudo-random resolver over enumerable domains and response tables.
pub struct SeededResolver {
    rng: ChaCha8Rng,
    env: ObsEnv,
    samplers: BTreeMap<String, Sampler>,
}

impl SeededResolver {
    pub fn new(seed: u64, env: ObsEnv) -> SeededResolver {
        SeededResolver { rng: ChaCha8Rng::seed_from_u64(seed), env, samplers: BTreeMap::new() }
    }

    pub fn with_sampler(mut self, tag: &str, s: Sampler) -> SeededResolver {
        self.samplers.insert(tag.to_string(), s);
        self
    }
}

impl Resolver for SeededResolver {
    fn choice(&mut self, dom: &ChoiceDomain, _: bool, _: &SystemState) -> Result<AnyValue, RunError> {
        match dom.enumerate() {
            Ok(xs) => {
                let i = self.rng.gen_range(0..xs.len());
                Ok(xs[i].clone())
            }
            Err(tag) => match self.samplers.get(&tag) {
                Some(s) => Ok(s(&mut self.rng)),
                None => Err(RunError::UnresolvableDomain(tag)),
            },
        }
    }

    fn obs(&mut self, name: &str, _: &AnyValue) -> Result<AnyValue, RunError> {
        let xs = self.env.answers(name);
        let i = self.rng.gen_range(0..xs.len());
        Ok(xs[i].clone())
    }
}

/// Replays a fixed list of answers; observables may have their own queues.
#[derive(Debug, Clone, Default)]
pub struct ScriptedResolver {
    pub choices: VecDeque<AnyValue>,
    pub obs_answers: BTreeMap<String, VecDeque<AnyValue>>,
    pub env: ObsEnv,
}

impl ScriptedResolver {
    pub fn new(choices: Vec<AnyValue>) -> ScriptedResolver {
        ScriptedResolver { choices: choices.into(), ..Default::default() }
    }

    pub fn with_obs(mut self, name: &str, answers: Vec<AnyValue>) -> ScriptedResolver {
        self.obs_answers.entry(name.to_string()).or_default().extend(answers);
        self
    }
}

impl Resolver for ScriptedResolver {
    fn choice(&mut self, dom: &ChoiceDomain, _: bool, _: &SystemState) -> Result<AnyValue, RunError> {
        self.choices
            .pop_front()
            .ok_or_else(|| RunError::ResolverExhausted(format!("choice over {dom}")))
    }

    fn obs(&mut self, name: &str, _: &AnyValue) -> Result<AnyValue, RunError> {
        if let Some(v) = self.obs_answers.get_mut(name).and_then(|q| q.pop_front()) {
            return Ok(v);
        }
        let answers = self.env.answers(name);
        if answers.len() == 1 && !self.obs_answers.contains_key(name) {
            return Ok(answers[0].clone());
        }
        Err(RunError::ResolverExhausted(format!("obs {name}")))
    }
}

/// Runs a loaded system to completion, fuel exhaustion, or a stuck point.
pub fn run_system(
    mut sys: SystemState,
    resolver: &mut dyn Resolver,
    max_steps: u64,
) -> Result<RunOutcome, RunError> {
    let mut log = Vec::new();
    loop {
        if sys.steps >= max_steps {
            return Ok(RunOutcome { log, end: RunEnd::Partial("fuel exhausted".into()) });
        }
        match sys.step() {
            StepResult::Continue => {}
            StepResult::Terminated(v) => return Ok(RunOutcome { log, end: RunEnd::Term(v) }),
            StepResult::Errored(e) => {
                return Ok(RunOutcome { log, end: RunEnd::Error(e.to_string()) });
            }
            StepResult::NeedsChoice(dom, angelic) => {
                if dom.size() == Some(0) {
                    let end = if angelic {
                        RunEnd::Error(ExecError::UndefinedBehavior.to_string())
                    } else {
                        RunEnd::Partial("no behavior".into())
                    };
                    return Ok(RunOutcome { log, end });
                }
                let v = resolver.choice(&dom, angelic, &sys)?;
                sys.resume(v);
            }
            StepResult::NeedsObsAnswer(name, arg) => {
                let ret = resolver.obs(&name, &arg)?;
                log.push(ObsRecord { name, arg, ret: ret.clone() });
                sys.resume(ret);
            }
        }
    }
}

pub fn run(mods: &ModuleSet, resolver: &mut dyn Resolver, max_steps: u64) -> Result<RunOutcome, RunError> {
    run_system(load(mods)?, resolver, max_steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ems::*;

    fn chooser() -> ModuleSet {
        ModuleSet::new(vec![Module::new("M", AnyValue::Unit).with_fun("main", |_| {
            choose(ChoiceDomain::IntRange(1, 9)).bind(|x| obs("print", x).then(ret(AnyValue::Int(0))))
        })])
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let a = run(&chooser(), &mut SeededResolver::new(7, ObsEnv::new()), 100).unwrap();
        let b = run(&chooser(), &mut SeededResolver::new(7, ObsEnv::new()), 100).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.end, RunEnd::Term(AnyValue::Int(0)));
        assert_eq!(a.to_json_lines(), b.to_json_lines());
    }

    #[test]
    fn scripted_exhaustion() {
        let err = run(&chooser(), &mut ScriptedResolver::new(vec![]), 100).unwrap_err();
        assert!(matches!(err, RunError::ResolverExhausted(_)));
        let ok = run(&chooser(), &mut ScriptedResolver::new(vec![AnyValue::Int(4)]), 100).unwrap();
        assert_eq!(ok.prints(), vec!["4"]);
    }

    #[test]
    fn unbounded_needs_sampler() {
        let m = Module::new("M", AnyValue::Unit)
            .with_fun("main", |_| choose(ChoiceDomain::Unbounded("any".into())));
        let mods = ModuleSet::new(vec![m]);
        let err = run(&mods, &mut SeededResolver::new(0, ObsEnv::new()), 10).unwrap_err();
        assert_eq!(err, RunError::UnresolvableDomain("any".into()));
        let mut r = SeededResolver::new(0, ObsEnv::new()).with_sampler("any", Arc::new(|_| AnyValue::Int(5)));
        assert_eq!(run(&mods, &mut r, 10).unwrap().end, RunEnd::Term(AnyValue::Int(5)));
    }

    #[test]
    fn fuel_exhaustion_is_partial() {
        let out = run(&chooser(), &mut SeededResolver::new(1, ObsEnv::new()), 2).unwrap();
        assert!(matches!(out.end, RunEnd::Partial(_)));
    }

    #[test]
    fn json_lines_end_marker() {
        let out = run(&chooser(), &mut ScriptedResolver::new(vec![AnyValue::Int(3)]), 100).unwrap();
        let lines: Vec<_> = out.to_json_lines().lines().map(String::from).collect();
        assert_eq!(lines.len(), 2);
        let first: serde_json::Value = serde_json::from_str(&lines[0]).unwrap();
        assert_eq!(first["obs"], "print");
        let last: serde_json::Value = serde_json::from_str(&lines[1]).unwrap();
        assert_eq!(last["end"], "term");
    }
}
