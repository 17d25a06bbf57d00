//! Loading a closed module set and stepping it.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use super::{AnyValue, ChoiceDomain, Computation, Cont, Event, FunctionDef, ModuleSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error("function {0} is defined more than once")]
    DuplicateName(String),
    #[error("no module defines main")]
    NoMain,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error("call to unknown function {0}")]
    UnknownFunction(String),
    #[error("APC event outside a wrapped pre-abstraction")]
    StrayApc,
    #[error("undefined behavior")]
    UndefinedBehavior,
}

pub const TOP_MODULE: &str = "<top>";

pub struct Program {
    pub modules: Vec<String>,
    pub funs: BTreeMap<String, (String, FunctionDef)>,
    pub inits: BTreeMap<String, AnyValue>,
}

#[derive(Clone)]
pub struct Frame {
    pub module: String,
    pub fun: String,
    pub arg: AnyValue,
    cont: Cont,
}

#[derive(Debug, Clone)]
pub enum StepResult {
    Terminated(AnyValue),
    Errored(ExecError),
    NeedsChoice(ChoiceDomain, bool),
    NeedsObsAnswer(String, AnyValue),
    Continue,
}

#[derive(Clone)]
pub struct SystemState {
    prog: Arc<Program>,
    pub states: BTreeMap<String, AnyValue>,
    stack: Vec<Frame>,
    current: Computation,
    cur_module: String,
    cur_fun: String,
    cur_arg: AnyValue,
    pending: Option<Cont>,
    pub steps: u64,
}

pub fn load(mods: &ModuleSet) -> Result<SystemState, LoadError> {
    let mut funs = BTreeMap::new();
    let mut inits = BTreeMap::new();
    for m in &mods.mods {
        inits.insert(m.name.clone(), m.init.clone());
        for (f, def) in &m.funs {
            if funs.insert(f.clone(), (m.name.clone(), def.clone())).is_some() {
                return Err(LoadError::DuplicateName(f.clone()));
            }
        }
    }
    let Some((main_owner, main_def)) = funs.get("main").cloned() else {
        return Err(LoadError::NoMain);
    };
    let prog = Program {
        modules: mods.mods.iter().map(|m| m.name.clone()).collect(),
        funs,
        inits: inits.clone(),
    };
    Ok(SystemState {
        prog: Arc::new(prog),
        states: inits,
        stack: vec![Frame {
            module: TOP_MODULE.to_string(),
            fun: TOP_MODULE.to_string(),
            arg: AnyValue::Unit,
            cont: Arc::new(Computation::Done),
        }],
        current: main_def.apply(AnyValue::nil()),
        cur_module: main_owner,
        cur_fun: "main".to_string(),
        cur_arg: AnyValue::nil(),
        pending: None,
        steps: 0,
    })
}

impl SystemState {
    pub fn program(&self) -> &Program {
        &self.prog
    }

    pub fn current_module(&self) -> &str {
        &self.cur_module
    }

    pub fn current_function(&self) -> &str {
        &self.cur_fun
    }

    pub fn current_arg(&self) -> &AnyValue {
        &self.cur_arg
    }

    /// Active frames from outermost to innermost, excluding the running one.
    /// The first frame is the top-level caller of `main`.
    pub fn frames(&self) -> &[Frame] {
        &self.stack
    }

    pub fn call_depth(&self) -> usize {
        self.stack.len()
    }

    pub fn is_paused(&self) -> bool {
        self.pending.is_some()
    }

    /// The event the system is paused at, if any.
    pub fn paused_event(&self) -> Option<&Event> {
        if self.pending.is_some() { self.current.head_event() } else { None }
    }

    pub fn owner_of(&self, f: &str) -> Option<&str> {
        self.prog.funs.get(f).map(|(m, _)| m.as_str())
    }

    pub fn step(&mut self) -> StepResult {
        assert!(self.pending.is_none(), "step called while waiting for an answer");
        self.steps += 1;
        match self.current.clone() {
            Computation::Done(v) => match self.stack.pop() {
                Some(frame) if frame.module != TOP_MODULE => {
                    self.cur_module = frame.module;
                    self.cur_fun = frame.fun;
                    self.cur_arg = frame.arg;
                    self.current = (frame.cont)(v);
                    StepResult::Continue
                }
                _ => {
                    self.cur_module = TOP_MODULE.to_string();
                    self.current = Computation::Done(v.clone());
                    StepResult::Terminated(v)
                }
            },
            Computation::Silent(t) => {
                self.current = t();
                StepResult::Continue
            }
            Computation::Trigger(ev, k) => match ev {
                Event::Call(f, arg) => {
                    let Some((owner, def)) = self.prog.funs.get(&f).cloned() else {
                        return StepResult::Errored(ExecError::UnknownFunction(f));
                    };
                    self.stack.push(Frame {
                        module: std::mem::replace(&mut self.cur_module, owner),
                        fun: std::mem::replace(&mut self.cur_fun, f),
                        arg: std::mem::replace(&mut self.cur_arg, arg.clone()),
                        cont: k,
                    });
                    self.current = def.apply(arg);
                    StepResult::Continue
                }
                Event::Get => {
                    let st = self.states.get(&self.cur_module).cloned().unwrap_or(AnyValue::Unit);
                    self.current = k(st);
                    StepResult::Continue
                }
                Event::Put(v) => {
                    self.states.insert(self.cur_module.clone(), v);
                    self.current = k(AnyValue::Unit);
                    StepResult::Continue
                }
                Event::Apc => StepResult::Errored(ExecError::StrayApc),
                Event::Choose(d) => {
                    self.pending = Some(k);
                    StepResult::NeedsChoice(d, false)
                }
                Event::Take(d) => {
                    self.pending = Some(k);
                    StepResult::NeedsChoice(d, true)
                }
                Event::Obs(name, arg) => {
                    self.pending = Some(k);
                    StepResult::NeedsObsAnswer(name, arg)
                }
            },
        }
    }

    /// Supplies the answer to the event the system is paused at.
    pub fn resume(&mut self, answer: AnyValue) {
        let k = self.pending.take().expect("resume without a pending event");
        self.current = k(answer);
    }

    /// A copy resumed with `answer`, leaving `self` paused.
    pub fn resumed(&self, answer: AnyValue) -> SystemState {
        let mut s = self.clone();
        s.resume(answer);
        s
    }
}
