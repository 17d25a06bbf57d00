//! Events and resumable computations.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{AnyValue, ChoiceDomain};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Event {
    Choose(ChoiceDomain),
    Take(ChoiceDomain),
    Obs(String, AnyValue),
    Call(String, AnyValue),
    Get,
    Put(AnyValue),
    Apc,
}

pub type Cont = Arc<dyn Fn(AnyValue) -> Computation + Send + Sync>;
pub type Thunk = Arc<dyn Fn() -> Computation + Send + Sync>;
/// Handler used by [`interp_st`]: returns a replacement yielding `Pair(answer, state)`.
pub type Handler = Arc<dyn Fn(&Event, &AnyValue) -> Option<Computation> + Send + Sync>;

#[derive(Clone)]
pub enum Computation {
    Done(AnyValue),
    Silent(Thunk),
    Trigger(Event, Cont),
}

impl fmt::Debug for Computation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Computation::Done(v) => write!(f, "Done({v})"),
            Computation::Silent(_) => write!(f, "Silent(..)"),
            Computation::Trigger(e, _) => write!(f, "Trigger({e:?}, ..)"),
        }
    }
}

pub fn ret(v: AnyValue) -> Computation {
    Computation::Done(v)
}

pub fn unit() -> Computation {
    Computation::Done(AnyValue::Unit)
}

pub fn trigger(ev: Event) -> Computation {
    Computation::Trigger(ev, Arc::new(Computation::Done))
}

pub fn delay(f: impl Fn() -> Computation + Send + Sync + 'static) -> Computation {
    Computation::Silent(Arc::new(f))
}

pub fn choose(d: ChoiceDomain) -> Computation {
    trigger(Event::Choose(d))
}

pub fn take(d: ChoiceDomain) -> Computation {
    trigger(Event::Take(d))
}

pub fn obs(name: impl Into<String>, arg: AnyValue) -> Computation {
    trigger(Event::Obs(name.into(), arg))
}

pub fn call(f: impl Into<String>, arg: AnyValue) -> Computation {
    trigger(Event::Call(f.into(), arg))
}

pub fn get() -> Computation {
    trigger(Event::Get)
}

pub fn put(v: AnyValue) -> Computation {
    trigger(Event::Put(v))
}

pub fn apc() -> Computation {
    trigger(Event::Apc)
}

/// `assume(false)` is `take(∅)`: undefined behavior.
pub fn assume(p: bool) -> Computation {
    if p { unit() } else { take(ChoiceDomain::empty()) }
}

/// `guarantee(false)` is `choose(∅)`: no behavior.
pub fn guarantee(p: bool) -> Computation {
    if p { unit() } else { choose(ChoiceDomain::empty()) }
}

impl Computation {
    pub fn bind(self, k: impl Fn(AnyValue) -> Computation + Send + Sync + 'static) -> Computation {
        self.bind_arc(Arc::new(k))
    }

    pub fn bind_arc(self, k: Cont) -> Computation {
        match self {
            Computation::Done(v) => k(v),
            Computation::Silent(t) => {
                Computation::Silent(Arc::new(move || t().bind_arc(k.clone())))
            }
            Computation::Trigger(e, c) => {
                Computation::Trigger(e, Arc::new(move |a| c(a).bind_arc(k.clone())))
            }
        }
    }

    pub fn then(self, next: Computation) -> Computation {
        self.bind(move |_| next.clone())
    }

    pub fn map(self, f: impl Fn(AnyValue) -> AnyValue + Send + Sync + 'static) -> Computation {
        self.bind(move |v| Computation::Done(f(v)))
    }

    pub fn is_done(&self) -> bool {
        matches!(self, Computation::Done(_))
    }

    /// Replaces every `Apc` trigger with `ret ()`.
    pub fn erase_apc(self) -> Computation {
        match self {
            Computation::Done(v) => Computation::Done(v),
            Computation::Silent(t) => Computation::Silent(Arc::new(move || t().erase_apc())),
            Computation::Trigger(Event::Apc, k) => {
                Computation::Silent(Arc::new(move || k(AnyValue::Unit).erase_apc()))
            }
            Computation::Trigger(e, k) => {
                Computation::Trigger(e, Arc::new(move |a| k(a).erase_apc()))
            }
        }
    }

    /// True if the next visible event is an `Apc` (used for instrumentation).
    pub fn head_event(&self) -> Option<&Event> {
        match self {
            Computation::Trigger(e, _) => Some(e),
            _ => None,
        }
    }
}

/// State-passing interpretation: handled events are replaced by the handler's
/// computation (which yields `Pair(answer, new_state)`); the result is
/// `Pair(final_value, final_state)`.
pub fn interp_st(c: Computation, st: AnyValue, h: Handler) -> Computation {
    match c {
        Computation::Done(v) => Computation::Done(AnyValue::pair(v, st)),
        Computation::Silent(t) => {
            Computation::Silent(Arc::new(move || interp_st(t(), st.clone(), h.clone())))
        }
        Computation::Trigger(ev, k) => match h(&ev, &st) {
            Some(handled) => {
                let h2 = h.clone();
                Computation::Silent(Arc::new(move || {
                    let k = k.clone();
                    let h3 = h2.clone();
                    handled.clone().bind(move |p| match p {
                        AnyValue::Pair(ans, st2) => interp_st(k(*ans), *st2, h3.clone()),
                        other => panic!("handler must yield Pair(answer, state), got {other}"),
                    })
                }))
            }
            None => Computation::Trigger(
                ev,
                Arc::new(move |a| interp_st(k(a), st.clone(), h.clone())),
            ),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assume_and_guarantee_shapes() {
        assert!(matches!(assume(true), Computation::Done(AnyValue::Unit)));
        assert!(matches!(guarantee(true), Computation::Done(AnyValue::Unit)));
        match assume(false) {
            Computation::Trigger(Event::Take(d), _) => assert_eq!(d, ChoiceDomain::empty()),
            other => panic!("unexpected {other:?}"),
        }
        match guarantee(false) {
            Computation::Trigger(Event::Choose(d), _) => assert_eq!(d, ChoiceDomain::empty()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn copies_resume_independently() {
        let c = choose(ChoiceDomain::Booleans).map(|b| AnyValue::Bool(!b.as_bool().unwrap()));
        let Computation::Trigger(_, k) = c.clone() else { panic!() };
        let Computation::Trigger(_, k2) = c else { panic!() };
        assert!(matches!(k(AnyValue::Bool(true)), Computation::Done(AnyValue::Bool(false))));
        assert!(matches!(k2(AnyValue::Bool(false)), Computation::Done(AnyValue::Bool(true))));
    }

    #[test]
    fn bind_threads_values() {
        let c = ret(AnyValue::Int(2)).bind(|v| ret(AnyValue::Int(v.as_int().unwrap() * 21)));
        assert!(matches!(c, Computation::Done(AnyValue::Int(42))));
    }

    #[test]
    fn erase_removes_apc() {
        let c = apc().then(ret(AnyValue::Int(1))).erase_apc();
        let Computation::Silent(t) = c else { panic!("expected silent step") };
        assert!(matches!(t(), Computation::Done(AnyValue::Int(1))));
    }

    #[test]
    fn interp_counts_handled_events() {
        let body = apc().then(apc()).then(ret(AnyValue::Int(7)));
        let h: Handler = Arc::new(|e, st| match e {
            Event::Apc => Some(ret(AnyValue::pair(
                AnyValue::Unit,
                AnyValue::Int(st.as_int().unwrap() + 1),
            ))),
            _ => None,
        });
        let mut c = interp_st(body, AnyValue::Int(0), h);
        loop {
            match c {
                Computation::Silent(t) => c = t(),
                Computation::Done(v) => {
                    assert_eq!(v, AnyValue::pair(AnyValue::Int(7), AnyValue::Int(2)));
                    break;
                }
                Computation::Trigger(e, _) => panic!("unexpected {e:?}"),
            }
        }
    }
}
