//! Observable traces and bounded trace sets.
//!
//! Undefined behavior denotes every continuation of a prefix. Instead of
//! enumerating that set, a trace may end in [`End::Chaos`], which stands for
//! all traces extending its events. Set operations treat it symbolically;
//! [`TraceSet::materialize`] expands it over a finite alphabet when needed.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::ems::{AnyValue, ObsEnv};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ObsEvent {
    pub name: String,
    pub arg: AnyValue,
    pub ret: AnyValue,
}

impl ObsEvent {
    pub fn new(name: impl Into<String>, arg: AnyValue, ret: AnyValue) -> ObsEvent {
        ObsEvent { name: name.into(), arg, ret }
    }

    pub fn print(arg: impl Into<AnyValue>) -> ObsEvent {
        ObsEvent::new("print", arg.into(), AnyValue::Unit)
    }

    fn key(&self) -> (&str, &AnyValue, &AnyValue) {
        (&self.name, &self.arg, &self.ret)
    }
}

impl fmt::Display for ObsEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ret == AnyValue::Unit {
            write!(f, "({} {})", self.name, self.arg)
        } else {
            write!(f, "({} {} ⇒ {})", self.name, self.arg, self.ret)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum End {
    Term(AnyValue),
    Error,
    Partial,
    /// Every trace extending the events (undefined behavior).
    Chaos,
}

impl End {
    fn rank(&self) -> u8 {
        match self {
            End::Partial => 0,
            End::Term(_) => 1,
            End::Error => 2,
            End::Chaos => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Trace {
    pub events: Vec<ObsEvent>,
    pub end: End,
}

impl Trace {
    pub fn new(events: Vec<ObsEvent>, end: End) -> Trace {
        Trace { events, end }
    }

    pub fn partial(events: Vec<ObsEvent>) -> Trace {
        Trace::new(events, End::Partial)
    }

    pub fn is_chaos(&self) -> bool {
        self.end == End::Chaos
    }

    /// `e · self`.
    pub fn prefixed(&self, e: &ObsEvent) -> Trace {
        let mut events = Vec::with_capacity(self.events.len() + 1);
        events.push(e.clone());
        events.extend(self.events.iter().cloned());
        Trace { events, end: self.end.clone() }
    }

    /// True if this chaotic trace denotes `other` (or all of it, if chaotic).
    pub fn covers(&self, other: &Trace) -> bool {
        self.is_chaos() && other.events.starts_with(&self.events)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let events: Vec<_> = self
            .events
            .iter()
            .map(|e| json!({"obs": e.name, "arg": e.arg, "ret": e.ret}))
            .collect();
        match &self.end {
            End::Term(v) => json!({"events": events, "end": "term", "value": v}),
            End::Error => json!({"events": events, "end": "error"}),
            End::Partial => json!({"events": events, "end": "partial"}),
            End::Chaos => json!({"events": events, "end": "ub"}),
        }
    }

    pub fn prints(&self) -> Vec<String> {
        self.events
            .iter()
            .filter(|e| e.name == "print")
            .map(|e| match &e.arg {
                AnyValue::Str(s) => s.clone(),
                v => v.to_string(),
            })
            .collect()
    }
}

impl Ord for Trace {
    fn cmp(&self, other: &Trace) -> Ordering {
        self.events.iter().map(ObsEvent::key).cmp(other.events.iter().map(ObsEvent::key)).then(self.end.rank().cmp(&other.end.rank())).then_with(|| match (&self.end, &other.end) {
            (End::Term(x), End::Term(y)) => x.cmp(y),
            _ => Ordering::Equal,
        })
    }
}

impl PartialOrd for Trace {
    fn partial_cmp(&self, other: &Trace) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.events {
            write!(f, "{e}")?;
        }
        match &self.end {
            End::Term(v) => write!(f, "·Term({v})"),
            End::Error => write!(f, "·Error"),
            End::Partial => write!(f, "·Partial"),
            End::Chaos => write!(f, "·UB"),
        }
    }
}

/// A finite, normalized set of traces computed at a fixed fuel bound.
///
/// Normal form: no member is covered by a different chaotic member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceSet {
    traces: BTreeSet<Trace>,
    pub fuel: u64,
}

impl TraceSet {
    pub fn new(fuel: u64) -> TraceSet {
        TraceSet { traces: BTreeSet::new(), fuel }
    }

    pub fn from_traces(fuel: u64, traces: impl IntoIterator<Item = Trace>) -> TraceSet {
        let mut s = TraceSet { traces: traces.into_iter().collect(), fuel };
        s.normalize();
        s
    }

    /// `{·Partial}`.
    pub fn partial_only(fuel: u64) -> TraceSet {
        TraceSet::from_traces(fuel, [Trace::partial(vec![])])
    }

    /// Every trace.
    pub fn chaos(fuel: u64) -> TraceSet {
        TraceSet::from_traces(fuel, [Trace::new(vec![], End::Chaos)])
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Trace> {
        self.traces.iter()
    }

    pub fn has_chaos(&self) -> bool {
        self.traces.iter().any(Trace::is_chaos)
    }

    fn chaos_members(&self) -> impl Iterator<Item = &Trace> {
        self.traces.iter().filter(|t| t.is_chaos())
    }

    fn normalize(&mut self) {
        let chaos: Vec<Trace> = self.chaos_members().cloned().collect();
        if chaos.is_empty() {
            return;
        }
        self.traces.retain(|t| !chaos.iter().any(|c| c != t && c.covers(t)));
    }

    pub fn insert(&mut self, t: Trace) {
        if self.contains(&t) {
            return;
        }
        let chaotic = t.is_chaos();
        self.traces.insert(t);
        if chaotic {
            self.normalize();
        }
    }

    /// Semantic membership (a chaotic `t` is a member if it is covered).
    pub fn contains(&self, t: &Trace) -> bool {
        self.traces.contains(t) || self.chaos_members().any(|c| c.covers(t))
    }

    pub fn union(&self, other: &TraceSet) -> TraceSet {
        let mut out = self.clone();
        for t in &other.traces {
            out.insert(t.clone());
        }
        out
    }

    pub fn intersect(&self, other: &TraceSet) -> TraceSet {
        let mut out: BTreeSet<Trace> = BTreeSet::new();
        for (a, b) in [(self, other), (other, self)] {
            for t in &a.traces {
                if b.contains(t) {
                    out.insert(t.clone());
                }
            }
        }
        TraceSet::from_traces(self.fuel, out)
    }

    /// `e · t` for every member.
    pub fn prefixed(&self, e: &ObsEvent) -> TraceSet {
        TraceSet { traces: self.traces.iter().map(|t| t.prefixed(e)).collect(), fuel: self.fuel }
    }

    /// Adds `p·Partial` for every proper prefix `p` of every member's events.
    pub fn close_partial(&mut self) {
        let mut extra = Vec::new();
        for t in &self.traces {
            for k in 0..=t.events.len() {
                if k < t.events.len() || !t.is_chaos() {
                    extra.push(Trace::partial(t.events[..k].to_vec()));
                }
            }
        }
        for t in extra {
            self.insert(t);
        }
    }

    pub fn is_partial_closed(&self) -> bool {
        self.traces.iter().all(|t| {
            (0..t.events.len()).all(|k| self.contains(&Trace::partial(t.events[..k].to_vec())))
        })
    }

    /// Expands chaotic members into concrete traces with at most `max_events` events over
    /// the environment's alphabet, ending in Partial, Error or `Term(v)` for `v ∈ term_values`.
    pub fn materialize(&self, env: &ObsEnv, max_events: usize) -> TraceSet {
        let alphabet: Vec<ObsEvent> =
            env.alphabet().into_iter().map(|(n, a, r)| ObsEvent::new(n, a, r)).collect();
        let mut ends = vec![End::Partial, End::Error];
        ends.extend(env.term_values.iter().cloned().map(End::Term));
        let mut out = BTreeSet::new();
        for t in &self.traces {
            if !t.is_chaos() {
                out.insert(t.clone());
                continue;
            }
            let mut frontier = vec![t.events.clone()];
            while let Some(evs) = frontier.pop() {
                for e in &ends {
                    out.insert(Trace::new(evs.clone(), e.clone()));
                }
                if evs.len() < max_events {
                    for a in &alphabet {
                        let mut next = evs.clone();
                        next.push(a.clone());
                        frontier.push(next);
                    }
                }
            }
        }
        TraceSet { traces: out, fuel: self.fuel }
    }

    /// One JSON object per line, in canonical order.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for t in &self.traces {
            out.push_str(&t.to_json().to_string());
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for TraceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, t) in self.traces.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, "}} @ fuel {}", self.fuel)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: i64) -> ObsEvent {
        ObsEvent::print(AnyValue::Int(n))
    }

    #[test]
    fn chaos_absorbs_extensions() {
        let mut s = TraceSet::new(5);
        s.insert(Trace::new(vec![p(1), p(2)], End::Term(AnyValue::Unit)));
        s.insert(Trace::new(vec![p(1)], End::Chaos));
        assert_eq!(s.len(), 1);
        assert!(s.contains(&Trace::new(vec![p(1), p(9)], End::Error)));
        assert!(!s.contains(&Trace::partial(vec![])));
    }

    #[test]
    fn intersection_with_chaos() {
        let a = TraceSet::from_traces(3, [Trace::new(vec![p(1)], End::Chaos), Trace::partial(vec![])]);
        let b = TraceSet::from_traces(
            3,
            [Trace::new(vec![p(1)], End::Error), Trace::new(vec![p(2)], End::Error), Trace::partial(vec![])],
        );
        let i = a.intersect(&b);
        assert_eq!(
            i.iter().cloned().collect::<Vec<_>>(),
            vec![Trace::partial(vec![]), Trace::new(vec![p(1)], End::Error)]
        );
        assert_eq!(a.intersect(&TraceSet::chaos(3)), a);
    }

    #[test]
    fn partial_closure() {
        let mut s = TraceSet::from_traces(4, [Trace::new(vec![p(1), p(2)], End::Term(AnyValue::Int(0)))]);
        assert!(!s.is_partial_closed());
        s.close_partial();
        assert!(s.is_partial_closed());
        assert_eq!(s.len(), 4);
    }

    #[test]
    fn materialize_counts() {
        let env = ObsEnv::new().with_args("print", vec![AnyValue::Int(0), AnyValue::Int(1)]);
        let m = TraceSet::chaos(2).materialize(&env, 2);
        // 1 + 2 + 4 prefixes, two ends each.
        assert_eq!(m.len(), 14);
    }

    #[test]
    fn canonical_order_is_total() {
        let a = Trace::new(vec![p(1)], End::Term(AnyValue::Int(2)));
        let b = Trace::new(vec![p(1)], End::Term(AnyValue::Int(10)));
        assert_ne!(a.cmp(&b), Ordering::Equal);
        assert!(Trace::partial(vec![]) < Trace::new(vec![], End::Error));
    }
}
