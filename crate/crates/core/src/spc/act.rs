//! Replaying the assumption-cancellation strategy on a closed wrapped system.
//!
//! Every wrapper `take` is answered the way the cancellation proof does: the
//! abstract value and σ come from the matching guarantee, and `eres` is the sum
//! of every other module resource and every live local resource. Guarantee
//! choices are searched, preferring ones that keep the global total fixed.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::Serialize;
use serde_json::Value as Json;

use super::{conds_leq, conds_union, erase, wrap_module, Conds, Mode, PreAbstraction, SpcError};
use crate::behavior::{bounded_beh, check_inclusion, with_big_stack, End, ObsEvent, Trace, TraceSet, Verdict};
use crate::ems::{load, AnyValue, ChoiceDomain, ModuleSet, ObsEnv, StepResult, SystemState};
use crate::pcm::{add, eval_rprop, remainders, splits, sum, valid, Resource};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GuaranteeFailure {
    pub fn_name: String,
    pub site: String,
    /// Wrapped-function entries (other than main's) before the failure.
    pub calls_before: usize,
}

#[derive(Debug, Clone)]
pub struct ActReport {
    pub discharged_asm_count: usize,
    pub asm_failures: Vec<String>,
    pub guarantee_failures: Vec<GuaranteeFailure>,
    pub conservation_violations: Vec<String>,
    pub traces: TraceSet,
    pub inclusion: Verdict,
}

impl ActReport {
    /// No guarantee failed, every assumption was discharged and the total was conserved.
    pub fn clean(&self) -> bool {
        self.asm_failures.is_empty() && self.guarantee_failures.is_empty() && self.conservation_violations.is_empty()
    }

    pub fn to_json(&self) -> Json {
        serde_json::json!({
            "dischargedAsmCount": self.discharged_asm_count,
            "asmFailures": self.asm_failures,
            "guaranteeFailures": self.guarantee_failures,
            "conservationViolations": self.conservation_violations,
            "inclusionVerdict": match &self.inclusion {
                Verdict::Holds => serde_json::json!("holds"),
                Verdict::Refuted(t) => serde_json::json!({"refuted": t.to_json()}),
            },
            "traces": self.traces.iter().map(|t| t.to_json()).collect::<Vec<_>>(),
        })
    }
}

/// Tuning for the replay.
#[derive(Debug, Clone)]
pub struct ActOptions {
    /// Extra concrete values tried after the abstract one at guarantees.
    pub values: Vec<AnyValue>,
    /// Fallback universe when no total-preserving guarantee works.
    pub resources: Vec<Resource>,
    pub lookahead_steps: u64,
}

impl Default for ActOptions {
    fn default() -> ActOptions {
        ActOptions { values: vec![AnyValue::Unit, AnyValue::Int(0)], resources: vec![Resource::Unit], lookahead_steps: 50_000 }
    }
}

struct Ctx {
    total: Resource,
    sigma_main: Resource,
    conds: Arc<Conds>,
    modules: Vec<String>,
    fuel: u64,
    opts: ActOptions,
}

#[derive(Clone)]
struct Shadow {
    fn_name: String,
    lres: Resource,
    sigma: Resource,
    x_a: AnyValue,
    w: AnyValue,
}

#[derive(Clone, Default)]
struct Tally {
    discharged: usize,
    asm_failures: Vec<String>,
    guarantee_failures: Vec<GuaranteeFailure>,
    conservation: Vec<String>,
}

#[derive(Clone, Default)]
struct ActState {
    shadow: Vec<Shadow>,
    last_w: AnyValue,
    ret_stash: Option<(AnyValue, Resource)>,
    entries: usize,
    tally: Tally,
}

fn r_sum(rs: &[&Resource]) -> Resource {
    sum(rs.iter().copied()).unwrap_or(Resource::Invalid)
}

fn weight(r: &Resource) -> usize {
    match r {
        Resource::Unit => 0,
        Resource::Invalid => 1000,
        Resource::Fin(..) | Resource::Ex(_) => 1,
        Resource::AuthFull(a) | Resource::AuthFrag(a) => 1 + weight(a),
        Resource::AuthBoth(a, b) => 2 + weight(a) + weight(b),
        Resource::Pointwise(m) => m.iter().map(|(_, v)| 1 + weight(v)).sum(),
        Resource::Prod(m) => m.values().map(weight).sum(),
    }
}

fn mres_of(sys: &SystemState, module: &str) -> Resource {
    sys.states
        .get(module)
        .and_then(|s| s.as_pair())
        .and_then(|(_, m)| m.as_res().cloned())
        .unwrap_or(Resource::Unit)
}

fn others_mres(ctx: &Ctx, sys: &SystemState, except: &str) -> Resource {
    let rs: Vec<Resource> = ctx.modules.iter().filter(|m| *m != except).map(|m| mres_of(sys, m)).collect();
    r_sum(&rs.iter().collect::<Vec<_>>())
}

fn live_lres(st: &ActState) -> Resource {
    r_sum(&st.shadow.iter().map(|s| &s.lres).collect::<Vec<_>>())
}

fn field<T: serde::de::DeserializeOwned>(tag: &Json, k: &str) -> Option<T> {
    serde_json::from_value(tag.get(k)?.clone()).ok()
}

fn res_list(v: &[AnyValue]) -> AnyValue {
    AnyValue::List(v.to_vec())
}

enum Probe {
    Ok,
    Nb,
}

/// Runs a copy forward until the next angelic point or observable; NB rejects.
fn probe(ctx: &Ctx, mut sys: SystemState, mut st: ActState) -> Probe {
    let limit = sys.steps + ctx.opts.lookahead_steps;
    loop {
        if sys.steps >= ctx.fuel || sys.steps >= limit {
            return Probe::Ok;
        }
        match sys.step() {
            StepResult::Continue => {}
            StepResult::Terminated(_) | StepResult::Errored(_) | StepResult::NeedsObsAnswer(..) => return Probe::Ok,
            StepResult::NeedsChoice(dom, angelic) => {
                if angelic {
                    return Probe::Ok;
                }
                if dom.size() == Some(0) {
                    return Probe::Nb;
                }
                match resolve(ctx, &sys, &mut st, &dom, false) {
                    Some(v) => sys.resume(v),
                    None => return Probe::Nb,
                }
            }
        }
    }
}

/// First candidate whose continuation is not NB, with its state update.
fn first_surviving(
    ctx: &Ctx,
    sys: &SystemState,
    st: &mut ActState,
    cands: impl IntoIterator<Item = (AnyValue, ActState)>,
) -> Option<AnyValue> {
    for (v, next) in cands {
        if matches!(probe(ctx, sys.resumed(v.clone()), next.clone()), Probe::Ok) {
            *st = next;
            return Some(v);
        }
    }
    None
}

fn resolve(ctx: &Ctx, sys: &SystemState, st: &mut ActState, dom: &ChoiceDomain, angelic: bool) -> Option<AnyValue> {
    let tag = match dom {
        ChoiceDomain::Unbounded(t) => serde_json::from_str::<Json>(t).ok(),
        _ => None,
    };
    let Some(tag) = tag else {
        let xs = dom.enumerate().ok()?;
        if angelic {
            return xs.into_iter().next();
        }
        let cands: Vec<_> = xs.into_iter().map(|x| (x, st.clone())).collect();
        return first_surviving(ctx, sys, st, cands);
    };
    let kind: String = field(&tag, "kind").unwrap_or_default();
    let fn_name: String = field(&tag, "fn").unwrap_or_default();
    match kind.as_str() {
        "asm" => Some(resolve_asm(ctx, sys, st, &tag)),
        "w-take" => Some(match st.shadow.last() {
            Some(top) if top.fn_name == fn_name => top.w.clone(),
            _ => ctx
                .conds
                .get(&fn_name)
                .and_then(|c| c.w_candidates(&AnyValue::nil(), &ctx.sigma_main).into_iter().next())
                .unwrap_or(AnyValue::Unit),
        }),
        "w" => {
            let x_a: AnyValue = field(&tag, "x_a")?;
            let eres: Resource = field(&tag, "eres")?;
            let cond = ctx.conds.get(&fn_name)?;
            let mut ws = Vec::new();
            for avail in remainders(&ctx.total, &eres) {
                for w in cond.w_candidates(&x_a, &avail) {
                    if !ws.contains(&w) {
                        ws.push(w);
                    }
                }
            }
            let cands: Vec<_> = ws
                .iter()
                .map(|w| {
                    let mut next = st.clone();
                    next.last_w = w.clone();
                    (w.clone(), next)
                })
                .collect();
            // Fall through to the first candidate so the failing guarantee is the one reported.
            let first = cands.first().cloned();
            first_surviving(ctx, sys, st, cands).or_else(|| {
                let (w, next) = first?;
                *st = next;
                Some(w)
            })
        }
        "grt" => resolve_grt(ctx, sys, st, &tag, &fn_name),
        "apc-ret" | "safe-value" => {
            let mut vs = vec![AnyValue::Unit];
            vs.extend(ctx.opts.values.iter().filter(|v| **v != AnyValue::Unit).cloned());
            let cands: Vec<_> = vs.into_iter().map(|v| (v, st.clone())).collect();
            first_surviving(ctx, sys, st, cands)
        }
        _ => None,
    }
}

fn resolve_asm(ctx: &Ctx, sys: &SystemState, st: &mut ActState, tag: &Json) -> AnyValue {
    let site: String = field(tag, "site").unwrap_or_default();
    let xr: AnyValue = field(tag, "xr").unwrap_or(AnyValue::Unit);
    let lres: Resource = field(tag, "lres").unwrap_or(Resource::Unit);
    let cur = sys.current_module().to_string();
    let (xr_a, sigma) = if site == "post" {
        st.shadow.pop();
        st.ret_stash.take().unwrap_or((xr, Resource::Unit))
    } else {
        match st.shadow.last() {
            Some(top) => {
                st.entries += 1;
                (top.x_a.clone(), top.sigma.clone())
            }
            None => (xr, ctx.sigma_main.clone()),
        }
    };
    let eres = r_sum(&[&others_mres(ctx, sys, &cur), &live_lres(st)]);
    let total = r_sum(&[&mres_of(sys, &cur), &lres, &eres, &sigma]);
    if total != ctx.total || !valid(&total) {
        st.tally.conservation.push(format!(
            "{} at {site}: total {total} differs from {}",
            sys.current_function(),
            ctx.total
        ));
    }
    let answer = res_list(&[xr_a, AnyValue::Res(eres), AnyValue::Res(sigma)]);
    // The two assumptions come right after the take.
    let mut next = sys.resumed(answer.clone());
    let mut ok = true;
    for _ in 0..64 {
        match next.step() {
            StepResult::Continue => continue,
            StepResult::NeedsChoice(d, true) if d.size() == Some(0) => ok = false,
            _ => {}
        }
        break;
    }
    if ok {
        st.tally.discharged += 1;
    } else {
        st.tally.asm_failures.push(format!("{} at {site}", sys.current_function()));
    }
    answer
}

fn resolve_grt(ctx: &Ctx, sys: &SystemState, st: &mut ActState, tag: &Json, fn_name: &str) -> Option<AnyValue> {
    let site: String = field(tag, "site").unwrap_or_default();
    let xr_a: AnyValue = field(tag, "xr_a")?;
    let eres: Resource = field(tag, "eres")?;
    let cur = sys.current_module().to_string();
    let mres = mres_of(sys, &cur);
    let mut triples = BTreeSet::new();
    for avail in remainders(&ctx.total, &eres) {
        for (m, rest) in splits(&avail) {
            for (l, s) in splits(&rest) {
                triples.insert((m.clone(), l, s));
            }
        }
    }
    let mut triples: Vec<_> = triples.into_iter().collect();
    if site == "pre" {
        triples.sort_by_key(|(m, l, s)| (*m != mres, weight(s), weight(l)));
    } else {
        triples.sort_by_key(|(_, l, s)| (!l.is_unit(), weight(s)));
    }
    let mut xrs = vec![xr_a.clone()];
    xrs.extend(ctx.opts.values.iter().filter(|v| **v != xr_a).cloned());
    let base = st.clone();
    let stage = |m: &Resource, l: &Resource, s: &Resource, xr: &AnyValue| {
        let mut next = base.clone();
        if site == "pre" {
            next.shadow.push(Shadow {
                fn_name: fn_name.to_string(),
                lres: l.clone(),
                sigma: s.clone(),
                x_a: xr_a.clone(),
                w: base.last_w.clone(),
            });
        } else {
            next.ret_stash = Some((xr_a.clone(), s.clone()));
        }
        let v = res_list(&[xr.clone(), AnyValue::Res(m.clone()), AnyValue::Res(l.clone()), AnyValue::Res(s.clone())]);
        (v, next)
    };
    let preserving = xrs.iter().flat_map(|xr| triples.iter().map(move |(m, l, s)| (xr, m, l, s)));
    let cands: Vec<_> = preserving.map(|(xr, m, l, s)| stage(m, l, s, xr)).collect();
    if let Some(v) = first_surviving(ctx, sys, st, cands) {
        return Some(v);
    }
    let u = &ctx.opts.resources;
    if u.len() <= 6 {
        let mut cands = Vec::new();
        for xr in &xrs {
            for m in u {
                for l in u {
                    for s in u {
                        cands.push(stage(m, l, s, xr));
                    }
                }
            }
        }
        if let Some(v) = first_surviving(ctx, sys, st, cands) {
            return Some(v);
        }
    }
    st.tally.guarantee_failures.push(GuaranteeFailure {
        fn_name: fn_name.to_string(),
        site,
        calls_before: st.entries,
    });
    None
}

struct Collected {
    traces: Vec<Trace>,
    tally: Tally,
}

fn replay(ctx: &Ctx, env: &ObsEnv, mut sys: SystemState, mut st: ActState, prefix: Vec<ObsEvent>, out: &mut Collected) {
    let end = loop {
        if sys.steps >= ctx.fuel {
            break End::Partial;
        }
        match sys.step() {
            StepResult::Continue => {}
            StepResult::Terminated(v) => break End::Term(v),
            StepResult::Errored(_) => break End::Error,
            StepResult::NeedsChoice(dom, angelic) => {
                if dom.size() == Some(0) {
                    break if angelic { End::Chaos } else { End::Partial };
                }
                match resolve(ctx, &sys, &mut st, &dom, angelic) {
                    Some(v) => sys.resume(v),
                    None => break End::Partial,
                }
            }
            StepResult::NeedsObsAnswer(name, arg) => {
                for r in env.answers(&name) {
                    let mut p = prefix.clone();
                    p.push(ObsEvent::new(name.clone(), arg.clone(), r.clone()));
                    replay(ctx, env, sys.resumed(r), st.clone(), p, out);
                }
                return;
            }
        }
    };
    out.traces.push(Trace::new(prefix, end));
    let t = st.tally;
    out.tally.discharged += t.discharged;
    out.tally.asm_failures.extend(t.asm_failures);
    for g in t.guarantee_failures {
        if !out.tally.guarantee_failures.contains(&g) {
            out.tally.guarantee_failures.push(g);
        }
    }
    out.tally.conservation.extend(t.conservation);
}

/// Links the wrapped modules in ACT mode, replays them, and compares with the erased system.
pub fn act_check(
    wrapped: &[(PreAbstraction, Conds)],
    s: &Conds,
    sigma_main: &Resource,
    fuel: u64,
    env: &ObsEnv,
    opts: &ActOptions,
) -> Result<ActReport, SpcError> {
    let provided = wrapped.iter().fold(Conds::new(), |acc, (_, o)| conds_union(&acc, o));
    if !conds_leq(s, &provided) {
        let missing: Vec<_> = s.keys().filter(|k| !provided.contains_key(*k)).cloned().collect();
        return Err(SpcError::SpecNotBelow(format!("{missing:?}")));
    }
    let mut total = sigma_main.clone();
    for (a, _) in wrapped {
        total = add(&total, &a.sigma).unwrap_or(Resource::Invalid);
    }
    if !valid(&total) {
        return Err(SpcError::GlobalInvalidity(total));
    }
    let main = provided.get("main").ok_or(SpcError::NoMain)?;
    let w0 = main.w_candidates(&AnyValue::nil(), sigma_main).into_iter().next().unwrap_or(AnyValue::Unit);
    if !eval_rprop(&(main.pre)(&w0, &AnyValue::nil(), &AnyValue::nil()), sigma_main).unwrap_or(false) {
        return Err(SpcError::PreconditionUnsatisfied(sigma_main.clone()));
    }

    let mut mods = Vec::new();
    for (a, out) in wrapped {
        mods.push(wrap_module(s, a, out, &Mode::Act)?);
    }
    let sys = load(&ModuleSet::new(mods)).map_err(|e| SpcError::Beh(e.into()))?;
    let erased = ModuleSet::new(wrapped.iter().map(|(a, _)| erase(a)).collect());
    let rhs = bounded_beh(&erased, fuel, env)?;

    let ctx = Ctx {
        total,
        sigma_main: sigma_main.clone(),
        conds: Arc::new(conds_union(&provided, s)),
        modules: wrapped.iter().map(|(a, _)| a.name.clone()).collect(),
        fuel,
        opts: opts.clone(),
    };
    let env2 = env.clone();
    let out = with_big_stack(move || {
        let mut out = Collected { traces: Vec::new(), tally: Tally::default() };
        replay(&ctx, &env2, sys, ActState::default(), Vec::new(), &mut out);
        out
    });
    let mut traces = TraceSet::from_traces(fuel, out.traces);
    traces.close_partial();
    let inclusion = check_inclusion(&traces, &rhs)?;
    Ok(ActReport {
        discharged_asm_count: out.tally.discharged,
        asm_failures: out.tally.asm_failures,
        guarantee_failures: out.tally.guarantee_failures,
        conservation_violations: out.tally.conservation,
        traces,
        inclusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ems::{call, ret};
    use crate::pcm::{sigma, RProp};
    use crate::spc::Cond;

    fn setup(calls: usize) -> (Vec<(PreAbstraction, Conds)>, Conds) {
        let own_do = Cond::new("own-do", ChoiceDomain::Explicit(vec![AnyValue::Unit]))
            .pre(|_, _, _| RProp::Own(sigma::once_do()));
        let once = PreAbstraction::new("Once", AnyValue::Unit, Resource::Unit).with_fun("Once.do", |_| ret(AnyValue::Unit));
        let test = PreAbstraction::new("Test", AnyValue::Unit, Resource::Unit).with_fun("main", move |_| {
            (0..calls).fold(ret(AnyValue::Unit), |c, _| c.then(call("Once.do", AnyValue::nil()))).then(ret(AnyValue::Unit))
        });
        let s: Conds = [("Once.do".to_string(), own_do.clone()), ("main".to_string(), own_do)].into();
        let out_once = crate::spc::restrict(&s, &["Once.do"]);
        let out_main = crate::spc::restrict(&s, &["main"]);
        (vec![(once, out_once), (test, out_main)], s)
    }

    #[test]
    fn once_called_once() {
        let (w, s) = setup(1);
        let r = act_check(&w, &s, &sigma::once_do(), 400, &ObsEnv::new(), &ActOptions::default()).unwrap();
        assert!(r.clean(), "{:?} {:?} {:?}", r.asm_failures, r.guarantee_failures, r.conservation_violations);
        assert_eq!(r.discharged_asm_count, 3);
        assert!(r.inclusion.holds());
        assert!(r.traces.contains(&Trace::new(vec![], End::Term(AnyValue::Unit))));
    }

    #[test]
    fn once_called_twice_fails_before_second_call() {
        let (w, s) = setup(2);
        let r = act_check(&w, &s, &sigma::once_do(), 400, &ObsEnv::new(), &ActOptions::default()).unwrap();
        assert_eq!(
            r.guarantee_failures,
            vec![GuaranteeFailure { fn_name: "Once.do".into(), site: "pre".into(), calls_before: 1 }]
        );
        assert!(r.conservation_violations.is_empty());
    }

    #[test]
    fn side_conditions() {
        let (w, s) = setup(1);
        let env = ObsEnv::new();
        let opts = ActOptions::default();
        assert!(matches!(act_check(&w, &s, &Resource::Unit, 50, &env, &opts), Err(SpcError::PreconditionUnsatisfied(_))));
        let mut w2 = w.clone();
        w2[0].0.sigma = sigma::once_do();
        assert!(matches!(act_check(&w2, &s, &sigma::once_do(), 50, &env, &opts), Err(SpcError::GlobalInvalidity(_))));
    }
}
