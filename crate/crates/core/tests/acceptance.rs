//! Acceptance gate: ten criteria, one PASS/FAIL line each.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use ccr_core::behavior::{bounded_beh, check_inclusion, refine_closed, End, Verdict};
use ccr_core::ems::{assume, guarantee, obs, ret, run, AnyValue, Module, ModuleSet, PtrVal, ScriptedResolver};
use ccr_core::harness::*;
use ccr_core::pcm::laws::{check_all_finite, check_auth_inclusion, check_fpu_composition, check_sampled, check_sampled_product, LawReport};
use ccr_core::pcm::{ComponentKind, SigmaRegistry};
use ccr_core::spc::{Depth, Ordinal};
use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

struct Gate {
    lines: Vec<String>,
    failed: usize,
}

impl Gate {
    fn criterion(&mut self, id: u32, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) {
        let t = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let dt = t.elapsed();
        let res = match (res, limit) {
            (Ok(_), Some(l)) if dt > l => Err(format!("took {dt:.2?}, limit {l:?}")),
            (r, _) => r,
        };
        let (tag, detail) = match &res {
            Ok(d) => ("PASS", d.clone()),
            Err(d) => {
                self.failed += 1;
                ("FAIL", d.clone())
            }
        };
        let line = format!("{tag} [{id:>2}] {name} ({dt:.2?}): {detail}");
        println!("{line}");
        self.lines.push(line);
    }
}

fn ensure(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond { Ok(()) } else { Err(what()) }
}

fn laws(rep: LawReport, what: &str) -> Result<usize, String> {
    ensure(rep.ok(), || format!("{what}: {:?}", rep.failures))?;
    Ok(rep.checked)
}

fn c1_pcm_laws() -> Outcome {
    let finite = laws(check_all_finite(), "finite carriers")?;
    let n = 10_000;
    let mut sampled = 0;
    let ex = ComponentKind::Ex;
    let pointwise = ComponentKind::Pointwise { inner: Box::new(ComponentKind::Ex) };
    let auth = ComponentKind::Auth { inner: Box::new(pointwise.clone()) };
    for (i, k) in [&ex, &pointwise, &auth].into_iter().enumerate() {
        sampled += laws(check_sampled(k, n, 11 + i as u64), &format!("{k:?}"))?;
    }
    sampled += laws(check_sampled_product(&SigmaRegistry::standard(), n, 17), "product")?;
    sampled += laws(check_auth_inclusion(&pointwise, n, 19), "auth inclusion")?;
    laws(check_fpu_composition(), "update rules")?;
    Ok(format!("{finite} exhaustive and {sampled} sampled law instances"))
}

fn c2_behavior_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut programs, mut with_take, mut with_choose) = (0, 0, 0);
    for i in 0..200 {
        let p = gen_micro(&mut rng, 4, 5, false);
        with_take += p.has(&|m| matches!(m, Micro::Take(_))) as usize;
        with_choose += p.has(&|m| matches!(m, Micro::Choose(_))) as usize;
        for fuel in [2, 4, 6] {
            let got = flatten(&bounded_beh(&p.system(), fuel, &micro_env()).map_err(|e| e.to_string())?, MAX_EVENTS);
            let want = oracle(&p, fuel, MAX_EVENTS);
            ensure(got == want, || format!("program {i} at fuel {fuel}: {p:?}\nexplorer-only {:?}\noracle-only {:?}", got.difference(&want).take(3).collect::<Vec<_>>(), want.difference(&got).take(3).collect::<Vec<_>>()))?;
        }
        programs += 1;
    }
    ensure(with_take >= 10 && with_choose >= 10, || format!("weak coverage: {with_take} take, {with_choose} choose"))?;
    Ok(format!("{programs} programs x 3 bounds match the enumerator ({with_take} with take, {with_choose} with choose)"))
}

fn c3_ub_nb() -> Outcome {
    let k = || obs("print", AnyValue::Int(1)).then(ret(AnyValue::Int(0)));
    let ub = ModuleSet::new(vec![Module::new("U", AnyValue::Unit).with_fun("main", move |_| assume(false).then(k()))]);
    let nb = ModuleSet::new(vec![Module::new("N", AnyValue::Unit).with_fun("main", move |_| guarantee(false).then(k()))]);
    for fuel in 1..=5u64 {
        let u = flatten(&bounded_beh(&ub, fuel, &micro_env()).unwrap(), fuel as usize);
        ensure(u == universe(fuel as usize), || format!("UB at fuel {fuel}: {} traces", u.len()))?;
        let n = bounded_beh(&nb, fuel, &micro_env()).unwrap();
        ensure(n == ccr_core::behavior::TraceSet::partial_only(fuel), || format!("NB at fuel {fuel}: {n}"))?;
    }
    Ok(format!("UB gives all {} traces at fuel 5; NB gives {{·Partial}}", universe(5).len()))
}

fn c4_cannon() -> Outcome {
    let env = ccr_core::ems::ObsEnv::new();
    let one = refine_closed(&cannon_impl(1), &cannon_abs(1), CANNON_FUEL, &env).unwrap();
    ensure(one.holds(), || format!("one shot: {one:?}"))?;
    let two = refine_closed(&cannon_impl(2), &cannon_abs(2), CANNON_FUEL, &env).unwrap();
    let Verdict::Refuted(w) = &two else { return Err("two shots: holds".into()) };
    ensure(w.end == End::Error, || format!("witness {w}"))?;
    // The second `1 / powder` divides by zero: undefined behavior after both prints of the first shot.
    let beh = bounded_beh(&cannon_impl(2), CANNON_FUEL, &env).unwrap();
    ensure(beh.iter().any(|t| t.end == End::Chaos && t.events == w.events), || "no UB at the witness prefix".into())?;
    ensure(w.prints() == ["1", "1"], || format!("witness {w}"))?;
    Ok(format!("one shot holds; two shots refuted by {w}"))
}

fn c5_once() -> Outcome {
    let r1 = once_act(1).run().unwrap();
    ensure(r1.clean() && r1.inclusion.holds() && r1.discharged_asm_count > 0, || format!("test1: {}", act_json(&r1)))?;
    let r2 = once_act(2).run().unwrap();
    let g = r2.guarantee_failures.first().ok_or("test2: no guarantee failure")?;
    ensure(g.fn_name == "Once.do" && g.calls_before == 1, || format!("test2 failure at {g:?}"))?;
    let v = check_inclusion(
        &bounded_beh(&once_impl(2), ONCE_FUEL, &Default::default()).unwrap(),
        &bounded_beh(&once_wrapped(2), ONCE_FUEL, &Default::default()).unwrap(),
    )
    .unwrap();
    let Verdict::Refuted(w) = &v else { return Err("test2 inclusion holds".into()) };
    ensure(w.prints().contains(&"err".to_string()), || format!("witness {w}"))?;
    Ok(format!("test1 discharged {} assumptions; test2 fails {} after {} call; witness {w}", r1.discharged_asm_count, g.fn_name, g.calls_before))
}

fn act_setups() -> Vec<(String, ActSetup)> {
    let mut out = Vec::new();
    for s in all_suites() {
        if let Some(a) = s.act.clone() {
            out.push((format!("{}: main", s.name), a));
        }
        for c in s.checks {
            if let CheckKind::Act(a) = c.kind {
                out.push((format!("{}: {}", s.name, c.name), a));
            }
        }
    }
    out
}

fn c6_conservation() -> Outcome {
    let setups = act_setups();
    let mut handoffs = 0;
    for (name, a) in &setups {
        let r = a.run().map_err(|e| format!("{name}: {e}"))?;
        ensure(r.conservation_violations.is_empty(), || format!("{name}: {:?}", r.conservation_violations))?;
        handoffs += r.discharged_asm_count;
    }
    Ok(format!("{} replays, {handoffs} discharged handoffs, no violations", setups.len()))
}

fn c7_mw() -> Outcome {
    let env = ccr_core::ems::ObsEnv::new();
    let probe = probe_env();
    for mw in ["mw1", "mw2"] {
        let k = Some(MW_UNROLL);
        let v = refine_closed(&mw_impl(mw, "app", k), &mw_abs("app_abs", k), MW_FUEL, &env).unwrap();
        ensure(v.holds(), || format!("{mw}: {v:?}"))?;
        let v = refine_closed(&mw_impl(mw, "app_probe", k), &mw_abs("app_probe", k), MW_FUEL, &probe).unwrap();
        ensure(v.holds(), || format!("{mw} with indices {MW_INDICES:?}: {v:?}"))?;
        let out = run(&mw_impl(mw, "app", k), &mut ScriptedResolver::new(vec![]), MW_FUEL).unwrap();
        ensure(out.prints() == ["put:042", "get:042", "val:42", "get:042", "val:42"], || format!("{mw} log {:?}", out.prints()))?;
    }
    Ok(format!("both inclusions hold unrolled x{MW_UNROLL} over indices {MW_INDICES:?}; log put:042 get:042 val:42"))
}

fn c8_repeat() -> Outcome {
    let abs = repeat_act().erased();
    for n in 0..=5 {
        let go = |mods: &ModuleSet| run(mods, &mut ScriptedResolver::new(vec![]).with_obs("getint", vec![AnyValue::Int(n)]), REPEAT_FUEL).unwrap();
        let (i, a) = (go(&repeat_impl()), go(&abs));
        ensure(i.prints() == [(2 * n).to_string()] && i.log == a.log, || format!("getint {n}: {:?} vs {:?}", i.prints(), a.prints()))?;
    }
    let inst = h_rp(vec![successor()]).instantiate(&ccr_core::harness::s_sc());
    for n in 0..=5u32 {
        let x = AnyValue::List(vec![AnyValue::Ptr(PtrVal::Func("SC.succ".into())), AnyValue::Int(n as i64), AnyValue::Int(n as i64)]);
        let d = call_depth(&inst.conds, "RP.repeat", &x);
        ensure(d == Depth::Pure(Ordinal::omega_plus(n)), || format!("n={n}: {d:?}"))?;
    }
    let mut pure = 0;
    for n in 0..=5 {
        let mut r = ScriptedResolver::new(vec![]).with_obs("getint", vec![AnyValue::Int(n)]);
        let rep = check_depth_chain(&repeat_impl(), &repeat_conds(), &mut r, REPEAT_FUEL).unwrap();
        ensure(rep.violations.is_empty(), || format!("getint {n}: {:?}", rep.violations))?;
        pure += rep.pure_calls;
    }
    Ok(format!("streams print 2n for n in 0..=5; depth ω+n; {pure} pure calls all decreasing"))
}

fn c9_safety() -> Outcome {
    let env = ccr_core::ems::ObsEnv::new();
    let systems = [
        ("erased", safe_erased(&["A.f", "B.g"])),
        ("erased, main callable", safe_erased(&["A.f", "B.g", "main"])),
        ("wrapped", safe_wrapped(&["A.f", "B.g"])),
    ];
    let mut traces = 0;
    for (name, mods) in &systems {
        for fuel in [5, 10, SAFE_FUEL] {
            let b = bounded_beh(mods, fuel, &env).unwrap();
            ensure(b.iter().all(|t| !matches!(t.end, End::Error | End::Chaos)), || format!("{name} at fuel {fuel}: {b}"))?;
            traces += b.len();
        }
    }
    let bad = bounded_beh(&safe_erased(&["A.f", "C.h"]), SAFE_FUEL, &env).unwrap();
    ensure(bad.iter().any(|t| t.end == End::Error), || "calling an undefined name did not error".into())?;
    Ok(format!("{traces} traces across {} systems, none ending in Error", systems.len()))
}

fn c10_difftest() -> Outcome {
    let mut runs = 0;
    let mut summary = Vec::new();
    for s in all_suites() {
        for c in &s.checks {
            let CheckKind::Diff { lhs, rhs, env, bounds, pairs, seed } = &c.kind else { continue };
            let r = diff_test(lhs, rhs, env, bounds, (*pairs).max(100), *seed).map_err(|e| e.to_string())?;
            if c.expect {
                runs += r.pairs;
                ensure(r.clean(), || format!("{} / {}: {:?} {:?}", s.name, c.name, r.divergences.first(), r.oracle_gaps.first()))?;
            } else {
                summary.push(format!("{} / {} diverges", s.name, c.name));
            }
        }
    }
    let m = suite("app-mutant").unwrap();
    let r = diff_test(&m.implementation, &m.abstraction, &m.env, &DiffBounds::new(m.fuel), 100, 0).unwrap();
    ensure(r.divergences.len() == 100, || format!("mutant: {} divergences", r.divergences.len()))?;
    let d = &r.divergences[0];
    ensure(d.prefix == ["print put:042", "print get:042"] && d.implementation == "print val:42", || format!("mutant: {d:?}"))?;
    Ok(format!("{runs} paired runs clean on shipped pairs; mutant diverges at {:?} ({})", d.implementation, summary.join(", ")))
}

#[test]
fn acceptance() {
    let mut g = Gate { lines: Vec::new(), failed: 0 };
    let s = Duration::from_secs;
    g.criterion(1, "PCM laws", Some(s(5)), c1_pcm_laws);
    g.criterion(2, "behavior oracle equivalence", Some(s(10)), c2_behavior_oracle);
    g.criterion(3, "UB/NB identities", Some(s(1)), c3_ub_nb);
    g.criterion(4, "cannon", Some(s(30)), c4_cannon);
    g.criterion(5, "once/test ACT", Some(s(30)), c5_once);
    g.criterion(6, "ACT conservation", None, c6_conservation);
    g.criterion(7, "MW end-to-end", Some(s(300)), c7_mw);
    g.criterion(8, "repeat and depth", Some(s(10)), c8_repeat);
    g.criterion(9, "safety", Some(s(30)), c9_safety);
    g.criterion(10, "differential testing", None, c10_difftest);
    assert_eq!(g.failed, 0, "\n{}", g.lines.join("\n"));
}
