//! Example suites: an implementation/abstraction pair plus the checks that
//! exercise it, each with an expected outcome.

use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value as Json};

use super::corpus::{cannon_main, corpus_embedded, corpus_module, patched, unroll_main};
use super::depth::{check_depth_chain, DepthChainReport};
use super::diff::{diff_test, DiffBounds};
use super::models::{ad_pre, mw_abstraction, mw_intermediate, pure_pre};
use super::specs::{h_rp, s_ad, s_app_simple, s_cannon, s_client_main, s_mw_simple, s_once, s_sc, s_trivial, successor};
use crate::behavior::{bounded_beh, refine_closed, End, Verdict};
use crate::ems::{AnyValue, Module, ModuleSet, ObsEnv, ScriptedResolver};
use crate::imp::{embed, mem_module};
use crate::pcm::sigma::{app, cannon, once_do};
use crate::pcm::Resource;
use crate::spc::{act_check, conds_union, erase, mk_safe, wrap_module, ActOptions, ActReport, CheckDomains, Conds, Mode, PreAbstraction, SpcError};

/// Inputs to an ACT replay.
#[derive(Clone)]
pub struct ActSetup {
    pub wrapped: Vec<(PreAbstraction, Conds)>,
    pub s: Conds,
    pub sigma_main: Resource,
    pub fuel: u64,
    pub env: ObsEnv,
}

impl ActSetup {
    /// `s` is the union of the provided tables.
    pub fn new(wrapped: Vec<(PreAbstraction, Conds)>, sigma_main: Resource, fuel: u64, env: ObsEnv) -> ActSetup {
        let s = wrapped.iter().fold(Conds::new(), |acc, (_, c)| conds_union(&acc, c));
        ActSetup { wrapped, s, sigma_main, fuel, env }
    }

    pub fn run(&self) -> Result<ActReport, SpcError> {
        act_check(&self.wrapped, &self.s, &self.sigma_main, self.fuel, &self.env, &ActOptions::default())
    }

    pub fn erased(&self) -> ModuleSet {
        ModuleSet::new(self.wrapped.iter().map(|(a, _)| erase(a)).collect())
    }
}

pub type CustomCheck = Arc<dyn Fn() -> Result<(bool, Json), String> + Send + Sync>;

#[derive(Clone)]
pub enum CheckKind {
    Refine { lhs: ModuleSet, rhs: ModuleSet, fuel: u64, env: ObsEnv },
    /// Holds when the replay is clean and its traces are included in the erased system's.
    Act(ActSetup),
    Diff { lhs: ModuleSet, rhs: ModuleSet, env: ObsEnv, bounds: DiffBounds, pairs: usize, seed: u64 },
    /// Holds when no bounded behavior ends in `Error`.
    NoError { mods: ModuleSet, fuel: u64, env: ObsEnv },
    /// One run per `getint` answer; holds when no pure call fails to decrease depth.
    DepthChain { mods: ModuleSet, conds: Conds, inputs: Vec<i64>, fuel: u64 },
    Custom(CustomCheck),
}

impl CheckKind {
    pub fn kind_name(&self) -> &'static str {
        match self {
            CheckKind::Refine { .. } => "refine",
            CheckKind::Act(_) => "act",
            CheckKind::Diff { .. } => "difftest",
            CheckKind::NoError { .. } => "no-error",
            CheckKind::DepthChain { .. } => "depth-chain",
            CheckKind::Custom(_) => "custom",
        }
    }
}

#[derive(Clone)]
pub struct SuiteCheck {
    pub name: String,
    /// Whether the property is expected to hold.
    pub expect: bool,
    pub kind: CheckKind,
}

fn check(name: &str, expect: bool, kind: CheckKind) -> SuiteCheck {
    SuiteCheck { name: name.into(), expect, kind }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub kind: String,
    pub expected: bool,
    pub observed: bool,
    pub passed: bool,
    pub error: Option<String>,
    pub detail: Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub suite: String,
    pub outcomes: Vec<CheckOutcome>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        for o in &self.outcomes {
            let status = if o.passed { "ok" } else { "FAILED" };
            let want = if o.expected { "holds" } else { "fails" };
            out.push_str(&format!("{status:6} {} [{}] expected {want}", o.name, o.kind));
            if let Some(e) = &o.error {
                out.push_str(&format!(" (error: {e})"));
            }
            out.push('\n');
        }
        out
    }
}

pub struct Suite {
    pub name: String,
    pub description: String,
    pub implementation: ModuleSet,
    pub abstraction: ModuleSet,
    pub env: ObsEnv,
    pub fuel: u64,
    pub act: Option<ActSetup>,
    pub checks: Vec<SuiteCheck>,
}

impl Suite {
    /// Bounds, expectations and module lists as JSON.
    pub fn manifest(&self) -> Json {
        json!({
            "name": self.name,
            "description": self.description,
            "fuel": self.fuel,
            "implementation": self.implementation.names(),
            "abstraction": self.abstraction.names(),
            "env": self.env.alphabet().iter().map(|(n, a, r)| json!({"obs": n, "arg": a, "ret": r})).collect::<Vec<_>>(),
            "act": self.act.as_ref().map(|a| json!({
                "modules": a.wrapped.iter().map(|(p, _)| p.name.clone()).collect::<Vec<_>>(),
                "sigmaMain": a.sigma_main.to_string(),
                "fuel": a.fuel,
            })),
            "checks": self.checks.iter().map(|c| json!({"name": c.name, "kind": c.kind.kind_name(), "expect": c.expect})).collect::<Vec<_>>(),
        })
    }
}

fn verdict_json(v: &Verdict) -> Json {
    match v {
        Verdict::Holds => json!({"verdict": "holds"}),
        Verdict::Refuted(t) => json!({"verdict": "refuted", "witness": t.to_json()}),
    }
}

pub fn act_json(r: &ActReport) -> Json {
    let mut j = r.to_json();
    j["traces"] = json!(r.traces.len());
    j
}

fn run_kind(kind: &CheckKind) -> Result<(bool, Json), String> {
    match kind {
        CheckKind::Refine { lhs, rhs, fuel, env } => {
            let v = refine_closed(lhs, rhs, *fuel, env).map_err(|e| e.to_string())?;
            Ok((v.holds(), verdict_json(&v)))
        }
        CheckKind::Act(setup) => {
            let r = setup.run().map_err(|e| e.to_string())?;
            Ok((r.clean() && r.inclusion.holds(), act_json(&r)))
        }
        CheckKind::Diff { lhs, rhs, env, bounds, pairs, seed } => {
            let r = diff_test(lhs, rhs, env, bounds, *pairs, *seed).map_err(|e| e.to_string())?;
            Ok((r.clean(), serde_json::to_value(&r).expect("report serializes")))
        }
        CheckKind::NoError { mods, fuel, env } => {
            let beh = bounded_beh(mods, *fuel, env).map_err(|e| e.to_string())?;
            let errs: Vec<_> = beh.iter().filter(|t| t.end == End::Error || t.is_chaos()).collect();
            Ok((errs.is_empty(), json!({"traces": beh.len(), "errorTraces": errs.len(), "example": errs.first().map(|t| t.to_json())})))
        }
        CheckKind::DepthChain { mods, conds, inputs, fuel } => {
            let mut reps: Vec<(i64, DepthChainReport)> = Vec::new();
            for n in inputs {
                let mut r = ScriptedResolver::new(vec![]).with_obs("getint", vec![AnyValue::Int(*n)]);
                reps.push((*n, check_depth_chain(mods, conds, &mut r, *fuel).map_err(|e| e.to_string())?));
            }
            let ok = reps.iter().all(|(_, r)| r.violations.is_empty());
            Ok((ok, json!(reps.iter().map(|(n, r)| json!({"input": n, "report": r})).collect::<Vec<_>>())))
        }
        CheckKind::Custom(f) => f(),
    }
}

/// Runs every configured check; failures and errors become report entries.
pub fn suite_checks(suite: &Suite) -> CheckReport {
    let outcomes = suite
        .checks
        .iter()
        .map(|c| {
            let (observed, detail, error) = match run_kind(&c.kind) {
                Ok((o, d)) => (o, d, None),
                Err(e) => (false, Json::Null, Some(e)),
            };
            CheckOutcome {
                name: c.name.clone(),
                kind: c.kind.kind_name().into(),
                expected: c.expect,
                observed,
                passed: error.is_none() && observed == c.expect,
                error,
                detail,
            }
        })
        .collect();
    CheckReport { suite: suite.name.clone(), outcomes }
}

pub const SUITE_NAMES: &[&str] = &["cannon1", "cannon2", "once-test1", "once-test2", "mw1", "mw2", "app-mutant", "repeat", "safety", "empty"];

pub fn suite(name: &str) -> Option<Suite> {
    Some(match name {
        "cannon1" => cannon_suite(1),
        "cannon2" => cannon_suite(2),
        "once-test1" => once_suite(1),
        "once-test2" => once_suite(2),
        "mw1" => mw_suite("mw1"),
        "mw2" => mw_suite("mw2"),
        "app-mutant" => app_mutant_suite(),
        "repeat" => repeat_suite(),
        "safety" => safety_suite(),
        "empty" => empty_suite(),
        _ => return None,
    })
}

pub fn all_suites() -> Vec<Suite> {
    SUITE_NAMES.iter().map(|n| suite(n).expect("registered suite")).collect()
}

fn set(mods: Vec<Module>) -> ModuleSet {
    ModuleSet::new(mods)
}

fn diff(lhs: ModuleSet, rhs: ModuleSet, env: ObsEnv, fuel: u64) -> CheckKind {
    CheckKind::Diff { lhs, rhs, env, bounds: DiffBounds::new(fuel), pairs: 100, seed: 0 }
}

pub const CANNON_FUEL: u64 = 60;

pub fn cannon_impl(shots: u32) -> ModuleSet {
    set(vec![corpus_embedded("cannon"), embed(&cannon_main(false, shots))])
}

pub fn cannon_abs(shots: u32) -> ModuleSet {
    set(vec![corpus_embedded("cannon_abs"), embed(&cannon_main(true, shots))])
}

pub fn cannon_act(shots: u32) -> ActSetup {
    ActSetup::new(
        vec![
            (PreAbstraction::from_module(&corpus_embedded("cannon_abs"), cannon("Ready")), s_cannon()),
            (PreAbstraction::from_module(&embed(&cannon_main(true, shots)), Resource::Unit), s_client_main(cannon("Ball"))),
        ],
        cannon("Ball"),
        400,
        ObsEnv::new(),
    )
}

fn cannon_suite(shots: u32) -> Suite {
    let env = ObsEnv::new();
    let mut checks = Vec::new();
    for n in [1, 2] {
        let ok = n == 1;
        checks.push(check(
            &format!("refine fire x{n}"),
            ok,
            CheckKind::Refine { lhs: cannon_impl(n), rhs: cannon_abs(n), fuel: CANNON_FUEL, env: env.clone() },
        ));
        checks.push(check(&format!("act fire x{n}"), ok, CheckKind::Act(cannon_act(n))));
    }
    checks.push(check("difftest", true, diff(cannon_impl(shots), cannon_abs(shots), env.clone(), CANNON_FUEL)));
    Suite {
        name: format!("cannon{shots}"),
        description: format!("Cannon fired {shots} time(s); only one ball exists"),
        implementation: cannon_impl(shots),
        abstraction: cannon_abs(shots),
        env,
        fuel: CANNON_FUEL,
        act: Some(cannon_act(shots)),
        checks,
    }
}

fn test_name(calls: u32) -> &'static str {
    if calls == 1 { "test1" } else { "test2" }
}

pub fn once_act(calls: u32) -> ActSetup {
    ActSetup::new(
        vec![
            (PreAbstraction::from_module(&corpus_embedded("once_abs"), Resource::Unit), s_once()),
            (PreAbstraction::from_module(&corpus_embedded(test_name(calls)), Resource::Unit), s_client_main(once_do())),
        ],
        once_do(),
        400,
        ObsEnv::new(),
    )
}

pub fn once_check_domains() -> CheckDomains {
    CheckDomains::new(vec![Resource::Unit, once_do()], vec![AnyValue::nil(), AnyValue::Int(0)])
}

/// The wrapped abstraction in exhaustive-checking mode.
pub fn once_wrapped(calls: u32) -> ModuleSet {
    let setup = once_act(calls);
    let mode = Mode::Check(once_check_domains());
    set(setup.wrapped.iter().map(|(a, out)| wrap_module(&setup.s, a, out, &mode).expect("tables match")).collect())
}

pub fn once_impl(calls: u32) -> ModuleSet {
    set(vec![corpus_embedded("once"), corpus_embedded(test_name(calls))])
}

pub const ONCE_FUEL: u64 = 400;

fn once_suite(calls: u32) -> Suite {
    let env = ObsEnv::new();
    let mut checks = Vec::new();
    for n in [1, 2] {
        let ok = n == 1;
        checks.push(check(&format!("act test{n}"), ok, CheckKind::Act(once_act(n))));
        checks.push(check(
            &format!("refine test{n} against wrapped"),
            ok,
            CheckKind::Refine { lhs: once_impl(n), rhs: once_wrapped(n), fuel: ONCE_FUEL, env: env.clone() },
        ));
    }
    let act = once_act(calls);
    checks.push(check("difftest erased", calls == 1, diff(once_impl(calls), act.erased(), env.clone(), 100)));
    Suite {
        name: format!("once-test{calls}"),
        description: format!("Once.do called {calls} time(s) by the test client"),
        implementation: once_impl(calls),
        abstraction: act.erased(),
        env,
        fuel: 40,
        act: Some(act),
        checks,
    }
}

pub const MW_UNROLL: usize = 2;
pub const MW_FUEL: u64 = 4000;
pub const MW_DIFF_FUEL: u64 = 600;
pub const MW_INDICES: [i64; 3] = [0, 5, 100];

fn mw_impl_module(mw: &str, unroll: Option<usize>) -> Module {
    let m = corpus_module(mw);
    embed(&match unroll {
        Some(k) => unroll_main(&m, k),
        None => m,
    })
}

/// `P_MW ∘ Mem ∘ Map ∘ app`.
pub fn mw_impl(mw: &str, app: &str, unroll: Option<usize>) -> ModuleSet {
    set(vec![mw_impl_module(mw, unroll), mem_module(), corpus_embedded("map"), corpus_embedded(app)])
}

/// Erased `A_MW ∘ A_Mem ∘ A_Map ∘ app`.
pub fn mw_abs(app: &str, unroll: Option<usize>) -> ModuleSet {
    set(vec![mw_abstraction(unroll), mem_module(), erase(&map_pre()), corpus_embedded(app)])
}

pub fn mw_mid(app: &str, unroll: Option<usize>) -> ModuleSet {
    set(vec![mw_intermediate(unroll), mem_module(), corpus_embedded("map"), corpus_embedded(app)])
}

fn map_pre() -> PreAbstraction {
    pure_pre("Map", &["Map.get", "Map.new", "Map.update"])
}

pub fn probe_env() -> ObsEnv {
    ObsEnv::new().with("getint", MW_INDICES.iter().map(|i| AnyValue::Int(*i)).collect())
}

pub fn app_mw_act() -> ActSetup {
    ActSetup::new(
        vec![
            (PreAbstraction::from_module(&corpus_embedded("app_mid"), app("Run")), s_app_simple()),
            (PreAbstraction::from_module(&mw_abstraction(Some(MW_UNROLL)), Resource::Unit), s_mw_simple()),
        ],
        app("Init"),
        4000,
        ObsEnv::new(),
    )
}

fn mw_suite(mw: &str) -> Suite {
    let k = Some(MW_UNROLL);
    let (env, probe) = (ObsEnv::new(), probe_env());
    let refine = |lhs, rhs, env: &ObsEnv| CheckKind::Refine { lhs, rhs, fuel: MW_FUEL, env: env.clone() };
    let checks = vec![
        check("refine abstraction", true, refine(mw_impl(mw, "app", k), mw_abs("app_abs", k), &env)),
        check("refine abstraction, probe client", true, refine(mw_impl(mw, "app_probe", k), mw_abs("app_probe", k), &probe)),
        check("refine intermediate, probe client", true, refine(mw_impl(mw, "app_probe", k), mw_mid("app_probe", k), &probe)),
        check("intermediate refines abstraction", true, refine(mw_mid("app_probe", k), mw_abs("app_probe", k), &probe)),
        check("act app and mw", true, CheckKind::Act(app_mw_act())),
        check("difftest", true, diff(mw_impl(mw, "app", None), mw_abs("app_abs", None), env.clone(), MW_DIFF_FUEL)),
        check("difftest, probe client", true, diff(mw_impl(mw, "app_probe", None), mw_abs("app_probe", None), probe.clone(), MW_DIFF_FUEL)),
        check("refine mutated app", false, refine(mw_impl(mw, "app", k), mw_abs("app_mutant", k), &env)),
    ];
    Suite {
        name: mw.into(),
        description: format!("{} against the map abstraction, main unrolled {MW_UNROLL} times", mw.to_uppercase()),
        implementation: mw_impl(mw, "app", k),
        abstraction: mw_abs("app_abs", k),
        env,
        fuel: MW_FUEL,
        act: Some(app_mw_act()),
        checks,
    }
}

fn app_mutant_suite() -> Suite {
    let k = Some(MW_UNROLL);
    let env = ObsEnv::new();
    let checks = vec![
        check("difftest mutant", false, diff(mw_impl("mw1", "app", None), mw_abs("app_mutant", None), env.clone(), MW_DIFF_FUEL)),
        check("refine mutant", false, CheckKind::Refine { lhs: mw_impl("mw1", "app", k), rhs: mw_abs("app_mutant", k), fuel: MW_FUEL, env: env.clone() }),
        check("refine correct app", true, CheckKind::Refine { lhs: mw_impl("mw1", "app", k), rhs: mw_abs("app_abs", k), fuel: MW_FUEL, env: env.clone() }),
    ];
    Suite {
        name: "app-mutant".into(),
        description: "MW1 against an abstraction whose App prints 41".into(),
        implementation: mw_impl("mw1", "app", None),
        abstraction: mw_abs("app_mutant", None),
        env,
        fuel: MW_DIFF_FUEL,
        act: None,
        checks,
    }
}

pub const REPEAT_FUEL: u64 = 600;

pub fn repeat_env() -> ObsEnv {
    ObsEnv::new().with("getint", (0..=5).map(AnyValue::Int).collect())
}

pub fn repeat_impl() -> ModuleSet {
    set(vec![corpus_embedded("rp"), corpus_embedded("sc"), corpus_embedded("ad")])
}

/// `S_AD ∪ H_RP(S_SC) ∪ S_SC`.
pub fn repeat_conds() -> Conds {
    let sc = s_sc();
    let rp = h_rp(vec![successor()]).instantiate(&sc).conds;
    conds_union(&conds_union(&s_ad(), &rp), &sc)
}

pub fn repeat_act() -> ActSetup {
    let sc = s_sc();
    let rp = h_rp(vec![successor()]).instantiate(&sc).conds;
    ActSetup::new(
        vec![(ad_pre(), s_ad()), (pure_pre("RP", &["RP.repeat"]), rp), (pure_pre("SC", &["SC.succ"]), sc)],
        Resource::Unit,
        REPEAT_FUEL,
        repeat_env(),
    )
}

fn repeat_suite() -> Suite {
    let env = repeat_env();
    let abs = repeat_act().erased();
    let wrong = set(vec![embed(&patched("ad_abs", "n + n", "n + n + 1")), erase(&pure_pre("RP", &["RP.repeat"])), erase(&pure_pre("SC", &["SC.succ"]))]);
    let looping = set(vec![embed(&patched("rp", "n - 1", "n")), corpus_embedded("sc"), corpus_embedded("ad")]);
    let refine = |lhs: &ModuleSet, rhs: &ModuleSet| CheckKind::Refine { lhs: lhs.clone(), rhs: rhs.clone(), fuel: REPEAT_FUEL, env: env.clone() };
    let instantiation: CustomCheck = Arc::new(|| {
        let inst = h_rp(vec![successor()]).instantiate(&s_sc());
        let c = &inst.conds["RP.repeat"];
        let depths: Vec<String> = (0..=5)
            .map(|n| {
                let x = AnyValue::List(vec![AnyValue::Ptr(crate::ems::PtrVal::Func("SC.succ".into())), AnyValue::Int(n), AnyValue::Int(n)]);
                super::depth::call_depth(&inst.conds, "RP.repeat", &x)
            })
            .map(|d| format!("{d:?}"))
            .collect();
        let ok = inst.records.iter().any(|r| r.admitted && r.sem == "succ")
            && (0..=5).all(|n| {
                let x = AnyValue::List(vec![AnyValue::Ptr(crate::ems::PtrVal::Func("SC.succ".into())), AnyValue::Int(n), AnyValue::Int(n)]);
                super::depth::call_depth(&inst.conds, "RP.repeat", &x) == crate::spc::Depth::Pure(crate::spc::Ordinal::omega_plus(n as u32))
            });
        Ok((ok, json!({"label": c.label, "records": inst.records, "depths": depths})))
    });
    let checks = vec![
        check("refine erased abstraction", true, refine(&repeat_impl(), &abs)),
        check("erased abstraction refines implementation", true, refine(&abs, &repeat_impl())),
        check("repeat spec instantiation", true, CheckKind::Custom(instantiation)),
        check(
            "pure calls decrease depth",
            true,
            CheckKind::DepthChain { mods: repeat_impl(), conds: repeat_conds(), inputs: (0..=5).collect(), fuel: REPEAT_FUEL },
        ),
        check("act", true, CheckKind::Act(repeat_act())),
        check("difftest", true, diff(repeat_impl(), abs.clone(), env.clone(), REPEAT_FUEL)),
        check("refine off-by-one abstraction", false, refine(&repeat_impl(), &wrong)),
        check(
            "non-decreasing recursion",
            false,
            CheckKind::DepthChain { mods: looping, conds: repeat_conds(), inputs: vec![2], fuel: 200 },
        ),
    ];
    Suite {
        name: "repeat".into(),
        description: "Function-pointer iteration: repeat(&succ, n, n) prints 2n".into(),
        implementation: repeat_impl(),
        abstraction: abs,
        env,
        fuel: REPEAT_FUEL,
        act: Some(repeat_act()),
        checks,
    }
}

pub const SAFE_FUEL: u64 = 20;

fn safe_domains() -> CheckDomains {
    CheckDomains::new(vec![Resource::Unit], vec![AnyValue::Int(0)])
}

/// Two `Safe` modules calling each other's functions.
pub fn safe_pair(ns: &[&str], mode: &Mode) -> Vec<(PreAbstraction, Conds)> {
    vec![
        (mk_safe("A", ns, &["A.f", "main"], mode), s_trivial(&["A.f", "main"])),
        (mk_safe("B", ns, &["B.g"], mode), s_trivial(&["B.g"])),
    ]
}

pub fn safe_erased(ns: &[&str]) -> ModuleSet {
    set(safe_pair(ns, &Mode::Check(safe_domains())).iter().map(|(a, _)| erase(a)).collect())
}

pub fn safe_wrapped(ns: &[&str]) -> ModuleSet {
    let mode = Mode::Check(safe_domains());
    let pair = safe_pair(ns, &mode);
    let s = pair.iter().fold(Conds::new(), |acc, (_, c)| conds_union(&acc, c));
    set(pair.iter().map(|(a, out)| wrap_module(&s, a, out, &mode).expect("tables match")).collect())
}

fn safety_suite() -> Suite {
    let env = ObsEnv::new();
    let ns = ["A.f", "B.g"];
    let no_error = |mods, expect, name: &str| check(name, expect, CheckKind::NoError { mods, fuel: SAFE_FUEL, env: env.clone() });
    // Only the value choices depend on the mode, and the erased side needs them finite.
    let act = ActSetup::new(safe_pair(&ns, &Mode::Check(safe_domains())), Resource::Unit, SAFE_FUEL, env.clone());
    let checks = vec![
        no_error(safe_erased(&ns), true, "erased safe modules"),
        no_error(safe_erased(&["A.f", "B.g", "main"]), true, "erased safe modules, main callable"),
        no_error(safe_wrapped(&ns), true, "wrapped safe modules"),
        check("act", true, CheckKind::Act(act.clone())),
        no_error(safe_erased(&["A.f", "C.h"]), false, "calling an undefined name"),
    ];
    Suite {
        name: "safety".into(),
        description: "Safe modules that call each other arbitrarily never error".into(),
        implementation: safe_erased(&ns),
        abstraction: safe_erased(&ns),
        env,
        fuel: SAFE_FUEL,
        act: Some(act),
        checks,
    }
}

fn empty_main() -> ModuleSet {
    set(vec![Module::new("E", AnyValue::Unit).with_fun("main", |_| crate::ems::ret(AnyValue::Int(0)))])
}

fn empty_suite() -> Suite {
    let env = ObsEnv::new();
    let printing = crate::imp::load_sources(&["module E { def main() { print(1) } }"]).expect("parses");
    let checks = vec![
        check("difftest", true, diff(empty_main(), empty_main(), env.clone(), 10)),
        check("refine", true, CheckKind::Refine { lhs: empty_main(), rhs: empty_main(), fuel: 10, env: env.clone() }),
        check("refine printing main", false, CheckKind::Refine { lhs: printing, rhs: empty_main(), fuel: 10, env: env.clone() }),
    ];
    Suite {
        name: "empty".into(),
        description: "main returns 0 and does nothing else".into(),
        implementation: empty_main(),
        abstraction: empty_main(),
        env,
        fuel: 10,
        act: None,
        checks,
    }
}
