use ccr_core::behavior::{bounded_beh, End, Trace, TraceSet};
use ccr_core::ems::{run, AnyValue, ModuleSet, ObsEnv, PtrVal, RunEnd, ScriptedResolver, SeededResolver};
use ccr_core::imp::*;

fn corpus(name: &str) -> String {
    std::fs::read_to_string(format!("{}/corpus/{name}.imp", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

const ALL: &[&str] = &[
    "ad", "ad_abs", "app", "app_abs", "app_mutant", "app_probe", "cannon", "cannon_abs", "map", "mw1", "mw2", "once", "once_abs",
    "rp", "sc", "test1", "test2",
];

fn src(name: &str) -> String {
    corpus(name).replace("NUM_FIRE", "1")
}

#[test]
fn printer_round_trips_corpus() {
    for name in ALL.iter().chain(["main_cannon", "main_cannon_abs"].iter()) {
        let m = parse(&src(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        let printed = print_module(&m);
        assert_eq!(parse(&printed).unwrap(), m, "{name}");
        assert_eq!(print_module(&parse(&printed).unwrap()), printed, "{name}");
    }
}

#[test]
fn mw1_shape() {
    let m = parse(&src("mw1")).unwrap();
    assert_eq!(m.vars, vec![("arr".to_string(), None), ("map".to_string(), None)]);
    let names: Vec<_> = m.funs.iter().map(|f| m.qualified(&f.name)).collect();
    assert_eq!(names, ["main", "MW.put", "MW.get"]);
    assert_eq!(m.funs[2].locals, ["r"]);
    let Stmt::Seq(main) = &m.funs[0].body else { panic!() };
    assert_eq!(main[0], Stmt::CallFun(Some("arr".into()), "Mem.alloc".into(), vec![Expr::Int(100)]));
    assert!(matches!(&main[3], Stmt::While(Expr::Int(1), _)));
    let json = ast_json(&m);
    let back: ImpModule = serde_json::from_str(&json).unwrap();
    assert_eq!(back, m);
}

fn mw_stack(mw: &str, app: &str) -> ModuleSet {
    let mut mods = vec![mem_module()];
    for s in [mw, "map", app] {
        mods.push(embed(&parse(&src(s)).unwrap()));
    }
    ModuleSet::new(mods)
}

#[test]
fn mw_logs_match_print_format() {
    for mw in ["mw1", "mw2"] {
        let out = run(&mw_stack(mw, "app"), &mut ScriptedResolver::new(vec![]), 400).unwrap();
        let prints = out.prints();
        assert_eq!(&prints[..5], ["put:042", "get:042", "val:42", "get:042", "val:42"], "{mw}");
        assert!(matches!(out.end, RunEnd::Partial(_)));
    }
}

#[test]
fn map_backed_indices() {
    for mw in ["mw1", "mw2"] {
        for k in [0, 5, 100, -3] {
            let mut r = ScriptedResolver::new(vec![]).with_obs("getint", [k, 7].into_iter().chain([100; 40]).map(AnyValue::Int).collect());
            let out = run(&mw_stack(mw, "app_probe"), &mut r, 600).unwrap();
            let p = out.prints();
            assert_eq!(p[0], format!("put:{k}42"));
            assert_eq!(&p[1..5], ["put:78", "get:78", &format!("get:{k}42"), &format!("val:8{}", 42)], "{mw} {k}");
            assert_eq!(&p[5..7], ["put:100101", "get:100101"]);
        }
    }
}

fn single(src: &str) -> ModuleSet {
    ModuleSet::new(vec![mem_module(), embed(&parse(src).unwrap())])
}

fn beh(mods: &ModuleSet) -> TraceSet {
    bounded_beh(mods, 60, &ObsEnv::new()).unwrap()
}

#[test]
fn ub_rules() {
    let chaos = TraceSet::chaos(60);
    assert_eq!(beh(&single("module P { def main() { var x = 1 / 0 } }")), chaos);
    assert_eq!(beh(&single("module P { def main() { var x = 5 % 0 } }")), chaos);
    assert_eq!(beh(&single("module P { def main() { var p = malloc(1); var x = load(p) } }")), chaos);
    assert_eq!(beh(&single("module P { def main() { var p = malloc(1); free(p); store(p, 1) } }")), chaos);
    assert_eq!(beh(&single("module P { def main() { var p = malloc(1); free(p); var c = cmp(p, p) } }")), chaos);
    assert_eq!(beh(&single("module P { def main() { var p = null; if (p) { skip } } }")), chaos);
    let ok = beh(&single("module P { def main() { var p = malloc(1); store(p, 7); var x = load(p); return x } }"));
    assert!(ok.contains(&Trace::new(vec![], End::Term(AnyValue::Int(7)))));
    let c = beh(&single("module P { def main() { var p = malloc(2); var a = cmp(p, p); var b = cmp(null, p); return a * 10 + b } }"));
    assert!(c.contains(&Trace::new(vec![], End::Term(AnyValue::Int(10)))));
}

#[test]
fn downcast_failure_is_ub() {
    let m = embed(&parse("module P { def f(x) { return x } }").unwrap());
    let f = m.funs["P.f"].clone();
    let caller = ccr_core::ems::Module::new("C", AnyValue::Unit)
        .with_fun("main", move |_| f.apply(AnyValue::str("x")));
    assert_eq!(beh(&ModuleSet::new(vec![caller])), TraceSet::chaos(60));
}

#[test]
fn unknown_function_is_error() {
    let out = run(&single("module P { def main() { Q.nope() } }"), &mut ScriptedResolver::new(vec![]), 50).unwrap();
    assert!(matches!(out.end, RunEnd::Error(ref e) if e.contains("Q.nope")));
}

#[test]
fn function_pointers() {
    let mods = ModuleSet::new(vec![
        embed(&parse(&src("rp")).unwrap()),
        embed(&parse(&src("sc")).unwrap()),
        embed(&parse(&src("ad")).unwrap()),
    ]);
    for n in 0..6 {
        let mut r = ScriptedResolver::new(vec![]).with_obs("getint", vec![AnyValue::Int(n)]);
        let out = run(&mods, &mut r, 500).unwrap();
        assert_eq!(out.prints(), [format!("{}", 2 * n)]);
        assert_eq!(out.end, RunEnd::Term(AnyValue::Int(0)));
    }
}

#[test]
fn val_casts() {
    for v in [Val::I64(-4), Val::Ptr(PtrVal::Heap { block: 3, ofs: 0 }), Val::Ptr(PtrVal::Func("SC.succ".into())), Val::Ptr(PtrVal::Null)] {
        assert_eq!(any_to_val(&val_to_any(&v)), Some(v));
    }
    assert_eq!(any_to_val(&AnyValue::str("x")), None);
    assert_eq!(any_to_val(&AnyValue::Unit), None);
}

#[test]
fn while_loops_spend_fuel() {
    let m = single("module P { def main() { while (true) { skip } } }");
    let out = run(&m, &mut SeededResolver::new(0, ObsEnv::new()), 30).unwrap();
    assert!(matches!(out.end, RunEnd::Partial(_)));
}
