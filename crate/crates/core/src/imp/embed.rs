//! Embedding IMP modules as event-semantics modules.
//!
//! Module variables live in the module state as a list of `(name, value)`
//! pairs. They are read once on entry and after every call, and written back
//! before calls and on return when modified.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::ast::*;
use crate::ems::{assume, call, delay, get, obs, put, ret, AnyValue, Computation, Module, PtrVal};

pub fn val_to_any(v: &Val) -> AnyValue {
    match v {
        Val::I64(n) => AnyValue::Int(*n),
        Val::Ptr(p) => AnyValue::Ptr(p.clone()),
    }
}

/// Downcast; `None` means the caller must trigger UB.
pub fn any_to_val(a: &AnyValue) -> Option<Val> {
    match a {
        AnyValue::Int(n) => Some(Val::I64(*n)),
        AnyValue::Ptr(p) => Some(Val::Ptr(p.clone())),
        _ => None,
    }
}

fn ub() -> Computation {
    assume(false)
}

enum Rv {
    V(Val),
    T(String),
}

type Vars = BTreeMap<String, Val>;

fn text(r: Rv) -> Option<String> {
    match r {
        Rv::T(s) => Some(s),
        Rv::V(Val::I64(n)) => Some(n.to_string()),
        Rv::V(Val::Ptr(_)) => None,
    }
}

fn int(v: Val) -> Option<i64> {
    match v {
        Val::I64(n) => Some(n),
        Val::Ptr(_) => None,
    }
}

fn truthy(v: Val) -> Option<bool> {
    int(v).map(|n| n != 0)
}

fn lookup(x: &str, locals: &Vars, globals: &Vars) -> Option<Val> {
    locals.get(x).or_else(|| globals.get(x)).cloned()
}

fn eval(e: &Expr, locals: &Vars, globals: &Vars) -> Option<Rv> {
    let val = |e: &Expr| match eval(e, locals, globals)? {
        Rv::V(v) => Some(v),
        Rv::T(_) => None,
    };
    Some(match e {
        Expr::Int(n) => Rv::V(Val::I64(*n)),
        Expr::Null => Rv::V(Val::Ptr(PtrVal::Null)),
        Expr::Var(x) => Rv::V(lookup(x, locals, globals)?),
        Expr::Str(s) => Rv::T(s.clone()),
        Expr::StrOf(a) => Rv::T(int(val(a)?)?.to_string()),
        Expr::Concat(a, b) => {
            let l = text(eval(a, locals, globals)?)?;
            Rv::T(l + &text(eval(b, locals, globals)?)?)
        }
        Expr::Un(UnOp::Not, a) => Rv::V(Val::I64(!truthy(val(a)?)? as i64)),
        Expr::Un(UnOp::Neg, a) => Rv::V(Val::I64(int(val(a)?)?.wrapping_neg())),
        Expr::Bin(BinOp::And, a, b) => Rv::V(Val::I64((truthy(val(a)?)? && truthy(val(b)?)?) as i64)),
        Expr::Bin(BinOp::Or, a, b) => Rv::V(Val::I64((truthy(val(a)?)? || truthy(val(b)?)?) as i64)),
        Expr::Bin(op, a, b) => Rv::V(binop(*op, val(a)?, val(b)?)?),
    })
}

fn shift(p: PtrVal, k: i64) -> Option<Val> {
    match p {
        PtrVal::Heap { block, ofs } => Some(Val::Ptr(PtrVal::Heap { block, ofs: ofs.checked_add(k)? })),
        _ => None,
    }
}

fn binop(op: BinOp, a: Val, b: Val) -> Option<Val> {
    let (x, y) = match (a, b) {
        (Val::I64(x), Val::I64(y)) => (x, y),
        (Val::Ptr(p), Val::I64(k)) if op == BinOp::Add => return shift(p, k),
        (Val::Ptr(p), Val::I64(k)) if op == BinOp::Sub => return shift(p, k.checked_neg()?),
        (Val::I64(k), Val::Ptr(p)) if op == BinOp::Add => return shift(p, k),
        _ => return None,
    };
    let b = |c: bool| Some(c as i64);
    Some(Val::I64(match op {
        BinOp::Add => x.wrapping_add(y),
        BinOp::Sub => x.wrapping_sub(y),
        BinOp::Mul => x.wrapping_mul(y),
        BinOp::Div => x.checked_div(y)?,
        BinOp::Mod => x.checked_rem(y)?,
        BinOp::Lt => b(x < y)?,
        BinOp::Le => b(x <= y)?,
        BinOp::Gt => b(x > y)?,
        BinOp::Ge => b(x >= y)?,
        BinOp::Eq => b(x == y)?,
        BinOp::Ne => b(x != y)?,
        BinOp::And | BinOp::Or => unreachable!("short-circuit operators are evaluated lazily"),
    }))
}

fn encode_globals(g: &Vars, order: &[String]) -> AnyValue {
    AnyValue::List(order.iter().filter_map(|x| Some(AnyValue::pair(AnyValue::str(x.clone()), val_to_any(g.get(x)?)))).collect())
}

fn decode_globals(st: &AnyValue, order: &[String]) -> Option<Vars> {
    let mut out = Vars::new();
    for e in st.as_list()? {
        let (k, v) = e.as_pair()?;
        out.insert(k.as_str()?.to_string(), any_to_val(v)?);
    }
    order.iter().all(|x| out.contains_key(x)).then_some(out)
}

struct Shared {
    globals: Vec<String>,
}

#[derive(Clone)]
struct Frame {
    shared: Arc<Shared>,
    locals: Vars,
    /// `None` until read from the module state.
    globals: Option<Vars>,
    dirty: bool,
    kont: Vec<Stmt>,
}

impl Frame {
    fn assign(&mut self, x: &str, v: Val) {
        if self.locals.contains_key(x) {
            self.locals.insert(x.to_string(), v);
        } else {
            self.globals.as_mut().expect("globals loaded").insert(x.to_string(), v);
            self.dirty = true;
        }
    }

    fn flush(&mut self, then: Computation) -> Computation {
        if self.dirty {
            self.dirty = false;
            put(encode_globals(self.globals.as_ref().expect("globals loaded"), &self.shared.globals)).then(then)
        } else {
            then
        }
    }
}

fn finish(mut fr: Frame, v: Val) -> Computation {
    fr.flush(ret(val_to_any(&v)))
}

fn eval_vals(es: &[Expr], fr: &Frame) -> Option<Vec<Val>> {
    let g = fr.globals.as_ref().expect("globals loaded");
    es.iter()
        .map(|e| match eval(e, &fr.locals, g)? {
            Rv::V(v) => Some(v),
            Rv::T(_) => None,
        })
        .collect()
}

/// Calls `f`, stores the result in `dst` and resumes.
fn do_call(mut fr: Frame, dst: Option<String>, f: String, args: Vec<Val>) -> Computation {
    let arg = AnyValue::List(args.iter().map(val_to_any).collect());
    let pending = fr.dirty.then(|| encode_globals(fr.globals.as_ref().expect("globals loaded"), &fr.shared.globals));
    fr.dirty = false;
    fr.globals = None;
    let c = call(f, arg).bind(move |r| {
        let Some(v) = any_to_val(&r) else { return ub() };
        let mut fr = fr.clone();
        match &dst {
            Some(x) if fr.locals.contains_key(x) => {
                fr.locals.insert(x.clone(), v);
                drive(fr)
            }
            Some(x) => {
                let x = x.clone();
                reload(fr, move |fr| fr.assign(&x, v.clone()))
            }
            None => drive(fr),
        }
    });
    match pending {
        Some(st) => put(st).then(c),
        None => c,
    }
}

fn reload(fr: Frame, then: impl Fn(&mut Frame) + Send + Sync + 'static) -> Computation {
    if fr.shared.globals.is_empty() {
        let mut fr = fr;
        fr.globals = Some(Vars::new());
        then(&mut fr);
        return drive(fr);
    }
    get().bind(move |st| {
        let Some(g) = decode_globals(&st, &fr.shared.globals) else { return ub() };
        let mut fr = fr.clone();
        fr.globals = Some(g);
        then(&mut fr);
        drive(fr)
    })
}

fn drive(mut fr: Frame) -> Computation {
    loop {
        let Some(s) = fr.kont.pop() else { return finish(fr, Val::I64(0)) };
        if fr.globals.is_none() && fr.shared.globals.is_empty() {
            fr.globals = Some(Vars::new());
        }
        if fr.globals.is_none() {
            fr.kont.push(s);
            return reload(fr, |_| {});
        }
        let g = fr.globals.as_ref().expect("checked above");
        macro_rules! ev {
            ($e:expr) => {
                match eval($e, &fr.locals, g) {
                    Some(Rv::V(v)) => v,
                    _ => return ub(),
                }
            };
        }
        macro_rules! evs {
            ($es:expr) => {
                match eval_vals($es, &fr) {
                    Some(vs) => vs,
                    None => return ub(),
                }
            };
        }
        match s {
            Stmt::Skip => {}
            Stmt::Seq(ss) => fr.kont.extend(ss.into_iter().rev()),
            Stmt::Assign(x, e) => {
                let v = ev!(&e);
                fr.assign(&x, v);
            }
            Stmt::If(c, t, e) => {
                let Some(b) = truthy(ev!(&c)) else { return ub() };
                fr.kont.push(if b { *t } else { *e });
            }
            Stmt::While(c, body) => {
                let Some(b) = truthy(ev!(&c)) else { return ub() };
                if b {
                    fr.kont.push(Stmt::While(c, body.clone()));
                    fr.kont.push(*body);
                    // One silent step per iteration keeps event-free loops within fuel.
                    return delay(move || drive(fr.clone()));
                }
            }
            Stmt::Return(e) => {
                let v = match e {
                    Some(e) => ev!(&e),
                    None => Val::I64(0),
                };
                return finish(fr, v);
            }
            Stmt::AddrOf(x, f) => fr.assign(&x, Val::Ptr(PtrVal::Func(f))),
            Stmt::CallFun(x, f, args) => {
                let vs = evs!(&args);
                return do_call(fr, x, f, vs);
            }
            Stmt::CallPtr(x, p, args) => {
                let Val::Ptr(PtrVal::Func(f)) = ev!(&p) else { return ub() };
                let vs = evs!(&args);
                return do_call(fr, x, f, vs);
            }
            Stmt::Malloc(x, n) => {
                let n = ev!(&n);
                return do_call(fr, Some(x), "Mem.alloc".into(), vec![n]);
            }
            Stmt::Free(p) => {
                let p = ev!(&p);
                return do_call(fr, None, "Mem.free".into(), vec![p]);
            }
            Stmt::Load(x, p) => {
                let p = ev!(&p);
                return do_call(fr, Some(x), "Mem.load".into(), vec![p]);
            }
            Stmt::Store(p, v) => {
                let (p, v) = (ev!(&p), ev!(&v));
                return do_call(fr, None, "Mem.store".into(), vec![p, v]);
            }
            Stmt::Cmp(x, a, b) => {
                let (a, b) = (ev!(&a), ev!(&b));
                return do_call(fr, Some(x), "Mem.cmp".into(), vec![a, b]);
            }
            Stmt::CallSys(x, f, args) => {
                let arg = if f == "print" {
                    let [e] = args.as_slice() else { return ub() };
                    match eval(e, &fr.locals, g) {
                        Some(Rv::T(s)) => AnyValue::Str(s),
                        Some(Rv::V(v)) => val_to_any(&v),
                        None => return ub(),
                    }
                } else {
                    AnyValue::List(evs!(&args).iter().map(val_to_any).collect())
                };
                let printing = f == "print";
                return obs(f, arg).bind(move |ans| {
                    let v = match any_to_val(&ans) {
                        Some(v) => v,
                        None if printing => Val::I64(0),
                        None => return ub(),
                    };
                    let mut fr = fr.clone();
                    if let Some(x) = &x {
                        fr.assign(x, v);
                    }
                    drive(fr)
                });
            }
        }
    }
}

fn init_globals(m: &ImpModule) -> AnyValue {
    let empty = Vars::new();
    let mut g = Vars::new();
    for (x, init) in &m.vars {
        let v = match init {
            None => Some(Val::I64(0)),
            Some(e) => match eval(e, &empty, &g) {
                Some(Rv::V(v)) => Some(v),
                _ => None,
            },
        };
        // A failing initializer leaves the variable out; entering any function is then UB.
        if let Some(v) = v {
            g.insert(x.clone(), v);
        }
    }
    let order: Vec<String> = m.vars.iter().map(|(x, _)| x.clone()).collect();
    encode_globals(&g, &order)
}

/// Embeds `m`; functions take a list of values, anything else is UB.
pub fn embed(m: &ImpModule) -> Module {
    let shared = Arc::new(Shared { globals: m.vars.iter().map(|(x, _)| x.clone()).collect() });
    let mut out = Module::new(m.name.clone(), init_globals(m));
    for f in &m.funs {
        let (shared, f2) = (shared.clone(), Arc::new(f.clone()));
        out = out.with_fun(m.qualified(&f.name), move |arg| {
            let Some(args) = arg.as_list().and_then(|xs| xs.iter().map(any_to_val).collect::<Option<Vec<_>>>()) else {
                return ub();
            };
            if args.len() != f2.params.len() {
                return ub();
            }
            let mut locals: Vars = f2.locals.iter().map(|x| (x.clone(), Val::I64(0))).collect();
            locals.extend(f2.params.iter().cloned().zip(args));
            drive(Frame { shared: shared.clone(), locals, globals: None, dirty: false, kont: vec![f2.body.clone()] })
        });
    }
    out
}
