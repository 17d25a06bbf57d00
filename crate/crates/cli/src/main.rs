//! `ccr`: run modules, dump bounded behaviors, check refinement, replay ACT and diff-test.

mod input;

use std::io::Write;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use ccr_core::behavior::{bounded_beh, refine_closed, Verdict};
use ccr_core::ems::{run, ModuleSet, ObsEnv, Resolver, RunOutcome, SeededResolver};
use ccr_core::harness::{act_json, diff_test, suite, suite_checks, DiffBounds, Suite, SUITE_NAMES};
use ccr_core::imp::{ast_json, embed, mem_module, parse, print_module};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(name = "ccr", version, about = "Executable modules, resource specs and bounded refinement checks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args, Clone)]
struct Opts {
    /// Step bound; defaults to the suite's or 1000.
    #[arg(long, global = true)]
    fuel: Option<u64>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = ResolverKind::Seeded)]
    resolver: ResolverKind,
    /// `name=v1,v2 ...` items, inline or in a file; `choice=` answers choose/take.
    #[arg(long, global = true)]
    script: Option<String>,
    /// JSON object mapping observable names to answer lists.
    #[arg(long, global = true)]
    env: Option<String>,
    #[arg(long, global = true)]
    suite: Option<String>,
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum ResolverKind {
    Interactive,
    Seeded,
    Scripted,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq, Default)]
enum Side {
    #[default]
    Impl,
    Abs,
}

#[derive(Subcommand)]
enum Cmd {
    /// Execute once, resolving choices with the selected resolver.
    Run {
        files: Vec<String>,
        #[arg(long, value_enum, default_value_t)]
        side: Side,
    },
    /// Print the bounded behavior set.
    Beh {
        files: Vec<String>,
        #[arg(long, value_enum, default_value_t)]
        side: Side,
    },
    /// Check that the implementation's behaviors are included in the abstraction's.
    Refine {
        #[arg(long = "impl", num_args = 1..)]
        impl_files: Vec<String>,
        #[arg(long = "abs", num_args = 1..)]
        abs_files: Vec<String>,
    },
    /// Replay assumption cancellation on the suite's wrapped modules.
    ActCheck,
    /// Paired seeded runs of implementation and abstraction.
    Difftest {
        #[arg(long, default_value_t = 100)]
        pairs: usize,
    },
    /// Parse an IMP file and print it canonically.
    Parse {
        file: String,
        #[arg(long)]
        dump_ast: bool,
    },
    /// List suites, or run their checks with `--check`.
    Suites {
        #[arg(long)]
        check: bool,
    },
}

/// Exit 1: a property was refuted.
struct Refuted;

fn load_files(files: &[String]) -> Result<ModuleSet> {
    let mut mods = Vec::new();
    for f in files {
        let src = std::fs::read_to_string(f).with_context(|| format!("reading {f}"))?;
        let m = parse(&src).map_err(|e| anyhow!("{f}:{e}"))?;
        mods.push(embed(&m));
    }
    if !mods.iter().any(|m| m.name == "Mem") {
        mods.push(mem_module());
    }
    Ok(ModuleSet::new(mods))
}

fn get_suite(opts: &Opts) -> Result<Suite> {
    let name = opts.suite.as_deref().ok_or_else(|| anyhow!("--suite is required"))?;
    suite(name).ok_or_else(|| anyhow!("unknown suite {name}; known: {}", SUITE_NAMES.join(", ")))
}

/// Modules from files, or one side of the selected suite, with its env and fuel.
fn target(opts: &Opts, files: &[String], side: Side) -> Result<(ModuleSet, ObsEnv, u64)> {
    let (mods, env, fuel) = if files.is_empty() {
        let s = get_suite(opts)?;
        let m = if side == Side::Impl { s.implementation } else { s.abstraction };
        (m, s.env, s.fuel)
    } else {
        (load_files(files)?, ObsEnv::new(), 1000)
    };
    let env = match &opts.env {
        Some(path) => input::parse_env(&std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?)?,
        None => env,
    };
    Ok((mods, env, opts.fuel.unwrap_or(fuel)))
}

fn end_text(o: &RunOutcome) -> String {
    match &o.end {
        ccr_core::ems::RunEnd::Term(v) => format!("term {v}"),
        ccr_core::ems::RunEnd::Error(e) => format!("error: {e}"),
        ccr_core::ems::RunEnd::Partial(e) => format!("partial ({e})"),
    }
}

fn cmd_run(opts: &Opts, files: &[String], side: Side, out: &mut dyn Write) -> Result<()> {
    let (mods, env, fuel) = target(opts, files, side)?;
    let mut echo = Vec::new();
    let outcome = match opts.resolver {
        ResolverKind::Seeded => run(&mods, &mut SeededResolver::new(opts.seed, env), fuel)?,
        ResolverKind::Scripted => {
            let spec = opts.script.as_deref().ok_or_else(|| anyhow!("--resolver scripted needs --script"))?;
            run(&mods, &mut input::parse_script(spec, env)?, fuel)?
        }
        ResolverKind::Interactive => {
            let stdin = std::io::stdin();
            let mut r = input::Interactive::new(stdin.lock(), std::io::stderr(), env);
            let o = run(&mods, &mut r as &mut dyn Resolver, fuel)?;
            echo = r.echo;
            o
        }
    };
    if opts.json {
        for e in &echo {
            writeln!(out, "{}", json!({"resolved": e}))?;
        }
        write!(out, "{}", outcome.to_json_lines())?;
    } else {
        for e in &echo {
            writeln!(out, "# {e}")?;
        }
        for r in &outcome.log {
            match (&r.arg, r.name.as_str()) {
                (ccr_core::AnyValue::Str(s), "print") => writeln!(out, "print {s}")?,
                _ if r.ret == ccr_core::AnyValue::Unit => writeln!(out, "{} {}", r.name, r.arg)?,
                _ => writeln!(out, "{} {} => {}", r.name, r.arg, r.ret)?,
            }
        }
        writeln!(out, "{}", end_text(&outcome))?;
    }
    Ok(())
}

fn cmd_beh(opts: &Opts, files: &[String], side: Side, out: &mut dyn Write) -> Result<()> {
    let (mods, env, fuel) = target(opts, files, side)?;
    let beh = bounded_beh(&mods, fuel, &env)?;
    if opts.json {
        write!(out, "{}", beh.to_json_lines())?;
    } else {
        for t in beh.iter() {
            writeln!(out, "{t}")?;
        }
        writeln!(out, "{} traces at fuel {fuel}", beh.len())?;
    }
    Ok(())
}

fn verdict_out(v: &Verdict, opts: &Opts, out: &mut dyn Write) -> Result<bool> {
    if opts.json {
        let j = match v {
            Verdict::Holds => json!({"verdict": "holds"}),
            Verdict::Refuted(t) => json!({"verdict": "refuted", "witness": t.to_json()}),
        };
        writeln!(out, "{j}")?;
    } else {
        match v {
            Verdict::Holds => writeln!(out, "holds")?,
            Verdict::Refuted(t) => writeln!(out, "refuted: {t}")?,
        }
    }
    Ok(v.holds())
}

fn cmd_refine(opts: &Opts, impl_files: &[String], abs_files: &[String], out: &mut dyn Write) -> Result<bool> {
    let (lhs, rhs, env, fuel) = if impl_files.is_empty() && abs_files.is_empty() {
        let s = get_suite(opts)?;
        (s.implementation, s.abstraction, s.env, s.fuel)
    } else if impl_files.is_empty() || abs_files.is_empty() {
        bail!("--impl and --abs go together");
    } else {
        (load_files(impl_files)?, load_files(abs_files)?, ObsEnv::new(), 1000)
    };
    let env = match &opts.env {
        Some(p) => input::parse_env(&std::fs::read_to_string(p)?)?,
        None => env,
    };
    let v = refine_closed(&lhs, &rhs, opts.fuel.unwrap_or(fuel), &env)?;
    verdict_out(&v, opts, out)
}

fn cmd_act(opts: &Opts, out: &mut dyn Write) -> Result<bool> {
    let s = get_suite(opts)?;
    let mut setup = s.act.ok_or_else(|| anyhow!("suite {} has no ACT setup", s.name))?;
    if let Some(f) = opts.fuel {
        setup.fuel = f;
    }
    let r = setup.run()?;
    let ok = r.clean() && r.inclusion.holds();
    if opts.json {
        writeln!(out, "{}", act_json(&r))?;
    } else {
        writeln!(out, "discharged assumptions: {}", r.discharged_asm_count)?;
        for g in &r.guarantee_failures {
            writeln!(out, "guarantee failed: {} at {} after {} call(s)", g.fn_name, g.site, g.calls_before)?;
        }
        for a in &r.asm_failures {
            writeln!(out, "assumption failed: {a}")?;
        }
        for c in &r.conservation_violations {
            writeln!(out, "not conserved: {c}")?;
        }
        match &r.inclusion {
            Verdict::Holds => writeln!(out, "inclusion in erased system: holds")?,
            Verdict::Refuted(t) => writeln!(out, "inclusion in erased system: refuted by {t}")?,
        }
        writeln!(out, "{}", if ok { "clean" } else { "not clean" })?;
    }
    Ok(ok)
}

fn cmd_diff(opts: &Opts, pairs: usize, out: &mut dyn Write) -> Result<bool> {
    let s = get_suite(opts)?;
    let bounds = DiffBounds::new(opts.fuel.unwrap_or(s.fuel));
    let r = diff_test(&s.implementation, &s.abstraction, &s.env, &bounds, pairs, opts.seed)?;
    if opts.json {
        writeln!(out, "{}", serde_json::to_string(&r)?)?;
    } else {
        writeln!(out, "{} pairs: {} matched, {} implementation UB", r.pairs, r.matched, r.impl_ub)?;
        for d in &r.divergences {
            writeln!(out, "seed {}: after [{}] implementation did {:?}, abstraction could do {:?}", d.seed, d.prefix.join("; "), d.implementation, d.abstraction)?;
        }
        for g in &r.oracle_gaps {
            writeln!(out, "seed {}: oracle gap: {}", g.seed, g.reason)?;
        }
    }
    Ok(r.clean())
}

fn cmd_parse(opts: &Opts, file: &str, dump_ast: bool, out: &mut dyn Write) -> Result<()> {
    let src = std::fs::read_to_string(file).with_context(|| format!("reading {file}"))?;
    let m = parse(&src).map_err(|e| anyhow!("{file}:{e}"))?;
    if dump_ast || opts.json {
        writeln!(out, "{}", if opts.json { serde_json::to_string(&m)? } else { ast_json(&m) })?;
    } else {
        write!(out, "{}", print_module(&m))?;
    }
    Ok(())
}

fn cmd_suites(opts: &Opts, check: bool, out: &mut dyn Write) -> Result<bool> {
    let names: Vec<&str> = match &opts.suite {
        Some(n) => vec![n.as_str()],
        None => SUITE_NAMES.to_vec(),
    };
    let mut ok = true;
    for n in names {
        let s = suite(n).ok_or_else(|| anyhow!("unknown suite {n}"))?;
        if !check {
            if opts.json {
                writeln!(out, "{}", s.manifest())?;
            } else {
                writeln!(out, "{:12} {}", s.name, s.description)?;
            }
            continue;
        }
        let r = suite_checks(&s);
        ok &= r.passed();
        if opts.json {
            writeln!(out, "{}", serde_json::to_string(&r)?)?;
        } else {
            writeln!(out, "{}:", s.name)?;
            write!(out, "{}", r.summary())?;
        }
    }
    Ok(ok)
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<Result<(), Refuted>> {
    let o = &cli.opts;
    let passed = match &cli.cmd {
        Cmd::Run { files, side } => cmd_run(o, files, *side, out).map(|_| true)?,
        Cmd::Beh { files, side } => cmd_beh(o, files, *side, out).map(|_| true)?,
        Cmd::Refine { impl_files, abs_files } => cmd_refine(o, impl_files, abs_files, out)?,
        Cmd::ActCheck => cmd_act(o, out)?,
        Cmd::Difftest { pairs } => cmd_diff(o, *pairs, out)?,
        Cmd::Parse { file, dump_ast } => cmd_parse(o, file, *dump_ast, out).map(|_| true)?,
        Cmd::Suites { check } => cmd_suites(o, *check, out)?,
    };
    Ok(if passed { Ok(()) } else { Err(Refuted) })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match dispatch(&cli, &mut out) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Refuted)) => ExitCode::from(1),
        Err(e) => {
            eprintln!("ccr: {e:#}");
            ExitCode::from(2)
        }
    }
}
