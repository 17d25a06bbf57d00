//! Script and env parsing, and the terminal resolver.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use anyhow::{bail, Context, Result};
use ccr_core::ems::{AnyValue, ChoiceDomain, ObsEnv, Resolver, RunError, ScriptedResolver, SystemState};
use serde_json::Value as Json;

/// Plain JSON maps onto values: numbers, booleans, strings, arrays, `null` as unit.
/// Objects are read as serialized `AnyValue`s.
pub fn json_value(j: &Json) -> Result<AnyValue> {
    Ok(match j {
        Json::Null => AnyValue::Unit,
        Json::Bool(b) => AnyValue::Bool(*b),
        Json::Number(n) => AnyValue::Int(n.as_i64().with_context(|| format!("{n} is not a 64-bit integer"))?),
        Json::String(s) => AnyValue::Str(s.clone()),
        Json::Array(xs) => AnyValue::List(xs.iter().map(json_value).collect::<Result<_>>()?),
        Json::Object(_) => serde_json::from_value(j.clone()).context("not a value")?,
    })
}

/// A bare word that is not JSON is taken as a string.
pub fn parse_value(s: &str) -> Result<AnyValue> {
    match serde_json::from_str::<Json>(s.trim()) {
        Ok(j) => json_value(&j),
        Err(_) => Ok(AnyValue::str(s.trim())),
    }
}

/// `{"getint": [0, 1], "print": [null]}`.
pub fn parse_env(text: &str) -> Result<ObsEnv> {
    let j: BTreeMap<String, Json> = serde_json::from_str(text).context("env must be a JSON object of answer lists")?;
    let mut env = ObsEnv::new();
    for (name, answers) in j {
        let Json::Array(xs) = answers else { bail!("answers for {name} must be a list") };
        env = env.with(&name, xs.iter().map(json_value).collect::<Result<_>>()?);
    }
    Ok(env)
}

/// Whitespace-separated `name=v1,v2` items; `choice=` feeds choose/take, any
/// other name feeds that observable. Accepts a file path or the items inline.
pub fn parse_script(spec: &str, env: ObsEnv) -> Result<ScriptedResolver> {
    let text = match std::fs::read_to_string(spec) {
        Ok(t) => t,
        Err(_) => spec.to_string(),
    };
    let mut r = ScriptedResolver::new(vec![]);
    r.env = env;
    for item in text.split_whitespace() {
        let Some((name, vals)) = item.split_once('=') else { bail!("script item {item:?} is not name=values") };
        let vals = vals.split(',').filter(|v| !v.is_empty()).map(parse_value).collect::<Result<Vec<_>>>()?;
        if name == "choice" {
            r.choices.extend(vals);
        } else {
            r = r.with_obs(name, vals);
        }
    }
    Ok(r)
}

/// Asks on the terminal for every choice and every observable other than `print`.
pub struct Interactive<R, W> {
    input: R,
    out: W,
    env: ObsEnv,
    /// Every answer given, in order.
    pub echo: Vec<String>,
}

impl<R: BufRead, W: Write> Interactive<R, W> {
    pub fn new(input: R, out: W, env: ObsEnv) -> Self {
        Interactive { input, out, env, echo: Vec::new() }
    }

    fn ask(&mut self, prompt: &str, accept: impl Fn(&AnyValue) -> bool) -> Result<AnyValue, RunError> {
        loop {
            write!(self.out, "{prompt} ").and_then(|_| self.out.flush()).map_err(|e| RunError::BadAnswer(e.to_string()))?;
            let mut line = String::new();
            let n = self.input.read_line(&mut line).map_err(|e| RunError::BadAnswer(e.to_string()))?;
            if n == 0 {
                return Err(RunError::ResolverExhausted("end of input".into()));
            }
            match parse_value(&line) {
                Ok(v) if accept(&v) => return Ok(v),
                _ => {
                    let _ = writeln!(self.out, "not allowed: {}", line.trim());
                }
            }
        }
    }
}

impl<R: BufRead, W: Write> Resolver for Interactive<R, W> {
    fn choice(&mut self, dom: &ChoiceDomain, angelic: bool, _: &SystemState) -> Result<AnyValue, RunError> {
        let verb = if angelic { "take" } else { "choose" };
        let d = dom.clone();
        let v = self.ask(&format!("{verb} from {dom}:"), move |v| d.is_unbounded() || d.contains(v))?;
        self.echo.push(format!("{verb} {v}"));
        Ok(v)
    }

    fn obs(&mut self, name: &str, arg: &AnyValue) -> Result<AnyValue, RunError> {
        let table = self.env.answers(name);
        if name == "print" && table == [AnyValue::Unit] {
            return Ok(AnyValue::Unit);
        }
        let v = self.ask(&format!("{name} {arg}:"), |_| true)?;
        self.echo.push(format!("{name} {v}"));
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn script_items() {
        let mut r = parse_script("getint=3,4 choice=1", ObsEnv::new()).unwrap();
        assert_eq!(r.obs("getint", &AnyValue::nil()).unwrap(), AnyValue::Int(3));
        assert_eq!(r.obs("getint", &AnyValue::nil()).unwrap(), AnyValue::Int(4));
        assert_eq!(r.choices, [AnyValue::Int(1)]);
        assert!(parse_script("getint", ObsEnv::new()).is_err());
    }

    #[test]
    fn env_file() {
        let env = parse_env(r#"{"getint": [0, 5, 100], "beep": ["x", null]}"#).unwrap();
        assert_eq!(env.answers("getint"), [AnyValue::Int(0), AnyValue::Int(5), AnyValue::Int(100)]);
        assert_eq!(env.answers("beep"), [AnyValue::str("x"), AnyValue::Unit]);
        assert!(parse_env("[1]").is_err());
    }

    #[test]
    fn prompts() {
        let input = b"7\n2\n" as &[u8];
        let mut out = Vec::new();
        let mut r = Interactive::new(input, &mut out, ObsEnv::new());
        let dom = ChoiceDomain::IntRange(1, 3);
        let m = ccr_core::ems::load(&ccr_core::ModuleSet::new(vec![ccr_core::Module::new("M", AnyValue::Unit).with_fun("main", |_| ccr_core::ems::ret(AnyValue::Unit))])).unwrap();
        assert_eq!(r.choice(&dom, false, &m).unwrap(), AnyValue::Int(2));
        assert_eq!(r.echo, ["choose 2"]);
        let shown = String::from_utf8(out).unwrap();
        assert!(shown.starts_with("choose from "), "{shown}");
        assert!(shown.contains("not allowed: 7"));
    }
}
