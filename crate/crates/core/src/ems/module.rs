//! Modules, module sets and linking.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use super::{AnyValue, Computation};

#[derive(Clone)]
pub struct FunctionDef(pub Arc<dyn Fn(AnyValue) -> Computation + Send + Sync>);

impl FunctionDef {
    pub fn new(f: impl Fn(AnyValue) -> Computation + Send + Sync + 'static) -> FunctionDef {
        FunctionDef(Arc::new(f))
    }

    pub fn apply(&self, arg: AnyValue) -> Computation {
        (self.0)(arg)
    }
}

impl fmt::Debug for FunctionDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FunctionDef(..)")
    }
}

#[derive(Clone, Debug)]
pub struct Module {
    pub name: String,
    pub init: AnyValue,
    pub funs: BTreeMap<String, FunctionDef>,
}

impl Module {
    pub fn new(name: impl Into<String>, init: AnyValue) -> Module {
        Module { name: name.into(), init, funs: BTreeMap::new() }
    }

    pub fn with_fun(
        mut self,
        name: impl Into<String>,
        f: impl Fn(AnyValue) -> Computation + Send + Sync + 'static,
    ) -> Module {
        self.funs.insert(name.into(), FunctionDef::new(f));
        self
    }

    pub fn fun_names(&self) -> impl Iterator<Item = &String> {
        self.funs.keys()
    }
}

#[derive(Clone, Debug, Default)]
pub struct ModuleSet {
    pub mods: Vec<Module>,
    pub load_data: BTreeSet<String>,
}

impl ModuleSet {
    pub fn new(mods: Vec<Module>) -> ModuleSet {
        let load_data = mods.iter().map(|m| m.name.clone()).collect();
        ModuleSet { mods, load_data }
    }

    pub fn names(&self) -> Vec<&str> {
        self.mods.iter().map(|m| m.name.as_str()).collect()
    }

    /// Modules with the given names removed.
    pub fn without(&self, names: &[&str]) -> ModuleSet {
        ModuleSet::new(
            self.mods.iter().filter(|m| !names.contains(&m.name.as_str())).cloned().collect(),
        )
    }
}

impl From<Vec<Module>> for ModuleSet {
    fn from(mods: Vec<Module>) -> Self {
        ModuleSet::new(mods)
    }
}

pub fn link(a: &ModuleSet, b: &ModuleSet) -> ModuleSet {
    let mut mods = a.mods.clone();
    mods.extend(b.mods.iter().cloned());
    let load_data = a.load_data.union(&b.load_data).cloned().collect();
    ModuleSet { mods, load_data }
}
