//! Slots of the global resource product and constructors for the shipped resources.

use super::{add, Resource};
use crate::ems::{AnyValue, PtrVal};

pub const CANNON: &str = "cannon";
pub const ONCE: &str = "once";
pub const APP: &str = "app";
pub const MW: &str = "mw";
pub const MW_CAP: &str = "mwcap";
pub const MEM: &str = "mem";
pub const MAP: &str = "map";

pub fn cannon(elem: &str) -> Resource {
    Resource::inject(CANNON, Resource::fin("Cannon", elem))
}

pub fn once_do() -> Resource {
    Resource::inject(ONCE, Resource::fin("Once", "Do"))
}

pub fn app(elem: &str) -> Resource {
    Resource::inject(APP, Resource::fin("App", elem))
}

/// A partial function `int → int?` as a sorted association list.
pub fn table_empty() -> AnyValue {
    AnyValue::List(Vec::new())
}

pub fn table_insert(f: &AnyValue, k: i64, v: i64) -> AnyValue {
    let mut entries: Vec<(i64, i64)> = table_entries(f).into_iter().filter(|(k2, _)| *k2 != k).collect();
    entries.push((k, v));
    entries.sort();
    AnyValue::List(
        entries
            .into_iter()
            .map(|(k, v)| AnyValue::pair(AnyValue::Int(k), AnyValue::Int(v)))
            .collect(),
    )
}

pub fn table_get(f: &AnyValue, k: i64) -> Option<i64> {
    table_entries(f).into_iter().find(|(k2, _)| *k2 == k).map(|(_, v)| v)
}

pub fn table_entries(f: &AnyValue) -> Vec<(i64, i64)> {
    f.as_list()
        .unwrap_or(&[])
        .iter()
        .filter_map(|e| {
            let (k, v) = e.as_pair()?;
            Some((k.as_int()?, v.as_int()?))
        })
        .collect()
}

/// Knowledge that MW holds `f`, plus the capability to call MW.
pub fn mw_has(f: &AnyValue) -> Resource {
    add(
        &Resource::inject(MW, Resource::auth_frag(Resource::ex(f.clone()))),
        &Resource::inject(MW_CAP, Resource::ex(AnyValue::Int(1))),
    )
    .expect("distinct slots")
}

/// MW's authoritative copy of its contents.
pub fn mw_auth(f: &AnyValue) -> Resource {
    Resource::inject(MW, Resource::auth_full(Resource::ex(f.clone())))
}

fn cell(p: &PtrVal, i: i64) -> Option<AnyValue> {
    match p {
        PtrVal::Heap { block, ofs } => Some(AnyValue::Ptr(PtrVal::Heap { block: *block, ofs: ofs + i })),
        _ => None,
    }
}

/// `p ↦ [v₀, …]` as a fragment of the heap; `None` for non-heap pointers.
pub fn points_to(p: &AnyValue, vals: &[AnyValue]) -> Option<Resource> {
    let AnyValue::Ptr(p) = p else { return None };
    let mut entries = Vec::new();
    for (i, v) in vals.iter().enumerate() {
        entries.push((cell(p, i as i64)?, Resource::ex(v.clone())));
    }
    Some(Resource::inject(MEM, Resource::auth_frag(Resource::pointwise(entries))))
}

/// The memory module's initial authoritative heap (empty).
pub fn mem_auth_empty() -> Resource {
    Resource::inject(MEM, Resource::AuthFull(Box::new(Resource::Unit)))
}

/// `h ↦_Map f`.
pub fn map_has(h: &AnyValue, f: &AnyValue) -> Resource {
    Resource::inject(MAP, Resource::pointwise([(h.clone(), Resource::ex(f.clone()))]))
}
