//! Block/offset memory as an ordinary module whose state is the heap.

use std::collections::BTreeMap;

use super::ast::Val;
use super::{any_to_val, val_to_any};
use crate::ems::{assume, get, put, ret, AnyValue, Computation, Module, PtrVal};

/// `None` cells are uninitialized; `None` blocks are freed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Heap {
    pub next: u64,
    pub blocks: BTreeMap<u64, Option<Vec<Option<Val>>>>,
}

impl Heap {
    pub fn to_any(&self) -> AnyValue {
        let blocks = self
            .blocks
            .iter()
            .map(|(id, b)| {
                let cells = match b {
                    None => AnyValue::Unit,
                    Some(cs) => AnyValue::List(cs.iter().map(|c| c.as_ref().map(val_to_any).unwrap_or(AnyValue::Unit)).collect()),
                };
                AnyValue::pair(AnyValue::Int(*id as i64), cells)
            })
            .collect();
        AnyValue::pair(AnyValue::Int(self.next as i64), AnyValue::List(blocks))
    }

    pub fn from_any(a: &AnyValue) -> Option<Heap> {
        let (next, blocks) = a.as_pair()?;
        let mut out = Heap { next: u64::try_from(next.as_int()?).ok()?, blocks: BTreeMap::new() };
        for b in blocks.as_list()? {
            let (id, cells) = b.as_pair()?;
            let cells = match cells {
                AnyValue::Unit => None,
                AnyValue::List(cs) => {
                    Some(cs.iter().map(|c| if *c == AnyValue::Unit { Some(None) } else { any_to_val(c).map(Some) }).collect::<Option<Vec<_>>>()?)
                }
                _ => return None,
            };
            out.blocks.insert(u64::try_from(id.as_int()?).ok()?, cells);
        }
        Some(out)
    }

    pub fn alloc(&mut self, n: i64) -> Option<Val> {
        let n = usize::try_from(n).ok()?;
        self.next += 1;
        self.blocks.insert(self.next, Some(vec![None; n]));
        Some(Val::Ptr(PtrVal::Heap { block: self.next, ofs: 0 }))
    }

    fn live(&self, b: u64) -> Option<&Vec<Option<Val>>> {
        self.blocks.get(&b)?.as_ref()
    }

    fn cell(&self, p: &Val) -> Option<(u64, usize)> {
        let Val::Ptr(PtrVal::Heap { block, ofs }) = p else { return None };
        let i = usize::try_from(*ofs).ok()?;
        (i < self.live(*block)?.len()).then_some((*block, i))
    }

    pub fn free(&mut self, p: &Val) -> Option<()> {
        let Val::Ptr(PtrVal::Heap { block, ofs: 0 }) = p else { return None };
        self.live(*block)?;
        self.blocks.insert(*block, None);
        Some(())
    }

    pub fn load(&self, p: &Val) -> Option<Val> {
        let (b, i) = self.cell(p)?;
        self.live(b)?[i].clone()
    }

    pub fn store(&mut self, p: &Val, v: Val) -> Option<()> {
        let (b, i) = self.cell(p)?;
        self.blocks.get_mut(&b)?.as_mut()?[i] = Some(v);
        Some(())
    }

    /// Heap pointers may also point one past the end.
    fn weakly_valid(&self, p: &PtrVal) -> bool {
        match p {
            PtrVal::Heap { block, ofs } => self.live(*block).is_some_and(|cs| *ofs >= 0 && (*ofs as usize) <= cs.len()),
            _ => true,
        }
    }

    /// `Some(true/false)` for a defined comparison, `None` for UB.
    pub fn cmp(&self, a: &Val, b: &Val) -> Option<bool> {
        match (a, b) {
            (Val::I64(x), Val::I64(y)) => Some(x == y),
            (Val::Ptr(p), Val::Ptr(q)) => (self.weakly_valid(p) && self.weakly_valid(q)).then(|| p == q),
            _ => None,
        }
    }
}

fn ub() -> Computation {
    assume(false)
}

fn with_heap(f: impl Fn(&mut Heap, &[Val]) -> Option<(Option<Val>, bool)> + Send + Sync + 'static) -> impl Fn(AnyValue) -> Computation + Send + Sync + 'static {
    let f = std::sync::Arc::new(f);
    move |arg| {
        let Some(args) = arg.as_list().and_then(|xs| xs.iter().map(any_to_val).collect::<Option<Vec<_>>>()) else {
            return ub();
        };
        let f = f.clone();
        get().bind(move |st| {
            let Some(mut heap) = Heap::from_any(&st) else { return ub() };
            match f(&mut heap, &args) {
                None => ub(),
                Some((v, changed)) => {
                    let r = v.as_ref().map(val_to_any).unwrap_or(AnyValue::Int(0));
                    if changed { put(heap.to_any()).then(ret(r)) } else { ret(r) }
                }
            }
        })
    }
}

/// The `Mem` module: `alloc`, `free`, `load`, `store`, `cmp`; misuse is UB.
pub fn mem_module() -> Module {
    Module::new("Mem", Heap::default().to_any())
        .with_fun("Mem.alloc", with_heap(|h, a| match a {
            [Val::I64(n)] => Some((Some(h.alloc(*n)?), true)),
            _ => None,
        }))
        .with_fun("Mem.free", with_heap(|h, a| match a {
            [p] => h.free(p).map(|_| (None, true)),
            _ => None,
        }))
        .with_fun("Mem.load", with_heap(|h, a| match a {
            [p] => Some((Some(h.load(p)?), false)),
            _ => None,
        }))
        .with_fun("Mem.store", with_heap(|h, a| match a {
            [p, v] => h.store(p, v.clone()).map(|_| (None, true)),
            _ => None,
        }))
        .with_fun("Mem.cmp", with_heap(|h, a| match a {
            [x, y] => Some((Some(Val::I64(h.cmp(x, y)? as i64)), false)),
            _ => None,
        }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(block: u64, ofs: i64) -> Val {
        Val::Ptr(PtrVal::Heap { block, ofs })
    }

    #[test]
    fn heap_rules() {
        let mut h = Heap::default();
        let a = h.alloc(1).unwrap();
        assert_eq!(a, p(1, 0));
        assert_eq!(h.load(&a), None, "uninitialized");
        h.store(&a, Val::I64(7)).unwrap();
        assert_eq!(h.load(&a), Some(Val::I64(7)));
        assert_eq!(h.store(&p(1, 1), Val::I64(0)), None, "out of bounds");
        let b = h.alloc(2).unwrap();
        assert_eq!(b, p(2, 0));
        assert_eq!(h.cmp(&a, &a), Some(true));
        assert_eq!(h.cmp(&Val::Ptr(PtrVal::Null), &a), Some(false));
        assert_eq!(h.cmp(&a, &b), Some(false));
        assert_eq!(h.cmp(&p(2, 2), &b), Some(false), "one past the end is comparable");
        assert_eq!(h.cmp(&Val::I64(0), &a), None);
        h.free(&a).unwrap();
        assert_eq!(h.load(&a), None);
        assert_eq!(h.cmp(&a, &a), None, "dangling");
        assert_eq!(h.free(&a), None, "double free");
        assert_eq!(Heap::from_any(&h.to_any()), Some(h.clone()));
        assert_eq!(h.alloc(1).unwrap(), p(3, 0), "ids are never reused");
    }
}
