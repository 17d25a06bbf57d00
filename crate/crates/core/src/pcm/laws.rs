//! Executable PCM laws, checked exhaustively on finite carriers and by sampling elsewhere.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::finite::{finite_pcm, finite_pcm_names};
use super::fpu::{is_fpu, is_fpu_exhaustive};
use super::registry::{sample_component, ComponentKind};
use super::{add, includes, valid, Resource};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LawReport {
    pub checked: usize,
    pub failures: Vec<String>,
}

impl LawReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    fn expect(&mut self, cond: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !cond && self.failures.len() < 20 {
            self.failures.push(what());
        }
    }

    fn merge(&mut self, other: LawReport) {
        self.checked += other.checked;
        self.failures.extend(other.failures);
    }
}

fn sum(a: &Resource, b: &Resource) -> Resource {
    add(a, b).unwrap_or_else(|e| panic!("{e}"))
}

/// Commutativity, associativity, unit and validity laws for one triple.
fn check_triple(rep: &mut LawReport, a: &Resource, b: &Resource, c: &Resource) {
    let ab = sum(a, b);
    rep.expect(ab == sum(b, a), || format!("comm: {a} + {b}"));
    rep.expect(sum(&ab, c) == sum(a, &sum(b, c)), || format!("assoc: {a} + {b} + {c}"));
    rep.expect(sum(a, &Resource::Unit) == *a, || format!("unit: {a}"));
    rep.expect(!valid(&ab) || valid(a), || format!("valid-mono: {a} + {b}"));
}

pub fn check_finite(name: &str) -> LawReport {
    let mut rep = LawReport::default();
    let c = finite_pcm(name).expect("registered finite pcm").carrier();
    rep.expect(valid(&Resource::Unit), || "valid(ε)".into());
    for a in &c {
        for b in &c {
            for x in &c {
                check_triple(&mut rep, a, b, x);
            }
        }
    }
    rep
}

pub fn check_all_finite() -> LawReport {
    let mut rep = LawReport::default();
    for n in finite_pcm_names() {
        rep.merge(check_finite(n));
    }
    rep
}

pub fn check_sampled(kind: &ComponentKind, samples: usize, seed: u64) -> LawReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = LawReport::default();
    rep.expect(valid(&Resource::Unit), || "valid(ε)".into());
    for _ in 0..samples {
        let a = sample_component(kind, &mut rng);
        let b = sample_component(kind, &mut rng);
        let c = sample_component(kind, &mut rng);
        check_triple(&mut rep, &a, &b, &c);
    }
    rep
}

/// The product Σ: samples whole registry elements.
pub fn check_sampled_product(reg: &super::SigmaRegistry, samples: usize, seed: u64) -> LawReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = LawReport::default();
    for _ in 0..samples {
        let (a, b, c) = (reg.sample(&mut rng), reg.sample(&mut rng), reg.sample(&mut rng));
        check_triple(&mut rep, &a, &b, &c);
    }
    rep
}

/// `valid(●x + ◯y) ⟹ x ≥ y`.
pub fn check_auth_inclusion(inner: &ComponentKind, samples: usize, seed: u64) -> LawReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = LawReport::default();
    for _ in 0..samples {
        let x = sample_component(inner, &mut rng);
        let y = if rand::Rng::gen_bool(&mut rng, 0.3) { x.clone() } else { sample_component(inner, &mut rng) };
        let s = sum(&Resource::auth_full(x.clone()), &Resource::auth_frag(y.clone()));
        rep.expect(!valid(&s) || includes(&x, &y), || format!("auth: ●{x} + ◯{y}"));
    }
    rep
}

/// FPU composes on every finite carrier, and `is_fpu` agrees with brute force there.
pub fn check_fpu_composition() -> LawReport {
    let mut rep = LawReport::default();
    for n in finite_pcm_names() {
        let c = finite_pcm(n).unwrap().carrier();
        let u = Resource::Unit;
        let fpu = |a: &Resource, b: &Resource| is_fpu((a, &u), (b, &u)).unwrap();
        for s in &c {
            for t in &c {
                rep.expect(fpu(s, t) == is_fpu_exhaustive(s, t, &c), || format!("fpu-exact: {s} → {t}"));
                for x in &c {
                    rep.expect(!(fpu(s, t) && fpu(t, x)) || fpu(s, x), || format!("fpu-trans: {s} → {t} → {x}"));
                }
            }
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_tables_obey_laws() {
        let r = check_all_finite();
        assert!(r.ok(), "{:?}", r.failures);
        assert!(r.checked >= 4 * (125 + 27 + 125));
    }

    #[test]
    fn structured_laws_small_sample() {
        let ex = ComponentKind::Ex;
        let auth = ComponentKind::Auth { inner: Box::new(ComponentKind::Pointwise { inner: Box::new(ex.clone()) }) };
        for k in [&ex, &auth] {
            let r = check_sampled(k, 500, 3);
            assert!(r.ok(), "{:?}", r.failures);
        }
        assert!(check_auth_inclusion(&ex, 500, 4).ok());
        assert!(check_fpu_composition().ok());
    }
}
