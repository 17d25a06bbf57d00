//! Component PCMs composing the global resource product, and samplers for them.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::finite::finite_pcm;
use super::{sigma, PcmError, Resource};
use crate::ems::AnyValue;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ComponentKind {
    Finite { pcm: String },
    Ex,
    Auth { inner: Box<ComponentKind> },
    Pointwise { inner: Box<ComponentKind> },
}

/// Named slots of Σ for one example suite.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct SigmaRegistry {
    pub slots: BTreeMap<String, ComponentKind>,
}

impl SigmaRegistry {
    pub fn from_json(text: &str) -> Result<SigmaRegistry, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("registry serializes")
    }

    pub fn with(mut self, slot: &str, kind: ComponentKind) -> SigmaRegistry {
        self.slots.insert(slot.to_string(), kind);
        self
    }

    /// Rejects finite components naming an unknown table.
    pub fn check(&self) -> Result<(), PcmError> {
        fn go(k: &ComponentKind) -> Result<(), PcmError> {
            match k {
                ComponentKind::Finite { pcm } => {
                    finite_pcm(pcm).map(|_| ()).ok_or_else(|| PcmError::UnknownPcm(pcm.clone()))
                }
                ComponentKind::Ex => Ok(()),
                ComponentKind::Auth { inner } | ComponentKind::Pointwise { inner } => go(inner),
            }
        }
        self.slots.values().try_for_each(go)
    }

    /// The full Σ used by the shipped examples.
    pub fn standard() -> SigmaRegistry {
        let fin = |p: &str| ComponentKind::Finite { pcm: p.to_string() };
        SigmaRegistry::default()
            .with(sigma::CANNON, fin("Cannon"))
            .with(sigma::ONCE, fin("Once"))
            .with(sigma::APP, fin("App"))
            .with(sigma::MW, ComponentKind::Auth { inner: Box::new(ComponentKind::Ex) })
            .with(sigma::MW_CAP, ComponentKind::Ex)
            .with(
                sigma::MEM,
                ComponentKind::Auth {
                    inner: Box::new(ComponentKind::Pointwise { inner: Box::new(ComponentKind::Ex) }),
                },
            )
            .with(sigma::MAP, ComponentKind::Pointwise { inner: Box::new(ComponentKind::Ex) })
    }

    /// A random element of Σ (each slot independently, often unit).
    pub fn sample(&self, rng: &mut impl Rng) -> Resource {
        let mut m = BTreeMap::new();
        for (slot, k) in &self.slots {
            if rng.gen_bool(0.5) {
                m.insert(slot.clone(), sample_component(k, rng));
            }
        }
        Resource::Prod(m).norm()
    }
}

fn small_value(rng: &mut impl Rng) -> AnyValue {
    AnyValue::Int(rng.gen_range(0..3))
}

/// A random element of one component PCM, biased towards small, overlapping values.
pub fn sample_component(k: &ComponentKind, rng: &mut impl Rng) -> Resource {
    match k {
        ComponentKind::Finite { pcm } => {
            let c = finite_pcm(pcm).map(|p| p.carrier()).unwrap_or_else(|| vec![Resource::Unit]);
            // Undef is rare so the validity laws see mostly defined inputs.
            if rng.gen_ratio(1, 10) { Resource::Invalid } else { c[rng.gen_range(1..c.len())].clone() }
        }
        ComponentKind::Ex => match rng.gen_range(0..5) {
            0 => Resource::Unit,
            _ => Resource::ex(small_value(rng)),
        },
        ComponentKind::Auth { inner } => match rng.gen_range(0..4) {
            0 => Resource::Unit,
            1 => Resource::auth_full(sample_component(inner, rng)),
            2 => Resource::auth_frag(sample_component(inner, rng)),
            _ => {
                let full = sample_component(inner, rng);
                let frag = if rng.gen_bool(0.5) { full.clone() } else { sample_component(inner, rng) };
                Resource::AuthBoth(Box::new(full), Box::new(frag)).norm()
            }
        },
        ComponentKind::Pointwise { inner } => {
            let n = rng.gen_range(0..3);
            Resource::pointwise((0..n).map(|_| (small_value(rng), sample_component(inner, rng))))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn json_round_trip() {
        let r = SigmaRegistry::standard();
        assert_eq!(SigmaRegistry::from_json(&r.to_json()).unwrap(), r);
        assert!(r.check().is_ok());
        let bad = SigmaRegistry::default().with("x", ComponentKind::Finite { pcm: "Nope".into() });
        assert_eq!(bad.check(), Err(PcmError::UnknownPcm("Nope".into())));
    }

    #[test]
    fn samples_are_canonical() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = SigmaRegistry::standard();
        for _ in 0..200 {
            let x = r.sample(&mut rng);
            assert_eq!(x.clone().norm(), x);
        }
    }
}
