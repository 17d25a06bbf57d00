//! Finite PCMs given by addition tables.

use std::sync::LazyLock;

use super::Resource;

#[derive(Debug, Clone)]
pub struct FinitePcm {
    pub name: &'static str,
    /// Non-unit, non-undefined elements.
    pub elems: &'static [&'static str],
    /// Defined sums of two non-unit elements; all other sums are undefined.
    pub sums: &'static [(&'static str, &'static str, &'static str)],
}

impl FinitePcm {
    /// Whole carrier in the order `Undef, ε, elems…`.
    pub fn carrier(&self) -> Vec<Resource> {
        let mut out = vec![Resource::Invalid, Resource::Unit];
        out.extend(self.elems.iter().map(|e| Resource::fin(self.name, e)));
        out
    }

    pub fn add_elems(&self, x: &str, y: &str) -> Resource {
        for (a, b, c) in self.sums {
            if (*a == x && *b == y) || (*a == y && *b == x) {
                return Resource::fin(self.name, c);
            }
        }
        Resource::Invalid
    }
}

pub static CANNON: LazyLock<FinitePcm> = LazyLock::new(|| FinitePcm {
    name: "Cannon",
    elems: &["Ready", "Fired", "Ball"],
    sums: &[("Ready", "Ball", "Fired")],
});

pub static ONCE: LazyLock<FinitePcm> =
    LazyLock::new(|| FinitePcm { name: "Once", elems: &["Do"], sums: &[] });

pub static APP: LazyLock<FinitePcm> = LazyLock::new(|| FinitePcm {
    name: "App",
    elems: &["Init", "Run", "Both"],
    sums: &[("Init", "Run", "Both")],
});

pub fn finite_pcm(name: &str) -> Option<&'static FinitePcm> {
    match name {
        "Cannon" => Some(&CANNON),
        "Once" => Some(&ONCE),
        "App" => Some(&APP),
        _ => None,
    }
}

pub fn finite_pcm_names() -> &'static [&'static str] {
    &["Cannon", "Once", "App"]
}
