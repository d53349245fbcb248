use crate::error::{Error, Result};
use hqe_core::geometry::GroupElement;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI};

/// Shape of the fundamental domain used for sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DomainSpec {
    /// No identifications; the whole disc.
    Whole,
    /// Fermi strip |s| ≤ L/2 around the axis of a translation of length L.
    CyclicStrip { length: f64 },
    /// Compact Dirichlet domain about 0 with the given covering radius.
    Dirichlet { covering_radius: f64 },
}

/// A group given by generators; a letter is a signed 1-based generator index.
#[derive(Debug, Clone, PartialEq)]
pub struct FuchsianGroup {
    pub label: String,
    pub generators: Vec<GroupElement>,
    pub relators: Vec<Vec<i32>>,
    pub covolume_hint: Option<f64>,
    pub domain: DomainSpec,
}

/// Side-pairing translation length of the regular octagon with angles π/4.
pub fn bolza_translation_length() -> f64 {
    2.0 * (1.0 + 2f64.sqrt()).acosh()
}

/// Distance from the octagon's center to its vertices.
pub fn bolza_circumradius() -> f64 {
    (3.0 + 2.0 * 2f64.sqrt()).acosh()
}

impl FuchsianGroup {
    pub fn trivial() -> Self {
        Self {
            label: "trivial".into(),
            generators: Vec::new(),
            relators: Vec::new(),
            covolume_hint: None,
            domain: DomainSpec::Whole,
        }
    }

    /// ⟨a_L⟩ with a_L the translation of length L along the real diameter.
    pub fn cyclic(length: f64) -> Result<Self> {
        if !(length > 0.0) {
            return Err(Error::InvalidInput(format!("translation length must be positive, got {length}")));
        }
        Ok(Self {
            label: format!("cyclic_L{length}"),
            generators: vec![GroupElement::translation(length)],
            relators: Vec::new(),
            covolume_hint: None,
            domain: DomainSpec::CyclicStrip { length },
        })
    }

    /// Genus-two surface from the regular octagon, opposite sides paired by
    /// g_k = R(kπ/4) T(L) R(−kπ/4), k = 0..3.
    pub fn bolza() -> Self {
        let l = bolza_translation_length();
        let generators = (0..4)
            .map(|k| {
                let r = GroupElement::rotation(k as f64 * FRAC_PI_4);
                r.compose(&GroupElement::translation(l)).compose(&r.inverse())
            })
            .collect();
        Self {
            label: "bolza".into(),
            generators,
            relators: vec![vec![1, -2, 3, -4, -1, 2, -3, 4]],
            covolume_hint: Some(4.0 * PI),
            domain: DomainSpec::Dirichlet { covering_radius: bolza_circumradius() },
        }
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    /// Generator for a signed 1-based letter.
    pub fn letter(&self, a: i32) -> GroupElement {
        let g = self.generators[(a.unsigned_abs() - 1) as usize];
        if a > 0 {
            g
        } else {
            g.inverse()
        }
    }

    pub fn evaluate(&self, word: &[i32]) -> GroupElement {
        word.iter().fold(GroupElement::identity(), |acc, &a| acc.compose(&self.letter(a)))
    }

    /// Largest deviation from the identity over the relators.
    pub fn relator_defect(&self) -> f64 {
        self.relators
            .iter()
            .map(|r| {
                let g = self.evaluate(r);
                let id = GroupElement::identity();
                ((g.alpha - id.alpha).norm() + g.beta.norm()).min((g.alpha + id.alpha).norm() + g.beta.norm())
            })
            .fold(0.0, f64::max)
    }

    pub fn covolume(&self) -> Option<f64> {
        self.covolume_hint
    }

    pub fn to_document(&self) -> GroupDocument {
        GroupDocument {
            label: self.label.clone(),
            generators: self.generators.iter().map(matrix_entries).collect(),
            permutations: Vec::new(),
            seed: None,
            relators: self.relators.clone(),
            covolume_hint: self.covolume_hint,
            domain: self.domain,
        }
    }

    pub fn from_document(doc: &GroupDocument) -> Result<Self> {
        let generators = doc
            .generators
            .iter()
            .map(|m| GroupElement::new(Complex64::new(m[0][0], m[0][1]), Complex64::new(m[1][0], m[1][1])).map_err(Error::from))
            .collect::<Result<Vec<_>>>()?;
        for r in &doc.relators {
            if r.iter().any(|&a| a == 0 || a.unsigned_abs() as usize > generators.len()) {
                return Err(Error::InvalidInput(format!("relator {r:?} uses an unknown generator")));
            }
        }
        Ok(Self {
            label: doc.label.clone(),
            generators,
            relators: doc.relators.clone(),
            covolume_hint: doc.covolume_hint,
            domain: doc.domain,
        })
    }
}

/// Entries [α, β, β̄, ᾱ] of the SU(1,1) matrix as (re, im) pairs.
fn matrix_entries(g: &GroupElement) -> [[f64; 2]; 4] {
    let (a, b) = (g.alpha, g.beta);
    [[a.re, a.im], [b.re, b.im], [b.re, -b.im], [a.re, -a.im]]
}

/// Serialized form of a group or cover.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupDocument {
    pub label: String,
    pub generators: Vec<[[f64; 2]; 4]>,
    pub permutations: Vec<Vec<usize>>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub relators: Vec<Vec<i32>>,
    #[serde(default)]
    pub covolume_hint: Option<f64>,
    pub domain: DomainSpec,
}
