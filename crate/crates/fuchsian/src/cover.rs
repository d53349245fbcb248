use crate::domain::FundamentalDomain;
use crate::error::{Error, Result};
use crate::group::{DomainSpec, FuchsianGroup, GroupDocument};
use crate::orbit::{injrad_from_ball, orbit_enumerate_with, InjRad, OrbitCache, OrbitElement, OrbitOptions};
use crate::words::{improves, translation_length, walk_reduced_words, SystoleEstimate};
use hqe_core::geometry::DiscPoint;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type Permutation = Vec<usize>;

pub const COVER_ATTEMPTS: usize = 32;
const CONJUGACY_DRAWS: usize = 200_000;

fn compose(p: &[usize], q: &[usize]) -> Permutation {
    q.iter().map(|&i| p[i]).collect()
}

fn invert(p: &[usize]) -> Permutation {
    let mut inv = vec![0; p.len()];
    for (i, &j) in p.iter().enumerate() {
        inv[j] = i;
    }
    inv
}

fn identity(n: usize) -> Permutation {
    (0..n).collect()
}

fn cycles(p: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; p.len()];
    let mut out = Vec::new();
    for s in 0..p.len() {
        if seen[s] {
            continue;
        }
        let mut c = vec![s];
        seen[s] = true;
        let mut x = p[s];
        while x != s {
            seen[x] = true;
            c.push(x);
            x = p[x];
        }
        out.push(c);
    }
    out
}

/// Random P with P⁻¹ A P = B, if A and B have the same cycle type.
fn random_conjugator<R: Rng>(a: &[usize], b: &[usize], rng: &mut R) -> Option<Permutation> {
    let mut ca = cycles(a);
    let cb = cycles(b);
    let mut type_a: Vec<usize> = ca.iter().map(Vec::len).collect();
    let mut type_b: Vec<usize> = cb.iter().map(Vec::len).collect();
    type_a.sort_unstable();
    type_b.sort_unstable();
    if type_a != type_b {
        return None;
    }
    ca.shuffle(rng);
    let mut used = vec![false; ca.len()];
    let mut p = vec![0; a.len()];
    for c in &cb {
        let k = (0..ca.len()).find(|&k| !used[k] && ca[k].len() == c.len())?;
        used[k] = true;
        let shift = rng.random_range(0..c.len());
        for (i, &x) in c.iter().enumerate() {
            p[x] = ca[k][(i + shift) % c.len()];
        }
    }
    Some(p)
}

fn is_transitive(perms: &[Permutation], n: usize) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(x) = stack.pop() {
        for p in perms {
            for y in [p[x], invert(p)[x]] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    seen.iter().all(|&s| s)
}

/// Finite cover given by a permutation of the sheets for every generator, extended to words
/// by π(xy) = π(x)∘π(y).
#[derive(Debug, Clone, PartialEq)]
pub struct CoverSurface {
    pub base: FuchsianGroup,
    pub degree: usize,
    pub permutations: Vec<Permutation>,
    pub seed: u64,
    inverses: Vec<Permutation>,
}

impl CoverSurface {
    pub fn new(base: FuchsianGroup, permutations: Vec<Permutation>, seed: u64) -> Result<Self> {
        if permutations.len() != base.rank() {
            return Err(Error::InvalidInput(format!("need {} permutations, got {}", base.rank(), permutations.len())));
        }
        let degree = permutations.first().map_or(1, Vec::len);
        for p in &permutations {
            let mut s = p.clone();
            s.sort_unstable();
            if s != identity(degree) {
                return Err(Error::InvalidInput(format!("{p:?} is not a permutation of 0..{degree}")));
            }
        }
        let inverses = permutations.iter().map(|p| invert(p)).collect();
        let cover = Self { base, degree, permutations, seed, inverses };
        if degree > 1 && !is_transitive(&cover.permutations, degree) {
            return Err(Error::NonTransitive { degree, attempts: 1 });
        }
        if let Some(r) = cover.base.relators.iter().find(|r| cover.word_permutation(r) != identity(degree)) {
            return Err(Error::InvalidInput(format!("permutations do not satisfy the relator {r:?}")));
        }
        Ok(cover)
    }

    pub fn trivial(base: FuchsianGroup) -> Self {
        let permutations = vec![vec![0]; base.rank()];
        let inverses = permutations.clone();
        Self { base, degree: 1, permutations, seed: 0, inverses }
    }

    fn letter_perm(&self, a: i32) -> &Permutation {
        let k = (a.unsigned_abs() - 1) as usize;
        if a > 0 {
            &self.permutations[k]
        } else {
            &self.inverses[k]
        }
    }

    pub fn word_permutation(&self, word: &[i32]) -> Permutation {
        word.iter().fold(identity(self.degree), |acc, &a| compose(&acc, self.letter_perm(a)))
    }

    /// π(word)(sheet).
    pub fn sheet_image(&self, word: &[i32], sheet: usize) -> usize {
        word.iter().rev().fold(sheet, |s, &a| self.letter_perm(a)[s])
    }

    pub fn volume(&self) -> Option<f64> {
        self.base.covolume().map(|v| v * self.degree as f64)
    }

    /// InjRad at the lift of z on `sheet`: only γ whose permutation fixes the sheet count.
    pub fn injectivity_radius_at(&self, z: &DiscPoint, sheet: usize, search_r: f64) -> Result<InjRad> {
        let ball = orbit_enumerate_with(&self.base, z, search_r, OrbitOptions::default())?;
        Ok(injrad_from_ball(&ball, |e| self.sheet_image(&e.word, sheet) == sheet))
    }

    pub fn injrad_cached(&self, cache: &OrbitCache, z: &DiscPoint, sheet: usize) -> Result<InjRad> {
        cache.injrad(z, |e: &OrbitElement| self.sheet_image(&e.word, sheet) == sheet)
    }

    /// Shortest closed geodesic among reduced words up to `max_len` whose permutation has a
    /// fixed point.
    pub fn systole(&self, max_len: usize) -> Option<SystoleEstimate> {
        let mut best: Option<SystoleEstimate> = None;
        let step = |p: &Permutation, a: i32| compose(p, self.letter_perm(a));
        walk_reduced_words(&self.base, max_len, identity(self.degree), &step, &mut |w, g, p| {
            if let Some(l) = translation_length(g) {
                if best.as_ref().map_or(true, |b| improves(l, w.len(), b)) && p.iter().enumerate().any(|(i, &j)| i == j) {
                    best = Some(SystoleEstimate { value: l, max_word_length: max_len, word: w.to_vec() });
                }
            }
        });
        best
    }

    pub fn to_document(&self) -> GroupDocument {
        let mut doc = self.base.to_document();
        doc.label = format!("{}_cover{}", self.base.label, self.degree);
        doc.permutations = self.permutations.clone();
        doc.seed = Some(self.seed);
        doc
    }

    pub fn from_document(doc: &GroupDocument) -> Result<Self> {
        let mut base = FuchsianGroup::from_document(doc)?;
        if doc.permutations.is_empty() {
            return Ok(Self::trivial(base));
        }
        if let Some(stripped) = base.label.rsplit_once("_cover").map(|(b, _)| b.to_string()) {
            base.label = stripped;
        }
        Self::new(base, doc.permutations.clone(), doc.seed.unwrap_or(0))
    }
}

/// Splits a relator as g_j⁻¹ U g_j V with g_j absent from U and V.
fn conjugation_form(rel: &[i32], rank: usize) -> Option<(usize, Vec<i32>, Vec<i32>)> {
    for j in 1..=rank as i32 {
        let pos: Vec<usize> = rel.iter().enumerate().filter(|(_, &a)| a.abs() == j).map(|(i, _)| i).collect();
        if pos.len() != 2 || rel[pos[0]] != -rel[pos[1]] {
            continue;
        }
        let start = if rel[pos[0]] == -j { pos[0] } else { pos[1] };
        let rotated: Vec<i32> = rel[start..].iter().chain(&rel[..start]).copied().collect();
        let k = rotated.iter().position(|&a| a == j)?;
        return Some(((j - 1) as usize, rotated[1..k].to_vec(), rotated[k + 1..].to_vec()));
    }
    None
}

/// Transitive degree-n cover drawn from a seeded stream. Relator-free groups take independent
/// uniform permutations; a single relator g_j⁻¹ U g_j V is solved for π(g_j) by conjugation.
pub fn random_cover(base: &FuchsianGroup, degree: usize, seed: u64) -> Result<CoverSurface> {
    if degree == 0 {
        return Err(Error::InvalidInput("degree must be at least 1".into()));
    }
    if degree == 1 {
        let mut c = CoverSurface::trivial(base.clone());
        c.seed = seed;
        return Ok(c);
    }
    if base.rank() == 0 {
        return Err(Error::NonTransitive { degree, attempts: 0 });
    }
    let form = match base.relators.len() {
        0 => None,
        1 => Some(
            conjugation_form(&base.relators[0], base.rank())
                .ok_or_else(|| Error::InvalidInput("relator is not of the form g⁻¹ U g V".into()))?,
        ),
        _ => return Err(Error::InvalidInput("random covers support at most one relator".into())),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shuffled = |rng: &mut ChaCha8Rng| {
        let mut p = identity(degree);
        p.shuffle(rng);
        p
    };
    let trivial = CoverSurface::trivial(base.clone());
    for _ in 0..COVER_ATTEMPTS {
        let perms = match &form {
            None => (0..base.rank()).map(|_| shuffled(&mut rng)).collect::<Vec<_>>(),
            Some((j, u, v)) => {
                let mut found = None;
                for _ in 0..CONJUGACY_DRAWS {
                    let mut perms: Vec<Permutation> = (0..base.rank()).map(|_| shuffled(&mut rng)).collect();
                    let partial = CoverSurface { permutations: perms.clone(), inverses: perms.iter().map(|p| invert(p)).collect(), degree, ..trivial.clone() };
                    let a = partial.word_permutation(u);
                    let b = invert(&partial.word_permutation(v));
                    if let Some(p) = random_conjugator(&a, &b, &mut rng) {
                        perms[*j] = p;
                        found = Some(perms);
                        break;
                    }
                }
                match found {
                    Some(p) => p,
                    None => continue,
                }
            }
        };
        match CoverSurface::new(base.clone(), perms, seed) {
            Ok(c) => return Ok(c),
            Err(Error::NonTransitive { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::NonTransitive { degree, attempts: COVER_ATTEMPTS })
}

/// Monte Carlo estimate of Vol{InjRad < R}/Vol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BsEstimate {
    pub radius: f64,
    pub fraction: f64,
    pub std_err: f64,
    pub n_samples: usize,
    /// Largest d(z, γz) examined.
    pub search_reach: f64,
}

/// Default |ρ| bound or ball radius for fundamental regions of infinite area.
pub const DEFAULT_TRUNCATION: f64 = 2.0;

pub fn bs_statistic(surface: &CoverSurface, r: f64, n_samples: usize, seed: u64) -> Result<BsEstimate> {
    if !(r <= 25.0) {
        return Err(Error::InvalidInput(format!("R must be at most 25, got {r}")));
    }
    if n_samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let domain = FundamentalDomain::new(&surface.base, DEFAULT_TRUNCATION)?;
    // An embedded ball has area at most the total area, which caps InjRad on closed surfaces.
    let cap = match (surface.base.domain, surface.volume()) {
        (DomainSpec::Dirichlet { .. }, Some(v)) => (1.0 + v / std::f64::consts::TAU).acosh(),
        _ => f64::INFINITY,
    };
    let reach = (2.0 * r).min(2.0 * cap + 1e-6).max(0.0);
    let cache = OrbitCache::new(&surface.base, reach, domain.region_radius)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..n_samples {
        let z = domain.sample(&mut rng);
        let sheet = rng.random_range(0..surface.degree);
        let inj = surface.injrad_cached(&cache, &z, sheet)?;
        if !inj.lower_bound && inj.value < r {
            hits += 1;
        }
    }
    let p = hits as f64 / n_samples as f64;
    Ok(BsEstimate { radius: r, fraction: p, std_err: (p * (1.0 - p) / n_samples as f64).sqrt(), n_samples, search_reach: reach })
}
