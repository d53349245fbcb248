use crate::error::{Error, Result};
use crate::group::{DomainSpec, FuchsianGroup};
use hqe_core::geometry::{hyp_distance, DiscPoint, GroupElement};
use std::collections::{HashMap, VecDeque};

pub const DEFAULT_ELEMENT_CAP: usize = 1_000_000;
pub const MAX_ORBIT_RADIUS: f64 = 25.0;

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitElement {
    pub element: GroupElement,
    /// d(center, γ·center).
    pub displacement: f64,
    /// Shortest word found, in signed 1-based letters.
    pub word: Vec<i32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitBall {
    pub center: DiscPoint,
    pub radius: f64,
    pub elements: Vec<OrbitElement>,
}

impl OrbitBall {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn non_identity(&self) -> impl Iterator<Item = &OrbitElement> {
        self.elements.iter().filter(|e| !e.word.is_empty())
    }
}

/// Projective deduplication keyed on coarse bins of (displacement, direction of γ·0).
#[derive(Default)]
pub(crate) struct ElementIndex {
    bins: HashMap<(i64, i64), Vec<GroupElement>>,
    count: usize,
}

const BIN: f64 = 1e-4;
const ANGLE_BINS: i64 = (std::f64::consts::TAU / BIN) as i64 + 1;

impl ElementIndex {
    fn key(g: &GroupElement) -> (i64, i64) {
        let w = g.orbit_origin();
        let ang = w.im.atan2(w.re).rem_euclid(std::f64::consts::TAU);
        ((g.displacement() / BIN).floor() as i64, (ang / BIN).floor() as i64)
    }

    fn tol(g: &GroupElement) -> f64 {
        1e-7 * (1.0 + g.alpha.norm())
    }

    pub(crate) fn contains(&self, g: &GroupElement) -> bool {
        let (d, a) = Self::key(g);
        let tol = Self::tol(g);
        for dd in -1..=1 {
            for da in -1..=1 {
                let k = (d + dd, (a + da).rem_euclid(ANGLE_BINS));
                if let Some(v) = self.bins.get(&k) {
                    if v.iter().any(|h| h.approx_eq(g, tol)) {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// Inserts unless already present; returns whether it was new.
    pub(crate) fn insert(&mut self, g: GroupElement) -> bool {
        if self.contains(&g) {
            return false;
        }
        let (d, a) = Self::key(&g);
        self.bins.entry((d, a.rem_euclid(ANGLE_BINS))).or_default().push(g);
        self.count += 1;
        true
    }

    pub(crate) fn len(&self) -> usize {
        self.count
    }
}

/// Extra displacement allowed on intermediate words so that every element of the ball is
/// reached through prefixes that stay within R + slack.
pub fn pruning_slack(group: &FuchsianGroup, center: &DiscPoint) -> f64 {
    let gen_max = group
        .generators
        .iter()
        .map(|g| hyp_distance(center, &g.apply(center)))
        .fold(0.0, f64::max);
    match group.domain {
        DomainSpec::Dirichlet { covering_radius } => {
            gen_max.max(covering_radius + 2.0 * hyp_distance(&DiscPoint::origin(), center))
        }
        _ => gen_max,
    }
}

/// Options for [`orbit_enumerate_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitOptions {
    pub word_cap: usize,
    pub element_cap: usize,
    /// Overrides [`pruning_slack`] when set.
    pub slack: Option<f64>,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        Self { word_cap: 64, element_cap: DEFAULT_ELEMENT_CAP, slack: None }
    }
}

pub fn orbit_enumerate(group: &FuchsianGroup, center: &DiscPoint, radius: f64, word_cap: usize) -> Result<OrbitBall> {
    orbit_enumerate_with(group, center, radius, OrbitOptions { word_cap, ..OrbitOptions::default() })
}

/// Breadth-first search over reduced words, keeping every γ with d(center, γ·center) ≤ R.
pub fn orbit_enumerate_with(group: &FuchsianGroup, center: &DiscPoint, radius: f64, opts: OrbitOptions) -> Result<OrbitBall> {
    if !(0.0..=MAX_ORBIT_RADIUS).contains(&radius) {
        return Err(Error::InvalidInput(format!("orbit radius must lie in [0, {MAX_ORBIT_RADIUS}], got {radius}")));
    }
    if opts.word_cap < 1 {
        return Err(Error::InvalidInput("word cap must be at least 1".into()));
    }
    let slack = opts.slack.unwrap_or_else(|| pruning_slack(group, center));
    let explore = radius + slack;
    // Conjugate so the center sits at 0; displacement is then 2 asinh|β|.
    let boost = GroupElement::boost_to(center);
    let unboost = boost.inverse();
    let letters: Vec<i32> = (1..=group.rank() as i32).flat_map(|a| [a, -a]).collect();
    let moved: HashMap<i32, GroupElement> =
        letters.iter().map(|&a| (a, unboost.compose(&group.letter(a)).compose(&boost))).collect();

    let mut index = ElementIndex::default();
    index.insert(GroupElement::identity());
    let mut elements = vec![OrbitElement { element: GroupElement::identity(), displacement: 0.0, word: Vec::new() }];
    let mut queue = VecDeque::from([(GroupElement::identity(), Vec::<i32>::new())]);
    while let Some((h, word)) = queue.pop_front() {
        if word.len() >= opts.word_cap {
            continue;
        }
        for &a in &letters {
            if word.last() == Some(&-a) {
                continue;
            }
            let child = h.compose(&moved[&a]);
            let d = child.displacement();
            if d > explore || !index.insert(child) {
                continue;
            }
            if index.len() > opts.element_cap {
                return Err(Error::BudgetExceeded { cap: opts.element_cap });
            }
            let mut w = word.clone();
            w.push(a);
            if d <= radius {
                elements.push(OrbitElement { element: boost.compose(&child).compose(&unboost), displacement: d, word: w.clone() });
            }
            queue.push_back((child, w));
        }
    }
    elements.sort_by(|x, y| x.displacement.total_cmp(&y.displacement));
    Ok(OrbitBall { center: *center, radius, elements })
}

/// Injectivity radius together with whether it is only a lower bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InjRad {
    pub value: f64,
    pub lower_bound: bool,
}

/// (1/2) min over γ ≠ id in the ball of d(z, γz); search_R/2 flagged when the ball has no
/// other element.
pub fn injectivity_radius_at(group: &FuchsianGroup, z: &DiscPoint, search_r: f64) -> Result<InjRad> {
    let ball = orbit_enumerate_with(group, z, search_r, OrbitOptions::default())?;
    Ok(injrad_from_ball(&ball, |_| true))
}

pub(crate) fn injrad_from_ball(ball: &OrbitBall, keep: impl Fn(&OrbitElement) -> bool) -> InjRad {
    match ball.non_identity().filter(|e| keep(e)).map(|e| e.displacement).reduce(f64::min) {
        Some(d) => InjRad { value: 0.5 * d, lower_bound: false },
        None => InjRad { value: 0.5 * ball.radius, lower_bound: true },
    }
}

/// Orbit of 0 reused for many base points z with d(0, z) ≤ `region_radius`.
#[derive(Debug, Clone)]
pub struct OrbitCache {
    pub ball: OrbitBall,
    pub region_radius: f64,
    /// Displacements d(z, γz) up to this value are captured for every admissible z.
    pub reach: f64,
}

impl OrbitCache {
    pub fn new(group: &FuchsianGroup, reach: f64, region_radius: f64) -> Result<Self> {
        let ball = orbit_enumerate_with(group, &DiscPoint::origin(), reach + 2.0 * region_radius, OrbitOptions::default())?;
        Ok(Self { ball, region_radius, reach })
    }

    fn check(&self, z: &DiscPoint) -> Result<()> {
        let d = hyp_distance(&DiscPoint::origin(), z);
        if d > self.region_radius + 1e-9 {
            return Err(Error::InvalidInput(format!("point at distance {d} lies outside the cached region {}", self.region_radius)));
        }
        Ok(())
    }

    /// Elements γ with d(z, γ·w) ≤ reach, as (γ, distance).
    pub fn near<'a>(&'a self, z: &'a DiscPoint, w: &'a DiscPoint) -> Result<impl Iterator<Item = (&'a OrbitElement, f64)> + 'a> {
        self.check(z)?;
        self.check(w)?;
        Ok(self.ball.elements.iter().filter_map(move |e| {
            let d = hyp_distance(z, &e.element.apply(w));
            (d <= self.reach).then_some((e, d))
        }))
    }

    /// Injectivity radius at z restricted to elements accepted by `keep`.
    pub fn injrad(&self, z: &DiscPoint, keep: impl Fn(&OrbitElement) -> bool) -> Result<InjRad> {
        self.check(z)?;
        let best = self
            .ball
            .non_identity()
            .filter(|e| keep(e))
            .map(|e| hyp_distance(z, &e.element.apply(z)))
            .filter(|&d| d <= self.reach)
            .reduce(f64::min);
        Ok(match best {
            Some(d) => InjRad { value: 0.5 * d, lower_bound: false },
            None => InjRad { value: 0.5 * self.reach, lower_bound: true },
        })
    }
}
