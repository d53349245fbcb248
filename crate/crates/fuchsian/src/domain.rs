use crate::error::{Error, Result};
use crate::group::{DomainSpec, FuchsianGroup};
use crate::orbit::{orbit_enumerate_with, OrbitOptions};
use hqe_core::geometry::{ball_volume, hyp_distance, DiscPoint, GroupElement};
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::TAU;

/// A finite-volume region used for uniform sampling in hyperbolic measure.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalDomain {
    pub spec: DomainSpec,
    /// Ball radius for `Whole`, |ρ| bound for `CyclicStrip`; unused for `Dirichlet`.
    pub truncation: f64,
    pub volume: f64,
    /// Max distance from 0 to a point of the region.
    pub region_radius: f64,
    neighbors: Vec<GroupElement>,
}

/// Fermi coordinates (s, ρ) relative to the real diameter: z = T(s)·(i tanh(ρ/2)).
pub fn fermi_coordinates(z: &DiscPoint) -> (f64, f64) {
    let zc = z.z();
    let w = Complex64::i() * (1.0 + zc) / (1.0 - zc);
    (w.norm().ln(), -(w.re / w.im).asinh())
}

pub fn from_fermi(s: f64, rho: f64) -> DiscPoint {
    GroupElement::translation(s).apply(&DiscPoint { re: 0.0, im: (0.5 * rho).tanh() })
}

impl FundamentalDomain {
    pub fn new(group: &FuchsianGroup, truncation: f64) -> Result<Self> {
        match group.domain {
            DomainSpec::Whole => {
                if !(truncation > 0.0) {
                    return Err(Error::InvalidInput("the whole disc needs a positive truncation radius".into()));
                }
                Ok(Self { spec: group.domain, truncation, volume: ball_volume(truncation), region_radius: truncation, neighbors: Vec::new() })
            }
            DomainSpec::CyclicStrip { length } => {
                if !(truncation > 0.0) {
                    return Err(Error::InvalidInput("a cyclic strip needs a positive ρ bound".into()));
                }
                Ok(Self {
                    spec: group.domain,
                    truncation,
                    volume: length * 2.0 * truncation.sinh(),
                    region_radius: ((0.5 * length).cosh() * truncation.cosh()).acosh(),
                    neighbors: Vec::new(),
                })
            }
            DomainSpec::Dirichlet { covering_radius } => {
                let volume = group
                    .covolume()
                    .ok_or_else(|| Error::InvalidInput("a Dirichlet domain needs the covolume".into()))?;
                let ball = orbit_enumerate_with(group, &DiscPoint::origin(), 2.0 * covering_radius + 1e-9, OrbitOptions::default())?;
                let neighbors = ball.non_identity().map(|e| e.element).collect();
                Ok(Self { spec: group.domain, truncation: 0.0, volume, region_radius: covering_radius, neighbors })
            }
        }
    }

    pub fn contains(&self, z: &DiscPoint) -> bool {
        match self.spec {
            DomainSpec::Whole => hyp_distance(&DiscPoint::origin(), z) <= self.truncation,
            DomainSpec::CyclicStrip { length } => {
                let (s, rho) = fermi_coordinates(z);
                s.abs() <= 0.5 * length && rho.abs() <= self.truncation
            }
            DomainSpec::Dirichlet { .. } => {
                let d0 = hyp_distance(&DiscPoint::origin(), z);
                d0 <= self.region_radius && self.neighbors.iter().all(|g| d0 <= hyp_distance(z, &g.orbit_origin()))
            }
        }
    }

    /// Uniform sample with respect to hyperbolic area.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> DiscPoint {
        match self.spec {
            DomainSpec::Whole => sample_ball(rng, self.truncation),
            DomainSpec::CyclicStrip { length } => {
                let s = (rng.random::<f64>() - 0.5) * length;
                let rho = ((2.0 * rng.random::<f64>() - 1.0) * self.truncation.sinh()).asinh();
                from_fermi(s, rho)
            }
            DomainSpec::Dirichlet { .. } => loop {
                let z = sample_ball(rng, self.region_radius);
                if self.contains(&z) {
                    return z;
                }
            },
        }
    }
}

/// Uniform point of the hyperbolic ball of radius `r` about 0.
pub fn sample_ball<R: Rng>(rng: &mut R, r: f64) -> DiscPoint {
    let c = 1.0 + rng.random::<f64>() * (r.cosh() - 1.0);
    DiscPoint::polar(c.acosh(), rng.random::<f64>() * TAU)
}
