//! Poincaré disc geometry, the isometry group PSU(1,1) and the ANK chart.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Points with |z| at or beyond this are rejected.
pub const DISC_EDGE: f64 = 1.0 - 1e-12;

/// A point of the open unit disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscPoint {
    pub re: f64,
    pub im: f64,
}

impl DiscPoint {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        let r = re.hypot(im);
        if !(r < DISC_EDGE) {
            return Err(Error::InvalidInput(format!("|z| = {r} is not inside the disc")));
        }
        Ok(Self { re, im })
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im)
    }

    /// Point at hyperbolic distance `t` from the origin in direction `phi`.
    pub fn polar(t: f64, phi: f64) -> Self {
        let r = (0.5 * t).tanh();
        Self { re: r * phi.cos(), im: r * phi.sin() }
    }

    pub fn origin() -> Self {
        Self { re: 0.0, im: 0.0 }
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    /// 1 − |z|², computed without cancellation near the boundary.
    pub fn one_minus_norm_sqr(&self) -> f64 {
        let r = self.re.hypot(self.im);
        (1.0 - r) * (1.0 + r)
    }

    /// Density of the hyperbolic area form with respect to dx dy.
    pub fn area_density(&self) -> f64 {
        let q = self.one_minus_norm_sqr();
        4.0 / (q * q)
    }
}

/// A point e^{i·angle} of the boundary circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub angle: f64,
}

impl BoundaryPoint {
    pub fn new(angle: f64) -> Self {
        let mut a = angle.rem_euclid(TAU);
        if a >= TAU {
            a = 0.0;
        }
        Self { angle: a }
    }

    pub fn from_complex(b: Complex64) -> Self {
        Self::new(b.im.atan2(b.re))
    }

    pub fn b(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.angle)
    }
}

/// Hyperbolic distance in the disc.
pub fn hyp_distance(z: &DiscPoint, w: &DiscPoint) -> f64 {
    let num = (z.z() - w.z()).norm();
    let den = (z.one_minus_norm_sqr() * w.one_minus_norm_sqr()).sqrt();
    2.0 * (num / den).asinh()
}

/// cosh of the hyperbolic distance.
pub fn cosh_distance(z: &DiscPoint, w: &DiscPoint) -> f64 {
    let num = (z.z() - w.z()).norm_sqr();
    1.0 + 2.0 * num / (z.one_minus_norm_sqr() * w.one_minus_norm_sqr())
}

/// Busemann function ⟨z, b⟩ = log((1 − |z|²)/|z − b|²).
pub fn busemann(z: &DiscPoint, b: &BoundaryPoint) -> f64 {
    let d = (z.z() - b.b()).norm_sqr();
    (z.one_minus_norm_sqr() / d).ln()
}

/// Poisson kernel e^{⟨z,b⟩}.
pub fn poisson_weight(z: &DiscPoint, b: &BoundaryPoint) -> f64 {
    z.one_minus_norm_sqr() / (z.z() - b.b()).norm_sqr()
}

/// An element of PSU(1,1), stored as the SU(1,1) matrix [[α, β], [β̄, ᾱ]] with a
/// canonical sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl GroupElement {
    /// Normalizes |α|² − |β|² to one and fixes the sign.
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let det = alpha.norm_sqr() - beta.norm_sqr();
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::InvalidInput(format!("|α|² − |β|² = {det} is not positive")));
        }
        Ok(Self::canonical(alpha, beta, det))
    }

    fn canonical(alpha: Complex64, beta: Complex64, det: f64) -> Self {
        let s = det.sqrt().recip();
        let (mut a, mut b) = (alpha * s, beta * s);
        if a.re < 0.0 || (a.re == 0.0 && a.im < 0.0) {
            a = -a;
            b = -b;
        }
        Self { alpha: a, beta: b }
    }

    pub fn identity() -> Self {
        Self { alpha: Complex64::new(1.0, 0.0), beta: Complex64::new(0.0, 0.0) }
    }

    /// Rotation z ↦ e^{iφ} z about the origin.
    pub fn rotation(phi: f64) -> Self {
        Self::canonical(Complex64::from_polar(1.0, 0.5 * phi), Complex64::new(0.0, 0.0), 1.0)
    }

    /// Hyperbolic translation of length `s` along the real diameter, moving 0 towards 1.
    pub fn translation(s: f64) -> Self {
        Self {
            alpha: Complex64::new((0.5 * s).cosh(), 0.0),
            beta: Complex64::new((0.5 * s).sinh(), 0.0),
        }
    }

    /// The transvection along the geodesic through 0 and z, sending 0 to z.
    pub fn boost_to(z: &DiscPoint) -> Self {
        let s = z.one_minus_norm_sqr().sqrt().recip();
        Self { alpha: Complex64::new(s, 0.0), beta: z.z() * s }
    }

    pub fn det(&self) -> f64 {
        self.alpha.norm_sqr() - self.beta.norm_sqr()
    }

    pub fn compose(&self, other: &Self) -> Self {
        let a = self.alpha * other.alpha + self.beta * other.beta.conj();
        let b = self.alpha * other.beta + self.beta * other.alpha.conj();
        // The product already has unit determinant up to rounding; the computed determinant
        // cancels badly for large entries, so rescale only when the drift exceeds that noise.
        let (na, nb) = (a.norm_sqr(), b.norm_sqr());
        let det = na - nb;
        let noise = 64.0 * f64::EPSILON * (na + nb);
        Self::canonical(a, b, if (det - 1.0).abs() > noise { det } else { 1.0 })
    }

    pub fn inverse(&self) -> Self {
        Self::canonical(self.alpha.conj(), -self.beta, 1.0)
    }

    pub fn apply_complex(&self, z: Complex64) -> Complex64 {
        (self.alpha * z + self.beta) / (self.beta.conj() * z + self.alpha.conj())
    }

    pub fn apply(&self, z: &DiscPoint) -> DiscPoint {
        let w = self.apply_complex(z.z());
        DiscPoint { re: w.re, im: w.im }
    }

    pub fn apply_boundary(&self, b: &BoundaryPoint) -> BoundaryPoint {
        let w = self.apply_complex(b.b());
        BoundaryPoint::new(w.im.atan2(w.re))
    }

    /// Image of the origin.
    pub fn orbit_origin(&self) -> DiscPoint {
        let w = self.beta / self.alpha.conj();
        DiscPoint { re: w.re, im: w.im }
    }

    /// Displacement d(0, g·0) = 2 acosh|α|.
    pub fn displacement(&self) -> f64 {
        2.0 * self.beta.norm().asinh()
    }

    /// Trace of the real representative (up to sign); |tr| > 2 for hyperbolic elements.
    pub fn trace(&self) -> f64 {
        2.0 * self.alpha.re
    }

    /// Derivative of the boundary map, d(g·b)/db = e^{−⟨g·0, g·b⟩}.
    pub fn boundary_derivative(&self, b: &BoundaryPoint) -> f64 {
        let gb = self.apply_boundary(b);
        (-busemann(&self.orbit_origin(), &gb)).exp()
    }

    /// Projective equality within an entrywise tolerance.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let same = (self.alpha - other.alpha).norm() <= tol && (self.beta - other.beta).norm() <= tol;
        let flip = (self.alpha + other.alpha).norm() <= tol && (self.beta + other.beta).norm() <= tol;
        same || flip
    }

    /// The real PSL(2,ℝ) matrix [[a, b], [c, d]] of the half-plane model.
    pub fn to_psl2r(&self) -> [[f64; 2]; 2] {
        let (al, be) = (self.alpha, self.beta);
        [[al.re + be.re, al.im - be.im], [-al.im - be.im, al.re - be.re]]
    }

    pub fn from_psl2r(m: [[f64; 2]; 2]) -> Result<Self> {
        let [[a, b], [c, d]] = m;
        let alpha = Complex64::new(0.5 * (a + d), 0.5 * (b - c));
        let beta = Complex64::new(0.5 * (a - d), -0.5 * (b + c));
        Self::new(alpha, beta)
    }
}

/// a_s = diag(e^{s/2}, e^{−s/2}) in PSL(2,ℝ).
pub fn a_matrix(s: f64) -> [[f64; 2]; 2] {
    [[(0.5 * s).exp(), 0.0], [0.0, (-0.5 * s).exp()]]
}

/// n_u = [[1, u], [0, 1]].
pub fn n_matrix(u: f64) -> [[f64; 2]; 2] {
    [[1.0, u], [0.0, 1.0]]
}

/// k_θ = [[cos θ/2, −sin θ/2], [sin θ/2, cos θ/2]].
pub fn k_matrix(theta: f64) -> [[f64; 2]; 2] {
    let (s, c) = (0.5 * theta).sin_cos();
    [[c, -s], [s, c]]
}

fn mat_mul(x: [[f64; 2]; 2], y: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [
        [x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]],
        [x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]],
    ]
}

/// Coordinates of g = a_s n_u k_θ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnkCoords {
    pub s: f64,
    pub u: f64,
    pub theta: f64,
}

pub fn ank_compose(c: &AnkCoords) -> GroupElement {
    let m = mat_mul(mat_mul(a_matrix(c.s), n_matrix(c.u)), k_matrix(c.theta));
    GroupElement::from_psl2r(m).expect("a_s n_u k_θ has determinant one")
}

pub fn ank_decompose(g: &GroupElement) -> AnkCoords {
    let [[a, b], [c, d]] = g.to_psl2r();
    // g·i = x + iy in the half plane; a_s n_u · i = e^s (u + i).
    let den = c * c + d * d;
    let x = (a * c + b * d) / den;
    let y = 1.0 / den;
    let s = y.ln();
    let u = x / y;
    let left = mat_mul(n_matrix(-u), a_matrix(-s));
    let k = mat_mul(left, [[a, b], [c, d]]);
    let theta = (2.0 * k[1][0].atan2(k[0][0])).rem_euclid(TAU);
    AnkCoords { s, u, theta: if theta >= TAU { 0.0 } else { theta } }
}

/// Which one-parameter subgroup acts on the right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Flow {
    Geodesic(f64),
    Horocycle(f64),
    Rotation(f64),
}

pub fn flow(g: &GroupElement, which: Flow) -> GroupElement {
    let m = match which {
        Flow::Geodesic(s) => a_matrix(s),
        Flow::Horocycle(u) => n_matrix(u),
        Flow::Rotation(t) => k_matrix(t),
    };
    let h = GroupElement::from_psl2r(m).expect("unimodular generator");
    g.compose(&h)
}

/// A unit tangent vector: base point and the forward endpoint of its geodesic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitTangent {
    pub base: DiscPoint,
    pub dir: BoundaryPoint,
}

impl UnitTangent {
    pub fn from_group(g: &GroupElement) -> Self {
        Self { base: g.orbit_origin(), dir: g.apply_boundary(&BoundaryPoint::new(0.0)) }
    }

    pub fn to_group(&self) -> GroupElement {
        let t = GroupElement::boost_to(&self.base);
        let e = t.inverse().apply_boundary(&self.dir);
        t.compose(&GroupElement::rotation(e.angle))
    }
}

/// A point of the upper half plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPlanePoint {
    pub re: f64,
    pub im: f64,
}

impl HalfPlanePoint {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !(im > 0.0) {
            return Err(Error::InvalidInput(format!("Im z = {im} is not positive")));
        }
        Ok(Self { re, im })
    }
}

/// Cayley map z ↦ (z − i)/(z + i).
pub fn cayley(z: &HalfPlanePoint) -> DiscPoint {
    let z = Complex64::new(z.re, z.im);
    let i = Complex64::i();
    let w = (z - i) / (z + i);
    DiscPoint { re: w.re, im: w.im }
}

pub fn cayley_inverse(w: &DiscPoint) -> HalfPlanePoint {
    let w = w.z();
    let z = Complex64::i() * (1.0 + w) / (1.0 - w);
    HalfPlanePoint { re: z.re, im: z.im }
}

/// Boundary image of a real point (or ∞ when `x` is infinite) under the Cayley map.
pub fn cayley_boundary(x: f64) -> BoundaryPoint {
    if x.is_infinite() {
        return BoundaryPoint::new(0.0);
    }
    let z = Complex64::new(x, 0.0);
    let i = Complex64::i();
    BoundaryPoint::from_complex((z - i) / (z + i))
}

pub fn half_plane_distance(z: &HalfPlanePoint, w: &HalfPlanePoint) -> f64 {
    let num = (z.re - w.re).powi(2) + (z.im - w.im).powi(2);
    2.0 * (0.5 * (num / (z.im * w.im)).sqrt()).asinh()
}

/// Hyperbolic area of a disc of radius r.
pub fn ball_volume(r: f64) -> f64 {
    2.0 * PI * (r.cosh() - 1.0)
}
