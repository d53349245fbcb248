use crate::error::{Error, Result};
use hqe_core::geometry::{hyp_distance, BoundaryPoint, DiscPoint, GroupElement};
use hqe_core::quad::gauss_legendre;
use hqe_core::transforms::RadialKernel;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

pub type ScalarField = Arc<dyn Fn(&DiscPoint) -> f64 + Send + Sync>;
pub type PairField = Arc<dyn Fn(&DiscPoint, &DiscPoint) -> f64 + Send + Sync>;
pub type TestFunction = Arc<dyn Fn(&DiscPoint) -> Complex64 + Send + Sync>;

/// Finite-difference step for operator action (fourth-order stencils), relative to 1 − |z|².
pub const FD_STEP: f64 = 1e-3;
/// Finite-difference step for gradient and Hessian norms, relative to 1 − |z|².
pub const NORM_STEP: f64 = 1e-3;
/// Stencils must stay inside |z| < 1 − STENCIL_MARGIN.
pub const STENCIL_MARGIN: f64 = 1e-6;

/// (C, S, k) with |Au(x)| ≤ C‖u‖_{C^k(B(x,S))}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalityConstants {
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "S")]
    pub s: f64,
    pub k: usize,
}

/// A u = a0 u + a1·∇u + a2 Δu, with ∇ in an orthonormal frame of the hyperbolic metric.
#[derive(Clone)]
pub struct DiffCoefficients {
    pub a0: ScalarField,
    pub a1: [ScalarField; 2],
    pub a2: ScalarField,
}

#[derive(Clone)]
pub enum Variant {
    Multiplication(ScalarField),
    FiniteRange { kernel: PairField, range: f64, radial: Option<RadialKernel> },
    Differential { order: usize, coefficients: DiffCoefficients },
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Multiplication(_) => "multiplication",
            Self::FiniteRange { .. } => "finite_range",
            Self::Differential { .. } => "differential",
        }
    }
}

/// Polar product rule on a hyperbolic ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallQuadrature {
    pub panels: usize,
    pub order: usize,
    pub angular: usize,
}

impl Default for BallQuadrature {
    fn default() -> Self {
        Self { panels: 8, order: 12, angular: 64 }
    }
}

impl BallQuadrature {
    pub fn refined(&self) -> Self {
        Self { panels: 2 * self.panels, order: self.order, angular: 2 * self.angular }
    }

    /// Nodes (x, ρ, weight) of ∫_{B(center, radius)} f dμ, split at `breaks` in ρ.
    pub fn nodes(&self, center: &DiscPoint, radius: f64, breaks: &[f64]) -> Vec<(DiscPoint, f64, f64)> {
        let g = GroupElement::boost_to(center);
        let rule = gauss_legendre(self.order);
        let mut cuts = vec![0.0];
        cuts.extend(breaks.iter().copied().filter(|&b| b > 0.0 && b < radius));
        cuts.push(radius);
        let mut out = Vec::with_capacity(self.panels * self.order * self.angular * cuts.len());
        let dphi = TAU / self.angular as f64;
        for seg in cuts.windows(2) {
            let h = (seg[1] - seg[0]) / self.panels as f64;
            for p in 0..self.panels {
                let c = seg[0] + (p as f64 + 0.5) * h;
                for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                    let rho = c + 0.5 * h * x;
                    let wr = 0.5 * h * w * rho.sinh() * dphi;
                    for j in 0..self.angular {
                        let x = g.apply(&DiscPoint::polar(rho, (j as f64 + 0.5) * dphi));
                        out.push((x, rho, wr));
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone)]
pub struct Observable {
    pub label: String,
    pub variant: Variant,
    pub constants: LocalityConstants,
    pub quadrature: BallQuadrature,
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Observable")
            .field("label", &self.label)
            .field("variant", &self.variant.name())
            .field("constants", &self.constants)
            .finish()
    }
}

/// Chart derivatives of u at z.
#[derive(Debug, Clone, Copy)]
pub struct Jet {
    pub u: Complex64,
    pub ux: Complex64,
    pub uy: Complex64,
    pub uxx: Complex64,
    pub uyy: Complex64,
    pub uxy: Complex64,
}

/// Centered differences on the Euclidean chart with step `rel_step·(1 − |z|²)`. `fourth` selects
/// fourth-order stencils for the first and pure second derivatives; the mixed one stays second order.
pub fn chart_jet(u: &dyn Fn(&DiscPoint) -> Complex64, z: &DiscPoint, rel_step: f64, second: bool, fourth: bool) -> Result<Jet> {
    let h = rel_step * z.one_minus_norm_sqr();
    let reach = z.norm_sqr().sqrt() + if fourth { 2.0 } else { std::f64::consts::SQRT_2 } * h;
    if !(reach < 1.0 - STENCIL_MARGIN) {
        return Err(Error::StencilOutOfDomain { radius: z.norm_sqr().sqrt(), step: h });
    }
    let at = |dx: f64, dy: f64| u(&DiscPoint { re: z.re + dx * h, im: z.im + dy * h });
    let u0 = u(z);
    let (xp, xm, yp, ym) = (at(1.0, 0.0), at(-1.0, 0.0), at(0.0, 1.0), at(0.0, -1.0));
    let zero = Complex64::new(0.0, 0.0);
    let h2 = h * h;
    let (mut ux, mut uy) = ((xp - xm) / (2.0 * h), (yp - ym) / (2.0 * h));
    let (mut uxx, mut uyy) = if second { ((xp - 2.0 * u0 + xm) / h2, (yp - 2.0 * u0 + ym) / h2) } else { (zero, zero) };
    if fourth {
        let (xp2, xm2, yp2, ym2) = (at(2.0, 0.0), at(-2.0, 0.0), at(0.0, 2.0), at(0.0, -2.0));
        ux = (8.0 * (xp - xm) - (xp2 - xm2)) / (12.0 * h);
        uy = (8.0 * (yp - ym) - (yp2 - ym2)) / (12.0 * h);
        if second {
            uxx = (16.0 * (xp + xm) - (xp2 + xm2) - 30.0 * u0) / (12.0 * h2);
            uyy = (16.0 * (yp + ym) - (yp2 + ym2) - 30.0 * u0) / (12.0 * h2);
        }
    }
    let uxy = if second && !fourth { (at(1.0, 1.0) - at(1.0, -1.0) - at(-1.0, 1.0) + at(-1.0, -1.0)) / (4.0 * h2) } else { zero };
    Ok(Jet { u: u0, ux, uy, uxx, uyy, uxy })
}

/// Pointwise (|u|, |∇u|, ‖Hess u‖_F) in the hyperbolic metric.
pub fn metric_seminorms(u: &dyn Fn(&DiscPoint) -> Complex64, z: &DiscPoint, k: usize) -> Result<[f64; 3]> {
    if k == 0 {
        return Ok([u(z).norm(), 0.0, 0.0]);
    }
    let j = chart_jet(u, z, NORM_STEP, k >= 2, false)?;
    let q = z.one_minus_norm_sqr();
    let grad = 0.5 * q * (j.ux.norm_sqr() + j.uy.norm_sqr()).sqrt();
    if k == 1 {
        return Ok([j.u.norm(), grad, 0.0]);
    }
    // g = e^{2ω}δ with ω = ln 2 − ln(1 − |z|²).
    let (wx, wy) = (2.0 * z.re / q, 2.0 * z.im / q);
    let hxx = j.uxx - wx * j.ux + wy * j.uy;
    let hyy = j.uyy - wy * j.uy + wx * j.ux;
    let hxy = j.uxy - wy * j.ux - wx * j.uy;
    let hess = 0.25 * q * q * (hxx.norm_sqr() + hyy.norm_sqr() + 2.0 * hxy.norm_sqr()).sqrt();
    Ok([j.u.norm(), grad, hess])
}

/// ‖u‖_{C^k(B(x,S))} = Σ_{j≤k} sup_B |∇^j u|, with the sup taken on a polar grid.
pub fn ck_norm(u: &dyn Fn(&DiscPoint) -> Complex64, x: &DiscPoint, s: f64, k: usize) -> Result<f64> {
    let mut sup = metric_seminorms(u, x, k)?;
    if s > 0.0 {
        let g = GroupElement::boost_to(x);
        for i in 1..=8 {
            for j in 0..16 {
                let y = g.apply(&DiscPoint::polar(s * i as f64 / 8.0, TAU * j as f64 / 16.0));
                let v = metric_seminorms(u, &y, k)?;
                for m in 0..3 {
                    sup[m] = sup[m].max(v[m]);
                }
            }
        }
    }
    Ok(sup.iter().sum())
}

impl Observable {
    pub fn new(label: &str, variant: Variant, constants: LocalityConstants) -> Result<Self> {
        match &variant {
            Variant::FiniteRange { range, .. } if !(*range > 0.0) => {
                return Err(Error::InvalidInput(format!("finite range must be positive, got {range}")));
            }
            Variant::Differential { order, .. } if *order > 2 => {
                return Err(Error::InvalidInput(format!("differential order must be at most 2, got {order}")));
            }
            _ => {}
        }
        if !(constants.c >= 0.0 && constants.s >= 0.0) {
            return Err(Error::InvalidInput("locality constants must be nonnegative".into()));
        }
        Ok(Self { label: label.to_string(), variant, constants, quadrature: BallQuadrature::default() })
    }

    pub fn with_quadrature(mut self, q: BallQuadrature) -> Self {
        self.quadrature = q;
        self
    }

    /// Propagation range: the kernel vanishes for d(z, w) > range().
    pub fn range(&self) -> f64 {
        match &self.variant {
            Variant::FiniteRange { range, .. } => *range,
            _ => 0.0,
        }
    }

    /// (A u)(z).
    pub fn apply(&self, u: &dyn Fn(&DiscPoint) -> Complex64, z: &DiscPoint) -> Result<Complex64> {
        let v = match &self.variant {
            Variant::Multiplication(a) => a(z) * u(z),
            Variant::FiniteRange { kernel, range, radial } => {
                let breaks = radial.as_ref().map(|k| k.breakpoints.clone()).unwrap_or_default();
                self.quadrature
                    .nodes(z, *range, &breaks)
                    .iter()
                    .map(|(y, _, w)| kernel(z, y) * u(y) * *w)
                    .sum()
            }
            Variant::Differential { order, coefficients: c } => {
                let j = chart_jet(u, z, FD_STEP, *order >= 2, true)?;
                let q = z.one_minus_norm_sqr();
                let mut v = c.a0.as_ref()(z) * j.u;
                if *order >= 1 {
                    v += 0.5 * q * (c.a1[0].as_ref()(z) * j.ux + c.a1[1].as_ref()(z) * j.uy);
                }
                if *order >= 2 {
                    v += c.a2.as_ref()(z) * 0.25 * q * q * (j.uxx + j.uyy);
                }
                v
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::InvalidInput(format!("{} is not finite at ({}, {})", self.label, z.re, z.im)))
        }
    }

    /// Kernel K_A(z, w) for finite-range observables.
    pub fn kernel(&self) -> Option<&PairField> {
        match &self.variant {
            Variant::FiniteRange { kernel, .. } => Some(kernel),
            _ => None,
        }
    }
}

/// Plane wave e^{(1/2+iλ)⟨z,b⟩}.
pub fn plane_wave(lambda: f64, b: BoundaryPoint) -> TestFunction {
    Arc::new(move |z: &DiscPoint| (Complex64::new(0.5, lambda) * hqe_core::geometry::busemann(z, &b)).exp())
}

/// Twenty smooth test functions for the locality check.
pub fn locality_panel() -> Vec<(String, TestFunction)> {
    let mut out: Vec<(String, TestFunction)> = vec![("one".into(), Arc::new(|_| Complex64::new(1.0, 0.0)))];
    for (i, &l) in [0.5, 1.0, 2.0].iter().enumerate() {
        for (j, &ang) in [0.3, 2.5].iter().enumerate() {
            out.push((format!("plane_wave_{i}_{j}"), plane_wave(l, BoundaryPoint::new(ang))));
        }
    }
    for m in 1..=4 {
        out.push((format!("re_z^{m}"), Arc::new(move |z: &DiscPoint| Complex64::new(z.z().powi(m).re, 0.0))));
    }
    let centers = [(0.0, 0.0), (0.3, -0.2), (-0.4, 0.1), (0.1, 0.5)];
    for (i, &(x, y)) in centers.iter().enumerate() {
        let p = DiscPoint { re: x, im: y };
        out.push((format!("gaussian_{i}"), Arc::new(move |z: &DiscPoint| Complex64::new((-hyp_distance(z, &p).powi(2)).exp(), 0.0))));
    }
    for k in 1..=5 {
        let p = DiscPoint { re: 0.2 * (k as f64 - 3.0), im: 0.1 };
        out.push((
            format!("cos_distance_{k}"),
            Arc::new(move |z: &DiscPoint| Complex64::new((k as f64 * hyp_distance(z, &p)).cos(), 0.0)),
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalityReport {
    pub label: String,
    pub declared: LocalityConstants,
    pub max_ratio: f64,
    pub worst_function: String,
    pub n_checks: usize,
    pub pass: bool,
}

/// Measures max |Au(x)|/‖u‖_{C^k(B(x,S))} over the panel and points.
pub fn verify_locality(a: &Observable, panel: &[(String, TestFunction)], points: &[DiscPoint]) -> Result<LocalityReport> {
    let LocalityConstants { c, s, k } = a.constants;
    let (mut max_ratio, mut worst, mut n) = (0.0f64, String::new(), 0usize);
    for (name, u) in panel {
        for x in points {
            let num = a.apply(u.as_ref(), x)?.norm();
            let den = ck_norm(u.as_ref(), x, s, k)?;
            n += 1;
            let ratio = if den > 0.0 { num / den } else if num > 0.0 { f64::INFINITY } else { 0.0 };
            if ratio > max_ratio {
                max_ratio = ratio;
                worst = name.clone();
            }
        }
    }
    Ok(LocalityReport { label: a.label.clone(), declared: a.constants, max_ratio, worst_function: worst, n_checks: n, pass: max_ratio <= c })
}
