//! Spherical functions, the Selberg/Abel/Fourier transform triangle, the Helgason
//! transform and kernels of symbols on the disc.

use crate::error::{Error, Result};
use crate::geometry::{busemann, BoundaryPoint, DiscPoint, GroupElement};
use crate::quad::{for_each_node, gl, gl_composite, periodic_trapezoid};
use crate::special::harish_chandra_c;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::sync::Arc;

/// Selberg normalization matching the literal multiplier formula ρ = ∫ k φ_λ sinh t dt.
pub const SELBERG_NORM_UNIT: f64 = 1.0;
/// Selberg normalization that returns the eigenvalue of the radial operator.
pub const SELBERG_NORM_EIGEN: f64 = TAU;

/// Spectral density used when synthesizing kernels from multipliers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlancherelWeight {
    /// λ tanh(2πλ), with unit prefactors everywhere.
    PaperTanh2Pi,
    /// π λ tanh(πλ) = |c(λ)|⁻², normalized as the exact inverse of the
    /// eigenvalue-normalized Selberg transform.
    HarmonicTanhPi,
}

impl PlancherelWeight {
    pub fn eval(&self, lambda: f64) -> f64 {
        match self {
            Self::PaperTanh2Pi => lambda * (TAU * lambda).tanh(),
            Self::HarmonicTanhPi => PI * lambda * (PI * lambda).tanh(),
        }
    }

    /// Prefactor in front of ∫ ρ φ_λ w dλ.
    pub fn inverse_prefactor(&self) -> f64 {
        match self {
            Self::PaperTanh2Pi => 1.0,
            Self::HarmonicTanhPi => 1.0 / (2.0 * PI * PI),
        }
    }

    /// The Selberg normalization this variant is paired with.
    pub fn selberg_norm(&self) -> f64 {
        match self {
            Self::PaperTanh2Pi => SELBERG_NORM_UNIT,
            Self::HarmonicTanhPi => SELBERG_NORM_EIGEN,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::PaperTanh2Pi => "paper_tanh_2pi",
            Self::HarmonicTanhPi => "harmonic_tanh_pi",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "paper" | "paper_tanh_2pi" => Some(Self::PaperTanh2Pi),
            "harmonic" | "harmonic_tanh_pi" => Some(Self::HarmonicTanhPi),
            _ => None,
        }
    }
}

type Fn1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A kernel depending only on hyperbolic distance.
#[derive(Clone)]
pub struct RadialKernel {
    pub eval: Fn1,
    /// k vanishes beyond this distance (may be infinite).
    pub support_bound: f64,
    /// Points in (0, support_bound) where k is not smooth.
    pub breakpoints: Vec<f64>,
    pub label: String,
}

impl RadialKernel {
    pub fn new(label: &str, support_bound: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { eval: Arc::new(f), support_bound, breakpoints: Vec::new(), label: label.to_string() }
    }

    pub fn with_breakpoints(mut self, b: Vec<f64>) -> Self {
        self.breakpoints = b;
        self
    }

    pub fn at(&self, t: f64) -> f64 {
        if t > self.support_bound {
            0.0
        } else {
            (self.eval)(t)
        }
    }
}

/// An even function of the spectral parameter.
#[derive(Clone)]
pub struct SpectralMultiplier {
    pub eval: Fn1,
    pub support: (f64, f64),
    pub label: String,
}

impl SpectralMultiplier {
    pub fn new(label: &str, support: (f64, f64), f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { eval: Arc::new(f), support, label: label.to_string() }
    }

    pub fn at(&self, lambda: f64) -> f64 {
        let l = lambda.abs();
        if l < self.support.0 || l > self.support.1 {
            0.0
        } else {
            (self.eval)(l)
        }
    }

    /// Smooth bump exp(−1/(1−x²)) on [a, b], scaled to peak value one.
    pub fn bump(a: f64, b: f64) -> Self {
        Self::new(&format!("bump[{a},{b}]"), (a, b), move |l| smooth_bump(l, a, b))
    }
}

pub fn smooth_bump(x: f64, a: f64, b: f64) -> f64 {
    let y = (2.0 * x - (a + b)) / (b - a);
    if y.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - y * y)).exp()
    }
}

/// Even profile in the horocyclic variable u.
#[derive(Clone)]
pub struct AbelProfile {
    pub eval: Fn1,
    pub support_bound: f64,
    pub breakpoints: Vec<f64>,
}

impl AbelProfile {
    pub fn at(&self, u: f64) -> f64 {
        let u = u.abs();
        if u > self.support_bound {
            0.0
        } else {
            (self.eval)(u)
        }
    }
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + (-(a - b).abs()).exp().ln_1p()
}

/// Trapezoid sums of the boundary integral for φ_λ(t) after the conformal
/// reparametrization θ = 2 atan(e^v) of the boundary angle. Returns (real, imag).
fn phi_trapezoid(lambda: f64, t: f64, h: f64, offset: f64, lo: f64, hi: f64) -> (f64, f64) {
    let n = ((hi - lo) / h).ceil() as usize;
    let (mut re, mut im) = (0.0, 0.0);
    for k in 0..n {
        let v = lo + (k as f64 + offset) * h;
        if v > hi {
            break;
        }
        let l1 = log_add_exp(-t, t + 2.0 * v);
        let l2 = log_add_exp(0.0, 2.0 * v);
        let mag = (v - 0.5 * (l1 + l2)).exp();
        let (s, c) = (lambda * (l2 - l1)).sin_cos();
        re += mag * c;
        im += mag * s;
    }
    (re * h * 2.0 / PI, im * h * 2.0 / PI)
}

/// φ_λ(t) = (1/2π)∫_B e^{(1/2+iλ)⟨u,b⟩} db with |u| = tanh(t/2), and an error estimate.
pub fn spherical_phi_with_error(lambda: f64, t: f64) -> Result<(f64, f64)> {
    if !(0.0..=50.0).contains(&t) {
        return Err(Error::InvalidInput(format!("spherical_phi needs 0 ≤ t ≤ 50, got {t}")));
    }
    if t == 0.0 {
        return Ok((1.0, 0.0));
    }
    let (lo, hi) = (-t - 40.0, 40.0);
    let scale = (-0.5 * t).exp() * (1.0 + t);
    let mut h = 0.5;
    let (mut re, mut im) = phi_trapezoid(lambda, t, h, 0.0, lo, hi);
    let mut delta = f64::INFINITY;
    while h > 1.0 / 128.0 {
        let (mre, mim) = phi_trapezoid(lambda, t, h, 0.5, lo, hi);
        let (nre, nim) = (0.5 * (re + mre), 0.5 * (im + mim));
        h *= 0.5;
        delta = (nre - re).abs();
        re = nre;
        im = nim;
        if delta <= 1e-14 * scale {
            break;
        }
    }
    if delta > 1e-9 * scale {
        return Err(Error::QuadratureNotConverged { what: "spherical_phi", delta });
    }
    if im.abs() > 1e-10 * scale.max(1e-300) {
        return Err(Error::QuadratureNotConverged { what: "spherical_phi imaginary part", delta: im.abs() });
    }
    Ok((re, delta))
}

pub fn spherical_phi(lambda: f64, t: f64) -> Result<f64> {
    spherical_phi_with_error(lambda, t).map(|(v, _)| v)
}

/// Coefficients Γ_l(λ) of the large-t expansion, Γ_0 = 1, from the recursion
/// 4l(l − iλ)Γ_l = −2 Σ_{j<l} (iλ − 1/2 − 2j) Γ_j implied by the radial Laplace equation.
pub fn series_coefficients(lambda: f64, l_max: usize) -> Vec<Complex64> {
    let mut g = Vec::with_capacity(l_max + 1);
    g.push(Complex64::new(1.0, 0.0));
    let mut acc = Complex64::new(0.0, 0.0);
    for l in 1..=l_max {
        let j = l - 1;
        acc += g[j] * Complex64::new(-0.5 - 2.0 * j as f64, lambda);
        let lf = l as f64;
        let den = Complex64::new(4.0 * lf * lf, -4.0 * lf * lambda);
        g.push(-2.0 * acc / den);
    }
    g
}

/// Default lower limit of t for the series.
pub const SERIES_T_MIN: f64 = 0.5;

/// φ_λ(t) = 2 Re[c(λ) e^{(−1/2+iλ)t} Σ_{l≤l_max} Γ_l(λ) e^{−2lt}], with a tail estimate.
pub fn spherical_phi_series(lambda: f64, t: f64, l_max: usize) -> Result<(f64, f64)> {
    if t < SERIES_T_MIN {
        return Err(Error::InvalidInput(format!("series needs t ≥ {SERIES_T_MIN}, got {t}")));
    }
    let (c, _) = harish_chandra_c(lambda)?;
    let g = series_coefficients(lambda, l_max);
    let q = (-2.0 * t).exp();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut p = 1.0;
    for gl in &g {
        sum += gl * p;
        p *= q;
    }
    let lead = c * Complex64::new(-0.5 * t, lambda * t).exp();
    let value = 2.0 * (lead * sum).re;
    // |Γ_l| is bounded polynomially; bound the tail with the largest coefficient in the
    // upper half of the computed range and a factor ten of headroom.
    let gmax = g[l_max / 2..].iter().map(|z| z.norm()).fold(0.0, f64::max);
    let tail = 10.0 * 2.0 * lead.norm() * gmax * q.powi(l_max as i32 + 1) / (1.0 - q);
    if tail > 1e-8 {
        return Err(Error::SeriesDiverged { tail, l_max });
    }
    Ok((value, tail))
}

/// Selberg transform C∫₀^∞ k(t) φ_λ(t) sinh t dt. Infinite supports are cut at `t_cut`.
pub fn selberg_transform_cut(k: &RadialKernel, lambda: f64, norm: f64, t_cut: f64) -> Result<f64> {
    let end = k.support_bound.min(t_cut);
    if end <= 0.0 {
        return Ok(0.0);
    }
    let mut cuts = vec![0.0];
    cuts.extend(k.breakpoints.iter().copied().filter(|&b| b > 0.0 && b < end));
    cuts.push(end);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let mut err = None;
        let f = |t: f64| {
            let kv = k.at(t);
            if kv == 0.0 {
                return 0.0;
            }
            match spherical_phi(lambda, t) {
                Ok(p) => kv * p * t.sinh(),
                Err(e) => {
                    err = Some(e);
                    0.0
                }
            }
        };
        let panels_seed = ((w[1] - w[0]).ceil() as usize).max(1);
        let (val, _) = converge_panels(f, w[0], w[1], panels_seed, 16, 1e-14, 1e-11, "selberg_transform")?;
        if let Some(e) = err {
            return Err(e);
        }
        total += val;
    }
    Ok(norm * total)
}

/// Composite Gauss–Legendre starting from `panels`, doubling until stable.
pub fn converge_panels<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    panels: usize,
    order: usize,
    abs_tol: f64,
    rel_tol: f64,
    what: &'static str,
) -> Result<(f64, f64)> {
    let mut p = panels.max(1);
    let mut prev = gl_composite(&mut f, a, b, p, order);
    let mut delta = f64::INFINITY;
    while p < 1 << 12 {
        p *= 2;
        let next = gl_composite(&mut f, a, b, p, order);
        delta = (next - prev).abs();
        if delta <= abs_tol + rel_tol * next.abs() {
            return Ok((next, delta));
        }
        prev = next;
    }
    Err(Error::QuadratureNotConverged { what, delta })
}

/// Default truncation distance for kernels of infinite support.
pub const DEFAULT_T_CUT: f64 = 40.0;

pub fn selberg_transform(k: &RadialKernel, lambda: f64, norm: f64) -> Result<f64> {
    selberg_transform_cut(k, lambda, norm, DEFAULT_T_CUT)
}

/// Quadrature settings for synthesizing k_ρ from ρ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseOptions {
    pub panels: usize,
    pub order: usize,
}

impl Default for InverseOptions {
    fn default() -> Self {
        Self { panels: 16, order: 16 }
    }
}

/// k_ρ(t) = P_w ∫ ρ(λ) φ_λ(t) w(λ) dλ over supp ρ.
pub fn inverse_selberg_at(rho: &SpectralMultiplier, weight: PlancherelWeight, t: f64, opts: InverseOptions) -> Result<f64> {
    let (a, b) = rho.support;
    let mut acc = 0.0;
    let mut err = None;
    for_each_node(a, b, opts.panels, opts.order, |l, w| {
        if err.is_some() {
            return;
        }
        let r = rho.at(l);
        if r == 0.0 {
            return;
        }
        match spherical_phi(l, t) {
            Ok(p) => acc += w * r * p * weight.eval(l),
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(weight.inverse_prefactor() * acc)
}

/// Beyond this distance `inverse_selberg` sums the large-t series instead of the boundary integral.
pub const INVERSE_SERIES_T_MIN: f64 = 2.0;
const INVERSE_SERIES_TERMS: usize = 32;

/// As `inverse_selberg_at`, with c(λ) and Γ_l(λ) cached at every node so that t ≥ 2 costs
/// one short series per node.
pub fn inverse_selberg(rho: &SpectralMultiplier, weight: PlancherelWeight, opts: InverseOptions) -> RadialKernel {
    let mut nodes = Vec::new();
    for_each_node(rho.support.0, rho.support.1, opts.panels, opts.order, |l, w| {
        let r = rho.at(l);
        if r != 0.0 {
            let (c, _) = harish_chandra_c(l).expect("c-function at a positive λ");
            nodes.push((l, w * r * weight.eval(l), c, series_coefficients(l, INVERSE_SERIES_TERMS)));
        }
    });
    let pre = weight.inverse_prefactor();
    let rho = rho.clone();
    RadialKernel::new(&format!("k_{}", rho.label), f64::INFINITY, move |t| {
        if t < INVERSE_SERIES_T_MIN {
            return inverse_selberg_at(&rho, weight, t, opts).expect("spherical function quadrature");
        }
        let q = (-2.0 * t).exp();
        let acc: f64 = nodes
            .iter()
            .map(|(l, w, c, g)| {
                let sum = g.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, gl| acc * q + gl);
                w * 2.0 * (c * Complex64::new(-0.5 * t, l * t).exp() * sum).re
            })
            .sum();
        pre * acc
    })
}

/// Sharp Abel profile g_t^♯(u) = √(2/cosh t) · 2√(cosh t − cosh u).
pub fn abel_sharp(t: f64) -> AbelProfile {
    let pre = (2.0 / t.cosh()).sqrt();
    AbelProfile {
        eval: Arc::new(move |u: f64| {
            let u = u.abs();
            if u >= t {
                return 0.0;
            }
            let d = 2.0 * (0.5 * (t + u)).sinh() * (0.5 * (t - u)).sinh();
            pre * 2.0 * d.sqrt()
        }),
        support_bound: t,
        breakpoints: Vec::new(),
    }
}

/// Decreasing profile η with η = 1 on (−∞, −1] and η = 0 on [0, ∞).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Eta {
    /// 1 − s(x + 1) with the cubic smoothstep s(y) = 3y² − 2y³.
    CubicSmoothstep,
    /// 1 − s(x + 1) with the quintic smoothstep s(y) = 6y⁵ − 15y⁴ + 10y³.
    QuinticSmoothstep,
}

impl Eta {
    pub fn eval(&self, x: f64) -> f64 {
        if x <= -1.0 {
            return 1.0;
        }
        if x >= 0.0 {
            return 0.0;
        }
        let y = x + 1.0;
        let s = match self {
            Self::CubicSmoothstep => y * y * (3.0 - 2.0 * y),
            Self::QuinticSmoothstep => y * y * y * (10.0 + y * (-15.0 + 6.0 * y)),
        };
        1.0 - s
    }

    /// sup |η^{(j)}| for j = 1, 2.
    pub fn derivative_sup(&self, j: usize) -> f64 {
        match (self, j) {
            (_, 0) => 1.0,
            (Self::CubicSmoothstep, 1) => 1.5,
            (Self::CubicSmoothstep, 2) => 6.0,
            (Self::QuinticSmoothstep, 1) => 1.875,
            (Self::QuinticSmoothstep, 2) => 10.0 / 3f64.sqrt(),
            _ => f64::NAN,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::CubicSmoothstep => "cubic_smoothstep",
            Self::QuinticSmoothstep => "quintic_smoothstep",
        }
    }
}

/// χ_{t,σ}(r) = η((r − t)/σ).
pub fn chi_cutoff(eta: Eta, t: f64, sigma: f64, r: f64) -> f64 {
    eta.eval((r - t) / sigma)
}

/// ∫₀^{V} χ(r(v)) dv with cosh r(v) = cosh u + v², V = √(cosh t − cosh u).
fn smooth_abel_inner(eta: Eta, t: f64, sigma: f64, u: f64) -> f64 {
    let cu = u.cosh();
    let big_v = (2.0 * (0.5 * (t + u)).sinh() * (0.5 * (t - u)).sinh()).max(0.0).sqrt();
    let flat = t - sigma;
    let v0 = if u < flat {
        (2.0 * (0.5 * (flat + u)).sinh() * (0.5 * (flat - u)).sinh()).max(0.0).sqrt()
    } else {
        0.0
    };
    let chi_v = |v: f64| {
        let c = cu + v * v;
        let r = (c + ((c - 1.0) * (c + 1.0)).sqrt()).ln();
        chi_cutoff(eta, t, sigma, r)
    };
    v0 + gl_composite(chi_v, v0, big_v, 4, 24)
}

/// Smooth Abel profile g_{t,σ}(u) = √(2/cosh t) ∫_{|u|}^t χ_{t,σ}(r) sinh r / √(cosh r − cosh u) dr.
pub fn abel_smooth(t: f64, sigma: f64, eta: Eta) -> AbelProfile {
    let pre = (2.0 / t.cosh()).sqrt();
    AbelProfile {
        eval: Arc::new(move |u: f64| {
            let u = u.abs();
            if u >= t {
                return 0.0;
            }
            pre * 2.0 * smooth_abel_inner(eta, t, sigma, u)
        }),
        support_bound: t,
        breakpoints: if sigma < t { vec![t - sigma] } else { Vec::new() },
    }
}

/// h(λ) = ∫_ℝ e^{iλu} g(u) du = 2∫₀^S cos(λu) g(u) du.
pub fn fourier_of_abel(g: &AbelProfile, lambda: f64) -> Result<f64> {
    let s = g.support_bound;
    if s <= 0.0 {
        return Ok(0.0);
    }
    // The last stretch [s − δ, s] uses u = s − w² to absorb the square-root edge.
    let mut cuts = vec![0.0];
    cuts.extend(g.breakpoints.iter().copied().filter(|&b| b > 0.0 && b < s));
    let last = *cuts.last().unwrap();
    let edge = (s - last).min(1.0);
    if s - edge > last + 1e-12 {
        cuts.push(s - edge);
    }
    let abs_tol = 1e-14 * (1.0 + g.at(0.0).abs()) * s;
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let panels = ((w[1] - w[0]).ceil() as usize).max(1);
        let (v, _) = converge_panels(|u| (lambda * u).cos() * g.at(u), w[0], w[1], panels, 16, abs_tol, 1e-12, "fourier_of_abel")?;
        total += v;
    }
    let a = *cuts.last().unwrap();
    let wmax = (s - a).sqrt();
    let (v, _) = converge_panels(
        |w| {
            let u = s - w * w;
            2.0 * w * (lambda * u).cos() * g.at(u)
        },
        0.0,
        wmax,
        1,
        16,
        abs_tol,
        1e-12,
        "fourier_of_abel edge",
    )?;
    total += v;
    Ok(2.0 * total)
}

/// Mehler integral I_λ(r) = ∫₀^r cos(λu)/√(cosh r − cosh u) du, split at r − min(1, r/2) with
/// cosh u = cosh r − v² on the singular end.
pub fn mehler_integral(lambda: f64, r: f64) -> Result<f64> {
    if r <= 0.0 {
        return Ok(0.0);
    }
    let split = if r <= 2.0 { 0.5 * r } else { r - 1.0 };
    let inv = |u: f64| {
        let d = 2.0 * (0.5 * (r + u)).sinh() * (0.5 * (r - u)).sinh();
        (lambda * u).cos() / d.sqrt()
    };
    let panels = (split.ceil() as usize).max(1);
    let scale = 1e-14 * (-0.5 * r).exp();
    let (a, _) = converge_panels(inv, 0.0, split, panels, 16, scale, 1e-12, "mehler regular part")?;
    let vmax = (2.0 * (0.5 * (r + split)).sinh() * (0.5 * (r - split)).sinh()).sqrt();
    let cr = r.cosh();
    let sing = |v: f64| {
        let c = cr - v * v;
        let u = (c + ((c - 1.0) * (c + 1.0)).max(0.0).sqrt()).ln();
        2.0 * (lambda * u).cos() / u.sinh()
    };
    let (b, _) = converge_panels(sing, 0.0, vmax, 1, 16, scale, 1e-12, "mehler singular part")?;
    Ok(a + b)
}

/// A complete symbol a(z, λ, b) with compact λ-support.
#[derive(Clone)]
pub struct Symbol {
    pub eval: Arc<dyn Fn(&DiscPoint, f64, &BoundaryPoint) -> Complex64 + Send + Sync>,
    pub lambda_support: (f64, f64),
    pub label: String,
}

impl Symbol {
    pub fn new(
        label: &str,
        lambda_support: (f64, f64),
        f: impl Fn(&DiscPoint, f64, &BoundaryPoint) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self { eval: Arc::new(f), lambda_support, label: label.to_string() }
    }

    /// Symbol depending on λ only.
    pub fn radial(rho: &SpectralMultiplier) -> Self {
        let r = rho.clone();
        Self::new(&rho.label, rho.support, move |_, l, _| Complex64::new(r.at(l), 0.0))
    }

    pub fn at(&self, z: &DiscPoint, lambda: f64, b: &BoundaryPoint) -> Complex64 {
        (self.eval)(z, lambda, b)
    }
}

/// Quadrature settings for boundary and spectral integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelOptions {
    pub boundary_nodes: usize,
    pub lambda_panels: usize,
    pub lambda_order: usize,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self { boundary_nodes: 1024, lambda_panels: 8, lambda_order: 16 }
    }
}

/// K_a(z, w) = (P_w/2π) ∬ a(z,λ,b) e^{(1/2+iλ)⟨z,b⟩} e^{(1/2−iλ)⟨w,b⟩} w(λ) db dλ.
pub fn kernel_from_symbol(a: &Symbol, weight: PlancherelWeight, z: &DiscPoint, w: &DiscPoint, opts: KernelOptions) -> Complex64 {
    let (lo, hi) = a.lambda_support;
    let mut acc = Complex64::new(0.0, 0.0);
    let n = opts.boundary_nodes;
    let bz: Vec<(BoundaryPoint, f64, f64)> = (0..n)
        .map(|k| {
            let b = BoundaryPoint::new(TAU * k as f64 / n as f64);
            (b, busemann(z, &b), busemann(w, &b))
        })
        .collect();
    for_each_node(lo, hi, opts.lambda_panels, opts.lambda_order, |l, wl| {
        let mut inner = Complex64::new(0.0, 0.0);
        for (b, pz, pw) in &bz {
            let av = a.at(z, l, b);
            if av == Complex64::new(0.0, 0.0) {
                continue;
            }
            let e = Complex64::new(0.5 * (pz + pw), l * (pz - pw)).exp();
            inner += av * e;
        }
        acc += inner * (TAU / n as f64) * wl * weight.eval(l);
    });
    acc * weight.inverse_prefactor() / TAU
}

/// Helgason transform û(λ, b) = ∫ e^{(1/2−iλ)⟨z,b⟩} u(z) dμ(z) for u supported in |z| ≤ r_max.
pub fn helgason_forward<U: Fn(&DiscPoint) -> f64>(
    u: U,
    r_max: f64,
    lambda: f64,
    b: &BoundaryPoint,
    radial_panels: usize,
    angular_nodes: usize,
) -> Result<Complex64> {
    if !(r_max <= 0.95) {
        return Err(Error::InvalidInput(format!("support radius {r_max} exceeds 0.95")));
    }
    let s = Complex64::new(0.5, -lambda);
    let mut acc = Complex64::new(0.0, 0.0);
    for_each_node(0.0, r_max, radial_panels, 16, |rho, wr| {
        let dens = 4.0 * rho / (1.0 - rho * rho).powi(2);
        let ring: Complex64 = periodic_trapezoid(
            |th| {
                let z = DiscPoint { re: rho * th.cos(), im: rho * th.sin() };
                let uv = u(&z);
                if uv == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                (s * busemann(&z, b)).exp() * uv
            },
            angular_nodes,
        );
        acc += ring * wr * dens;
    });
    Ok(acc)
}

/// Helgason transform with node doubling in both directions until the change is below `tol`.
pub fn helgason_forward_converged<U: Fn(&DiscPoint) -> f64>(
    u: U,
    r_max: f64,
    lambda: f64,
    b: &BoundaryPoint,
    tol: f64,
) -> Result<Complex64> {
    let (mut p, mut n) = (4usize, 128usize);
    let mut prev = helgason_forward(&u, r_max, lambda, b, p, n)?;
    let mut delta = f64::INFINITY;
    while p <= 256 {
        p *= 2;
        n *= 2;
        let next = helgason_forward(&u, r_max, lambda, b, p, n)?;
        delta = (next - prev).norm();
        if delta <= tol * next.norm().max(1.0) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::QuadratureNotConverged { what: "helgason_forward", delta })
}

/// (P_w/2π) ∭ |a|² e^{⟨z,b⟩} w(λ) dμ(z) db dλ with z ranging over the hyperbolic ball of
/// radius `z_radius` about the origin.
pub fn hs_norm_disc(a: &Symbol, weight: PlancherelWeight, z_radius: f64, opts: KernelOptions, z_panels: usize, z_angular: usize) -> f64 {
    let (lo, hi) = a.lambda_support;
    let nb = opts.boundary_nodes;
    let mut total = 0.0;
    for_each_node(0.0, z_radius, z_panels, 8, |t, wt| {
        let ring = periodic_trapezoid(
            |phi| {
                let z = DiscPoint::polar(t, phi);
                let mut acc = 0.0;
                for_each_node(lo, hi, opts.lambda_panels, opts.lambda_order, |l, wl| {
                    let inner: f64 = periodic_trapezoid(
                        |th| {
                            let b = BoundaryPoint::new(th);
                            a.at(&z, l, &b).norm_sqr() * busemann(&z, &b).exp()
                        },
                        nb,
                    );
                    acc += inner * wl * weight.eval(l);
                });
                acc
            },
            z_angular,
        );
        total += ring * t.sinh() * wt;
    });
    total * weight.inverse_prefactor() / TAU
}

/// ∫_𝔻 |k(d(0,w))|² dμ(w) = 2π ∫₀^cut |k(t)|² sinh t dt.
pub fn radial_l2_norm_sqr(k: &RadialKernel, t_cut: f64, panels: usize) -> f64 {
    let end = k.support_bound.min(t_cut);
    TAU * gl_composite(|t| k.at(t).powi(2) * t.sinh(), 0.0, end, panels, 16)
}

/// Max deviation of a kernel from radiality: |K(z, w) − K(g z, g w)| over a few isometries.
pub fn anisotropy<K: Fn(&DiscPoint, &DiscPoint) -> Complex64>(kernel: K, z: &DiscPoint, w: &DiscPoint, moves: &[GroupElement]) -> f64 {
    let base = kernel(z, w);
    moves
        .iter()
        .map(|g| (kernel(&g.apply(z), &g.apply(w)) - base).norm())
        .fold(0.0, f64::max)
}

/// Sup over t ∈ [t0, t1] (sampled every `dt`) of |k(t)| e^{t/2} (1 + t)^N.
pub fn decay_sup(k: impl Fn(f64) -> f64, t0: f64, t1: f64, dt: f64, n_pow: i32) -> f64 {
    let n = ((t1 - t0) / dt).round() as usize;
    (0..=n)
        .map(|i| {
            let t = t0 + i as f64 * dt;
            k(t).abs() * (0.5 * t).exp() * (1.0 + t).powi(n_pow)
        })
        .fold(0.0, f64::max)
}

/// Distance beyond which C e^{−t/2}(1+t)^{−N} < `floor`, given the fitted constant C.
pub fn decay_truncation(c: f64, n_pow: i32, floor: f64, cap: f64) -> f64 {
    let mut t = 1.0;
    while t < cap {
        if c * (-0.5 * t).exp() * (1.0 + t).powi(-n_pow) < floor {
            return t;
        }
        t += 0.25;
    }
    cap
}

/// λ-independent piece of a single boundary integral, used for quick sanity checks.
pub fn poisson_mass(z: &DiscPoint, nodes: usize) -> f64 {
    periodic_trapezoid(|th| busemann(z, &BoundaryPoint::new(th)).exp(), nodes)
}

/// ∫ f over [a, b] with one Gauss panel of order `n` (re-export for dependents).
pub fn gl_panel<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    gl(f, a, b, n)
}
