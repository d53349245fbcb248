use crate::error::{Error, Result};
use crate::observable::{plane_wave, Observable};
use hqe_core::geometry::{busemann, BoundaryPoint, DiscPoint, GroupElement};
use hqe_core::propagators::lambda_grid;
use hqe_core::quad::periodic_trapezoid;
use hqe_fuchsian::domain::FundamentalDomain;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::sync::Arc;

pub use hqe_core::transforms::Symbol;

/// θ-derivative step for symbols.
pub const THETA_STEP: f64 = 1e-4;

/// a(z, λ, b) = e^{−(1/2+iλ)⟨z,b⟩}·(A e^{(1/2+iλ)⟨·,b⟩})(z).
pub fn complete_symbol(a: &Observable, z: &DiscPoint, lambda: f64, b: &BoundaryPoint) -> Result<Complex64> {
    let wave = plane_wave(lambda, *b);
    let v = a.apply(wave.as_ref(), z)?;
    Ok(v * (-Complex64::new(0.5, lambda) * busemann(z, b)).exp())
}

/// The complete symbol as a callable; evaluation failures surface as NaN.
pub fn symbol_of(a: &Observable, lambda_support: (f64, f64)) -> Symbol {
    let obs = a.clone();
    Symbol::new(&format!("symbol({})", a.label), lambda_support, move |z, l, b| {
        complete_symbol(&obs, z, l, b).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    })
}

/// b(θ; z): endpoint of the geodesic leaving z in direction θ.
pub fn boundary_at_angle(z: &DiscPoint, theta: f64) -> BoundaryPoint {
    GroupElement::boost_to(z).apply_boundary(&BoundaryPoint::new(theta))
}

/// θ(b; z), the inverse of `boundary_at_angle`.
pub fn angle_of_boundary(z: &DiscPoint, b: &BoundaryPoint) -> f64 {
    GroupElement::boost_to(z).inverse().apply_boundary(b).angle
}

pub struct AngularDecomposition {
    pub mean: Complex64,
    pub zero_mean_part: Arc<dyn Fn(f64) -> Complex64 + Send + Sync>,
    /// Trapezoid nodes used for the mean.
    pub nodes: usize,
}

const ANGULAR_START: usize = 16;
const ANGULAR_MAX: usize = 1 << 14;

/// mean = (1/2π)∫a(z, λ, b(θ)) dθ by periodic trapezoid, doubled until stable.
pub fn angular_decompose(a: &Symbol, z: &DiscPoint, lambda: f64) -> Result<AngularDecomposition> {
    let f = |th: f64| a.at(z, lambda, &boundary_at_angle(z, th));
    let mut n = ANGULAR_START;
    let mut prev = periodic_trapezoid(f, n) / TAU;
    loop {
        n *= 2;
        let next = periodic_trapezoid(f, n) / TAU;
        let delta = (next - prev).norm();
        if !next.is_finite() {
            return Err(Error::Core(hqe_core::Error::QuadratureNotConverged { what: "angular mean", delta: f64::NAN }));
        }
        if delta <= 1e-12 * (1.0 + next.norm()) {
            let (sym, z) = (a.clone(), *z);
            return Ok(AngularDecomposition {
                mean: next,
                zero_mean_part: Arc::new(move |th| sym.at(&z, lambda, &boundary_at_angle(&z, th)) - next),
                nodes: n,
            });
        }
        if n >= ANGULAR_MAX {
            return Err(Error::Core(hqe_core::Error::QuadratureNotConverged { what: "angular mean", delta }));
        }
        prev = next;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A1Report {
    pub max_abs_mean: f64,
    pub tolerance: f64,
    pub holds: bool,
}

/// Condition (A1): the angular mean vanishes at every sampled (z, λ).
pub fn check_a1(a: &Symbol, points: &[DiscPoint], lambdas: &[f64], tolerance: f64) -> Result<A1Report> {
    let mut worst = 0.0f64;
    for z in points {
        for &l in lambdas {
            worst = worst.max(angular_decompose(a, z, l)?.mean.norm());
        }
    }
    Ok(A1Report { max_abs_mean: worst, tolerance, holds: worst <= tolerance })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaNormEstimate {
    /// sup over the λ-grid of the mean of |∂²_θ a_λ|² over the region × circle.
    pub value: f64,
    pub std_err: f64,
    pub lambda_at_sup: f64,
    pub n_samples: usize,
}

fn d2_theta(a: &Symbol, z: &DiscPoint, lambda: f64, th: f64) -> Complex64 {
    let h = THETA_STEP;
    let f = |k: f64| a.at(z, lambda, &boundary_at_angle(z, th + k * h));
    (-f(2.0) + 16.0 * f(1.0) - 30.0 * f(0.0) + 16.0 * f(-1.0) - f(-2.0)) / (12.0 * h * h)
}

/// sup_{λ ∈ I'} of the volume-normalized ‖∂²_θ a_λ‖²₂ over the unit tangent bundle of the region.
pub fn theta_second_derivative_norm(
    a: &Symbol,
    interval: (f64, f64),
    lambda_step: f64,
    domain: &FundamentalDomain,
    n_samples: usize,
    seed: u64,
) -> Result<ThetaNormEstimate> {
    if n_samples < 2 {
        return Err(Error::InvalidInput("need at least two samples".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<(DiscPoint, f64)> = (0..n_samples).map(|_| (domain.sample(&mut rng), rng.random::<f64>() * TAU)).collect();
    let mut best = ThetaNormEstimate { value: 0.0, std_err: 0.0, lambda_at_sup: interval.0, n_samples };
    for l in lambda_grid(interval.0, interval.1, lambda_step) {
        let vals: Vec<f64> = samples.iter().map(|(z, th)| d2_theta(a, z, l, *th).norm_sqr()).collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        if !mean.is_finite() {
            return Err(Error::Core(hqe_core::Error::QuadratureNotConverged { what: "θ second derivative", delta: f64::NAN }));
        }
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        if mean > best.value || l == interval.0 {
            best = ThetaNormEstimate { value: mean, std_err: (var / n).sqrt(), lambda_at_sup: l, n_samples };
        }
    }
    Ok(best)
}
