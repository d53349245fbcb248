use crate::error::{Error, Result};
use crate::observable::{DiffCoefficients, LocalityConstants, Observable, ScalarField, Variant};
use hqe_core::geometry::{hyp_distance, DiscPoint};
use hqe_core::quad::gl_composite;
use hqe_core::transforms::RadialKernel;
use hqe_fuchsian::domain::FundamentalDomain;
use hqe_fuchsian::group::FuchsianGroup;
use hqe_fuchsian::orbit::{orbit_enumerate, OrbitCache};
use serde::{Deserialize, Serialize};
use std::f64::consts::{SQRT_2, TAU};
use std::sync::Arc;

/// Relative headroom added to computed locality constants.
pub const DECLARED_SLACK: f64 = 1e-6;

/// Extra distance beyond the fundamental region where periodized fields stay defined.
pub const REGION_MARGIN: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum PresetParameters {
    /// a ≡ value.
    Constant { value: f64 },
    /// a(z) = Σ_γ ψ(d(z, γc)) with ψ(d) = amplitude·(1 − (d/radius)²)³, optionally minus its mean.
    PeriodicBump { center: [f64; 2], radius: f64, amplitude: f64, mean_zero: bool },
    /// K(z, w) = amplitude·(1 − (d/range)²)³ for d(z, w) < range.
    RadialBumpKernel { range: f64, amplitude: f64 },
    /// A = −coefficient·Δ.
    Laplacian { coefficient: f64 },
    /// A = ∇ along the chart direction e^{i·angle}.
    Derivative { angle: f64 },
}

impl PresetParameters {
    pub fn variant(&self) -> &'static str {
        match self {
            Self::Constant { .. } | Self::PeriodicBump { .. } => "multiplication",
            Self::RadialBumpKernel { .. } => "finite_range",
            Self::Laplacian { .. } | Self::Derivative { .. } => "differential",
        }
    }
}

/// JSON form {variant, parameters, declared_constants}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservablePreset {
    pub variant: String,
    pub parameters: PresetParameters,
    #[serde(default)]
    pub declared_constants: Option<LocalityConstants>,
}

pub fn bump_profile(d: f64, radius: f64) -> f64 {
    if d >= radius {
        0.0
    } else {
        let x = 1.0 - (d / radius).powi(2);
        x * x * x
    }
}

/// 2π ∫_0^radius (1 − (t/radius)²)³ sinh t dt.
pub fn bump_mass(radius: f64) -> f64 {
    TAU * gl_composite(|t| bump_profile(t, radius) * t.sinh(), 0.0, radius, 8, 16)
}

fn slack(c: f64) -> f64 {
    c * (1.0 + DECLARED_SLACK)
}

impl ObservablePreset {
    pub fn new(parameters: PresetParameters) -> Self {
        Self { variant: parameters.variant().to_string(), parameters, declared_constants: None }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidInput(format!("observable preset: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("preset serializes")
    }

    /// Builds the observable; periodized shapes need the group.
    pub fn build(&self, group: Option<&FuchsianGroup>) -> Result<Observable> {
        if self.variant != self.parameters.variant() {
            return Err(Error::InvalidInput(format!(
                "variant {} does not match shape {}",
                self.variant,
                self.parameters.variant()
            )));
        }
        let (label, variant, computed) = match self.parameters {
            PresetParameters::Constant { value } => {
                let a: ScalarField = Arc::new(move |_| value);
                ("constant".to_string(), Variant::Multiplication(a), LocalityConstants { c: value.abs(), s: 0.0, k: 0 })
            }
            PresetParameters::PeriodicBump { center, radius, amplitude, mean_zero } => {
                let group = group.ok_or_else(|| Error::InvalidInput("periodic_bump needs a group".into()))?;
                periodic_bump(group, DiscPoint::new(center[0], center[1])?, radius, amplitude, mean_zero)?
            }
            PresetParameters::RadialBumpKernel { range, amplitude } => {
                if !(range > 0.0) {
                    return Err(Error::InvalidInput(format!("range must be positive, got {range}")));
                }
                let k = RadialKernel::new("radial_bump", range, move |d| amplitude * bump_profile(d, range));
                let kernel = Arc::new(move |z: &DiscPoint, w: &DiscPoint| amplitude * bump_profile(hyp_distance(z, w), range));
                let c = amplitude.abs() * bump_mass(range);
                (
                    "radial_bump_kernel".to_string(),
                    Variant::FiniteRange { kernel, range, radial: Some(k) },
                    LocalityConstants { c, s: range, k: 0 },
                )
            }
            PresetParameters::Laplacian { coefficient } => {
                let zero: ScalarField = Arc::new(|_| 0.0);
                let c = DiffCoefficients { a0: zero.clone(), a1: [zero.clone(), zero], a2: Arc::new(move |_| -coefficient) };
                (
                    "laplacian".to_string(),
                    Variant::Differential { order: 2, coefficients: c },
                    LocalityConstants { c: SQRT_2 * coefficient.abs(), s: 0.0, k: 2 },
                )
            }
            PresetParameters::Derivative { angle } => {
                let zero: ScalarField = Arc::new(|_| 0.0);
                let (s, c) = angle.sin_cos();
                let coef = DiffCoefficients { a0: zero.clone(), a1: [Arc::new(move |_| c), Arc::new(move |_| s)], a2: zero };
                (
                    "derivative".to_string(),
                    Variant::Differential { order: 1, coefficients: coef },
                    LocalityConstants { c: 1.0, s: 0.0, k: 1 },
                )
            }
        };
        let computed = LocalityConstants { c: slack(computed.c), ..computed };
        let constants = self.declared_constants.unwrap_or(computed);
        Observable::new(&label, variant, constants)
    }
}

fn periodic_bump(
    group: &FuchsianGroup,
    center: DiscPoint,
    radius: f64,
    amplitude: f64,
    mean_zero: bool,
) -> Result<(String, Variant, LocalityConstants)> {
    if !(radius > 0.0) {
        return Err(Error::InvalidInput(format!("bump radius must be positive, got {radius}")));
    }
    let mean = if mean_zero {
        let vol = group
            .covolume()
            .ok_or_else(|| Error::InvalidInput("a mean-zero periodic bump needs a finite covolume".into()))?;
        amplitude * bump_mass(radius) / vol
    } else {
        0.0
    };
    let domain = FundamentalDomain::new(group, hqe_fuchsian::cover::DEFAULT_TRUNCATION)?;
    let region = domain.region_radius.max(hyp_distance(&DiscPoint::origin(), &center)) + REGION_MARGIN;
    let cache = Arc::new(OrbitCache::new(group, radius, region)?);
    let overlap = orbit_enumerate(group, &center, 2.0 * radius, 64)?.len();
    let a: ScalarField = Arc::new(move |z| match cache.near(z, &center) {
        Ok(it) => amplitude * it.map(|(_, d)| bump_profile(d, radius)).sum::<f64>() - mean,
        Err(_) => f64::NAN,
    });
    let c = amplitude.abs() * overlap as f64 + mean.abs();
    Ok(("periodic_bump".to_string(), Variant::Multiplication(a), LocalityConstants { c, s: 0.0, k: 0 }))
}

/// Mean of a periodic bump over the surface: amplitude·bump_mass(radius)/covolume.
pub fn periodic_bump_mean(group: &FuchsianGroup, radius: f64, amplitude: f64) -> Option<f64> {
    group.covolume().map(|v| amplitude * bump_mass(radius) / v)
}
