use crate::eigendata::EigenData;
use crate::error::{Error, Result};
use crate::window::SpectralWindow;
use hqe_core::geometry::DiscPoint;
use hqe_core::quad::gl_composite;
use hqe_core::transforms::PlancherelWeight;
use hqe_fuchsian::domain::FundamentalDomain;
use hqe_observables::limit::limit_term;
use hqe_observables::{Observable, Variant};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Frozen Weyl density for J = [1, 4].
pub const WEYL_PREDICTED_J14: f64 = 0.238_508_353_387_073_3;

/// Default Nevo exponent; an assumed constant, not a measured one.
pub const DEFAULT_NEVO_N: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// (1/N)Σ over the window.
    Count,
    /// (1/Vol(SX))Σ over the window, Vol(SX) = 2π·Vol.
    UnitTangentVolume,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceOptions {
    pub weight: PlancherelWeight,
    pub limit_samples: usize,
    pub nevo_n: f64,
    pub normalization: Normalization,
}

impl Default for VarianceOptions {
    fn default() -> Self {
        Self { weight: PlancherelWeight::PaperTanh2Pi, limit_samples: 20_000, nevo_n: DEFAULT_NEVO_N, normalization: Normalization::Count }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceTerm {
    pub mode: usize,
    pub nu: f64,
    pub lambda: f64,
    pub matrix_element: f64,
    pub limit: f64,
    pub term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceMetadata {
    pub surface_id: String,
    pub observable: String,
    pub weight: String,
    pub nevo_n: f64,
    pub nevo_n_provenance: String,
    pub normalization: Normalization,
    pub seed: u64,
    pub limit_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub window: SpectralWindow,
    pub count: usize,
    pub variance: f64,
    /// Spread of the terms over √N combined with the Monte Carlo error of the limit term.
    pub std_err: f64,
    pub limit_std_err: f64,
    pub terms: Vec<VarianceTerm>,
    pub metadata: VarianceMetadata,
}

/// ⟨ψ_j, aψ_j⟩ = Σ w a(z)ψ_j² by the mesh quadrature, a sampled once per node.
fn multiplication_elements(a: &Observable, data: &EigenData, modes: &[usize]) -> Result<Vec<f64>> {
    let Variant::Multiplication(f) = &a.variant else {
        return Err(Error::InvalidInput(format!(
            "{} is a {} observable; only multiplication observables act on mesh samples",
            a.label,
            a.variant.name()
        )));
    };
    let samples = data.mesh.iter().map(|m| f(&DiscPoint { re: m.x, im: m.y })).collect::<Vec<_>>();
    if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("{} is not finite at mesh node {i}", a.label)));
    }
    Ok(modes
        .iter()
        .map(|&j| data.mesh.iter().zip(&samples).zip(&data.eigenvectors[j]).map(|((m, s), p)| m.weight * s * p * p).sum())
        .collect())
}

/// Mean over the window of |⟨ψ_j, Aψ_j⟩ − limit(λ_j)|².
pub fn quantum_variance(
    a: &Observable,
    data: &EigenData,
    window: &SpectralWindow,
    domain: &FundamentalDomain,
    opts: VarianceOptions,
    seed: u64,
) -> Result<VarianceReport> {
    let modes: Vec<usize> = (0..data.n_modes()).filter(|&j| window.contains(data.eigenvalues[j])).collect();
    if modes.is_empty() {
        return Err(Error::EmptyWindow { lo: window.j.0, hi: window.j.1 });
    }
    let elements = multiplication_elements(a, data, &modes)?;
    // Multiplication observables have a λ-independent limit: one estimate serves the window.
    let limit = limit_term(a, (data.eigenvalues[modes[0]] - 0.25).sqrt(), domain, opts.limit_samples, seed)?;
    let terms: Vec<VarianceTerm> = modes
        .iter()
        .zip(&elements)
        .map(|(&j, &me)| {
            let nu = data.eigenvalues[j];
            VarianceTerm { mode: j, nu, lambda: (nu - 0.25).sqrt(), matrix_element: me, limit: limit.value, term: (me - limit.value).powi(2) }
        })
        .collect();
    let n = terms.len() as f64;
    let sum: f64 = terms.iter().map(|t| t.term).sum();
    let denom = match opts.normalization {
        Normalization::Count => n,
        Normalization::UnitTangentVolume => TAU * data.volume,
    };
    let variance = sum / denom;
    let mean_term = sum / n;
    let spread = if terms.len() > 1 { (terms.iter().map(|t| (t.term - mean_term).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
    let stat = spread / n.sqrt() * n / denom;
    let dev = terms.iter().map(|t| 2.0 * (t.matrix_element - t.limit).abs()).sum::<f64>() / denom;
    let limit_err = dev * limit.std_err;
    Ok(VarianceReport {
        window: *window,
        count: terms.len(),
        variance,
        std_err: stat.hypot(limit_err),
        limit_std_err: limit.std_err,
        terms,
        metadata: VarianceMetadata {
            surface_id: data.surface_id.clone(),
            observable: a.label.clone(),
            weight: opts.weight.label().into(),
            nevo_n: opts.nevo_n,
            nevo_n_provenance: "assumed".into(),
            normalization: opts.normalization,
            seed,
            limit_samples: opts.limit_samples,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylReport {
    pub window: (f64, f64),
    pub count: usize,
    pub volume: f64,
    /// N(X, J)/Vol.
    pub measured: f64,
    pub predicted: f64,
    pub ratio: Option<f64>,
}

/// (1/4π)·2∫ s tanh(πs) ds over the λ-image of J.
pub fn weyl_predicted(j: (f64, f64)) -> f64 {
    let (a, b) = ((j.0 - 0.25).max(0.0).sqrt(), (j.1 - 0.25).max(0.0).sqrt());
    if b <= a {
        return 0.0;
    }
    2.0 * gl_composite(|s| s * (PI * s).tanh(), a, b, 32, 16) / (4.0 * PI)
}

/// Measured and predicted eigenvalue density in J; needs eigenvalues beyond 1.2·sup J.
pub fn weyl_ratio(data: &EigenData, j: (f64, f64)) -> Result<WeylReport> {
    let needed = 1.2 * j.1;
    let max_nu = data.eigenvalues.last().copied().unwrap_or(f64::NEG_INFINITY);
    if !(max_nu > needed) {
        return Err(Error::WindowNotResolved { max_nu, needed });
    }
    let count = data.eigenvalues.iter().filter(|v| **v >= j.0 && **v <= j.1).count();
    let measured = count as f64 / data.volume;
    let predicted = weyl_predicted(j);
    Ok(WeylReport { window: j, count, volume: data.volume, measured, predicted, ratio: (predicted > 0.0).then(|| measured / predicted) })
}
