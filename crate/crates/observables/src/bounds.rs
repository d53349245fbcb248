use crate::error::{Error, Result};
use hqe_core::quad::{for_each_node, gl_composite};
use hqe_core::transforms::{inverse_selberg_at, spherical_phi, InverseOptions, PlancherelWeight, SpectralMultiplier, DEFAULT_T_CUT};
use serde::{Deserialize, Serialize};

/// Measured geometric constants entering the Hilbert–Schmidt remainder bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemainderInputs {
    /// Propagation distance D of K_a.
    pub propagation: f64,
    /// sup |K_a| over 𝒟 × 𝔻.
    pub sup_kernel: f64,
    pub volume: f64,
    pub systole: f64,
    /// Vol{x : InjRad(x) < r + D}.
    pub thin_volume: f64,
    /// ‖χ'‖_∞ of the truncation profile.
    pub chi_prime_sup: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorOpsBounds {
    pub r: f64,
    pub lambda: f64,
    /// P_w·∫_r^∞ |k_ρ(t) φ_λ(t) sinh t| dt, with P_w the weight's Selberg normalization.
    pub e_bound: f64,
    pub r_hs_bound: f64,
    /// ∫|ρ|² w(λ) dλ with the weight's inverse prefactor.
    pub rho_l2: f64,
    /// Vol + e^{r+D}/systole · thin_volume.
    pub volume_term: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailOptions {
    pub panels_per_unit: usize,
    pub order: usize,
    pub t_cut: f64,
}

impl Default for TailOptions {
    fn default() -> Self {
        Self { panels_per_unit: 2, order: 16, t_cut: DEFAULT_T_CUT }
    }
}

/// P_w·∫_r^{t_cut} |k_ρ(t) φ_λ(t) sinh t| dt.
pub fn e_bound(rho: &SpectralMultiplier, weight: PlancherelWeight, lambda: f64, r: f64, opts: TailOptions) -> Result<f64> {
    if r >= opts.t_cut {
        return Ok(0.0);
    }
    let panels = ((opts.t_cut - r) * opts.panels_per_unit as f64).ceil().max(1.0) as usize;
    let mut nodes = Vec::new();
    for_each_node(r, opts.t_cut, panels, opts.order, |t, w| nodes.push((t, w)));
    let mut acc = 0.0;
    for (t, w) in nodes {
        let k = inverse_selberg_at(rho, weight, t, InverseOptions::default())?;
        if k != 0.0 {
            acc += w * (k * spherical_phi(lambda, t)? * t.sinh()).abs();
        }
    }
    Ok(weight.selberg_norm() * acc)
}

pub fn rho_l2(rho: &SpectralMultiplier, weight: PlancherelWeight) -> f64 {
    let (a, b) = rho.support;
    weight.inverse_prefactor() * gl_composite(|l| rho.at(l).powi(2) * weight.eval(l), a, b, 16, 16)
}

/// E_bound and the full Hilbert–Schmidt remainder bound
/// (D/r)²‖χ'‖²sup|K_a|²·∫|ρ|²w·e^{2D}(Vol + e^{r+D}/l·Vol{InjRad < r+D}).
pub fn error_ops_bounds(
    rho: &SpectralMultiplier,
    weight: PlancherelWeight,
    lambda: f64,
    r: f64,
    inputs: &RemainderInputs,
    opts: TailOptions,
) -> Result<ErrorOpsBounds> {
    if !(r > 0.0) {
        return Err(Error::InvalidInput(format!("r must be positive, got {r}")));
    }
    if !(inputs.systole > 0.0 && inputs.propagation >= 0.0 && inputs.volume >= 0.0 && inputs.thin_volume >= 0.0) {
        return Err(Error::InvalidInput("remainder inputs must be nonnegative with a positive systole".into()));
    }
    let d = inputs.propagation;
    let l2 = rho_l2(rho, weight);
    let volume_term = inputs.volume + (r + d).exp() / inputs.systole * inputs.thin_volume;
    let r_hs_bound = (d / r).powi(2) * inputs.chi_prime_sup.powi(2) * inputs.sup_kernel.powi(2) * l2 * (2.0 * d).exp() * volume_term;
    Ok(ErrorOpsBounds { r, lambda, e_bound: e_bound(rho, weight, lambda, r, opts)?, r_hs_bound, rho_l2: l2, volume_term })
}
