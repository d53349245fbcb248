use crate::error::{Error, Result};
use crate::window::SpectralWindow;
use hqe_core::propagators::CutoffSpec;
use hqe_core::transforms::{PlancherelWeight, SpectralMultiplier};
use hqe_fuchsian::cover::{bs_statistic, CoverSurface, DEFAULT_TRUNCATION};
use hqe_fuchsian::domain::FundamentalDomain;
use hqe_fuchsian::words::DEFAULT_SYSTOLE_WORD_LENGTH;
use hqe_observables::bounds::rho_l2;
use hqe_observables::sandwich::lemma34_bound;
use hqe_observables::symbol::{symbol_of, theta_second_derivative_norm};
use hqe_observables::Observable;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Measured inputs of the variance budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConstants {
    /// C_θ, the θ-second-derivative norm of the symbol.
    pub theta_norm: f64,
    /// sup |K| of the propagated observable.
    pub sup_kernel: f64,
    /// ‖K_ρ‖².
    pub k_rho_l2: f64,
    /// Propagation range S of the observable.
    pub range: f64,
    pub systole: f64,
    pub volume: f64,
    /// Assumed Nevo exponent n.
    pub nevo_n: f64,
}

/// Constants of the mean part at parameter s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanPart {
    pub s: f64,
    pub k_l2: f64,
    pub sup_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetTerm {
    pub name: String,
    pub formula: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineBounds {
    pub t: f64,
    pub r: f64,
    /// S_T = 2T + S.
    pub s_t: f64,
    pub c_rho: f64,
    pub constants: PipelineConstants,
    pub mean: Option<MeanPart>,
    /// (radius, Vol{InjRad < radius}/Vol) pairs used.
    pub bs: Vec<(f64, f64)>,
    pub terms: Vec<BudgetTerm>,
    pub total: f64,
    pub dominant: String,
}

/// Injectivity radius can never exceed acosh(1 + Vol/2π); beyond it the thin part is everything.
pub fn injrad_cap(volume: f64) -> f64 {
    (1.0 + volume / TAU).acosh()
}

/// Every right-hand-side term of the variance estimate at (T, r) and, optionally, the mean part at s.
pub fn variance_pipeline_bounds(
    c: &PipelineConstants,
    t: f64,
    r: f64,
    mean: Option<MeanPart>,
    mut bs_fraction: impl FnMut(f64) -> Result<f64>,
) -> Result<PipelineBounds> {
    if !(t > 0.0 && r > 0.0 && c.systole > 0.0 && c.nevo_n > 1.0) {
        return Err(Error::InvalidInput(format!("need T, r, systole > 0 and n > 1, got T = {t}, r = {r}, l = {}, n = {}", c.systole, c.nevo_n)));
    }
    let s_t = 2.0 * t + c.range;
    let c_rho = PI * c.k_rho_l2;
    let sup2 = c.sup_kernel * c.sup_kernel;
    let ratio2 = (s_t / r).powi(2);
    let mut bs = Vec::new();
    let mut frac = |radius: f64| -> Result<f64> {
        let f = if radius >= injrad_cap(c.volume) { 1.0 } else { bs_fraction(radius)? };
        bs.push((radius, f));
        Ok(f)
    };
    let thin = frac(r + s_t)?;
    let mut terms = vec![
        BudgetTerm { name: "time_average".into(), formula: "C_θ/((1 − 1/n)T)".into(), value: c.theta_norm / (1.0 - 1.0 / c.nevo_n) / t },
        BudgetTerm {
            name: "thin_part".into(),
            formula: "2(1 + (S_T/r)²)(C_ρ + ‖K_ρ‖²)sup|K|²e^{2(r+S_T)}/l·BS(r+S_T)".into(),
            value: 2.0 * (1.0 + ratio2) * (c_rho + c.k_rho_l2) * sup2 * (2.0 * (r + s_t)).exp() / c.systole * thin,
        },
        BudgetTerm {
            name: "truncation".into(),
            formula: "2(S_T/r)²e^{2S_T}sup|K|²‖K_ρ‖²".into(),
            value: 2.0 * ratio2 * (2.0 * s_t).exp() * sup2 * c.k_rho_l2,
        },
        BudgetTerm { name: "spectral_tail".into(), formula: "2e^{S_T}sup|K|²/(1 + r)²".into(), value: 2.0 * s_t.exp() * sup2 / (1.0 + r).powi(2) },
    ];
    if let Some(m) = mean {
        let f = frac(m.s + 2.0 * t)?;
        terms.push(BudgetTerm {
            name: "mean_part".into(),
            formula: "(‖K_m‖² + e^{2(s+2T)}/l·BS(s+2T)·sup|K_m|²)/(1 + r)²".into(),
            value: (m.k_l2 + (2.0 * (m.s + 2.0 * t)).exp() / c.systole * f * m.sup_k * m.sup_k) / (1.0 + r).powi(2),
        });
    }
    if let Some(bad) = terms.iter().find(|b| !b.value.is_finite()) {
        return Err(Error::InvalidInput(format!("budget term {} is not finite", bad.name)));
    }
    let total = terms.iter().map(|b| b.value).sum();
    let dominant = terms.iter().max_by(|a, b| a.value.total_cmp(&b.value)).map(|b| b.name.clone()).unwrap_or_default();
    Ok(PipelineBounds { t, r, s_t, c_rho, constants: *c, mean, bs, terms, total, dominant })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureOptions {
    pub weight: PlancherelWeight,
    pub cutoff: CutoffSpec,
    pub theta_samples: usize,
    pub lambda_step: f64,
    pub nevo_n: f64,
    pub seed: u64,
}

/// Measures the budget constants for an observable on a cover of a compact surface.
pub fn measure_pipeline_constants(a: &Observable, cover: &CoverSurface, window: &SpectralWindow, opts: &MeasureOptions) -> Result<PipelineConstants> {
    let volume = cover.volume().ok_or_else(|| Error::InvalidInput("the budget needs a finite-volume surface".into()))?;
    let systole = cover
        .systole(DEFAULT_SYSTOLE_WORD_LENGTH)
        .ok_or_else(|| Error::InvalidInput("no closed geodesic found for the systole".into()))?
        .value;
    let domain = FundamentalDomain::new(&cover.base, DEFAULT_TRUNCATION)?;
    let symbol = symbol_of(a, window.i_prime);
    let theta = theta_second_derivative_norm(&symbol, window.i, opts.lambda_step, &domain, opts.theta_samples, opts.seed)?;
    let rho = SpectralMultiplier::bump(window.i_prime.0, window.i_prime.1);
    Ok(PipelineConstants {
        theta_norm: theta.value,
        sup_kernel: lemma34_bound(&a.constants, &opts.cutoff)?,
        k_rho_l2: rho_l2(&rho, opts.weight),
        range: a.constants.s,
        systole,
        volume,
        nevo_n: opts.nevo_n,
    })
}

/// Monte Carlo thin-part fraction of a cover, for use as the budget's BS input.
pub fn cover_bs_fraction(cover: &CoverSurface, n_samples: usize, seed: u64) -> impl FnMut(f64) -> Result<f64> + '_ {
    move |radius| Ok(bs_statistic(cover, radius, n_samples, seed)?.fraction)
}
