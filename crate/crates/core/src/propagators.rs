//! Radial propagators P_{t,σ} and P_t^♯, their Selberg transforms and the bounds used to
//! show the time-averaged multiplier stays away from zero.

use crate::error::{Error, Result};
use crate::quad::{for_each_node, gl_composite};
use crate::transforms::{
    abel_sharp, abel_smooth, chi_cutoff, converge_panels, fourier_of_abel, mehler_integral, selberg_transform, AbelProfile,
    Eta, RadialKernel, SELBERG_NORM_EIGEN,
};
use serde::{Deserialize, Serialize};

/// χ_{t,σ}(r) = η((r − t)/σ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub eta: Eta,
    pub sigma: f64,
    pub t: f64,
}

impl CutoffSpec {
    pub fn new(t: f64, sigma: f64) -> Result<Self> {
        if !(t > 0.0 && sigma > 0.0) {
            return Err(Error::InvalidInput(format!("cutoff needs t > 0 and σ > 0, got t = {t}, σ = {sigma}")));
        }
        Ok(Self { eta: Eta::CubicSmoothstep, sigma, t })
    }

    pub fn chi(&self, r: f64) -> f64 {
        chi_cutoff(self.eta, self.t, self.sigma, r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Propagator {
    Smooth(CutoffSpec),
    Sharp { t: f64 },
}

impl Propagator {
    pub fn t(&self) -> f64 {
        match self {
            Self::Smooth(c) => c.t,
            Self::Sharp { t } => *t,
        }
    }

    /// k(r), including the 1/√cosh t prefactor.
    pub fn kernel_at(&self, r: f64) -> f64 {
        let t = self.t();
        if r < 0.0 || r > t {
            return 0.0;
        }
        let pre = t.cosh().sqrt().recip();
        match self {
            Self::Smooth(c) => pre * c.chi(r),
            Self::Sharp { .. } => pre,
        }
    }

    pub fn kernel(&self) -> RadialKernel {
        let p = *self;
        let k = RadialKernel::new(self.label(), self.t(), move |r| p.kernel_at(r));
        match self {
            Self::Smooth(c) if c.sigma < c.t => k.with_breakpoints(vec![c.t - c.sigma]),
            _ => k,
        }
    }

    pub fn abel(&self) -> AbelProfile {
        match self {
            Self::Smooth(c) => abel_smooth(c.t, c.sigma, c.eta),
            Self::Sharp { t } => abel_sharp(*t),
        }
    }

    fn label(&self) -> &'static str {
        match self {
            Self::Smooth(_) => "k_t_sigma",
            Self::Sharp { .. } => "k_t_sharp",
        }
    }

    /// h(λ) through the Abel profile.
    pub fn h(&self, lambda: f64) -> Result<f64> {
        if self.t() <= 0.0 {
            return Ok(0.0);
        }
        fourier_of_abel(&self.abel(), lambda)
    }

    /// h(λ) through the eigenvalue-normalized Selberg transform of the kernel.
    pub fn h_selberg(&self, lambda: f64) -> Result<f64> {
        selberg_transform(&self.kernel(), lambda, SELBERG_NORM_EIGEN)
    }
}

pub fn h_sharp(t: f64, lambda: f64) -> Result<f64> {
    Propagator::Sharp { t }.h(lambda)
}

pub fn h_smooth(t: f64, sigma: f64, lambda: f64) -> Result<f64> {
    Propagator::Smooth(CutoffSpec::new(t, sigma)?).h(lambda)
}

/// h for many λ at once from one sampling of the profile. Fixed rule: `per_unit` panels of
/// order 16 per unit length on [0, S − 1], then a w² substitution on the last unit.
pub fn h_many(g: &AbelProfile, lambdas: &[f64], per_unit: usize) -> Vec<f64> {
    let s = g.support_bound;
    let mut out = vec![0.0; lambdas.len()];
    if s <= 0.0 {
        return out;
    }
    let edge = s.min(1.0);
    let mut cuts = vec![0.0];
    cuts.extend(g.breakpoints.iter().copied().filter(|&b| b > 0.0 && b < s - edge));
    cuts.push(s - edge);
    for w in cuts.windows(2) {
        if w[1] - w[0] <= 0.0 {
            continue;
        }
        let panels = (((w[1] - w[0]) * per_unit as f64).ceil() as usize).max(1);
        for_each_node(w[0], w[1], panels, 16, |u, wu| {
            let gv = g.at(u) * wu;
            for (o, l) in out.iter_mut().zip(lambdas) {
                *o += (l * u).cos() * gv;
            }
        });
    }
    let a = s - edge;
    // Breakpoints inside the edge stretch map to w = √(S − b).
    let mut wcuts = vec![0.0];
    for b in g.breakpoints.iter().copied().filter(|&b| b > a && b < s) {
        wcuts.push((s - b).sqrt());
    }
    wcuts.push((s - a).sqrt());
    wcuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    for w in wcuts.windows(2) {
        for_each_node(w[0], w[1], 2 * per_unit.max(1), 16, |wv, ww| {
            let u = s - wv * wv;
            let gv = 2.0 * wv * g.at(u) * ww;
            for (o, l) in out.iter_mut().zip(lambdas) {
                *o += (l * u).cos() * gv;
            }
        });
    }
    out.iter_mut().for_each(|o| *o *= 2.0);
    out
}

/// δh_{t,σ}(λ) from the double-integral formula
/// 2√(2/cosh t) ∫_{t−σ}^t (χ − 1) sinh r I_λ(r) dr.
pub fn delta_h_formula(t: f64, sigma: f64, eta: Eta, lambda: f64) -> Result<f64> {
    if !(t > 1.0 + sigma) {
        return Err(Error::InvalidInput(format!("δh needs t > 1 + σ, got t = {t}, σ = {sigma}")));
    }
    let mut err = None;
    let f = |r: f64| {
        let chi = chi_cutoff(eta, t, sigma, r);
        if chi == 1.0 {
            return 0.0;
        }
        match mehler_integral(lambda, r) {
            Ok(i) => (chi - 1.0) * r.sinh() * i,
            Err(e) => {
                err = Some(e);
                0.0
            }
        }
    };
    let (v, _) = converge_panels(f, t - sigma, t, 1, 16, 1e-15, 1e-12, "delta_h")?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(2.0 * (2.0 / t.cosh()).sqrt() * v)
}

/// δh by subtracting the two Abel-route values.
pub fn delta_h_subtraction(t: f64, sigma: f64, eta: Eta, lambda: f64) -> Result<f64> {
    let smooth = Propagator::Smooth(CutoffSpec { eta, sigma, t });
    Ok(smooth.h(lambda)? - h_sharp(t, lambda)?)
}

/// e^{r/2} |∫₀^r cos(λu)/√(cosh r − cosh u) du|.
pub fn lemma_a1_check(lambda: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidInput(format!("r must be positive, got {r}")));
    }
    Ok((0.5 * r).exp() * mehler_integral(lambda, r)?.abs())
}

/// Max of the Lemma-A.1 quantity over the given grids.
pub fn lemma_a1_constant(lambdas: &[f64], radii: &[f64]) -> Result<f64> {
    let mut c: f64 = 0.0;
    for &l in lambdas {
        for &r in radii {
            c = c.max(lemma_a1_check(l, r)?);
        }
    }
    Ok(c)
}

/// Max of e^{s/2}|I_λ(s)| over s ∈ [r, r + π/λ], sampled every 0.02; one half-period of
/// the oscillation so the value tracks the envelope rather than the phase.
pub fn lemma_a1_envelope(lambda: f64, r: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidInput(format!("λ must be positive, got {lambda}")));
    }
    let width = std::f64::consts::PI / lambda;
    let n = (width / 0.02).ceil() as usize;
    let mut m: f64 = 0.0;
    for i in 0..=n {
        m = m.max(lemma_a1_check(lambda, r + width * i as f64 / n as f64)?);
    }
    Ok(m)
}

/// Max/min of the windowed envelope over the radii, for one λ.
pub fn lemma_a1_envelope_ratio(lambda: f64, radii: &[f64]) -> Result<f64> {
    let mut hi: f64 = 0.0;
    let mut lo = f64::INFINITY;
    for &r in radii {
        let e = lemma_a1_envelope(lambda, r)?;
        hi = hi.max(e);
        lo = lo.min(e);
    }
    Ok(hi / lo)
}

/// 4 C (1 − e^{−σ/2}).
pub fn delta_h_envelope(c_i: f64, sigma: f64) -> f64 {
    4.0 * c_i * (1.0 - (-0.5 * sigma).exp())
}

/// Quadrature settings for time averages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AverageOptions {
    /// Gauss–Legendre nodes per unit of t.
    pub nodes_per_unit: usize,
    /// Panels per unit length in the u-integral of h.
    pub u_per_unit: usize,
}

impl Default for AverageOptions {
    fn default() -> Self {
        Self { nodes_per_unit: 8, u_per_unit: 2 }
    }
}

/// Builds the propagator at time t from a template (σ and η are kept, t replaced).
fn at_time(template: &Propagator, t: f64) -> Propagator {
    match template {
        Propagator::Smooth(c) => Propagator::Smooth(CutoffSpec { t, ..*c }),
        Propagator::Sharp { .. } => Propagator::Sharp { t },
    }
}

/// H_T(λ) = (1/T) ∫₀^T h_t(λ)² dt for every T in `ts` and λ in `lambdas`
/// (rows indexed by T). Uses `nodes_per_unit` Gauss nodes per unit of t.
pub fn avg_multiplier_table(template: &Propagator, ts: &[f64], lambdas: &[f64], opts: AverageOptions) -> Result<Vec<Vec<f64>>> {
    if ts.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidInput("every T must be positive".into()));
    }
    let mut rows = Vec::with_capacity(ts.len());
    for &big_t in ts {
        let panels = big_t.ceil() as usize;
        let mut acc = vec![0.0; lambdas.len()];
        for_each_node(0.0, big_t, panels, opts.nodes_per_unit, |t, w| {
            let p = at_time(template, t);
            let h = h_many(&p.abel(), lambdas, opts.u_per_unit);
            for (a, hv) in acc.iter_mut().zip(h) {
                *a += w * hv * hv;
            }
        });
        rows.push(acc.into_iter().map(|a| a / big_t).collect());
    }
    Ok(rows)
}

pub fn avg_multiplier_h(template: &Propagator, big_t: f64, lambda: f64, opts: AverageOptions) -> Result<f64> {
    Ok(avg_multiplier_table(template, &[big_t], &[lambda], opts)?[0][0])
}

/// Regression floor of the positivity certificate for J = [1, 4], σ = 0.1 at T = 40.
pub const PROP33_FLOOR_T40: f64 = 1.513884800534276;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop33Certificate {
    #[serde(rename = "I")]
    pub interval: (f64, f64),
    pub sigma: f64,
    #[serde(rename = "T_list")]
    pub t_list: Vec<f64>,
    pub c_min: Vec<f64>,
    #[serde(rename = "lemmaA1_constant")]
    pub lemma_a1_constant: f64,
    pub pass: bool,
    pub eta: String,
    pub kernel: String,
    pub lambda_grid_len: usize,
    pub upper_half_variation: f64,
}

/// Minimum of H_T over the λ-grid for each T, positivity and stability over the upper
/// half of the T list.
pub fn prop33_certificate(
    interval: (f64, f64),
    template: &Propagator,
    t_list: &[f64],
    lambda_grid: &[f64],
    opts: AverageOptions,
) -> Result<Prop33Certificate> {
    if lambda_grid.is_empty() {
        return Err(Error::InvalidInput("λ grid is empty".into()));
    }
    if t_list.is_empty() {
        return Err(Error::InvalidInput("T list is empty".into()));
    }
    let table = avg_multiplier_table(template, t_list, lambda_grid, opts)?;
    let c_min: Vec<f64> = table.iter().map(|row| row.iter().copied().fold(f64::INFINITY, f64::min)).collect();
    let upper = &c_min[t_list.len() / 2..];
    let hi = upper.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = upper.iter().copied().fold(f64::INFINITY, f64::min);
    let variation = if hi > 0.0 { (hi - lo) / hi } else { f64::INFINITY };
    let radii: Vec<f64> = (2..=20).map(|r| r as f64).collect();
    let probe: Vec<f64> = [interval.0, 0.5 * (interval.0 + interval.1), interval.1].to_vec();
    let c_a1 = lemma_a1_constant(&probe, &radii)?;
    let pass = c_min.iter().all(|&c| c > 0.0) && variation < 0.2;
    let (sigma, eta, kernel) = match template {
        Propagator::Smooth(c) => (c.sigma, c.eta.label().to_string(), "smooth".to_string()),
        Propagator::Sharp { .. } => (0.0, "none".to_string(), "sharp".to_string()),
    };
    Ok(Prop33Certificate {
        interval,
        sigma,
        t_list: t_list.to_vec(),
        c_min,
        lemma_a1_constant: c_a1,
        pass,
        eta,
        kernel,
        lambda_grid_len: lambda_grid.len(),
        upper_half_variation: variation,
    })
}

/// Evenly spaced grid on [a, b] with spacing at most `max_step`.
pub fn lambda_grid(a: f64, b: f64, max_step: f64) -> Vec<f64> {
    let n = ((b - a) / max_step).ceil().max(1.0) as usize;
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

/// e^{−pt/2} ∫₀^t e^{ps/2} e^{−s/2} √(cosh t − cosh s) · 2 ds.
pub fn beta_norm_check(t: f64, p: f64) -> Result<f64> {
    if !(p > 1.0 && p < 2.0) {
        return Err(Error::InvalidInput(format!("p must lie in (1, 2), got {p}")));
    }
    if t <= 0.0 {
        return Ok(0.0);
    }
    let f = |s: f64| {
        let d = 2.0 * (0.5 * (t + s)).sinh() * (0.5 * (t - s)).sinh();
        ((p - 1.0) * 0.5 * s - 0.5 * p * t).exp() * 2.0 * d.max(0.0).sqrt()
    };
    let edge = t.min(1.0);
    let panels = ((t - edge).ceil() as usize).max(1);
    let a = if t - edge > 0.0 { gl_composite(f, 0.0, t - edge, panels, 16) } else { 0.0 };
    let b = gl_composite(|w| 2.0 * w * f(t - w * w), 0.0, edge.sqrt(), 2, 16);
    Ok(a + b)
}

/// Default exponent for the β_t estimate.
pub const BETA_DEFAULT_P: f64 = 1.5;

/// max over a t-grid of |h_t(λ)|.
pub fn h_sup_over_t(template: &Propagator, lambda: f64, t_max: f64, step: f64) -> Result<f64> {
    let n = (t_max / step).ceil() as usize;
    let mut m: f64 = 0.0;
    for i in 1..=n {
        let p = at_time(template, i as f64 * step);
        m = m.max(p.h(lambda)?.abs());
    }
    Ok(m)
}
