use crate::domain::FundamentalDomain;
use crate::error::{Error, Result};
use crate::group::{DomainSpec, FuchsianGroup};
use crate::orbit::OrbitCache;
use crate::words::{systole, DEFAULT_SYSTOLE_WORD_LENGTH};
use hqe_core::geometry::{hyp_distance, DiscPoint};
use hqe_core::transforms::{radial_l2_norm_sqr, RadialKernel};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// 1 − (3x² − 2x³) on [0, 1], one below and zero above.
pub fn chi_default(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x >= 1.0 {
        0.0
    } else {
        1.0 - x * x * (3.0 - 2.0 * x)
    }
}

pub type PairKernel = Arc<dyn Fn(&DiscPoint, &DiscPoint) -> Complex64 + Send + Sync>;

pub fn radial_pair_kernel(k: &RadialKernel) -> PairKernel {
    let k = k.clone();
    Arc::new(move |z, w| Complex64::new(k.at(hyp_distance(z, w)), 0.0))
}

/// K^{Γ,r}(z, w) = Σ_γ K(z, γw) χ(d(z, γw)/r) for z, w within `region_radius` of 0.
#[derive(Clone)]
pub struct PeriodizedKernel {
    pub kernel: PairKernel,
    pub r: f64,
    pub chi: fn(f64) -> f64,
    cache: Arc<OrbitCache>,
}

impl PeriodizedKernel {
    pub fn eval(&self, z: &DiscPoint, w: &DiscPoint) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, d) in self.cache.near(z, w)? {
            let c = (self.chi)(d / self.r);
            if c != 0.0 {
                acc += (self.kernel)(z, &e.element.apply(w)) * c;
            }
        }
        Ok(acc)
    }

    pub fn terms(&self, z: &DiscPoint, w: &DiscPoint) -> Result<usize> {
        Ok(self.cache.near(z, w)?.filter(|(_, d)| (self.chi)(d / self.r) != 0.0).count())
    }
}

pub fn periodize_truncated(kernel: PairKernel, group: &FuchsianGroup, r: f64, chi: fn(f64) -> f64, region_radius: f64) -> Result<PeriodizedKernel> {
    if !(r > 0.0) {
        return Err(Error::InvalidInput(format!("r must be positive, got {r}")));
    }
    let cache = OrbitCache::new(group, r, region_radius)?;
    Ok(PeriodizedKernel { kernel, r, chi, cache: Arc::new(cache) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsOptions {
    /// |ρ| bound (cyclic) or ball radius (trivial group) for the z-region.
    pub truncation: f64,
    /// Systole lower bound l; computed from short words when absent.
    pub systole: Option<f64>,
    /// Upper limit of the radial integrals for kernels of infinite support.
    pub t_cut: f64,
}

impl Default for HsOptions {
    fn default() -> Self {
        Self { truncation: 2.0, systole: None, t_cut: 12.0 }
    }
}

/// Both sides of the truncated-periodization Hilbert–Schmidt estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HsBoundReport {
    pub r: f64,
    pub lhs_estimate: f64,
    pub lhs_std_err: f64,
    pub first_term: f64,
    pub second_term: f64,
    pub rhs_bound: f64,
    pub injrad_fraction: f64,
    pub systole: f64,
    pub region_volume: f64,
    pub n_mc: usize,
    pub pass: bool,
    /// rhs / lhs.
    pub margin: f64,
}

/// Monte Carlo ∫_𝒟∫_𝒟 |K^{Γ,r}|² for a radial K against
/// ∫_𝒟∫_𝔻 |K|² + (e^{2r}/l) Vol{InjRad < r} sup|K|².
pub fn hs_bound_check(k: &RadialKernel, group: &FuchsianGroup, r: f64, n_mc: usize, seed: u64, opts: HsOptions) -> Result<HsBoundReport> {
    if n_mc < 2 {
        return Err(Error::InvalidInput("need at least two Monte Carlo samples".into()));
    }
    let z_dom = FundamentalDomain::new(group, opts.truncation)?;
    // w only matters within distance r of the orbit of z.
    let w_dom = match group.domain {
        DomainSpec::Dirichlet { .. } => z_dom.clone(),
        _ => FundamentalDomain::new(group, opts.truncation + r)?,
    };
    let l = match opts.systole {
        Some(l) => l,
        None => match group.domain {
            DomainSpec::Whole => f64::INFINITY,
            _ => systole(group, DEFAULT_SYSTOLE_WORD_LENGTH)
                .ok_or_else(|| Error::InvalidInput("no hyperbolic word found for the systole".into()))?
                .value,
        },
    };
    let region = z_dom.region_radius.max(w_dom.region_radius);
    let cache = Arc::new(OrbitCache::new(group, 2.0 * r, region)?);
    let per = PeriodizedKernel { kernel: radial_pair_kernel(k), r, chi: chi_default, cache: cache.clone() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut sum2, mut thin) = (0.0, 0.0, 0usize);
    for _ in 0..n_mc {
        let z = z_dom.sample(&mut rng);
        let w = w_dom.sample(&mut rng);
        let v = per.eval(&z, &w)?.norm_sqr();
        sum += v;
        sum2 += v * v;
        if cache.injrad(&z, |_| true)?.value < r {
            thin += 1;
        }
    }
    let n = n_mc as f64;
    let mean = sum / n;
    let var = (sum2 / n - mean * mean).max(0.0) * n / (n - 1.0);
    let scale = z_dom.volume * w_dom.volume;
    let lhs = scale * mean;
    let se = scale * (var / n).sqrt();
    let end = k.support_bound.min(opts.t_cut);
    let first = z_dom.volume * radial_l2_norm_sqr(k, opts.t_cut, (4.0 * end).ceil() as usize + 4);
    let sup = (0..=2000).map(|i| k.at(end * i as f64 / 2000.0).powi(2)).fold(0.0, f64::max);
    let frac = thin as f64 / n;
    let second = if l.is_finite() { (2.0 * r).exp() / l * z_dom.volume * frac * sup } else { 0.0 };
    let rhs = first + second;
    let sigma = if lhs > 0.0 { se / lhs } else { 0.0 };
    Ok(HsBoundReport {
        r,
        lhs_estimate: lhs,
        lhs_std_err: se,
        first_term: first,
        second_term: second,
        rhs_bound: rhs,
        injrad_fraction: frac,
        systole: l,
        region_volume: z_dom.volume,
        n_mc,
        pass: lhs <= rhs * (1.0 + 3.0 * sigma),
        margin: if lhs > 0.0 { rhs / lhs } else { f64::INFINITY },
    })
}
