use crate::error::Result;
use crate::fem::{fem_eigensolve_above, FemSurface};
use crate::lanczos::EigenOptions;
use crate::qv::{quantum_variance, weyl_ratio, VarianceOptions, VarianceReport, WeylReport};
use crate::window::SpectralWindow;
use hqe_fuchsian::cover::{random_cover, CoverSurface, DEFAULT_TRUNCATION};
use hqe_fuchsian::domain::FundamentalDomain;
use hqe_fuchsian::group::FuchsianGroup;
use hqe_observables::Observable;
use serde::{Deserialize, Serialize};

/// Acceptance band for measured/predicted Weyl density.
pub const WEYL_BAND: (f64, f64) = (0.5, 2.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TowerOptions {
    pub degrees: Vec<usize>,
    pub h: f64,
    /// Coarser spacing used for the discretization error estimate.
    pub h_coarse: f64,
    pub window: (f64, f64),
    pub cover_seed: u64,
    pub seed: u64,
    pub variance: VarianceOptions,
    pub eigen: EigenOptions,
}

impl Default for TowerOptions {
    fn default() -> Self {
        Self {
            degrees: vec![1, 2, 4],
            h: 0.05,
            h_coarse: 0.1,
            window: (1.0, 4.0),
            cover_seed: 1,
            seed: 2024,
            variance: VarianceOptions::default(),
            eigen: EigenOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TowerLevel {
    pub degree: usize,
    pub surface_id: String,
    pub n_dof: usize,
    pub report: VarianceReport,
    pub variance_coarse: f64,
    pub stat_err: f64,
    pub disc_err: f64,
    pub err: f64,
    pub weyl: WeylReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TowerReport {
    pub observable: String,
    pub h: f64,
    pub h_coarse: f64,
    pub levels: Vec<TowerLevel>,
    /// Var_{i+1} ≤ Var_i + err_i + err_{i+1} for every step.
    pub nonincreasing: bool,
    pub weyl_top_in_band: bool,
}

pub fn bolza_cover(degree: usize, seed: u64) -> Result<CoverSurface> {
    let base = FuchsianGroup::bolza();
    Ok(if degree == 1 { CoverSurface::trivial(base) } else { random_cover(&base, degree, seed)? })
}

/// Quantum variance of a multiplication observable across Bolza covers of growing degree.
pub fn run_tower(a: &Observable, opts: &TowerOptions) -> Result<TowerReport> {
    let window = SpectralWindow::new(opts.window.0, opts.window.1)?;
    let nu_top = 1.2 * opts.window.1 * 1.05;
    let mut levels = Vec::with_capacity(opts.degrees.len());
    for &degree in &opts.degrees {
        let cover = bolza_cover(degree, opts.cover_seed)?;
        let domain = FundamentalDomain::new(&cover.base, DEFAULT_TRUNCATION)?;
        let surface = FemSurface::BolzaCover(cover);
        let fine = fem_eigensolve_above(&surface, opts.h, nu_top, opts.eigen)?;
        let coarse = fem_eigensolve_above(&surface, opts.h_coarse, nu_top, opts.eigen)?;
        let report = quantum_variance(a, &fine, &window, &domain, opts.variance, opts.seed)?;
        let variance_coarse = quantum_variance(a, &coarse, &window, &domain, opts.variance, opts.seed)?.variance;
        let disc_err = (report.variance - variance_coarse).abs();
        levels.push(TowerLevel {
            degree,
            surface_id: fine.surface_id.clone(),
            n_dof: fine.mesh.len(),
            stat_err: report.std_err,
            disc_err,
            err: report.std_err + disc_err,
            variance_coarse,
            weyl: weyl_ratio(&fine, opts.window)?,
            report,
        });
    }
    let nonincreasing = levels.windows(2).all(|w| w[1].report.variance <= w[0].report.variance + w[0].err + w[1].err);
    let weyl_top_in_band = levels
        .last()
        .and_then(|l| l.weyl.ratio)
        .is_some_and(|r| (WEYL_BAND.0..=WEYL_BAND.1).contains(&r));
    Ok(TowerReport { observable: a.label.clone(), h: opts.h, h_coarse: opts.h_coarse, levels, nonincreasing, weyl_top_in_band })
}
