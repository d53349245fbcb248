use crate::analytic::parse_range;
use crate::groups::{load_preset, ObservableChoice};
use crate::output::{num, Checks, Outcome, Table};
use crate::Ctx;
use anyhow::{anyhow, Result};
use clap::{Args, ValueEnum};
use hqe_core::propagators::CutoffSpec;
use hqe_fuchsian::cover::{CoverSurface, DEFAULT_TRUNCATION};
use hqe_fuchsian::domain::FundamentalDomain;
use hqe_fuchsian::group::FuchsianGroup;
use hqe_variance::eigendata::{ingest_eigendata, EigenData};
use hqe_variance::fem::{fem_eigensolve_above, FemSurface};
use hqe_variance::lanczos::EigenOptions;
use hqe_variance::pipeline::{cover_bs_fraction, measure_pipeline_constants, variance_pipeline_bounds, MeasureOptions};
use hqe_variance::qv::{quantum_variance, weyl_ratio, Normalization, VarianceOptions, DEFAULT_NEVO_N};
use hqe_variance::tower::{bolza_cover, run_tower, TowerOptions, WEYL_BAND};
use hqe_variance::window::SpectralWindow;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationChoice {
    Count,
    UnitTangentVolume,
}

impl From<NormalizationChoice> for Normalization {
    fn from(n: NormalizationChoice) -> Self {
        match n {
            NormalizationChoice::Count => Normalization::Count,
            NormalizationChoice::UnitTangentVolume => Normalization::UnitTangentVolume,
        }
    }
}

/// Bolza cover named by an eigendata surface id.
fn cover_from_id(id: &str) -> Result<CoverSurface> {
    if id == "bolza" {
        return Ok(bolza_cover(1, 0)?);
    }
    let rest = id.strip_prefix("bolza_cover_d").ok_or_else(|| anyhow!("surface {id:?} is not a Bolza cover"))?;
    let (d, s) = rest.split_once("_seed").ok_or_else(|| anyhow!("malformed surface id {id:?}"))?;
    Ok(bolza_cover(d.parse()?, s.parse()?)?)
}

/// Eigendata above ν_top, either read from disk or solved on a Bolza cover.
fn eigendata(dir: &Option<PathBuf>, degree: usize, cover_seed: u64, h: f64, nu_top: f64) -> Result<(EigenData, CoverSurface, &'static str)> {
    match dir {
        Some(d) => {
            let data = ingest_eigendata(d)?;
            let cover = cover_from_id(&data.surface_id)?;
            Ok((data, cover, "ingested"))
        }
        None => {
            let cover = bolza_cover(degree, cover_seed)?;
            let data = fem_eigensolve_above(&FemSurface::BolzaCover(cover.clone()), h, nu_top, EigenOptions::default())?;
            Ok((data, cover, "p1_fem"))
        }
    }
}

fn fem_provenance(source: &str, h: f64) -> serde_json::Value {
    let e = EigenOptions::default();
    json!({
        "eigendata_source": source,
        "h": if source == "p1_fem" { Some(h) } else { None },
        "discretization": "P1 elements, lumped hyperbolic mass",
        "eigensolver": { "shift": e.shift, "block": e.block, "tol": e.tol },
    })
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct VarianceArgs {
    /// Read eigendata from this directory instead of solving.
    #[arg(long)]
    pub eigendata: Option<PathBuf>,
    /// Cover degree over the Bolza surface.
    #[arg(long, default_value_t = 1)]
    pub degree: usize,
    #[arg(long, default_value_t = 1)]
    pub cover_seed: u64,
    /// Mesh spacing.
    #[arg(long, default_value_t = 0.05)]
    pub h: f64,
    /// Eigenvalue window lo:hi.
    #[arg(long, default_value = "1:4")]
    pub window: String,
    #[arg(long, value_enum, default_value_t = ObservableChoice::PeriodicBump)]
    pub observable: ObservableChoice,
    /// Observable preset JSON; overrides --observable.
    #[arg(long)]
    pub preset: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = NormalizationChoice::Count)]
    pub normalization: NormalizationChoice,
    /// Nevo exponent n (assumed).
    #[arg(long, default_value_t = DEFAULT_NEVO_N)]
    pub nevo_n: f64,
    #[arg(long, default_value_t = 20_000)]
    pub limit_samples: usize,
    /// Also write the solved eigendata to this directory.
    #[arg(long)]
    pub export_eigendata: Option<PathBuf>,
    /// Time T of the error budget; the budget is skipped when absent.
    #[arg(long)]
    pub budget_t: Option<f64>,
    /// Truncation radius r of the error budget.
    #[arg(long, default_value_t = 2.0)]
    pub budget_r: f64,
    /// Cutoff width σ of the budget's propagator.
    #[arg(long, default_value_t = 0.4)]
    pub budget_sigma: f64,
    #[arg(long, default_value_t = 500)]
    pub bs_samples: usize,
}

fn variance_options(ctx: &Ctx, n: NormalizationChoice, nevo_n: f64, limit_samples: usize) -> VarianceOptions {
    VarianceOptions { weight: ctx.weight, limit_samples, nevo_n, normalization: n.into() }
}

pub fn variance(a: &VarianceArgs, ctx: &Ctx) -> Result<Outcome> {
    let j = parse_range(&a.window)?;
    let window = SpectralWindow::new(j.0, j.1)?;
    let (data, cover, source) = eigendata(&a.eigendata, a.degree, a.cover_seed, a.h, 1.05 * j.1)?;
    let mut checks = Checks::default();
    checks.add("eigendata orthonormality and residuals", data.validate().is_ok());
    if let Some(dir) = &a.export_eigendata {
        data.export(dir)?;
    }
    let preset = load_preset(&a.preset, a.observable)?;
    let obs = preset.build(Some(&cover.base))?;
    let domain = FundamentalDomain::new(&cover.base, DEFAULT_TRUNCATION)?;
    let opts = variance_options(ctx, a.normalization, a.nevo_n, a.limit_samples);
    let rep = quantum_variance(&obs, &data, &window, &domain, opts, ctx.seed)?;
    checks.add("variance finite and nonnegative", rep.variance.is_finite() && rep.variance >= 0.0);
    checks.add("error bar finite", rep.std_err.is_finite());
    let mut t = Table::new("", &["mode", "nu", "lambda", "matrix_element", "limit", "term"]);
    for x in &rep.terms {
        t.push(vec![x.mode.to_string(), num(x.nu), num(x.lambda), num(x.matrix_element), num(x.limit), num(x.term)]);
    }
    let budget = match a.budget_t {
        Some(bt) => {
            let m = MeasureOptions {
                weight: ctx.weight,
                cutoff: CutoffSpec::new(bt, a.budget_sigma)?,
                theta_samples: 200,
                lambda_step: 0.5,
                nevo_n: a.nevo_n,
                seed: ctx.seed,
            };
            let c = measure_pipeline_constants(&obs, &cover, &window, &m)?;
            let b = variance_pipeline_bounds(&c, bt, a.budget_r, None, cover_bs_fraction(&cover, a.bs_samples, ctx.seed))?;
            checks.add("budget total finite", b.total.is_finite());
            Some(b)
        }
        None => None,
    };
    let mut prov = fem_provenance(source, a.h);
    prov["nevo_n"] = json!(a.nevo_n);
    prov["nevo_n_provenance"] = json!("assumed");
    prov["normalization"] = json!(rep.metadata.normalization);
    prov["preset"] = json!(preset);
    Ok(Outcome {
        tables: vec![t],
        result: json!({
            "surface_id": data.surface_id,
            "n_mesh": data.mesh.len(),
            "n_modes": data.n_modes(),
            "window": rep.window,
            "count": rep.count,
            "variance": rep.variance,
            "std_err": rep.std_err,
            "limit_std_err": rep.limit_std_err,
            "metadata": rep.metadata,
            "budget": budget,
        }),
        provenance: prov,
        checks,
    })
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct WeylArgs {
    #[arg(long)]
    pub eigendata: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub degree: usize,
    #[arg(long, default_value_t = 1)]
    pub cover_seed: u64,
    #[arg(long, default_value_t = 0.05)]
    pub h: f64,
    #[arg(long, default_value = "1:4")]
    pub window: String,
}

pub fn weyl(a: &WeylArgs, _: &Ctx) -> Result<Outcome> {
    let j = parse_range(&a.window)?;
    let (data, _, source) = eigendata(&a.eigendata, a.degree, a.cover_seed, a.h, 1.2 * j.1 * 1.05)?;
    let rep = weyl_ratio(&data, j)?;
    let mut t = Table::new("", &["mode", "nu", "in_window"]);
    for (i, nu) in data.eigenvalues.iter().enumerate() {
        t.push(vec![i.to_string(), num(*nu), (j.0..=j.1).contains(nu).to_string()]);
    }
    let mut checks = Checks::default();
    checks.add(
        format!("measured/predicted in [{}, {}]", WEYL_BAND.0, WEYL_BAND.1),
        rep.ratio.is_some_and(|r| (WEYL_BAND.0..=WEYL_BAND.1).contains(&r)),
    );
    Ok(Outcome {
        tables: vec![t],
        result: json!({ "surface_id": data.surface_id, "weyl": rep }),
        provenance: fem_provenance(source, a.h),
        checks,
    })
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TowerArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 4])]
    pub degrees: Vec<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub h: f64,
    /// Coarser spacing for the discretization error bar.
    #[arg(long, default_value_t = 0.1)]
    pub h_coarse: f64,
    #[arg(long, default_value = "1:4")]
    pub window: String,
    #[arg(long, default_value_t = 1)]
    pub cover_seed: u64,
    #[arg(long, value_enum, default_value_t = ObservableChoice::PeriodicBump)]
    pub observable: ObservableChoice,
    #[arg(long)]
    pub preset: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = NormalizationChoice::Count)]
    pub normalization: NormalizationChoice,
    #[arg(long, default_value_t = DEFAULT_NEVO_N)]
    pub nevo_n: f64,
    #[arg(long, default_value_t = 20_000)]
    pub limit_samples: usize,
}

pub fn tower(a: &TowerArgs, ctx: &Ctx) -> Result<Outcome> {
    let preset = load_preset(&a.preset, a.observable)?;
    let obs = preset.build(Some(&FuchsianGroup::bolza()))?;
    let opts = TowerOptions {
        degrees: a.degrees.clone(),
        h: a.h,
        h_coarse: a.h_coarse,
        window: parse_range(&a.window)?,
        cover_seed: a.cover_seed,
        seed: ctx.seed,
        variance: variance_options(ctx, a.normalization, a.nevo_n, a.limit_samples),
        eigen: EigenOptions::default(),
    };
    let rep = run_tower(&obs, &opts)?;
    let mut t = Table::new(
        "",
        &["degree", "surface_id", "n_dof", "count", "variance", "variance_coarse", "stat_err", "disc_err", "err", "weyl_ratio"],
    );
    for l in &rep.levels {
        t.push(vec![
            l.degree.to_string(),
            l.surface_id.clone(),
            l.n_dof.to_string(),
            l.report.count.to_string(),
            num(l.report.variance),
            num(l.variance_coarse),
            num(l.stat_err),
            num(l.disc_err),
            num(l.err),
            l.weyl.ratio.map_or_else(String::new, num),
        ]);
    }
    let mut checks = Checks::default();
    checks.add("variance nonincreasing within error bars", rep.nonincreasing);
    checks.add(format!("top-level Weyl ratio in [{}, {}]", WEYL_BAND.0, WEYL_BAND.1), rep.weyl_top_in_band);
    let mut prov = fem_provenance("p1_fem", a.h);
    prov["h_coarse"] = json!(a.h_coarse);
    prov["nevo_n"] = json!(a.nevo_n);
    prov["nevo_n_provenance"] = json!("assumed");
    prov["normalization"] = json!(Normalization::from(a.normalization));
    prov["preset"] = json!(preset);
    prov["covers"] = json!("independent random covers of the Bolza surface");
    Ok(Outcome { tables: vec![t], result: serde_json::to_value(&rep)?, provenance: prov, checks })
}
