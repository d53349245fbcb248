use crate::analytic::{lambda_interval, parse_range};
use crate::output::{num, Checks, Outcome, Table};
use crate::Ctx;
use anyhow::{anyhow, bail, Result};
use clap::{Args, ValueEnum};
use hqe_core::geometry::{BoundaryPoint, DiscPoint};
use hqe_core::transforms::{smooth_bump, RadialKernel};
use hqe_fuchsian::cover::{bs_statistic, DEFAULT_TRUNCATION};
use hqe_fuchsian::domain::FundamentalDomain;
use hqe_fuchsian::group::FuchsianGroup;
use hqe_fuchsian::orbit::{injectivity_radius_at, orbit_enumerate};
use hqe_fuchsian::periodize::{hs_bound_check, HsOptions};
use hqe_fuchsian::words::DEFAULT_SYSTOLE_WORD_LENGTH;
use hqe_observables::preset::{ObservablePreset, PresetParameters};
use hqe_observables::symbol::{boundary_at_angle, check_a1, complete_symbol, symbol_of, theta_second_derivative_norm};
use hqe_variance::pipeline::injrad_cap;
use hqe_variance::tower::bolza_cover;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::f64::consts::TAU;
use std::path::PathBuf;

/// "bolza" or "cyclic:L".
pub fn parse_group(s: &str) -> Result<FuchsianGroup> {
    match s.split_once(':') {
        None if s == "bolza" => Ok(FuchsianGroup::bolza()),
        Some(("cyclic", l)) => Ok(FuchsianGroup::cyclic(l.trim().parse()?)?),
        _ => bail!("unknown group {s:?}; expected bolza or cyclic:L"),
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct OrbitArgs {
    /// bolza or cyclic:L.
    #[arg(long, default_value = "bolza")]
    pub group: String,
    #[arg(long, default_value_t = 3.1)]
    pub radius: f64,
    /// Center x,y in the disc.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.0])]
    pub center: Vec<f64>,
    /// Word-length cap of the enumeration.
    #[arg(long, default_value_t = 64)]
    pub word_cap: usize,
}

fn point(xy: &[f64]) -> Result<DiscPoint> {
    match xy {
        [x, y] => Ok(DiscPoint::new(*x, *y)?),
        _ => Err(anyhow!("expected two coordinates, got {}", xy.len())),
    }
}

pub fn orbit(a: &OrbitArgs, _: &Ctx) -> Result<Outcome> {
    let g = parse_group(&a.group)?;
    let center = point(&a.center)?;
    let ball = orbit_enumerate(&g, &center, a.radius, a.word_cap)?;
    let mut t = Table::new("", &["index", "word", "displacement", "trace"]);
    for (i, e) in ball.elements.iter().enumerate() {
        let word = e.word.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        t.push(vec![i.to_string(), word, num(e.displacement), num(e.element.trace())]);
    }
    let mut checks = Checks::default();
    checks.add("identity in the ball", ball.elements.iter().any(|e| e.displacement < 1e-12));
    checks.add("every displacement within R", ball.elements.iter().all(|e| e.displacement <= a.radius + 1e-9));
    let distinct = ball
        .elements
        .iter()
        .enumerate()
        .all(|(i, x)| ball.elements[..i].iter().all(|y| !x.element.approx_eq(&y.element, 1e-8)));
    checks.add("elements distinct", distinct);
    let inj = injectivity_radius_at(&g, &center, a.radius)?;
    Ok(Outcome {
        tables: vec![t],
        result: json!({
            "group": g.label,
            "count": ball.len(),
            "radius": a.radius,
            "injectivity_radius": inj.value,
            "injectivity_radius_is_lower_bound": inj.lower_bound,
        }),
        provenance: json!({ "word_cap": a.word_cap }),
        checks,
    })
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BsArgs {
    /// Cover degree over the Bolza surface (1 is the surface itself).
    #[arg(long, default_value_t = 1)]
    pub degree: usize,
    #[arg(long, default_value_t = 1)]
    pub cover_seed: u64,
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 1.5, 2.0, 2.5])]
    pub radii: Vec<f64>,
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
}

pub fn bs_stat(a: &BsArgs, ctx: &Ctx) -> Result<Outcome> {
    let cover = bolza_cover(a.degree, a.cover_seed)?;
    let mut t = Table::new("", &["radius", "fraction", "std_err", "search_reach"]);
    let mut est = Vec::new();
    for &r in &a.radii {
        let e = bs_statistic(&cover, r, a.samples, ctx.seed)?;
        t.push(vec![num(r), num(e.fraction), num(e.std_err), num(e.search_reach)]);
        est.push(e);
    }
    let mut checks = Checks::default();
    checks.add("fractions in [0, 1]", est.iter().all(|e| (0.0..=1.0).contains(&e.fraction)));
    let mut order: Vec<usize> = (0..est.len()).collect();
    order.sort_by(|&i, &j| est[i].radius.total_cmp(&est[j].radius));
    let monotone = order.windows(2).all(|w| {
        let (p, q) = (&est[w[0]], &est[w[1]]);
        q.fraction + 2.0 * p.std_err.hypot(q.std_err) >= p.fraction
    });
    checks.add("fraction nondecreasing in the radius", monotone);
    let volume = cover.volume().unwrap_or(f64::NAN);
    Ok(Outcome {
        tables: vec![t],
        result: json!({
            "degree": cover.degree,
            "volume": volume,
            "systole": cover.systole(DEFAULT_SYSTOLE_WORD_LENGTH).map(|s| s.value),
            "injectivity_radius_cap": injrad_cap(volume),
            "estimates": est,
        }),
        provenance: json!({ "cover_seed": a.cover_seed, "samples": a.samples, "systole_word_length": DEFAULT_SYSTOLE_WORD_LENGTH }),
        checks,
    })
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct HsArgs {
    /// Groups: bolza or cyclic:L.
    #[arg(long, value_delimiter = ',', default_values_t = ["cyclic:1".to_string(), "cyclic:3".to_string(), "bolza".to_string()])]
    pub groups: Vec<String>,
    /// Kernels: gauss (e^{−t²}) or bump (support 1.5).
    #[arg(long, value_delimiter = ',', default_values_t = ["gauss".to_string(), "bump".to_string()])]
    pub kernels: Vec<String>,
    /// Truncation radii r.
    #[arg(long = "r", value_delimiter = ',', default_values_t = [1.0, 2.0])]
    pub radii: Vec<f64>,
    #[arg(long, default_value_t = 3000)]
    pub samples: usize,
}

fn named_kernel(s: &str) -> Result<RadialKernel> {
    match s {
        "gauss" => Ok(RadialKernel::new("gauss", 12.0, |t| (-t * t).exp())),
        "bump" => Ok(RadialKernel::new("bump", 1.5, |t| smooth_bump(t, -1.5, 1.5))),
        _ => bail!("unknown kernel {s:?}; expected gauss or bump"),
    }
}

pub fn hs_check(a: &HsArgs, ctx: &Ctx) -> Result<Outcome> {
    let mut t = Table::new(
        "",
        &["group", "kernel", "r", "lhs", "lhs_std_err", "first_term", "second_term", "rhs", "margin", "injrad_fraction", "pass"],
    );
    let mut checks = Checks::default();
    let mut reports = Vec::new();
    for gs in &a.groups {
        let g = parse_group(gs)?;
        for ks in &a.kernels {
            let k = named_kernel(ks)?;
            for &r in &a.radii {
                let rep = hs_bound_check(&k, &g, r, a.samples, ctx.seed, HsOptions::default())?;
                t.push(vec![
                    gs.clone(),
                    ks.clone(),
                    num(r),
                    num(rep.lhs_estimate),
                    num(rep.lhs_std_err),
                    num(rep.first_term),
                    num(rep.second_term),
                    num(rep.rhs_bound),
                    num(rep.margin),
                    num(rep.injrad_fraction),
                    rep.pass.to_string(),
                ]);
                checks.add(format!("{gs} {ks} r = {r}"), rep.pass);
                reports.push(json!({ "group": gs, "kernel": ks, "report": rep }));
            }
        }
    }
    let o = HsOptions::default();
    Ok(Outcome {
        tables: vec![t],
        result: json!({ "cases": reports }),
        provenance: json!({ "truncation": o.truncation, "t_cut": o.t_cut, "chi": "1 − (3x² − 2x³)", "samples": a.samples }),
        checks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableChoice {
    Laplacian,
    Derivative,
    RadialKernel,
    PeriodicBump,
}

impl ObservableChoice {
    pub fn preset(self) -> ObservablePreset {
        ObservablePreset::new(match self {
            Self::Laplacian => PresetParameters::Laplacian { coefficient: 1.0 },
            Self::Derivative => PresetParameters::Derivative { angle: 0.0 },
            Self::RadialKernel => PresetParameters::RadialBumpKernel { range: 1.0, amplitude: 1.0 },
            Self::PeriodicBump => PresetParameters::PeriodicBump { center: [0.2, 0.1], radius: 1.0, amplitude: 1.0, mean_zero: true },
        })
    }
}

/// Preset from a JSON file when given, otherwise the named choice.
pub fn load_preset(file: &Option<PathBuf>, choice: ObservableChoice) -> Result<ObservablePreset> {
    match file {
        Some(p) => Ok(ObservablePreset::from_json(&std::fs::read_to_string(p)?)?),
        None => Ok(choice.preset()),
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SymbolArgs {
    #[arg(long, value_enum, default_value_t = ObservableChoice::Laplacian)]
    pub observable: ObservableChoice,
    /// Observable preset JSON; overrides --observable.
    #[arg(long)]
    pub preset: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0])]
    pub lambdas: Vec<f64>,
    /// Hyperbolic distances of the sample points from the origin.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.5, 1.0])]
    pub distances: Vec<f64>,
    /// Boundary directions per point.
    #[arg(long, default_value_t = 8)]
    pub directions: usize,
    /// Eigenvalue window lo:hi for the θ-derivative norm.
    #[arg(long, default_value = "1:4")]
    pub window: String,
    #[arg(long, default_value_t = 200)]
    pub theta_samples: usize,
    #[arg(long, default_value_t = 0.25)]
    pub lambda_step: f64,
}

pub fn symbol(a: &SymbolArgs, ctx: &Ctx) -> Result<Outcome> {
    let preset = load_preset(&a.preset, a.observable)?;
    let base = FuchsianGroup::bolza();
    let obs = preset.build(Some(&base))?;
    let points: Vec<DiscPoint> = a.distances.iter().enumerate().map(|(i, &d)| DiscPoint::polar(d, 0.7 * i as f64)).collect();
    let mut t = Table::new("", &["z_re", "z_im", "lambda", "theta", "symbol_re", "symbol_im"]);
    let mut finite = true;
    for z in &points {
        for &l in &a.lambdas {
            for j in 0..a.directions {
                let th = TAU * j as f64 / a.directions as f64;
                let b: BoundaryPoint = boundary_at_angle(z, th);
                let v = complete_symbol(&obs, z, l, &b)?;
                finite &= v.re.is_finite() && v.im.is_finite();
                t.push(vec![num(z.re), num(z.im), num(l), num(th), num(v.re), num(v.im)]);
            }
        }
    }
    let interval = lambda_interval(parse_range(&a.window)?)?;
    let sym = symbol_of(&obs, interval);
    let a1 = check_a1(&sym, &points, &a.lambdas, 1e-6)?;
    let domain = FundamentalDomain::new(&base, DEFAULT_TRUNCATION)?;
    let theta = theta_second_derivative_norm(&sym, interval, a.lambda_step, &domain, a.theta_samples, ctx.seed)?;
    let mut checks = Checks::default();
    checks.add("symbol finite at every sample", finite);
    checks.add("θ-derivative norm finite", theta.value.is_finite());
    Ok(Outcome {
        tables: vec![t],
        result: json!({ "observable": obs.label, "variant": obs.variant.name(), "a1": a1, "theta_norm": theta }),
        provenance: json!({ "preset": preset, "locality_constants": obs.constants, "fundamental_domain": "Bolza Dirichlet domain" }),
        checks,
    })
}
