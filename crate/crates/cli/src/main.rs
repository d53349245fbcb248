mod analytic;
mod groups;
mod output;
mod spectral;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use hqe_core::transforms::PlancherelWeight;
use output::Outcome;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Weight {
    Paper,
    Harmonic,
}

impl Weight {
    fn convention(self) -> PlancherelWeight {
        match self {
            Self::Paper => PlancherelWeight::PaperTanh2Pi,
            Self::Harmonic => PlancherelWeight::HarmonicTanhPi,
        }
    }
}

#[derive(Parser)]
#[command(name = "hqe", version, about = "Hyperbolic quantum-variance experiments")]
struct Cli {
    /// Output directory for CSV tables and the JSON summary.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true, default_value_t = 2024)]
    seed: u64,
    /// Plancherel weight convention.
    #[arg(long, global = true, value_enum, default_value_t = Weight::Paper)]
    weight: Weight,
    /// JSON file whose entries override seed, weight, output directory and parameters.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quantum variance of the interval model against the M²/N bound.
    Toy1d(analytic::Toy1dArgs),
    /// Randomized checks of the disc-model identities.
    GeometryCheck(analytic::GeometryArgs),
    /// Spherical function by quadrature and by series; c-function density.
    Spherical(analytic::SphericalArgs),
    /// Abel and Selberg routes for propagator multipliers; Helgason radial reduction.
    Selberg(analytic::SelbergArgs),
    /// Weighted sup of synthesized kernels and its stability under refinement.
    KernelDecay(analytic::DecayArgs),
    /// Positivity certificate for the time-averaged multiplier.
    Prop33(analytic::Prop33Args),
    /// Oscillatory-integral constant and the smoothing-error envelope.
    LemmaA1(analytic::LemmaA1Args),
    /// Orbit ball of a Fuchsian group.
    Orbit(groups::OrbitArgs),
    /// Thin-part fraction of a Bolza cover.
    BsStat(groups::BsArgs),
    /// Hilbert–Schmidt estimate for truncated periodization.
    HsCheck(groups::HsArgs),
    /// Complete symbol of an observable and its angular statistics.
    Symbol(groups::SymbolArgs),
    /// Quantum variance over a spectral window.
    Variance(spectral::VarianceArgs),
    /// Measured against predicted eigenvalue density.
    Weyl(spectral::WeylArgs),
    /// Quantum variance across a tower of covers.
    Tower(spectral::TowerArgs),
}

pub struct Ctx {
    pub seed: u64,
    pub weight: PlancherelWeight,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    subcommand: Option<String>,
    seed: Option<u64>,
    weight_convention: Option<Weight>,
    output_dir: Option<PathBuf>,
    parameters: Option<serde_json::Map<String, Value>>,
}

enum Failure {
    Usage(anyhow::Error),
    Computation(anyhow::Error),
}

/// Applies config overrides to the parsed flags; every overridden parameter must exist.
fn merge<A: Serialize + DeserializeOwned>(args: &A, overrides: Option<&serde_json::Map<String, Value>>) -> Result<A> {
    let mut v = serde_json::to_value(args)?;
    if let (Some(obj), Some(o)) = (v.as_object_mut(), overrides) {
        for (k, x) in o {
            if !obj.contains_key(k) {
                bail!("unknown parameter {k:?}");
            }
            obj.insert(k.clone(), x.clone());
        }
    }
    Ok(serde_json::from_value(v)?)
}

fn read_config(path: &Path) -> Result<ConfigFile> {
    let s = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&s).with_context(|| format!("parsing {}", path.display()))
}

fn execute<A: Serialize + DeserializeOwned>(
    name: &str,
    args: &A,
    cli: &Cli,
    run: fn(&A, &Ctx) -> Result<Outcome>,
) -> std::result::Result<(Value, bool, PathBuf), (Failure, PathBuf)> {
    let usage = |e: anyhow::Error| (Failure::Usage(e), cli.out.clone());
    let cfg = match &cli.config {
        Some(p) => read_config(p).map_err(usage)?,
        None => ConfigFile::default(),
    };
    if let Some(s) = &cfg.subcommand {
        if s != name {
            return Err(usage(anyhow!("config is for subcommand {s:?}, not {name:?}")));
        }
    }
    let out = cfg.output_dir.clone().unwrap_or_else(|| cli.out.clone());
    let params = merge(args, cfg.parameters.as_ref()).map_err(|e| (Failure::Usage(e), out.clone()))?;
    let weight = cfg.weight_convention.unwrap_or(cli.weight);
    let ctx = Ctx { seed: cfg.seed.unwrap_or(cli.seed), weight: weight.convention() };
    let run_record = json!({
        "subcommand": name,
        "parameters": serde_json::to_value(&params).expect("parameters serialize"),
        "seed": ctx.seed,
        "weight_convention": weight,
        "output_dir": out,
    });
    let fail = |e: anyhow::Error| (Failure::Computation(e), out.clone());
    let outcome = run(&params, &ctx).map_err(fail)?;
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display())).map_err(fail)?;
    let mut files = Vec::new();
    for t in &outcome.tables {
        files.push(output::write_table(&out, name, t).map_err(fail)?);
    }
    let pass = outcome.checks.pass();
    let mut provenance = outcome.provenance;
    if let Some(p) = provenance.as_object_mut() {
        p.insert("weight_convention".into(), json!(ctx.weight.label()));
    }
    let summary = json!({
        "run": run_record,
        "provenance": provenance,
        "result": outcome.result,
        "assertions": outcome.checks.to_json(),
        "pass": pass,
        "csv": files,
    });
    output::write_json(&out, name, &summary).map_err(fail)?;
    Ok((summary, pass, out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = match &cli.command {
        Command::Toy1d(_) => "toy1d",
        Command::GeometryCheck(_) => "geometry-check",
        Command::Spherical(_) => "spherical",
        Command::Selberg(_) => "selberg",
        Command::KernelDecay(_) => "kernel-decay",
        Command::Prop33(_) => "prop33",
        Command::LemmaA1(_) => "lemma-a1",
        Command::Orbit(_) => "orbit",
        Command::BsStat(_) => "bs-stat",
        Command::HsCheck(_) => "hs-check",
        Command::Symbol(_) => "symbol",
        Command::Variance(_) => "variance",
        Command::Weyl(_) => "weyl",
        Command::Tower(_) => "tower",
    };
    let res = match &cli.command {
        Command::Toy1d(a) => execute(name, a, &cli, analytic::toy1d),
        Command::GeometryCheck(a) => execute(name, a, &cli, analytic::geometry_check),
        Command::Spherical(a) => execute(name, a, &cli, analytic::spherical),
        Command::Selberg(a) => execute(name, a, &cli, analytic::selberg),
        Command::KernelDecay(a) => execute(name, a, &cli, analytic::kernel_decay),
        Command::Prop33(a) => execute(name, a, &cli, analytic::prop33),
        Command::LemmaA1(a) => execute(name, a, &cli, analytic::lemma_a1),
        Command::Orbit(a) => execute(name, a, &cli, groups::orbit),
        Command::BsStat(a) => execute(name, a, &cli, groups::bs_stat),
        Command::HsCheck(a) => execute(name, a, &cli, groups::hs_check),
        Command::Symbol(a) => execute(name, a, &cli, groups::symbol),
        Command::Variance(a) => execute(name, a, &cli, spectral::variance),
        Command::Weyl(a) => execute(name, a, &cli, spectral::weyl),
        Command::Tower(a) => execute(name, a, &cli, spectral::tower),
    };
    match res {
        Ok((summary, pass, out)) => {
            let failed: Vec<&str> = summary["assertions"]
                .as_array()
                .into_iter()
                .flatten()
                .filter(|a| a["pass"] == json!(false))
                .filter_map(|a| a["name"].as_str())
                .collect();
            println!("{name}: {} ({})", if pass { "pass" } else { "FAIL" }, out.join(format!("{name}.json")).display());
            for f in failed {
                println!("  failed: {f}");
            }
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err((failure, out)) => {
            let (kind, err, code) = match failure {
                Failure::Usage(e) => ("usage", e, 2),
                Failure::Computation(e) => ("computation", e, 3),
            };
            let record = json!({
                "subcommand": name,
                "status": "error",
                "kind": kind,
                "message": format!("{err:#}"),
            });
            eprintln!("{record}");
            if std::fs::create_dir_all(&out).is_ok() {
                let _ = output::write_json(&out, name, &record);
            }
            ExitCode::from(code)
        }
    }
}
