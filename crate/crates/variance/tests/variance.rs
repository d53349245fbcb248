use hqe_core::geometry::{DiscPoint, GroupElement};
use hqe_core::propagators::CutoffSpec;
use hqe_core::transforms::PlancherelWeight;
use hqe_fuchsian::cover::{CoverSurface, DEFAULT_TRUNCATION};
use hqe_fuchsian::domain::FundamentalDomain;
use hqe_fuchsian::group::FuchsianGroup;
use hqe_observables::preset::{ObservablePreset, PresetParameters};
use hqe_variance::eigendata::ingest_eigendata;
use hqe_variance::fem::{fem_eigensolve, fem_eigensolve_above, FemMesh, FemSurface};
use hqe_variance::lanczos::{count_below, EigenOptions};
use hqe_variance::pipeline::*;
use hqe_variance::qv::*;
use hqe_variance::toy1d::*;
use hqe_variance::tower::bolza_cover;
use hqe_variance::window::SpectralWindow;
use hqe_variance::Error;
use std::f64::consts::PI;
use std::path::Path;

/// (1/2π)∫ s tanh(πs) ds over the λ-image of J, from mpmath at 30 digits.
const WEYL_ORACLE: [((f64, f64), f64); 3] = [
    ((1.0, 4.0), 0.238508353387073306581913214731),
    ((1.0, 2.0), 0.0793712949105457113344909308629),
    ((2.0, 3.0), 0.0795617830659441055129595251718),
];

/// Bolza λ₁ from the literature.
const BOLZA_LAMBDA1: f64 = 3.8388872588;

fn bolza() -> FemSurface {
    FemSurface::BolzaCover(CoverSurface::trivial(FuchsianGroup::bolza()))
}

fn bump(mean_zero: bool) -> hqe_observables::Observable {
    ObservablePreset::new(PresetParameters::PeriodicBump { center: [0.2, 0.1], radius: 1.0, amplitude: 1.0, mean_zero })
        .build(Some(&FuchsianGroup::bolza()))
        .unwrap()
}

fn constant() -> hqe_observables::Observable {
    ObservablePreset::new(PresetParameters::Constant { value: 1.0 }).build(None).unwrap()
}

fn bolza_domain() -> FundamentalDomain {
    FundamentalDomain::new(&FuchsianGroup::bolza(), DEFAULT_TRUNCATION).unwrap()
}

#[test]
fn window_maps_nu_to_lambda() {
    let w = SpectralWindow::new(1.0, 4.0).unwrap();
    assert!((w.i.0 - 0.75f64.sqrt()).abs() < 1e-15 && (w.i.1 - 3.75f64.sqrt()).abs() < 1e-15);
    let width = w.i.1 - w.i.0;
    assert!((w.i.0 - w.i_prime.0 - 0.1 * width).abs() < 1e-14);
    assert!((w.i_prime.1 - w.i.1 - 0.1 * width).abs() < 1e-14);
    assert!(SpectralWindow::new(0.25, 1.0).is_err());
    assert!(SpectralWindow::new(0.25 + 1e-10, 1.0).is_err());
    assert!(SpectralWindow::new(2.0, 1.0).is_err());
    assert_eq!(SpectralWindow::parse("1:4").unwrap(), w);
    assert!(SpectralWindow::parse("1-4").is_err());
}

#[test]
fn toy_constant_has_zero_variance() {
    let r = toy1d_variance(100.0, (1.0, 2.0), ToyObservable::Constant { value: 0.7 }).unwrap();
    assert!(r.variance < 1e-26, "{}", r.variance);
    assert!(r.modes.iter().all(|m| (m.matrix_element - 0.7).abs() < 1e-13));
}

#[test]
fn toy_cosine_matches_closed_form() {
    // (2/L)∫cos(fx)sin²(wx) = (1/L)[sin(fL)/f − (sin((f−2w)L)/(f−2w) + sin((f+2w)L)/(f+2w))/2].
    let (l, f) = (100.0, 2.0);
    let r = toy1d_variance(l, (1.0, 2.0), ToyObservable::Cosine { frequency: f }).unwrap();
    let sinc = |a: f64| if a.abs() < 1e-12 { l } else { (a * l).sin() / a };
    for m in &r.modes {
        let w = m.k as f64 * PI / l;
        let exact = (sinc(f) - 0.5 * (sinc(f - 2.0 * w) + sinc(f + 2.0 * w))) / l;
        assert!((m.matrix_element - exact).abs() < 1e-12, "k = {}", m.k);
    }
    assert!((r.mean - sinc(f) / l).abs() < 1e-14);
}

#[test]
fn toy_step_obeys_parseval_bound() {
    let r = toy1d_variance(100.0, (1.0, 2.0), ToyObservable::AlternatingStep { width: 0.7 }).unwrap();
    assert!(r.variance <= r.bound, "{} > {}", r.variance, r.bound);
    assert!(r.quadrature_error <= 1e-10);
    assert_eq!(r.count, window_modes(100.0, 1.0, 2.0).count());
}

#[test]
fn toy_bound_and_decay_across_lengths() {
    for a in standard_observables() {
        let rs: Vec<ToyVariance> = [100.0, 400.0, 1600.0].iter().map(|&l| toy1d_variance(l, (1.0, 2.0), a).unwrap()).collect();
        for r in &rs {
            assert!(r.variance <= r.bound, "{:?} at L = {}", a, r.length);
            assert!(r.quadrature_error <= 1e-10, "{:?}: {}", a, r.quadrature_error);
        }
        assert!(rs[2].variance < rs[0].variance, "{a:?}");
    }
}

#[test]
fn toy_count_grows_linearly() {
    let ratios: Vec<f64> = [100.0, 400.0, 1600.0]
        .iter()
        .map(|&l| toy1d_variance(l, (1.0, 2.0), ToyObservable::Cosine { frequency: 2.0 }).unwrap().count as f64 / l)
        .collect();
    let mean = ratios.iter().sum::<f64>() / 3.0;
    for r in &ratios {
        assert!((r / mean - 1.0).abs() < 0.05, "{ratios:?}");
    }
    let c_i = (2f64.sqrt() - 1.0) / PI;
    assert!((ratios[2] / c_i - 1.0).abs() < 0.01);
}

#[test]
fn toy_empty_window() {
    assert!(matches!(toy1d_variance(1.0, (1.0, 2.0), ToyObservable::Constant { value: 1.0 }), Err(Error::EmptyWindow { .. })));
}

#[test]
fn torus_self_test() {
    let d = fem_eigensolve(&FemSurface::FlatTorus, 0.02, 10, EigenOptions::default()).unwrap();
    let exact = [0.0, 1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 2.0, 4.0].map(|s| 4.0 * PI * PI * s);
    assert!(d.eigenvalues[0].abs() < 1e-8);
    for (v, e) in d.eigenvalues.iter().zip(exact).skip(1) {
        assert!((v / e - 1.0).abs() < 0.02, "{v} vs {e}");
    }
    d.validate().unwrap();
}

#[test]
fn bolza_mesh_and_ground_state() {
    let mesh = FemMesh::build(&bolza(), 0.05).unwrap();
    let (k, m) = mesh.assemble();
    assert!((m.iter().sum::<f64>() / (4.0 * PI) - 1.0).abs() < 0.01);
    let ones = vec![1.0; m.len()];
    let row_sums: f64 = k.outer_iterator().map(|r| r.iter().map(|(j, v)| v * ones[j]).sum::<f64>().abs()).fold(0.0, f64::max);
    assert!(row_sums < 1e-10, "{row_sums}");
    let d = fem_eigensolve(&bolza(), 0.05, 4, EigenOptions::default()).unwrap();
    assert!(d.eigenvalues[0].abs() < 1e-3);
    let psi0 = &d.eigenvectors[0];
    let c = 1.0 / m.iter().sum::<f64>().sqrt();
    let spread = psi0.iter().map(|p| (p / c - 1.0).abs()).fold(0.0, f64::max);
    assert!(spread < 1e-6, "{spread}");
    for v in &d.eigenvalues[1..] {
        assert!((v / BOLZA_LAMBDA1 - 1.0).abs() < 0.01, "{v}");
    }
    assert_eq!(count_below(&k, &m, 0.5 * (d.eigenvalues[0] + d.eigenvalues[1])).unwrap(), 1);
}

#[test]
fn misaligned_pairing_is_rejected() {
    let mut g = FuchsianGroup::bolza();
    let r = GroupElement::rotation(0.05);
    g.generators[0] = r.compose(&g.generators[0]).compose(&r.inverse());
    let s = FemSurface::BolzaCover(CoverSurface::trivial(g));
    assert!(matches!(FemMesh::build(&s, 0.05), Err(Error::MeshPairingFailure { .. })));
    assert!(matches!(FemMesh::build(&bolza(), 0.3), Err(Error::InvalidInput(_))));
}

#[test]
fn cover_meshes_glue_consistently() {
    let cover = bolza_cover(4, 1).unwrap();
    let mesh = FemMesh::build(&FemSurface::BolzaCover(cover), 0.1).unwrap();
    let base = FemMesh::build(&bolza(), 0.1).unwrap();
    let euler = |m: &FemMesh| {
        let mut edges = std::collections::HashSet::new();
        for t in &m.triangles {
            for c in 0..3 {
                let (a, b) = (m.dof[t[c]], m.dof[t[(c + 1) % 3]]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        m.n_dof() as i64 - edges.len() as i64 + m.triangles.len() as i64
    };
    assert_eq!(euler(&base), -2);
    assert_eq!(euler(&mesh), -8);
}

#[test]
fn weyl_law_trend_on_degree_four_cover() {
    let s = FemSurface::BolzaCover(bolza_cover(4, 1).unwrap());
    let d = fem_eigensolve_above(&s, 0.05, 10.5, EigenOptions::default()).unwrap();
    let n = d.eigenvalues.iter().filter(|v| **v <= 10.0).count() as f64;
    let weyl = d.volume * 10.0 / (4.0 * PI);
    assert!((n / weyl - 1.0).abs() < 0.2, "{n} vs {weyl}");
}

#[test]
fn eigendata_round_trip_and_rejections() {
    let d = fem_eigensolve(&FemSurface::FlatTorus, 0.1, 6, EigenOptions::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    d.export(dir.path()).unwrap();
    let back = ingest_eigendata(dir.path()).unwrap();
    assert_eq!(back, d);
    for (a, b) in back.eigenvectors.iter().flatten().zip(d.eigenvectors.iter().flatten()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }

    let mut bad = d.clone();
    bad.eigenvectors[1][0] += 0.5;
    bad.export(dir.path()).unwrap();
    assert!(matches!(ingest_eigendata(dir.path()), Err(Error::OrthonormalityViolation { .. })));

    let mut bad = d.clone();
    bad.residuals[2] = 1.0;
    bad.export(dir.path()).unwrap();
    assert!(matches!(ingest_eigendata(dir.path()), Err(Error::ResidualViolation { mode: 2, .. })));

    let mut bad = d.clone();
    bad.eigenvalues.swap(0, 3);
    bad.export(dir.path()).unwrap();
    assert!(matches!(ingest_eigendata(dir.path()), Err(Error::FormatError(_))));

    d.export(dir.path()).unwrap();
    std::fs::write(dir.path().join("eigenvalues.csv"), "nu\n0.0\nabc\n").unwrap();
    assert!(matches!(ingest_eigendata(dir.path()), Err(Error::FormatError(_))));
    std::fs::remove_file(dir.path().join("mesh.csv")).unwrap();
    assert!(matches!(ingest_eigendata(dir.path()), Err(Error::FormatError(_))));
}

#[test]
fn shipped_torus_file_is_accepted() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/torus_selftest");
    let d = ingest_eigendata(&dir).unwrap();
    assert_eq!(d.n_modes(), 10);
    assert_eq!(d.surface_id, "flat_torus");
}

#[test]
fn constant_observable_has_zero_variance() {
    let d = fem_eigensolve_above(&bolza(), 0.1, 6.0, EigenOptions::default()).unwrap();
    let w = SpectralWindow::new(1.0, 6.0).unwrap();
    let r = quantum_variance(&constant(), &d, &w, &bolza_domain(), VarianceOptions::default(), 3).unwrap();
    assert_eq!(r.count, d.eigenvalues.iter().filter(|v| **v >= 1.0 && **v <= 6.0).count());
    assert!(r.variance < 1e-20, "{}", r.variance);
    assert!(r.terms.iter().all(|t| t.term < 1e-20));
}

#[test]
fn mean_zero_variance_is_mean_of_squared_elements() {
    let d = fem_eigensolve_above(&bolza(), 0.1, 6.0, EigenOptions::default()).unwrap();
    let a = bump(true);
    let w = SpectralWindow::new(1.0, 6.0).unwrap();
    let r = quantum_variance(&a, &d, &w, &bolza_domain(), VarianceOptions::default(), 3).unwrap();
    let f = match &a.variant {
        hqe_observables::Variant::Multiplication(f) => f.clone(),
        _ => unreachable!(),
    };
    let limit = r.terms[0].limit;
    assert!(limit.abs() < 4.0 * r.limit_std_err, "{limit} ± {}", r.limit_std_err);
    let mut sum = 0.0;
    for t in &r.terms {
        let me: f64 = d.mesh.iter().zip(&d.eigenvectors[t.mode]).map(|(m, p)| m.weight * f(&DiscPoint { re: m.x, im: m.y }) * p * p).sum();
        assert!((me - t.matrix_element).abs() < 1e-14);
        sum += (me - limit).powi(2);
    }
    assert!((r.variance - sum / r.count as f64).abs() < 1e-15);
    assert!(r.variance >= 0.0 && r.std_err > 0.0);
    assert_eq!(r.metadata.nevo_n_provenance, "assumed");
}

#[test]
fn variance_rejects_empty_window_and_non_multiplication() {
    let d = fem_eigensolve(&bolza(), 0.1, 4, EigenOptions::default()).unwrap();
    let w = SpectralWindow::new(1.0, 2.0).unwrap();
    assert!(matches!(quantum_variance(&constant(), &d, &w, &bolza_domain(), VarianceOptions::default(), 1), Err(Error::EmptyWindow { .. })));
    let lap = ObservablePreset::new(PresetParameters::Laplacian { coefficient: 1.0 }).build(None).unwrap();
    let w = SpectralWindow::new(1.0, 4.0).unwrap();
    assert!(matches!(quantum_variance(&lap, &d, &w, &bolza_domain(), VarianceOptions::default(), 1), Err(Error::InvalidInput(_))));
}

#[test]
fn weyl_prediction() {
    assert!((weyl_predicted((1.0, 4.0)) - WEYL_PREDICTED_J14).abs() < 1e-15);
    for (j, v) in WEYL_ORACLE {
        assert!((weyl_predicted(j) - v).abs() < 1e-13, "{j:?}");
    }
    assert!(weyl_predicted((1.5, 2.5)) < weyl_predicted((1.0, 4.0)));
    assert!(weyl_predicted((2.0, 2.0)) == 0.0);
}

#[test]
fn weyl_ratio_needs_resolved_window() {
    let d = fem_eigensolve(&bolza(), 0.1, 4, EigenOptions::default()).unwrap();
    assert!(matches!(weyl_ratio(&d, (1.0, 4.0)), Err(Error::WindowNotResolved { .. })));
    let r = weyl_ratio(&d, (2.0, 2.0)).unwrap();
    assert_eq!((r.count, r.predicted, r.ratio), (0, 0.0, None));
}

fn frozen_constants() -> PipelineConstants {
    PipelineConstants { theta_norm: 0.8, sup_kernel: 1.5, k_rho_l2: 0.3, range: 0.5, systole: 3.06, volume: 4.0 * PI, nevo_n: 2.0 }
}

#[test]
fn budget_matches_hand_computation() {
    let c = frozen_constants();
    let b = variance_pipeline_bounds(&c, 1.0, 2.0, Some(MeanPart { s: 1.0, k_l2: 0.2, sup_k: 0.7 }), |_| Ok(0.25)).unwrap();
    let st: f64 = 2.5;
    let cap = (1.0 + 2.0f64).acosh();
    assert!(cap < 4.5);
    let hand = [
        0.8 / 0.5,
        2.0 * (1.0 + (st / 2.0).powi(2)) * (PI * 0.3 + 0.3) * 2.25 * (2.0 * 4.5f64).exp() / 3.06,
        2.0 * (st / 2.0).powi(2) * (2.0 * st).exp() * 2.25 * 0.3,
        2.0 * st.exp() * 2.25 / 9.0,
        (0.2 + (2.0 * 3.0f64).exp() / 3.06 * 0.49) / 9.0,
    ];
    for (t, h) in b.terms.iter().zip(hand) {
        assert!((t.value / h - 1.0).abs() < 1e-14, "{}: {} vs {h}", t.name, t.value);
    }
    assert_eq!(b.terms.len(), 5);
    assert_eq!(b.dominant, "thin_part");
    assert!(b.bs.iter().all(|(_, f)| *f == 1.0));
}

#[test]
fn budget_scaling_in_t_and_r() {
    let c = PipelineConstants { range: 0.0, volume: 1e9, ..frozen_constants() };
    let frac = |_: f64| Ok(0.0);
    let b1 = variance_pipeline_bounds(&c, 1.0, 2.0, None, frac).unwrap();
    let b2 = variance_pipeline_bounds(&c, 2.0, 2.0, None, frac).unwrap();
    assert_eq!(b2.terms[0].value * 2.0, b1.terms[0].value);
    let b4 = variance_pipeline_bounds(&c, 1.0, 4.0, None, frac).unwrap();
    assert!((b4.terms[2].value * 4.0 / b1.terms[2].value - 1.0).abs() < 1e-14);
    assert!((b4.terms[3].value / b1.terms[3].value - 9.0 / 25.0).abs() < 1e-14);
    assert!(variance_pipeline_bounds(&c, 0.0, 2.0, None, frac).is_err());
}

#[test]
fn bolza_desk_budget_is_finite() {
    let cover = bolza_cover(1, 0).unwrap();
    let window = SpectralWindow::new(1.0, 4.0).unwrap();
    let opts = MeasureOptions {
        weight: PlancherelWeight::PaperTanh2Pi,
        cutoff: CutoffSpec::new(1.0, 0.4).unwrap(),
        theta_samples: 200,
        lambda_step: 0.5,
        nevo_n: DEFAULT_NEVO_N,
        seed: 5,
    };
    let c = measure_pipeline_constants(&bump(true), &cover, &window, &opts).unwrap();
    assert!((c.systole - 2.0 * (1.0 + 2f64.sqrt()).acosh()).abs() < 1e-9, "{}", c.systole);
    assert!(c.theta_norm.abs() < 1e-12, "multiplication symbols are θ-independent: {}", c.theta_norm);
    let b = variance_pipeline_bounds(&c, 1.0, 2.0, None, cover_bs_fraction(&cover, 500, 5)).unwrap();
    assert!(b.total.is_finite() && b.total > 0.0);
    assert!(!b.dominant.is_empty());
}
