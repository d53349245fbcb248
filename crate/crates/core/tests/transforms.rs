use hqe_core::geometry::*;
use hqe_core::propagators::*;
use hqe_core::transforms::*;
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

const PHI_ORACLE: [(f64, f64, f64); 24] = [
    (0.5, 0.5, 0.96931017027693840345),
    (0.5, 1.0, 0.88353789884822377391),
    (0.5, 2.0, 0.61505537497101817529),
    (0.5, 5.0, 0.018399121184075497398),
    (0.5, 10.0, -0.0078680890110719602118),
    (0.5, 20.0, -0.000066786801617841239462),
    (1.0, 0.5, 0.92416755581703942435),
    (1.0, 1.0, 0.72207522827937457342),
    (1.0, 2.0, 0.19728188012250963282),
    (1.0, 5.0, -0.054658056221075255289),
    (1.0, 10.0, -0.0071754994626343786901),
    (1.0, 20.0, 0.000049937035433521706932),
    (2.0, 0.5, 0.75399077845971340012),
    (2.0, 1.0, 0.21719320780657850667),
    (2.0, 2.0, -0.29596530863006930146),
    (2.0, 5.0, -0.06306337804301235595),
    (2.0, 10.0, 0.005133088429851775529),
    (2.0, 20.0, 4.2832708623363014366e-6),
    (3.0, 0.5, 0.50511628092874819361),
    (3.0, 1.0, -0.23564866084019966825),
    (3.0, 2.0, 0.1071082191748499922),
    (3.0, 5.0, -0.0019015017875114832032),
    (3.0, 10.0, -0.0027340943838369472139),
    (3.0, 20.0, -0.000025703512132213238094),
];

const MEHLER_ORACLE: [(f64, f64, f64); 6] = [
    (0.5, 2.0, 1.3663095157406664495),
    (0.5, 7.0, -0.085078840780509879709),
    (0.5, 20.0, -0.00014836297070103720413),
    (2.0, 2.0, -0.65746960999965497934),
    (2.0, 7.0, 0.044622853914122524591),
    (2.0, 20.0, 9.5150355168924145462e-6),
];

#[test]
fn spherical_function_matches_legendre_oracle() {
    for (l, t, v) in PHI_ORACLE {
        let got = spherical_phi(l, t).unwrap();
        assert!((got - v).abs() < 1e-9, "λ={l} t={t}: {got} vs {v}");
    }
    assert_eq!(spherical_phi(1.3, 0.0).unwrap(), 1.0);
    assert!(spherical_phi(1.0, -1.0).is_err());
}

#[test]
fn spherical_function_series_agrees_with_quadrature() {
    for (l, t, v) in PHI_ORACLE {
        let (s, tail) = spherical_phi_series(l, t, 200).unwrap();
        assert!((s - v).abs() < 1e-6, "λ={l} t={t}: {s} vs {v}");
        assert!(tail < 1e-6);
    }
    assert!(spherical_phi_series(1.0, 0.1, 200).is_err());
}

#[test]
fn series_coefficients_decay_like_one_over_l() {
    let g = series_coefficients(1.5, 400);
    assert_eq!(g[0], Complex64::new(1.0, 0.0));
    let ratio = (g[400].norm() * 400.0) / (g[200].norm() * 200.0);
    assert!((ratio - 1.0).abs() < 0.05, "{ratio}");
}

#[test]
fn spherical_function_is_bounded_by_ground_state() {
    for t in [0.3, 1.0, 4.0, 12.0, 30.0] {
        let phi0 = spherical_phi(0.0, t).unwrap();
        for l in [0.2, 1.0, 5.0] {
            assert!(spherical_phi(l, t).unwrap().abs() <= phi0 + 1e-12);
        }
    }
}

#[test]
fn mehler_integral_matches_oracle_and_phi() {
    for (l, r, v) in MEHLER_ORACLE {
        let got = mehler_integral(l, r).unwrap();
        assert!((got - v).abs() < 1e-9 * (1.0 + v.abs()), "λ={l} r={r}: {got} vs {v}");
        let phi = spherical_phi(l, r).unwrap();
        assert!((got * 2f64.sqrt() / PI - phi).abs() < 1e-9);
    }
}

fn gaussian() -> RadialKernel {
    RadialKernel::new("gauss", 8.0, |t| (-t * t).exp())
}

fn smooth_kernel() -> RadialKernel {
    RadialKernel::new("bump", 2.0, |t| smooth_bump(t, -2.0, 2.0))
}

#[test]
fn selberg_transform_equals_fourier_of_abel_profile() {
    for k in [gaussian(), smooth_kernel()] {
        let kk = k.clone();
        let sb = k.support_bound;
        let g = AbelProfile {
            eval: std::sync::Arc::new(move |u: f64| {
                let cu = u.cosh();
                let vmax = (sb.min(8.0).cosh() - cu).max(0.0).sqrt();
                2f64.sqrt() * 2.0 * hqe_core::quad::gl_composite(|v| kk.at((cu + v * v).acosh()), 0.0, vmax, 64, 16)
            }),
            support_bound: sb,
            breakpoints: vec![],
        };
        for l in [0.3, 1.0, 2.5] {
            let a = selberg_transform(&k, l, SELBERG_NORM_EIGEN).unwrap();
            let b = fourier_of_abel(&g, l).unwrap();
            assert!((a - b).abs() < 1e-6 * (1.0 + a.abs()), "{} λ={l}: {a} vs {b}", k.label);
        }
    }
}

const H_SHARP_ORACLE: [(f64, f64, f64); 9] = [
    (1.0, 0.5, 2.57890788650282308),
    (1.0, 1.0, 2.3397728386232067704),
    (1.0, 2.0, 1.52506251553875465),
    (3.0, 0.5, 9.829476450405997069),
    (3.0, 1.0, 2.5120560783936459347),
    (3.0, 2.0, -1.3291449385434728351),
    (6.0, 0.5, 4.2721099010264415823),
    (6.0, 1.0, -3.0190574120423999271),
    (6.0, 2.0, -1.5832602197787128054),
];

#[test]
fn sharp_propagator_multiplier_matches_oracle_both_routes() {
    for (t, l, v) in H_SHARP_ORACLE {
        let abel = h_sharp(t, l).unwrap();
        let selb = Propagator::Sharp { t }.h_selberg(l).unwrap();
        assert!((abel - v).abs() < 1e-6, "abel t={t} λ={l}: {abel} vs {v}");
        assert!((selb - v).abs() < 1e-6, "selberg t={t} λ={l}: {selb} vs {v}");
    }
    let g0 = abel_sharp(1.0).at(0.0);
    assert!((g0 - 1.6779647823148484672).abs() < 1e-14);
}

#[test]
fn smooth_propagator_triangle_commutes() {
    for (t, sigma) in [(2.0, 0.5), (5.0, 0.1), (3.0, 1.0)] {
        let p = Propagator::Smooth(hqe_core::propagators::CutoffSpec::new(t, sigma).unwrap());
        for l in [0.5, 1.0, 3.0] {
            let a = p.h(l).unwrap();
            let b = p.h_selberg(l).unwrap();
            assert!((a - b).abs() < 1e-6 * (1.0 + a.abs()), "t={t} σ={sigma} λ={l}: {a} vs {b}");
        }
    }
}

#[test]
fn h_many_agrees_with_adaptive_route() {
    let p = Propagator::Smooth(hqe_core::propagators::CutoffSpec::new(7.3, 0.1).unwrap());
    let ls = [1.0, 1.7, 2.9, 4.0];
    let many = h_many(&p.abel(), &ls, 8);
    for (l, m) in ls.iter().zip(many) {
        let a = p.h(*l).unwrap();
        assert!((a - m).abs() < 1e-7 * (1.0 + a.abs()), "λ={l}: {a} vs {m}");
    }
}

#[test]
fn harmonic_convention_round_trip() {
    let rho = SpectralMultiplier::bump(0.5, 6.0);
    let k = inverse_selberg(&rho, PlancherelWeight::HarmonicTanhPi, InverseOptions::default());
    let k = RadialKernel::new("k", DEFAULT_T_CUT, move |t| k.at(t));
    for l in [1.3, 2.0, 2.6] {
        let back = selberg_transform(&k, l, PlancherelWeight::HarmonicTanhPi.selberg_norm()).unwrap();
        assert!((back - rho.at(l)).abs() < 1e-4, "λ={l}: {back} vs {}", rho.at(l));
    }
}

#[test]
fn stated_weight_round_trip_is_off_by_known_factor() {
    let rho = SpectralMultiplier::bump(0.5, 6.0);
    let w = PlancherelWeight::PaperTanh2Pi;
    let k = inverse_selberg(&rho, w, InverseOptions::default());
    let k = RadialKernel::new("k", DEFAULT_T_CUT, move |t| k.at(t));
    for l in [0.6, 1.3, 4.0] {
        let back = selberg_transform(&k, l, w.selberg_norm()).unwrap();
        let factor = (TAU * l).tanh() / (PI * l).tanh();
        assert!((back - rho.at(l) * factor).abs() < 1e-4, "λ={l}: {back} vs {}", rho.at(l) * factor);
    }
}

#[test]
fn weights_parse_and_evaluate() {
    assert_eq!(PlancherelWeight::parse("paper"), Some(PlancherelWeight::PaperTanh2Pi));
    assert_eq!(PlancherelWeight::parse("harmonic"), Some(PlancherelWeight::HarmonicTanhPi));
    assert_eq!(PlancherelWeight::parse("other"), None);
    assert!((PlancherelWeight::PaperTanh2Pi.eval(1.0) - (TAU).tanh()).abs() < 1e-15);
    assert!((PlancherelWeight::HarmonicTanhPi.eval(1.0) - PI * PI.tanh()).abs() < 1e-15);
}

#[test]
fn decay_sup_is_stable_under_refinement() {
    let rho = SpectralMultiplier::bump(1.0, 3.0);
    let k = inverse_selberg(&rho, PlancherelWeight::HarmonicTanhPi, InverseOptions::default());
    let coarse = decay_sup(|t| k.at(t), 0.0, 20.0, 0.1, 2);
    let fine = decay_sup(|t| k.at(t), 0.0, 20.0, 0.05, 2);
    assert!(coarse.is_finite() && coarse > 0.0);
    assert!((fine - coarse).abs() <= 0.05 * fine, "{coarse} vs {fine}");
    let cut = decay_truncation(fine, 2, 1e-10, 80.0);
    assert!(cut > 5.0 && cut < 80.0);
}

#[test]
fn helgason_transform_of_radial_function_is_spherical_transform() {
    let r_max = 0.9;
    let t_max = 2.0 * (r_max as f64).atanh();
    let u = move |z: &DiscPoint| {
        let t = hyp_distance(&DiscPoint::origin(), z);
        smooth_bump(t, -t_max, t_max)
    };
    let k = RadialKernel::new("u", t_max, move |t| smooth_bump(t, -t_max, t_max));
    for l in [0.5, 1.5] {
        let expect = selberg_transform(&k, l, SELBERG_NORM_EIGEN).unwrap();
        for th in [0.0, 1.0, 4.0] {
            let got = helgason_forward_converged(u, r_max, l, &BoundaryPoint::new(th), 1e-8).unwrap();
            assert!((got.re - expect).abs() < 1e-6 * (1.0 + expect.abs()), "{got} vs {expect}");
            assert!(got.im.abs() < 1e-6);
        }
    }
    assert!(helgason_forward(u, 0.99, 1.0, &BoundaryPoint::new(0.0), 4, 64).is_err());
}

#[test]
fn kernel_from_radial_symbol_is_radial_and_matches_inverse() {
    let rho = SpectralMultiplier::bump(1.0, 3.0);
    let a = Symbol::radial(&rho);
    let w = PlancherelWeight::HarmonicTanhPi;
    let opts = KernelOptions { boundary_nodes: 512, lambda_panels: 8, lambda_order: 16 };
    let z = DiscPoint::new(0.2, 0.1).unwrap();
    let zw = DiscPoint::new(-0.3, 0.4).unwrap();
    let kz = kernel_from_symbol(&a, w, &z, &zw, opts);
    let k = inverse_selberg_at(&rho, w, hyp_distance(&z, &zw), InverseOptions::default()).unwrap();
    assert!((kz.re - k).abs() < 1e-6 * (1.0 + k.abs()), "{kz} vs {k}");
    assert!(kz.im.abs() < 1e-8);
    let moves = [GroupElement::rotation(0.7), GroupElement::translation(0.5), GroupElement::boost_to(&DiscPoint::new(0.1, -0.3).unwrap())];
    let an = anisotropy(|p, q| kernel_from_symbol(&a, w, p, q, opts), &z, &zw, &moves);
    assert!(an < 1e-6, "{an}");
}

#[test]
fn kernel_from_anisotropic_symbol_is_not_radial() {
    let a = Symbol::new("aniso", (1.0, 3.0), |_, l, b| Complex64::new(smooth_bump(l, 1.0, 3.0) * (1.0 + 0.5 * b.angle.cos()), 0.0));
    let w = PlancherelWeight::HarmonicTanhPi;
    let opts = KernelOptions { boundary_nodes: 256, lambda_panels: 4, lambda_order: 16 };
    let z = DiscPoint::new(0.2, 0.1).unwrap();
    let zw = DiscPoint::new(-0.3, 0.4).unwrap();
    let an = anisotropy(|p, q| kernel_from_symbol(&a, w, p, q, opts), &z, &zw, &[GroupElement::rotation(1.0)]);
    assert!(an > 1e-3, "{an}");
}

#[test]
fn plancherel_identity_for_radial_symbol() {
    let rho = SpectralMultiplier::bump(1.0, 3.0);
    let w = PlancherelWeight::HarmonicTanhPi;
    let k = inverse_selberg(&rho, w, InverseOptions::default());
    let k = RadialKernel::new("k", 30.0, move |t| k.at(t));
    let l2 = radial_l2_norm_sqr(&k, 30.0, 60);
    let spec = hqe_core::quad::gl_composite(|l| rho.at(l).powi(2) * w.eval(l), 1.0, 3.0, 8, 16) * w.inverse_prefactor() / TAU;
    assert!((l2 - spec * TAU).abs() < 1e-5 * l2, "{l2} vs {}", spec * TAU);
}

#[test]
fn eta_cutoffs_have_expected_endpoints() {
    for eta in [Eta::CubicSmoothstep, Eta::QuinticSmoothstep] {
        assert_eq!(eta.eval(-1.0), 1.0);
        assert_eq!(eta.eval(0.0), 0.0);
        assert_eq!(eta.eval(-2.0), 1.0);
        assert_eq!(eta.eval(0.5), 0.0);
        let x: Vec<f64> = (0..=100).map(|i| -1.0 + i as f64 / 100.0).collect();
        assert!(x.windows(2).all(|w| eta.eval(w[1]) <= eta.eval(w[0])));
    }
    assert_eq!(chi_cutoff(Eta::CubicSmoothstep, 5.0, 0.5, 4.0), 1.0);
    assert_eq!(chi_cutoff(Eta::CubicSmoothstep, 5.0, 0.5, 5.1), 0.0);
}

#[test]
fn cached_series_kernel_matches_quadrature_route() {
    let rho = SpectralMultiplier::bump(0.5, 2.0);
    for w in [PlancherelWeight::PaperTanh2Pi, PlancherelWeight::HarmonicTanhPi] {
        let k = inverse_selberg(&rho, w, InverseOptions::default());
        for t in [1.0, INVERSE_SERIES_T_MIN, 3.7, 12.0, 30.0] {
            let direct = inverse_selberg_at(&rho, w, t, InverseOptions::default()).unwrap();
            assert!((k.at(t) - direct).abs() < 1e-12 * (-0.5 * t).exp(), "t={t}: {} vs {direct}", k.at(t));
        }
    }
}
