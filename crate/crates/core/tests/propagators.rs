use hqe_core::propagators::*;
use hqe_core::special::harish_chandra_c;
use hqe_core::transforms::Eta;
use std::f64::consts::PI;

const BETA_ORACLE: [(f64, f64); 4] = [
    (2.0, 1.5115817157621313815),
    (5.0, 3.3228487919008581161),
    (10.0, 4.4798548656285337097),
    (15.0, 4.8111626761734288786),
];

fn radii() -> Vec<f64> {
    (2..=20).map(|r| r as f64).collect()
}

#[test]
fn kernel_support_is_exact() {
    let p = Propagator::Smooth(CutoffSpec::new(4.0, 0.5).unwrap());
    let pre = 4f64.cosh().sqrt().recip();
    for r in [0.0, 1.0, 3.0, 3.5] {
        assert_eq!(p.kernel_at(r), pre);
    }
    assert_eq!(p.kernel_at(4.0 + 1e-12), 0.0);
    assert!(p.kernel_at(3.8) > 0.0 && p.kernel_at(3.8) < pre);
    assert!(CutoffSpec::new(1.0, 0.0).is_err());
}

#[test]
fn multiplier_vanishes_as_time_shrinks() {
    let small: Vec<f64> = [1e-1, 1e-2, 1e-3].iter().map(|&t| h_sharp(t, 1.0).unwrap().abs()).collect();
    assert!(small[0] > small[1] && small[1] > small[2]);
    assert!(small[2] < 1e-5);
}

#[test]
fn smooth_multiplier_approaches_sharp() {
    let d: Vec<f64> = [0.4, 0.2, 0.1, 0.05].iter().map(|&s| (h_smooth(5.0, s, 1.3).unwrap() - h_sharp(5.0, 1.3).unwrap()).abs()).collect();
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
}

#[test]
fn delta_h_routes_agree_and_respect_envelope() {
    let c = lemma_a1_constant(&[0.5, 1.0, 2.0, 3.0], &radii()).unwrap();
    for t in [3.0, 6.0] {
        for sigma in [0.4, 0.2, 0.1, 0.05] {
            for l in [0.5, 1.0, 2.0, 3.0] {
                let f = delta_h_formula(t, sigma, Eta::CubicSmoothstep, l).unwrap();
                let s = delta_h_subtraction(t, sigma, Eta::CubicSmoothstep, l).unwrap();
                assert!((f - s).abs() < 1e-7, "t={t} σ={sigma} λ={l}: {f} vs {s}");
                assert!(f.abs() <= delta_h_envelope(c, sigma));
            }
        }
    }
    assert!(delta_h_formula(1.0, 0.5, Eta::CubicSmoothstep, 1.0).is_err());
}

#[test]
fn lemma_a1_envelope_has_no_trend() {
    for l in [0.5, 1.0, 2.0, 3.0] {
        let ratio = lemma_a1_envelope_ratio(l, &radii()).unwrap();
        assert!(ratio < 10.0, "λ={l}: {ratio}");
    }
    let coarse = lemma_a1_constant(&[0.5, 1.0, 2.0, 3.0], &radii()).unwrap();
    let fine_radii: Vec<f64> = (4..=40).map(|r| r as f64 * 0.5).collect();
    let fine = lemma_a1_constant(&[0.5, 1.0, 2.0, 3.0], &fine_radii).unwrap();
    assert!(coarse.is_finite() && fine >= coarse && fine < 1.5 * coarse);
}

#[test]
fn lemma_a1_at_small_lambda_is_positive_integral() {
    for r in [2.0, 5.0, 12.0] {
        let v = lemma_a1_check(1e-9, r).unwrap();
        let direct = hqe_core::transforms::mehler_integral(0.0, r).unwrap() * (0.5 * r).exp();
        assert!(v > 0.0 && (v - direct).abs() < 1e-9 * direct);
    }
    assert!(lemma_a1_check(1.0, 0.0).is_err());
}

#[test]
fn harish_chandra_density_identity() {
    for l in [0.5, 1.0, 2.0] {
        let (_, inv) = harish_chandra_c(l).unwrap();
        assert!((inv - PI * l * (PI * l).tanh()).abs() < 1e-10 * inv);
    }
}

#[test]
fn beta_majorant_matches_oracle_and_stays_bounded() {
    for (t, v) in BETA_ORACLE {
        let got = beta_norm_check(t, BETA_DEFAULT_P).unwrap();
        assert!((got - v).abs() < 1e-9 * v, "t={t}: {got} vs {v}");
    }
    let vals: Vec<f64> = BETA_ORACLE.iter().map(|(t, _)| beta_norm_check(*t, 1.5).unwrap()).collect();
    let band = vals.iter().cloned().fold(0.0, f64::max) / vals.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(band < 5.0);
    assert!(beta_norm_check(60.0, 1.5).unwrap() < 6.0);
    assert!(beta_norm_check(1e-6, 1.5).unwrap() < 1e-6);
    assert!(beta_norm_check(1.0, 2.0).is_err());
}

#[test]
fn average_multiplier_is_nonnegative_and_capped() {
    let p = Propagator::Smooth(CutoffSpec::new(1.0, 0.1).unwrap());
    for l in [0.2, 1.0, 1.9, 5.0] {
        let h = avg_multiplier_h(&p, 15.0, l, AverageOptions::default()).unwrap();
        let cap = h_sup_over_t(&p, l, 15.0, 0.05).unwrap();
        assert!(h >= 0.0 && h <= cap * cap * 1.0001, "λ={l}: {h} vs cap {}", cap * cap);
    }
    assert!(avg_multiplier_h(&p, 0.0, 1.0, AverageOptions::default()).is_err());
}

#[test]
fn average_multiplier_converges_in_t_quadrature() {
    let p = Propagator::Smooth(CutoffSpec::new(1.0, 0.1).unwrap());
    let a = avg_multiplier_h(&p, 20.0, 1.4, AverageOptions::default()).unwrap();
    let b = avg_multiplier_h(&p, 20.0, 1.4, AverageOptions { nodes_per_unit: 16, u_per_unit: 4 }).unwrap();
    assert!((a - b).abs() < 1e-6 * b);
}

#[test]
fn certificate_is_positive_stable_and_matches_frozen_floor() {
    let i = (0.75f64.sqrt(), 3.75f64.sqrt());
    let grid = lambda_grid(i.0, i.1, 0.02);
    assert!(grid.windows(2).all(|w| w[1] - w[0] <= 0.02 + 1e-15));
    let smooth = Propagator::Smooth(CutoffSpec::new(1.0, 0.1).unwrap());
    let cert = prop33_certificate(i, &smooth, &[10.0, 20.0, 40.0], &grid, AverageOptions::default()).unwrap();
    assert!(cert.pass);
    assert!(cert.c_min.iter().all(|&c| c > 0.0));
    assert!((cert.c_min[2] - PROP33_FLOOR_T40).abs() < 1e-6 * PROP33_FLOOR_T40);
    let json = serde_json::to_value(&cert).unwrap();
    for key in ["I", "sigma", "T_list", "c_min", "lemmaA1_constant", "pass"] {
        assert!(json.get(key).is_some(), "{key}");
    }
    let sharp = prop33_certificate(i, &Propagator::Sharp { t: 1.0 }, &[10.0, 20.0, 40.0], &grid, AverageOptions::default()).unwrap();
    assert!(sharp.pass);
    assert!(prop33_certificate(i, &smooth, &[10.0], &[], AverageOptions::default()).is_err());
}
