use hqe_core::geometry::{hyp_distance, DiscPoint};
use hqe_core::transforms::{smooth_bump, RadialKernel};
use hqe_fuchsian::cover::*;
use hqe_fuchsian::domain::{from_fermi, FundamentalDomain};
use hqe_fuchsian::group::*;
use hqe_fuchsian::periodize::*;
use hqe_fuchsian::words::DEFAULT_SYSTOLE_WORD_LENGTH;
use hqe_fuchsian::Error;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::Arc;

#[test]
fn degree_one_cover_is_the_base() {
    let b = FuchsianGroup::bolza();
    let c = random_cover(&b, 1, 3).unwrap();
    assert_eq!(c.degree, 1);
    assert_eq!(c.volume(), Some(4.0 * PI));
    let z = DiscPoint::new(0.1, 0.2).unwrap();
    let base = hqe_fuchsian::orbit::injectivity_radius_at(&b, &z, 5.0).unwrap();
    assert_eq!(c.injectivity_radius_at(&z, 0, 5.0).unwrap(), base);
}

#[test]
fn bolza_covers_satisfy_relation_and_are_transitive() {
    let b = FuchsianGroup::bolza();
    for (deg, seed) in [(2, 1), (4, 2), (8, 3), (32, 4)] {
        let c = random_cover(&b, deg, seed).unwrap();
        assert_eq!(c.degree, deg);
        let id: Vec<usize> = (0..deg).collect();
        assert_eq!(c.word_permutation(&b.relators[0]), id);
        assert_eq!(c.volume(), Some(4.0 * PI * deg as f64));
        // Orbit of sheet 0 under the generators reaches every sheet.
        let mut seen = vec![false; deg];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for a in [1, -1, 2, -2, 3, -3, 4, -4] {
                let y = c.sheet_image(&[a], x);
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        assert!(seen.iter().all(|&s| s));
    }
}

#[test]
fn covers_are_deterministic_under_seed() {
    let b = FuchsianGroup::bolza();
    assert_eq!(random_cover(&b, 8, 11).unwrap(), random_cover(&b, 8, 11).unwrap());
    assert_ne!(random_cover(&b, 8, 11).unwrap().permutations, random_cover(&b, 8, 12).unwrap().permutations);
}

#[test]
fn sheet_image_agrees_with_word_permutation() {
    let c = random_cover(&FuchsianGroup::bolza(), 6, 9).unwrap();
    let w = [1, 2, -3, 4, 4, -1];
    let p = c.word_permutation(&w);
    for i in 0..6 {
        assert_eq!(c.sheet_image(&w, i), p[i]);
    }
}

#[test]
fn lifted_injectivity_radius_dominates_base() {
    let b = FuchsianGroup::bolza();
    let c = random_cover(&b, 8, 5).unwrap();
    let dom = FundamentalDomain::new(&b, 0.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let z = dom.sample(&mut rng);
        let base = hqe_fuchsian::orbit::injectivity_radius_at(&b, &z, 6.0).unwrap().value;
        for sheet in 0..8 {
            assert!(c.injectivity_radius_at(&z, sheet, 6.0).unwrap().value >= base - 1e-12);
        }
    }
}

#[test]
fn cover_systole_dominates_base() {
    let b = FuchsianGroup::bolza();
    let c = random_cover(&b, 4, 5).unwrap();
    let base = hqe_fuchsian::words::systole(&b, 6).unwrap().value;
    let lifted = c.systole(6).unwrap().value;
    assert!(lifted >= base - 1e-9);
    assert_eq!(DEFAULT_SYSTOLE_WORD_LENGTH, 8);
}

#[test]
fn cyclic_and_trivial_covers() {
    let g = FuchsianGroup::cyclic(1.0).unwrap();
    let c = random_cover(&g, 5, 1).unwrap();
    assert_eq!(c.degree, 5);
    assert!(matches!(random_cover(&FuchsianGroup::trivial(), 3, 1), Err(Error::NonTransitive { .. })));
    assert!(random_cover(&g, 0, 1).is_err());
    assert!(matches!(CoverSurface::new(g.clone(), vec![vec![0, 1, 2]], 0), Err(Error::NonTransitive { .. })));
    assert!(CoverSurface::new(g, vec![vec![0, 0, 2]], 0).is_err());
}

#[test]
fn cover_document_round_trip() {
    let c = random_cover(&FuchsianGroup::bolza(), 4, 21).unwrap();
    let json = serde_json::to_string(&c.to_document()).unwrap();
    let back = CoverSurface::from_document(&serde_json::from_str(&json).unwrap()).unwrap();
    assert_eq!(back.permutations, c.permutations);
    assert_eq!(back.seed, 21);
    assert_eq!(back.base.label, "bolza");
}

#[test]
fn bs_statistic_exact_cases() {
    let base = CoverSurface::trivial(FuchsianGroup::bolza());
    let half_sys = 0.5 * bolza_translation_length();
    let below = bs_statistic(&base, half_sys - 1e-3, 500, 1).unwrap();
    assert_eq!(below.fraction, 0.0);
    let far = bs_statistic(&base, 25.0, 500, 1).unwrap();
    assert_eq!(far.fraction, 1.0);
    assert!(bs_statistic(&base, 26.0, 10, 1).is_err());
    assert!(bs_statistic(&base, 1.0, 0, 1).is_err());
}

#[test]
fn bs_statistic_decreases_along_random_covers() {
    let b = FuchsianGroup::bolza();
    let mut prev: Option<BsEstimate> = None;
    for (deg, seed) in [(2, 31), (8, 32), (32, 33)] {
        let c = random_cover(&b, deg, seed).unwrap();
        let e = bs_statistic(&c, 1.8, 1500, 7).unwrap();
        if let Some(p) = &prev {
            assert!(e.fraction <= p.fraction + 2.0 * (e.std_err.hypot(p.std_err)), "{deg}: {} vs {}", e.fraction, p.fraction);
        }
        prev = Some(e);
    }
}

fn gaussian() -> RadialKernel {
    RadialKernel::new("gauss", 12.0, |t| (-t * t).exp())
}

#[test]
fn chi_default_shape() {
    assert_eq!(chi_default(-0.1), 1.0);
    assert_eq!(chi_default(0.0), 1.0);
    assert_eq!(chi_default(1.0), 0.0);
    assert!((chi_default(0.5) - 0.5).abs() < 1e-15);
}

#[test]
fn periodization_over_trivial_group() {
    let g = FuchsianGroup::trivial();
    let k = gaussian();
    let p = periodize_truncated(radial_pair_kernel(&k), &g, 2.0, chi_default, 3.0).unwrap();
    let z = DiscPoint::new(0.1, 0.3).unwrap();
    let w = DiscPoint::new(-0.2, 0.1).unwrap();
    let d = hyp_distance(&z, &w);
    assert!((p.eval(&z, &w).unwrap().re - k.at(d) * chi_default(d / 2.0)).abs() < 1e-15);
}

#[test]
fn periodization_single_term_when_orbit_is_far() {
    let g = FuchsianGroup::bolza();
    let k = gaussian();
    let p = periodize_truncated(radial_pair_kernel(&k), &g, 1.0, chi_default, bolza_circumradius()).unwrap();
    let z = DiscPoint::new(0.05, 0.0).unwrap();
    let w = DiscPoint::new(0.0, 0.1).unwrap();
    assert_eq!(p.terms(&z, &w).unwrap(), 1);
    let d = hyp_distance(&z, &w);
    assert!((p.eval(&z, &w).unwrap().re - k.at(d) * chi_default(d)).abs() < 1e-15);
    assert!(p.eval(&DiscPoint::polar(4.0, 0.0), &w).is_err());
}

#[test]
fn cyclic_periodization_matches_direct_sum() {
    let l = 0.7;
    let g = FuchsianGroup::cyclic(l).unwrap();
    let k = RadialKernel::new("bump", 3.0, |t| smooth_bump(t, -3.0, 3.0));
    let r = 2.5;
    let p = periodize_truncated(radial_pair_kernel(&k), &g, r, chi_default, 3.0).unwrap();
    let a = g.generators[0];
    for (z, w) in [(from_fermi(0.1, 0.4), from_fermi(-0.2, -0.3)), (from_fermi(0.3, 1.0), from_fermi(0.0, 0.2))] {
        let mut direct = 0.0;
        for n in -10i32..=10 {
            let mut h = hqe_core::geometry::GroupElement::identity();
            for _ in 0..n.abs() {
                h = h.compose(&if n > 0 { a } else { a.inverse() });
            }
            let d = hyp_distance(&z, &h.apply(&w));
            direct += k.at(d) * chi_default(d / r);
        }
        let got = p.eval(&z, &w).unwrap();
        assert!((got.re - direct).abs() < 1e-12 && got.im == 0.0, "{got} vs {direct}");
    }
}

#[test]
fn periodization_accepts_non_radial_kernels() {
    let g = FuchsianGroup::cyclic(1.0).unwrap();
    let kernel: PairKernel = Arc::new(|z: &DiscPoint, w: &DiscPoint| Complex64::new(0.0, (-hyp_distance(z, w)).exp()));
    let p = periodize_truncated(kernel, &g, 1.5, chi_default, 2.0).unwrap();
    let v = p.eval(&DiscPoint::origin(), &DiscPoint::new(0.1, 0.0).unwrap()).unwrap();
    assert!(v.re == 0.0 && v.im > 0.0);
}

#[test]
fn hs_bound_without_wraparound() {
    // Support below half the systole and r below it too: no thin part, no extra terms.
    let g = FuchsianGroup::bolza();
    let k = RadialKernel::new("bump", 1.2, |t| smooth_bump(t, -1.2, 1.2));
    let rep = hs_bound_check(&k, &g, 1.2, 4000, 3, HsOptions::default()).unwrap();
    assert_eq!(rep.injrad_fraction, 0.0);
    assert_eq!(rep.second_term, 0.0);
    assert!(rep.pass);
    // Without wraparound the double integral is ∫_𝒟∫_𝔻 |Kχ|², a radial integral.
    let kchi = RadialKernel::new("kchi", 1.2, move |t| smooth_bump(t, -1.2, 1.2) * chi_default(t / 1.2));
    let exact = 4.0 * PI * hqe_core::transforms::radial_l2_norm_sqr(&kchi, 2.0, 16);
    assert!((rep.lhs_estimate - exact).abs() < 4.0 * rep.lhs_std_err, "{} ± {} vs {exact}", rep.lhs_estimate, rep.lhs_std_err);
}

#[test]
fn hs_bound_matrix() {
    let bump = RadialKernel::new("bump", 1.5, |t| smooth_bump(t, -1.5, 1.5));
    let groups = [FuchsianGroup::cyclic(1.0).unwrap(), FuchsianGroup::cyclic(3.0).unwrap(), FuchsianGroup::bolza()];
    for g in &groups {
        for k in [gaussian(), bump.clone()] {
            for r in [1.0, 2.0] {
                let rep = hs_bound_check(&k, g, r, 3000, 17, HsOptions::default()).unwrap();
                assert!(rep.pass, "{} {} r={r}: {rep:?}", g.label, k.label);
            }
        }
    }
}
