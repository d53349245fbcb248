use crate::error::{Error, Result};
use crate::observable::{Observable, Variant};
use hqe_core::geometry::{hyp_distance, DiscPoint, GroupElement};
use hqe_core::transforms::spherical_phi;
use hqe_fuchsian::domain::FundamentalDomain;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const MAX_LIMIT_SAMPLES: usize = 10_000_000;

/// φ_λ(t) by the hypergeometric series in −sinh²(t/2) for small t, by quadrature otherwise.
pub fn spherical_phi_near(lambda: f64, t: f64) -> Result<f64> {
    let s = (0.5 * t).sinh().powi(2);
    if s > 0.25 {
        return Ok(spherical_phi(lambda, t)?);
    }
    let (mut term, mut sum) = (1.0f64, 1.0f64);
    for n in 0..200 {
        let nf = n as f64;
        term *= -s * ((nf + 0.5).powi(2) + lambda * lambda) / ((nf + 1.0) * (nf + 1.0));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    Ok(sum)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub value: f64,
    pub std_err: f64,
    pub n_samples: usize,
}

/// (1/Vol)∫_X ∫_𝔻 K_A(x, y) φ_λ(d(x, y)) dμ(y) dμ(x), Monte Carlo in x over the region.
pub fn limit_term(a: &Observable, lambda: f64, domain: &FundamentalDomain, n_samples: usize, seed: u64) -> Result<LimitEstimate> {
    if n_samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    if n_samples > MAX_LIMIT_SAMPLES {
        return Err(Error::BudgetExceeded { requested: n_samples, cap: MAX_LIMIT_SAMPLES });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<DiscPoint> = (0..n_samples).map(|_| domain.sample(&mut rng)).collect();
    let vals: Vec<f64> = match &a.variant {
        Variant::Multiplication(f) => xs.iter().map(|x| f(x)).collect(),
        Variant::FiniteRange { kernel, range, radial } => {
            let breaks = radial.as_ref().map(|k| k.breakpoints.clone()).unwrap_or_default();
            let template = a.quadrature.nodes(&DiscPoint::origin(), *range, &breaks);
            let phis = template.iter().map(|(_, rho, _)| spherical_phi_near(lambda, *rho)).collect::<Result<Vec<_>>>()?;
            xs.iter()
                .map(|x| {
                    let g = GroupElement::boost_to(x);
                    template.iter().zip(&phis).map(|((y, _, w), ph)| kernel(x, &g.apply(y)) * ph * w).sum()
                })
                .collect()
        }
        Variant::Differential { .. } => {
            let mut out = Vec::with_capacity(xs.len());
            for x in &xs {
                let x0 = *x;
                let u = move |y: &DiscPoint| Complex64::new(spherical_phi_near(lambda, hyp_distance(&x0, y)).unwrap_or(f64::NAN), 0.0);
                out.push(a.apply(&u, x)?.re);
            }
            out
        }
    };
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    if !mean.is_finite() {
        return Err(Error::InvalidInput(format!("{} is not finite on the sampled region", a.label)));
    }
    let var = if vals.len() > 1 { vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    Ok(LimitEstimate { value: mean, std_err: (var / n).sqrt(), n_samples })
}
