use crate::error::{Error, Result};
use crate::observable::{BallQuadrature, LocalityConstants, Observable};
use hqe_core::geometry::{hyp_distance, DiscPoint};
use hqe_core::propagators::{CutoffSpec, Propagator};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichOptions {
    pub quadrature: BallQuadrature,
    /// Accept when one refinement changes the value by at most rel_tol·max(|K|, floor).
    pub rel_tol: f64,
    pub max_refinements: usize,
}

impl Default for SandwichOptions {
    fn default() -> Self {
        Self { quadrature: BallQuadrature { panels: 4, order: 8, angular: 64 }, rel_tol: 1e-7, max_refinements: 4 }
    }
}

/// M_t = 2π(cosh t − 1)/√cosh t, the L¹ mass bound of k_{t,σ}.
pub fn propagator_mass_bound(t: f64) -> f64 {
    TAU * (t.cosh() - 1.0) / t.cosh().sqrt()
}

/// sup_w ‖k_{t,σ}(d(·, w))‖_{C^k} in the norm used by the locality check.
pub fn cutoff_ck_norm(k: usize, c: &CutoffSpec) -> Result<f64> {
    if !(c.sigma < c.t) {
        return Err(Error::InvalidInput(format!("need σ < t, got σ = {}, t = {}", c.sigma, c.t)));
    }
    let pre = c.t.cosh().sqrt().recip();
    let d1 = c.eta.derivative_sup(1) / c.sigma;
    let d2 = c.eta.derivative_sup(2) / (c.sigma * c.sigma);
    let hess = d2.hypot((c.t - c.sigma).tanh().recip() * d1);
    Ok(pre * [1.0, d1, hess].iter().take(k + 1).sum::<f64>())
}

/// sup |K_{P_t A P_t}| ≤ C·M_t·sup_w‖k_t(·, w)‖_{C^k}.
pub fn lemma34_bound(constants: &LocalityConstants, c: &CutoffSpec) -> Result<f64> {
    Ok(constants.c * propagator_mass_bound(c.t) * cutoff_ck_norm(constants.k, c)?)
}

fn sandwich_at(a: &Observable, p: &Propagator, c: &CutoffSpec, z: &DiscPoint, w: &DiscPoint, q: BallQuadrature) -> Result<Complex64> {
    let w = *w;
    let pp = *p;
    let fw = move |y: &DiscPoint| Complex64::new(pp.kernel_at(hyp_distance(y, &w)), 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, rho, wt) in q.nodes(z, c.t, &[c.t - c.sigma]) {
        if hyp_distance(&x, &w) > c.t + a.range() {
            continue;
        }
        acc += p.kernel_at(rho) * a.apply(&fw, &x)? * wt;
    }
    Ok(acc)
}

/// K_{P_t A P_t}(z, w) = ∫ k_t(z, x)(A k_t(·, w))(x) dμ(x); exactly 0 when d(z, w) > 2t + S.
pub fn smooth_sandwich_kernel(a: &Observable, c: &CutoffSpec, z: &DiscPoint, w: &DiscPoint, opts: SandwichOptions) -> Result<Complex64> {
    if hyp_distance(z, w) > 2.0 * c.t + a.range() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let p = Propagator::Smooth(*c);
    let floor = 1e-3 * lemma34_bound(&a.constants, c).unwrap_or(0.0);
    let mut q = opts.quadrature;
    let mut prev = sandwich_at(a, &p, c, z, w, q)?;
    let mut delta = f64::INFINITY;
    for _ in 0..opts.max_refinements {
        q = q.refined();
        let next = sandwich_at(a, &p, c, z, w, q)?;
        delta = (next - prev).norm();
        if delta <= opts.rel_tol * next.norm().max(floor) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Core(hqe_core::Error::QuadratureNotConverged { what: "sandwich kernel", delta }))
}
