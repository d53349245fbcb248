//! Gauss–Legendre and trapezoid quadrature with node-doubling convergence checks.

use crate::error::{Error, Result};
use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

const MAX_CACHED: usize = 256;

/// Nodes and weights on [−1, 1].
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

static TABLES: [OnceLock<Rule>; MAX_CACHED + 1] = [const { OnceLock::new() }; MAX_CACHED + 1];

fn build_rule(n: usize) -> Rule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[m - 1] = 0.0;
    }
    Rule { nodes, weights }
}

/// The n-point Gauss–Legendre rule, cached for n ≤ 256.
pub fn gauss_legendre(n: usize) -> &'static Rule {
    assert!((1..=MAX_CACHED).contains(&n), "Gauss–Legendre order {n} out of range");
    TABLES[n].get_or_init(|| build_rule(n))
}

/// One Gauss–Legendre panel on [a, b].
pub fn gl<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> f64 {
    let rule = gauss_legendre(n);
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut s = 0.0;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        s += w * f(c + h * x);
    }
    s * h
}

/// Composite Gauss–Legendre with `panels` equal panels of order `n`.
pub fn gl_composite<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize, n: usize) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels).map(|k| gl(&mut f, a + k as f64 * h, a + (k + 1) as f64 * h, n)).sum()
}

/// Calls `f(x, w)` for every node of the composite rule.
pub fn for_each_node<F: FnMut(f64, f64)>(a: f64, b: f64, panels: usize, n: usize, mut f: F) {
    let rule = gauss_legendre(n);
    let h = (b - a) / panels as f64;
    for k in 0..panels {
        let lo = a + k as f64 * h;
        let c = lo + 0.5 * h;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            f(c + 0.5 * h * x, 0.5 * h * w);
        }
    }
}

/// Composite rule whose panel count doubles until successive values agree within
/// `abs_tol + rel_tol·|value|`. Returns the value and the last change.
pub fn gl_converged<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    n: usize,
    abs_tol: f64,
    rel_tol: f64,
    what: &'static str,
) -> Result<(f64, f64)> {
    let mut panels = 1usize;
    let mut prev = gl_composite(&mut f, a, b, panels, n);
    let mut delta = f64::INFINITY;
    while panels < 1 << 14 {
        panels *= 2;
        let next = gl_composite(&mut f, a, b, panels, n);
        delta = (next - prev).abs();
        if delta <= abs_tol + rel_tol * next.abs() {
            return Ok((next, delta));
        }
        prev = next;
    }
    Err(Error::QuadratureNotConverged { what, delta })
}

/// Trapezoid rule with `n` equispaced nodes on the circle [0, 2π).
pub fn periodic_trapezoid<T, F>(mut f: F, n: usize) -> T
where
    T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
    F: FnMut(f64) -> T,
{
    let h = TAU / n as f64;
    let mut s = T::default();
    for k in 0..n {
        s = s + f(k as f64 * h);
    }
    s * h
}

/// Half-node refinement: the trapezoid sum on the midpoints between `n` nodes.
pub fn periodic_midpoints<T, F>(mut f: F, n: usize) -> T
where
    T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
    F: FnMut(f64) -> T,
{
    let h = TAU / n as f64;
    let mut s = T::default();
    for k in 0..n {
        s = s + f((k as f64 + 0.5) * h);
    }
    s * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        for n in [1, 2, 5, 16, 33] {
            let r = gauss_legendre(n);
            let total: f64 = r.weights.iter().sum();
            assert!((total - 2.0).abs() < 1e-14, "n = {n}");
            let deg = 2 * n - 1;
            let v = gl(|x| x.powi(deg as i32 - 1), -1.0, 1.0, n);
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((v - exact).abs() < 1e-13, "n = {n}: {v} vs {exact}");
        }
    }

    #[test]
    fn nodes_are_sorted_and_symmetric() {
        let r = gauss_legendre(20);
        for w in r.nodes.windows(2) {
            assert!(w[0] < w[1]);
        }
        for i in 0..20 {
            assert!((r.nodes[i] + r.nodes[19 - i]).abs() < 1e-15);
        }
    }

    #[test]
    fn converged_rule_reports_small_change() {
        let (v, d) = gl_converged(|x| x.exp(), 0.0, 1.0, 8, 1e-14, 0.0, "exp").unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-14);
        assert!(d < 1e-14);
    }

    #[test]
    fn trapezoid_is_spectral_on_the_circle() {
        let v: f64 = periodic_trapezoid(|t| (t.cos()).exp(), 32);
        // 2π I₀(1)
        assert!((v - TAU * 1.266_065_877_752_008_4).abs() < 1e-13);
    }
}
