use crate::error::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sprs::{CsMat, FillInReduction, SymmetryCheck, TriMat};
use sprs_ldl::{Ldl, LdlNumeric};

/// Relative spacing below which eigenvalues count as one cluster.
pub const CLUSTER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenOptions {
    /// Spectral shift σ below the spectrum.
    pub shift: f64,
    pub block: usize,
    /// Accept a mode when ‖(A − ν)y‖ ≤ tol·(1 + ν) for unit y.
    pub tol: f64,
    pub max_dim: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { shift: -0.3, block: 6, tol: 1e-9, max_dim: 2000, seed: 7 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub nu: f64,
    /// Nodal values with Σ m ψ² = 1.
    pub vector: Vec<f64>,
    /// ‖M^{-1/2}(Kψ − νMψ)‖.
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += alpha * x);
}

fn matvec(k: &CsMat<f64>, x: &[f64]) -> Vec<f64> {
    k.outer_iterator().map(|row| row.iter().map(|(j, v)| v * x[j]).sum()).collect()
}

/// K + c·diag(m).
fn shifted(k: &CsMat<f64>, m: &[f64], c: f64) -> CsMat<f64> {
    let mut t = TriMat::new(k.shape());
    for (v, (i, j)) in k.iter() {
        t.add_triplet(i, j, *v);
    }
    for (i, mi) in m.iter().enumerate() {
        t.add_triplet(i, i, c * mi);
    }
    t.to_csc()
}

fn factor(a: &CsMat<f64>) -> Result<LdlNumeric<f64, usize>> {
    Ldl::new()
        .fill_in_reduction(FillInReduction::ReverseCuthillMcKee)
        .check_symmetry(SymmetryCheck::DontCheckSymmetry)
        .numeric(a.view())
        .map_err(|e| Error::SolverNotConverged(format!("LDLᵀ factorization failed: {e}")))
}

/// Number of generalized eigenvalues below τ, by Sylvester inertia of K − τM.
pub fn count_below(k: &CsMat<f64>, m: &[f64], tau: f64) -> Result<usize> {
    let f = factor(&shifted(k, m, -tau))?;
    Ok(f.d().iter().filter(|d| **d < 0.0).count())
}

/// Orthogonalizes v against `basis` twice; returns the remaining norm.
fn orthogonalize(basis: &[Vec<f64>], v: &mut [f64]) -> f64 {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, v);
            axpy(-c, q, v);
        }
    }
    dot(v, v).sqrt()
}

/// Lowest `n_modes` solutions of Kψ = νMψ with M diagonal, by block Lanczos with full
/// reorthogonalization on M^{1/2}(K − σM)^{-1}M^{1/2}, certified complete by an inertia count.
pub fn lowest_eigenpairs(k: &CsMat<f64>, m: &[f64], n_modes: usize, opts: EigenOptions) -> Result<Vec<EigenPair>> {
    let n = m.len();
    if k.rows() != n || k.cols() != n || n_modes == 0 || n_modes > n {
        return Err(Error::InvalidInput(format!("need 0 < n_modes ≤ {n} for a {n}×{n} problem, got {n_modes}")));
    }
    if m.iter().any(|x| !(*x > 0.0)) || opts.block == 0 {
        return Err(Error::InvalidInput("mass must be positive and the block nonempty".into()));
    }
    let sm: Vec<f64> = m.iter().map(|x| x.sqrt()).collect();
    let ldl = factor(&shifted(k, m, -opts.shift))?;
    let apply = |v: &[f64]| -> Vec<f64> {
        let rhs: Vec<f64> = v.iter().zip(&sm).map(|(a, b)| a * b).collect();
        let x: Vec<f64> = ldl.solve(&rhs);
        x.iter().zip(&sm).map(|(a, b)| a * b).collect()
    };
    let max_dim = opts.max_dim.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut w: Vec<Vec<f64>> = Vec::new();
    let mut t = DMatrix::<f64>::zeros(0, 0);
    let mut pending: Vec<Vec<f64>> = Vec::new();
    let mut next_check = (n_modes + 2 * opts.block).min(max_dim);
    loop {
        if pending.is_empty() {
            pending = (0..opts.block).map(|_| (0..n).map(|_| rng.random::<f64>() - 0.5).collect()).collect();
        }
        let mut fresh = Vec::new();
        for mut v in pending.drain(..) {
            let before = dot(&v, &v).sqrt();
            let after = orthogonalize(&q, &mut v);
            if after > 1e-10 * before && q.len() < max_dim {
                v.iter_mut().for_each(|x| *x /= after);
                q.push(v);
                fresh.push(q.len() - 1);
            }
        }
        for &j in &fresh {
            let bj = apply(&q[j]);
            w.push(bj);
            let p = w.len();
            t = t.resize(p, p, 0.0);
            for i in 0..p {
                let v = dot(&q[i], &w[p - 1]);
                t[(i, p - 1)] = v;
                t[(p - 1, i)] = v;
            }
            pending.push(w[p - 1].clone());
        }
        let p = w.len();
        if p < next_check && q.len() < max_dim {
            continue;
        }
        next_check = (p + opts.block.max(p / 4)).min(max_dim);
        if p < n_modes {
            if q.len() >= max_dim {
                return Err(Error::SolverNotConverged(format!("Krylov space of dimension {p} is smaller than {n_modes} modes")));
            }
            continue;
        }
        let eig = SymmetricEigen::new(t.clone());
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|a, b| eig.eigenvalues[*b].total_cmp(&eig.eigenvalues[*a]));
        let mut pairs = Vec::with_capacity(n_modes);
        let mut worst = 0.0f64;
        for &c in order.iter().take(n_modes) {
            let theta = eig.eigenvalues[c];
            let nu = opts.shift + 1.0 / theta;
            let mut y = vec![0.0; n];
            for i in 0..p {
                axpy(eig.eigenvectors[(i, c)], &q[i], &mut y);
            }
            let norm = dot(&y, &y).sqrt();
            let mut psi: Vec<f64> = y.iter().zip(&sm).map(|(a, b)| a / (b * norm)).collect();
            let kpsi = matvec(k, &psi);
            let residual = kpsi.iter().zip(&psi).zip(m).zip(&sm).map(|(((kp, ps), mi), si)| ((kp - nu * mi * ps) / si).powi(2)).sum::<f64>().sqrt();
            worst = worst.max(residual / (1.0 + nu.abs()));
            let imax = (0..n).max_by(|a, b| psi[*a].abs().total_cmp(&psi[*b].abs())).unwrap_or(0);
            if psi[imax] < 0.0 {
                psi.iter_mut().for_each(|x| *x = -*x);
            }
            pairs.push(EigenPair { nu, vector: psi, residual });
        }
        let exhausted = q.len() >= max_dim;
        if worst <= opts.tol {
            pairs.sort_by(|a, b| a.nu.total_cmp(&b.nu));
            // The requested count may cut through a multiple eigenvalue: certify up to the
            // bottom of the last cluster.
            let gap = |v: f64| CLUSTER_TOL * (1.0 + v.abs());
            let mut start = n_modes - 1;
            while start > 0 && pairs[start].nu - pairs[start - 1].nu <= gap(pairs[start].nu) {
                start -= 1;
            }
            let tau = pairs[start].nu - gap(pairs[start].nu);
            let below = count_below(k, m, tau)?;
            if below <= start {
                return Ok(pairs);
            }
            if exhausted {
                return Err(Error::SolverNotConverged(format!("{below} eigenvalues lie below {tau} but only {start} were found")));
            }
            // Missed copies of a multiple eigenvalue: restart the block from fresh random vectors.
            pending.clear();
            next_check = p + opts.block;
        } else if exhausted {
            return Err(Error::SolverNotConverged(format!("relative residual {worst:e} above {:e} at dimension {p}", opts.tol)));
        }
    }
}
