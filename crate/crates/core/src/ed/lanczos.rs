//! Lanczos iteration with full reorthogonalization, restarts, and
//! sequential deflation for the lowest eigenpairs of large symmetric
//! operators. Degenerate levels are resolved by locking converged vectors
//! and restarting against them.

use crate::{CoreError, Result};
use nalgebra::{DMatrix, SymmetricEigen};

#[derive(Clone, Copy, Debug)]
pub struct LanczosOpts {
    /// Krylov subspace cap per restart cycle.
    pub krylov_dim: usize,
    /// Restart cycles per eigenpair before giving up.
    pub restarts: usize,
    /// Relative residual tolerance.
    pub tol: f64,
    pub seed: u64,
}

impl Default for LanczosOpts {
    fn default() -> Self {
        LanczosOpts {
            krylov_dim: 120,
            restarts: 60,
            tol: 1e-11,
            seed: 0x5eed,
        }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn random_vector(dim: usize, seed: u64) -> Vec<f64> {
    let mut s = seed;
    (0..dim)
        .map(|_| (splitmix64(&mut s) >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Project out every vector in `set` (assumed orthonormal), twice for
/// numerical safety.
fn orthogonalize(v: &mut [f64], set: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in set {
            let c = dot(v, q);
            axpy(v, -c, q);
        }
    }
}

struct CycleResult {
    theta: f64,
    ritz: Vec<f64>,
    residual: f64,
    exhausted: bool,
}

fn lanczos_cycle<F>(
    dim: usize,
    apply: &F,
    start: &[f64],
    locked: &[Vec<f64>],
    opts: &LanczosOpts,
    scale: &mut f64,
) -> Option<CycleResult>
where
    F: Fn(&[f64], &mut [f64]),
{
    let mut q = start.to_vec();
    orthogonalize(&mut q, locked);
    let n0 = norm(&q);
    if n0 < 1e-12 {
        return None;
    }
    q.iter_mut().for_each(|x| *x /= n0);

    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; dim];
    let max_steps = opts.krylov_dim.min(dim - locked.len());

    let mut exhausted = false;
    for step in 0..max_steps {
        apply(&basis[step], &mut w);
        let alpha = dot(&w, &basis[step]);
        alphas.push(alpha);
        axpy(&mut w, -alpha, &basis[step]);
        if step > 0 {
            let beta_prev = betas[step - 1];
            axpy(&mut w, -beta_prev, &basis[step - 1]);
        }
        orthogonalize(&mut w, locked);
        orthogonalize(&mut w, &basis);
        *scale = scale.max(alpha.abs());
        let beta = norm(&w);
        if beta <= 1e-13 * scale.max(1.0) {
            exhausted = true;
            break;
        }
        betas.push(beta);
        *scale = scale.max(beta);
        let mut next = std::mem::replace(&mut w, vec![0.0; dim]);
        next.iter_mut().for_each(|x| *x /= beta);
        basis.push(next);
    }

    let k = alphas.len();
    if k == 0 {
        return None;
    }
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut best = 0;
    for i in 1..k {
        if eig.eigenvalues[i] < eig.eigenvalues[best] {
            best = i;
        }
    }
    let theta = eig.eigenvalues[best];
    let s = eig.eigenvectors.column(best);
    let mut ritz = vec![0.0; dim];
    for (i, b) in basis.iter().take(k).enumerate() {
        axpy(&mut ritz, s[i], b);
    }
    // keep the Ritz vector clean of converged directions before locking
    orthogonalize(&mut ritz, locked);
    let nr = norm(&ritz);
    if nr < 1e-12 {
        return None;
    }
    ritz.iter_mut().for_each(|x| *x /= nr);
    let residual = if exhausted {
        // invariant subspace: verify the Ritz pair explicitly
        let mut hv = vec![0.0; dim];
        apply(&ritz, &mut hv);
        axpy(&mut hv, -theta, &ritz);
        norm(&hv)
    } else {
        (betas[k - 1] * s[k - 1]).abs()
    };
    Some(CycleResult {
        theta,
        ritz,
        residual,
        exhausted,
    })
}

/// Lowest `n_eigs` eigenvalues (with multiplicity) and eigenvectors of a
/// symmetric operator given by its action.
pub fn lowest_eigenpairs<F>(
    dim: usize,
    apply: F,
    n_eigs: usize,
    opts: &LanczosOpts,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n_eigs = n_eigs.min(dim);
    let mut locked_vals: Vec<f64> = Vec::new();
    let mut locked_vecs: Vec<Vec<f64>> = Vec::new();
    let mut scale = 1e-300f64;

    for target in 0..n_eigs {
        let mut start = random_vector(dim, opts.seed.wrapping_add(target as u64 * 7919));
        let mut converged = false;
        for cycle in 0..opts.restarts {
            let cr = match lanczos_cycle(dim, &apply, &start, &locked_vecs, opts, &mut scale) {
                Some(cr) => cr,
                None => {
                    // degenerate start; try a fresh random direction
                    start = random_vector(
                        dim,
                        opts.seed
                            .wrapping_add(target as u64 * 7919)
                            .wrapping_add(cycle as u64 + 1),
                    );
                    continue;
                }
            };
            if cr.residual <= opts.tol * scale.max(cr.theta.abs()) || cr.exhausted {
                locked_vals.push(cr.theta);
                locked_vecs.push(cr.ritz);
                converged = true;
                break;
            }
            start = cr.ritz;
        }
        if !converged {
            return Err(CoreError::NonConvergence {
                iterations: opts.restarts * opts.krylov_dim,
                trace: locked_vals.clone(),
            });
        }
    }
    // deflation returns values in nondecreasing order up to rounding;
    // sort defensively while keeping vector pairing
    let mut order: Vec<usize> = (0..locked_vals.len()).collect();
    order.sort_by(|&a, &b| locked_vals[a].total_cmp(&locked_vals[b]));
    let vals = order.iter().map(|&i| locked_vals[i]).collect();
    let vecs = order.iter().map(|&i| locked_vecs[i].clone()).collect();
    Ok((vals, vecs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_lowest_of_diagonal() {
        let diag: Vec<f64> = (0..500).map(|i| (i as f64) * 0.1 - 3.0).collect();
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..x.len() {
                y[i] = diag[i] * x[i];
            }
        };
        let (vals, vecs) = lowest_eigenpairs(500, apply, 3, &LanczosOpts::default()).unwrap();
        assert!((vals[0] + 3.0).abs() < 1e-9);
        assert!((vals[1] + 2.9).abs() < 1e-9);
        assert!((vals[2] + 2.8).abs() < 1e-9);
        assert!((vecs[0][0].abs() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn resolves_degenerate_levels() {
        // two-fold degenerate minimum
        let mut diag: Vec<f64> = (0..300).map(|i| i as f64).collect();
        diag[7] = -5.0;
        diag[123] = -5.0;
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..x.len() {
                y[i] = diag[i] * x[i];
            }
        };
        let (vals, _) = lowest_eigenpairs(300, apply, 3, &LanczosOpts::default()).unwrap();
        assert!((vals[0] + 5.0).abs() < 1e-9);
        assert!((vals[1] + 5.0).abs() < 1e-9);
        assert!((vals[2] - 0.0).abs() < 1e-9);
    }

    #[test]
    fn handles_small_spaces_exactly() {
        let mat = [[2.0, 1.0], [1.0, 2.0]];
        let apply = |x: &[f64], y: &mut [f64]| {
            y[0] = mat[0][0] * x[0] + mat[0][1] * x[1];
            y[1] = mat[1][0] * x[0] + mat[1][1] * x[1];
        };
        let (vals, _) = lowest_eigenpairs(2, apply, 2, &LanczosOpts::default()).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-10);
        assert!((vals[1] - 3.0).abs() < 1e-10);
    }
}
