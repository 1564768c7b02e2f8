//! Second-smallest eigenvector of the symmetric normalized Laplacian
//! `I - D^-1/2 W D^-1/2` of a connected graph.
//!
//! Small graphs use a dense symmetric eigensolver. Larger ones use block
//! inverse iteration: each block column is solved against the Laplacian by
//! conjugate gradients inside the complement of the known null vector
//! `D^1/2 1`, followed by a Rayleigh-Ritz step. The block makes clustered or
//! repeated eigenvalues converge as quickly as isolated ones.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::rng::{mix64, unit_f64};

/// Graphs up to this size are solved densely.
pub(crate) const DENSE_MAX: usize = 160;
/// Eigen-residual tolerance `|L x - theta x|` for a unit `x`.
const TOL: f64 = 1e-8;
const MAX_OUTER: usize = 5000;
const BLOCK: usize = 4;

/// Adjacency of a connected graph with at least two vertices.
pub(crate) struct LaplacianView<'a> {
    pub adj: &'a [Vec<usize>],
}

impl LaplacianView<'_> {
    fn len(&self) -> usize {
        self.adj.len()
    }

    fn inv_sqrt_deg(&self) -> Vec<f64> {
        self.adj.iter().map(|a| 1.0 / (a.len() as f64).sqrt()).collect()
    }

    /// `out = L_sym v`.
    fn apply(&self, isd: &[f64], v: &[f64], out: &mut [f64]) {
        for (i, nbrs) in self.adj.iter().enumerate() {
            let s: f64 = nbrs.iter().map(|&j| isd[j] * v[j]).sum();
            out[i] = v[i] - isd[i] * s;
        }
    }
}

/// Generalized Fiedler vector `x = D^-1/2 y` with `y` the unit eigenvector of
/// the second-smallest eigenvalue of `L_sym`. `None` if the iteration does
/// not reach the residual tolerance.
pub(crate) fn fiedler_vector(view: &LaplacianView) -> Option<Vec<f64>> {
    let n = view.len();
    debug_assert!(n >= 2);
    let isd = view.inv_sqrt_deg();
    let y = if n <= DENSE_MAX { dense(view, &isd) } else { block_inverse_iteration(view, &isd)? };
    Some(y.iter().zip(&isd).map(|(v, s)| v * s).collect())
}

fn dense(view: &LaplacianView, isd: &[f64]) -> Vec<f64> {
    let n = view.len();
    let mut l = DMatrix::<f64>::identity(n, n);
    for (i, nbrs) in view.adj.iter().enumerate() {
        for &j in nbrs {
            l[(i, j)] -= isd[i] * isd[j];
        }
    }
    let eig = SymmetricEigen::new(l);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    eig.eigenvectors.column(order[1]).iter().copied().collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

fn project_out(v: &mut [f64], b: &[f64]) {
    let c = dot(v, b);
    axpy(-c, b, v);
}

/// Solves `L z = b` for `b` orthogonal to the null vector `u0`, keeping the
/// iterates in that complement.
fn conjugate_gradient(view: &LaplacianView, isd: &[f64], u0: &[f64], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut z = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let b_norm = dot(b, b).sqrt();
    let mut rr = dot(&r, &r);
    for it in 0..20 * n {
        if rr.sqrt() <= 1e-12 * b_norm {
            break;
        }
        view.apply(isd, &p, &mut ap);
        let pap = dot(&p, &ap);
        if pap.is_nan() || pap <= 0.0 {
            break;
        }
        let a = rr / pap;
        axpy(a, &p, &mut z);
        axpy(-a, &ap, &mut r);
        if it % 32 == 31 {
            project_out(&mut r, u0);
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        p.iter_mut().zip(&r).for_each(|(pi, ri)| *pi = ri + beta * *pi);
    }
    project_out(&mut z, u0);
    z
}

fn block_inverse_iteration(view: &LaplacianView, isd: &[f64]) -> Option<Vec<f64>> {
    let n = view.len();
    let k = BLOCK.min(n - 1);
    let mut u0: Vec<f64> = isd.iter().map(|s| 1.0 / s).collect();
    normalize(&mut u0);

    let mut block: Vec<Vec<f64>> = (0..k)
        .map(|c| (0..n).map(|i| unit_f64(mix64(((c as u64) << 40) ^ i as u64)) - 0.5).collect())
        .collect();
    orthonormalize(&mut block, &u0);

    let mut tmp = vec![0.0; n];
    for _ in 0..MAX_OUTER {
        let mut next: Vec<Vec<f64>> = block.iter().map(|b| conjugate_gradient(view, isd, &u0, b)).collect();
        orthonormalize(&mut next, &u0);
        if next.len() < 2 && k >= 2 {
            return None;
        }

        // Rayleigh-Ritz on the block.
        let m = next.len();
        let images: Vec<Vec<f64>> = next
            .iter()
            .map(|v| {
                view.apply(isd, v, &mut tmp);
                tmp.clone()
            })
            .collect();
        let h = DMatrix::from_fn(m, m, |a, b| 0.5 * (dot(&next[a], &images[b]) + dot(&next[b], &images[a])));
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        block = order
            .iter()
            .map(|&c| {
                let mut v = vec![0.0; n];
                for (r, basis) in next.iter().enumerate() {
                    axpy(eig.eigenvectors[(r, c)], basis, &mut v);
                }
                v
            })
            .collect();

        let theta = eig.eigenvalues[order[0]];
        let mut residual = vec![0.0; n];
        view.apply(isd, &block[0], &mut residual);
        axpy(-theta, &block[0], &mut residual);
        if dot(&residual, &residual).sqrt() < TOL {
            return Some(block.swap_remove(0));
        }
    }
    None
}

/// Modified Gram-Schmidt against `u0` and each other; drops dependent columns.
fn orthonormalize(block: &mut Vec<Vec<f64>>, u0: &[f64]) {
    let mut done: Vec<Vec<f64>> = vec![u0.to_vec()];
    let mut out = Vec::with_capacity(block.len());
    for mut v in block.drain(..) {
        for _ in 0..2 {
            done.iter().for_each(|b| project_out(&mut v, b));
        }
        if normalize(&mut v) > 1e-10 {
            done.push(v.clone());
            out.push(v);
        }
    }
    *block = out;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_adj(n: usize) -> Vec<Vec<usize>> {
        (0..n)
            .map(|i| {
                let mut a = Vec::new();
                if i > 0 {
                    a.push(i - 1);
                }
                if i + 1 < n {
                    a.push(i + 1);
                }
                a
            })
            .collect()
    }

    fn check_monotone(x: &[f64]) {
        let inc = x.windows(2).all(|w| w[0] < w[1]);
        let dec = x.windows(2).all(|w| w[0] > w[1]);
        assert!(inc || dec, "path Fiedler vector must be monotone");
    }

    #[test]
    fn dense_path_is_monotone() {
        let adj = path_adj(20);
        check_monotone(&fiedler_vector(&LaplacianView { adj: &adj }).unwrap());
    }

    #[test]
    fn iterative_matches_dense() {
        // A banded path large enough for the iterative solver.
        let n = DENSE_MAX + 40;
        let mut adj = path_adj(n);
        for i in (0..n).step_by(5) {
            for j in i + 2..(i + 5).min(n) {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        let view = LaplacianView { adj: &adj };
        let isd = view.inv_sqrt_deg();
        let a = block_inverse_iteration(&view, &isd).unwrap();
        let b = dense(&view, &isd);
        let sign = dot(&a, &b).signum();
        let err = a.iter().zip(&b).map(|(x, y)| (x - sign * y).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6, "max deviation {err}");
    }

    #[test]
    fn long_path_iterative() {
        let adj = path_adj(400);
        check_monotone(&fiedler_vector(&LaplacianView { adj: &adj }).unwrap());
    }
}
