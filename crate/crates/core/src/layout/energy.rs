//! Kamada-Kawai energy, vertex separation penalty and their gradient.
//!
//! Every sum runs over unordered pairs `i < j`. Summing over ordered pairs
//! would double both terms together and leave the minimizers unchanged.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::graph::DistanceMatrix;

/// Distances are clamped below at this value inside energies and gradients.
pub const COINCIDENT_EPS: f64 = 1e-9;

/// Rows below this size are evaluated on the calling thread.
#[cfg(feature = "parallel")]
const PARALLEL_MIN_VERTICES: usize = 256;

#[inline]
fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// `sum_{i<j} 1/2 (d_ij / s_ij - 1)^2`
pub fn kk_energy(coords: &[[f64; 2]], dist_matrix: &DistanceMatrix) -> f64 {
    let n = coords.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let d = dist(coords[i], coords[j]).max(COINCIDENT_EPS);
            let r = d / dist_matrix.get(i, j) - 1.0;
            total += 0.5 * r * r;
        }
    }
    total
}

/// `lambda * sum_{i<j} max(0, alpha / d_ij - 1)`
pub fn separation_penalty(coords: &[[f64; 2]], alpha: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    let n = coords.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let d = dist(coords[i], coords[j]).max(COINCIDENT_EPS);
            if d < alpha {
                total += alpha / d - 1.0;
            }
        }
    }
    lambda * total
}

/// Combined objective: Kamada-Kawai energy plus separation penalty.
pub fn gpgl_energy(coords: &[[f64; 2]], dist_matrix: &DistanceMatrix, alpha: f64, lambda: f64) -> f64 {
    kk_energy(coords, dist_matrix) + separation_penalty(coords, alpha, lambda)
}

/// Energy contribution of all pairs touching `i` and the gradient with respect
/// to `x_i`.
#[inline]
fn row_terms(i: usize, x: &[f64], dist_matrix: &DistanceMatrix, alpha: f64, lambda: f64) -> (f64, [f64; 2]) {
    let n = x.len() / 2;
    let xi = [x[2 * i], x[2 * i + 1]];
    let s_row = dist_matrix.row(i);
    let mut energy = 0.0;
    let mut g = [0.0, 0.0];
    for j in 0..n {
        if j == i {
            continue;
        }
        let dx = xi[0] - x[2 * j];
        let dy = xi[1] - x[2 * j + 1];
        let raw = (dx * dx + dy * dy).sqrt();
        let d = raw.max(COINCIDENT_EPS);
        let s = s_row[j];
        let r = d / s - 1.0;
        energy += 0.5 * r * r;
        let mut slope = r / s;
        if lambda > 0.0 && d < alpha {
            energy += lambda * (alpha / d - 1.0);
            slope -= lambda * alpha / (d * d);
        }
        // An exactly coincident pair has no direction and contributes nothing.
        if raw > 0.0 {
            g[0] += slope * dx / raw;
            g[1] += slope * dy / raw;
        }
    }
    (energy, g)
}

/// Evaluates the objective into `grad` (flat `[x0, y0, x1, y1, ...]`).
///
/// Rows are computed independently and reduced in index order, so the result
/// does not depend on how many threads ran.
pub(crate) fn evaluate(x: &[f64], grad: &mut [f64], dist_matrix: &DistanceMatrix, alpha: f64, lambda: f64) -> f64 {
    let n = x.len() / 2;
    let row = |i: usize| row_terms(i, x, dist_matrix, alpha, lambda);
    #[cfg(feature = "parallel")]
    let rows: Vec<(f64, [f64; 2])> =
        if n >= PARALLEL_MIN_VERTICES { (0..n).into_par_iter().map(row).collect() } else { (0..n).map(row).collect() };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<(f64, [f64; 2])> = (0..n).map(row).collect();

    let mut energy = 0.0;
    for (i, (e, g)) in rows.into_iter().enumerate() {
        energy += e;
        grad[2 * i] = g[0];
        grad[2 * i + 1] = g[1];
    }
    0.5 * energy
}

/// Gradient of [`gpgl_energy`] with respect to every vertex position.
///
/// Each active separation pair (`d_ij < alpha`) contributes
/// `-lambda * alpha * (x_i - x_j) / d_ij^3`. Exactly coincident pairs have no
/// defined direction and contribute zero, so the result is symmetric under any
/// relabelling that fixes the coordinates.
pub fn gpgl_gradient(coords: &[[f64; 2]], dist_matrix: &DistanceMatrix, alpha: f64, lambda: f64) -> Vec<[f64; 2]> {
    let x: Vec<f64> = coords.iter().flat_map(|p| [p[0], p[1]]).collect();
    let mut g = vec![0.0; x.len()];
    evaluate(&x, &mut g, dist_matrix, alpha, lambda);
    g.chunks_exact(2).map(|c| [c[0], c[1]]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{shortest_path_distances, Graph};

    fn ones(n: usize) -> DistanceMatrix {
        shortest_path_distances(&Graph::complete(n))
    }

    #[test]
    fn kk_two_vertices() {
        let s = ones(2);
        assert_eq!(kk_energy(&[[0.0, 0.0], [1.0, 0.0]], &s), 0.0);
        assert_eq!(kk_energy(&[[0.0, 0.0], [2.0, 0.0]], &s), 0.5);
    }

    #[test]
    fn penalty_cases() {
        assert_eq!(separation_penalty(&[[0.0, 0.0], [0.625, 0.0]], 1.25, 1000.0), 1000.0);
        assert_eq!(separation_penalty(&[[0.0, 0.0], [1.3, 0.0], [0.0, 1.3]], 1.25, 1000.0), 0.0);
        assert_eq!(separation_penalty(&[[0.0, 0.0], [0.1, 0.0]], 1.25, 0.0), 0.0);
    }

    #[test]
    fn coincident_points_stay_finite() {
        let s = ones(2);
        let coords = [[1.0, 1.0], [1.0, 1.0]];
        let e = gpgl_energy(&coords, &s, 1.25, 1000.0);
        assert!(e.is_finite() && e > 1e12);
        let g = gpgl_gradient(&coords, &s, 1.25, 1000.0);
        assert_eq!(g, vec![[0.0, 0.0], [0.0, 0.0]]);
    }

    #[test]
    fn inactive_hinge_contributes_nothing() {
        let s = ones(2);
        let coords = [[0.0, 0.0], [1.5, 0.0]];
        let with = gpgl_gradient(&coords, &s, 1.25, 1000.0);
        let without = gpgl_gradient(&coords, &s, 1.25, 0.0);
        assert_eq!(with, without);
    }

    #[test]
    fn row_evaluation_agrees_with_pair_sums() {
        let g = Graph::new(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]).unwrap();
        let s = shortest_path_distances(&g);
        let coords = [[0.0, 0.0], [0.7, 0.1], [1.9, -0.3], [0.2, 2.2], [-1.0, 0.9]];
        let x: Vec<f64> = coords.iter().flatten().copied().collect();
        let mut grad = vec![0.0; 10];
        let e = evaluate(&x, &mut grad, &s, 1.25, 1000.0);
        assert!((e - gpgl_energy(&coords, &s, 1.25, 1000.0)).abs() < 1e-9);
    }
}
