use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::Rng;

use super::{ContinuousLayout, InitStrategy};
use crate::graph::{shortest_path_distances, DistanceMatrix, Graph};
use crate::rng::seeded;

/// Initial positions together with the strategy that produced them, which
/// differs from the requested one when spectral initialization falls back to
/// circular.
#[derive(Clone, Debug)]
pub struct Initialization {
    pub layout: ContinuousLayout,
    pub used: InitStrategy,
}

impl Initialization {
    pub fn fell_back(&self, requested: InitStrategy) -> bool {
        self.used != requested
    }
}

/// Places `order[k]` at angle `2 pi k / n` on a circle of radius `n / (2 pi)`,
/// so consecutive vertices are one unit of arc apart.
pub fn circular_layout(order: &[usize]) -> Vec<[f64; 2]> {
    let n = order.len();
    let mut coords = vec![[0.0, 0.0]; n];
    if n < 2 {
        return coords;
    }
    let radius = n as f64 / std::f64::consts::TAU;
    for (k, &v) in order.iter().enumerate() {
        let angle = std::f64::consts::TAU * k as f64 / n as f64;
        coords[v] = [radius * angle.cos(), radius * angle.sin()];
    }
    coords
}

/// Deterministic initial layout for `(strategy, seed)`.
pub fn init_layout(g: &Graph, strategy: InitStrategy, seed: u64) -> Initialization {
    let dist = shortest_path_distances(g);
    init_with_distances(g, &dist, strategy, seed)
}

pub(crate) fn init_with_distances(g: &Graph, dist: &DistanceMatrix, strategy: InitStrategy, seed: u64) -> Initialization {
    let n = g.num_vertices();
    let mut rng = seeded(seed);
    let coords = match strategy {
        InitStrategy::Circular => None,
        InitStrategy::Random => {
            let side = (n as f64).sqrt();
            Some((0..n).map(|_| [rng.gen_range(0.0..side), rng.gen_range(0.0..side)]).collect())
        }
        InitStrategy::Spectral => spectral_coords(g, dist),
    };
    match coords {
        Some(coords) => Initialization { layout: ContinuousLayout::new(coords), used: strategy },
        None => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            Initialization { layout: ContinuousLayout::new(circular_layout(&order)), used: InitStrategy::Circular }
        }
    }
}

/// Eigenvectors of the two smallest non-zero Laplacian eigenvalues, scaled so
/// the mean pairwise distance matches the mean hop distance. `None` when the
/// graph has fewer than two non-zero eigenvalues.
fn spectral_coords(g: &Graph, dist: &DistanceMatrix) -> Option<Vec<[f64; 2]>> {
    let n = g.num_vertices();
    if n < 3 {
        return None;
    }
    let mut lap = DMatrix::<f64>::zeros(n, n);
    for &(u, v) in g.edges() {
        lap[(u, v)] -= 1.0;
        lap[(v, u)] -= 1.0;
        lap[(u, u)] += 1.0;
        lap[(v, v)] += 1.0;
    }
    let eig = SymmetricEigen::new(lap);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let scale = eig.eigenvalues.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let picked: Vec<usize> = order.into_iter().filter(|&k| eig.eigenvalues[k] > 1e-9 * scale).take(2).collect();
    if picked.len() < 2 {
        return None;
    }
    let column = |k: usize| -> Vec<f64> {
        let col: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        let pivot = col.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        if pivot < 0.0 {
            col.into_iter().map(|v| -v).collect()
        } else {
            col
        }
    };
    let (ex, ey) = (column(picked[0]), column(picked[1]));
    let mut coords: Vec<[f64; 2]> = ex.into_iter().zip(ey).map(|(x, y)| [x, y]).collect();

    let mut mean = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            mean += (coords[i][0] - coords[j][0]).hypot(coords[i][1] - coords[j][1]);
        }
    }
    mean /= (n * (n - 1) / 2) as f64;
    if mean.is_nan() || mean <= 0.0 {
        return None;
    }
    let factor = dist.mean_pairwise() / mean;
    for p in &mut coords {
        p[0] *= factor;
        p[1] *= factor;
    }
    Some(coords)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circular_identity_order_on_four() {
        let c = circular_layout(&[0, 1, 2, 3]);
        let r = 4.0 / std::f64::consts::TAU;
        let expected = [[r, 0.0], [0.0, r], [-r, 0.0], [0.0, -r]];
        for (p, e) in c.iter().zip(expected) {
            assert!((p[0] - e[0]).abs() < 1e-12 && (p[1] - e[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let g = Graph::path(10);
        for strategy in [InitStrategy::Circular, InitStrategy::Random, InitStrategy::Spectral] {
            let a = init_layout(&g, strategy, 7);
            let b = init_layout(&g, strategy, 7);
            assert_eq!(a.layout.coords, b.layout.coords);
            assert_eq!(a.used, strategy);
        }
        assert_ne!(
            init_layout(&g, InitStrategy::Circular, 1).layout.coords,
            init_layout(&g, InitStrategy::Circular, 2).layout.coords
        );
    }

    #[test]
    fn spectral_falls_back_on_tiny_graphs() {
        let init = init_layout(&Graph::path(2), InitStrategy::Spectral, 0);
        assert!(init.fell_back(InitStrategy::Spectral));
        assert_eq!(init.used, InitStrategy::Circular);
    }

    #[test]
    fn spectral_scale_matches_mean_hop_distance() {
        let g = Graph::path(6);
        let init = init_layout(&g, InitStrategy::Spectral, 0);
        let c = &init.layout.coords;
        let mut mean = 0.0;
        for i in 0..6 {
            for j in i + 1..6 {
                mean += (c[i][0] - c[j][0]).hypot(c[i][1] - c[j][1]);
            }
        }
        mean /= 15.0;
        let hops = shortest_path_distances(&g).mean_pairwise();
        assert!((mean - hops).abs() < 1e-9);
    }

    #[test]
    fn random_stays_in_square() {
        let init = init_layout(&Graph::empty(16), InitStrategy::Random, 3);
        assert!(init.layout.coords.iter().flatten().all(|&v| (0.0..4.0).contains(&v)));
    }
}
