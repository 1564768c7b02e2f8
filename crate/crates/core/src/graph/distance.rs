use std::collections::VecDeque;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use super::Graph;

/// All-pairs hop distances.
///
/// Unreachable pairs hold [`DistanceMatrix::sentinel`], twice the largest
/// finite distance in the graph (at least 2), so that the layout energy stays
/// finite and separate components are pushed apart.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
    sentinel: f64,
    connected: bool,
}

impl DistanceMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let n = rows.len();
        let d: Vec<f64> = rows.into_iter().flatten().collect();
        assert_eq!(d.len(), n * n, "distance matrix must be square");
        Self { n, d, sentinel: f64::INFINITY, connected: true }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.d[i * self.n..(i + 1) * self.n]
    }

    pub fn sentinel(&self) -> f64 {
        self.sentinel
    }

    /// True when no pair needed the sentinel.
    pub fn is_connected(&self) -> bool {
        self.connected
    }

    /// Mean over unordered pairs `i < j`.
    pub fn mean_pairwise(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let mut total = 0.0;
        for i in 0..self.n {
            total += self.row(i)[i + 1..].iter().sum::<f64>();
        }
        total / (self.n * (self.n - 1) / 2) as f64
    }
}

fn bfs(g: &Graph, source: usize) -> Vec<u32> {
    let mut dist = vec![u32::MAX; g.num_vertices()];
    let mut queue = VecDeque::new();
    dist[source] = 0;
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let next = dist[u] + 1;
        for &w in g.neighbors(u) {
            if dist[w] == u32::MAX {
                dist[w] = next;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Hop-count distances by one breadth-first search per source.
pub fn shortest_path_distances(g: &Graph) -> DistanceMatrix {
    let n = g.num_vertices();
    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<u32>> = (0..n).into_par_iter().map(|s| bfs(g, s)).collect();
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<u32>> = (0..n).map(|s| bfs(g, s)).collect();

    let max_finite = rows.iter().flatten().filter(|&&d| d != u32::MAX).copied().max().unwrap_or(0);
    let connected = rows.iter().flatten().all(|&d| d != u32::MAX);
    let sentinel = 2.0 * f64::from(max_finite.max(1));
    let d = rows
        .into_iter()
        .flatten()
        .map(|d| if d == u32::MAX { sentinel } else { f64::from(d) })
        .collect();
    DistanceMatrix { n, d, sentinel, connected }
}

/// Maximal connected vertex sets, each sorted, ordered by smallest member.
pub fn connected_components(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.num_vertices();
    let mut seen = vec![false; n];
    let mut components = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start];
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &w in g.neighbors(u) {
                if !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        components.push(comp);
    }
    components
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn path_distances() {
        let d = shortest_path_distances(&Graph::path(3));
        assert_eq!(d.get(0, 2), 2.0);
        assert_eq!(d.get(2, 0), 2.0);
        assert_eq!(d.get(1, 1), 0.0);
        assert!(d.is_connected());
    }

    #[test]
    fn complete_graph_is_all_ones() {
        let d = shortest_path_distances(&Graph::complete(32));
        for i in 0..32 {
            for j in 0..32 {
                assert_eq!(d.get(i, j), if i == j { 0.0 } else { 1.0 });
            }
        }
    }

    #[test]
    fn unreachable_pairs_use_sentinel() {
        let g = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        let d = shortest_path_distances(&g);
        assert!(!d.is_connected());
        assert_eq!(d.sentinel(), 2.0);
        assert_eq!(d.get(0, 2), d.sentinel());

        let g = Graph::new(5, [(0, 1), (1, 2), (3, 4)]).unwrap();
        let d = shortest_path_distances(&g);
        assert_eq!(d.sentinel(), 4.0);
        assert_eq!(d.get(4, 0), 4.0);
    }

    #[test]
    fn components() {
        assert_eq!(connected_components(&Graph::path(3)), vec![vec![0, 1, 2]]);
        let g = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(connected_components(&g), vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(connected_components(&Graph::empty(3)), vec![vec![0], vec![1], vec![2]]);
    }

    fn floyd_warshall(g: &Graph) -> Vec<Vec<f64>> {
        let n = g.num_vertices();
        let mut d = vec![vec![f64::INFINITY; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        for &(u, v) in g.edges() {
            d[u][v] = 1.0;
            d[v][u] = 1.0;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if d[i][k] + d[k][j] < d[i][j] {
                        d[i][j] = d[i][k] + d[k][j];
                    }
                }
            }
        }
        d
    }

    fn connected_graph() -> impl Strategy<Value = Graph> {
        (2usize..30).prop_flat_map(|n| {
            let parents = proptest::collection::vec(any::<prop::sample::Index>(), n - 1);
            let extra = proptest::collection::vec((0..n, 0..n), 0..2 * n);
            (Just(n), parents, extra).prop_map(|(n, parents, extra)| {
                let mut edges: Vec<_> = parents.iter().enumerate().map(|(k, p)| (p.index(k + 1), k + 1)).collect();
                edges.extend(extra.into_iter().filter(|(u, v)| u != v));
                Graph::new(n, edges).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn bfs_matches_floyd_warshall_and_triangle_inequality(g in connected_graph()) {
            let d = shortest_path_distances(&g);
            let oracle = floyd_warshall(&g);
            let n = g.num_vertices();
            for (i, row) in oracle.iter().enumerate() {
                for (j, &expected) in row.iter().enumerate() {
                    prop_assert_eq!(d.get(i, j), expected);
                    prop_assert_eq!(d.get(i, j), d.get(j, i));
                    if i != j {
                        prop_assert!(d.get(i, j) >= 1.0);
                    }
                    for k in 0..n {
                        prop_assert!(d.get(i, j) <= d.get(i, k) + d.get(k, j));
                    }
                }
            }
        }
    }
}
