//! Incremental Bowyer-Watson Delaunay triangulation with ghost simplices.
//!
//! Every hull facet carries a ghost simplex joining it to a vertex at
//! infinity, so no bounding super-simplex is needed and hull edges are never
//! lost. A ghost simplex conflicts with a point strictly beyond its facet, as
//! seen from an interior reference point. Predicates are evaluated in floating
//! point; a determinant inside a relative band of `1e-12` is re-evaluated on a
//! copy of the points jittered by an index-seeded offset of magnitude `1e-9`.

use std::collections::HashMap;

use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use super::PointCloud;
use crate::graph::Graph;
use crate::rng::{mix64, unit_f64};

const INF: usize = usize::MAX;
const PAD: usize = usize::MAX - 1;
const BAND: f64 = 1e-12;
const JITTER: f64 = 1e-9;
/// Normalized distance below which points count as lying on a line or plane.
const FLAT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TriangulationKind {
    /// Tetrahedralization in 3D.
    Tetrahedral,
    /// All points coplanar: 2D triangulation in the best-fit plane.
    Planar,
    /// All points collinear: a path in order along the line.
    Collinear,
    /// Fewer than four distinct points: every pair connected.
    Complete,
}

#[derive(Clone, Debug)]
pub struct Triangulation {
    /// Normalized coordinates are the vertex features.
    pub graph: Graph,
    pub kind: TriangulationKind,
    /// Tetrahedra or triangles over original point indices. Exact duplicate
    /// points never appear here; they share the neighbors of their first
    /// copy in `graph`.
    pub simplices: Vec<Vec<usize>>,
}

impl Triangulation {
    pub fn is_fallback(&self) -> bool {
        self.kind != TriangulationKind::Tetrahedral
    }
}

/// Delaunay graph of the normalized cloud.
pub fn delaunay_graph(pc: &PointCloud) -> Triangulation {
    let norm = pc.normalized();
    let pts = norm.points();
    let n = pts.len();

    let mut first_copy: HashMap<[u64; 3], usize> = HashMap::new();
    let mut unique = Vec::new();
    let mut rep_of = vec![0; n];
    for (i, p) in pts.iter().enumerate() {
        let key = p.map(|v| if v == 0.0 { 0 } else { v.to_bits() });
        let rep = *first_copy.entry(key).or_insert_with(|| {
            unique.push(i);
            i
        });
        rep_of[i] = rep;
    }
    let upts: Vec<[f64; 3]> = unique.iter().map(|&i| pts[i]).collect();
    let (local_edges, local_simplices, kind) = triangulate_unique(&upts);

    let mut edges: Vec<(usize, usize)> = local_edges.iter().map(|&(a, b)| (unique[a], unique[b])).collect();
    if unique.len() < n {
        // Copies of a point share its neighbors and are adjacent to each other.
        let mut copies: HashMap<usize, Vec<usize>> = HashMap::new();
        for (i, &rep) in rep_of.iter().enumerate() {
            copies.entry(rep).or_default().push(i);
        }
        let rep_edges = std::mem::take(&mut edges);
        for (a, b) in rep_edges {
            for &x in &copies[&a] {
                edges.extend(copies[&b].iter().map(|&y| (x, y)));
            }
        }
        for group in copies.values() {
            for (x, &a) in group.iter().enumerate() {
                edges.extend(group[x + 1..].iter().map(|&b| (a, b)));
            }
        }
    }

    let graph = Graph::new(n, edges)
        .expect("triangulation edges are valid")
        .with_features(pts.iter().map(|p| p.to_vec()).collect())
        .expect("one feature row per point");
    let simplices = local_simplices.into_iter().map(|s| s.into_iter().map(|v| unique[v]).collect()).collect();
    Triangulation { graph, kind, simplices }
}

type Edges = Vec<(usize, usize)>;

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn triangulate_unique(pts: &[[f64; 3]]) -> (Edges, Vec<Vec<usize>>, TriangulationKind) {
    let m = pts.len();
    if m < 4 {
        let edges = (0..m).flat_map(|a| (a + 1..m).map(move |b| (a, b))).collect();
        return (edges, Vec::new(), TriangulationKind::Complete);
    }
    let farthest = |score: &dyn Fn([f64; 3]) -> f64| {
        (0..m).map(|i| (score(pts[i]), i)).fold((f64::NEG_INFINITY, 0), |b, c| if c.0 > b.0 { c } else { b })
    };
    let p0 = pts[0];
    let (_, i1) = farthest(&|p| norm(sub(p, p0)));
    let dir = sub(pts[i1], p0);
    let dir_len = norm(dir);
    let (line_dist, i2) = farthest(&|p| norm(cross(sub(p, p0), dir)) / dir_len);
    if line_dist < FLAT_TOL {
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| dot(sub(pts[a], p0), dir).total_cmp(&dot(sub(pts[b], p0), dir)).then(a.cmp(&b)));
        let edges = order.windows(2).map(|w| (w[0].min(w[1]), w[0].max(w[1]))).collect();
        return (edges, Vec::new(), TriangulationKind::Collinear);
    }
    let normal = cross(dir, sub(pts[i2], p0));
    let normal_len = norm(normal);
    let (plane_dist, i3) = farthest(&|p| dot(sub(p, p0), normal).abs() / normal_len);

    let mut ordered: Vec<usize> = (0..m).collect();
    ordered.sort_by_key(|&i| morton(pts[i]));
    if plane_dist < FLAT_TOL {
        let projected = project_to_plane(pts);
        let init = [0, i1, i2];
        let mesh = Mesh::build(2, &projected, &init, &ordered);
        let (edges, simplices) = mesh.finish();
        (edges, simplices, TriangulationKind::Planar)
    } else {
        let init = [0, i1, i2, i3];
        let mesh = Mesh::build(3, pts, &init, &ordered);
        let (edges, simplices) = mesh.finish();
        (edges, simplices, TriangulationKind::Tetrahedral)
    }
}

/// Coordinates in the plane spanned by the two principal axes, `z = 0`.
fn project_to_plane(pts: &[[f64; 3]]) -> Vec<[f64; 3]> {
    let n = pts.len() as f64;
    let mean = (0..3).map(|k| pts.iter().map(|p| p[k]).sum::<f64>() / n).collect::<Vec<_>>();
    let mut cov = Matrix3::<f64>::zeros();
    for p in pts {
        let d = Vector3::new(p[0] - mean[0], p[1] - mean[1], p[2] - mean[2]);
        cov += d * d.transpose();
    }
    let eig = SymmetricEigen::new(cov);
    let mut order = [0, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let u = eig.eigenvectors.column(order[0]);
    let v = eig.eigenvectors.column(order[1]);
    pts.iter()
        .map(|p| {
            let d = Vector3::new(p[0] - mean[0], p[1] - mean[1], p[2] - mean[2]);
            [d.dot(&u), d.dot(&v), 0.0]
        })
        .collect()
}

/// Z-order key on a 10-bit grid over the normalized cube `[-0.5, 0.5]^3`.
fn morton(p: [f64; 3]) -> u64 {
    let q = p.map(|v| ((v + 0.5) * 1024.0).clamp(0.0, 1023.0) as u64);
    let mut key = 0;
    for bit in 0..10 {
        for (k, &c) in q.iter().enumerate() {
            key |= ((c >> bit) & 1) << (3 * bit + k);
        }
    }
    key
}

fn det3(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    dot(a, cross(b, c))
}

fn det4(m: [[f64; 4]; 4]) -> f64 {
    let s0 = m[0][0] * m[1][1] - m[1][0] * m[0][1];
    let s1 = m[0][0] * m[1][2] - m[1][0] * m[0][2];
    let s2 = m[0][0] * m[1][3] - m[1][0] * m[0][3];
    let s3 = m[0][1] * m[1][2] - m[1][1] * m[0][2];
    let s4 = m[0][1] * m[1][3] - m[1][1] * m[0][3];
    let s5 = m[0][2] * m[1][3] - m[1][2] * m[0][3];
    let c5 = m[2][2] * m[3][3] - m[3][2] * m[2][3];
    let c4 = m[2][1] * m[3][3] - m[3][1] * m[2][3];
    let c3 = m[2][1] * m[3][2] - m[3][1] * m[2][2];
    let c2 = m[2][0] * m[3][3] - m[3][0] * m[2][3];
    let c1 = m[2][0] * m[3][2] - m[3][0] * m[2][2];
    let c0 = m[2][0] * m[3][1] - m[3][0] * m[2][1];
    s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0
}

struct Mesh<'a> {
    dim: usize,
    pts: &'a [[f64; 3]],
    jittered: Vec<[f64; 3]>,
    simplices: Vec<[usize; 4]>,
    neighbors: Vec<[usize; 4]>,
    alive: Vec<bool>,
    interior: [f64; 3],
    stamp: Vec<u32>,
    in_cavity: Vec<u32>,
    round: u32,
}

impl<'a> Mesh<'a> {
    fn build(dim: usize, pts: &'a [[f64; 3]], init: &[usize], order: &[usize]) -> Self {
        let k = dim + 1;
        let jittered = pts
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let mut q = *p;
                for (c, v) in q.iter_mut().enumerate().take(dim) {
                    *v += JITTER * (2.0 * unit_f64(mix64((3 * i + c) as u64)) - 1.0);
                }
                q
            })
            .collect();
        let mut interior = [0.0; 3];
        for &v in init {
            for c in 0..3 {
                interior[c] += pts[v][c] / k as f64;
            }
        }
        let mut mesh = Mesh {
            dim,
            pts,
            jittered,
            simplices: Vec::new(),
            neighbors: Vec::new(),
            alive: Vec::new(),
            interior,
            stamp: Vec::new(),
            in_cavity: Vec::new(),
            round: 0,
        };

        let mut first = [PAD; 4];
        first[..k].copy_from_slice(init);
        let mut created = vec![mesh.push(first)];
        for slot in 0..k {
            let mut ghost = first;
            ghost[slot] = INF;
            created.push(mesh.push(ghost));
        }
        mesh.link(&created);

        for &p in order {
            if !init.contains(&p) {
                mesh.insert(p);
            }
        }
        mesh
    }

    fn k(&self) -> usize {
        self.dim + 1
    }

    fn push(&mut self, s: [usize; 4]) -> usize {
        self.simplices.push(s);
        self.neighbors.push([INF; 4]);
        self.alive.push(true);
        self.stamp.push(0);
        self.in_cavity.push(0);
        self.simplices.len() - 1
    }

    fn face_key(&self, t: usize, slot: usize) -> [usize; 3] {
        let mut key = [PAD; 3];
        let mut c = 0;
        for (j, &v) in self.simplices[t][..self.k()].iter().enumerate() {
            if j != slot {
                key[c] = v;
                c += 1;
            }
        }
        key.sort_unstable();
        key
    }

    /// Connects the given simplices along their shared faces.
    fn link(&mut self, ids: &[usize]) {
        let mut open: HashMap<[usize; 3], (usize, usize)> = HashMap::new();
        for &t in ids {
            for slot in 0..self.k() {
                if self.neighbors[t][slot] != INF {
                    continue;
                }
                let key = self.face_key(t, slot);
                match open.remove(&key) {
                    Some((u, us)) => {
                        self.neighbors[t][slot] = u;
                        self.neighbors[u][us] = t;
                    }
                    None => {
                        open.insert(key, (t, slot));
                    }
                }
            }
        }
    }

    fn point(&self, v: usize, jitter: bool) -> [f64; 3] {
        if jitter {
            self.jittered[v]
        } else {
            self.pts[v]
        }
    }

    /// Sign of `orient` over the facet points followed by `q`, with the band
    /// fallback applied to input points only.
    fn orient_sign(&self, facet: &[usize], q: Option<usize>, q_fixed: [f64; 3]) -> f64 {
        let eval = |jitter: bool| {
            let a = self.point(facet[0], jitter);
            let q = q.map_or(q_fixed, |v| self.point(v, jitter));
            let b = sub(self.point(facet[1], jitter), a);
            if self.dim == 3 {
                let c = sub(self.point(facet[2], jitter), a);
                let d = sub(q, a);
                (det3(b, c, d), norm(b) * norm(c) * norm(d))
            } else {
                let c = sub(q, a);
                (b[0] * c[1] - b[1] * c[0], norm(b) * norm(c))
            }
        };
        let (d, scale) = eval(false);
        if d.abs() > BAND * scale {
            return d.signum();
        }
        let (d, _) = eval(true);
        if d == 0.0 {
            0.0
        } else {
            d.signum()
        }
    }

    /// Positive when `p` is strictly inside the circumsphere of finite
    /// simplex `t`.
    fn inside_sign(&self, t: usize, p: usize) -> f64 {
        let s = &self.simplices[t][..self.k()];
        let orient = self.orient_sign(&s[..self.dim], Some(s[self.dim]), [0.0; 3]);
        let eval = |jitter: bool| {
            let e = self.point(p, jitter);
            if self.dim == 3 {
                let mut r = [[0.0; 4]; 4];
                let mut scale = 1.0;
                for (row, &v) in r.iter_mut().zip(s) {
                    let d = sub(self.point(v, jitter), e);
                    let l = dot(d, d);
                    *row = [d[0], d[1], d[2], l];
                    scale *= (l + l * l).sqrt();
                }
                (det4(r), scale)
            } else {
                let mut rows = [[0.0; 3]; 3];
                let mut scale = 1.0;
                for (row, &v) in rows.iter_mut().zip(s) {
                    let d = sub(self.point(v, jitter), e);
                    let l = d[0] * d[0] + d[1] * d[1];
                    *row = [d[0], d[1], l];
                    scale *= (l + l * l).sqrt();
                }
                (det3(rows[0], rows[1], rows[2]), scale)
            }
        };
        let (d, scale) = eval(false);
        let d = if d.abs() > BAND * scale { d } else { eval(true).0 };
        // In 2D the lifted determinant is positive inside for counterclockwise
        // triangles; in 3D this orientation convention flips the sign.
        let convention = if self.dim == 3 { -1.0 } else { 1.0 };
        convention * orient * d.signum()
    }

    fn conflicts(&self, t: usize, p: usize) -> bool {
        let s = &self.simplices[t][..self.k()];
        match s.iter().position(|&v| v == INF) {
            Some(slot) => {
                let facet: Vec<usize> = s.iter().enumerate().filter(|&(j, _)| j != slot).map(|(_, &v)| v).collect();
                let side = self.orient_sign(&facet, Some(p), [0.0; 3]);
                let inner = self.orient_sign(&facet, None, self.interior);
                side != 0.0 && side == -inner
            }
            None => self.inside_sign(t, p) > 0.0,
        }
    }

    fn insert(&mut self, p: usize) {
        let start = (0..self.simplices.len())
            .rev()
            .find(|&t| self.alive[t] && self.conflicts(t, p))
            .expect("some simplex conflicts with every new point");
        self.round += 1;
        let round = self.round;
        let mut cavity = vec![start];
        self.in_cavity[start] = round;
        self.stamp[start] = round;
        let mut head = 0;
        while head < cavity.len() {
            let t = cavity[head];
            head += 1;
            for slot in 0..self.k() {
                let nb = self.neighbors[t][slot];
                if self.stamp[nb] == round {
                    continue;
                }
                self.stamp[nb] = round;
                if self.conflicts(nb, p) {
                    self.in_cavity[nb] = round;
                    cavity.push(nb);
                }
            }
        }

        let mut created = Vec::new();
        for &t in &cavity {
            for slot in 0..self.k() {
                let nb = self.neighbors[t][slot];
                if self.in_cavity[nb] == round {
                    continue;
                }
                let mut s = self.simplices[t];
                s[slot] = p;
                let fresh = self.push(s);
                self.neighbors[fresh][slot] = nb;
                let back = self.neighbors[nb].iter().position(|&x| x == t).expect("neighbor links are symmetric");
                self.neighbors[nb][back] = fresh;
                created.push(fresh);
            }
        }
        for &t in &cavity {
            self.alive[t] = false;
        }
        self.link(&created);
    }

    fn finish(self) -> (Edges, Vec<Vec<usize>>) {
        let k = self.k();
        let mut edges = Vec::new();
        let mut simplices = Vec::new();
        for (t, s) in self.simplices.iter().enumerate() {
            if !self.alive[t] || s[..k].contains(&INF) {
                continue;
            }
            let mut s = s[..k].to_vec();
            s.sort_unstable();
            for a in 0..k {
                for b in a + 1..k {
                    edges.push((s[a], s[b]));
                }
            }
            simplices.push(s);
        }
        edges.sort_unstable();
        edges.dedup();
        simplices.sort_unstable();
        (edges, simplices)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::connected_components;

    fn cloud(points: Vec<[f64; 3]>) -> PointCloud {
        PointCloud::new(points, None).unwrap()
    }

    #[test]
    fn det4_matches_dense() {
        let m = [[2.0, -1.0, 0.5, 3.0], [1.0, 4.0, -2.0, 0.0], [0.0, 1.5, 1.0, -1.0], [3.0, 0.0, 2.0, 1.0]];
        let dense = nalgebra::Matrix4::from_fn(|i, j| m[i][j]).determinant();
        assert!((det4(m) - dense).abs() < 1e-9);
    }

    #[test]
    fn regular_tetrahedron_is_k4() {
        let t = delaunay_graph(&cloud(vec![[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]));
        assert_eq!(t.kind, TriangulationKind::Tetrahedral);
        assert_eq!(t.graph.num_edges(), 6);
        assert_eq!(t.simplices, vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn centroid_joins_every_corner() {
        let t = delaunay_graph(&cloud(vec![
            [1.0, 1.0, 1.0],
            [1.0, -1.0, -1.0],
            [-1.0, 1.0, -1.0],
            [-1.0, -1.0, 1.0],
            [0.0, 0.0, 0.0],
        ]));
        assert_eq!(t.simplices.len(), 4);
        assert!((0..4).all(|c| t.graph.has_edge(c, 4)));
        assert_eq!(t.graph.num_edges(), 10);
    }

    #[test]
    fn small_and_flat_inputs() {
        let t = delaunay_graph(&cloud(vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]));
        assert_eq!(t.kind, TriangulationKind::Complete);
        assert_eq!(t.graph.num_edges(), 3);

        let square = delaunay_graph(&cloud(vec![[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [2.1, 1.2, 0.0]]));
        assert_eq!(square.kind, TriangulationKind::Planar);
        assert_eq!(square.graph.num_edges(), 5);

        let line = delaunay_graph(&cloud((0..6).map(|i| [i as f64 * 0.5, i as f64, 3.0]).rev().collect()));
        assert_eq!(line.kind, TriangulationKind::Collinear);
        assert_eq!(line.graph.num_edges(), 5);
        assert!((0..5).all(|i| line.graph.has_edge(i, i + 1)));
    }

    #[test]
    fn duplicates_copy_their_neighbors() {
        let mut pts = vec![[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0], [0.1, 0.0, -0.1]];
        pts.push(pts[4]);
        let t = delaunay_graph(&cloud(pts));
        assert!(t.graph.has_edge(4, 5));
        assert!((0..4).all(|c| t.graph.has_edge(c, 5)));
        assert_eq!(connected_components(&t.graph).len(), 1);
    }
}
