//! 3D point clouds and the graphs built from them.

mod delaunay;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::graph::Graph;

pub use delaunay::{delaunay_graph, Triangulation, TriangulationKind};

#[derive(Debug, Error)]
pub enum PointCloudError {
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("binary point cloud: {0}")]
    Binary(String),
    #[error("point cloud has no points")]
    Empty,
    #[error("point {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("expected {expected} labels, found {found}")]
    BadLabels { expected: usize, found: usize },
    #[error("k = {k} is outside 1..{n}")]
    InvalidK { k: usize, n: usize },
}

/// Points with optional per-point integer labels.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    points: Vec<[f64; 3]>,
    labels: Option<Vec<i64>>,
}

impl PointCloud {
    pub fn new(points: Vec<[f64; 3]>, labels: Option<Vec<i64>>) -> Result<Self, PointCloudError> {
        if points.is_empty() {
            return Err(PointCloudError::Empty);
        }
        if let Some(i) = points.iter().position(|p| p.iter().any(|v| !v.is_finite())) {
            return Err(PointCloudError::NonFinite(i));
        }
        if let Some(l) = &labels {
            if l.len() != points.len() {
                return Err(PointCloudError::BadLabels { expected: points.len(), found: l.len() });
            }
        }
        Ok(Self { points, labels })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    /// Copy centered on its bounding-box center and scaled to unit
    /// bounding-box diagonal. A cloud of identical points is only centered.
    pub fn normalized(&self) -> PointCloud {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in &self.points {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let center = [0, 1, 2].map(|k| 0.5 * (lo[k] + hi[k]));
        let diag = (0..3).map(|k| (hi[k] - lo[k]).powi(2)).sum::<f64>().sqrt();
        let scale = if diag > 0.0 { 1.0 / diag } else { 1.0 };
        let points = self.points.iter().map(|p| [0, 1, 2].map(|k| (p[k] - center[k]) * scale)).collect();
        PointCloud { points, labels: self.labels.clone() }
    }

    /// Whitespace-separated `x y z [label]` lines; blank lines and `#`
    /// comments are skipped. Either every line has a label or none does.
    pub fn parse_xyz(text: &str) -> Result<Self, PointCloudError> {
        let mut points = Vec::new();
        let mut labels = Vec::new();
        let mut columns = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            if fields.len() != 3 && fields.len() != 4 {
                return Err(PointCloudError::Parse { line, msg: format!("expected 3 or 4 columns, found {}", fields.len()) });
            }
            if *columns.get_or_insert(fields.len()) != fields.len() {
                return Err(PointCloudError::Parse { line, msg: "inconsistent column count".into() });
            }
            let mut p = [0.0f64; 3];
            for (k, f) in fields[..3].iter().enumerate() {
                p[k] = f.parse().map_err(|_| PointCloudError::Parse { line, msg: format!("bad coordinate {f:?}") })?;
                if !p[k].is_finite() {
                    return Err(PointCloudError::Parse { line, msg: format!("non-finite coordinate {f:?}") });
                }
            }
            points.push(p);
            if let Some(f) = fields.get(3) {
                labels.push(f.parse().map_err(|_| PointCloudError::Parse { line, msg: format!("bad label {f:?}") })?);
            }
        }
        let labels = (columns == Some(4)).then_some(labels);
        Self::new(points, labels)
    }

    pub fn to_xyz(&self) -> String {
        let mut out = String::new();
        for (i, p) in self.points.iter().enumerate() {
            out.push_str(&format!("{} {} {}", p[0], p[1], p[2]));
            if let Some(l) = &self.labels {
                out.push_str(&format!(" {}", l[i]));
            }
            out.push('\n');
        }
        out
    }

    /// Little-endian `u64` count, then `3n` `f32` coordinates, then optionally
    /// `n` `i32` labels.
    pub fn from_binary(bytes: &[u8]) -> Result<Self, PointCloudError> {
        let header: [u8; 8] = bytes
            .get(..8)
            .and_then(|h| h.try_into().ok())
            .ok_or_else(|| PointCloudError::Binary("missing 8-byte header".into()))?;
        let n = usize::try_from(u64::from_le_bytes(header))
            .map_err(|_| PointCloudError::Binary("point count does not fit in memory".into()))?;
        let body = &bytes[8..];
        let with_labels = match body.len() {
            l if Some(l) == n.checked_mul(12) => false,
            l if Some(l) == n.checked_mul(16) => true,
            l => return Err(PointCloudError::Binary(format!("{l} payload bytes do not match {n} points"))),
        };
        let f32_at = |i: usize| f32::from_le_bytes(body[4 * i..4 * i + 4].try_into().expect("4 bytes")) as f64;
        let points = (0..n).map(|i| [f32_at(3 * i), f32_at(3 * i + 1), f32_at(3 * i + 2)]).collect();
        let labels = with_labels.then(|| {
            let off = 12 * n;
            (0..n)
                .map(|i| i32::from_le_bytes(body[off + 4 * i..off + 4 * i + 4].try_into().expect("4 bytes")) as i64)
                .collect()
        });
        Self::new(points, labels)
    }

    /// Labels outside the `i32` range are truncated.
    pub fn to_binary(&self) -> Vec<u8> {
        let n = self.points.len();
        let mut out = Vec::with_capacity(8 + 16 * n);
        out.extend_from_slice(&(n as u64).to_le_bytes());
        for p in &self.points {
            for v in p {
                out.extend_from_slice(&(*v as f32).to_le_bytes());
            }
        }
        if let Some(l) = &self.labels {
            for &v in l {
                out.extend_from_slice(&(v as i32).to_le_bytes());
            }
        }
        out
    }
}

/// Reads a point cloud: `.bin` files use the binary layout, everything else
/// is parsed as xyz text.
pub fn load_xyz(path: impl AsRef<Path>) -> Result<PointCloud, PointCloudError> {
    let path = path.as_ref();
    let io = |source| PointCloudError::Io { path: path.to_path_buf(), source };
    if path.extension().is_some_and(|e| e == "bin") {
        PointCloud::from_binary(&std::fs::read(path).map_err(io)?)
    } else {
        PointCloud::parse_xyz(&std::fs::read_to_string(path).map_err(io)?)
    }
}

fn dist2(a: [f64; 3], b: [f64; 3]) -> f64 {
    (0..3).map(|k| (a[k] - b[k]).powi(2)).sum()
}

/// Symmetrized k-nearest-neighbor graph on the normalized cloud: `(i, j)` is
/// an edge when either point is among the other's `k` nearest. Distance ties
/// go to the lower index. Normalized coordinates become vertex features.
pub fn knn_graph(pc: &PointCloud, k: usize) -> Result<Graph, PointCloudError> {
    let n = pc.len();
    if k == 0 || k >= n {
        return Err(PointCloudError::InvalidK { k, n });
    }
    let norm = pc.normalized();
    let pts = norm.points();
    let mut edges = Vec::with_capacity(n * k);
    let mut cand: Vec<(f64, usize)> = Vec::with_capacity(n);
    for i in 0..n {
        cand.clear();
        cand.extend((0..n).filter(|&j| j != i).map(|j| (dist2(pts[i], pts[j]), j)));
        let by_key = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        cand.select_nth_unstable_by(k - 1, by_key);
        edges.extend(cand[..k].iter().map(|&(_, j)| (i.min(j), i.max(j))));
    }
    let features = pts.iter().map(|p| p.to_vec()).collect();
    Ok(Graph::new(n, edges).expect("knn edges are valid").with_features(features).expect("one row per point"))
}
