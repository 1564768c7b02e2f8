//! Undirected graphs with optional per-vertex features, hop distances and
//! dataset ingestion.

mod distance;
mod tu;

use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use distance::{connected_components, shortest_path_distances, DistanceMatrix};
pub use tu::{corpus_stats, load_tu_dataset, CorpusStats};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("edge ({0}, {1}) is a self-loop")]
    SelfLoop(usize, usize),
    #[error("edge ({u}, {v}) references a vertex outside 0..{n}")]
    VertexOutOfRange { u: usize, v: usize, n: usize },
    #[error("feature rows: expected {expected} rows of equal non-zero length, found {found}")]
    BadFeatures { expected: usize, found: String },
    #[error("expected {expected} vertex labels, found {found}")]
    BadLabels { expected: usize, found: usize },
    #[error("missing dataset file {}", .0.display())]
    MissingFile(PathBuf),
    #[error("{}:{line}: {msg}", file.display())]
    Format { file: PathBuf, line: usize, msg: String },
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid graph json: {0}")]
    Json(#[from] serde_json::Error),
}

/// An undirected simple graph.
///
/// Edges are stored once as `(u, v)` with `u < v`, sorted. Features, when
/// present, are one row per vertex of a common dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    num_vertices: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    features: Option<Vec<Vec<f64>>>,
    labels: Option<Vec<i64>>,
    graph_label: Option<i64>,
}

impl Graph {
    /// Builds a graph from an edge list. Edges are normalized to `u < v` and
    /// deduplicated; self-loops and dangling endpoints are rejected.
    pub fn new(num_vertices: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, GraphError> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(GraphError::SelfLoop(u, v));
            }
            if u >= num_vertices || v >= num_vertices {
                return Err(GraphError::VertexOutOfRange { u, v, n: num_vertices });
            }
            set.insert((u.min(v), u.max(v)));
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); num_vertices];
        for &(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self { num_vertices, edges, adjacency, features: None, labels: None, graph_label: None })
    }

    pub fn empty(num_vertices: usize) -> Self {
        Self::new(num_vertices, std::iter::empty()).expect("edgeless graph is valid")
    }

    pub fn complete(num_vertices: usize) -> Self {
        let edges = (0..num_vertices).flat_map(|i| (i + 1..num_vertices).map(move |j| (i, j)));
        Self::new(num_vertices, edges).expect("complete graph is valid")
    }

    pub fn path(num_vertices: usize) -> Self {
        Self::new(num_vertices, (1..num_vertices).map(|i| (i - 1, i))).expect("path graph is valid")
    }

    pub fn with_features(mut self, features: Vec<Vec<f64>>) -> Result<Self, GraphError> {
        let dim = features.first().map_or(0, Vec::len);
        if features.len() != self.num_vertices || dim == 0 || features.iter().any(|f| f.len() != dim) {
            let lens: Vec<_> = features.iter().map(Vec::len).collect();
            return Err(GraphError::BadFeatures {
                expected: self.num_vertices,
                found: format!("{} rows with lengths {:?}", features.len(), lens),
            });
        }
        self.features = Some(features);
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Vec<i64>) -> Result<Self, GraphError> {
        if labels.len() != self.num_vertices {
            return Err(GraphError::BadLabels { expected: self.num_vertices, found: labels.len() });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_graph_label(mut self, label: Option<i64>) -> Self {
        self.graph_label = label;
        self
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency.get(u).is_some_and(|n| n.binary_search(&v).is_ok())
    }

    pub fn features(&self) -> Option<&[Vec<f64>]> {
        self.features.as_deref()
    }

    pub fn feature_dim(&self) -> Option<usize> {
        self.features.as_ref().and_then(|f| f.first()).map(Vec::len)
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    pub fn graph_label(&self) -> Option<i64> {
        self.graph_label
    }

    /// The subgraph induced by `vertices`, renumbered in the given order.
    /// Features and vertex labels follow their vertices.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> Graph {
        let mut local = vec![usize::MAX; self.num_vertices];
        for (k, &v) in vertices.iter().enumerate() {
            local[v] = k;
        }
        let edges = vertices.iter().enumerate().flat_map(|(k, &v)| {
            let local = &local;
            self.adjacency[v].iter().filter_map(move |&w| {
                let lw = local[w];
                (lw != usize::MAX && k < lw).then_some((k, lw))
            })
        });
        let mut sub = Graph::new(vertices.len(), edges.collect::<Vec<_>>()).expect("induced edges are valid");
        sub.features = self.features.as_ref().map(|f| vertices.iter().map(|&v| f[v].clone()).collect());
        sub.labels = self.labels.as_ref().map(|l| vertices.iter().map(|&v| l[v]).collect());
        sub.graph_label = self.graph_label;
        sub
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let raw: GraphJson = serde_json::from_str(text)?;
        let g = Graph::new(raw.n, raw.edges.into_iter().map(|[u, v]| (u, v)))?;
        let g = match raw.features {
            Some(f) => g.with_features(f)?,
            None => g,
        };
        Ok(g)
    }

    pub fn to_json(&self) -> String {
        let raw = GraphJson {
            n: self.num_vertices,
            edges: self.edges.iter().map(|&(u, v)| [u, v]).collect(),
            features: self.features.clone(),
        };
        serde_json::to_string(&raw).expect("graph json serializes")
    }

    /// Parses a whitespace separated `u v` edge list; `#` starts a comment.
    /// The vertex count is one more than the largest index seen.
    pub fn from_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut edges = Vec::new();
        let mut n = 0;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty());
            let parse = |s: Option<&str>| -> Result<usize, GraphError> {
                s.and_then(|s| s.parse().ok()).ok_or_else(|| GraphError::Format {
                    file: PathBuf::from("<edge list>"),
                    line: lineno + 1,
                    msg: format!("expected two vertex indices, got {line:?}"),
                })
            };
            let u = parse(it.next())?;
            let v = parse(it.next())?;
            n = n.max(u + 1).max(v + 1);
            edges.push((u, v));
        }
        Graph::new(n, edges)
    }
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    features: Option<Vec<Vec<f64>>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edges_are_normalized_and_deduplicated() {
        let g = Graph::new(3, [(1, 0), (0, 1), (2, 1)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(g.degree(1), 2);
        assert!(g.has_edge(2, 1));
    }

    #[test]
    fn rejects_self_loops_and_dangling_endpoints() {
        assert!(matches!(Graph::new(3, [(1, 1)]), Err(GraphError::SelfLoop(1, 1))));
        assert!(matches!(Graph::new(3, [(0, 3)]), Err(GraphError::VertexOutOfRange { .. })));
    }

    #[test]
    fn features_must_be_rectangular() {
        let g = Graph::path(2);
        assert!(g.clone().with_features(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(g.clone().with_features(vec![vec![], vec![]]).is_err());
        assert_eq!(g.with_features(vec![vec![1.0], vec![2.0]]).unwrap().feature_dim(), Some(1));
    }

    #[test]
    fn json_round_trip() {
        let g = Graph::path(3).with_features(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]]).unwrap();
        let back = Graph::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
        let plain = Graph::from_json(r#"{"n": 2, "edges": [[0, 1]]}"#).unwrap();
        assert_eq!(plain.num_edges(), 1);
        assert!(plain.features().is_none());
    }

    #[test]
    fn induced_subgraph_renumbers() {
        let g = Graph::path(5);
        let sub = g.induced_subgraph(&[4, 3, 1]);
        assert_eq!(sub.num_vertices(), 3);
        assert_eq!(sub.edges(), &[(0, 1)]);
    }

    #[test]
    fn edge_list_parsing() {
        let g = Graph::from_edge_list("# triangle\n0 1\n1 2\n2,0\n").unwrap();
        assert_eq!(g.num_vertices(), 3);
        assert_eq!(g.num_edges(), 3);
        assert!(Graph::from_edge_list("0 x\n").is_err());
    }
}
