//! Reader for the TU-Dortmund graph benchmark flat-file format.
//!
//! A dataset `NAME` is a directory holding `NAME_A.txt` (one `u, v` row per
//! directed adjacency entry, 1-indexed global vertex ids) and
//! `NAME_graph_indicator.txt` (row `i` holds the 1-indexed graph id of vertex
//! `i`). `NAME_graph_labels.txt` and `NAME_node_labels.txt` are read when
//! present.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use super::{Graph, GraphError};

fn read_required(path: PathBuf) -> Result<(PathBuf, String), GraphError> {
    if !path.exists() {
        return Err(GraphError::MissingFile(path));
    }
    let text = fs::read_to_string(&path).map_err(|source| GraphError::Io { path: path.clone(), source })?;
    Ok((path, text))
}

fn read_optional(path: PathBuf) -> Result<Option<(PathBuf, String)>, GraphError> {
    if path.exists() {
        read_required(path).map(Some)
    } else {
        Ok(None)
    }
}

fn parse_column(path: &Path, text: &str) -> Result<Vec<i64>, GraphError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim().parse::<i64>().map_err(|_| GraphError::Format {
                file: path.to_path_buf(),
                line: i + 1,
                msg: format!("expected an integer, got {:?}", l.trim()),
            })
        })
        .collect()
}

/// Loads every graph of a TU-Dortmund dataset.
///
/// Node labels, when present, become one-hot features over the distinct labels
/// observed in the whole dataset (sorted ascending). Adjacency rows are
/// deduplicated to unordered edges; self-loops are dropped.
pub fn load_tu_dataset(dir: impl AsRef<Path>, name: &str) -> Result<Vec<Graph>, GraphError> {
    let dir = dir.as_ref();
    let file = |suffix: &str| dir.join(format!("{name}_{suffix}.txt"));
    let (a_path, a_text) = read_required(file("A"))?;
    let (gi_path, gi_text) = read_required(file("graph_indicator"))?;
    let graph_labels = read_optional(file("graph_labels"))?;
    let node_labels = read_optional(file("node_labels"))?;

    let indicator = parse_column(&gi_path, &gi_text)?;
    let num_nodes = indicator.len();
    let num_graphs = indicator.iter().copied().max().unwrap_or(0);
    if let Some((line, _)) = indicator.iter().enumerate().find(|(_, &g)| g < 1) {
        return Err(GraphError::Format { file: gi_path, line: line + 1, msg: "graph ids start at 1".into() });
    }
    let num_graphs = num_graphs as usize;

    // Global vertex -> (graph, local index).
    let mut counts = vec![0usize; num_graphs];
    let mut local = Vec::with_capacity(num_nodes);
    for &g in &indicator {
        let g = g as usize - 1;
        local.push((g, counts[g]));
        counts[g] += 1;
    }

    let mut edges: Vec<BTreeSet<(usize, usize)>> = vec![BTreeSet::new(); num_graphs];
    for (lineno, line) in a_text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| GraphError::Format { file: a_path.clone(), line: lineno + 1, msg };
        let mut parts = line.split(',').map(str::trim);
        let mut id = || -> Result<usize, GraphError> {
            let raw = parts.next().ok_or_else(|| err(format!("expected `u, v`, got {line:?}")))?;
            let v: usize = raw.parse().map_err(|_| err(format!("bad vertex id {raw:?}")))?;
            if v == 0 || v > num_nodes {
                return Err(err(format!("vertex id {v} outside 1..={num_nodes}")));
            }
            Ok(v - 1)
        };
        let (u, v) = (id()?, id()?);
        let ((gu, lu), (gv, lv)) = (local[u], local[v]);
        if gu != gv {
            return Err(err(format!("edge joins graphs {} and {}", gu + 1, gv + 1)));
        }
        if lu != lv {
            edges[gu].insert((lu.min(lv), lu.max(lv)));
        }
    }

    let labels_per_graph = match &graph_labels {
        Some((path, text)) => {
            let labels = parse_column(path, text)?;
            if labels.len() != num_graphs {
                return Err(GraphError::Format {
                    file: path.clone(),
                    line: labels.len(),
                    msg: format!("expected {num_graphs} graph labels, found {}", labels.len()),
                });
            }
            labels.into_iter().map(Some).collect()
        }
        None => vec![None; num_graphs],
    };

    let node_labels = match &node_labels {
        Some((path, text)) => {
            let labels = parse_column(path, text)?;
            if labels.len() != num_nodes {
                return Err(GraphError::Format {
                    file: path.clone(),
                    line: labels.len(),
                    msg: format!("expected {num_nodes} node labels, found {}", labels.len()),
                });
            }
            Some(labels)
        }
        None => None,
    };
    let one_hot: Option<BTreeMap<i64, usize>> = node_labels.as_ref().map(|labels| {
        let distinct: BTreeSet<i64> = labels.iter().copied().collect();
        distinct.into_iter().enumerate().map(|(k, l)| (l, k)).collect()
    });

    let mut per_graph_labels: Vec<Vec<i64>> = vec![Vec::new(); num_graphs];
    if let Some(labels) = &node_labels {
        for (v, &l) in labels.iter().enumerate() {
            per_graph_labels[local[v].0].push(l);
        }
    }

    let mut graphs = Vec::with_capacity(num_graphs);
    for (gid, edge_set) in edges.into_iter().enumerate() {
        let mut g = Graph::new(counts[gid], edge_set)?.with_graph_label(labels_per_graph[gid]);
        if let Some(index) = &one_hot {
            let labels = std::mem::take(&mut per_graph_labels[gid]);
            let features = labels
                .iter()
                .map(|l| {
                    let mut row = vec![0.0; index.len()];
                    row[index[l]] = 1.0;
                    row
                })
                .collect();
            g = g.with_features(features)?.with_labels(labels)?;
        }
        graphs.push(g);
    }
    Ok(graphs)
}

/// Summary statistics of a graph corpus. Degrees are vertex degrees
/// (`2|E| / |V|` on average).
#[derive(Clone, Debug, PartialEq)]
pub struct CorpusStats {
    pub graphs: usize,
    pub avg_nodes: f64,
    pub avg_edges: f64,
    pub avg_degree: f64,
    pub max_degree: usize,
    pub feature_dim: Option<usize>,
}

pub fn corpus_stats(graphs: &[Graph]) -> CorpusStats {
    let count = graphs.len().max(1) as f64;
    let avg_nodes = graphs.iter().map(|g| g.num_vertices() as f64).sum::<f64>() / count;
    let avg_edges = graphs.iter().map(|g| g.num_edges() as f64).sum::<f64>() / count;
    let avg_degree = graphs
        .iter()
        .map(|g| if g.num_vertices() == 0 { 0.0 } else { 2.0 * g.num_edges() as f64 / g.num_vertices() as f64 })
        .sum::<f64>()
        / count;
    let max_degree = graphs.iter().flat_map(|g| (0..g.num_vertices()).map(|v| g.degree(v))).max().unwrap_or(0);
    CorpusStats {
        graphs: graphs.len(),
        avg_nodes,
        avg_edges,
        avg_degree,
        max_degree,
        feature_dim: graphs.first().and_then(Graph::feature_dim),
    }
}
