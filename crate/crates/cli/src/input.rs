use std::path::Path;

use gridlay::pointcloud::{delaunay_graph, knn_graph, load_xyz};
use gridlay::Graph;

use crate::args::CloudGraph;
use crate::error::CliError;

const CLOUD_EXTENSIONS: [&str; 3] = ["xyz", "pts", "bin"];

pub fn is_point_cloud(path: &Path) -> bool {
    path.extension().and_then(|e| e.to_str()).is_some_and(|e| CLOUD_EXTENSIONS.contains(&e))
}

/// Reads a graph: JSON by extension, a point cloud turned into a graph, or
/// otherwise a whitespace edge list.
pub fn load_graph(path: &Path, cloud_graph: CloudGraph, k: usize) -> Result<Graph, CliError> {
    if !path.is_file() {
        return Err(CliError::Input(format!("input file {} does not exist", path.display())));
    }
    if is_point_cloud(path) {
        let pc = load_xyz(path)?;
        return graph_from_cloud(&pc, cloud_graph, k);
    }
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    let g = if path.extension().is_some_and(|e| e == "json") {
        Graph::from_json(&text)?
    } else {
        Graph::from_edge_list(&text)?
    };
    Ok(g)
}

pub fn graph_from_cloud(pc: &gridlay::PointCloud, cloud_graph: CloudGraph, k: usize) -> Result<Graph, CliError> {
    match cloud_graph {
        CloudGraph::Delaunay => {
            let tri = delaunay_graph(pc);
            if tri.is_fallback() {
                eprintln!("note: degenerate cloud, triangulation fell back to {:?}", tri.kind);
            }
            Ok(tri.graph)
        }
        CloudGraph::Knn => Ok(knn_graph(pc, k)?),
    }
}
