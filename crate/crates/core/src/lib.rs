//! Topology-preserving integer grid layouts.
//!
//! `gridlay` places the vertices of an undirected graph on distinct cells of a
//! 2D integer grid so that grid distances track graph distances. The layout is
//! obtained by relaxing the integer problem to a penalized Kamada-Kawai energy,
//! minimizing it with a limited-memory quasi-Newton method and rounding the
//! result. Large graphs are handled hierarchically: a balanced spectral
//! partition is laid out on a coarse grid and every part is laid out on its own
//! block of a finer grid.
//!
//! The crate also turns grid layouts into dense `H x W x F` feature tensors
//! (written as NPY files) and builds graphs from 3D point clouds.

pub mod export;
pub mod graph;
pub mod hierarchy;
pub mod layout;
pub mod pointcloud;
pub mod render;
mod rng;

pub use export::{augment, to_feature_grid, ExportConfig, ExportError, FeatureGrid, Overflow, Pooling};
pub use graph::{
    connected_components, load_tu_dataset, shortest_path_distances, DistanceMatrix, Graph, GraphError,
};
pub use hierarchy::{
    connectivity_graph, fit_into_grid, hgpgl, ncut_value, normalized_cut, GridSize, HierarchicalLayout,
    HierarchyConfig, HierarchyError, Partition, PartitionTree, TreeNode,
};
pub use layout::{
    gpgl, init_layout, kk_energy, separation_penalty, vertex_loss_ratio, ContinuousLayout, GpglRun, GridLayout,
    InitStrategy, LayoutConfig, SolverError,
};
pub use pointcloud::{
    delaunay_graph, knn_graph, load_xyz, PointCloud, PointCloudError, Triangulation, TriangulationKind,
};
pub use render::{feature_classes, render, Image, RenderOptions};
