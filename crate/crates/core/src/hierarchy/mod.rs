//! Hierarchical layout: balanced normalized-cut partitioning, the graph of
//! parts, and composition of per-part layouts into one global grid.

mod compose;
mod eigen;
mod ncut;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::layout::{LayoutConfig, SolverError};

pub use compose::{connectivity_graph, fit_into_grid, hgpgl, HierarchicalLayout, PartitionTree, TreeNode};
pub use ncut::{ncut_value, normalized_cut};

#[derive(Debug, Error)]
pub enum HierarchyError {
    #[error("cannot split {n} vertices into {parts} non-empty parts")]
    PartCount { parts: usize, n: usize },
    #[error("fanout {fanout} exceeds parent grid capacity {capacity}")]
    Capacity { fanout: usize, capacity: usize },
    #[error("invalid hierarchy configuration: {0}")]
    Config(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("{} needs a {width}x{height} grid but only {limit_w}x{limit_h} is available", describe_path(path))]
    Overflow { path: Vec<usize>, width: i64, height: i64, limit_w: usize, limit_h: usize },
    #[error("placement {placement:?} at level {level} lies outside the {bound:?} grid")]
    OutOfBounds { level: usize, placement: [i64; 2], bound: [usize; 2] },
    #[error("cannot lay out an empty graph")]
    EmptyGraph,
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// `path` lists part indices from the root down.
fn describe_path(path: &[usize]) -> String {
    if path.is_empty() {
        "the graph".into()
    } else {
        format!("part {}", path.iter().map(usize::to_string).collect::<Vec<_>>().join("/"))
    }
}

/// Grid dimensions in cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSize {
    pub width: usize,
    pub height: usize,
}

impl GridSize {
    pub const fn square(side: usize) -> Self {
        Self { width: side, height: side }
    }

    pub fn capacity(self) -> usize {
        self.width * self.height
    }

    pub(crate) fn contains(self, cell: [i64; 2]) -> bool {
        cell[0] >= 0 && cell[1] >= 0 && (cell[0] as usize) < self.width && (cell[1] as usize) < self.height
    }
}

/// Disjoint non-empty vertex sets covering the graph, ordered by smallest
/// member.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    parts: Vec<Vec<usize>>,
    part_of: Vec<usize>,
    /// Some bisection used the BFS fallback instead of an eigenvector.
    fallback: bool,
}

impl Partition {
    /// Validates and canonicalizes `parts` over `0..n`.
    pub fn from_parts(n: usize, mut parts: Vec<Vec<usize>>) -> Result<Self, HierarchyError> {
        let mut part_of = vec![usize::MAX; n];
        for part in &mut parts {
            if part.is_empty() {
                return Err(HierarchyError::InvalidPartition("empty part".into()));
            }
            part.sort_unstable();
        }
        parts.sort_unstable_by_key(|p| p[0]);
        for (k, part) in parts.iter().enumerate() {
            for &v in part {
                if v >= n {
                    return Err(HierarchyError::InvalidPartition(format!("vertex {v} outside 0..{n}")));
                }
                if part_of[v] != usize::MAX {
                    return Err(HierarchyError::InvalidPartition(format!("vertex {v} in two parts")));
                }
                part_of[v] = k;
            }
        }
        if let Some(v) = part_of.iter().position(|&p| p == usize::MAX) {
            return Err(HierarchyError::InvalidPartition(format!("vertex {v} in no part")));
        }
        Ok(Self { parts, part_of, fallback: false })
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }

    pub fn part_of(&self, v: usize) -> usize {
        self.part_of[v]
    }

    pub fn num_parts(&self) -> usize {
        self.parts.len()
    }

    pub fn used_fallback(&self) -> bool {
        self.fallback
    }

    pub fn max_part_size(&self) -> usize {
        self.parts.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Settings for [`hgpgl`]: `fanout` parts per internal node, the grid each
/// part is placed on (`parent_grid`) and the grid each leaf is laid out on
/// (`child_grid`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HierarchyConfig {
    pub fanout: usize,
    pub parent_grid: GridSize,
    pub child_grid: GridSize,
    pub layout: LayoutConfig,
}

impl Default for HierarchyConfig {
    fn default() -> Self {
        Self {
            fanout: 32,
            parent_grid: GridSize::square(16),
            child_grid: GridSize::square(16),
            layout: LayoutConfig::default(),
        }
    }
}

impl HierarchyConfig {
    pub fn validate(&self) -> Result<(), HierarchyError> {
        if self.fanout < 2 {
            return Err(HierarchyError::Config(format!("fanout must be at least 2, got {}", self.fanout)));
        }
        if self.child_grid.capacity() == 0 || self.parent_grid.capacity() == 0 {
            return Err(HierarchyError::Config("grid dimensions must be positive".into()));
        }
        if self.fanout > self.parent_grid.capacity() {
            return Err(HierarchyError::Capacity { fanout: self.fanout, capacity: self.parent_grid.capacity() });
        }
        self.layout.validate()?;
        Ok(())
    }

    /// Number of levels for `n` vertices: `round(log_fanout n)`, at least 1.
    pub fn depth_for(&self, n: usize) -> usize {
        if n <= 1 {
            return 1;
        }
        ((n as f64).ln() / (self.fanout as f64).ln()).round().max(1.0) as usize
    }

    /// Global grid for `depth` levels: `child_grid * parent_grid^(depth - 1)`.
    pub fn global_size(&self, depth: usize) -> GridSize {
        let exp = depth.saturating_sub(1) as u32;
        GridSize {
            width: self.child_grid.width * self.parent_grid.width.pow(exp),
            height: self.child_grid.height * self.parent_grid.height.pow(exp),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_validation() {
        assert!(Partition::from_parts(4, vec![vec![0, 1], vec![2, 3]]).is_ok());
        assert!(Partition::from_parts(4, vec![vec![0, 1], vec![1, 2, 3]]).is_err());
        assert!(Partition::from_parts(4, vec![vec![0, 1], vec![2]]).is_err());
        assert!(Partition::from_parts(4, vec![vec![0, 1, 2, 3], vec![]]).is_err());
        let p = Partition::from_parts(4, vec![vec![3, 2], vec![1, 0]]).unwrap();
        assert_eq!(p.parts(), &[vec![0, 1], vec![2, 3]]);
        assert_eq!(p.part_of(3), 1);
    }

    #[test]
    fn depth_follows_rounded_log() {
        let cfg = HierarchyConfig::default();
        assert_eq!(cfg.depth_for(40), 1);
        assert_eq!(cfg.depth_for(181), 1);
        assert_eq!(cfg.depth_for(182), 2);
        assert_eq!(cfg.depth_for(2048), 2);
        assert_eq!(cfg.depth_for(1), 1);
        assert_eq!(cfg.global_size(2), GridSize::square(256));
        assert_eq!(cfg.global_size(1), GridSize::square(16));
    }

    #[test]
    fn capacity_is_checked() {
        let cfg = HierarchyConfig { fanout: 300, ..Default::default() };
        assert!(matches!(cfg.validate(), Err(HierarchyError::Capacity { fanout: 300, capacity: 256 })));
    }
}
