//! Dense `H x W x F` feature tensors from grid layouts.

mod npy;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;
use crate::layout::{gpgl, GridLayout, LayoutConfig, SolverError};

pub use npy::{file_stem, read_grid, read_npy, write_grid, write_npy, NpyArray, Sidecar};

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("graph has no vertex features")]
    MissingFeatures,
    #[error("layout has {layout} vertices but the graph has {graph}")]
    VertexMismatch { graph: usize, layout: usize },
    #[error("layout needs a {needed_h}x{needed_w} window but the window is {window_h}x{window_w}")]
    Overflow { needed_h: usize, needed_w: usize, window_h: usize, window_w: usize },
    #[error("invalid export configuration: {0}")]
    Config(String),
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed npy data: {0}")]
    Npy(String),
    #[error("malformed sidecar: {0}")]
    Sidecar(#[from] serde_json::Error),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pooling {
    #[default]
    Average,
    Max,
}

/// What to do when a layout does not fit the window.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Overflow {
    #[default]
    Error,
    /// Enlarge the window to the layout's bounding box.
    Grow,
}

macro_rules! lowercase_enum {
    ($ty:ty, $($variant:ident => $name:literal),+) => {
        impl std::str::FromStr for $ty {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($name => Ok(Self::$variant),)+
                    other => Err(format!("unknown value {other:?}")),
                }
            }
        }
        impl std::fmt::Display for $ty {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str(match self { $(Self::$variant => $name,)+ })
            }
        }
    };
}
lowercase_enum!(Pooling, Average => "average", Max => "max");
lowercase_enum!(Overflow, Error => "error", Grow => "grow");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportConfig {
    /// `[height, width]`.
    pub window: [usize; 2],
    pub pooling: Pooling,
    pub overflow: Overflow,
}

impl Default for ExportConfig {
    fn default() -> Self {
        Self { window: [32, 32], pooling: Pooling::Average, overflow: Overflow::Error }
    }
}

impl ExportConfig {
    pub fn validate(&self) -> Result<(), ExportError> {
        if self.window.contains(&0) {
            return Err(ExportError::Config(format!("window {:?} must be at least 1x1", self.window)));
        }
        Ok(())
    }
}

/// Row-major `H x W x F` tensor with occupancy.
///
/// Cell `(row, col)` holds the pooled features of the vertices assigned to
/// it; unoccupied cells are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureGrid {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub data: Vec<f32>,
    /// `H x W`, row-major.
    pub mask: Vec<bool>,
    /// `[row, col]` of every vertex.
    pub assignment: Vec<[usize; 2]>,
    /// Cells holding more than one vertex, row-major order.
    pub pooled_cells: Vec<[usize; 2]>,
    pub graph_label: Option<i64>,
    /// The window was enlarged to fit the layout.
    pub grown: bool,
}

impl FeatureGrid {
    pub fn cell(&self, row: usize, col: usize) -> &[f32] {
        let start = (row * self.width + col) * self.channels;
        &self.data[start..start + self.channels]
    }

    pub fn occupied(&self, row: usize, col: usize) -> bool {
        self.mask[row * self.width + col]
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.height, self.width, self.channels]
    }
}

/// Places every vertex's features at its layout cell, after moving the
/// bounding box to the top-left corner. Layout `x` is the column and `y` the
/// row.
pub fn to_feature_grid(g: &Graph, layout: &GridLayout, cfg: &ExportConfig) -> Result<FeatureGrid, ExportError> {
    cfg.validate()?;
    let features = g.features().ok_or(ExportError::MissingFeatures)?;
    let n = g.num_vertices();
    if layout.num_vertices() != n {
        return Err(ExportError::VertexMismatch { graph: n, layout: layout.num_vertices() });
    }
    let channels = g.feature_dim().unwrap_or(0);
    let aligned = layout.aligned();
    let (need_h, need_w) = (aligned.height() as usize, aligned.width() as usize);
    let [mut height, mut width] = cfg.window;
    let grown = need_h > height || need_w > width;
    if grown {
        match cfg.overflow {
            Overflow::Error => {
                return Err(ExportError::Overflow { needed_h: need_h, needed_w: need_w, window_h: height, window_w: width })
            }
            Overflow::Grow => {
                height = height.max(need_h);
                width = width.max(need_w);
            }
        }
    }

    let assignment: Vec<[usize; 2]> = aligned.cells().iter().map(|c| [c[1] as usize, c[0] as usize]).collect();
    let mut sums = vec![0.0f64; height * width * channels];
    let mut counts = vec![0usize; height * width];
    for (v, &[row, col]) in assignment.iter().enumerate() {
        let cell = row * width + col;
        let slot = &mut sums[cell * channels..(cell + 1) * channels];
        for (s, &f) in slot.iter_mut().zip(&features[v]) {
            *s = match (cfg.pooling, counts[cell]) {
                (_, 0) => f,
                (Pooling::Average, _) => *s + f,
                (Pooling::Max, _) => s.max(f),
            };
        }
        counts[cell] += 1;
    }
    let data = sums
        .iter()
        .enumerate()
        .map(|(i, &s)| match (cfg.pooling, counts[i / channels.max(1)]) {
            (_, 0) => 0.0,
            (Pooling::Average, c) => (s / c as f64) as f32,
            (Pooling::Max, _) => s as f32,
        })
        .collect();
    let pooled_cells = (0..height * width).filter(|&i| counts[i] > 1).map(|i| [i / width, i % width]).collect();
    Ok(FeatureGrid {
        height,
        width,
        channels,
        data,
        mask: counts.iter().map(|&c| c > 0).collect(),
        assignment,
        pooled_cells,
        graph_label: g.graph_label(),
        grown,
    })
}

/// `k` layouts of `g` with seeds `cfg.seed .. cfg.seed + k`, each exported.
/// Only the initialization changes between copies.
pub fn augment(
    g: &Graph,
    k: usize,
    cfg: &LayoutConfig,
    export_cfg: &ExportConfig,
) -> Result<Vec<FeatureGrid>, ExportError> {
    if k == 0 {
        return Err(ExportError::Config("augmentation needs at least one copy".into()));
    }
    (0..k as u64)
        .map(|offset| {
            let run = gpgl(g, &LayoutConfig { seed: cfg.seed.wrapping_add(offset), ..cfg.clone() })?;
            to_feature_grid(g, &run.grid, export_cfg)
        })
        .collect()
}
