//! Command-line surface. Every subcommand's arguments double as its manifest
//! config, so they derive both `clap` and `serde`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use gridlay::hierarchy::GridSize;
use gridlay::{HierarchyConfig, InitStrategy, LayoutConfig, Overflow, Pooling};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "gridlay", version, about = "Topology-preserving grid layouts for graphs and point clouds")]
pub struct Cli {
    /// Worker threads for corpus-level work. Outputs do not depend on it.
    #[arg(long, global = true, env = "GRIDLAY_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Lay one graph out on the integer grid.
    Layout(LayoutArgs),
    /// Hierarchical layout of a large graph.
    Hlayout(HlayoutArgs),
    /// Export seed-augmented feature tensors for a corpus.
    Augment(AugmentArgs),
    /// Corpus statistics and vertex-loss ratio per initialization, as CSV.
    Stats(StatsArgs),
    /// Draw a layout as a PNG or PPM image.
    Render(RenderArgs),
    /// Time graph construction, partitioning and layout phases.
    Bench(BenchArgs),
    /// Repeat a run from its manifest.
    #[serde(skip)]
    Rerun(RerunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Layout(_) => "layout",
            Self::Hlayout(_) => "hlayout",
            Self::Augment(_) => "augment",
            Self::Stats(_) => "stats",
            Self::Render(_) => "render",
            Self::Bench(_) => "bench",
            Self::Rerun(_) => "rerun",
        }
    }

    pub fn out_dir(&self) -> Option<&Path> {
        match self {
            Self::Layout(a) => Some(&a.out),
            Self::Hlayout(a) => Some(&a.out),
            Self::Augment(a) => Some(&a.out),
            Self::Render(a) => Some(&a.out),
            Self::Stats(a) => a.out.as_deref(),
            Self::Bench(a) => a.out.as_deref(),
            Self::Rerun(_) => None,
        }
    }

    pub fn set_out_dir(&mut self, dir: PathBuf) {
        match self {
            Self::Layout(a) => a.out = dir,
            Self::Hlayout(a) => a.out = dir,
            Self::Augment(a) => a.out = dir,
            Self::Render(a) => a.out = dir,
            Self::Stats(a) => a.out = Some(dir),
            Self::Bench(a) => a.out = Some(dir),
            Self::Rerun(_) => {}
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Self::Layout(a) => Some(a.solver.seed),
            Self::Hlayout(a) => Some(a.solver.seed),
            Self::Augment(a) => Some(a.solver.seed),
            Self::Stats(a) => Some(a.seed),
            Self::Bench(a) => Some(a.solver.seed),
            Self::Render(_) | Self::Rerun(_) => None,
        }
    }

    /// Makes every input path absolute so a manifest can be replayed from
    /// any working directory.
    pub fn absolutize(&mut self) -> std::io::Result<()> {
        let abs = |p: &mut PathBuf| -> std::io::Result<()> {
            *p = std::path::absolute(&*p)?;
            Ok(())
        };
        match self {
            Self::Layout(a) => abs(&mut a.input.input),
            Self::Hlayout(a) => abs(&mut a.input.input),
            Self::Augment(a) => abs(&mut a.input),
            Self::Stats(a) => a.datasets.iter_mut().try_for_each(abs),
            Self::Render(a) => {
                abs(&mut a.layout)?;
                a.graph.iter_mut().try_for_each(abs)?;
                a.tree.iter_mut().try_for_each(abs)
            }
            Self::Bench(a) => a.input.iter_mut().try_for_each(abs),
            Self::Rerun(a) => abs(&mut a.manifest),
        }?;
        if let Some(dir) = self.out_dir() {
            let dir = std::path::absolute(dir)?;
            self.set_out_dir(dir);
        }
        Ok(())
    }
}

/// Layout solver flags.
#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct SolverArgs {
    /// Minimum pairwise distance enforced by the separation penalty.
    #[arg(long, default_value_t = 1.25)]
    pub alpha: f64,
    /// Weight of the separation penalty.
    #[arg(long, default_value_t = 1000.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = InitStrategy::Circular)]
    pub init: InitStrategy,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 500)]
    pub max_iters_kk: usize,
    #[arg(long, default_value_t = 1000)]
    pub max_iters_gpgl: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub grad_tol: f64,
}

impl SolverArgs {
    pub fn config(&self) -> LayoutConfig {
        LayoutConfig {
            alpha: self.alpha,
            lambda: self.lambda,
            max_iters_kk: self.max_iters_kk,
            max_iters_gpgl: self.max_iters_gpgl,
            grad_tol: self.grad_tol,
            seed: self.seed,
            init: self.init,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CloudGraph {
    Delaunay,
    Knn,
}

/// A graph file: `.json`, a point cloud (`.xyz`, `.pts`, `.bin`) or an edge list.
#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct InputArgs {
    pub input: PathBuf,
    /// Graph built from a point cloud.
    #[arg(long = "graph", value_enum, default_value_t = CloudGraph::Delaunay)]
    pub cloud_graph: CloudGraph,
    /// Neighbors per point for `--graph knn`.
    #[arg(long, default_value_t = 8)]
    pub k: usize,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct LayoutArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct HierarchyArgs {
    #[arg(long, default_value_t = 32)]
    pub fanout: usize,
    /// Side of the square grid each level's parts are placed on.
    #[arg(long, default_value_t = 16)]
    pub parent_grid: usize,
    /// Side of the square grid each leaf part is laid out on.
    #[arg(long, default_value_t = 16)]
    pub child_grid: usize,
}

impl HierarchyArgs {
    pub fn config(&self, layout: LayoutConfig) -> HierarchyConfig {
        HierarchyConfig {
            fanout: self.fanout,
            parent_grid: GridSize::square(self.parent_grid),
            child_grid: GridSize::square(self.child_grid),
            layout,
        }
    }
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct HlayoutArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub hierarchy: HierarchyArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct AugmentArgs {
    /// TU dataset directory, or a single graph file with vertex features.
    pub input: PathBuf,
    /// Dataset name; defaults to the directory or file stem.
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub copies: usize,
    /// Square window side.
    #[arg(long, default_value_t = 32)]
    pub window: usize,
    #[arg(long, default_value_t = Pooling::Average)]
    pub pooling: Pooling,
    #[arg(long, default_value_t = Overflow::Error)]
    pub overflow: Overflow,
    /// Graph built from a point-cloud input.
    #[arg(long = "graph", value_enum, default_value_t = CloudGraph::Delaunay)]
    pub cloud_graph: CloudGraph,
    #[arg(long, default_value_t = 8)]
    pub k: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct StatsArgs {
    /// TU dataset directories.
    #[arg(required = true)]
    pub datasets: Vec<PathBuf>,
    /// Initializations to report vertex-loss ratios for.
    #[arg(long, value_delimiter = ',', default_value = "circular,random,spectral")]
    pub inits: Vec<InitStrategy>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Skip the layouts and report only corpus statistics.
    #[arg(long)]
    pub no_layout: bool,
    /// Also write `stats.csv` and a manifest here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageFormat {
    Png,
    Ppm,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct RenderArgs {
    /// GridLayout JSON.
    pub layout: PathBuf,
    /// Graph for edges and feature colors.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// PartitionTree JSON; colors vertices by top-level part.
    #[arg(long)]
    pub tree: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    pub cell_px: usize,
    #[arg(long)]
    pub no_edges: bool,
    #[arg(long, value_enum, default_value_t = ImageFormat::Png)]
    pub format: ImageFormat,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct BenchArgs {
    /// Point cloud or graph file. Without it a uniform random cloud is used.
    pub input: Option<PathBuf>,
    /// Size of the random cloud.
    #[arg(long, default_value_t = 2048)]
    pub points: usize,
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
    /// Skip the flat layout, which dominates the run time on large graphs.
    #[arg(long)]
    pub skip_flat: bool,
    #[arg(long = "graph", value_enum, default_value_t = CloudGraph::Delaunay)]
    pub cloud_graph: CloudGraph,
    #[arg(long, default_value_t = 8)]
    pub k: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub hierarchy: HierarchyArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
    /// Also write `bench.csv` and a manifest here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct RerunArgs {
    pub manifest: PathBuf,
    /// Output directory; defaults to the one recorded in the manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
