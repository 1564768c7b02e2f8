#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ncut::normalized_cut;
use super::{GridSize, HierarchyConfig, HierarchyError, Partition};
use crate::graph::Graph;
use crate::layout::{gpgl, GridLayout};

/// One vertex per part, with an edge wherever an edge of `g` crosses two
/// parts.
pub fn connectivity_graph(g: &Graph, partition: &Partition) -> Graph {
    let edges: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .filter_map(|&(u, v)| {
            let (a, b) = (partition.part_of(u), partition.part_of(v));
            (a != b).then_some((a.min(b), a.max(b)))
        })
        .collect();
    Graph::new(partition.num_parts(), edges).expect("part indices are in range")
}

/// Absolute cell of a leaf vertex from its placements, leaf first.
///
/// `path[0]` is the cell inside the child grid and `path[m]` for `m >= 1` the
/// placement inside a parent grid. The result is
/// `path[0] + sum_m path[m] * child * parent^(m - 1)`, entrywise.
pub fn fit_into_grid(path: &[[i64; 2]], parent: GridSize, child: GridSize) -> Result<[i64; 2], HierarchyError> {
    let Some((&first, ancestors)) = path.split_first() else {
        return Err(HierarchyError::Config("empty placement path".into()));
    };
    if !child.contains(first) {
        return Err(HierarchyError::OutOfBounds {
            level: 0,
            placement: first,
            bound: [child.width, child.height],
        });
    }
    let mut cell = first;
    let mut scale = [child.width as i64, child.height as i64];
    for (level, &a) in ancestors.iter().enumerate() {
        if !parent.contains(a) {
            return Err(HierarchyError::OutOfBounds {
                level: level + 1,
                placement: a,
                bound: [parent.width, parent.height],
            });
        }
        cell[0] += a[0] * scale[0];
        cell[1] += a[1] * scale[1];
        scale[0] *= parent.width as i64;
        scale[1] *= parent.height as i64;
    }
    Ok(cell)
}

/// Node of the recursion. Internal nodes carry children; leaves carry the
/// child-grid cell of each of their vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    /// Original vertex ids.
    pub vertices: Vec<usize>,
    /// Cell inside the parent's grid; `[0, 0]` at the root.
    pub placement: [i64; 2],
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<TreeNode>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cells: Vec<[i64; 2]>,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionTree {
    pub depth: usize,
    /// Offset of the whole layout in the global grid.
    pub anchor: [i64; 2],
    pub parent_grid: GridSize,
    pub child_grid: GridSize,
    pub root: TreeNode,
}

impl PartitionTree {
    /// Leaves in depth-first order, each with its ancestors' placements
    /// (nearest first, root excluded).
    pub fn leaves(&self) -> Vec<(&TreeNode, Vec<[i64; 2]>)> {
        fn walk<'a>(node: &'a TreeNode, above: &mut Vec<[i64; 2]>, out: &mut Vec<(&'a TreeNode, Vec<[i64; 2]>)>) {
            if node.is_leaf() {
                out.push((node, above.iter().rev().copied().collect()));
                return;
            }
            for child in &node.children {
                above.push(child.placement);
                walk(child, above, out);
                above.pop();
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut Vec::new(), &mut out);
        out
    }

    /// Leaf index of every vertex, in [`PartitionTree::leaves`] order.
    pub fn leaf_of(&self, n: usize) -> Vec<usize> {
        let mut out = vec![usize::MAX; n];
        for (k, (leaf, _)) in self.leaves().into_iter().enumerate() {
            leaf.vertices.iter().for_each(|&v| out[v] = k);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("partition tree serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Output of [`hgpgl`].
#[derive(Clone, Debug)]
pub struct HierarchicalLayout {
    /// Global cells, indexed by original vertex.
    pub grid: GridLayout,
    pub tree: PartitionTree,
    /// Extent of the global grid: `child_grid * parent_grid^(depth - 1)`.
    pub size: GridSize,
    /// Parts moved to the nearest free parent cell because their rounded
    /// placement collided with an earlier part.
    pub relocated_parts: usize,
    /// Some bisection fell back from the eigenvector to BFS order.
    pub partition_fallback: bool,
}

#[derive(Default)]
struct Stats {
    relocated: usize,
    fallback: bool,
}

impl Stats {
    fn merge(&mut self, other: Stats) {
        self.relocated += other.relocated;
        self.fallback |= other.fallback;
    }
}

/// Hierarchical grid layout.
///
/// Uses `T = round(log_fanout n)` levels. With one level the graph is laid
/// out directly on the child grid. Otherwise it is cut into `fanout` parts,
/// the graph of parts is laid out on the parent grid, each part is handled
/// recursively with one level fewer, and every leaf cell is mapped to the
/// global grid with [`fit_into_grid`]. Parent cells without a part leave
/// their block empty.
pub fn hgpgl(g: &Graph, cfg: &HierarchyConfig) -> Result<HierarchicalLayout, HierarchyError> {
    cfg.validate()?;
    let n = g.num_vertices();
    if n == 0 {
        return Err(HierarchyError::EmptyGraph);
    }
    let depth = cfg.depth_for(n);
    let (mut root, stats) = build(g, (0..n).collect(), depth, cfg, &[])?;
    root.placement = [0, 0];
    let tree = PartitionTree {
        depth,
        anchor: [0, 0],
        parent_grid: cfg.parent_grid,
        child_grid: cfg.child_grid,
        root,
    };

    let mut cells = vec![[0i64; 2]; n];
    for (leaf, above) in tree.leaves() {
        let mut path = Vec::with_capacity(above.len() + 1);
        for (&v, &c) in leaf.vertices.iter().zip(&leaf.cells) {
            path.clear();
            path.push(c);
            path.extend_from_slice(&above);
            let a = fit_into_grid(&path, cfg.parent_grid, cfg.child_grid)?;
            cells[v] = [a[0] + tree.anchor[0], a[1] + tree.anchor[1]];
        }
    }
    Ok(HierarchicalLayout {
        grid: GridLayout::from_cells(cells),
        tree,
        size: cfg.global_size(depth),
        relocated_parts: stats.relocated,
        partition_fallback: stats.fallback,
    })
}

fn check_fits(grid: &GridLayout, limit: GridSize, path: &[usize]) -> Result<(), HierarchyError> {
    if grid.width() as usize > limit.width || grid.height() as usize > limit.height {
        return Err(HierarchyError::Overflow {
            path: path.to_vec(),
            width: grid.width(),
            height: grid.height(),
            limit_w: limit.width,
            limit_h: limit.height,
        });
    }
    Ok(())
}

fn build(
    g: &Graph,
    vertices: Vec<usize>,
    depth: usize,
    cfg: &HierarchyConfig,
    path: &[usize],
) -> Result<(TreeNode, Stats), HierarchyError> {
    let sub = g.induced_subgraph(&vertices);
    if depth <= 1 {
        let run = gpgl(&sub, &cfg.layout)?;
        check_fits(&run.grid, cfg.child_grid, path)?;
        let cells = run.grid.cells().to_vec();
        return Ok((TreeNode { vertices, placement: [0, 0], children: Vec::new(), cells }, Stats::default()));
    }

    let partition = normalized_cut(&sub, cfg.fanout.min(vertices.len()))?;
    let parts_graph = connectivity_graph(&sub, &partition);
    let run = gpgl(&parts_graph, &cfg.layout)?;
    check_fits(&run.grid, cfg.parent_grid, path)?;
    let (placements, relocated) = resolve_collisions(run.grid.cells(), cfg.parent_grid);
    let mut stats = Stats { relocated, fallback: partition.used_fallback() };

    let jobs: Vec<(usize, Vec<usize>)> = partition
        .parts()
        .iter()
        .enumerate()
        .map(|(k, part)| (k, part.iter().map(|&l| vertices[l]).collect()))
        .collect();
    let run_child = |(k, members): (usize, Vec<usize>)| {
        let child_path: Vec<usize> = path.iter().copied().chain([k]).collect();
        build(g, members, depth - 1, cfg, &child_path)
    };
    #[cfg(feature = "parallel")]
    let results: Vec<_> = jobs.into_par_iter().map(run_child).collect();
    #[cfg(not(feature = "parallel"))]
    let results: Vec<_> = jobs.into_iter().map(run_child).collect();

    let mut children = Vec::with_capacity(results.len());
    for (result, placement) in results.into_iter().zip(placements) {
        let (mut child, child_stats) = result?;
        child.placement = placement;
        stats.merge(child_stats);
        children.push(child);
    }
    Ok((TreeNode { vertices, placement: [0, 0], children, cells: Vec::new() }, stats))
}

/// Keeps the first occupant of each cell and moves later ones to the nearest
/// free cell (squared distance, then row, then column).
fn resolve_collisions(cells: &[[i64; 2]], bound: GridSize) -> (Vec<[i64; 2]>, usize) {
    let mut taken = vec![false; bound.capacity()];
    let index = |c: [i64; 2]| c[1] as usize * bound.width + c[0] as usize;
    let mut out = Vec::with_capacity(cells.len());
    let mut moved = 0;
    for &c in cells {
        let cell = if !taken[index(c)] {
            c
        } else {
            moved += 1;
            (0..bound.height as i64)
                .flat_map(|y| (0..bound.width as i64).map(move |x| [x, y]))
                .filter(|&f| !taken[index(f)])
                .min_by_key(|f| ((f[0] - c[0]).pow(2) + (f[1] - c[1]).pow(2), f[1], f[0]))
                .expect("fanout never exceeds the parent grid capacity")
        };
        taken[index(cell)] = true;
        out.push(cell);
    }
    (out, moved)
}
