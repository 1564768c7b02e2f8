//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each exported function takes plain numbers and strings and returns a JSON
//! scene (`edges`, `cells`, `classes`, extent and loss) that the page draws on
//! a canvas. Seeds are `u32` so JavaScript can pass plain numbers. The
//! `scene_*` functions hold the logic and also run natively.

use gridlay::hierarchy::HierarchyConfig;
use gridlay::pointcloud::{delaunay_graph, PointCloud};
use gridlay::{gpgl, hgpgl, Graph, GridLayout, InitStrategy, LayoutConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Keeps the page responsive.
const MAX_VERTICES: usize = 300;
const MAX_POINTS: usize = 4096;
const MAX_COPIES: usize = 12;

#[derive(Debug, Serialize)]
pub struct Scene {
    pub edges: Vec<(usize, usize)>,
    /// Aligned so the bounding box starts at the origin.
    pub cells: Vec<[i64; 2]>,
    pub classes: Vec<usize>,
    pub width: i64,
    pub height: i64,
    pub loss: usize,
}

impl Scene {
    fn new(g: &Graph, grid: &GridLayout, classes: Vec<usize>) -> Self {
        let aligned = grid.aligned();
        Self {
            edges: g.edges().to_vec(),
            cells: aligned.cells().to_vec(),
            classes,
            width: aligned.width(),
            height: aligned.height(),
            loss: aligned.vertex_loss_count(),
        }
    }
}

/// `complete`, `random` (a random spanning tree plus pairs with probability
/// `p`) or `edges` (whitespace edge list in `text`).
pub fn build_graph(kind: &str, n: usize, p: f64, text: &str, seed: u64) -> Result<Graph, String> {
    let g = match kind {
        "complete" => Graph::complete(n),
        "random" => {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("edge probability {p} is outside [0, 1]"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let tree: Vec<(usize, usize)> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
            let extra: Vec<(usize, usize)> =
                (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|_| rng.gen_bool(p)).collect();
            Graph::new(n, tree.into_iter().chain(extra)).map_err(|e| e.to_string())?
        }
        "edges" => Graph::from_edge_list(text).map_err(|e| e.to_string())?,
        other => return Err(format!("unknown graph kind {other:?}")),
    };
    if g.num_vertices() == 0 || g.num_vertices() > MAX_VERTICES {
        return Err(format!("the demo handles 1 to {MAX_VERTICES} vertices, got {}", g.num_vertices()));
    }
    Ok(g)
}

fn layout_config(alpha: f64, lambda: f64, seed: u64, init: &str) -> Result<LayoutConfig, String> {
    Ok(LayoutConfig { alpha, lambda, seed, init: init.parse()?, ..Default::default() })
}

#[derive(Debug, Serialize)]
pub struct Explored {
    #[serde(flatten)]
    pub scene: Scene,
    pub energy: f64,
    pub iterations: usize,
    pub init_used: InitStrategy,
}

pub fn scene_layout(g: &Graph, cfg: &LayoutConfig) -> Result<Explored, String> {
    let run = gpgl(g, cfg).map_err(|e| e.to_string())?;
    Ok(Explored {
        scene: Scene::new(g, &run.grid, vec![0; g.num_vertices()]),
        energy: run.layout.energy,
        iterations: run.kk.iterations + run.layout.iterations,
        init_used: run.init_used,
    })
}

#[derive(Debug, Serialize)]
pub struct Hierarchical {
    #[serde(flatten)]
    pub scene: Scene,
    pub depth: usize,
    pub grid: [usize; 2],
    pub relocated_parts: usize,
}

/// Delaunay graph of `points` uniform random points, laid out hierarchically
/// and colored by top-level part.
pub fn scene_hierarchy(points: usize, fanout: usize, parent: usize, child: usize, seed: u64) -> Result<Hierarchical, String> {
    if !(4..=MAX_POINTS).contains(&points) {
        return Err(format!("the demo handles 4 to {MAX_POINTS} points, got {points}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cloud = (0..points).map(|_| [rng.gen(), rng.gen(), rng.gen()]).collect();
    let g = delaunay_graph(&PointCloud::new(cloud, None).map_err(|e| e.to_string())?).graph;
    let cfg = HierarchyConfig {
        fanout,
        parent_grid: gridlay::GridSize::square(parent),
        child_grid: gridlay::GridSize::square(child),
        layout: LayoutConfig { seed, ..Default::default() },
    };
    let h = hgpgl(&g, &cfg).map_err(|e| e.to_string())?;
    let mut classes = vec![0; points];
    for (k, part) in h.tree.root.children.iter().enumerate() {
        part.vertices.iter().for_each(|&v| classes[v] = k);
    }
    // Keep the global frame: blocks of absent parts stay empty.
    let mut scene = Scene::new(&g, &h.grid, classes);
    scene.cells = h.grid.cells().to_vec();
    scene.width = h.size.width as i64;
    scene.height = h.size.height as i64;
    Ok(Hierarchical { scene, depth: h.tree.depth, grid: [h.size.width, h.size.height], relocated_parts: h.relocated_parts })
}

/// Layouts of one graph from `copies` consecutive seeds, plus the number of
/// distinct results.
pub fn scene_augment(g: &Graph, copies: usize, cfg: &LayoutConfig) -> Result<(Vec<Scene>, usize), String> {
    if !(1..=MAX_COPIES).contains(&copies) {
        return Err(format!("copies must be between 1 and {MAX_COPIES}"));
    }
    let classes: Vec<usize> = (0..g.num_vertices()).map(|v| g.degree(v)).collect();
    let scenes = (0..copies as u64)
        .map(|k| {
            let run = gpgl(g, &LayoutConfig { seed: cfg.seed.wrapping_add(k), ..cfg.clone() }).map_err(|e| e.to_string())?;
            Ok(Scene::new(g, &run.grid, classes.clone()))
        })
        .collect::<Result<Vec<_>, String>>()?;
    let mut distinct: Vec<&Vec<[i64; 2]>> = scenes.iter().map(|s| &s.cells).collect();
    distinct.sort();
    distinct.dedup();
    let count = distinct.len();
    Ok((scenes, count))
}

fn to_js<T: Serialize>(result: Result<T, String>) -> Result<String, JsError> {
    result.map(|v| serde_json::to_string(&v).expect("scenes serialize")).map_err(|e| JsError::new(&e))
}

/// Flat layout of a complete, random or pasted graph.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn layout_graph(
    kind: &str,
    n: usize,
    p: f64,
    text: &str,
    alpha: f64,
    lambda: f64,
    seed: u32,
    init: &str,
) -> Result<String, JsError> {
    let seed = u64::from(seed);
    to_js(build_graph(kind, n, p, text, seed).and_then(|g| scene_layout(&g, &layout_config(alpha, lambda, seed, init)?)))
}

/// Hierarchical layout of a random point cloud's Delaunay graph.
#[wasm_bindgen]
pub fn layout_cloud(points: usize, fanout: usize, parent: usize, child: usize, seed: u32) -> Result<String, JsError> {
    to_js(scene_hierarchy(points, fanout, parent, child, u64::from(seed)))
}

/// One layout per seed for the same graph.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn augment_graph(
    kind: &str,
    n: usize,
    p: f64,
    text: &str,
    copies: usize,
    alpha: f64,
    lambda: f64,
    seed: u32,
) -> Result<String, JsError> {
    let seed = u64::from(seed);
    #[derive(Serialize)]
    struct Augmented {
        copies: Vec<Scene>,
        distinct: usize,
    }
    to_js(build_graph(kind, n, p, text, seed).and_then(|g| {
        let (copies, distinct) = scene_augment(&g, copies, &layout_config(alpha, lambda, seed, "circular")?)?;
        Ok(Augmented { copies, distinct })
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_graph_scene() {
        let g = build_graph("complete", 12, 0.0, "", 0).unwrap();
        let explored = scene_layout(&g, &LayoutConfig::default()).unwrap();
        assert_eq!(explored.scene.cells.len(), 12);
        assert_eq!(explored.scene.edges.len(), 66);
        assert_eq!(explored.scene.loss, 0);
        let json = serde_json::to_value(&explored).unwrap();
        assert!(json["cells"].is_array() && json["energy"].is_number());
    }

    #[test]
    fn graph_kinds_and_limits() {
        assert_eq!(build_graph("edges", 0, 0.0, "0 1\n1 2\n", 0).unwrap().num_edges(), 2);
        let g = build_graph("random", 30, 0.1, "", 5).unwrap();
        assert_eq!(gridlay::connected_components(&g).len(), 1);
        assert!(build_graph("complete", MAX_VERTICES + 1, 0.0, "", 0).is_err());
        assert!(build_graph("random", 10, 1.5, "", 0).is_err());
        assert!(build_graph("star", 10, 0.0, "", 0).is_err());
        assert!(layout_config(1.25, 1000.0, 0, "diagonal").is_err());
    }

    #[test]
    fn hierarchy_scene_is_global() {
        let h = scene_hierarchy(200, 16, 8, 16, 1).unwrap();
        assert_eq!((h.depth, h.grid), (2, [128, 128]));
        assert!(h.scene.cells.iter().all(|c| (0..128).contains(&c[0]) && (0..128).contains(&c[1])));
        assert!(h.scene.classes.iter().all(|&k| k < 16));
    }

    #[test]
    fn augment_differs_across_seeds() {
        let g = build_graph("random", 16, 0.2, "", 2).unwrap();
        let (scenes, distinct) = scene_augment(&g, 4, &LayoutConfig::default()).unwrap();
        assert_eq!(scenes.len(), 4);
        assert!(distinct > 1);
        assert!(scene_augment(&g, 0, &LayoutConfig::default()).is_err());
    }
}
