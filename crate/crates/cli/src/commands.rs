use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use gridlay::export::{file_stem, write_npy, Sidecar};
use gridlay::graph::corpus_stats;
use gridlay::layout::LossAveraging;
use gridlay::render::{feature_classes, render, Image, RenderOptions};
use gridlay::{
    augment, gpgl, hgpgl, load_tu_dataset, normalized_cut, vertex_loss_ratio, ExportConfig,
    FeatureGrid, Graph, GridLayout, PartitionTree, PointCloud,
};
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use crate::args::{AugmentArgs, BenchArgs, HlayoutArgs, ImageFormat, LayoutArgs, RenderArgs, StatsArgs};
use crate::error::CliError;
use crate::input::{graph_from_cloud, is_point_cloud, load_graph};
use crate::manifest::Recorder;

pub fn layout(a: &LayoutArgs, rec: &mut Recorder) -> Result<(), CliError> {
    let g = rec.time("load", || load_graph(&a.input.input, a.input.cloud_graph, a.input.k))?;
    let run = rec.time("gpgl", || gpgl(&g, &a.solver.config()))?;
    if run.init_used != a.solver.init {
        eprintln!("note: {} initialization unavailable, used {}", a.solver.init, run.init_used);
    }
    rec.write(&a.out, "layout.json", run.grid.to_json())?;
    println!("energy {:.6}", run.layout.energy);
    println!("iterations {} {}", run.kk.iterations, run.layout.iterations);
    println!("vertex_loss {}", run.grid.vertex_loss_count());
    println!("bbox {}x{}", run.grid.width(), run.grid.height());
    Ok(())
}

pub fn hlayout(a: &HlayoutArgs, rec: &mut Recorder) -> Result<(), CliError> {
    let g = rec.time("load", || load_graph(&a.input.input, a.input.cloud_graph, a.input.k))?;
    let cfg = a.hierarchy.config(a.solver.config());
    let h = rec.time("hgpgl", || hgpgl(&g, &cfg))?;
    if h.partition_fallback {
        eprintln!("note: some bisections fell back to breadth-first order");
    }
    rec.write(&a.out, "layout.json", h.grid.to_json())?;
    rec.write(&a.out, "tree.json", h.tree.to_json())?;
    println!("grid {}x{}", h.size.width, h.size.height);
    println!("depth {}", h.tree.depth);
    println!("vertex_loss {}", h.grid.vertex_loss_count());
    println!("relocated_parts {}", h.relocated_parts);
    Ok(())
}

fn dataset_name(path: &Path, name: Option<&str>) -> String {
    name.map(str::to_owned)
        .or_else(|| path.file_stem().and_then(|s| s.to_str()).map(str::to_owned))
        .unwrap_or_else(|| "graph".to_owned())
}

/// Graphs of a TU dataset directory, or the single graph in a file.
fn load_corpus(path: &Path, name: &str, a: &AugmentArgs) -> Result<Vec<Graph>, CliError> {
    if path.is_dir() {
        Ok(load_tu_dataset(path, name)?)
    } else {
        Ok(vec![load_graph(path, a.cloud_graph, a.k)?])
    }
}

pub fn augment_corpus(a: &AugmentArgs, rec: &mut Recorder) -> Result<(), CliError> {
    let name = dataset_name(&a.input, a.name.as_deref());
    let graphs = rec.time("load", || load_corpus(&a.input, &name, a))?;
    let export_cfg =
        ExportConfig { window: [a.window, a.window], pooling: a.pooling, overflow: a.overflow };
    export_cfg.validate()?;
    let cfg = a.solver.config();

    let results: Vec<(Result<Vec<FeatureGrid>, _>, f64)> = graphs
        .par_iter()
        .map(|g| {
            let start = Instant::now();
            let grids = augment(g, a.copies, &cfg, &export_cfg);
            (grids, start.elapsed().as_secs_f64() * 1e3)
        })
        .collect();

    let mut grown = 0;
    for (index, (grids, ms)) in results.into_iter().enumerate() {
        // Graph ids are 1-based, as in the dataset's indicator file.
        let graph_id = index + 1;
        let grids = grids.map_err(|e| CliError::from(e).context(format!("graph {graph_id}")))?;
        rec.timings.push(crate::manifest::Timing { item: format!("graph {graph_id}"), ms });
        for (offset, grid) in grids.iter().enumerate() {
            let stem = file_stem(&name, graph_id, cfg.seed.wrapping_add(offset as u64));
            rec.write(&a.out, &format!("{stem}.npy"), write_npy(&grid.shape(), &grid.data))?;
            let sidecar = serde_json::to_string(&Sidecar::from_grid(grid)).expect("sidecar serializes");
            rec.write(&a.out, &format!("{stem}.json"), sidecar)?;
            grown += usize::from(grid.grown);
        }
    }
    println!("graphs {}", graphs.len());
    println!("tensors {}", graphs.len() * a.copies);
    if grown > 0 {
        eprintln!("note: {grown} tensors needed a window larger than {0}x{0}", a.window);
    }
    Ok(())
}

pub fn stats(a: &StatsArgs, rec: &mut Recorder) -> Result<String, CliError> {
    let mut csv = String::from("dataset,graphs,avg_nodes,avg_edges,avg_degree,max_degree");
    if !a.no_layout {
        for init in &a.inits {
            write!(csv, ",loss_{init}").unwrap();
        }
    }
    csv.push('\n');
    for dir in &a.datasets {
        if !dir.is_dir() {
            return Err(CliError::Input(format!("dataset directory {} does not exist", dir.display())));
        }
        let name = dataset_name(dir, None);
        let graphs = rec.time(format!("{name} load"), || load_tu_dataset(dir, &name))?;
        let s = corpus_stats(&graphs);
        write!(
            csv,
            "{name},{},{:.4},{:.4},{:.4},{}",
            s.graphs, s.avg_nodes, s.avg_edges, s.avg_degree, s.max_degree
        )
        .unwrap();
        if !a.no_layout {
            for &init in &a.inits {
                let cfg = gridlay::LayoutConfig { init, seed: a.seed, ..Default::default() };
                let grids = rec.time(format!("{name} {init}"), || {
                    graphs.par_iter().map(|g| gpgl(g, &cfg).map(|r| r.grid)).collect::<Result<Vec<_>, _>>()
                })?;
                write!(csv, ",{:.4}", vertex_loss_ratio(&grids, LossAveraging::Macro)?).unwrap();
            }
        }
        csv.push('\n');
    }
    print!("{csv}");
    if let Some(out) = &a.out {
        rec.write(out, "stats.csv", &csv)?;
    }
    Ok(csv)
}

fn encode_png(img: &Image) -> Vec<u8> {
    let mut bytes = Vec::new();
    let mut encoder = png::Encoder::new(&mut bytes, img.width as u32, img.height as u32);
    encoder.set_color(png::ColorType::Rgb);
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder.write_header().expect("writing into memory");
    writer.write_image_data(&img.rgb).expect("writing into memory");
    writer.finish().expect("writing into memory");
    bytes
}

/// Top-level part of every vertex.
fn top_level_parts(tree: &PartitionTree, n: usize) -> Vec<usize> {
    let mut classes = vec![0; n];
    for (k, child) in tree.root.children.iter().enumerate() {
        for &v in &child.vertices {
            if v < n {
                classes[v] = k;
            }
        }
    }
    classes
}

pub fn render_layout(a: &RenderArgs, rec: &mut Recorder) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&a.layout).map_err(CliError::io(&a.layout))?;
    let layout = GridLayout::from_json(&text)?;
    let n = layout.num_vertices();
    if n == 0 {
        return Err(CliError::Input("layout has no vertices".into()));
    }
    let graph = match &a.graph {
        Some(path) => load_graph(path, crate::args::CloudGraph::Delaunay, 8)?,
        None => Graph::empty(n),
    };
    if graph.num_vertices() != n {
        return Err(CliError::Input(format!("graph has {} vertices, layout has {n}", graph.num_vertices())));
    }
    let classes = match &a.tree {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
            top_level_parts(&PartitionTree::from_json(&text)?, n)
        }
        None => feature_classes(&graph),
    };
    let opts = RenderOptions { cell_px: a.cell_px, draw_edges: !a.no_edges && a.graph.is_some() };
    let img = rec.time("render", || render(&graph, &layout, &classes, &opts));
    let (name, bytes) = match a.format {
        ImageFormat::Png => ("render.png", encode_png(&img)),
        ImageFormat::Ppm => ("render.ppm", img.to_ppm()),
    };
    rec.write(&a.out, name, bytes)?;
    println!("image {}x{}", img.width, img.height);
    Ok(())
}

struct Phase {
    name: &'static str,
    samples: Vec<f64>,
}

impl Phase {
    fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Sample standard deviation; zero for a single sample.
    fn std(&self) -> f64 {
        let n = self.samples.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.mean();
        (self.samples.iter().map(|s| (s - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    }

    fn median(&self) -> f64 {
        let mut s = self.samples.clone();
        s.sort_by(f64::total_cmp);
        s[s.len() / 2]
    }
}

fn timed<T>(reps: usize, mut f: impl FnMut() -> Result<T, CliError>) -> Result<Vec<f64>, CliError> {
    (0..reps)
        .map(|_| {
            let start = Instant::now();
            f()?;
            Ok(start.elapsed().as_secs_f64() * 1e3)
        })
        .collect()
}

pub fn bench(a: &BenchArgs, rec: &mut Recorder) -> Result<(), CliError> {
    if a.reps == 0 {
        return Err(CliError::Input("--reps must be at least 1".into()));
    }
    let cloud = match &a.input {
        Some(path) if is_point_cloud(path) => Some(gridlay::load_xyz(path)?),
        Some(_) => None,
        None => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(a.solver.seed);
            let points = (0..a.points).map(|_| [rng.gen(), rng.gen(), rng.gen()]).collect();
            Some(PointCloud::new(points, None)?)
        }
    };

    let mut phases = Vec::new();
    let graph = match (&cloud, &a.input) {
        (Some(pc), _) => {
            phases.push(Phase { name: "construction", samples: timed(a.reps, || graph_from_cloud(pc, a.cloud_graph, a.k))? });
            graph_from_cloud(pc, a.cloud_graph, a.k)?
        }
        (None, Some(path)) => load_graph(path, a.cloud_graph, a.k)?,
        (None, None) => unreachable!("a missing input yields a random cloud"),
    };
    let cfg = a.hierarchy.config(a.solver.config());
    let parts = a.hierarchy.fanout.min(graph.num_vertices());
    phases.push(Phase { name: "ncut", samples: timed(a.reps, || Ok(normalized_cut(&graph, parts)?))? });
    phases.push(Phase { name: "hgpgl", samples: timed(a.reps, || Ok(hgpgl(&graph, &cfg)?))? });
    if !a.skip_flat {
        phases.push(Phase { name: "gpgl", samples: timed(a.reps, || Ok(gpgl(&graph, &cfg.layout)?))? });
    }

    let mut csv = String::from("phase,mean_ms,std_ms,n\n");
    for p in &phases {
        writeln!(csv, "{},{:.3},{:.3},{}", p.name, p.mean(), p.std(), p.samples.len()).unwrap();
    }
    let median = |name: &str| phases.iter().find(|p| p.name == name).map(Phase::median);
    if let (Some(h), Some(f)) = (median("hgpgl"), median("gpgl")) {
        writeln!(csv, "# speedup {:.2}", f / h).unwrap();
    }
    print!("{csv}");
    rec.timings.extend(phases.iter().flat_map(|p| {
        p.samples.iter().map(|&ms| crate::manifest::Timing { item: p.name.to_owned(), ms })
    }));
    if let Some(out) = &a.out {
        rec.write(out, "bench.csv", &csv)?;
    }
    Ok(())
}
