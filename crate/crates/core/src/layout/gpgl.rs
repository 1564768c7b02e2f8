use super::energy::{evaluate, gpgl_energy};
use super::init::init_with_distances;
use super::optimize::minimize;
use super::{ContinuousLayout, GridLayout, InitStrategy, LayoutConfig, SolverError};
use crate::graph::{shortest_path_distances, DistanceMatrix, Graph};

/// Everything produced by one run of the layout pipeline.
#[derive(Clone, Debug)]
pub struct GpglRun {
    pub grid: GridLayout,
    /// Kamada-Kawai minimum used as the warm start.
    pub kk: ContinuousLayout,
    /// Penalized minimum, before rounding.
    pub layout: ContinuousLayout,
    /// Penalized energy at the warm start; `layout.energy` never exceeds it.
    pub warm_start_energy: f64,
    pub init_used: InitStrategy,
}

fn run_phase(
    start: &ContinuousLayout,
    dist: &DistanceMatrix,
    alpha: f64,
    lambda: f64,
    max_iters: usize,
    grad_tol: f64,
) -> Result<ContinuousLayout, SolverError> {
    let mut objective = |x: &[f64], g: &mut [f64]| evaluate(x, g, dist, alpha, lambda);
    let m = minimize(&mut objective, &start.flat(), max_iters, grad_tol)?;
    Ok(ContinuousLayout {
        coords: ContinuousLayout::from_flat(&m.x),
        energy: m.value,
        converged: m.converged,
        iterations: m.iterations,
    })
}

/// Lays `g` out on the integer grid.
///
/// Hop distances, then Kamada-Kawai from the configured initialization, then
/// Kamada-Kawai plus separation penalty from that minimum, then rounding.
pub fn gpgl(g: &Graph, cfg: &LayoutConfig) -> Result<GpglRun, SolverError> {
    let dist = shortest_path_distances(g);
    gpgl_with_distances(g, &dist, cfg)
}

pub fn gpgl_with_distances(g: &Graph, dist: &DistanceMatrix, cfg: &LayoutConfig) -> Result<GpglRun, SolverError> {
    cfg.validate()?;
    let n = g.num_vertices();
    if n == 0 {
        return Err(SolverError::EmptyGraph);
    }
    if dist.len() != n {
        return Err(SolverError::Input(format!("distance matrix has {} rows for {n} vertices", dist.len())));
    }
    if n == 1 {
        let single = ContinuousLayout { coords: vec![[0.0, 0.0]], energy: 0.0, converged: true, iterations: 0 };
        return Ok(GpglRun {
            grid: GridLayout::from_cells(vec![[0, 0]]),
            kk: single.clone(),
            layout: single,
            warm_start_energy: 0.0,
            init_used: cfg.init,
        });
    }

    let init = init_with_distances(g, dist, cfg.init, cfg.seed);
    let kk = run_phase(&init.layout, dist, cfg.alpha, 0.0, cfg.max_iters_kk, cfg.grad_tol)?;
    let warm_start_energy = gpgl_energy(&kk.coords, dist, cfg.alpha, cfg.lambda);
    let layout = if cfg.lambda > 0.0 {
        run_phase(&kk, dist, cfg.alpha, cfg.lambda, cfg.max_iters_gpgl, cfg.grad_tol)?
    } else {
        kk.clone()
    };
    let grid = GridLayout::round(&layout.coords);
    Ok(GpglRun { grid, kk, layout, warm_start_energy, init_used: init.used })
}

/// How per-graph losses are combined into one corpus percentage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LossAveraging {
    /// Mean of per-graph percentages.
    #[default]
    Macro,
    /// Total lost vertices over total vertices.
    Micro,
}

/// Vertex-loss percentage over a corpus of layouts.
pub fn vertex_loss_ratio(layouts: &[GridLayout], averaging: LossAveraging) -> Result<f64, SolverError> {
    if layouts.is_empty() || layouts.iter().any(|l| l.num_vertices() == 0) {
        return Err(SolverError::Input("vertex loss ratio needs at least one non-empty layout".into()));
    }
    Ok(match averaging {
        LossAveraging::Macro => {
            layouts.iter().map(|l| 100.0 * l.vertex_loss_count() as f64 / l.num_vertices() as f64).sum::<f64>()
                / layouts.len() as f64
        }
        LossAveraging::Micro => {
            let lost: usize = layouts.iter().map(GridLayout::vertex_loss_count).sum();
            let total: usize = layouts.iter().map(GridLayout::num_vertices).sum();
            100.0 * lost as f64 / total as f64
        }
    })
}
