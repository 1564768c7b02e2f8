//! Limited-memory BFGS with a backtracking (Armijo) line search.

use std::collections::VecDeque;

use super::SolverError;

/// Number of curvature pairs kept.
pub const HISTORY: usize = 10;

const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;
/// Consecutive iterations with negligible decrease before giving up.
const STALL_ITERS: usize = 20;
const STALL_RTOL: f64 = 1e-13;

/// A differentiable scalar function of a flat parameter vector.
pub trait Objective {
    /// Returns f(x) and writes the gradient into `grad`.
    fn evaluate(&mut self, x: &[f64], grad: &mut [f64]) -> f64;
}

impl<F: FnMut(&[f64], &mut [f64]) -> f64> Objective for F {
    fn evaluate(&mut self, x: &[f64], grad: &mut [f64]) -> f64 {
        self(x, grad)
    }
}

#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    /// Gradient infinity norm fell below the tolerance.
    pub converged: bool,
    pub iterations: usize,
    pub evaluations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

struct Pair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

/// Two-loop recursion: returns `-H g`.
fn search_direction(g: &[f64], memory: &VecDeque<Pair>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(memory.len());
    for p in memory.iter().rev() {
        let a = p.rho * dot(&p.s, &q);
        q.iter_mut().zip(&p.y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    if let Some(last) = memory.back() {
        let gamma = dot(&last.s, &last.y) / dot(&last.y, &last.y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for (p, a) in memory.iter().zip(alphas.into_iter().rev()) {
        let b = p.rho * dot(&p.y, &q);
        q.iter_mut().zip(&p.s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

/// Minimizes `objective` from `x0`.
///
/// Accepted steps never increase the objective. Stops when the gradient
/// infinity norm drops below `grad_tol` (`converged`), after `max_iters`
/// iterations, or when no step along steepest descent decreases the value.
pub fn minimize<O: Objective + ?Sized>(
    objective: &mut O,
    x0: &[f64],
    max_iters: usize,
    grad_tol: f64,
) -> Result<Minimum, SolverError> {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    let mut f = objective.evaluate(&x, &mut g);
    let mut evaluations = 1;
    if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::NonFinite { iteration: 0 });
    }

    let mut memory: VecDeque<Pair> = VecDeque::with_capacity(HISTORY);
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut iterations = 0;
    let mut stalled = 0;
    let mut converged = inf_norm(&g) < grad_tol;

    while !converged && iterations < max_iters {
        let mut direction = search_direction(&g, &memory);
        let mut slope = dot(&g, &direction);
        if memory.is_empty() || slope.is_nan() || slope >= 0.0 {
            memory.clear();
            direction = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }

        let mut accepted = None;
        loop {
            let mut step = if memory.is_empty() { (1.0 / slope.abs().sqrt()).min(1.0) } else { 1.0 };
            for _ in 0..MAX_BACKTRACKS {
                for ((xn, xi), di) in x_new.iter_mut().zip(&x).zip(&direction) {
                    *xn = xi + step * di;
                }
                let f_new = objective.evaluate(&x_new, &mut g_new);
                evaluations += 1;
                if !f_new.is_finite() || g_new.iter().any(|v| !v.is_finite()) {
                    return Err(SolverError::NonFinite { iteration: iterations + 1 });
                }
                if f_new <= f + ARMIJO_C1 * step * slope {
                    accepted = Some(f_new);
                    break;
                }
                step *= 0.5;
            }
            if accepted.is_some() || memory.is_empty() {
                break;
            }
            // Quasi-Newton direction failed; retry along steepest descent.
            memory.clear();
            direction = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        let Some(f_new) = accepted else { break };

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-10 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if memory.len() == HISTORY {
                memory.pop_front();
            }
            memory.push_back(Pair { s, y, rho: 1.0 / sy });
        }

        let decrease = f - f_new;
        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut g, &mut g_new);
        f = f_new;
        iterations += 1;
        converged = inf_norm(&g) < grad_tol;

        if decrease <= STALL_RTOL * f.abs().max(1.0) {
            stalled += 1;
            if stalled >= STALL_ITERS {
                break;
            }
        } else {
            stalled = 0;
        }
    }

    Ok(Minimum { x, value: f, converged, iterations, evaluations })
}
