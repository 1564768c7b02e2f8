use std::cmp::Reverse;
use std::collections::VecDeque;

use super::eigen::{fiedler_vector, LaplacianView};
use super::{HierarchyError, Partition};
use crate::graph::Graph;

/// Splits `g` into `parts` non-empty sets by recursive spectral bisection of
/// the currently largest set.
///
/// With `b = ceil(n / parts)`, a set larger than `2b` is only split into two
/// sides of at least `b` vertices each; smaller sets split freely. This keeps
/// every final part at most `2b` vertices. Each bisection sweeps the sorted
/// generalized Fiedler vector for the threshold of least normalized cut,
/// preferring the more balanced split on ties. Sets that are not connected
/// are first split along their components, largest first onto the smaller
/// side.
pub fn normalized_cut(g: &Graph, parts: usize) -> Result<Partition, HierarchyError> {
    let n = g.num_vertices();
    if parts == 0 || parts > n {
        return Err(HierarchyError::PartCount { parts, n });
    }
    let bound = n.div_ceil(parts);
    let mut current: Vec<Vec<usize>> = vec![(0..n).collect()];
    let mut fallback = false;
    let mut local = vec![usize::MAX; n];
    while current.len() < parts {
        let (idx, _) = current
            .iter()
            .enumerate()
            .max_by_key(|(_, p)| (p.len(), Reverse(p[0])))
            .expect("at least one part");
        let part = current.swap_remove(idx);
        let split = bisect(g, &part, bound, &mut local);
        fallback |= split.fallback;
        current.push(split.left);
        current.push(split.right);
    }
    let mut partition = Partition::from_parts(n, current)?;
    partition.fallback = fallback;
    Ok(partition)
}

/// `sum_k cut(V_k, V \ V_k) / vol(V_k)`, with parts that cut nothing
/// contributing zero.
pub fn ncut_value(g: &Graph, partition: &Partition) -> f64 {
    partition
        .parts()
        .iter()
        .enumerate()
        .map(|(k, part)| {
            let (mut cut, mut vol) = (0usize, 0usize);
            for &v in part {
                vol += g.degree(v);
                cut += g.neighbors(v).iter().filter(|&&w| partition.part_of(w) != k).count();
            }
            if cut == 0 {
                0.0
            } else {
                cut as f64 / vol as f64
            }
        })
        .sum()
}

struct Split {
    left: Vec<usize>,
    right: Vec<usize>,
    fallback: bool,
}

fn components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; adj.len()];
    let mut out = Vec::new();
    for s in 0..adj.len() {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut head = 0;
        while head < comp.len() {
            let u = comp[head];
            head += 1;
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// BFS order from a vertex of maximal eccentricity estimate.
fn bfs_order(adj: &[Vec<usize>]) -> Vec<usize> {
    let bfs = |start: usize| {
        let mut seen = vec![false; adj.len()];
        let mut order = vec![start];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    order.push(w);
                    queue.push_back(w);
                }
            }
        }
        order
    };
    let far = *bfs(0).last().expect("non-empty");
    bfs(far)
}

fn bisect(g: &Graph, part: &[usize], bound: usize, local: &mut [usize]) -> Split {
    let m = part.len();
    for (k, &v) in part.iter().enumerate() {
        local[v] = k;
    }
    // `local` is shared scratch and may hold stale entries; `part[l] == w`
    // confirms membership.
    let adj: Vec<Vec<usize>> = part
        .iter()
        .map(|&v| {
            g.neighbors(v)
                .iter()
                .filter_map(|&w| {
                    let l = local[w];
                    (l < m && part[l] == w).then_some(l)
                })
                .collect()
        })
        .collect();
    let min_side = if m > 2 * bound { bound } else { 1 };
    let to_global = |side: Vec<usize>| {
        let mut s: Vec<usize> = side.into_iter().map(|l| part[l]).collect();
        s.sort_unstable();
        s
    };

    let mut comps = components(&adj);
    if comps.len() > 1 {
        comps.sort_by_key(|c| (Reverse(c.len()), c[0]));
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for c in &comps {
            if a.len() <= b.len() {
                a.extend_from_slice(c);
            } else {
                b.extend_from_slice(c);
            }
        }
        if a.len() >= min_side && b.len() >= min_side {
            return Split { left: to_global(a), right: to_global(b), fallback: false };
        }
    }

    // Spectral split of the largest component; the remaining components are
    // attached whole to whichever side scores better.
    let big = comps.iter().max_by_key(|c| (c.len(), Reverse(c[0]))).expect("non-empty part").clone();
    let mut in_big = vec![false; m];
    big.iter().for_each(|&l| in_big[l] = true);
    let rest: Vec<usize> = (0..m).filter(|&l| !in_big[l]).collect();
    let rest_vol: usize = rest.iter().map(|&l| adj[l].len()).sum();

    let mut big_index = vec![usize::MAX; m];
    big.iter().enumerate().for_each(|(k, &l)| big_index[l] = k);
    let big_adj: Vec<Vec<usize>> = big.iter().map(|&l| adj[l].iter().map(|&w| big_index[w]).collect()).collect();

    let (order, fallback) = match fiedler_vector(&LaplacianView { adj: &big_adj }) {
        Some(x) => {
            let mut order: Vec<usize> = (0..big.len()).collect();
            order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
            (order, false)
        }
        None => (bfs_order(&big_adj), true),
    };

    let total_vol: usize = big_adj.iter().map(Vec::len).sum();
    let mut in_left = vec![false; big.len()];
    let (mut cut, mut vol_left) = (0i64, 0usize);
    // (score, imbalance, k, rest goes left)
    let mut best: Option<(f64, usize, usize, bool)> = None;
    for k in 1..big.len() {
        let v = order[k - 1];
        in_left[v] = true;
        vol_left += big_adj[v].len();
        for &w in &big_adj[v] {
            cut += if in_left[w] { -1 } else { 1 };
        }
        let options: &[bool] = if rest.is_empty() { &[false] } else { &[true, false] };
        for &rest_left in options {
            let (size_l, size_r) = if rest_left { (k + rest.len(), big.len() - k) } else { (k, big.len() - k + rest.len()) };
            if size_l < min_side || size_r < min_side {
                continue;
            }
            let (vl, vr) = if rest_left {
                (vol_left + rest_vol, total_vol - vol_left)
            } else {
                (vol_left, total_vol - vol_left + rest_vol)
            };
            let ncut = cut as f64 / vl as f64 + cut as f64 / vr as f64;
            let imbalance = size_l.abs_diff(size_r);
            let score = if fallback { 0.0 } else { ncut };
            let better = match best {
                None => true,
                Some((s, imb, ..)) => {
                    let tol = 1e-12 * s.abs().max(1.0);
                    score < s - tol || (score <= s + tol && imbalance < imb)
                }
            };
            if better {
                best = Some((score, imbalance, k, rest_left));
            }
        }
    }
    let (_, _, k, rest_left) = best.expect("a split satisfying the balance rule always exists");
    let mut left: Vec<usize> = order[..k].iter().map(|&b| big[b]).collect();
    let mut right: Vec<usize> = order[k..].iter().map(|&b| big[b]).collect();
    if rest_left {
        left.extend_from_slice(&rest);
    } else {
        right.extend_from_slice(&rest);
    }
    Split { left: to_global(left), right: to_global(right), fallback }
}
