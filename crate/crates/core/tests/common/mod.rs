//! Reference implementations shared by the integration tests. Each one is
//! written for clarity, not speed, and shares no code with the library.

#![allow(dead_code)]

use std::collections::VecDeque;

use gridgrowth::Graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn adjacency(g: &Graph) -> Vec<Vec<usize>> {
    (0..g.node_count()).map(|v| g.neighbors(v).to_vec()).collect()
}

pub fn bfs(adj: &[Vec<usize>], s: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    dist[s] = Some(0);
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap();
        for &v in &adj[u] {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

pub type EdgeScores = Vec<((usize, usize), f64)>;

/// Node and edge betweenness by listing every shortest path between every
/// unordered pair. Edge scores are keyed by `(min, max)` in `edges` order.
pub fn betweenness_by_enumeration(g: &Graph) -> (Vec<f64>, EdgeScores) {
    let adj = adjacency(g);
    let n = adj.len();
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let mut node = vec![0.0; n];
    let mut edge = vec![0.0; edges.len()];
    let edge_index = |u: usize, v: usize| {
        let key = (u.min(v), u.max(v));
        edges.binary_search(&key).unwrap()
    };
    for s in 0..n {
        let ds = bfs(&adj, s);
        for t in s + 1..n {
            let Some(target) = ds[t] else { continue };
            let dt = bfs(&adj, t);
            let mut paths: Vec<Vec<usize>> = Vec::new();
            let mut stack = vec![vec![s]];
            while let Some(path) = stack.pop() {
                let last = *path.last().unwrap();
                if last == t {
                    paths.push(path);
                    continue;
                }
                let step = ds[last].unwrap() + 1;
                for &w in &adj[last] {
                    if ds[w] == Some(step) && dt[w] == Some(target - step) {
                        let mut next = path.clone();
                        next.push(w);
                        stack.push(next);
                    }
                }
            }
            let share = 1.0 / paths.len() as f64;
            for p in &paths {
                for &v in &p[1..p.len() - 1] {
                    node[v] += share;
                }
                for w in p.windows(2) {
                    edge[edge_index(w[0], w[1])] += share;
                }
            }
        }
    }
    (node, edges.into_iter().zip(edge).collect())
}

/// Largest finite shortest-path length by Floyd-Warshall.
pub fn floyd_warshall_diameter(g: &Graph) -> usize {
    let n = g.node_count();
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for (u, v) in g.edges() {
        d[u][v] = 1;
        d[v][u] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d.iter()
        .flatten()
        .copied()
        .filter(|&x| x < inf)
        .max()
        .unwrap_or(0)
}

/// Connected G(n, p) sample: a random spanning tree plus independent extra edges.
pub fn random_connected(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Graph {
    let mut pairs = Vec::new();
    for v in 1..n {
        pairs.push((rng.random_range(0..v), v));
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                pairs.push((u, v));
            }
        }
    }
    Graph::from_edges(n, pairs).0
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Exact expected S, I, R counts per step for the synchronous chain, by
/// evolving the full distribution over joint node states. `sir` selects
/// removal instead of recovery; `exit` is the matching probability.
pub fn markov_chain_means(
    g: &Graph,
    beta: f64,
    exit: f64,
    sir: bool,
    initial: &[usize],
    steps: usize,
) -> Vec<[f64; 3]> {
    let n = g.node_count();
    let base: usize = if sir { 3 } else { 2 };
    let states = base.pow(n as u32);
    let decode = |mut code: usize| -> Vec<usize> {
        (0..n)
            .map(|_| {
                let s = code % base;
                code /= base;
                s
            })
            .collect()
    };
    let encode = |nodes: &[usize]| nodes.iter().rev().fold(0, |acc, &s| acc * base + s);
    let mut init = vec![0usize; n];
    for &v in initial {
        init[v] = 1;
    }
    let mut dist = vec![0.0; states];
    dist[encode(&init)] = 1.0;

    let summarize = |dist: &[f64]| {
        let mut out = [0.0; 3];
        for (code, &p) in dist.iter().enumerate() {
            if p > 0.0 {
                for s in decode(code) {
                    out[s] += p;
                }
            }
        }
        out
    };
    let mut means = vec![summarize(&dist)];
    for _ in 0..steps {
        let mut next = vec![0.0; states];
        for (code, &p) in dist.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let cur = decode(code);
            // per-node (next state, probability) options
            let options: Vec<Vec<(usize, f64)>> = (0..n)
                .map(|v| match cur[v] {
                    0 => {
                        let j = g.neighbors(v).iter().filter(|&&w| cur[w] == 1).count();
                        let q = 1.0 - (1.0 - beta).powi(j as i32);
                        vec![(1, q), (0, 1.0 - q)]
                    }
                    1 => {
                        let exit_state = if sir { 2 } else { 0 };
                        vec![(exit_state, exit), (1, 1.0 - exit)]
                    }
                    _ => vec![(2, 1.0)],
                })
                .collect();
            let mut partial: Vec<(Vec<usize>, f64)> = vec![(Vec::new(), p)];
            for opts in &options {
                let mut grown = Vec::with_capacity(partial.len() * opts.len());
                for (prefix, q) in &partial {
                    for &(s, r) in opts {
                        if r > 0.0 {
                            let mut v = prefix.clone();
                            v.push(s);
                            grown.push((v, q * r));
                        }
                    }
                }
                partial = grown;
            }
            for (nodes, q) in partial {
                next[encode(&nodes)] += q;
            }
        }
        dist = next;
        means.push(summarize(&dist));
    }
    means
}

/// Coefficient of determination of the least-squares line through the points.
pub fn r_squared(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    sxy * sxy / (sxx * syy)
}

/// Stationary degree law of the growth process, built from the recursion
/// `f(m) = f(m - 1) * mu / (1 + mu) + P(K = m) / (1 + mu)`.
pub fn degree_law_by_recursion(support: &[(usize, f64)], max_degree: usize) -> Vec<f64> {
    let mu: f64 = support.iter().map(|&(k, a)| k as f64 * a).sum();
    let mut f = vec![0.0; max_degree + 1];
    for m in 1..=max_degree {
        let born: f64 = support.iter().filter(|s| s.0 == m).map(|s| s.1).sum();
        f[m] = f[m - 1] * mu / (1.0 + mu) + born / (1.0 + mu);
    }
    f
}
