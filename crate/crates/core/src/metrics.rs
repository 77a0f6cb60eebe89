//! Diameter and shortest-path betweenness.
//!
//! Both run one breadth-first search per source. Sources are processed in
//! parallel in fixed blocks whose partial sums are added in source order, so
//! results do not depend on the thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::growth::{grow, GrowthConfig, KDistribution};
use crate::stats::mean_std;

const UNSEEN: u32 = u32::MAX;
const SOURCE_BLOCK: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComponentEccentricity {
    pub size: usize,
    /// Largest eccentricity inside the component, i.e. its diameter.
    pub max_eccentricity: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiameterReport {
    /// Diameter of the largest connected component, in hops.
    pub diameter: usize,
    /// Every component, largest first.
    pub per_component: Vec<ComponentEccentricity>,
    pub largest_component_size: usize,
}

/// Hop distances from `source`; unreachable nodes keep `UNSEEN`.
/// `dist` and `queue` are scratch buffers of length `n`.
fn bfs_levels(offsets: &[u32], targets: &[u32], source: usize, dist: &mut [u32], queue: &mut Vec<u32>) -> u32 {
    dist.fill(UNSEEN);
    queue.clear();
    dist[source] = 0;
    queue.push(source as u32);
    let mut head = 0;
    let mut far = 0;
    while head < queue.len() {
        let u = queue[head] as usize;
        head += 1;
        let du = dist[u];
        far = du;
        for &v in &targets[offsets[u] as usize..offsets[u + 1] as usize] {
            if dist[v as usize] == UNSEEN {
                dist[v as usize] = du + 1;
                queue.push(v);
            }
        }
    }
    far
}

/// Eccentricity of every node within its own component.
pub fn eccentricities(g: &Graph) -> Vec<usize> {
    let n = g.node_count();
    let (offsets, targets) = g.csr();
    (0..n)
        .into_par_iter()
        .map_init(
            || (vec![UNSEEN; n], Vec::with_capacity(n)),
            |(dist, queue), s| bfs_levels(&offsets, &targets, s, dist, queue) as usize,
        )
        .collect()
}

/// Exact diameter of the largest component by breadth-first search from
/// every node, with a census of all components.
pub fn diameter(g: &Graph) -> Result<DiameterReport> {
    if g.node_count() < 2 {
        return Err(Error::config("diameter needs at least 2 nodes"));
    }
    if g.edge_count() == 0 {
        return Err(Error::NoPaths);
    }
    let ecc = eccentricities(g);
    let per_component: Vec<ComponentEccentricity> = g
        .components()
        .iter()
        .map(|members| ComponentEccentricity {
            size: members.len(),
            max_eccentricity: members.iter().map(|&u| ecc[u]).max().unwrap_or(0),
        })
        .collect();
    Ok(DiameterReport {
        diameter: per_component[0].max_eccentricity,
        largest_component_size: per_component[0].size,
        per_component,
    })
}

/// Node and edge betweenness, each unordered endpoint pair counted once.
#[derive(Debug, Clone, PartialEq)]
pub struct BetweennessResult {
    pub node_scores: Vec<f64>,
    /// Canonical edges `(u, v)`, `u < v`, aligned with `edge_scores`.
    pub edges: Vec<(usize, usize)>,
    pub edge_scores: Vec<f64>,
    /// Set when the input was disconnected and scores cover only the largest
    /// component; everything outside it scores zero.
    pub largest_component_only: bool,
}

struct Accumulator {
    nodes: Vec<f64>,
    edges: Vec<f64>,
}

impl Accumulator {
    fn zeros(n: usize, m: usize) -> Self {
        Accumulator {
            nodes: vec![0.0; n],
            edges: vec![0.0; m],
        }
    }

    fn add(&mut self, other: &Accumulator) {
        for (a, b) in self.nodes.iter_mut().zip(&other.nodes) {
            *a += b;
        }
        for (a, b) in self.edges.iter_mut().zip(&other.edges) {
            *a += b;
        }
    }
}

struct BrandesScratch {
    dist: Vec<u32>,
    sigma: Vec<f64>,
    delta: Vec<f64>,
    order: Vec<u32>,
}

/// Edge id of each CSR slot, edges numbered in canonical order.
fn slot_edge_ids(g: &Graph, offsets: &[u32], targets: &[u32]) -> Vec<u32> {
    let mut ids = vec![0u32; targets.len()];
    let mut next = 0u32;
    for u in 0..g.node_count() {
        for slot in offsets[u] as usize..offsets[u + 1] as usize {
            let v = targets[slot] as usize;
            if v > u {
                ids[slot] = next;
                next += 1;
            }
        }
    }
    for u in 0..g.node_count() {
        for slot in offsets[u] as usize..offsets[u + 1] as usize {
            let v = targets[slot] as usize;
            if v < u {
                // the mirror slot v -> u was numbered above
                let row = &targets[offsets[v] as usize..offsets[v + 1] as usize];
                let pos = row.binary_search(&(u as u32)).expect("symmetric adjacency");
                ids[slot] = ids[offsets[v] as usize + pos];
            }
        }
    }
    ids
}

#[allow(clippy::too_many_arguments)]
fn accumulate_source(
    s: usize,
    offsets: &[u32],
    targets: &[u32],
    slot_edges: &[u32],
    scratch: &mut BrandesScratch,
    acc: &mut Accumulator,
) {
    let BrandesScratch {
        dist,
        sigma,
        delta,
        order,
    } = scratch;
    dist.fill(UNSEEN);
    sigma.fill(0.0);
    delta.fill(0.0);
    order.clear();
    dist[s] = 0;
    sigma[s] = 1.0;
    order.push(s as u32);
    let mut head = 0;
    while head < order.len() {
        let u = order[head] as usize;
        head += 1;
        let du = dist[u];
        for &v in &targets[offsets[u] as usize..offsets[u + 1] as usize] {
            let v = v as usize;
            if dist[v] == UNSEEN {
                dist[v] = du + 1;
                order.push(v as u32);
            }
            if dist[v] == du + 1 {
                sigma[v] += sigma[u];
            }
        }
    }
    for &w in order.iter().rev() {
        let w = w as usize;
        let dw = dist[w];
        if dw > 0 {
            let coeff = (1.0 + delta[w]) / sigma[w];
            for slot in offsets[w] as usize..offsets[w + 1] as usize {
                let v = targets[slot] as usize;
                if dist[v] + 1 == dw {
                    let c = sigma[v] * coeff;
                    delta[v] += c;
                    acc.edges[slot_edges[slot] as usize] += c;
                }
            }
        }
        if w != s {
            acc.nodes[w] += delta[w];
        }
    }
}

fn brandes_connected(g: &Graph) -> (Vec<f64>, Vec<f64>) {
    let n = g.node_count();
    let m = g.edge_count();
    let (offsets, targets) = g.csr();
    let slot_edges = slot_edge_ids(g, &offsets, &targets);
    let sources: Vec<usize> = (0..n).collect();
    let blocks: Vec<&[usize]> = sources.chunks(SOURCE_BLOCK).collect();
    let wave = 4 * rayon::current_num_threads().max(1);
    let mut total = Accumulator::zeros(n, m);
    for batch in blocks.chunks(wave) {
        let partials: Vec<Accumulator> = batch
            .par_iter()
            .map(|block| {
                let mut scratch = BrandesScratch {
                    dist: vec![UNSEEN; n],
                    sigma: vec![0.0; n],
                    delta: vec![0.0; n],
                    order: Vec::with_capacity(n),
                };
                let mut acc = Accumulator::zeros(n, m);
                for &s in block.iter() {
                    accumulate_source(s, &offsets, &targets, &slot_edges, &mut scratch, &mut acc);
                }
                acc
            })
            .collect();
        for p in &partials {
            total.add(p);
        }
    }
    // every unordered pair was reached from both ends
    for x in total.nodes.iter_mut().chain(total.edges.iter_mut()) {
        *x *= 0.5;
    }
    (total.nodes, total.edges)
}

/// Exact node and edge betweenness.
///
/// Node scores sum, over unordered pairs `{j, k}` not containing the node,
/// the fraction of shortest `j`-`k` paths through it. Edge scores sum, over
/// all unordered pairs, the fraction of shortest paths using the edge.
pub fn betweenness(g: &Graph) -> BetweennessResult {
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let components = g.components();
    if components.len() <= 1 {
        let (node_scores, edge_scores) = brandes_connected(g);
        return BetweennessResult {
            node_scores,
            edges,
            edge_scores,
            largest_component_only: false,
        };
    }
    let (sub, original) = g.induced_subgraph(&components[0]);
    let (sub_nodes, sub_edges) = brandes_connected(&sub);
    let mut node_scores = vec![0.0; g.node_count()];
    for (i, &u) in original.iter().enumerate() {
        node_scores[u] = sub_nodes[i];
    }
    let mut edge_scores = vec![0.0; edges.len()];
    for ((a, b), score) in sub.edges().zip(sub_edges) {
        let key = (original[a], original[b]);
        let idx = edges.binary_search(&key).expect("subgraph edge exists in parent");
        edge_scores[idx] = score;
    }
    BetweennessResult {
        node_scores,
        edges,
        edge_scores,
        largest_component_only: true,
    }
}

/// Equal-width histogram of scores normalized to unit total mass.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreHistogram {
    pub lower: f64,
    pub width: f64,
    pub mass: Vec<f64>,
}

impl ScoreHistogram {
    /// `(lower edge, upper edge, mass)` per bin.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.mass.iter().enumerate().map(move |(i, &m)| {
            let lo = self.lower + i as f64 * self.width;
            (lo, lo + self.width, m)
        })
    }
}

/// Histogram of raw scores over `[min, max]` in `bins` equal bins; the top
/// bin includes the maximum. A constant input puts all mass in the first bin.
pub fn betweenness_pdf(scores: &[f64], bins: usize) -> Result<ScoreHistogram> {
    if bins < 2 {
        return Err(Error::config("need at least 2 bins"));
    }
    if scores.is_empty() {
        return Err(Error::EmptyHistogram);
    }
    let lo = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let width = if span > 0.0 { span / bins as f64 } else { 1.0 };
    let mut counts = vec![0u64; bins];
    for &x in scores {
        let b = if span > 0.0 {
            (((x - lo) / width) as usize).min(bins - 1)
        } else {
            0
        };
        counts[b] += 1;
    }
    let n = scores.len() as f64;
    Ok(ScoreHistogram {
        lower: lo,
        width,
        mass: counts.iter().map(|&c| c as f64 / n).collect(),
    })
}

/// One row of a diameter-versus-size experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    pub nodes: usize,
    pub mean_diameter: f64,
    pub std_diameter: f64,
}

/// Mean diameter of grown networks for each size, over seeds
/// `base_seed .. base_seed + seeds_per_size`.
pub fn diameter_scaling(
    k_dist: &KDistribution,
    sizes: &[usize],
    seeds_per_size: usize,
    base_seed: u64,
    radius: f64,
) -> Result<Vec<ScalingRow>> {
    if sizes.is_empty() {
        return Err(Error::config("sizes must be nonempty"));
    }
    if let Some(&bad) = sizes.iter().find(|&&n| n < 10) {
        return Err(Error::config(format!("size {bad} is below 10")));
    }
    if seeds_per_size == 0 {
        return Err(Error::config("need at least one seed per size"));
    }
    sizes
        .iter()
        .map(|&n| {
            let diameters = (0..seeds_per_size as u64)
                .map(|i| {
                    let mut cfg = GrowthConfig::new(n, k_dist.clone(), base_seed.wrapping_add(i));
                    cfg.radius = radius;
                    Ok(diameter(&grow(&cfg)?)?.diameter as f64)
                })
                .collect::<Result<Vec<f64>>>()?;
            let (mean_diameter, std_diameter) = mean_std(&diameters);
            Ok(ScalingRow {
                nodes: n,
                mean_diameter,
                std_diameter,
            })
        })
        .collect()
}
