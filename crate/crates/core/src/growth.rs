//! Sequential spatial growth: each newborn node lands uniformly in a disk and
//! links to its `K` nearest predecessors, where `K` is drawn per birth.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Poisson;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::meanfield::DegreeHistogram;

/// Position in the plane, in the same length unit as the disk radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist2(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

const PROB_SUM_TOLERANCE: f64 = 1e-12;

/// Discrete law of the number of links a newborn node forms.
#[derive(Debug, Clone, PartialEq)]
pub struct KDistribution {
    support: Vec<(usize, f64)>,
}

impl KDistribution {
    /// `support` holds `(k_i, alpha_i)` with strictly increasing `k_i >= 1`,
    /// positive weights summing to one.
    pub fn new(support: Vec<(usize, f64)>) -> Result<Self> {
        validate_support(&support)?;
        Ok(KDistribution { support })
    }

    pub fn constant(k: usize) -> Result<Self> {
        Self::new(vec![(k, 1.0)])
    }

    /// Equal weight on each of `ks`.
    pub fn uniform(ks: &[usize]) -> Result<Self> {
        let w = 1.0 / ks.len().max(1) as f64;
        Self::new(ks.iter().map(|&k| (k, w)).collect())
    }

    pub fn support(&self) -> &[(usize, f64)] {
        &self.support
    }

    /// Expected number of links per birth.
    pub fn mean(&self) -> f64 {
        self.support.iter().map(|&(k, a)| k as f64 * a).sum()
    }

    pub fn min_k(&self) -> usize {
        self.support[0].0
    }

    pub fn max_k(&self) -> usize {
        self.support[self.support.len() - 1].0
    }

    fn sampler(&self) -> WeightedIndex<f64> {
        WeightedIndex::new(self.support.iter().map(|&(_, a)| a))
            .expect("validated weights are positive")
    }
}

/// Checks the shared invariants of `(k_i, alpha_i)` supports.
pub(crate) fn validate_support(support: &[(usize, f64)]) -> Result<()> {
    if support.is_empty() {
        return Err(Error::config("K support is empty"));
    }
    let mut total = 0.0;
    for (i, &(k, a)) in support.iter().enumerate() {
        if k < 1 {
            return Err(Error::config("K values must be >= 1"));
        }
        if i > 0 && k <= support[i - 1].0 {
            return Err(Error::config("K values must be strictly increasing"));
        }
        if !a.is_finite() || a <= 0.0 {
            return Err(Error::config(format!("probability for k={k} must be positive")));
        }
        total += a;
    }
    if (total - 1.0).abs() > PROB_SUM_TOLERANCE {
        return Err(Error::config(format!("probabilities sum to {total}, not 1")));
    }
    Ok(())
}

/// How many nodes a run produces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeCount {
    Fixed(usize),
    /// Node count drawn from Poisson(density * pi * r^2).
    Poisson { density: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthConfig {
    pub radius: f64,
    pub nodes: NodeCount,
    pub k_dist: KDistribution,
    pub seed: u64,
}

impl GrowthConfig {
    pub fn new(nodes: usize, k_dist: KDistribution, seed: u64) -> Self {
        GrowthConfig {
            radius: 20.0,
            nodes: NodeCount::Fixed(nodes),
            k_dist,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.radius.is_finite() || self.radius <= 0.0 {
            return Err(Error::config("radius must be positive"));
        }
        match self.nodes {
            NodeCount::Fixed(n) if n < 2 => Err(Error::config("node count must be >= 2")),
            NodeCount::Poisson { density } if !density.is_finite() || density <= 0.0 => {
                Err(Error::config("density must be positive"))
            }
            _ => Ok(()),
        }
    }

    /// Parses the key/value document form:
    ///
    /// ```toml
    /// radius = 20.0
    /// nodes = 1000        # or: density = 0.8
    /// k_support = [3, 4, 5]
    /// k_probs = [0.25, 0.5, 0.25]   # optional, uniform when absent
    /// seed = 7
    /// ```
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let doc: GrowthDocument =
            toml::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
        let nodes = match (doc.nodes, doc.density) {
            (Some(n), None) => NodeCount::Fixed(n),
            (None, Some(density)) => NodeCount::Poisson { density },
            _ => return Err(Error::config("exactly one of `nodes` or `density` is required")),
        };
        let k_dist = match doc.k_probs {
            None => KDistribution::uniform(&doc.k_support)?,
            Some(p) if p.len() == doc.k_support.len() => {
                KDistribution::new(doc.k_support.into_iter().zip(p).collect())?
            }
            Some(_) => return Err(Error::config("k_support and k_probs differ in length")),
        };
        let cfg = GrowthConfig {
            radius: doc.radius.unwrap_or(20.0),
            nodes,
            k_dist,
            seed: doc.seed.unwrap_or(0),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        let (nodes, density) = match self.nodes {
            NodeCount::Fixed(n) => (Some(n), None),
            NodeCount::Poisson { density } => (None, Some(density)),
        };
        let doc = GrowthDocument {
            radius: Some(self.radius),
            nodes,
            density,
            k_support: self.k_dist.support.iter().map(|s| s.0).collect(),
            k_probs: Some(self.k_dist.support.iter().map(|s| s.1).collect()),
            seed: Some(self.seed),
        };
        toml::to_string(&doc).expect("plain document serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GrowthDocument {
    radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    density: Option<f64>,
    k_support: Vec<usize>,
    k_probs: Option<Vec<f64>>,
    seed: Option<u64>,
}

/// Area-uniform point in the disk of the given radius centred at the origin.
pub fn sample_position<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> Point {
    let r2 = radius * radius;
    loop {
        let x = rng.random_range(-radius..=radius);
        let y = rng.random_range(-radius..=radius);
        if x * x + y * y <= r2 {
            return Point { x, y };
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    dist2: f64,
    node: usize,
}

impl Candidate {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.dist2
            .total_cmp(&other.dist2)
            .then(self.node.cmp(&other.node))
    }
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.key_cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key_cmp(other)
    }
}

/// Keeps the `k` best candidates under (distance, id) order.
struct TopK {
    k: usize,
    heap: BinaryHeap<Candidate>,
}

impl TopK {
    fn new(k: usize) -> Self {
        TopK {
            k,
            heap: BinaryHeap::with_capacity(k + 1),
        }
    }

    fn offer(&mut self, c: Candidate) {
        if self.heap.len() < self.k {
            self.heap.push(c);
        } else if let Some(worst) = self.heap.peek() {
            if c < *worst {
                self.heap.pop();
                self.heap.push(c);
            }
        }
    }

    fn full(&self) -> bool {
        self.heap.len() == self.k
    }

    fn worst_dist2(&self) -> f64 {
        self.heap.peek().map_or(f64::INFINITY, |c| c.dist2)
    }

    fn into_sorted_ids(self) -> Vec<usize> {
        self.heap.into_sorted_vec().into_iter().map(|c| c.node).collect()
    }
}

/// The `min(k, |existing|)` nodes closest to `query`, nearest first; equal
/// distances go to the lower node id. Linear scan.
pub fn k_nearest(query: Point, existing: &[(usize, Point)], k: usize) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(Error::config("k must be >= 1"));
    }
    if existing.is_empty() {
        return Err(Error::NoAttachmentTargets);
    }
    let mut top = TopK::new(k.min(existing.len()));
    for &(node, p) in existing {
        top.offer(Candidate {
            dist2: query.dist2(&p),
            node,
        });
    }
    Ok(top.into_sorted_ids())
}

/// Below this many points queries scan linearly.
const LINEAR_SCAN_LIMIT: usize = 64;

/// Uniform-grid bucket index over the square enclosing a disk.
///
/// Queries search rings of cells outward from the query cell and stop once
/// the k-th best distance is strictly inside the searched block, so results
/// always equal a full scan.
#[derive(Debug, Clone)]
pub struct GridIndex {
    origin: f64,
    cell: f64,
    side: usize,
    cells: Vec<Vec<u32>>,
    points: Vec<(usize, Point)>,
}

impl GridIndex {
    /// Index sized for about two points per cell once `expected_points` are in.
    pub fn new(radius: f64, expected_points: usize) -> Self {
        let side = ((expected_points as f64 / 2.0).sqrt().ceil() as usize).clamp(1, 4096);
        GridIndex {
            origin: -radius,
            cell: 2.0 * radius / side as f64,
            side,
            cells: vec![Vec::new(); side * side],
            points: Vec::with_capacity(expected_points),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn cell_coord(&self, v: f64) -> usize {
        let c = ((v - self.origin) / self.cell).floor();
        if c.is_nan() || c < 0.0 {
            0
        } else {
            (c as usize).min(self.side - 1)
        }
    }

    pub fn insert(&mut self, node: usize, p: Point) {
        let idx = self.points.len() as u32;
        self.points.push((node, p));
        let (cx, cy) = (self.cell_coord(p.x), self.cell_coord(p.y));
        self.cells[cy * self.side + cx].push(idx);
    }

    /// Same contract as [`k_nearest`] over the inserted points.
    pub fn k_nearest(&self, query: Point, k: usize) -> Result<Vec<usize>> {
        if k == 0 {
            return Err(Error::config("k must be >= 1"));
        }
        if self.points.is_empty() {
            return Err(Error::NoAttachmentTargets);
        }
        if self.points.len() < LINEAR_SCAN_LIMIT || k >= self.points.len() {
            return k_nearest(query, &self.points, k);
        }
        let mut top = TopK::new(k);
        let cx = self.cell_coord(query.x) as isize;
        let cy = self.cell_coord(query.y) as isize;
        let side = self.side as isize;
        for ring in 0isize.. {
            let (x0, x1, y0, y1) = (cx - ring, cx + ring, cy - ring, cy + ring);
            let mut visit = |x: isize, y: isize| {
                for &i in &self.cells[(y * side + x) as usize] {
                    let (node, p) = self.points[i as usize];
                    top.offer(Candidate {
                        dist2: query.dist2(&p),
                        node,
                    });
                }
            };
            for y in y0.max(0)..=y1.min(side - 1) {
                if y == y0 || y == y1 {
                    for x in x0.max(0)..=x1.min(side - 1) {
                        visit(x, y);
                    }
                } else {
                    // interior rows of the ring only touch its two side columns
                    if x0 >= 0 {
                        visit(x0, y);
                    }
                    if x1 < side {
                        visit(x1, y);
                    }
                }
            }
            let covers_all = x0 <= 0 && y0 <= 0 && x1 >= side - 1 && y1 >= side - 1;
            if covers_all {
                break;
            }
            if top.full() {
                let bound = self.block_clearance(query, x0, x1, y0, y1);
                if bound > 0.0 && top.worst_dist2() < bound * bound {
                    break;
                }
            }
        }
        Ok(top.into_sorted_ids())
    }

    /// Distance from `q` to the nearest side of the cell block that still has
    /// unsearched cells beyond it.
    fn block_clearance(&self, q: Point, x0: isize, x1: isize, y0: isize, y1: isize) -> f64 {
        let side = self.side as isize;
        let mut bound = f64::INFINITY;
        if x0 > 0 {
            bound = bound.min(q.x - (self.origin + x0 as f64 * self.cell));
        }
        if x1 < side - 1 {
            bound = bound.min(self.origin + (x1 + 1) as f64 * self.cell - q.x);
        }
        if y0 > 0 {
            bound = bound.min(q.y - (self.origin + y0 as f64 * self.cell));
        }
        if y1 < side - 1 {
            bound = bound.min(self.origin + (y1 + 1) as f64 * self.cell - q.y);
        }
        bound
    }
}

/// A grown network together with the link count drawn at each birth.
#[derive(Debug, Clone)]
pub struct GrowthOutcome {
    pub graph: Graph,
    /// `drawn_k[t]` is the K drawn for node `t`; the node linked to
    /// `min(drawn_k[t], t)` predecessors.
    pub drawn_k: Vec<usize>,
}

impl GrowthOutcome {
    /// Edge count implied by the clamping rule.
    pub fn expected_edge_count(&self) -> usize {
        self.drawn_k
            .iter()
            .enumerate()
            .map(|(t, &k)| k.min(t))
            .sum()
    }
}

/// Grows a network per `config`. Deterministic in the seed.
pub fn grow(config: &GrowthConfig) -> Result<Graph> {
    grow_traced(config).map(|o| o.graph)
}

pub fn grow_traced(config: &GrowthConfig) -> Result<GrowthOutcome> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = match config.nodes {
        NodeCount::Fixed(n) => n,
        NodeCount::Poisson { density } => {
            let mean = density * std::f64::consts::PI * config.radius * config.radius;
            let poisson = Poisson::new(mean).map_err(|e| Error::config(e.to_string()))?;
            let n = poisson.sample(&mut rng) as usize;
            if n < 2 {
                return Err(Error::config(format!(
                    "Poisson draw gave {n} nodes; need at least 2"
                )));
            }
            n
        }
    };
    let sampler = config.k_dist.sampler();
    let ks: Vec<usize> = config.k_dist.support.iter().map(|s| s.0).collect();

    let mut index = GridIndex::new(config.radius, n);
    let mut adjacency: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut positions = Vec::with_capacity(n);
    let mut drawn_k = Vec::with_capacity(n);
    for t in 0..n {
        let p = sample_position(&mut rng, config.radius);
        let k = ks[sampler.sample(&mut rng)];
        adjacency.push(Vec::with_capacity(k));
        if t > 0 {
            for target in index.k_nearest(p, k.min(t))? {
                adjacency[t].push(target);
                adjacency[target].push(t);
            }
        }
        index.insert(t, p);
        positions.push(p);
        drawn_k.push(k);
    }
    let graph = Graph::from_simple_adjacency(adjacency).with_positions(positions);
    Ok(GrowthOutcome { graph, drawn_k })
}

/// Degree -> node count for `g`.
pub fn degree_histogram(g: &Graph) -> DegreeHistogram {
    DegreeHistogram::from_degrees(g.degrees())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest, ProptestConfig};

    fn brute_force(query: Point, pts: &[(usize, Point)], k: usize) -> Vec<usize> {
        let mut all: Vec<(f64, usize)> = pts.iter().map(|&(i, p)| (query.dist2(&p), i)).collect();
        all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        all.into_iter().take(k).map(|(_, i)| i).collect()
    }

    #[test]
    fn k_nearest_orders_by_distance() {
        let existing = [
            (1, Point::new(1.0, 0.0)),
            (2, Point::new(2.0, 0.0)),
            (3, Point::new(0.0, 3.0)),
        ];
        let q = Point::new(0.0, 0.0);
        assert_eq!(k_nearest(q, &existing, 2).unwrap(), vec![1, 2]);
        assert_eq!(k_nearest(q, &existing, 5).unwrap(), vec![1, 2, 3]);
        assert!(matches!(k_nearest(q, &[], 2), Err(Error::NoAttachmentTargets)));
    }

    #[test]
    fn ties_go_to_lower_id() {
        let existing = [
            (7, Point::new(1.0, 0.0)),
            (3, Point::new(-1.0, 0.0)),
            (5, Point::new(0.0, 1.0)),
        ];
        assert_eq!(k_nearest(Point::new(0.0, 0.0), &existing, 2).unwrap(), vec![3, 5]);
    }

    #[test]
    fn coincident_points_are_distinct_nodes() {
        let existing = [(2, Point::new(0.5, 0.5)), (1, Point::new(0.5, 0.5))];
        assert_eq!(k_nearest(Point::new(0.5, 0.5), &existing, 2).unwrap(), vec![1, 2]);
    }

    #[test]
    fn grid_matches_scan_on_200_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<(usize, Point)> = (0..200).map(|i| (i, sample_position(&mut rng, 1.0))).collect();
        let mut index = GridIndex::new(1.0, 200);
        for &(i, p) in &pts {
            index.insert(i, p);
        }
        for _ in 0..500 {
            let q = sample_position(&mut rng, 1.0);
            assert_eq!(index.k_nearest(q, 4).unwrap(), brute_force(q, &pts, 4));
        }
    }

    #[test]
    fn samples_stay_in_disk_and_are_area_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        let mut inner = 0usize;
        for _ in 0..n {
            let p = sample_position(&mut rng, 1.0);
            let r2 = p.x * p.x + p.y * p.y;
            assert!(r2 <= 1.0);
            if r2 <= 0.25 {
                inner += 1;
            }
        }
        let frac = inner as f64 / n as f64;
        assert!((frac - 0.25).abs() <= 0.01, "inner fraction {frac}");
    }

    #[test]
    fn two_nodes_make_one_edge() {
        let g = grow(&GrowthConfig::new(2, KDistribution::constant(3).unwrap(), 9)).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn seed_clique_for_constant_k() {
        let g = grow(&GrowthConfig::new(5, KDistribution::constant(4).unwrap(), 1)).unwrap();
        assert_eq!(g.edge_count(), 10);
        assert_eq!(degree_histogram(&g).count(4), 5);
    }

    #[test]
    fn edge_count_follows_clamping() {
        let out = grow_traced(&GrowthConfig::new(10_000, KDistribution::constant(2).unwrap(), 5)).unwrap();
        assert_eq!(out.graph.edge_count(), 19_997);
        assert_eq!(out.expected_edge_count(), 19_997);
        let h = degree_histogram(&out.graph);
        let weighted: u64 = h.iter().map(|(d, c)| d as u64 * c).sum();
        assert_eq!(weighted, 2 * 19_997);
        assert!(out.graph.is_connected());
    }

    #[test]
    fn config_validation() {
        let mut cfg = GrowthConfig::new(10, KDistribution::constant(1).unwrap(), 0);
        cfg.radius = 0.0;
        assert!(cfg.validate().is_err());
        cfg.radius = 1.0;
        cfg.nodes = NodeCount::Fixed(1);
        assert!(cfg.validate().is_err());
        assert!(KDistribution::new(vec![(2, 0.5), (2, 0.5)]).is_err());
        assert!(KDistribution::new(vec![(0, 1.0)]).is_err());
        assert!(KDistribution::new(vec![(1, 0.5), (2, 0.4)]).is_err());
        assert!(KDistribution::new(vec![(1, 0.0), (2, 1.0)]).is_err());
    }

    #[test]
    fn config_document_round_trip() {
        let text = "radius = 5.0\nnodes = 300\nk_support = [3, 4, 5]\nseed = 42\n";
        let cfg = GrowthConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.nodes, NodeCount::Fixed(300));
        assert!((cfg.k_dist.mean() - 4.0).abs() < 1e-12);
        let again = GrowthConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(cfg, again);
        assert!(GrowthConfig::from_toml_str("nodes = 3\ndensity = 1.0\nk_support=[1]").is_err());
    }

    #[test]
    fn poisson_mode_draws_node_count() {
        let cfg = GrowthConfig {
            radius: 10.0,
            nodes: NodeCount::Poisson { density: 2.0 },
            k_dist: KDistribution::constant(2).unwrap(),
            seed: 4,
        };
        let g = grow(&cfg).unwrap();
        let mean = 2.0 * std::f64::consts::PI * 100.0;
        assert!((g.node_count() as f64 - mean).abs() < 5.0 * mean.sqrt());
        assert_eq!(grow(&cfg).unwrap(), g);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn grid_index_equals_linear_scan(seed in any::<u64>(), n in 1usize..400, k in 1usize..12) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<(usize, Point)> = (0..n).map(|i| (i, sample_position(&mut rng, 3.0))).collect();
            let mut index = GridIndex::new(3.0, n);
            for &(i, p) in &pts {
                index.insert(i, p);
            }
            for _ in 0..20 {
                // queries partly outside the disk exercise the clamped cells
                let q = Point::new(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
                prop_assert_eq!(index.k_nearest(q, k).unwrap(), brute_force(q, &pts, k));
            }
        }

        #[test]
        fn grown_graphs_are_simple_connected_and_deterministic(
            seed in any::<u64>(),
            n in 2usize..300,
            ks in proptest::sample::subsequence(vec![1usize, 2, 3, 4, 5, 6], 1..4),
        ) {
            let cfg = GrowthConfig::new(n, KDistribution::uniform(&ks).unwrap(), seed);
            let out = grow_traced(&cfg).unwrap();
            let g = &out.graph;
            prop_assert_eq!(g.edge_count(), out.expected_edge_count());
            for u in 0..g.node_count() {
                let nb = g.neighbors(u);
                prop_assert!(!nb.contains(&u));
                prop_assert!(nb.windows(2).all(|w| w[0] < w[1]));
                for &v in nb {
                    prop_assert!(g.has_edge(v, u));
                }
            }
            prop_assert!(g.is_connected());
            prop_assert_eq!(&grow(&cfg).unwrap(), g);
        }
    }
}
