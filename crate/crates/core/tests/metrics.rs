mod common;

use gridgrowth::metrics::{betweenness, betweenness_pdf, diameter};
use gridgrowth::stats::{median, spearman};
use gridgrowth::{grow, Graph, GrowthConfig, KDistribution};
use proptest::prelude::*;

fn grown(n: usize, ks: &[usize], seed: u64) -> Graph {
    grow(&GrowthConfig::new(n, KDistribution::uniform(ks).unwrap(), seed)).unwrap()
}

fn arb_graph() -> impl Strategy<Value = Graph> {
    (2usize..18, 0.0f64..0.6, any::<u64>()).prop_map(|(n, p, seed)| {
        let mut rng = common::rng(seed);
        common::random_connected(n, p, &mut rng)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn betweenness_matches_enumeration(g in arb_graph()) {
        let got = betweenness(&g);
        let (node, edge) = common::betweenness_by_enumeration(&g);
        for (a, b) in got.node_scores.iter().zip(&node) {
            prop_assert!((a - b).abs() <= 1e-9 * b.max(1.0));
        }
        for (a, (_, b)) in got.edge_scores.iter().zip(&edge) {
            prop_assert!((a - b).abs() <= 1e-9 * b.max(1.0));
        }
    }

    #[test]
    fn incident_edges_carry_node_score(g in arb_graph()) {
        let r = betweenness(&g);
        let mut incident = vec![0.0; g.node_count()];
        for (&(u, v), s) in r.edges.iter().zip(&r.edge_scores) {
            incident[u] += s;
            incident[v] += s;
        }
        for (i, &l) in r.node_scores.iter().enumerate() {
            prop_assert!(l >= 0.0);
            prop_assert!(incident[i] + 1e-9 >= l);
            if g.degree(i) == 1 {
                prop_assert_eq!(l, 0.0);
            }
        }
    }

    #[test]
    fn diameter_matches_floyd_warshall(g in arb_graph()) {
        prop_assume!(g.edge_count() > 0);
        let d = diameter(&g).unwrap().diameter;
        prop_assert_eq!(d, common::floyd_warshall_diameter(&g));
        prop_assert!(d >= 1 && d < g.node_count());
    }
}

#[test]
fn diameter_respects_sanity_floor() {
    for seed in 0..5 {
        for n in [100, 1000, 3000] {
            let g = grown(n, &[1, 2, 3], seed);
            let d = diameter(&g).unwrap().diameter as f64;
            let floor = (n as f64).ln() / g.mean_degree().ln() - 2.0;
            assert!(d >= floor, "n {n} seed {seed}: {d} < {floor}");
            assert!(d <= (n - 1) as f64);
        }
    }
}

#[test]
fn edge_score_tracks_degree_product() {
    for seed in 0..5 {
        let g = grown(2000, &[1, 2, 3], seed);
        let r = betweenness(&g);
        let products: Vec<f64> = r.edges.iter().map(|&(u, v)| (g.degree(u) * g.degree(v)) as f64).collect();
        let rho = spearman(&r.edge_scores, &products);
        assert!(rho > 0.0, "seed {seed}: rho {rho}");
    }
}

#[test]
fn node_scores_are_right_skewed() {
    let g = grown(2000, &[1, 2, 3], 4);
    let r = betweenness(&g);
    let max = r.node_scores.iter().copied().fold(0.0, f64::max);
    assert!(max > 10.0 * median(&r.node_scores));
    let pdf = betweenness_pdf(&r.node_scores, 50).unwrap();
    assert!((pdf.mass.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(pdf.mass[0] > pdf.mass[pdf.mass.len() / 2]);
}
