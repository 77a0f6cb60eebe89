use gridgrowth::growth::degree_histogram;
use gridgrowth::meanfield::asymptotic_fraction;
use gridgrowth::{grow, GrowthConfig, KDistribution};

fn mean_tv(dist: &KDistribution) -> f64 {
    let tvs: Vec<f64> = (1..=5)
        .map(|seed| {
            let g = grow(&GrowthConfig::new(10_000, dist.clone(), seed)).unwrap();
            degree_histogram(&g).total_variation(|m| asymptotic_fraction(dist, m))
        })
        .collect();
    tvs.iter().sum::<f64>() / tvs.len() as f64
}

#[test]
fn histogram_follows_discrete_law_for_constant_k() {
    for k in 1..=3 {
        let tv = mean_tv(&KDistribution::constant(k).unwrap());
        assert!(tv <= 0.05, "K={k}: tv {tv}");
    }
}

#[test]
fn histogram_follows_discrete_law_for_mixture() {
    let tv = mean_tv(&KDistribution::uniform(&[3, 4, 5]).unwrap());
    assert!(tv <= 0.05, "tv {tv}");
}

#[test]
fn poisson_node_count_concentrates() {
    let dist = KDistribution::constant(2).unwrap();
    let mut cfg = GrowthConfig::new(2, dist, 3);
    cfg.nodes = gridgrowth::NodeCount::Poisson { density: 1.0 };
    let g = grow(&cfg).unwrap();
    let mean = std::f64::consts::PI * 400.0;
    assert!((g.node_count() as f64 - mean).abs() < 5.0 * mean.sqrt());
    assert!(g.is_connected());
}
